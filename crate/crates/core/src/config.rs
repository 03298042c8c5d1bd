//! Run configuration: TOML sections (chain, circuit, ramp, decoherence,
//! disorder, scan, output) with validation, plus resolution of one scan point
//! into a driven chain and a protocol.

use crate::circuit::{couplings, CircuitParams, CouplingStrengths, FrequencyConvention};
use crate::error::{Error, Result};
use crate::evolve::DrivenChain;
use crate::lindblad::{DecoherenceParams, RateConvention};
use crate::ode::{EvolverConfig, Method};
use crate::schedule::{HRule, MeasurementWindow, RampProtocol};
use crate::units::{mhz, PI};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChainMode {
    /// Couplings from the circuit map at a bias current.
    #[default]
    Circuit,
    /// Couplings set directly through Jbar/h; no circuit involved.
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub mode: ChainMode,
    /// Replace the circuit couplings by their isotropic proxy Jbar.
    #[serde(default)]
    pub isotropize: bool,
    /// Fixed operating point used when the scan axis is not the coupling.
    #[serde(default)]
    pub jbar_over_h: Option<f64>,
    #[serde(default)]
    pub i_b_over_icr: Option<f64>,
    /// Optional explicit per-bond couplings (MHz), overriding both modes.
    #[serde(default)]
    pub bonds_mhz: Option<Vec<[f64; 3]>>,
}

fn default_n() -> usize {
    2
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            n: 2,
            mode: ChainMode::Circuit,
            isotropize: false,
            jbar_over_h: None,
            i_b_over_icr: None,
            bonds_mhz: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    #[serde(rename = "omega_q_GHz", default = "d_omega_q")]
    pub omega_q_ghz: f64,
    #[serde(rename = "C_j_pF", default = "d_one")]
    pub c_j_pf: f64,
    #[serde(rename = "C_jp1_pF", default = "d_one")]
    pub c_jp1_pf: f64,
    #[serde(rename = "C_int_pF", default = "d_c_int")]
    pub c_int_pf: f64,
    #[serde(rename = "L_R_nH", default = "d_three")]
    pub l_r_nh: f64,
    #[serde(rename = "L_L_nH", default = "d_three")]
    pub l_l_nh: f64,
    #[serde(rename = "M_nH", default = "d_m")]
    pub m_nh: f64,
    #[serde(rename = "I_cr_uA", default = "d_three")]
    pub i_cr_ua: f64,
    #[serde(rename = "N1", default = "d_five")]
    pub n1: f64,
    #[serde(rename = "N2", default = "d_five")]
    pub n2: f64,
    #[serde(default = "d_true")]
    pub flux_quantum_prefactor: bool,
    #[serde(default)]
    pub frequency_convention: FrequencyConvention,
    #[serde(default = "d_true")]
    pub negative_mutual_renorm: bool,
    #[serde(default)]
    pub jz_prefactor_literal: bool,
    #[serde(default = "d_scale")]
    pub coupling_scale: f64,
    #[serde(rename = "L_j_nH", default = "d_lj")]
    pub l_j_nh: f64,
}

fn d_omega_q() -> f64 {
    4.77
}
fn d_one() -> f64 {
    1.0
}
fn d_c_int() -> f64 {
    2.0
}
fn d_three() -> f64 {
    3.0
}
fn d_m() -> f64 {
    0.41
}
fn d_five() -> f64 {
    5.0
}
fn d_true() -> bool {
    true
}
fn d_scale() -> f64 {
    0.24
}
fn d_lj() -> f64 {
    0.7
}

impl Default for CircuitConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

impl CircuitConfig {
    pub fn params(&self) -> CircuitParams {
        CircuitParams {
            omega_q: self.frequency_convention.ghz_to_rad_per_ns(self.omega_q_ghz),
            c_j: self.c_j_pf,
            c_jp1: self.c_jp1_pf,
            c_int: self.c_int_pf,
            l_r: self.l_r_nh,
            l_l: self.l_l_nh,
            m: self.m_nh,
            i_cr: self.i_cr_ua,
            n1: self.n1,
            n2: self.n2,
            flux_quantum_prefactor_enabled: self.flux_quantum_prefactor,
            frequency_convention: self.frequency_convention,
            negative_mutual_renorm: self.negative_mutual_renorm,
            jz_prefactor_literal: self.jz_prefactor_literal,
            coupling_scale: self.coupling_scale,
            l_j_metadata: self.l_j_nh,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampConfig {
    #[serde(default)]
    pub t_ramp_ns: Option<f64>,
    #[serde(default)]
    pub v_rad_per_ns: Option<f64>,
    #[serde(default = "d_theta_final")]
    pub theta_final: f64,
    #[serde(default)]
    pub phi: f64,
    #[serde(rename = "h_MHz", default)]
    pub h_mhz: Option<f64>,
    #[serde(default)]
    pub h_rule: Option<LinearRule>,
    #[serde(default = "d_t_meas")]
    pub t_meas_ns: f64,
    #[serde(default)]
    pub window: MeasurementWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearRule {
    pub a: f64,
    pub b: f64,
}

fn d_theta_final() -> f64 {
    PI / 2.0
}
fn d_t_meas() -> f64 {
    10.0
}

impl Default for RampConfig {
    fn default() -> Self {
        RampConfig {
            t_ramp_ns: Some(100.0),
            v_rad_per_ns: None,
            theta_final: PI / 2.0,
            phi: 0.0,
            h_mhz: Some(76.0),
            h_rule: None,
            t_meas_ns: 10.0,
            window: MeasurementWindow::DriveOff,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoherenceConfig {
    #[serde(default)]
    pub enabled: bool,
    #[serde(rename = "T1_ns", default = "d_t1")]
    pub t1_ns: f64,
    #[serde(rename = "T2_ns", default = "d_t2")]
    pub t2_ns: f64,
    #[serde(rename = "temperature_mK", default = "d_temp")]
    pub temperature_mk: f64,
    /// Include the finite-temperature excitation channel.
    #[serde(default)]
    pub thermal: bool,
    #[serde(default)]
    pub rate_convention: RateConvention,
}

fn d_t1() -> f64 {
    658.0
}
fn d_t2() -> f64 {
    812.0
}
fn d_temp() -> f64 {
    30.0
}

impl Default for DecoherenceConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

impl DecoherenceConfig {
    pub fn params(&self, omega_q: f64) -> Result<DecoherenceParams> {
        let mut d = DecoherenceParams::new(self.t1_ns, self.t2_ns)?
            .with_convention(self.rate_convention);
        if self.thermal {
            d = d.with_thermal_occupation(self.temperature_mk, omega_q);
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderConfig {
    #[serde(default)]
    pub eta: f64,
    #[serde(default = "d_n_alpha")]
    pub n_alpha: usize,
    #[serde(default = "d_seed")]
    pub base_seed: u64,
}

fn d_n_alpha() -> usize {
    500
}
fn d_seed() -> u64 {
    42
}

impl Default for DisorderConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanAxis {
    IBOverIcr,
    JbarOverH,
    TRampNs,
    Theta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub axis: ScanAxis,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    /// When > 0, Chern numbers are integrated on this theta grid.
    #[serde(default)]
    pub chern_grid: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            axis: ScanAxis::IBOverIcr,
            min: 0.0,
            max: 0.90,
            points: 19,
            chern_grid: 0,
        }
    }
}

impl ScanConfig {
    pub fn grid(&self) -> Vec<f64> {
        if self.points <= 1 {
            return vec![self.min];
        }
        (0..self.points)
            .map(|k| self.min + (self.max - self.min) * k as f64 / (self.points - 1) as f64)
            .collect()
    }

    pub fn spacing(&self) -> f64 {
        if self.points <= 1 {
            0.0
        } else {
            (self.max - self.min) / (self.points - 1) as f64
        }
    }

    pub fn axis_label(&self) -> &'static str {
        match self.axis {
            ScanAxis::IBOverIcr => "I_b_over_Icr",
            ScanAxis::JbarOverH => "Jbar_over_h",
            ScanAxis::TRampNs => "t_ramp_ns",
            ScanAxis::Theta => "theta_rad",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "d_dir")]
    pub dir: String,
}

fn d_dir() -> String {
    "out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolverSection {
    #[serde(default = "d_rel")]
    pub rel_tol: f64,
    #[serde(default = "d_abs")]
    pub abs_tol: f64,
    #[serde(default)]
    pub max_step_ns: Option<f64>,
    #[serde(default)]
    pub method: Method,
}

fn d_rel() -> f64 {
    1e-8
}
fn d_abs() -> f64 {
    1e-10
}

impl Default for EvolverSection {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

impl EvolverSection {
    pub fn config(&self) -> EvolverConfig {
        EvolverConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step_ns,
            method: self.method,
        }
    }
}

/// Full resolved run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub chain: ChainConfig,
    #[serde(default)]
    pub circuit: CircuitConfig,
    #[serde(default)]
    pub ramp: RampConfig,
    #[serde(default)]
    pub decoherence: DecoherenceConfig,
    #[serde(default)]
    pub disorder: DisorderConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub evolver: EvolverSection,
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(s).map_err(|e| Error::Config(format!("TOML parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        RunConfig::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.chain.n < 1 {
            return Err(Error::Config("chain.n must be at least 1".into()));
        }
        match (self.ramp.t_ramp_ns, self.ramp.v_rad_per_ns) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "ramp.t_ramp_ns and ramp.v_rad_per_ns are mutually exclusive".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Config(
                    "one of ramp.t_ramp_ns or ramp.v_rad_per_ns is required".into(),
                ))
            }
            _ => {}
        }
        match (self.ramp.h_mhz, self.ramp.h_rule) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "ramp.h_MHz and ramp.h_rule are mutually exclusive".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Config(
                    "one of ramp.h_MHz or ramp.h_rule is required".into(),
                ))
            }
            _ => {}
        }
        if !(0.0..1.0).contains(&self.disorder.eta) {
            return Err(Error::Config(format!(
                "disorder.eta = {} outside [0, 1)",
                self.disorder.eta
            )));
        }
        if self.chain.jbar_over_h.is_some() && self.chain.i_b_over_icr.is_some() {
            return Err(Error::Config(
                "chain.jbar_over_h and chain.i_b_over_icr are mutually exclusive".into(),
            ));
        }
        if let Some(bonds) = &self.chain.bonds_mhz {
            if bonds.len() != self.chain.n - 1 {
                return Err(Error::Config(format!(
                    "chain.bonds_mhz needs {} entries for n = {}",
                    self.chain.n - 1,
                    self.chain.n
                )));
            }
        }
        self.circuit.params().validate()?;
        self.evolver.config().validate()?;
        Ok(())
    }

    /// Ramp velocity parameter (rad/ns).
    pub fn ramp_velocity(&self) -> f64 {
        match (self.ramp.t_ramp_ns, self.ramp.v_rad_per_ns) {
            (Some(t), None) => PI / t,
            (None, Some(v)) => v,
            _ => PI / 100.0,
        }
    }

    fn h_rule(&self) -> HRule {
        match (self.ramp.h_mhz, self.ramp.h_rule) {
            (Some(h), None) => HRule::Constant(mhz(h)),
            (None, Some(rule)) => HRule::LinearMhz { a: rule.a, b: rule.b },
            _ => HRule::Constant(mhz(76.0)),
        }
    }

    pub fn protocol(&self) -> Result<RampProtocol> {
        Ok(
            RampProtocol::new(self.ramp_velocity(), self.ramp.theta_final, self.h_rule())?
                .with_phi(self.ramp.phi)
                .with_measurement(self.ramp.t_meas_ns, self.ramp.window),
        )
    }

    pub fn omega_q(&self) -> f64 {
        self.circuit
            .frequency_convention
            .ghz_to_rad_per_ns(self.circuit.omega_q_ghz)
    }

    /// Resolve the chain couplings and drive amplitude at a control value on
    /// a coupling axis, or at the configured fixed point for other axes.
    pub fn resolve_chain(&self, control: Option<f64>) -> Result<(DrivenChain, f64)> {
        let n = self.chain.n;
        if let Some(bonds) = &self.chain.bonds_mhz {
            let bonds: Vec<CouplingStrengths> = bonds
                .iter()
                .map(|&[jx, jy, jz]| CouplingStrengths::new(mhz(jx), mhz(jy), mhz(jz)))
                .collect();
            let chain = DrivenChain::new(n, bonds)?;
            let h_amp = self.h_rule().amplitude(chain.jbar);
            return Ok((chain, h_amp));
        }
        match self.chain.mode {
            ChainMode::Circuit => {
                let x = control
                    .or(self.chain.i_b_over_icr)
                    .ok_or_else(|| Error::Config("no bias point configured".into()))?;
                let p = self.circuit.params();
                let j = couplings(&p, x * p.i_cr)?;
                let j = if self.chain.isotropize {
                    CouplingStrengths::isotropic(j.jbar)
                } else {
                    j
                };
                let chain = DrivenChain::homogeneous(n, j)?;
                let h_amp = self.h_rule().amplitude(chain.jbar);
                Ok((chain, h_amp))
            }
            ChainMode::Direct => {
                let rho = control
                    .or(self.chain.jbar_over_h)
                    .ok_or_else(|| Error::Config("no Jbar/h point configured".into()))?;
                let (jbar, h_amp) = match self.h_rule() {
                    HRule::Constant(h) => (rho * h, h),
                    HRule::LinearMhz { a, b } => {
                        // jbar = rho h and h = a jbar + b (MHz)
                        let h_mhz = b / (1.0 - a * rho);
                        if !(h_mhz > 0.0) {
                            return Err(Error::Config(format!(
                                "h-rule gives non-positive field at Jbar/h = {rho}"
                            )));
                        }
                        (mhz(rho * h_mhz), mhz(h_mhz))
                    }
                };
                let chain = DrivenChain::homogeneous(n, CouplingStrengths::isotropic(jbar))?;
                Ok((chain, h_amp))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.chain.n, 2);
        assert!((cfg.ramp_velocity() - PI / 100.0).abs() < 1e-15);
    }

    #[test]
    fn parses_full_document() {
        let text = r#"
[chain]
n = 4
mode = "direct"
jbar_over_h = 0.4

[ramp]
t_ramp_ns = 50.0
h_MHz = 49.0

[decoherence]
enabled = true
T1_ns = 658.0
T2_ns = 812.0

[disorder]
eta = 0.05
n_alpha = 125
base_seed = 7

[scan]
axis = "jbar_over_h"
min = 0.1
max = 0.9
points = 9

[output]
dir = "results"
"#;
        let cfg = RunConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.chain.n, 4);
        assert_eq!(cfg.scan.grid().len(), 9);
        assert_eq!(cfg.output.dir, "results");
    }

    #[test]
    fn rejects_double_ramp_parameterization() {
        let text = r#"
[ramp]
t_ramp_ns = 50.0
v_rad_per_ns = 0.1
h_MHz = 76.0
"#;
        assert!(RunConfig::from_toml_str(text).is_err());
    }

    #[test]
    fn rejects_double_field_rule() {
        let text = r#"
[ramp]
t_ramp_ns = 50.0
h_MHz = 76.0
h_rule = { a = -85.0, b = 3400.0 }
"#;
        assert!(RunConfig::from_toml_str(text).is_err());
    }

    #[test]
    fn rejects_bad_eta() {
        let text = r#"
[disorder]
eta = 1.0
"#;
        assert!(RunConfig::from_toml_str(text).is_err());
    }

    #[test]
    fn direct_mode_with_linear_rule_resolves_consistently() {
        let text = r#"
[chain]
n = 2
mode = "direct"

[ramp]
t_ramp_ns = 100.0
h_rule = { a = -85.0, b = 3400.0 }

[scan]
axis = "jbar_over_h"
min = 0.1
max = 0.5
points = 3
"#;
        let cfg = RunConfig::from_toml_str(text).unwrap();
        let (chain, h) = cfg.resolve_chain(Some(0.1)).unwrap();
        assert!((chain.jbar / h - 0.1).abs() < 1e-12);
        assert!((crate::units::to_mhz(h) - 357.8947368).abs() < 1e-5);
    }

    #[test]
    fn circuit_mode_resolves_bias_point() {
        let cfg = RunConfig::default();
        let (chain, h) = cfg.resolve_chain(Some(0.0)).unwrap();
        assert_eq!(chain.n, 2);
        assert!((crate::units::to_mhz(h) - 76.0).abs() < 1e-10);
        let jx_mhz = crate::units::to_mhz(chain.bonds[0].jx);
        assert!((35.0..=45.0).contains(&jx_mhz));
    }

    #[test]
    fn explicit_bonds_override() {
        let text = r#"
[chain]
n = 3
bonds_mhz = [[10.0, 10.0, 9.0], [11.0, 11.0, 10.0]]

[ramp]
t_ramp_ns = 100.0
h_MHz = 76.0
"#;
        let cfg = RunConfig::from_toml_str(text).unwrap();
        let (chain, _) = cfg.resolve_chain(None).unwrap();
        assert_eq!(chain.bonds.len(), 2);
        assert!((crate::units::to_mhz(chain.bonds[1].jx) - 11.0).abs() < 1e-12);
    }

    #[test]
    fn toml_round_trip_preserves_config() {
        let cfg = RunConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back = RunConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, back);
    }
}
