//! Time-dependent drive: quadratic polar-angle ramp at fixed azimuth, with an
//! optional post-ramp measurement window.
//!
//! theta(t) = v^2 t^2 / (2 pi), so theta(pi/v) = pi/2 and the angular
//! velocity v_theta(t) = v^2 t / pi vanishes at t = 0 (smooth start). For a
//! general target angle theta_f the same parabola ends at
//! t_end = (pi/v) sqrt(2 theta_f / pi) with v_theta(t_end) = v sqrt(2 theta_f / pi).

use crate::error::{Error, Result};
use crate::spin::MagneticField;
use crate::units::{mhz, to_mhz, PI};
use serde::{Deserialize, Serialize};

/// Field-amplitude rule: fixed, or tied to the isotropic coupling through the
/// linear MHz relation h = a Jbar + b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HRule {
    /// Fixed amplitude, rad/ns.
    Constant(f64),
    /// h_MHz = a * Jbar_MHz + b, evaluated in MHz and converted.
    LinearMhz { a: f64, b: f64 },
}

impl HRule {
    /// The published linear rule h = -85 Jbar + 3400 MHz.
    pub fn published_linear() -> Self {
        HRule::LinearMhz { a: -85.0, b: 3400.0 }
    }

    /// Resolve the drive amplitude (rad/ns) for a chain with isotropic proxy
    /// `jbar` (rad/ns).
    pub fn amplitude(&self, jbar: f64) -> f64 {
        match *self {
            HRule::Constant(h) => h,
            HRule::LinearMhz { a, b } => mhz(a * to_mhz(jbar) + b),
        }
    }
}

/// What the Hamiltonian does during the measurement window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementWindow {
    /// Free evolution under decoherence: the coherent drive is off (H = 0).
    #[default]
    DriveOff,
    /// Keep H frozen at its end-of-ramp value.
    FreezeFinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampProtocol {
    /// Ramp-velocity parameter, rad/ns.
    pub v: f64,
    /// Target angle, (0, pi].
    pub theta_final: f64,
    /// Fixed azimuth.
    pub phi: f64,
    pub h_rule: HRule,
    /// Post-ramp window, ns (open-system runs only).
    pub t_meas: f64,
    pub window: MeasurementWindow,
}

impl RampProtocol {
    pub fn new(v: f64, theta_final: f64, h_rule: HRule) -> Result<Self> {
        if !(v > 0.0) {
            return Err(Error::Config("ramp velocity must be positive".into()));
        }
        if !(theta_final > 0.0 && theta_final <= PI) {
            return Err(Error::Config(format!(
                "theta_final = {theta_final} outside (0, pi]"
            )));
        }
        Ok(RampProtocol {
            v,
            theta_final,
            phi: 0.0,
            h_rule,
            t_meas: 0.0,
            window: MeasurementWindow::DriveOff,
        })
    }

    /// Protocol parameterized by the time to reach theta = pi/2.
    pub fn from_t_ramp(t_ramp: f64, theta_final: f64, h_rule: HRule) -> Result<Self> {
        if !(t_ramp > 0.0) {
            return Err(Error::Config("t_ramp must be positive".into()));
        }
        RampProtocol::new(PI / t_ramp, theta_final, h_rule)
    }

    pub fn with_measurement(mut self, t_meas: f64, window: MeasurementWindow) -> Self {
        self.t_meas = t_meas;
        self.window = window;
        self
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    /// Unclamped ramp angle at time t.
    fn theta_raw(&self, t: f64) -> f64 {
        self.v * self.v * t * t / (2.0 * PI)
    }

    /// End of the ramp: theta(end_time) = theta_final.
    pub fn end_time(&self) -> f64 {
        (PI / self.v) * (2.0 * self.theta_final / PI).sqrt()
    }

    /// Instantaneous angular velocity at the end of the ramp.
    pub fn v_theta_at_end(&self) -> f64 {
        self.v * (2.0 * self.theta_final / PI).sqrt()
    }

    /// Total duration including the measurement window.
    pub fn total_time(&self) -> f64 {
        self.end_time() + self.t_meas
    }
}

/// The drive at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSample {
    pub t: f64,
    pub field: MagneticField,
    pub v_theta: f64,
    /// True once t is past the ramp, inside the measurement window.
    pub in_measurement_window: bool,
}

/// Evaluate the drive for a chain with isotropic proxy `jbar` at time t >= 0.
/// Past the end of the ramp the field is frozen at theta_final and v_theta
/// reports zero.
pub fn sample(p: &RampProtocol, jbar: f64, t: f64) -> DriveSample {
    let h = p.h_rule.amplitude(jbar);
    let t_end = p.end_time();
    let (theta, v_theta, in_window) = if t < t_end {
        (
            p.theta_raw(t).clamp(0.0, p.theta_final),
            p.v * p.v * t / PI,
            false,
        )
    } else {
        (p.theta_final, 0.0, true)
    };
    DriveSample {
        t,
        field: MagneticField::new(h, theta, p.phi),
        v_theta,
        in_measurement_window: in_window,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FRAC_PI_2: f64 = std::f64::consts::FRAC_PI_2;

    #[test]
    fn smooth_start() {
        let p = RampProtocol::new(PI / 100.0, FRAC_PI_2, HRule::Constant(0.5)).unwrap();
        let s = sample(&p, 0.0, 0.0);
        assert_eq!(s.field.theta, 0.0);
        assert_eq!(s.v_theta, 0.0);
    }

    #[test]
    fn hundred_ns_ramp_reaches_equator() {
        let p = RampProtocol::new(PI / 100.0, FRAC_PI_2, HRule::Constant(0.5)).unwrap();
        let s = sample(&p, 0.0, 100.0 - 1e-9);
        assert!((s.field.theta - FRAC_PI_2).abs() < 1e-9);
        assert!((s.v_theta - PI / 100.0).abs() < 1e-9);
        assert!((p.end_time() - 100.0).abs() < 1e-12);
    }

    #[test]
    fn linear_rule_reference_point() {
        // Jbar/h = 0.1 resolves to h ~ 357.9 MHz under the published rule:
        // jbar = 0.1 h and h = -85 jbar + 3400 give h = 3400/(1 + 8.5)
        let rule = HRule::published_linear();
        let jbar_mhz = 3400.0 * 0.1 / (1.0 + 85.0 * 0.1);
        let h = rule.amplitude(mhz(jbar_mhz));
        assert!((to_mhz(h) - 357.8947368).abs() < 1e-4, "h = {} MHz", to_mhz(h));
    }

    #[test]
    fn end_time_examples() {
        let p = RampProtocol::new(PI / 10.0, FRAC_PI_2, HRule::Constant(1.0)).unwrap();
        assert!((p.end_time() - 10.0).abs() < 1e-12);

        let p = RampProtocol::new(PI / 10.0, PI, HRule::Constant(1.0)).unwrap();
        assert!((p.end_time() - 10.0 * 2.0f64.sqrt()).abs() < 1e-12);

        let p = RampProtocol::from_t_ramp(100.0, FRAC_PI_2, HRule::Constant(1.0)).unwrap();
        assert!((p.end_time() - 100.0).abs() < 1e-12);
    }

    #[test]
    fn theta_is_clamped_and_frozen_in_window() {
        let p = RampProtocol::new(PI / 10.0, 0.8, HRule::Constant(1.0))
            .unwrap()
            .with_measurement(10.0, MeasurementWindow::DriveOff);
        let s = sample(&p, 0.0, p.end_time() + 5.0);
        assert_eq!(s.field.theta, 0.8);
        assert_eq!(s.v_theta, 0.0);
        assert!(s.in_measurement_window);
    }

    #[test]
    fn azimuth_is_constant() {
        let p = RampProtocol::new(PI / 30.0, FRAC_PI_2, HRule::Constant(1.0))
            .unwrap()
            .with_phi(0.37);
        for &t in &[0.0, 3.0, 11.0, 29.0] {
            assert_eq!(sample(&p, 0.0, t).field.phi, 0.37);
        }
    }

    #[test]
    fn invalid_protocols_are_rejected() {
        assert!(RampProtocol::new(0.0, 1.0, HRule::Constant(1.0)).is_err());
        assert!(RampProtocol::new(1.0, 0.0, HRule::Constant(1.0)).is_err());
        assert!(RampProtocol::new(1.0, 3.5, HRule::Constant(1.0)).is_err());
    }

    proptest! {
        #[test]
        fn end_velocity_identity(theta_f in 0.01f64..std::f64::consts::PI, v in 0.001f64..1.0) {
            let p = RampProtocol::new(v, theta_f, HRule::Constant(1.0)).unwrap();
            let expect = v * (2.0 * theta_f / std::f64::consts::PI).sqrt();
            prop_assert!((p.v_theta_at_end() - expect).abs() < 1e-12);
            // theta(end_time) hits theta_final
            let th = p.v * p.v * p.end_time() * p.end_time() / (2.0 * std::f64::consts::PI);
            prop_assert!((th - theta_f).abs() < 1e-12);
        }

        #[test]
        fn theta_monotone_nondecreasing(v in 0.01f64..0.5) {
            let p = RampProtocol::new(v, 1.2, HRule::Constant(1.0)).unwrap();
            let mut last = -1.0;
            for k in 0..200 {
                let t = p.total_time() * k as f64 / 199.0;
                let th = sample(&p, 0.0, t).field.theta;
                prop_assert!(th >= last);
                last = th;
            }
        }
    }
}
