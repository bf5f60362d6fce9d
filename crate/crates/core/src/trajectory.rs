//! Detector worldlines in 1+1 dimensions.
//!
//! Two kinds of proper-time segment are supported: the inertial rest worldline
//! pinned at `x = 0`, and uniform acceleration starting from rest at the origin,
//!
//! ```text
//! t(τ) = sinh(aτ)/a,   x(τ) = (cosh(aτ) − 1)/a.
//! ```
//!
//! Both segments pass through the origin with unit four-velocity `(1, 0)` at
//! `τ = 0`, which is where the combined trajectory switches from one to the other.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this value of `a·|τ|` the hyperbolic combinations are evaluated by
/// their Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-6;

/// Kind of proper-time segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SegmentKind {
    Inertial,
    Accelerated { acceleration: f64 },
}

impl SegmentKind {
    pub fn accelerated(acceleration: f64) -> Result<Self> {
        check_acceleration(acceleration)?;
        Ok(Self::Accelerated { acceleration })
    }
}

/// Event and four-velocity of the detector at a given proper time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kinematics {
    pub t: f64,
    pub x: f64,
    pub tdot: f64,
    pub xdot: f64,
}

impl Kinematics {
    /// `ṫ² − ẋ²`, equal to one for a unit timelike four-velocity.
    pub fn norm_sq(&self) -> f64 {
        (self.tdot - self.xdot) * (self.tdot + self.xdot)
    }
}

pub(crate) fn check_acceleration(acceleration: f64) -> Result<()> {
    if !(acceleration.is_finite() && acceleration > 0.0) {
        return Err(Error::Domain(format!(
            "acceleration must be finite and > 0, got {acceleration}"
        )));
    }
    Ok(())
}

/// `sinh(aτ)/a`.
pub fn sinh_over(a: f64, tau: f64) -> f64 {
    let x = a * tau;
    if x.abs() < SERIES_THRESHOLD {
        let x2 = x * x;
        tau * (1.0 + x2 / 6.0 + x2 * x2 / 120.0)
    } else {
        x.sinh() / a
    }
}

/// `(cosh(aτ) − 1)/a`.
pub fn cosh_m1_over(a: f64, tau: f64) -> f64 {
    let x = a * tau;
    if x.abs() < SERIES_THRESHOLD {
        let x2 = x * x;
        0.5 * x * tau * (1.0 + x2 / 12.0)
    } else {
        let h = (0.5 * x).sinh();
        2.0 * h * h / a
    }
}

/// Evaluates the worldline of `kind` at proper time `tau`.
pub fn kinematics(kind: SegmentKind, tau: f64) -> Result<Kinematics> {
    if !tau.is_finite() {
        return Err(Error::Domain(format!("proper time must be finite, got {tau}")));
    }
    match kind {
        SegmentKind::Inertial => Ok(Kinematics {
            t: tau,
            x: 0.0,
            tdot: 1.0,
            xdot: 0.0,
        }),
        SegmentKind::Accelerated { acceleration: a } => {
            check_acceleration(a)?;
            let x = a * tau;
            Ok(Kinematics {
                t: sinh_over(a, tau),
                x: cosh_m1_over(a, tau),
                tdot: x.cosh(),
                xdot: x.sinh(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn inertial_rest_worldline() {
        let k = kinematics(SegmentKind::Inertial, 1.5).unwrap();
        assert_eq!(
            k,
            Kinematics {
                t: 1.5,
                x: 0.0,
                tdot: 1.0,
                xdot: 0.0
            }
        );
    }

    #[test]
    fn accelerated_origin_matches_inertial_origin() {
        let acc = kinematics(SegmentKind::accelerated(2.0).unwrap(), 0.0).unwrap();
        let ine = kinematics(SegmentKind::Inertial, 0.0).unwrap();
        assert_eq!(acc, ine);
        assert_eq!(
            acc,
            Kinematics {
                t: 0.0,
                x: 0.0,
                tdot: 1.0,
                xdot: 0.0
            }
        );
    }

    #[test]
    fn accelerated_unit_values() {
        // sinh(1), cosh(1) − 1, cosh(1), sinh(1) to 16 digits.
        let k = kinematics(SegmentKind::accelerated(1.0).unwrap(), 1.0).unwrap();
        assert!((k.t - 1.1752011936438014).abs() < 1e-15);
        assert!((k.x - 0.5430806348152437).abs() < 1e-15);
        assert!((k.tdot - 1.5430806348152437).abs() < 1e-15);
        assert!((k.xdot - 1.1752011936438014).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(kinematics(SegmentKind::Inertial, f64::NAN).is_err());
        assert!(kinematics(SegmentKind::Accelerated { acceleration: 0.0 }, 1.0).is_err());
        assert!(kinematics(SegmentKind::Accelerated { acceleration: -1.0 }, 1.0).is_err());
        assert!(SegmentKind::accelerated(f64::INFINITY).is_err());
    }

    #[test]
    fn series_branch_small_acceleration() {
        for &(a, tau) in &[(1e-7, 1.0), (1e-9, -1.3), (3e-7, 0.5)] {
            let k = kinematics(SegmentKind::Accelerated { acceleration: a }, tau).unwrap();
            assert!((k.x - a * tau * tau / 2.0).abs() < 1e-14);
            assert!((k.t - tau).abs() < 1e-14);
        }
    }

    #[test]
    fn series_and_closed_form_agree_at_threshold() {
        let a = 1.0;
        let below = SERIES_THRESHOLD * 0.999_999;
        let above = SERIES_THRESHOLD * 1.000_001;
        assert!((sinh_over(a, below) - below.sinh()).abs() / below < 1e-15);
        let rel = (cosh_m1_over(a, above) - cosh_m1_over(a, below)) / cosh_m1_over(a, below);
        assert!((rel - 4e-6).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn four_velocity_is_unit(a in 0.01f64..4.0, tau in -3.0f64..3.0) {
            prop_assume!((a * tau).abs() <= 3.0);
            let k = kinematics(SegmentKind::Accelerated { acceleration: a }, tau).unwrap();
            prop_assert!((k.norm_sq() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn inertial_four_velocity_is_unit(tau in -10.0f64..10.0) {
            let k = kinematics(SegmentKind::Inertial, tau).unwrap();
            prop_assert_eq!(k.norm_sq(), 1.0);
        }
    }
}
