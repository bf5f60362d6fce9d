//! Regularised vacuum two-point functions of the smeared massless scalar field
//! along the detector worldline.
//!
//! The finite detector size `ε` shifts every pole off the real axis, so each
//! kernel is a bounded rational function of hyperbolic functions of the two
//! proper times. Its largest value, reached on the coincidence line of the
//! inertial and accelerated kernels, is `1/(16π²ε²)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::{check_acceleration, cosh_m1_over, sinh_over};

/// Physical parameters of the detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    /// Level gap ω.
    pub omega: f64,
    /// Detector size ε.
    pub epsilon: f64,
    /// |m|.
    pub coupling_abs: f64,
    /// arg m in radians.
    pub coupling_phase: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            omega: 1.0,
            epsilon: 0.025,
            coupling_abs: 0.05,
            coupling_phase: 0.0,
        }
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::Domain(format!("omega must be > 0, got {}", self.omega)));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::Domain(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        if !(self.coupling_abs.is_finite() && self.coupling_abs >= 0.0) {
            return Err(Error::Domain(format!(
                "coupling_abs must be >= 0, got {}",
                self.coupling_abs
            )));
        }
        if !self.coupling_phase.is_finite() {
            return Err(Error::Domain("coupling_phase must be finite".into()));
        }
        Ok(())
    }

    /// The coupling `m` as a complex number.
    pub fn coupling(&self) -> Complex64 {
        Complex64::from_polar(self.coupling_abs, self.coupling_phase)
    }

    /// Kernel value on the coincidence line, `1/(16π²ε²)`.
    pub fn coincidence_value(&self) -> f64 {
        1.0 / (16.0 * PI * PI * self.epsilon * self.epsilon)
    }
}

/// Which worldline segment each argument of the two-point function lies on.
/// The first letter refers to `τ′`, the second to `τ″`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PairKind {
    II,
    AA,
    IA,
    AI,
}

impl PairKind {
    pub const ALL: [PairKind; 4] = [PairKind::II, PairKind::AA, PairKind::IA, PairKind::AI];

    pub fn label(self) -> &'static str {
        match self {
            PairKind::II => "II",
            PairKind::AA => "AA",
            PairKind::IA => "IA",
            PairKind::AI => "AI",
        }
    }

    pub fn needs_acceleration(self) -> bool {
        !matches!(self, PairKind::II)
    }
}

const INV_4PI2: f64 = 1.0 / (4.0 * PI * PI);

/// A two-point kernel with its parameters bound, ready to be sampled inside
/// integrands.
#[derive(Debug, Clone, Copy)]
pub struct Kernel {
    pair: PairKind,
    epsilon: f64,
    acceleration: f64,
    sign: f64,
}

impl Kernel {
    pub fn new(pair: PairKind, acceleration: f64, params: &DetectorParams) -> Result<Self> {
        params.validate()?;
        if pair.needs_acceleration() {
            check_acceleration(acceleration)?;
        }
        Ok(Self {
            pair,
            epsilon: params.epsilon,
            acceleration,
            sign: 1.0,
        })
    }

    /// Fault-injection hook: flips the overall sign of the AI kernel so that
    /// verification of the conjugation symmetry can be shown to fail.
    pub fn with_ai_sign_flip(mut self) -> Self {
        if self.pair == PairKind::AI {
            self.sign = -1.0;
        }
        self
    }

    pub fn pair(&self) -> PairKind {
        self.pair
    }

    /// Denominator `D` with `W = −1/(4π² D)`.
    fn denominator(&self, tau1: f64, tau2: f64) -> Complex64 {
        let eps = self.epsilon;
        let a = self.acceleration;
        match self.pair {
            PairKind::II => {
                let z = Complex64::new(tau1 - tau2, -2.0 * eps);
                z * z
            }
            PairKind::AA => {
                let half = 0.5 * (tau1 - tau2);
                let z = Complex64::new(sinh_over(a, half), -eps * (a * half).cosh());
                4.0 * z * z
            }
            PairKind::IA => {
                let x = a * tau2;
                let u = Complex64::new(tau1 - sinh_over(a, tau2), -eps * (1.0 + x.cosh()));
                let v = Complex64::new(cosh_m1_over(a, tau2), eps * x.sinh());
                u * u - v * v
            }
            PairKind::AI => {
                let x = a * tau1;
                let u = Complex64::new(sinh_over(a, tau1) - tau2, -eps * (1.0 + x.cosh()));
                let v = Complex64::new(cosh_m1_over(a, tau1), -eps * x.sinh());
                u * u - v * v
            }
        }
    }

    /// Kernel value; no singularity check.
    #[inline]
    pub fn eval(&self, tau1: f64, tau2: f64) -> Complex64 {
        -self.sign * INV_4PI2 / self.denominator(tau1, tau2)
    }

    pub fn try_eval(&self, tau1: f64, tau2: f64) -> Result<Complex64> {
        let d = self.denominator(tau1, tau2);
        if !(d.norm() >= 1e-300) {
            return Err(Error::Singularity { tau1, tau2 });
        }
        Ok(-self.sign * INV_4PI2 / d)
    }
}

/// Evaluates the regularised two-point function `⟨Φ(τ′)Φ(τ″)⟩` for the given
/// segment pair. `a` is ignored for [`PairKind::II`].
pub fn wightman(
    pair: PairKind,
    tau1: f64,
    tau2: f64,
    a: f64,
    params: &DetectorParams,
) -> Result<Complex64> {
    if !(tau1.is_finite() && tau2.is_finite()) {
        return Err(Error::Domain(format!(
            "proper times must be finite, got ({tau1}, {tau2})"
        )));
    }
    Kernel::new(pair, a, params)?.try_eval(tau1, tau2)
}
