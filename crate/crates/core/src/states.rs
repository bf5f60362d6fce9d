//! Reduced detector states at second order in the coupling.
//!
//! Starting from the pure state `cos(θ/2)|0⟩ + sin(θ/2)e^{iφ}|1⟩` with the
//! field in its vacuum, every final reduced state has the form
//!
//! ```text
//! ⎡ α cos²(θ/2) + β sin²(θ/2)          sinθ (κ e^{−iφ} + λ e^{iφ})/2 ⎤
//! ⎣ sinθ (κ* e^{iφ} + λ* e^{−iφ})/2    γ sin²(θ/2) + η cos²(θ/2)     ⎦
//! ```
//!
//! so a trajectory is fully described by six numbers `(α, β, γ, η, κ, λ)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::correlators::{CorrelatorSet, SignPair};
use crate::error::{Error, Result};
use crate::trajectory::check_acceleration;
use crate::wightman::{DetectorParams, PairKind};

/// Inertial stretch `[−t, 0]` followed by acceleration `a` over `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPlan {
    pub inertial_duration: f64,
    pub acceleration: f64,
    pub accel_duration: f64,
}

impl TrajectoryPlan {
    pub fn new(inertial_duration: f64, acceleration: f64, accel_duration: f64) -> Result<Self> {
        let p = Self {
            inertial_duration,
            acceleration,
            accel_duration,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("inertial_duration", self.inertial_duration),
            ("accel_duration", self.accel_duration),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        check_acceleration(self.acceleration)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochAngles {
    pub theta: f64,
    pub phi: f64,
}

impl BlochAngles {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::Domain(format!("theta must lie in [0, π], got {theta}")));
        }
        if !(0.0..std::f64::consts::TAU).contains(&phi) {
            return Err(Error::Domain(format!("phi must lie in [0, 2π), got {phi}")));
        }
        Ok(Self { theta, phi })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioTag {
    /// The state at switch-on.
    Ini,
    Inertial,
    Accelerated,
    Combined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub eta: f64,
    pub kappa: Complex64,
    pub lambda: Complex64,
    pub tag: ScenarioTag,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl CoefficientSet {
    pub fn ini() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.0,
            gamma: 1.0,
            eta: 0.0,
            kappa: Complex64::new(1.0, 0.0),
            lambda: Complex64::new(0.0, 0.0),
            tag: ScenarioTag::Ini,
            warnings: Vec::new(),
        }
    }

    /// `max(|α + η − 1|, |β + γ − 1|)`.
    pub fn trace_defect(&self) -> f64 {
        (self.alpha + self.eta - 1.0)
            .abs()
            .max((self.beta + self.gamma - 1.0).abs())
    }

    /// `w·self + (1 − w)·other`, keeping the tag of `self`.
    pub fn convex(&self, other: &Self, w: f64) -> Self {
        let v = 1.0 - w;
        Self {
            alpha: w * self.alpha + v * other.alpha,
            beta: w * self.beta + v * other.beta,
            gamma: w * self.gamma + v * other.gamma,
            eta: w * self.eta + v * other.eta,
            kappa: self.kappa * w + other.kappa * v,
            lambda: self.lambda * w + other.lambda * v,
            tag: self.tag,
            warnings: Vec::new(),
        }
    }
}

/// Largest `|m|²·|Y|` tolerated before the second-order truncation is flagged.
pub const PERTURBATIVE_LIMIT: f64 = 0.5;

/// Builds the coefficient set of `tag` from the correlators of a scenario.
///
/// `Inertial` and `Accelerated` read only the II and AA blocks respectively.
pub fn coefficients(
    tag: ScenarioTag,
    corr: &CorrelatorSet,
    params: &DetectorParams,
) -> Result<CoefficientSet> {
    params.validate()?;
    if tag == ScenarioTag::Ini {
        return Ok(CoefficientSet::ini());
    }
    let m2 = params.coupling_abs * params.coupling_abs;
    let mstar_sq = params.coupling().conj().powi(2);
    let (pm, mp, mm) = (SignPair::PM, SignPair::MP, SignPair::MM);

    let block = |pair: PairKind| {
        (
            corr.ty(pair, mp),
            corr.ty(pair, pm),
            corr.y(pair, pm),
            corr.y(pair, mp),
            corr.y(pair, mm),
        )
    };

    let mut set = match tag {
        ScenarioTag::Inertial | ScenarioTag::Accelerated => {
            let pair = if tag == ScenarioTag::Inertial {
                PairKind::II
            } else {
                PairKind::AA
            };
            let (ty_mp, ty_pm, y_pm, y_mp, y_mm) = block(pair);
            CoefficientSet {
                alpha: 1.0 - m2 * ty_mp.re,
                beta: m2 * y_pm.re,
                gamma: 1.0 - m2 * ty_pm.re,
                eta: m2 * y_mp.re,
                kappa: 1.0 - m2 / 2.0 * (ty_mp + ty_pm.conj()),
                lambda: mstar_sq * y_mm,
                tag,
                warnings: Vec::new(),
            }
        }
        ScenarioTag::Combined => {
            let (ty0_mp, ty0_pm, y0_pm, y0_mp, y0_mm) = block(PairKind::II);
            let (tya_mp, tya_pm, ya_pm, ya_mp, ya_mm) = block(PairKind::AA);
            let ia = |s| corr.y(PairKind::IA, s);
            let ai = |s| corr.y(PairKind::AI, s);
            let cross_mp = ia(mp) + ai(mp);
            let cross_pm = ia(pm) + ai(pm);
            CoefficientSet {
                alpha: 1.0 - m2 * (ty0_mp.re + tya_mp.re + cross_mp.re),
                beta: m2 * (y0_pm + ya_pm + cross_pm).re,
                gamma: 1.0 - m2 * (ty0_pm.re + tya_pm.re + cross_pm.re),
                eta: m2 * (y0_mp + ya_mp + cross_mp).re,
                kappa: 1.0
                    - m2 / 2.0
                        * (ty0_mp
                            + ty0_pm.conj()
                            + tya_mp
                            + tya_pm.conj()
                            + 2.0 * ai(mp)
                            + 2.0 * ia(pm)),
                lambda: mstar_sq * (y0_mm + ya_mm + ia(mm) + ai(mm)),
                tag,
                warnings: Vec::new(),
            }
        }
        ScenarioTag::Ini => unreachable!(),
    };

    let worst = m2 * corr.max_abs();
    if worst >= PERTURBATIVE_LIMIT {
        set.warnings.push(format!(
            "|m|^2 max|Y| = {worst:.3e} exceeds {PERTURBATIVE_LIMIT}; second-order truncation unreliable"
        ));
    }
    if !corr.converged() {
        set.warnings.push(format!(
            "non-converged correlators: {}",
            corr.failures.join(", ")
        ));
    }
    Ok(set)
}

/// 2×2 density matrix, `rho[r][s] = ⟨r|ρ|s⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    pub rho: [[Complex64; 2]; 2],
}

impl DensityMatrix {
    pub fn new(rho: [[Complex64; 2]; 2]) -> Self {
        Self { rho }
    }

    /// Pure state with Bloch vector `n` (assumed unit length), or any state
    /// `(1 + n·σ)/2` for `|n| ≤ 1`.
    pub fn from_bloch(n: [f64; 3]) -> Self {
        let half = 0.5;
        Self {
            rho: [
                [
                    Complex64::new(half * (1.0 + n[2]), 0.0),
                    Complex64::new(half * n[0], -half * n[1]),
                ],
                [
                    Complex64::new(half * n[0], half * n[1]),
                    Complex64::new(half * (1.0 - n[2]), 0.0),
                ],
            ],
        }
    }

    /// Bloch vector `(2 Re ρ01, −2 Im ρ01, ρ00 − ρ11)` of the Hermitian part.
    pub fn bloch_vector(&self) -> [f64; 3] {
        let off = 0.5 * (self.rho[0][1] + self.rho[1][0].conj());
        [
            2.0 * off.re,
            -2.0 * off.im,
            self.rho[0][0].re - self.rho[1][1].re,
        ]
    }

    pub fn trace(&self) -> Complex64 {
        self.rho[0][0] + self.rho[1][1]
    }

    /// `[ρ00, ρ01, ρ10, ρ11]`.
    pub fn vectorize(&self) -> [Complex64; 4] {
        [self.rho[0][0], self.rho[0][1], self.rho[1][0], self.rho[1][1]]
    }

    pub fn from_vector(v: [Complex64; 4]) -> Self {
        Self {
            rho: [[v[0], v[1]], [v[2], v[3]]],
        }
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let a = self.rho[0][0].re;
        let d = self.rho[1][1].re;
        let b = 0.5 * (self.rho[0][1] + self.rho[1][0].conj());
        let disc = ((a - d) * (a - d) + 4.0 * b.norm_sqr()).sqrt();
        0.5 * (a + d - disc)
    }
}

/// Reduced state for the given coefficients and initial Bloch angles.
pub fn assemble_state(coeffs: &CoefficientSet, angles: &BlochAngles) -> DensityMatrix {
    let c2 = (0.5 * angles.theta).cos().powi(2);
    let s2 = (0.5 * angles.theta).sin().powi(2);
    let st = angles.theta.sin();
    let e_minus = Complex64::cis(-angles.phi);
    let e_plus = Complex64::cis(angles.phi);
    let r01 = st * (coeffs.kappa * e_minus + coeffs.lambda * e_plus) / 2.0;
    DensityMatrix {
        rho: [
            [Complex64::new(coeffs.alpha * c2 + coeffs.beta * s2, 0.0), r01],
            [r01.conj(), Complex64::new(coeffs.gamma * s2 + coeffs.eta * c2, 0.0)],
        ],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub trace_dev: f64,
    pub herm_dev: f64,
    pub min_eig: f64,
}

pub fn density_checks(rho: &DensityMatrix) -> DensityReport {
    let r = &rho.rho;
    let herm_dev = (r[1][0] - r[0][1].conj())
        .norm()
        .max(r[0][0].im.abs())
        .max(r[1][1].im.abs());
    DensityReport {
        trace_dev: (rho.trace() - 1.0).norm(),
        herm_dev,
        min_eig: rho.min_eigenvalue(),
    }
}
