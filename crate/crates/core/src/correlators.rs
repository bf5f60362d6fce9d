//! Phase-weighted double integrals of the two-point kernels.
//!
//! For a segment pair `P` and signs `(s1, s2)`
//!
//! ```text
//! Y_P^{s1 s2}  = ∬ e^{iω(s1 τ′ + s2 τ″)} W_P(τ′, τ″)
//! 𝒯Y_P^{s1 s2} = 2 ∬_{τ″ ≤ τ′} e^{iω(s1 τ′ + s2 τ″)} W_P(τ′, τ″)
//! ```
//!
//! with the inertial argument in `[−t, 0]` and the accelerated one in `[0, T]`.
//! The time-ordered values are only needed for the diagonal pairs and the
//! signs `(+,−)`, `(−,+)`; there the two halves of the time-ordered square are
//! related by swapping the arguments, which turns the square into twice one
//! triangle.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_2d, riemann_oracle, QuadConfig, QuadResult, Region};
use crate::states::TrajectoryPlan;
use crate::verify::Check;
use crate::wightman::{DetectorParams, Kernel, PairKind};

/// Signs of the two proper times in the phase `e^{iω(s1 τ′ + s2 τ″)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignPair {
    pub s1: i8,
    pub s2: i8,
}

impl SignPair {
    pub const PP: SignPair = SignPair { s1: 1, s2: 1 };
    pub const PM: SignPair = SignPair { s1: 1, s2: -1 };
    pub const MP: SignPair = SignPair { s1: -1, s2: 1 };
    pub const MM: SignPair = SignPair { s1: -1, s2: -1 };
    pub const ALL: [SignPair; 4] = [Self::PP, Self::PM, Self::MP, Self::MM];

    pub fn new(s1: i8, s2: i8) -> Result<Self> {
        if s1.abs() != 1 || s2.abs() != 1 {
            return Err(Error::Domain(format!("signs must be ±1, got ({s1}, {s2})")));
        }
        Ok(Self { s1, s2 })
    }

    /// The pair `(−s2, −s1)`: conjugating an integrand and swapping the
    /// arguments maps `Y^{s1 s2}` onto this sign pair.
    pub fn mirrored(self) -> Self {
        Self {
            s1: -self.s2,
            s2: -self.s1,
        }
    }

    pub fn label(self) -> &'static str {
        match (self.s1, self.s2) {
            (1, 1) => "++",
            (1, _) => "+-",
            (_, 1) => "-+",
            _ => "--",
        }
    }

    #[inline]
    pub fn phase(self, omega: f64, tau1: f64, tau2: f64) -> Complex64 {
        Complex64::cis(omega * (self.s1 as f64 * tau1 + self.s2 as f64 * tau2))
    }
}

/// Integration domain of a segment pair: `(τ′ range, τ″ range)`, or `None`
/// when one of the segments has zero duration.
pub fn pair_domain(pair: PairKind, plan: &TrajectoryPlan) -> Option<((f64, f64), (f64, f64))> {
    let inertial = (-plan.inertial_duration, 0.0);
    let accel = (0.0, plan.accel_duration);
    let (d1, d2) = match pair {
        PairKind::II => (inertial, inertial),
        PairKind::AA => (accel, accel),
        PairKind::IA => (inertial, accel),
        PairKind::AI => (accel, inertial),
    };
    (d1.1 > d1.0 && d2.1 > d2.0).then_some((d1, d2))
}

/// Options that alter how kernels are built. Only used to demonstrate that
/// verification catches a broken kernel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FaultHooks {
    #[serde(default)]
    pub flip_ai_kernel_sign: bool,
}

pub(crate) fn build_kernel(
    pair: PairKind,
    plan: &TrajectoryPlan,
    params: &DetectorParams,
    hooks: &FaultHooks,
) -> Result<Kernel> {
    let k = Kernel::new(pair, plan.acceleration, params)?;
    Ok(if hooks.flip_ai_kernel_sign {
        k.with_ai_sign_flip()
    } else {
        k
    })
}

fn quad_for(params: &DetectorParams, cfg: &QuadConfig) -> QuadConfig {
    let mut c = *cfg;
    if c.band_scale.is_none() {
        c.band_scale = Some(params.epsilon);
    }
    c
}

/// Plain integral of `phase · kernel` over a rectangle.
pub fn integrate_rect(
    kernel: &Kernel,
    signs: SignPair,
    omega: f64,
    d1: (f64, f64),
    d2: (f64, f64),
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    let f = |t1: f64, t2: f64| signs.phase(omega, t1, t2) * kernel.eval(t1, t2);
    integrate_2d(&f, &Region::rect(d1.0, d1.1, d2.0, d2.1)?, cfg)
}

/// Twice the integral of `phase · kernel` over the lower triangle of `[lo, hi]²`.
pub fn integrate_time_ordered(
    kernel: &Kernel,
    signs: SignPair,
    omega: f64,
    lo: f64,
    hi: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    let f = |t1: f64, t2: f64| signs.phase(omega, t1, t2) * kernel.eval(t1, t2);
    let mut r = integrate_2d(&f, &Region::lower_triangle(lo, hi)?, cfg)?;
    r.value *= 2.0;
    r.err_estimate *= 2.0;
    Ok(r)
}

fn check_ty_args(pair: PairKind, signs: SignPair) -> Result<()> {
    if !matches!(pair, PairKind::II | PairKind::AA) {
        return Err(Error::Domain(format!(
            "time-ordered values exist only for II and AA, got {pair:?}"
        )));
    }
    if !matches!(signs, SignPair::PM | SignPair::MP) {
        return Err(Error::Domain(format!(
            "time-ordered values exist only for +- and -+, got {}",
            signs.label()
        )));
    }
    Ok(())
}

/// `Y_pair^{signs}` for the given trajectory.
pub fn y_value(
    pair: PairKind,
    signs: SignPair,
    plan: &TrajectoryPlan,
    params: &DetectorParams,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    y_value_with(pair, signs, plan, params, cfg, &FaultHooks::default())
}

fn y_value_with(
    pair: PairKind,
    signs: SignPair,
    plan: &TrajectoryPlan,
    params: &DetectorParams,
    cfg: &QuadConfig,
    hooks: &FaultHooks,
) -> Result<QuadResult> {
    plan.validate()?;
    let Some((d1, d2)) = pair_domain(pair, plan) else {
        return Ok(QuadResult::zero());
    };
    let kernel = build_kernel(pair, plan, params, hooks)?;
    integrate_rect(&kernel, signs, params.omega, d1, d2, &quad_for(params, cfg))
}

/// `𝒯Y_pair^{signs}` for `pair ∈ {II, AA}` and `signs ∈ {+−, −+}`.
pub fn ty_value(
    pair: PairKind,
    signs: SignPair,
    plan: &TrajectoryPlan,
    params: &DetectorParams,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    ty_value_with(pair, signs, plan, params, cfg, &FaultHooks::default())
}

fn ty_value_with(
    pair: PairKind,
    signs: SignPair,
    plan: &TrajectoryPlan,
    params: &DetectorParams,
    cfg: &QuadConfig,
    hooks: &FaultHooks,
) -> Result<QuadResult> {
    check_ty_args(pair, signs)?;
    plan.validate()?;
    let Some((d1, _)) = pair_domain(pair, plan) else {
        return Ok(QuadResult::zero());
    };
    let kernel = build_kernel(pair, plan, params, hooks)?;
    integrate_time_ordered(&kernel, signs, params.omega, d1.0, d1.1, &quad_for(params, cfg))
}

/// Identifies one member integral of a [`CorrelatorSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CorrelatorId {
    pub pair: PairKind,
    pub signs: SignPair,
    pub time_ordered: bool,
}

impl CorrelatorId {
    /// All 20 integrals a scenario needs, in a fixed order.
    pub fn all() -> Vec<CorrelatorId> {
        let mut ids = Vec::with_capacity(20);
        for pair in PairKind::ALL {
            for signs in SignPair::ALL {
                ids.push(CorrelatorId {
                    pair,
                    signs,
                    time_ordered: false,
                });
            }
            if matches!(pair, PairKind::II | PairKind::AA) {
                for signs in [SignPair::PM, SignPair::MP] {
                    ids.push(CorrelatorId {
                        pair,
                        signs,
                        time_ordered: true,
                    });
                }
            }
        }
        ids
    }

    pub fn name(&self) -> String {
        format!(
            "{}Y_{}{}",
            if self.time_ordered { "T" } else { "" },
            self.pair.label(),
            self.signs.label()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorEntry {
    pub id: CorrelatorId,
    pub result: QuadResult,
}

/// Every `Y` and `𝒯Y` value a scenario needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorSet {
    pub plan: TrajectoryPlan,
    pub entries: Vec<CorrelatorEntry>,
    /// Largest quadrature error estimate among the entries.
    pub err: f64,
    /// Names of entries whose quadrature did not converge.
    pub failures: Vec<String>,
}

impl CorrelatorSet {
    fn find(&self, id: CorrelatorId) -> Complex64 {
        self.entries
            .iter()
            .find(|e| e.id == id)
            .map(|e| e.result.value)
            .unwrap_or_default()
    }

    pub fn y(&self, pair: PairKind, signs: SignPair) -> Complex64 {
        self.find(CorrelatorId {
            pair,
            signs,
            time_ordered: false,
        })
    }

    pub fn ty(&self, pair: PairKind, signs: SignPair) -> Complex64 {
        self.find(CorrelatorId {
            pair,
            signs,
            time_ordered: true,
        })
    }

    pub fn converged(&self) -> bool {
        self.failures.is_empty()
    }

    /// Tolerance for identities that hold exactly only for exact integrals.
    pub fn tol_real(&self) -> f64 {
        (10.0 * self.err).max(1e-8)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.result.value.norm())
            .fold(0.0, f64::max)
    }

    /// Realness, time-ordering and cross-conjugation identities.
    pub fn invariant_checks(&self) -> Vec<Check> {
        let tol = self.tol_real();
        let mut out = Vec::new();
        for pair in [PairKind::II, PairKind::AA] {
            for signs in [SignPair::PM, SignPair::MP] {
                let y = self.y(pair, signs);
                out.push(Check::below(
                    format!("Im Y_{}{} = 0", pair.label(), signs.label()),
                    y.im.abs(),
                    tol,
                ));
                out.push(Check::below(
                    format!("Re TY_{0}{1} = Y_{0}{1}", pair.label(), signs.label()),
                    (Complex64::new(self.ty(pair, signs).re, 0.0) - y).norm(),
                    tol,
                ));
            }
        }
        for signs in SignPair::ALL {
            let ia = self.y(PairKind::IA, signs);
            let ai = self.y(PairKind::AI, signs.mirrored());
            out.push(Check::below(
                format!("Y_IA{} = conj Y_AI{}", signs.label(), signs.mirrored().label()),
                (ia - ai.conj()).norm(),
                tol,
            ));
        }
        out
    }
}

/// Computes every member integral of a scenario, in parallel.
pub fn correlator_set(
    plan: &TrajectoryPlan,
    params: &DetectorParams,
    cfg: &QuadConfig,
) -> Result<CorrelatorSet> {
    correlator_set_with(plan, params, cfg, &FaultHooks::default())
}

pub fn correlator_set_with(
    plan: &TrajectoryPlan,
    params: &DetectorParams,
    cfg: &QuadConfig,
    hooks: &FaultHooks,
) -> Result<CorrelatorSet> {
    plan.validate()?;
    params.validate()?;
    let entries = CorrelatorId::all()
        .into_par_iter()
        .map(|id| {
            let result = if id.time_ordered {
                ty_value_with(id.pair, id.signs, plan, params, cfg, hooks)?
            } else {
                y_value_with(id.pair, id.signs, plan, params, cfg, hooks)?
            };
            Ok(CorrelatorEntry { id, result })
        })
        .collect::<Result<Vec<_>>>()?;
    let err = entries
        .iter()
        .map(|e| e.result.err_estimate)
        .fold(0.0, f64::max);
    let failures = entries
        .iter()
        .filter(|e| !e.result.converged)
        .map(|e| e.id.name())
        .collect();
    Ok(CorrelatorSet {
        plan: *plan,
        entries,
        err,
        failures,
    })
}

/// The midpoint-oracle value of one member integral.
pub fn oracle_value(
    id: CorrelatorId,
    plan: &TrajectoryPlan,
    params: &DetectorParams,
    n: usize,
) -> Result<Complex64> {
    let Some((d1, d2)) = pair_domain(id.pair, plan) else {
        return Ok(Complex64::new(0.0, 0.0));
    };
    let kernel = Kernel::new(id.pair, plan.acceleration, params)?;
    let omega = params.omega;
    let signs = id.signs;
    let f = |t1: f64, t2: f64| signs.phase(omega, t1, t2) * kernel.eval(t1, t2);
    if id.time_ordered {
        check_ty_args(id.pair, id.signs)?;
        Ok(riemann_oracle(&f, &Region::lower_triangle(d1.0, d1.1)?, n)? * 2.0)
    } else {
        riemann_oracle(&f, &Region::rect(d1.0, d1.1, d2.0, d2.1)?, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(t: f64, a: f64, big_t: f64) -> TrajectoryPlan {
        TrajectoryPlan::new(t, a, big_t).unwrap()
    }

    #[test]
    fn empty_inertial_segment_gives_zero() {
        let p = DetectorParams::default();
        let q = QuadConfig::default();
        let pl = plan(0.0, 3.0, 1.0);
        for s in SignPair::ALL {
            assert_eq!(y_value(PairKind::II, s, &pl, &p, &q).unwrap().value, Complex64::default());
        }
        assert_eq!(
            ty_value(PairKind::II, SignPair::PM, &pl, &p, &q).unwrap().value,
            Complex64::default()
        );
    }

    #[test]
    fn ty_rejects_other_pairs_and_signs() {
        let p = DetectorParams::default();
        let q = QuadConfig::default();
        let pl = plan(1.0, 3.0, 1.0);
        assert!(ty_value(PairKind::IA, SignPair::PM, &pl, &p, &q).is_err());
        assert!(ty_value(PairKind::II, SignPair::PP, &pl, &p, &q).is_err());
    }

    #[test]
    fn inertial_pm_is_real_and_matches_time_ordered() {
        let p = DetectorParams::default();
        let q = QuadConfig::default();
        let pl = plan(1.0, 3.0, 1.0);
        let y = y_value(PairKind::II, SignPair::PM, &pl, &p, &q).unwrap();
        let ty = ty_value(PairKind::II, SignPair::PM, &pl, &p, &q).unwrap();
        assert!(y.converged && ty.converged);
        assert!(y.value.im.abs() < 1e-8);
        assert!((ty.value.re - y.value.re).abs() < 1e-8);
        let pl = plan(1.0, 3.0, 1.5);
        let y = y_value(PairKind::AA, SignPair::MP, &pl, &p, &q).unwrap();
        let ty = ty_value(PairKind::AA, SignPair::MP, &pl, &p, &q).unwrap();
        assert!((ty.value.re - y.value.re).abs() < 1e-8);
    }

    #[test]
    fn sign_pair_helpers() {
        assert!(SignPair::new(1, 0).is_err());
        assert_eq!(SignPair::new(-1, 1).unwrap(), SignPair::MP);
        assert_eq!(SignPair::PM.mirrored(), SignPair::PM);
        assert_eq!(SignPair::PP.mirrored(), SignPair::MM);
        assert_eq!(CorrelatorId::all().len(), 20);
    }
}
