//! Two-dimensional adaptive cubature of complex integrands over rectangles and
//! lower triangles.
//!
//! The integrands met in this crate are smooth but sharply peaked in a band of
//! width `~ε` around the line `τ1 = τ2`, or at a corner of the domain where two
//! segments meet. The integrator handles both:
//!
//! * any part of a rectangle that straddles the diagonal is cut out as a square
//!   and split into its two triangles; each triangle is parametrised by the
//!   distance from the diagonal `Δ = |τ1 − τ2|` and a fraction `u ∈ [0, 1]`
//!   along it, so the diagonal becomes the panel edge `Δ = 0` (the collapsed
//!   vertex of the map is the corner farthest from the diagonal);
//! * the `Δ` axis of each triangle is pre-split at `2ε, 10ε, 50ε` when a band
//!   scale is configured;
//! * panels are tensor-product Gauss-Kronrod 7/15 rules, refined globally by
//!   bisecting the panel with the largest error along its worse axis.
//!
//! [`riemann_oracle`] is a plain midpoint sum that shares no code with the
//! adaptive path; tests use it as an independent check.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// Gauss-Kronrod 7/15 abscissae on [-1, 1] (QUADPACK qk15), in ascending order.
const XK: [f64; 15] = [
    -0.991_455_371_120_812_639_206_854_697_526_329,
    -0.949_107_912_342_758_524_526_189_684_047_851,
    -0.864_864_423_359_769_072_789_712_788_640_926,
    -0.741_531_185_599_394_439_863_864_773_280_788,
    -0.586_087_235_467_691_130_294_144_845_693_013,
    -0.405_845_151_377_397_166_906_606_412_076_961,
    -0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.991_455_371_120_812_639_206_854_697_526_329,
];

const WK: [f64; 15] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.022_935_322_010_529_224_963_732_008_058_970,
];

// Seven-point Gauss weights on the odd Kronrod nodes; zero elsewhere.
const WG: [f64; 15] = [
    0.0,
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.0,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.0,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.0,
    0.417_959_183_673_469_387_755_102_040_816_327,
    0.0,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.0,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.0,
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.0,
];

const PANEL_EVALS: usize = 15 * 15;

/// Multiples of the band scale at which diagonal triangles are pre-split.
pub const BAND_CUTS: [f64; 3] = [2.0, 10.0, 50.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    Rect,
    /// The part `τ2 ≤ τ1` of a square.
    LowerTriangle,
}

/// Integration domain in the `(τ1, τ2)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub shape: Shape,
    pub t1_lo: f64,
    pub t1_hi: f64,
    pub t2_lo: f64,
    pub t2_hi: f64,
}

impl Region {
    pub fn rect(t1_lo: f64, t1_hi: f64, t2_lo: f64, t2_hi: f64) -> Result<Self> {
        let r = Self {
            shape: Shape::Rect,
            t1_lo,
            t1_hi,
            t2_lo,
            t2_hi,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn lower_triangle(lo: f64, hi: f64) -> Result<Self> {
        let r = Self {
            shape: Shape::LowerTriangle,
            t1_lo: lo,
            t1_hi: hi,
            t2_lo: lo,
            t2_hi: hi,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.t1_lo, self.t1_hi, self.t2_lo, self.t2_hi]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidRegion("bounds must be finite".into()));
        }
        if !(self.t1_lo < self.t1_hi && self.t2_lo < self.t2_hi) {
            return Err(Error::InvalidRegion(format!(
                "empty or inverted bounds [{}, {}] x [{}, {}]",
                self.t1_lo, self.t1_hi, self.t2_lo, self.t2_hi
            )));
        }
        if self.shape == Shape::LowerTriangle
            && (self.t1_lo != self.t2_lo || self.t1_hi != self.t2_hi)
        {
            return Err(Error::InvalidRegion(
                "triangle regions need identical bounds on both axes".into(),
            ));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        let a = (self.t1_hi - self.t1_lo) * (self.t2_hi - self.t2_lo);
        match self.shape {
            Shape::Rect => a,
            Shape::LowerTriangle => 0.5 * a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of bisections of a seed panel along either axis.
    pub max_depth: u32,
    /// Width of the diagonal peak (the detector size); enables band pre-splitting.
    #[serde(default)]
    pub band_scale: Option<f64>,
    /// Hard cap on the number of panels a single integral may create.
    #[serde(default = "default_max_panels")]
    pub max_panels: usize,
}

fn default_max_panels() -> usize {
    400_000
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-10,
            max_depth: 18,
            band_scale: None,
            max_panels: default_max_panels(),
        }
    }
}

impl QuadConfig {
    pub fn with_band_scale(mut self, scale: f64) -> Self {
        self.band_scale = Some(scale);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Domain("tolerances must be > 0".into()));
        }
        if self.max_depth == 0 || self.max_panels == 0 {
            return Err(Error::Domain("max_depth and max_panels must be > 0".into()));
        }
        if let Some(s) = self.band_scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::Domain(format!("band scale must be > 0, got {s}")));
            }
        }
        Ok(())
    }

    fn target(&self, value: Complex64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: Complex64,
    pub err_estimate: f64,
    pub n_evals: usize,
    pub converged: bool,
}

impl QuadResult {
    pub fn zero() -> Self {
        Self {
            value: Complex64::new(0.0, 0.0),
            err_estimate: 0.0,
            n_evals: 0,
            converged: true,
        }
    }
}

/// Parametrisation of a seed patch `(p, q) ↦ (τ1, τ2)`.
#[derive(Debug, Clone, Copy)]
enum Chart {
    Direct,
    /// `τ2 = lo + (len − Δ)u`, `τ1 = τ2 + Δ`.
    Lower { lo: f64, len: f64 },
    /// `τ1 = lo + (len − Δ)u`, `τ2 = τ1 + Δ`.
    Upper { lo: f64, len: f64 },
}

impl Chart {
    #[inline]
    fn map(&self, p: f64, q: f64) -> (f64, f64, f64) {
        match *self {
            Chart::Direct => (p, q, 1.0),
            Chart::Lower { lo, len } => {
                let jac = len - p;
                let t2 = lo + jac * q;
                (t2 + p, t2, jac)
            }
            Chart::Upper { lo, len } => {
                let jac = len - p;
                let t1 = lo + jac * q;
                (t1, t1 + p, jac)
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    chart: Chart,
    p: (f64, f64),
    q: (f64, f64),
    depth_p: u32,
    depth_q: u32,
    value: Complex64,
    err_p: f64,
    err_q: f64,
}

impl Panel {
    fn err(&self) -> f64 {
        self.err_p + self.err_q
    }
}

struct Ranked(Panel, u64);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .err()
            .total_cmp(&other.0.err())
            .then_with(|| other.1.cmp(&self.1))
    }
}

fn eval_panel<F>(
    f: &F,
    chart: Chart,
    p: (f64, f64),
    q: (f64, f64),
    depth_p: u32,
    depth_q: u32,
) -> Result<Panel>
where
    F: Fn(f64, f64) -> Complex64 + ?Sized,
{
    let (pc, ph) = (0.5 * (p.0 + p.1), 0.5 * (p.1 - p.0));
    let (qc, qh) = (0.5 * (q.0 + q.1), 0.5 * (q.1 - q.0));
    let zero = Complex64::new(0.0, 0.0);
    let mut kk = zero;
    let mut gk = zero; // Gauss in p, Kronrod in q
    let mut kg = zero; // Kronrod in p, Gauss in q
    for i in 0..15 {
        let pi = pc + ph * XK[i];
        let mut row_k = zero;
        let mut row_g = zero;
        for j in 0..15 {
            let qj = qc + qh * XK[j];
            let (t1, t2, jac) = chart.map(pi, qj);
            let v = f(t1, t2);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFiniteSample { tau1: t1, tau2: t2 });
            }
            let v = v * jac;
            row_k += v * WK[j];
            row_g += v * WG[j];
        }
        kk += row_k * WK[i];
        gk += row_k * WG[i];
        kg += row_g * WK[i];
    }
    let scale = ph * qh;
    let value = kk * scale;
    Ok(Panel {
        chart,
        p,
        q,
        depth_p,
        depth_q,
        value,
        err_p: ((kk - gk) * scale).norm(),
        err_q: ((kk - kg) * scale).norm(),
    })
}

fn seed_patches(region: &Region, cfg: &QuadConfig) -> Vec<(Chart, (f64, f64), (f64, f64))> {
    let mut out = Vec::new();
    let push_triangle = |out: &mut Vec<_>, chart: Chart, len: f64| {
        let mut cuts = vec![0.0];
        if let Some(s) = cfg.band_scale {
            cuts.extend(BAND_CUTS.iter().map(|m| m * s).filter(|&c| c < len));
        }
        cuts.push(len);
        for w in cuts.windows(2) {
            out.push((chart, (w[0], w[1]), (0.0, 1.0)));
        }
    };
    match region.shape {
        Shape::LowerTriangle => {
            let len = region.t1_hi - region.t1_lo;
            push_triangle(
                &mut out,
                Chart::Lower {
                    lo: region.t1_lo,
                    len,
                },
                len,
            );
        }
        Shape::Rect => {
            let (a1, b1, a2, b2) = (region.t1_lo, region.t1_hi, region.t2_lo, region.t2_hi);
            let c = a1.max(a2);
            let d = b1.min(b2);
            if d > c {
                let len = d - c;
                push_triangle(&mut out, Chart::Lower { lo: c, len }, len);
                push_triangle(&mut out, Chart::Upper { lo: c, len }, len);
                if a1 < c {
                    out.push((Chart::Direct, (a1, c), (a2, b2)));
                }
                if d < b1 {
                    out.push((Chart::Direct, (d, b1), (a2, b2)));
                }
                if a2 < c {
                    out.push((Chart::Direct, (c, d), (a2, c)));
                }
                if d < b2 {
                    out.push((Chart::Direct, (c, d), (d, b2)));
                }
            } else {
                out.push((Chart::Direct, (a1, b1), (a2, b2)));
            }
        }
    }
    out
}

/// Adaptive integral of `f` over `region`.
///
/// Returns `converged = false` together with the best available estimate when
/// the tolerance cannot be met within `max_depth` (or the panel cap).
pub fn integrate_2d<F>(f: &F, region: &Region, cfg: &QuadConfig) -> Result<QuadResult>
where
    F: Fn(f64, f64) -> Complex64 + ?Sized,
{
    region.validate()?;
    cfg.validate()?;

    let mut heap = BinaryHeap::new();
    let mut finished: Vec<Panel> = Vec::new();
    let mut seq = 0u64;
    let mut n_evals = 0usize;
    let mut n_panels = 0usize;
    let mut total = Complex64::new(0.0, 0.0);
    let mut total_err = 0.0;

    for (chart, p, q) in seed_patches(region, cfg) {
        let panel = eval_panel(f, chart, p, q, 0, 0)?;
        n_evals += PANEL_EVALS;
        n_panels += 1;
        total += panel.value;
        total_err += panel.err();
        heap.push(Ranked(panel, seq));
        seq += 1;
    }

    let mut exhausted = false;
    while let Some(Ranked(worst, _)) = heap.pop() {
        if total_err <= cfg.target(total) {
            heap.push(Ranked(worst, seq));
            break;
        }
        let split_p = worst.err_p >= worst.err_q;
        let depth = if split_p { worst.depth_p } else { worst.depth_q };
        if depth >= cfg.max_depth {
            // Try the other axis before giving up on this panel.
            let other = if split_p { worst.depth_q } else { worst.depth_p };
            if other >= cfg.max_depth {
                finished.push(worst);
                continue;
            }
        }
        if n_panels + 2 > cfg.max_panels {
            exhausted = true;
            heap.push(Ranked(worst, seq));
            break;
        }
        let along_p = if depth >= cfg.max_depth { !split_p } else { split_p };
        let children = if along_p {
            let mid = 0.5 * (worst.p.0 + worst.p.1);
            [
                ((worst.p.0, mid), worst.q),
                ((mid, worst.p.1), worst.q),
            ]
            .map(|(p, q)| (p, q, worst.depth_p + 1, worst.depth_q))
        } else {
            let mid = 0.5 * (worst.q.0 + worst.q.1);
            [
                (worst.p, (worst.q.0, mid)),
                (worst.p, (mid, worst.q.1)),
            ]
            .map(|(p, q)| (p, q, worst.depth_p, worst.depth_q + 1))
        };
        total -= worst.value;
        total_err -= worst.err();
        for (p, q, dp, dq) in children {
            let child = eval_panel(f, worst.chart, p, q, dp, dq)?;
            n_evals += PANEL_EVALS;
            n_panels += 1;
            total += child.value;
            total_err += child.err();
            heap.push(Ranked(child, seq));
            seq += 1;
        }
    }

    // Re-sum from the leaves so that the result does not carry the drift of
    // the running totals.
    let mut leaves: Vec<(u64, Panel)> = heap.into_iter().map(|Ranked(p, s)| (s, p)).collect();
    leaves.sort_by_key(|(s, _)| *s);
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for p in finished.iter().chain(leaves.iter().map(|(_, p)| p)) {
        value += p.value;
        err += p.err();
    }
    let converged = !exhausted && err <= cfg.target(value);
    Ok(QuadResult {
        value,
        err_estimate: err,
        n_evals,
        converged,
    })
}

/// Midpoint-rule tensor sum on an `n × n` grid of cells.
///
/// For a lower triangle, cells strictly below the diagonal carry full weight
/// and the cells the diagonal cuts in half carry half weight.
pub fn riemann_oracle<F>(f: &F, region: &Region, n: usize) -> Result<Complex64>
where
    F: Fn(f64, f64) -> Complex64 + ?Sized,
{
    region.validate()?;
    if n < 2 {
        return Err(Error::Domain(format!("oracle needs n >= 2, got {n}")));
    }
    let h1 = (region.t1_hi - region.t1_lo) / n as f64;
    let h2 = (region.t2_hi - region.t2_lo) / n as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let t1 = region.t1_lo + (i as f64 + 0.5) * h1;
        for j in 0..n {
            let weight = match region.shape {
                Shape::Rect => 1.0,
                Shape::LowerTriangle if j < i => 1.0,
                Shape::LowerTriangle if j == i => 0.5,
                Shape::LowerTriangle => continue,
            };
            let t2 = region.t2_lo + (j as f64 + 0.5) * h2;
            let v = f(t1, t2);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFiniteSample { tau1: t1, tau2: t2 });
            }
            sum += v * weight;
        }
    }
    Ok(sum * (h1 * h2))
}
