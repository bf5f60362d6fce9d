//! Dynamical maps between coefficient families.
//!
//! Density matrices are vectorised row-major as `(ρ00, ρ01, ρ10, ρ11)`. The map
//! `A` with `vec ρ_j = A · vec ρ_k` has eight non-zero entries determined by
//! the two coefficient sets alone. Its reshuffle
//! `B[(r r′),(s s′)] = A[(r s),(r′ s′)]` is Hermitian; the map is completely
//! positive iff `B ⪰ 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::{hermitian_eigenvalues, hermiticity_defect};
use crate::error::{Error, Result};
use crate::states::{CoefficientSet, DensityMatrix};

type M4 = [[Complex64; 4]; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Smallest admissible modulus of the solve denominators.
pub const SINGULAR_DENOMINATOR: f64 = 1e-12;

/// Row/column index of `(r, s)` in the vectorised density matrix.
#[inline]
fn vid(r: usize, s: usize) -> usize {
    2 * r + s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AMatrix {
    pub m: M4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BMatrix {
    pub m: M4,
}

impl AMatrix {
    pub fn identity() -> Self {
        let mut m = [[ZERO; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = Complex64::new(1.0, 0.0);
        }
        Self { m }
    }

    /// One-based element access matching the usual `A_11 … A_44` labels.
    pub fn el(&self, i: usize, j: usize) -> Complex64 {
        self.m[i - 1][j - 1]
    }

    pub fn mul(&self, other: &AMatrix) -> AMatrix {
        let mut m = [[ZERO; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..4).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        AMatrix { m }
    }

    pub fn max_abs_diff(&self, other: &AMatrix) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                d = d.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        d
    }

    /// Largest violation of the structural constraints: zero pattern,
    /// `A32 = conj A23`, `A33 = conj A22`, and real `A11, A14, A41, A44`.
    pub fn structure_defect(&self) -> f64 {
        let nonzero = [(1, 1), (1, 4), (2, 2), (2, 3), (3, 2), (3, 3), (4, 1), (4, 4)];
        let mut d: f64 = 0.0;
        for i in 1..=4 {
            for j in 1..=4 {
                if !nonzero.contains(&(i, j)) {
                    d = d.max(self.el(i, j).norm());
                }
            }
        }
        d = d.max((self.el(3, 2) - self.el(2, 3).conj()).norm());
        d = d.max((self.el(3, 3) - self.el(2, 2).conj()).norm());
        for (i, j) in [(1, 1), (1, 4), (4, 1), (4, 4)] {
            d = d.max(self.el(i, j).im.abs());
        }
        d
    }
}

impl BMatrix {
    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.m[i][i].re).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.m)
    }

    /// Reads the entries back as an A-matrix (the reshuffle is an involution).
    pub fn as_a(&self) -> AMatrix {
        AMatrix { m: self.m }
    }
}

/// The A-matrix taking the family `coeffs_in` to `coeffs_out`.
pub fn solve_a_map(coeffs_out: &CoefficientSet, coeffs_in: &CoefficientSet) -> Result<AMatrix> {
    let (j, k) = (coeffs_out, coeffs_in);
    let pop = k.alpha * k.gamma - k.beta * k.eta;
    if pop.abs() < SINGULAR_DENOMINATOR {
        return Err(Error::SingularMap {
            name: "alpha*gamma - beta*eta",
            value: pop,
        });
    }
    let coh = k.kappa.norm_sqr() - k.lambda.norm_sqr();
    if coh.abs() < SINGULAR_DENOMINATOR {
        return Err(Error::SingularMap {
            name: "|kappa|^2 - |lambda|^2",
            value: coh,
        });
    }
    let re = |x: f64| Complex64::new(x, 0.0);
    let mut m = [[ZERO; 4]; 4];
    m[0][0] = re((j.alpha * k.gamma - j.beta * k.eta) / pop);
    m[0][3] = re((j.beta * k.alpha - j.alpha * k.beta) / pop);
    m[3][0] = re((j.eta * k.gamma - j.gamma * k.eta) / pop);
    m[3][3] = re((j.gamma * k.alpha - j.eta * k.beta) / pop);
    m[1][1] = (j.kappa * k.kappa.conj() - j.lambda * k.lambda.conj()) / coh;
    m[1][2] = (j.lambda * k.kappa - j.kappa * k.lambda) / coh;
    m[2][1] = (j.lambda.conj() * k.kappa.conj() - j.kappa.conj() * k.lambda.conj()) / coh;
    m[2][2] = (j.kappa.conj() * k.kappa - j.lambda.conj() * k.lambda) / coh;
    Ok(AMatrix { m })
}

/// `B[(r r′),(s s′)] = A[(r s),(r′ s′)]`.
pub fn reshuffle(a: &AMatrix) -> BMatrix {
    let mut m = [[ZERO; 4]; 4];
    for r in 0..2 {
        for rp in 0..2 {
            for s in 0..2 {
                for sp in 0..2 {
                    m[vid(r, rp)][vid(s, sp)] = a.m[vid(r, s)][vid(rp, sp)];
                }
            }
        }
    }
    BMatrix { m }
}

/// Largest tolerated Hermiticity defect of a B-matrix.
pub const HERMITICITY_LIMIT: f64 = 1e-8;

/// Ascending eigenvalues of `B`.
pub fn hermitian_eigs(b: &BMatrix) -> Result<[f64; 4]> {
    let dev = b.hermiticity_defect();
    if !(dev < HERMITICITY_LIMIT) {
        return Err(Error::NotHermitian(dev));
    }
    Ok(hermitian_eigenvalues(&b.m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    #[serde(rename = "CP")]
    Cp,
    /// A single negative eigenvalue, attributed to the second-order truncation.
    #[serde(rename = "NCP_truncation_artifact")]
    NcpTruncationArtifact,
    #[serde(rename = "NCP")]
    Ncp,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Cp => "CP",
            Classification::NcpTruncationArtifact => "NCP_truncation_artifact",
            Classification::Ncp => "NCP",
        }
    }

    /// Whether the map counts as not completely positive.
    pub fn is_ncp(self) -> bool {
        self == Classification::Ncp
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify(eigs: &[f64; 4], tol_cls: f64) -> Classification {
    match eigs.iter().filter(|&&e| e < -tol_cls).count() {
        0 => Classification::Cp,
        1 => Classification::NcpTruncationArtifact,
        _ => Classification::Ncp,
    }
}

/// Noise floor for eigenvalue signs, set by the quadrature error.
pub fn classification_tolerance(quad_err: f64) -> f64 {
    (10.0 * quad_err).max(1e-8)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CPReport {
    pub eigs: [f64; 4],
    pub classification: Classification,
    pub tol_cls: f64,
    pub second_smallest: f64,
}

pub fn cp_report(a: &AMatrix, tol_cls: f64) -> Result<CPReport> {
    let eigs = hermitian_eigs(&reshuffle(a))?;
    Ok(CPReport {
        eigs,
        classification: classify(&eigs, tol_cls),
        tol_cls,
        second_smallest: eigs[1],
    })
}

pub fn apply_map(a: &AMatrix, rho: &DensityMatrix) -> DensityMatrix {
    let v = rho.vectorize();
    let mut out = [ZERO; 4];
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..4).map(|k| a.m[i][k] * v[k]).sum();
    }
    DensityMatrix::from_vector(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochSample {
    pub input: [f64; 3],
    pub output: [f64; 3],
    pub min_eig: f64,
    pub outside: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochImage {
    pub samples: Vec<BlochSample>,
    pub outside_fraction: f64,
    /// Largest `|r_out| − 1` over the samples, or zero if none leaves the ball.
    pub max_excess: f64,
}

/// Absolute tolerance on the Bloch-norm excess and on negative eigenvalues.
pub const OUTSIDE_TOL: f64 = 1e-9;

/// `n` Fibonacci-lattice points on the unit sphere followed by the six poles.
pub fn sphere_samples(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut pts = Vec::with_capacity(n + 6);
    for i in 0..n {
        let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let ang = golden * i as f64;
        pts.push([r * ang.cos(), r * ang.sin(), z]);
    }
    pts.extend([
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ]);
    pts
}

/// Image of the pure states under `a`.
pub fn bloch_image(a: &AMatrix, n_samples: usize) -> Result<BlochImage> {
    if n_samples < 6 {
        return Err(Error::Domain(format!("need at least 6 samples, got {n_samples}")));
    }
    let samples: Vec<BlochSample> = sphere_samples(n_samples)
        .into_iter()
        .map(|input| {
            let out = apply_map(a, &DensityMatrix::from_bloch(input));
            let output = out.bloch_vector();
            let norm = output.iter().map(|v| v * v).sum::<f64>().sqrt();
            let min_eig = out.min_eigenvalue();
            BlochSample {
                input,
                output,
                min_eig,
                outside: norm > 1.0 + OUTSIDE_TOL || min_eig < -OUTSIDE_TOL,
            }
        })
        .collect();
    let outside = samples.iter().filter(|s| s.outside).count();
    let max_excess = samples
        .iter()
        .map(|s| s.output.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0)
        .fold(0.0, f64::max);
    Ok(BlochImage {
        outside_fraction: outside as f64 / samples.len() as f64,
        max_excess,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{assemble_state, BlochAngles, ScenarioTag};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample_set() -> CoefficientSet {
        CoefficientSet {
            alpha: 0.97,
            beta: 0.02,
            gamma: 0.98,
            eta: 0.03,
            kappa: c(0.975, 0.004),
            lambda: c(0.001, -0.002),
            tag: ScenarioTag::Combined,
            warnings: vec![],
        }
    }

    fn other_set() -> CoefficientSet {
        CoefficientSet {
            alpha: 0.99,
            beta: 0.004,
            gamma: 0.996,
            eta: 0.01,
            kappa: c(0.99, -0.003),
            lambda: c(-0.0005, 0.0007),
            tag: ScenarioTag::Inertial,
            warnings: vec![],
        }
    }

    #[test]
    fn same_family_gives_identity() {
        let s = sample_set();
        let a = solve_a_map(&s, &s).unwrap();
        assert!(a.max_abs_diff(&AMatrix::identity()) < 1e-15);
    }

    #[test]
    fn from_ini_reads_off_coefficients() {
        let s = sample_set();
        let a = solve_a_map(&s, &CoefficientSet::ini()).unwrap();
        assert_eq!(a.el(1, 1), c(s.alpha, 0.0));
        assert_eq!(a.el(1, 4), c(s.beta, 0.0));
        assert_eq!(a.el(2, 2), s.kappa);
        assert_eq!(a.el(2, 3), s.lambda);
        assert_eq!(a.el(3, 2), s.lambda.conj());
        assert_eq!(a.el(3, 3), s.kappa.conj());
        assert_eq!(a.el(4, 1), c(s.eta, 0.0));
        assert_eq!(a.el(4, 4), c(s.gamma, 0.0));
        assert!(a.structure_defect() < 1e-15);
    }

    #[test]
    fn map_reproduces_output_family_for_every_angle() {
        let (j, k) = (sample_set(), other_set());
        let a = solve_a_map(&j, &k).unwrap();
        assert!(a.structure_defect() < 1e-15);
        for it in 0..12 {
            for ip in 0..12 {
                let ang = BlochAngles::new(PI * it as f64 / 11.0, 2.0 * PI * ip as f64 / 12.0).unwrap();
                let got = apply_map(&a, &assemble_state(&k, &ang));
                let want = assemble_state(&j, &ang);
                for r in 0..2 {
                    for s in 0..2 {
                        assert!((got.rho[r][s] - want.rho[r][s]).norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn singular_denominators() {
        let mut k = sample_set();
        k.alpha = 0.0;
        k.beta = 0.0;
        assert!(matches!(
            solve_a_map(&sample_set(), &k),
            Err(Error::SingularMap { name: "alpha*gamma - beta*eta", .. })
        ));
        let mut k = sample_set();
        k.lambda = k.kappa;
        assert!(matches!(
            solve_a_map(&sample_set(), &k),
            Err(Error::SingularMap { name: "|kappa|^2 - |lambda|^2", .. })
        ));
    }

    #[test]
    fn identity_reshuffle() {
        let b = reshuffle(&AMatrix::identity());
        for i in 0..4 {
            for j in 0..4 {
                let one = matches!((i, j), (0, 0) | (0, 3) | (3, 0) | (3, 3));
                assert_eq!(b.m[i][j], c(if one { 1.0 } else { 0.0 }, 0.0));
            }
        }
        let e = hermitian_eigs(&b).unwrap();
        for (k, want) in [0.0, 0.0, 0.0, 2.0].iter().enumerate() {
            assert!((e[k] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn inertial_layout_of_b() {
        let s = sample_set();
        let b = reshuffle(&solve_a_map(&s, &CoefficientSet::ini()).unwrap());
        let want = [
            [c(s.alpha, 0.0), c(0.0, 0.0), c(0.0, 0.0), s.kappa],
            [c(0.0, 0.0), c(s.beta, 0.0), s.lambda, c(0.0, 0.0)],
            [c(0.0, 0.0), s.lambda.conj(), c(s.eta, 0.0), c(0.0, 0.0)],
            [s.kappa.conj(), c(0.0, 0.0), c(0.0, 0.0), c(s.gamma, 0.0)],
        ];
        assert_eq!(b.m, want);
    }

    #[test]
    fn reshuffle_is_an_involution() {
        let a = solve_a_map(&sample_set(), &other_set()).unwrap();
        let b = reshuffle(&a);
        assert_eq!(reshuffle(&b.as_a()).m, a.m);
        // The diagonal of B collects the population block of A.
        let pop = (a.el(1, 1) + a.el(1, 4) + a.el(4, 1) + a.el(4, 4)).re;
        assert!((b.trace() - pop).abs() < 1e-15);
        let e = hermitian_eigs(&b).unwrap();
        assert!((e.iter().sum::<f64>() - b.trace()).abs() < 1e-10);
    }

    #[test]
    fn non_hermitian_b_is_rejected() {
        let mut b = reshuffle(&AMatrix::identity());
        b.m[0][1] = c(1e-3, 0.0);
        assert!(matches!(hermitian_eigs(&b), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn classification_rules() {
        assert_eq!(classify(&[-1e-12, 0.01, 0.3, 1.9], 1e-8), Classification::Cp);
        assert_eq!(
            classify(&[-0.05, 0.002, 0.4, 1.9], 1e-8),
            Classification::NcpTruncationArtifact
        );
        assert_eq!(classify(&[-0.05, -0.003, 0.4, 1.9], 1e-8), Classification::Ncp);
        assert_eq!(classification_tolerance(1e-12), 1e-8);
        assert_eq!(classification_tolerance(1e-7), 1e-6);
    }

    #[test]
    fn apply_map_identity_and_linearity() {
        let rho1 = DensityMatrix::from_bloch([0.3, 0.1, -0.5]);
        let rho2 = DensityMatrix::from_bloch([0.0, -0.8, 0.2]);
        assert_eq!(apply_map(&AMatrix::identity(), &rho1), rho1);
        let a = solve_a_map(&sample_set(), &other_set()).unwrap();
        let mut mid = [[c(0.0, 0.0); 2]; 2];
        for r in 0..2 {
            for s in 0..2 {
                mid[r][s] = (rho1.rho[r][s] + rho2.rho[r][s]) / 2.0;
            }
        }
        let lhs = apply_map(&a, &DensityMatrix::new(mid));
        let (o1, o2) = (apply_map(&a, &rho1), apply_map(&a, &rho2));
        for r in 0..2 {
            for s in 0..2 {
                assert!((lhs.rho[r][s] - (o1.rho[r][s] + o2.rho[r][s]) / 2.0).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn identity_bloch_image_stays_on_sphere() {
        let img = bloch_image(&AMatrix::identity(), 500).unwrap();
        assert_eq!(img.samples.len(), 506);
        assert_eq!(img.outside_fraction, 0.0);
        for s in &img.samples {
            let n = s.output.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
        assert!(bloch_image(&AMatrix::identity(), 5).is_err());
    }

    #[test]
    fn contracting_map_stays_inside() {
        let s = 0.25;
        let target = CoefficientSet {
            alpha: 1.0 - s,
            beta: s,
            gamma: 1.0 - s,
            eta: s,
            kappa: c(0.5, 0.0),
            lambda: c(0.0, 0.0),
            tag: ScenarioTag::Combined,
            warnings: vec![],
        };
        let a = solve_a_map(&target, &CoefficientSet::ini()).unwrap();
        let img = bloch_image(&a, 2000).unwrap();
        assert_eq!(img.outside_fraction, 0.0);
        for smp in &img.samples {
            for k in 0..3 {
                assert!((smp.output[k] - 0.5 * smp.input[k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn fibonacci_points_are_unit() {
        for p in sphere_samples(100) {
            let n = p.iter().map(|v| v * v).sum::<f64>();
            assert!((n - 1.0).abs() < 1e-14);
        }
    }
}
