//! Cyclic Jacobi eigenvalues for small dense Hermitian matrices.

use num_complex::Complex64;

const MAX_SWEEPS: usize = 64;

fn off_norm_sq<const N: usize>(a: &[[Complex64; N]; N]) -> f64 {
    let mut s = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i != j {
                s += v.norm_sqr();
            }
        }
    }
    s
}

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// Only the Hermitian part `(A + A†)/2` is used. Each rotation first removes
/// the phase of the pivot, then applies the real Jacobi rotation that
/// annihilates it.
pub fn hermitian_eigenvalues<const N: usize>(m: &[[Complex64; N]; N]) -> [f64; N] {
    let mut a = *m;
    for i in 0..N {
        for j in i..N {
            let h = 0.5 * (a[i][j] + a[j][i].conj());
            a[i][j] = h;
            a[j][i] = h.conj();
        }
        a[i][i] = Complex64::new(a[i][i].re, 0.0);
    }

    let scale: f64 = a.iter().flatten().map(|v| v.norm_sqr()).sum();
    for _ in 0..MAX_SWEEPS {
        if off_norm_sq(&a) <= scale * 1e-34 {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                let apq = a[p][q];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[p][p].re;
                let aqq = a[q][q].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // V = diag(1, conj(phase)) · [[c, s], [−s, c]]
                let v00 = Complex64::new(c, 0.0);
                let v01 = Complex64::new(s, 0.0);
                let v10 = -phase.conj() * s;
                let v11 = phase.conj() * c;
                for row in a.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = x * v00 + y * v10;
                    row[q] = x * v01 + y * v11;
                }
                for k in 0..N {
                    let (x, y) = (a[p][k], a[q][k]);
                    a[p][k] = v00.conj() * x + v10.conj() * y;
                    a[q][k] = v01.conj() * x + v11.conj() * y;
                }
                a[p][q] = Complex64::new(0.0, 0.0);
                a[q][p] = Complex64::new(0.0, 0.0);
                a[p][p].im = 0.0;
                a[q][q].im = 0.0;
            }
        }
    }

    let mut eigs = [0.0; N];
    for (i, e) in eigs.iter_mut().enumerate() {
        *e = a[i][i].re;
    }
    eigs.sort_by(f64::total_cmp);
    eigs
}

/// `max |A − A†|` entrywise.
pub fn hermiticity_defect<const N: usize>(m: &[[Complex64; N]; N]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..N {
        for j in 0..N {
            d = d.max((m[i][j] - m[j][i].conj()).norm());
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// det(λI − A) by cofactor expansion; real for Hermitian A and real λ.
    fn char_poly(a: &[[Complex64; 4]; 4], lambda: f64) -> f64 {
        fn det(m: Vec<Vec<Complex64>>) -> Complex64 {
            let n = m.len();
            if n == 1 {
                return m[0][0];
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for col in 0..n {
                let minor: Vec<Vec<Complex64>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, v)| *v).collect())
                    .collect();
                let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
                acc += m[0][col] * det(minor) * sign;
            }
            acc
        }
        let m = (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| {
                        let id = if i == j { lambda } else { 0.0 };
                        Complex64::new(id, 0.0) - a[i][j]
                    })
                    .collect()
            })
            .collect();
        det(m).re
    }

    /// Roots of the characteristic polynomial by scanning and bisection.
    fn oracle_roots(a: &[[Complex64; 4]; 4]) -> Vec<f64> {
        let bound: f64 = a
            .iter()
            .map(|r| r.iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
            + 1e-9;
        let steps = 20_000;
        let h = 2.0 * bound / steps as f64;
        let mut roots = Vec::new();
        let mut x0 = -bound;
        let mut f0 = char_poly(a, x0);
        for k in 1..=steps {
            let x1 = -bound + k as f64 * h;
            let f1 = char_poly(a, x1);
            if f0 == 0.0 {
                roots.push(x0);
            } else if f0 * f1 < 0.0 {
                let (mut lo, mut hi, mut flo) = (x0, x1, f0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let fm = char_poly(a, mid);
                    if fm * flo <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            x0 = x1;
            f0 = f1;
        }
        roots
    }

    #[test]
    fn diagonal_input() {
        let mut a = [[c(0.0, 0.0); 4]; 4];
        for (i, v) in [0.3, 0.1, 0.4, 0.2].iter().enumerate() {
            a[i][i] = c(*v, 0.0);
        }
        assert_eq!(hermitian_eigenvalues(&a), [0.1, 0.2, 0.3, 0.4]);
    }

    #[test]
    fn rank_one_identity_map_dynamical_matrix() {
        let mut b = [[c(0.0, 0.0); 4]; 4];
        for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            b[i][j] = c(1.0, 0.0);
        }
        let e = hermitian_eigenvalues(&b);
        let expected = [0.0, 0.0, 0.0, 2.0];
        for k in 0..4 {
            assert!((e[k] - expected[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn complex_two_by_two() {
        // [[2, i], [−i, 2]] has eigenvalues 1 and 3.
        let a = [[c(2.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(2.0, 0.0)]];
        let e = hermitian_eigenvalues(&a);
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] - 3.0).abs() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn matches_characteristic_polynomial_roots(vals in proptest::collection::vec(-1.0f64..1.0, 16)) {
            let mut a = [[c(0.0, 0.0); 4]; 4];
            let mut k = 0;
            for i in 0..4 {
                a[i][i] = c(vals[k], 0.0);
                k += 1;
            }
            for i in 0..4 {
                for j in i + 1..4 {
                    a[i][j] = c(vals[k], vals[k + 1]);
                    a[j][i] = a[i][j].conj();
                    k += 2;
                }
            }
            let e = hermitian_eigenvalues(&a);
            let roots = oracle_roots(&a);
            // Random matrices have distinct eigenvalues with probability one;
            // skip the rare nearly-degenerate draw the scan cannot bracket.
            prop_assume!(roots.len() == 4);
            for k in 0..4 {
                prop_assert!((e[k] - roots[k]).abs() < 1e-10, "{:?} vs {:?}", e, roots);
            }
            let tr: f64 = (0..4).map(|i| a[i][i].re).sum();
            prop_assert!((e.iter().sum::<f64>() - tr).abs() < 1e-12);
        }
    }
}
