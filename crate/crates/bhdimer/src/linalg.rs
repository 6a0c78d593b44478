//! Small dense complex linear-algebra kernels: Hermitian Cholesky for
//! positivity certification, LU with partial pivoting, and the scaling-and-
//! squaring Pade matrix exponential used by the superoperator benchmark.

use ndarray::Array2;
use num_complex::Complex64;

use crate::{Error, Result};

/// Attempts the Cholesky factorization of the Hermitian matrix `a + shift*I`.
///
/// Succeeds exactly when the shifted matrix is positive definite, so a
/// successful call certifies `lambda_min(a) > -shift` up to round-off. Only
/// the lower triangle of `a` is read.
pub fn cholesky_in_shift(a: &Array2<Complex64>, shift: f64) -> bool {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let mut l = Array2::<Complex64>::zeros((n, n));
    for j in 0..n {
        let mut d = a[(j, j)].re + shift;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        let ljj = d.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    true
}

/// Smallest eigenvalue of a Hermitian matrix, located by bisection on the
/// shift at which the Cholesky factorization breaks down.
///
/// The result is exact to within `tol` (absolute). Gershgorin discs provide
/// the initial bracket, so no iterative eigensolver is involved.
pub fn min_eigenvalue(a: &Array2<Complex64>, tol: f64) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut lo = f64::INFINITY; // certified lower bound on lambda_min
    let mut hi = f64::INFINITY; // upper bound: min Gershgorin-free diagonal
    for i in 0..n {
        let radius: f64 = (0..n)
            .filter(|&j| j != i)
            .map(|j| a[(i, j)].norm())
            .sum();
        lo = lo.min(a[(i, i)].re - radius);
        hi = hi.min(a[(i, i)].re);
    }
    // PD(a - s*I) <=> lambda_min > s; invariant: lambda_min in [lo, hi]
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if cholesky_in_shift(a, -mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// LU factorization with partial pivoting of a square complex matrix.
pub struct Lu {
    lu: Array2<Complex64>,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &Array2<Complex64>) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.ncols(),
            });
        }
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut pivot = k;
            let mut best = lu[(k, k)].norm();
            for i in k + 1..n {
                let mag = lu[(i, k)].norm();
                if mag > best {
                    best = mag;
                    pivot = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularMatrix);
            }
            if pivot != k {
                perm.swap(k, pivot);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(pivot, j)];
                    lu[(pivot, j)] = tmp;
                }
            }
            let inv = Complex64::new(1.0, 0.0) / lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] * inv;
                lu[(i, k)] = factor;
                for j in k + 1..n {
                    let sub = factor * lu[(k, j)];
                    lu[(i, j)] -= sub;
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    /// Solves `A X = B` for a matrix of right-hand sides.
    pub fn solve(&self, b: &Array2<Complex64>) -> Result<Array2<Complex64>> {
        let n = self.lu.nrows();
        if b.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.nrows(),
            });
        }
        let m = b.ncols();
        let mut x = Array2::<Complex64>::zeros((n, m));
        for i in 0..n {
            for j in 0..m {
                x[(i, j)] = b[(self.perm[i], j)];
            }
        }
        // forward substitution (unit lower triangle)
        for i in 1..n {
            for k in 0..i {
                let factor = self.lu[(i, k)];
                for j in 0..m {
                    let sub = factor * x[(k, j)];
                    x[(i, j)] -= sub;
                }
            }
        }
        // back substitution
        for i in (0..n).rev() {
            for k in i + 1..n {
                let factor = self.lu[(i, k)];
                for j in 0..m {
                    let sub = factor * x[(k, j)];
                    x[(i, j)] -= sub;
                }
            }
        }
        for i in (0..n).rev() {
            let inv = Complex64::new(1.0, 0.0) / self.lu[(i, i)];
            for j in 0..m {
                x[(i, j)] *= inv;
            }
        }
        Ok(x)
    }
}

fn identity(n: usize) -> Array2<Complex64> {
    let mut id = Array2::zeros((n, n));
    for i in 0..n {
        id[(i, i)] = Complex64::new(1.0, 0.0);
    }
    id
}

fn one_norm(a: &Array2<Complex64>) -> f64 {
    let mut best = 0.0_f64;
    for j in 0..a.ncols() {
        let col: f64 = (0..a.nrows()).map(|i| a[(i, j)].norm()).sum();
        best = best.max(col);
    }
    best
}

/// Matrix exponential by degree-13 Pade approximation with scaling and
/// squaring.
pub fn expm(a: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    const THETA_13: f64 = 5.371_920_351_148_152;
    const B: [f64; 14] = [
        64_764_752_532_480_000.0,
        32_382_376_266_240_000.0,
        7_771_770_303_897_600.0,
        1_187_353_796_428_800.0,
        129_060_195_264_000.0,
        10_559_470_521_600.0,
        670_442_572_800.0,
        33_522_128_640.0,
        1_323_241_920.0,
        40_840_800.0,
        960_960.0,
        16_380.0,
        182.0,
        1.0,
    ];

    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.ncols(),
        });
    }
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(Error::NonFinite("matrix exponential input"));
    }
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.mapv(|v| v / 2f64.powi(squarings as i32));

    let a2 = scaled.dot(&scaled);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let id = identity(n);

    let u_inner = &a6 * B[13] + &a4 * B[11] + &a2 * B[9];
    let u_poly = a6.dot(&u_inner) + &a6 * B[7] + &a4 * B[5] + &a2 * B[3] + &id * B[1];
    let u = scaled.dot(&u_poly);
    let v_inner = &a6 * B[12] + &a4 * B[10] + &a2 * B[8];
    let v = a6.dot(&v_inner) + &a6 * B[6] + &a4 * B[4] + &a2 * B[2] + &id * B[0];

    let denom = &v - &u;
    let numer = &v + &u;
    let mut result = Lu::factor(&denom)?.solve(&numer)?;
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    Ok(result)
}

/// Frobenius distance between two complex matrices.
pub fn frobenius_distance(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(n: usize, seed: &[f64]) -> Array2<Complex64> {
        let mut a = Array2::zeros((n, n));
        let mut k = 0;
        let mut next = || {
            let v = seed[k % seed.len()] + 0.01 * (k as f64);
            k += 1;
            v.sin()
        };
        for i in 0..n {
            for j in i..n {
                if i == j {
                    a[(i, i)] = c(next(), 0.0);
                } else {
                    let v = c(next(), next());
                    a[(i, j)] = v;
                    a[(j, i)] = v.conj();
                }
            }
        }
        a
    }

    #[test]
    fn cholesky_certifies_definiteness() {
        // B B^ + eps I is positive definite
        let b = random_hermitian(5, &[0.3, 1.7, -0.4]);
        let bbh = b.dot(&b.t().mapv(|v| v.conj()));
        assert!(cholesky_in_shift(&bbh, 1e-12));
        // subtracting more than the largest eigenvalue cannot stay PD
        let trace: f64 = (0..5).map(|i| bbh[(i, i)].re).sum();
        assert!(!cholesky_in_shift(&bbh, -trace));
    }

    #[test]
    fn min_eigenvalue_matches_2x2_closed_form() {
        let a = ndarray::array![
            [c(1.0, 0.0), c(0.3, -0.2)],
            [c(0.3, 0.2), c(-0.5, 0.0)]
        ];
        let mean = 0.25;
        let diff = 0.75;
        let expected = mean - (diff * diff + 0.13_f64).sqrt();
        assert_abs_diff_eq!(min_eigenvalue(&a, 1e-12), expected, epsilon = 1e-10);
    }

    #[test]
    fn lu_solves_known_system() {
        let a = ndarray::array![
            [c(2.0, 0.0), c(1.0, 1.0)],
            [c(0.0, -1.0), c(3.0, 0.0)]
        ];
        let x_true = ndarray::array![[c(1.0, 2.0)], [c(-0.5, 0.25)]];
        let b = a.dot(&x_true);
        let x = Lu::factor(&a).unwrap().solve(&b).unwrap();
        for i in 0..2 {
            assert!((x[(i, 0)] - x_true[(i, 0)]).norm() < 1e-13);
        }
    }

    #[test]
    fn lu_rejects_singular() {
        let a = ndarray::array![
            [c(1.0, 0.0), c(2.0, 0.0)],
            [c(2.0, 0.0), c(4.0, 0.0)]
        ];
        assert!(Lu::factor(&a).is_err());
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let z = Array2::<Complex64>::zeros((4, 4));
        let e = expm(&z).unwrap();
        assert!(frobenius_distance(&e, &identity(4)) < 1e-15);
    }

    #[test]
    fn expm_of_diagonal() {
        let mut d = Array2::<Complex64>::zeros((3, 3));
        d[(0, 0)] = c(0.5, 0.0);
        d[(1, 1)] = c(-1.25, 0.75);
        d[(2, 2)] = c(0.0, -2.0);
        let e = expm(&d).unwrap();
        for i in 0..3 {
            assert!((e[(i, i)] - d[(i, i)].exp()).norm() < 1e-14);
        }
    }

    #[test]
    fn expm_of_nilpotent() {
        let mut a = Array2::<Complex64>::zeros((2, 2));
        a[(0, 1)] = c(3.5, -1.0);
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((e[(0, 1)] - c(3.5, -1.0)).norm() < 1e-14);
        assert!((e[(1, 0)]).norm() < 1e-15);
        assert!((e[(1, 1)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn expm_rotation_block() {
        let theta = 1.234_f64;
        let a = ndarray::array![
            [c(0.0, 0.0), c(-theta, 0.0)],
            [c(theta, 0.0), c(0.0, 0.0)]
        ];
        let e = expm(&a).unwrap();
        assert_abs_diff_eq!(e[(0, 0)].re, theta.cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(e[(1, 0)].re, theta.sin(), epsilon = 1e-14);
    }

    #[test]
    fn expm_large_norm_uses_squaring() {
        // 40 * rotation exercises the scaling path; result stays orthogonal
        let theta = 40.0_f64;
        let a = ndarray::array![
            [c(0.0, 0.0), c(-theta, 0.0)],
            [c(theta, 0.0), c(0.0, 0.0)]
        ];
        let e = expm(&a).unwrap();
        assert_abs_diff_eq!(e[(0, 0)].re, theta.cos(), epsilon = 1e-11);
        assert_abs_diff_eq!(e[(1, 0)].re, theta.sin(), epsilon = 1e-11);
    }

    proptest! {
        #[test]
        fn expm_times_expm_of_negation_is_identity(seed in proptest::collection::vec(-1.0..1.0f64, 18)) {
            let mut a = Array2::<Complex64>::zeros((3, 3));
            for i in 0..3 {
                for j in 0..3 {
                    a[(i, j)] = c(seed[i * 3 + j], seed[9 + i * 3 + j]);
                }
            }
            let e = expm(&a).unwrap();
            let em = expm(&a.mapv(|v| -v)).unwrap();
            prop_assert!(frobenius_distance(&e.dot(&em), &identity(3)) < 1e-12);
        }

        #[test]
        fn expm_matches_taylor_for_small_norm(seed in proptest::collection::vec(-0.1..0.1f64, 18)) {
            let mut a = Array2::<Complex64>::zeros((3, 3));
            for i in 0..3 {
                for j in 0..3 {
                    a[(i, j)] = c(seed[i * 3 + j], seed[9 + i * 3 + j]);
                }
            }
            // independent route: plain Taylor series, converges fast at this norm
            let mut taylor = identity(3);
            let mut term = identity(3);
            for k in 1..25 {
                term = term.dot(&a).mapv(|v| v / k as f64);
                taylor = &taylor + &term;
            }
            let e = expm(&a).unwrap();
            prop_assert!(frobenius_distance(&e, &taylor) < 1e-13);
        }

        #[test]
        fn min_eigenvalue_bisection_agrees_with_2x2(
            d1 in -2.0..2.0f64, d2 in -2.0..2.0f64, re in -1.0..1.0f64, im in -1.0..1.0f64,
        ) {
            let a = ndarray::array![
                [c(d1, 0.0), c(re, -im)],
                [c(re, im), c(d2, 0.0)]
            ];
            let mean = 0.5 * (d1 + d2);
            let diff = 0.5 * (d1 - d2);
            let expected = mean - (diff * diff + re * re + im * im).sqrt();
            prop_assert!((min_eigenvalue(&a, 1e-11) - expected).abs() < 1e-9);
        }
    }
}
