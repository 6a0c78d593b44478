//! Vectorized Liouvillian superoperator and its exact matrix-exponential
//! propagator.
//!
//! This is the certification oracle for the RK4 integrator: it is built
//! directly from the operator matrices (not from the structured right-hand
//! side in [`crate::liouville`]) and propagates `vec(R)` with a dense
//! `dim^2 x dim^2` exponential, so the two routes share no code.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::fock::Operator;
use crate::linalg;
use crate::liouville::DensityMatrix;
use crate::{Error, Result};

/// Dense superoperator acting on row-major `vec(R)`.
pub struct VectorizedLiouvillian {
    dim: usize,
    mat: Array2<Complex64>,
}

impl VectorizedLiouvillian {
    /// Assembles the generator for Hamiltonian `h` and decay `gamma` on the
    /// jump mode `a2`.
    pub fn new(h: &Operator, a2: &Operator, gamma: f64) -> Result<Self> {
        let d = h.dim();
        if a2.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: a2.dim(),
            });
        }
        let n = d * d;
        let hm = h.matrix();
        let am = a2.matrix();
        let ada = a2.dagger().into_matrix().dot(am);
        let mut mat = Array2::<Complex64>::zeros((n, n));
        let minus_i = Complex64::new(0.0, -1.0);
        let plus_i = Complex64::new(0.0, 1.0);
        let half_gamma = Complex64::new(0.5 * gamma, 0.0);

        for i in 0..d {
            for j in 0..d {
                let row = i * d + j;
                for k in 0..d {
                    // -i H R  and  -(gamma/2) A^A R : coefficient of R_kj
                    let coeff = minus_i * hm[(i, k)] - half_gamma * ada[(i, k)];
                    mat[(row, k * d + j)] += coeff;
                    // +i R H  and  -(gamma/2) R A^A : coefficient of R_ik
                    let coeff = plus_i * hm[(k, j)] - half_gamma * ada[(k, j)];
                    mat[(row, i * d + k)] += coeff;
                }
                // +gamma A R A^ : coefficient of R_kl is A_ik conj(A_jl)
                for k in 0..d {
                    if am[(i, k)] == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for l in 0..d {
                        let a_jl = am[(j, l)];
                        if a_jl == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        mat[(row, k * d + l)] += am[(i, k)] * a_jl.conj() * gamma;
                    }
                }
            }
        }
        Ok(VectorizedLiouvillian { dim: d, mat })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.mat
    }

    /// Applies the generator once: `vec(dR/dt) = L vec(R)`.
    pub fn apply(&self, r: &DensityMatrix) -> Result<Array2<Complex64>> {
        if r.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: r.dim(),
            });
        }
        let v = Array1::from_iter(r.matrix().iter().copied());
        let out = self.mat.dot(&v);
        Ok(Array2::from_shape_vec((self.dim, self.dim), out.to_vec()).expect("square"))
    }

    /// Exact propagator `exp(L t)`.
    pub fn propagator(&self, t: f64) -> Result<Array2<Complex64>> {
        linalg::expm(&self.mat.mapv(|v| v * t))
    }

    /// Propagates a state exactly: `vec(R(t)) = exp(L t) vec(R0)`.
    pub fn propagate(&self, r0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        if r0.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: r0.dim(),
            });
        }
        let prop = self.propagator(t)?;
        let v = Array1::from_iter(r0.matrix().iter().copied());
        let out = prop.dot(&v);
        Ok(DensityMatrix::from_matrix_unchecked(
            Array2::from_shape_vec((self.dim, self.dim), out.to_vec()).expect("square"),
        ))
    }
}
