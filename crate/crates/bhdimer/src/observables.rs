//! Extraction of plotted and quoted quantities from density-matrix
//! trajectories: the single-particle density matrix and its eigenpairs,
//! condensate amplitudes, mean current, number histogram and moments, and the
//! number-sector blocks of the full density matrix.

use ndarray::Array2;
use num_complex::Complex64;

use crate::fock::{FockBasis, Operator};
use crate::liouville::{leakage, DensityMatrix};
use crate::{Error, Result};

/// Tolerance on the imaginary residue of expectation values of Hermitian
/// operators; anything larger signals a broken Hermiticity invariant.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// The 2x2 single-particle density matrix `rho_{l,m} = Tr[a_l^ a_m R]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleParticleDm {
    pub rho11: f64,
    pub rho22: f64,
    pub rho12: Complex64,
}

/// Eigen-decomposition of the single-particle density matrix, eigenvalues
/// descending, eigenvectors orthonormal.
#[derive(Debug, Clone, Copy)]
pub struct SpdmEigs {
    pub lambda1: f64,
    pub lambda2: f64,
    pub v1: [Complex64; 2],
    pub v2: [Complex64; 2],
}

impl SingleParticleDm {
    /// Builds the matrix by direct traces against the sparse actions of
    /// `a_l^ a_m`; Hermitian by construction.
    pub fn from_density(r: &DensityMatrix, basis: &FockBasis) -> Result<Self> {
        if r.dim() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                got: r.dim(),
            });
        }
        let m = r.matrix();
        let mut rho11 = 0.0;
        let mut rho22 = 0.0;
        let mut rho12 = Complex64::new(0.0, 0.0);
        for (i, &(n1, n2)) in basis.states().iter().enumerate() {
            rho11 += n1 as f64 * m[(i, i)].re;
            rho22 += n2 as f64 * m[(i, i)].re;
            // a1^ a2 |n1,n2> = sqrt(n2 (n1+1)) |n1+1, n2-1>
            if n2 > 0 {
                if let Some(k) = basis.index_of(n1 + 1, n2 - 1) {
                    let amp = ((n2 * (n1 + 1)) as f64).sqrt();
                    rho12 += amp * m[(i, k)];
                }
            }
        }
        Ok(SingleParticleDm { rho11, rho22, rho12 })
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [
            [Complex64::new(self.rho11, 0.0), self.rho12],
            [self.rho12.conj(), Complex64::new(self.rho22, 0.0)],
        ]
    }

    pub fn trace(&self) -> f64 {
        self.rho11 + self.rho22
    }

    pub fn scaled(&self, s: f64) -> Self {
        SingleParticleDm {
            rho11: self.rho11 * s,
            rho22: self.rho22 * s,
            rho12: self.rho12 * s,
        }
    }

    /// Closed-form 2x2 Hermitian eigensolve.
    pub fn eigs(&self) -> SpdmEigs {
        let mean = 0.5 * (self.rho11 + self.rho22);
        let half_diff = 0.5 * (self.rho11 - self.rho22);
        let split = (half_diff * half_diff + self.rho12.norm_sqr()).sqrt();
        let lambda1 = mean + split;
        let lambda2 = mean - split;
        let v1 = if self.rho12.norm() == 0.0 {
            if self.rho11 >= self.rho22 {
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
            } else {
                [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
            }
        } else {
            let unnorm = [self.rho12, Complex64::new(lambda1 - self.rho11, 0.0)];
            let norm = (unnorm[0].norm_sqr() + unnorm[1].norm_sqr()).sqrt();
            [unnorm[0] / norm, unnorm[1] / norm]
        };
        // orthogonal complement in C^2
        let v2 = [-v1[1].conj(), v1[0].conj()];
        SpdmEigs {
            lambda1,
            lambda2,
            v1,
            v2,
        }
    }

    /// Macroscopic wave function `Psi = sqrt(lambda1) v1`, with the global
    /// phase fixed so `psi1` is real and non-negative.
    pub fn condensate_amplitudes(&self) -> Result<(Complex64, Complex64)> {
        let eigs = self.eigs();
        if eigs.lambda1 <= 0.0 {
            return Err(Error::NoCondensate(eigs.lambda1));
        }
        let scale = eigs.lambda1.sqrt();
        let mut psi1 = eigs.v1[0] * scale;
        let mut psi2 = eigs.v1[1] * scale;
        let phase_ref = if psi1.norm() > 0.0 { psi1 } else { psi2 };
        if phase_ref.norm() > 0.0 {
            let phase = phase_ref / phase_ref.norm();
            psi1 /= phase;
            psi2 /= phase;
        }
        // the phase division leaves only round-off in Im(psi1); drop it
        Ok((Complex64::new(psi1.re, 0.0), psi2))
    }
}

/// Probabilities `P_N` of finding `N` particles in the dimer, `N = 0..n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberHistogram {
    p: Vec<f64>,
}

impl NumberHistogram {
    pub fn from_density(r: &DensityMatrix, basis: &FockBasis) -> Result<Self> {
        if r.dim() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                got: r.dim(),
            });
        }
        let mut p = Vec::with_capacity(basis.n_max() + 1);
        for total in 0..=basis.n_max() {
            let range = basis.block_range(total).expect("within basis");
            p.push(range.map(|i| r.matrix()[(i, i)].re).sum());
        }
        Ok(NumberHistogram { p })
    }

    /// Builds a histogram from raw probabilities (used by the analytics
    /// layer); values are not normalized here.
    pub fn from_probabilities(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidParameter("histogram must not be empty".into()));
        }
        if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "histogram probabilities must be finite and non-negative".into(),
            ));
        }
        Ok(NumberHistogram { p })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn n_max(&self) -> usize {
        self.p.len() - 1
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.p
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum::<f64>()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.p
            .iter()
            .enumerate()
            .map(|(n, p)| (n as f64 - mean).powi(2) * p)
            .sum::<f64>()
    }

    pub fn std(&self) -> f64 {
        self.variance().sqrt()
    }
}

/// Mean single-particle current `Tr[j R]`; the imaginary residue is checked
/// against [`IMAG_RESIDUE_TOL`] and discarded.
pub fn mean_current(r: &DensityMatrix, current_op: &Operator) -> Result<f64> {
    let value = expectation(current_op, r)?;
    if value.im.abs() > IMAG_RESIDUE_TOL {
        return Err(Error::ImaginaryResidue {
            residue: value.im.abs(),
            tol: IMAG_RESIDUE_TOL,
        });
    }
    Ok(value.re)
}

/// `Tr[O R]` for a dense operator.
pub fn expectation(op: &Operator, r: &DensityMatrix) -> Result<Complex64> {
    if op.dim() != r.dim() {
        return Err(Error::DimensionMismatch {
            expected: r.dim(),
            got: op.dim(),
        });
    }
    let d = r.dim();
    let om = op.matrix();
    let rm = r.matrix();
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for k in 0..d {
            tr += om[(i, k)] * rm[(k, i)];
        }
    }
    Ok(tr)
}

/// Mean total particle number `<n1 + n2>`.
pub fn mean_number(r: &DensityMatrix, basis: &FockBasis) -> Result<f64> {
    Ok(NumberHistogram::from_density(r, basis)?.mean())
}

/// Variance of the total particle number.
pub fn number_variance(r: &DensityMatrix, basis: &FockBasis) -> Result<f64> {
    Ok(NumberHistogram::from_density(r, basis)?.variance())
}

/// The `(N, M)` block of the full density matrix: `N = M` gives the partial
/// density matrix of the `N`-particle sector, `N != M` the coherences
/// between sectors.
pub fn block_extract(
    r: &DensityMatrix,
    basis: &FockBasis,
    sector_n: usize,
    sector_m: usize,
) -> Result<Array2<Complex64>> {
    let rows = basis.block_range(sector_n)?;
    let cols = basis.block_range(sector_m)?;
    let mut block = Array2::zeros((rows.len(), cols.len()));
    for (bi, i) in rows.clone().enumerate() {
        for (bj, j) in cols.clone().enumerate() {
            block[(bi, bj)] = r.matrix()[(i, j)];
        }
    }
    Ok(block)
}

/// One stored sample of the trajectory.
#[derive(Debug, Clone)]
pub struct SampleRow {
    pub t: f64,
    pub delta: f64,
    pub omega: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub rho11: f64,
    pub rho22: f64,
    pub rho12: Complex64,
    pub current: f64,
    pub nbar: f64,
    pub var_n: f64,
    pub leakage: f64,
    pub trace_err: f64,
    pub herm_err: f64,
    /// positivity certified at the -1e-8 floor via Cholesky
    pub psd_certified: bool,
    /// exact smallest eigenvalue, computed on a cadence
    pub min_eig: Option<f64>,
    pub histogram: Vec<f64>,
}

/// Time-stamped observable records accumulated while integrating.
#[derive(Debug, Clone, Default)]
pub struct ObservableSeries {
    pub rows: Vec<SampleRow>,
}

impl ObservableSeries {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn currents(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.current).collect()
    }
}

/// Computes and stores every observable for the CLI and the analytics layer.
pub struct ObservableRecorder<'a> {
    basis: &'a FockBasis,
    current_op: Operator,
    pub series: ObservableSeries,
    /// floor for the positivity certificate
    pub psd_floor: f64,
    /// compute the exact smallest eigenvalue every this many samples (0 = never)
    pub min_eig_every: usize,
    pub top_shells: usize,
}

impl<'a> ObservableRecorder<'a> {
    pub fn new(basis: &'a FockBasis) -> Self {
        ObservableRecorder {
            basis,
            current_op: Operator::current(basis),
            series: ObservableSeries::default(),
            psd_floor: crate::liouville::POSITIVITY_FLOOR,
            min_eig_every: 0,
            top_shells: 2,
        }
    }

    /// Samples every observable at time `t`; fails on a broken invariant
    /// that indicates a numerical problem rather than physics.
    pub fn sample(&mut self, t: f64, delta: f64, omega: f64, r: &DensityMatrix) -> Result<()> {
        let spdm = SingleParticleDm::from_density(r, self.basis)?;
        let eigs = spdm.eigs();
        let current = mean_current(r, &self.current_op)?;
        let hist = NumberHistogram::from_density(r, self.basis)?;
        let psd_certified = r.certify_min_eigenvalue(self.psd_floor);
        let min_eig = if self.min_eig_every > 0
            && (self.series.rows.len() % self.min_eig_every == 0 || !psd_certified)
        {
            Some(r.min_eigenvalue(1e-12))
        } else {
            None
        };
        self.series.rows.push(SampleRow {
            t,
            delta,
            omega,
            lambda1: eigs.lambda1,
            lambda2: eigs.lambda2,
            rho11: spdm.rho11,
            rho22: spdm.rho22,
            rho12: spdm.rho12,
            current,
            nbar: hist.mean(),
            var_n: hist.variance(),
            leakage: leakage(r, self.basis, self.top_shells),
            trace_err: (r.trace() - 1.0).abs(),
            herm_err: r.hermiticity_error(),
            psd_certified,
            min_eig,
            histogram: hist.p,
        });
        Ok(())
    }
}
