//! Truncated two-mode bosonic Fock space and the operators acting on it.
//!
//! The basis keeps every occupation pair `(n1, n2)` with `n1 + n2 <= n_max`,
//! ordered by total particle number so that fixed-`N` sectors form contiguous
//! blocks along the diagonal of any number-conserving matrix.

use ndarray::Array2;
use num_complex::Complex64;

use crate::{Error, Result};

/// One of the two bosonic modes of the dimer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    One,
    Two,
}

impl Mode {
    /// Accepts the conventional 1-based mode index.
    pub fn from_index(index: usize) -> Result<Self> {
        match index {
            1 => Ok(Mode::One),
            2 => Ok(Mode::Two),
            other => Err(Error::InvalidMode(other)),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Mode::One => 1,
            Mode::Two => 2,
        }
    }
}

/// Enumerated two-mode occupation states `|n1, n2>` with `n1 + n2 <= n_max`.
///
/// States are sorted by total number `N = n1 + n2` ascending and by `n1`
/// descending inside each `N`-block, so block `N` occupies the contiguous
/// index range `[N(N+1)/2, N(N+1)/2 + N]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    n_max: usize,
    states: Vec<(u32, u32)>,
}

/// Number of occupation pairs with `n1 + n2 <= n_max`.
pub const fn basis_dim(n_max: usize) -> usize {
    (n_max + 1) * (n_max + 2) / 2
}

impl FockBasis {
    pub fn new(n_max: usize) -> Self {
        let mut states = Vec::with_capacity(basis_dim(n_max));
        for total in 0..=n_max as u32 {
            for n1 in (0..=total).rev() {
                states.push((n1, total - n1));
            }
        }
        FockBasis { n_max, states }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[(u32, u32)] {
        &self.states
    }

    pub fn state(&self, index: usize) -> (u32, u32) {
        self.states[index]
    }

    /// Index of `|n1, n2>`, or `None` if the state lies outside the truncation.
    pub fn index_of(&self, n1: u32, n2: u32) -> Option<usize> {
        let total = (n1 + n2) as usize;
        if total > self.n_max {
            return None;
        }
        Some(total * (total + 1) / 2 + (total - n1 as usize))
    }

    /// Contiguous index range of the `N`-particle block.
    pub fn block_range(&self, total: usize) -> Result<std::ops::Range<usize>> {
        if total > self.n_max {
            return Err(Error::SectorOutOfRange {
                sector: total,
                n_max: self.n_max,
            });
        }
        let start = total * (total + 1) / 2;
        Ok(start..start + total + 1)
    }

    pub fn occupation(&self, index: usize, mode: Mode) -> u32 {
        let (n1, n2) = self.states[index];
        match mode {
            Mode::One => n1,
            Mode::Two => n2,
        }
    }

    pub fn total_number(&self, index: usize) -> u32 {
        let (n1, n2) = self.states[index];
        n1 + n2
    }
}

/// Dense complex matrix over a [`FockBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    mat: Array2<Complex64>,
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Operator {
            mat: Array2::zeros((dim, dim)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim);
        for i in 0..dim {
            op.mat[(i, i)] = Complex64::new(1.0, 0.0);
        }
        op
    }

    pub fn from_matrix(mat: Array2<Complex64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                got: mat.ncols(),
            });
        }
        Ok(Operator { mat })
    }

    /// Annihilation operator of `mode`: `<n1-1,n2| a1 |n1,n2> = sqrt(n1)`.
    ///
    /// States that would leave the truncated space map to zero.
    pub fn annihilation(basis: &FockBasis, mode: Mode) -> Self {
        let mut op = Self::zeros(basis.dim());
        for (col, &(n1, n2)) in basis.states().iter().enumerate() {
            let (amp, target) = match mode {
                Mode::One if n1 > 0 => ((n1 as f64).sqrt(), basis.index_of(n1 - 1, n2)),
                Mode::Two if n2 > 0 => ((n2 as f64).sqrt(), basis.index_of(n1, n2 - 1)),
                _ => continue,
            };
            if let Some(row) = target {
                op.mat[(row, col)] = Complex64::new(amp, 0.0);
            }
        }
        op
    }

    /// Creation operator of `mode` (adjoint of [`Operator::annihilation`]).
    pub fn creation(basis: &FockBasis, mode: Mode) -> Self {
        Self::annihilation(basis, mode).dagger()
    }

    /// Number operator of `mode`: diagonal with entries `n1` (or `n2`).
    pub fn number(basis: &FockBasis, mode: Mode) -> Self {
        let mut op = Self::zeros(basis.dim());
        for (i, _) in basis.states().iter().enumerate() {
            op.mat[(i, i)] = Complex64::new(basis.occupation(i, mode) as f64, 0.0);
        }
        op
    }

    /// Total-number operator `n1 + n2`.
    pub fn total_number(basis: &FockBasis) -> Self {
        let mut op = Self::zeros(basis.dim());
        for i in 0..basis.dim() {
            op.mat[(i, i)] = Complex64::new(basis.total_number(i) as f64, 0.0);
        }
        op
    }

    /// Dimer Hamiltonian in the rotating frame:
    ///
    /// `H = delta (n1 + n2) - (j/2)(a2^ a1 + h.c.) + (u/2) sum n(n-1) + (omega/2)(a1^ + a1)`
    ///
    /// The assembled matrix is exactly Hermitian by construction.
    pub fn hamiltonian(basis: &FockBasis, delta: f64, j: f64, u: f64, omega: f64) -> Self {
        debug_assert!(u >= 0.0, "attractive interactions are not modeled");
        let mut op = Self::zeros(basis.dim());
        for (i, &(n1, n2)) in basis.states().iter().enumerate() {
            let diag = delta * (n1 + n2) as f64
                + 0.5 * u * (n1 * n1.saturating_sub(1) + n2 * n2.saturating_sub(1)) as f64;
            op.mat[(i, i)] = Complex64::new(diag, 0.0);
            // hopping: a2^ a1 |n1,n2> = sqrt(n1 (n2+1)) |n1-1, n2+1>
            if n1 > 0 {
                if let Some(k) = basis.index_of(n1 - 1, n2 + 1) {
                    let amp = -0.5 * j * ((n1 * (n2 + 1)) as f64).sqrt();
                    op.mat[(k, i)] += Complex64::new(amp, 0.0);
                    op.mat[(i, k)] += Complex64::new(amp, 0.0);
                }
            }
            // drive: a1^ |n1,n2> = sqrt(n1+1) |n1+1, n2>, dropped at the truncation edge
            if let Some(k) = basis.index_of(n1 + 1, n2) {
                let amp = 0.5 * omega * ((n1 + 1) as f64).sqrt();
                op.mat[(k, i)] += Complex64::new(amp, 0.0);
                op.mat[(i, k)] += Complex64::new(amp, 0.0);
            }
        }
        op
    }

    /// Single-particle current operator `j = (a2^ a1 - a1^ a2) / 2i`.
    ///
    /// Hermitian, zero on the diagonal, and commutes with the total number.
    pub fn current(basis: &FockBasis) -> Self {
        let mut op = Self::zeros(basis.dim());
        let half_over_i = Complex64::new(0.0, -0.5); // 1/(2i)
        for (i, &(n1, n2)) in basis.states().iter().enumerate() {
            if n1 > 0 {
                if let Some(k) = basis.index_of(n1 - 1, n2 + 1) {
                    let amp = ((n1 * (n2 + 1)) as f64).sqrt();
                    op.mat[(k, i)] += half_over_i * amp;
                    op.mat[(i, k)] += half_over_i.conj() * amp;
                }
            }
        }
        op
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Array2<Complex64> {
        self.mat
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.dim());
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                out.mat[(i, j)] = self.mat[(j, i)].conj();
            }
        }
        out
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut err = 0.0_f64;
        for i in 0..self.dim() {
            for j in i..self.dim() {
                err = err.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        err
    }

    pub fn matmul(&self, other: &Operator) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(Operator {
            mat: self.mat.dot(&other.mat),
        })
    }

    pub fn commutator(&self, other: &Operator) -> Result<Self> {
        let ab = self.matmul(other)?;
        let ba = other.matmul(self)?;
        Ok(Operator { mat: ab.mat - ba.mat })
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Operator {
            mat: self.mat.mapv(|v| v * factor),
        }
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(Operator {
            mat: &self.mat + &other.mat,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn basis_ordering_matches_contract() {
        let basis = FockBasis::new(1);
        assert_eq!(basis.states(), &[(0, 0), (1, 0), (0, 1)]);
        assert_eq!(basis.dim(), 3);

        let basis = FockBasis::new(0);
        assert_eq!(basis.states(), &[(0, 0)]);
        assert_eq!(basis.dim(), 1);

        assert_eq!(FockBasis::new(20).dim(), 231);
    }

    #[test]
    fn basis_blocks_are_contiguous_and_indexed() {
        let basis = FockBasis::new(7);
        assert_eq!(basis.dim(), basis_dim(7));
        for total in 0..=7usize {
            let range = basis.block_range(total).unwrap();
            assert_eq!(range.len(), total + 1);
            for i in range {
                assert_eq!(basis.total_number(i) as usize, total);
            }
        }
        // every pair appears exactly once and the closed-form index agrees
        for (i, &(n1, n2)) in basis.states().iter().enumerate() {
            assert_eq!(basis.index_of(n1, n2), Some(i));
        }
        assert_eq!(basis.index_of(5, 3), None);
        assert!(basis.block_range(8).is_err());
    }

    #[test]
    fn annihilation_elements() {
        let basis = FockBasis::new(2);
        let a1 = Operator::annihilation(&basis, Mode::One);
        let idx = |n1, n2| basis.index_of(n1, n2).unwrap();
        // <0,0| a1 |1,0> = 1
        assert_abs_diff_eq!(a1.matrix()[(idx(0, 0), idx(1, 0))].re, 1.0);
        // <1,0| a1 |2,0> = sqrt(2)
        assert_abs_diff_eq!(a1.matrix()[(idx(1, 0), idx(2, 0))].re, 2.0_f64.sqrt());

        // a2 applied to (n1, 0) states gives zero columns
        let a2 = Operator::annihilation(&basis, Mode::Two);
        for n1 in 0..=2u32 {
            let col = idx(n1, 0);
            for row in 0..basis.dim() {
                assert_eq!(a2.matrix()[(row, col)], Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn mode_index_validation() {
        assert_eq!(Mode::from_index(1).unwrap(), Mode::One);
        assert_eq!(Mode::from_index(2).unwrap(), Mode::Two);
        assert!(Mode::from_index(0).is_err());
        assert!(Mode::from_index(3).is_err());
    }

    #[test]
    fn number_operator_diagonal() {
        let basis = FockBasis::new(2);
        let n1 = Operator::number(&basis, Mode::One);
        let n2 = Operator::number(&basis, Mode::Two);
        let idx = |a, b| basis.index_of(a, b).unwrap();
        assert_abs_diff_eq!(n1.matrix()[(idx(2, 0), idx(2, 0))].re, 2.0);
        assert_abs_diff_eq!(n2.matrix()[(idx(2, 0), idx(2, 0))].re, 0.0);

        // trace(n1 + n2) over the n_max = 1 basis = 2: states (1,0) and (0,1)
        let small = FockBasis::new(1);
        let tot = Operator::total_number(&small);
        let trace: Complex64 = (0..small.dim()).map(|i| tot.matrix()[(i, i)]).sum();
        assert_abs_diff_eq!(trace.re, 2.0);
    }

    #[test]
    fn commutator_holds_away_from_truncation_edge() {
        let basis = FockBasis::new(5);
        let a1 = Operator::annihilation(&basis, Mode::One);
        let comm = a1
            .matmul(&a1.dagger())
            .unwrap()
            .add(&a1.dagger().matmul(&a1).unwrap().scaled((-1.0).into()))
            .unwrap();
        // [a1, a1^] acts as the identity on every state with n1 + n2 <= n_max - 1
        for (i, _) in basis.states().iter().enumerate() {
            if (basis.total_number(i) as usize) < basis.n_max() {
                assert_abs_diff_eq!(comm.matrix()[(i, i)].re, 1.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn hamiltonian_single_particle_block_is_pure_hopping() {
        let j = 0.7;
        let basis = FockBasis::new(3);
        let h = Operator::hamiltonian(&basis, 0.0, j, 0.0, 0.0);
        let block = basis.block_range(1).unwrap();
        let i10 = block.start;
        let i01 = block.start + 1;
        assert_abs_diff_eq!(h.matrix()[(i10, i10)].re, 0.0);
        assert_abs_diff_eq!(h.matrix()[(i10, i01)].re, -j / 2.0);
        assert_abs_diff_eq!(h.matrix()[(i01, i10)].re, -j / 2.0);
        assert_abs_diff_eq!(h.matrix()[(i01, i01)].re, 0.0);
    }

    #[test]
    fn hamiltonian_diagonal_term() {
        // <2,0| H |2,0> = 2*delta + (u/2) * 2 * 1 with delta = 1.5, u = 0.25
        let basis = FockBasis::new(4);
        let h = Operator::hamiltonian(&basis, 1.5, 0.33, 0.25, 0.77);
        let i = basis.index_of(2, 0).unwrap();
        assert_abs_diff_eq!(h.matrix()[(i, i)].re, 3.25, epsilon = 1e-14);
        assert_abs_diff_eq!(h.matrix()[(i, i)].im, 0.0);
    }

    #[test]
    fn hamiltonian_blocks_decouple_without_drive() {
        let basis = FockBasis::new(4);
        let h = Operator::hamiltonian(&basis, 0.4, 0.5, 0.25, 0.0);
        for i in 0..basis.dim() {
            for j in 0..basis.dim() {
                if basis.total_number(i) != basis.total_number(j) {
                    assert_eq!(h.matrix()[(i, j)], Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn current_operator_structure() {
        let basis = FockBasis::new(3);
        let j_op = Operator::current(&basis);
        assert!(j_op.hermiticity_error() < 1e-15);
        // zero diagonal
        for i in 0..basis.dim() {
            assert_eq!(j_op.matrix()[(i, i)], Complex64::new(0.0, 0.0));
        }
        // N = 1 block: [[0, i/2], [-i/2, 0]] in the (1,0), (0,1) ordering
        let b = basis.block_range(1).unwrap();
        let elem = j_op.matrix()[(b.start, b.start + 1)];
        assert_abs_diff_eq!(elem.norm(), 0.5, epsilon = 1e-15);
        // commutes with the total number
        let n_tot = Operator::total_number(&basis);
        let comm = j_op.commutator(&n_tot).unwrap();
        assert!(comm.max_abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn hamiltonian_is_exactly_hermitian(
            delta in -3.0..3.0f64,
            j in 0.0..2.0f64,
            u in 0.0..1.0f64,
            omega in 0.0..2.0f64,
        ) {
            let basis = FockBasis::new(6);
            let h = Operator::hamiltonian(&basis, delta, j, u, omega);
            prop_assert_eq!(h.hermiticity_error(), 0.0);
        }
    }
}
