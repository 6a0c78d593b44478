//! Lindblad generator and fixed-step time integration of the density matrix.
//!
//! The master equation is
//!
//! `dR/dt = -i[H, R] - (gamma/2)(a2^ a2 R - 2 a2 R a2^ + R a2^ a2)`
//!
//! with decay acting on mode 2 only. The integrator is classical fixed-step
//! RK4; the Hamiltonian is split into a static part and the time-dependent
//! detuning term `delta(t) * (n1 + n2)`, which is diagonal, so no operator is
//! rebuilt inside a step.

use ndarray::Array2;
use num_complex::Complex64;

use crate::fock::{FockBasis, Mode, Operator};
use crate::linalg;
use crate::{Error, Result};

/// Hermitian, trace-one, positive-semidefinite matrix over the Fock basis.
///
/// Positivity is monitored during evolution rather than enforced; see
/// [`DensityMatrix::certify_min_eigenvalue`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: Array2<Complex64>,
}

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-9;
pub const POSITIVITY_FLOOR: f64 = -1e-8;

impl DensityMatrix {
    /// `|0,0><0,0|` in a basis of the given dimension.
    pub fn vacuum(dim: usize) -> Self {
        let mut mat = Array2::zeros((dim, dim));
        mat[(0, 0)] = Complex64::new(1.0, 0.0);
        DensityMatrix { mat }
    }

    /// Projector onto the Fock state `|n1, n2>`.
    pub fn fock_state(basis: &FockBasis, n1: u32, n2: u32) -> Result<Self> {
        let index = basis.index_of(n1, n2).ok_or(Error::SectorOutOfRange {
            sector: (n1 + n2) as usize,
            n_max: basis.n_max(),
        })?;
        let mut mat = Array2::zeros((basis.dim(), basis.dim()));
        mat[(index, index)] = Complex64::new(1.0, 0.0);
        Ok(DensityMatrix { mat })
    }

    /// Projector onto a pure state; the ket is normalized first.
    pub fn from_pure(ket: &[Complex64]) -> Result<Self> {
        let norm_sqr: f64 = ket.iter().map(|v| v.norm_sqr()).sum();
        if norm_sqr <= 0.0 || !norm_sqr.is_finite() {
            return Err(Error::InvalidState("pure state has zero or non-finite norm".into()));
        }
        let dim = ket.len();
        let mut mat = Array2::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                mat[(i, j)] = ket[i] * ket[j].conj() / norm_sqr;
            }
        }
        Ok(DensityMatrix { mat })
    }

    /// Validates Hermiticity and unit trace. Positivity is not checked here
    /// because it costs a factorization; call `certify_min_eigenvalue` when
    /// needed.
    pub fn from_matrix(mat: Array2<Complex64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                got: mat.ncols(),
            });
        }
        let dm = DensityMatrix { mat };
        if !dm.mat.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite("density matrix"));
        }
        let herm = dm.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "Hermiticity residue {herm:.3e} exceeds {HERMITICITY_TOL:.0e}"
            )));
        }
        let trace = dm.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "trace {trace} deviates from 1 by more than {TRACE_TOL:.0e}"
            )));
        }
        Ok(dm)
    }

    pub fn from_matrix_unchecked(mat: Array2<Complex64>) -> Self {
        DensityMatrix { mat }
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

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).sum()
    }

    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|v| v.norm_sqr()).sum()
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

    /// `R <- (R + R^)/2`.
    pub fn resymmetrize(&mut self) {
        let dim = self.dim();
        resymmetrize_slice(self.mat.as_slice_mut().expect("contiguous"), dim);
    }

    /// True iff every eigenvalue is `> floor`, certified by an attempted
    /// Cholesky factorization of `R - floor*I`.
    pub fn certify_min_eigenvalue(&self, floor: f64) -> bool {
        linalg::cholesky_in_shift(&self.mat, -floor)
    }

    /// Smallest eigenvalue, exact to `tol` (bisection on Cholesky breakdown).
    pub fn min_eigenvalue(&self, tol: f64) -> f64 {
        linalg::min_eigenvalue(&self.mat, tol)
    }
}

/// Total population in the `top_shells` highest-N blocks: the truncation
/// quality monitor.
pub fn leakage(r: &DensityMatrix, basis: &FockBasis, top_shells: usize) -> f64 {
    let top_shells = top_shells.min(basis.n_max() + 1);
    let mut total = 0.0;
    for shell in 0..top_shells {
        let range = basis
            .block_range(basis.n_max() - shell)
            .expect("shell within basis");
        total += range.map(|i| r.matrix()[(i, i)].re).sum::<f64>();
    }
    total
}

/// Reference right-hand side of the master equation, written directly as
/// matrix algebra. The fast structured path in [`LindbladGenerator`] is
/// checked against this in tests.
pub fn lindblad_rhs(r: &DensityMatrix, h: &Operator, a2: &Operator, gamma: f64) -> Result<Array2<Complex64>> {
    if h.dim() != r.dim() || a2.dim() != r.dim() {
        return Err(Error::DimensionMismatch {
            expected: r.dim(),
            got: h.dim().max(a2.dim()),
        });
    }
    let minus_i = Complex64::new(0.0, -1.0);
    let rm = r.matrix();
    let hm = h.matrix();
    let a = a2.matrix();
    let ad = a2.dagger().into_matrix();
    let ada = ad.dot(a);
    let comm = hm.dot(rm) - rm.dot(hm);
    let diss = ada.dot(rm) + rm.dot(&ada) - a.dot(rm).dot(&ad).mapv(|v| v * 2.0);
    Ok(comm.mapv(|v| v * minus_i) - diss.mapv(|v| v * Complex64::new(0.5 * gamma, 0.0)))
}

/// Precomputed structured tables for the master-equation right-hand side at
/// fixed `(j, u, omega, gamma)`; the detuning is supplied per evaluation.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    dim: usize,
    gamma: f64,
    /// interaction part of the diagonal, `(u/2) sum n(n-1)`
    diag_h0: Vec<f64>,
    /// total particle number per basis state (multiplies `delta`)
    n_tot: Vec<f64>,
    /// hopping + drive entries of H (all real), CSR over rows
    off_ptr: Vec<u32>,
    off_col: Vec<u32>,
    off_val: Vec<f64>,
    /// mode-2 occupation per state
    n2: Vec<f64>,
    /// index of (n1, n2+1), or usize::MAX at the truncation edge
    up2: Vec<usize>,
    /// sqrt(n2 + 1) where `up2` is valid
    up2_amp: Vec<f64>,
}

impl LindbladGenerator {
    pub fn new(basis: &FockBasis, j: f64, u: f64, omega: f64, gamma: f64) -> Result<Self> {
        if gamma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "relaxation rate gamma must be non-negative, got {gamma}"
            )));
        }
        let dim = basis.dim();
        let mut diag_h0 = Vec::with_capacity(dim);
        let mut n_tot = Vec::with_capacity(dim);
        let mut n2v = Vec::with_capacity(dim);
        let mut up2 = Vec::with_capacity(dim);
        let mut up2_amp = Vec::with_capacity(dim);
        let mut off_ptr = Vec::with_capacity(dim + 1);
        let mut off_col = Vec::new();
        let mut off_val = Vec::new();

        off_ptr.push(0u32);
        for &(n1, n2) in basis.states().iter() {
            diag_h0.push(0.5 * u * (n1 * n1.saturating_sub(1) + n2 * n2.saturating_sub(1)) as f64);
            n_tot.push((n1 + n2) as f64);
            n2v.push(n2 as f64);
            match basis.index_of(n1, n2 + 1) {
                Some(k) => {
                    up2.push(k);
                    up2_amp.push(((n2 + 1) as f64).sqrt());
                }
                None => {
                    up2.push(usize::MAX);
                    up2_amp.push(0.0);
                }
            }
            // row i of the off-diagonal part of H: hopping and drive partners
            let mut push = |k: usize, v: f64| {
                off_col.push(k as u32);
                off_val.push(v);
            };
            if n1 > 0 {
                if let Some(k) = basis.index_of(n1 - 1, n2 + 1) {
                    push(k, -0.5 * j * ((n1 * (n2 + 1)) as f64).sqrt());
                }
            }
            if n2 > 0 {
                if let Some(k) = basis.index_of(n1 + 1, n2 - 1) {
                    push(k, -0.5 * j * (((n1 + 1) * n2) as f64).sqrt());
                }
            }
            if omega != 0.0 {
                if let Some(k) = basis.index_of(n1 + 1, n2) {
                    push(k, 0.5 * omega * ((n1 + 1) as f64).sqrt());
                }
                if n1 > 0 {
                    if let Some(k) = basis.index_of(n1 - 1, n2) {
                        push(k, 0.5 * omega * (n1 as f64).sqrt());
                    }
                }
            }
            off_ptr.push(off_col.len() as u32);
        }

        Ok(LindbladGenerator {
            dim,
            gamma,
            diag_h0,
            n_tot,
            off_ptr,
            off_col,
            off_val,
            n2: n2v,
            up2,
            up2_amp,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Dense right-hand side at detuning `delta`; allocates.
    pub fn rhs_matrix(&self, delta: f64, r: &Array2<Complex64>) -> Result<Array2<Complex64>> {
        if r.nrows() != self.dim || r.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: r.nrows(),
            });
        }
        let mut out = Array2::zeros((self.dim, self.dim));
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.dim * self.dim];
        self.rhs_into(
            delta,
            r.as_slice().expect("contiguous"),
            &mut scratch,
            out.as_slice_mut().expect("contiguous"),
        );
        Ok(out)
    }

    /// Core evaluation on flat row-major slices.
    ///
    /// The commutator is assembled as `-i(P - P^)` with `P = H R`, which is
    /// exactly Hermitian whenever `r` is, so Hermiticity cannot drift between
    /// re-symmetrization points.
    fn rhs_into(&self, delta: f64, r: &[Complex64], scratch: &mut [Complex64], out: &mut [Complex64]) {
        let d = self.dim;
        // P = H R
        for i in 0..d {
            let diag = self.diag_h0[i] + delta * self.n_tot[i];
            let row_r = &r[i * d..(i + 1) * d];
            let row_p = &mut scratch[i * d..(i + 1) * d];
            for (p, rv) in row_p.iter_mut().zip(row_r) {
                *p = Complex64::new(diag * rv.re, diag * rv.im);
            }
            let lo = self.off_ptr[i] as usize;
            let hi = self.off_ptr[i + 1] as usize;
            for e in lo..hi {
                let k = self.off_col[e] as usize;
                let v = self.off_val[e];
                let row_k = &r[k * d..(k + 1) * d];
                for (p, rv) in row_p.iter_mut().zip(row_k) {
                    p.re += v * rv.re;
                    p.im += v * rv.im;
                }
            }
        }
        // out = -i (P - P^) + dissipator
        let half_gamma = 0.5 * self.gamma;
        for i in 0..d {
            let ni = self.n2[i];
            let ui = self.up2[i];
            let ai = self.up2_amp[i];
            for j in 0..d {
                let p_ij = scratch[i * d + j];
                let p_ji = scratch[j * d + i];
                // -i * (p_ij - conj(p_ji))
                let mut val = Complex64::new(p_ij.im + p_ji.im, p_ji.re - p_ij.re);
                if self.gamma != 0.0 {
                    let rv = r[i * d + j];
                    let decay = half_gamma * (ni + self.n2[j]);
                    val.re -= decay * rv.re;
                    val.im -= decay * rv.im;
                    let uj = self.up2[j];
                    if ui != usize::MAX && uj != usize::MAX {
                        let gain = self.gamma * ai * self.up2_amp[j];
                        let rup = r[ui * d + uj];
                        val.re += gain * rup.re;
                        val.im += gain * rup.im;
                    }
                }
                out[i * d + j] = val;
            }
        }
    }
}

fn resymmetrize_slice(m: &mut [Complex64], d: usize) {
    for i in 0..d {
        m[i * d + i] = Complex64::new(m[i * d + i].re, 0.0);
        for j in i + 1..d {
            let a = m[i * d + j];
            let b = m[j * d + i];
            let avg = Complex64::new(0.5 * (a.re + b.re), 0.5 * (a.im - b.im));
            m[i * d + j] = avg;
            m[j * d + i] = avg.conj();
        }
    }
}

/// Affine detuning over one schedule segment.
#[derive(Debug, Clone, Copy)]
pub struct DeltaRamp {
    pub t_start: f64,
    pub duration: f64,
    pub delta_start: f64,
    pub delta_end: f64,
}

impl DeltaRamp {
    pub fn constant(t_start: f64, duration: f64, delta: f64) -> Self {
        DeltaRamp {
            t_start,
            duration,
            delta_start: delta,
            delta_end: delta,
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        if self.duration == 0.0 {
            return self.delta_start;
        }
        let frac = ((t - self.t_start) / self.duration).clamp(0.0, 1.0);
        self.delta_start + (self.delta_end - self.delta_start) * frac
    }
}

/// Per-run integration controls.
#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub dt: f64,
    /// steps between stored samples
    pub sample_every: usize,
    /// abort when |trace - 1| exceeds this
    pub trace_tol: f64,
}

impl EvolveOptions {
    pub fn new(dt: f64, sample_every: usize) -> Self {
        EvolveOptions {
            dt,
            sample_every: sample_every.max(1),
            trace_tol: 1e-6,
        }
    }
}

/// Summary of one integration segment.
#[derive(Debug, Clone, Copy, Default)]
pub struct EvolveReport {
    pub steps: usize,
    pub samples: usize,
    pub max_trace_err: f64,
}

/// Integrates one segment with fixed-step RK4, invoking `sampler` at the
/// initial time, every `sample_every` steps, and at the segment end.
///
/// The state is re-symmetrized after every step. Trace drift beyond
/// `opts.trace_tol` or any non-finite entry aborts with a diagnostic.
pub fn evolve_segment<F>(
    r: &mut DensityMatrix,
    generator: &LindbladGenerator,
    ramp: DeltaRamp,
    opts: EvolveOptions,
    sampler: &mut F,
) -> Result<EvolveReport>
where
    F: FnMut(f64, &DensityMatrix) -> Result<()>,
{
    if opts.dt <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "time step must be positive, got {}",
            opts.dt
        )));
    }
    if ramp.duration < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "segment duration must be non-negative, got {}",
            ramp.duration
        )));
    }
    if generator.dim() != r.dim() {
        return Err(Error::DimensionMismatch {
            expected: generator.dim(),
            got: r.dim(),
        });
    }

    let d = generator.dim();
    let n = d * d;
    let mut k = vec![Complex64::new(0.0, 0.0); n];
    let mut ytmp = vec![Complex64::new(0.0, 0.0); n];
    let mut acc = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];

    // whole steps, plus one shortened step if the duration is not a multiple
    let steps_exact = ramp.duration / opts.dt;
    let mut whole = steps_exact.floor() as usize;
    let mut tail = ramp.duration - whole as f64 * opts.dt;
    if tail < 1e-9 * opts.dt.max(1.0) {
        tail = 0.0;
    } else if (opts.dt - tail).abs() < 1e-9 * opts.dt {
        whole += 1;
        tail = 0.0;
    }

    let mut report = EvolveReport::default();
    let mut check_and_sample = |t: f64, r: &DensityMatrix, report: &mut EvolveReport| -> Result<()> {
        let trace = r.trace();
        if !trace.is_finite() {
            return Err(Error::NonFinite("density matrix trace"));
        }
        let err = (trace - 1.0).abs();
        report.max_trace_err = report.max_trace_err.max(err);
        if err > opts.trace_tol {
            return Err(Error::TraceDrift {
                trace,
                t,
                tol: opts.trace_tol,
            });
        }
        report.samples += 1;
        sampler(t, r)
    };

    check_and_sample(ramp.t_start, r, &mut report)?;

    let total_steps = whole + usize::from(tail > 0.0);
    for step in 0..total_steps {
        let h = if step < whole { opts.dt } else { tail };
        let t = ramp.t_start + step as f64 * opts.dt;
        rk4_step(generator, &ramp, t, h, r, &mut k, &mut ytmp, &mut acc, &mut scratch);
        report.steps += 1;

        let t_next = if step + 1 == total_steps {
            ramp.t_start + ramp.duration
        } else {
            t + h
        };
        if (step + 1) % opts.sample_every == 0 || step + 1 == total_steps {
            check_and_sample(t_next, r, &mut report)?;
        }
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn rk4_step(
    generator: &LindbladGenerator,
    ramp: &DeltaRamp,
    t: f64,
    h: f64,
    r: &mut DensityMatrix,
    k: &mut [Complex64],
    ytmp: &mut [Complex64],
    acc: &mut [Complex64],
    scratch: &mut [Complex64],
) {
    let state = r.mat.as_slice_mut().expect("contiguous");
    let d = generator.dim();

    // k1
    generator.rhs_into(ramp.at(t), state, scratch, k);
    for i in 0..state.len() {
        acc[i] = state[i] + k[i] * (h / 6.0);
        ytmp[i] = state[i] + k[i] * (h / 2.0);
    }
    // k2
    generator.rhs_into(ramp.at(t + 0.5 * h), ytmp, scratch, k);
    for i in 0..state.len() {
        acc[i] += k[i] * (h / 3.0);
        ytmp[i] = state[i] + k[i] * (h / 2.0);
    }
    // k3
    generator.rhs_into(ramp.at(t + 0.5 * h), ytmp, scratch, k);
    for i in 0..state.len() {
        acc[i] += k[i] * (h / 3.0);
        ytmp[i] = state[i] + k[i] * h;
    }
    // k4
    generator.rhs_into(ramp.at(t + h), ytmp, scratch, k);
    for i in 0..state.len() {
        state[i] = acc[i] + k[i] * (h / 6.0);
    }
    resymmetrize_slice(state, d);
}
