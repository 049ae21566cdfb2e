//! Time evolution: exact single-qubit mixing rotations, exact diagonal Ising
//! phases, and a Krylov (Lanczos) exponential for non-diagonal Hamiltonians.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::hamiltonian::{ising_energies, GraphHamiltonian, HamiltonianKind};
use crate::quantum::state::StateVector;

/// Registers up to this size fall back to a dense eigendecomposition when
/// the Krylov iteration fails.
pub const DENSE_FALLBACK_MAX_QUBITS: usize = 10;

#[derive(Debug, Clone, Copy)]
pub struct LanczosConfig {
    /// Target for the a-posteriori error estimate of each substep.
    pub tol: f64,
    /// Largest Krylov subspace before a substep is split in two.
    pub max_dim: usize,
    /// How many times a substep may be halved before giving up.
    pub max_halvings: usize,
    /// Substeps are chosen so that `||H|| * dt` stays below this.
    pub max_phase_per_step: f64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_dim: 48,
            max_halvings: 20,
            max_phase_per_step: 12.0,
        }
    }
}

/// Applies `exp(-i theta X)` to every qubit.
pub fn evolve_mixing(s: &StateVector, theta: f64) -> StateVector {
    let mut out = s.clone();
    evolve_mixing_in_place(&mut out, theta);
    out
}

pub fn evolve_mixing_in_place(s: &mut StateVector, theta: f64) {
    if theta == 0.0 {
        return;
    }
    let (c, sn) = (theta.cos(), theta.sin());
    let n = s.n_qubits();
    let amps = s.amplitudes_mut();
    // low qubits on cache-sized tiles, the rest with one sweep each
    let t = n.min(TILE_BITS);
    for tile in amps.chunks_exact_mut(1 << t) {
        for q in 0..t {
            rotate_x(tile, q, c, sn);
        }
    }
    for q in t..n {
        rotate_x(amps, q, c, sn);
    }
}

const TILE_BITS: usize = 13;

fn rotate_x(amps: &mut [Complex64], q: usize, c: f64, sn: f64) {
    let stride = 1usize << q;
    for block in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            // cos(theta) a - i sin(theta) b, written out in reals
            let (x0r, x0i, x1r, x1i) = (a0.re, a0.im, a1.re, a1.im);
            *a0 = Complex64::new(c * x0r + sn * x1i, c * x0i - sn * x1r);
            *a1 = Complex64::new(c * x1r + sn * x0i, c * x1i - sn * x0r);
        }
    }
}

/// `exp(-i H t) |psi>` with the default Krylov settings.
pub fn evolve_graph(s: &StateVector, h: &GraphHamiltonian, t: f64) -> Result<StateVector> {
    evolve_graph_with(s, h, t, &LanczosConfig::default())
}

pub fn evolve_graph_with(
    s: &StateVector,
    h: &GraphHamiltonian,
    t: f64,
    cfg: &LanczosConfig,
) -> Result<StateVector> {
    if s.n_qubits() != h.n_qubits() {
        return Err(Error::Shape(format!(
            "{}-qubit Hamiltonian applied to a {}-qubit state",
            h.n_qubits(),
            s.n_qubits()
        )));
    }
    if !t.is_finite() {
        return Err(Error::Numerical(format!("non-finite evolution time {t}")));
    }
    if t == 0.0 || h.terms().is_empty() {
        return Ok(s.clone());
    }
    if let HamiltonianKind::Ising = h.kind() {
        let mut out = s.clone();
        apply_diagonal_phases(&mut out, h.ising_diagonal(), h.edges().len() as i32, t);
        return Ok(out);
    }
    match krylov_evolve(s, h, t, cfg) {
        Ok(out) => Ok(out),
        Err(e) if s.n_qubits() <= DENSE_FALLBACK_MAX_QUBITS => {
            log::warn!("{e}; falling back to dense eigendecomposition");
            dense_evolve(s, h, t)
        }
        Err(e) => Err(e),
    }
}

/// Multiplies each amplitude by `exp(-i t E(x))` with `E` the Ising energy.
pub fn apply_ising_phases(s: &mut StateVector, edges: &[(usize, usize)], t: f64) {
    let energies = ising_energies(s.n_qubits(), edges);
    apply_diagonal_phases(s, &energies, edges.len() as i32, t);
}

/// Same, with the energies (integers in `-m..=m`) already tabulated.
fn apply_diagonal_phases(s: &mut StateVector, energies: &[i32], m: i32, t: f64) {
    // E only takes values -m, -m+2, ..., m
    let phases: Vec<Complex64> = (0..=m)
        .map(|k| {
            let e = (m - 2 * k) as f64;
            Complex64::from_polar(1.0, -t * e)
        })
        .collect();
    for (a, &e) in s.amplitudes_mut().iter_mut().zip(energies) {
        *a *= phases[((m - e) / 2) as usize];
    }
}

fn krylov_evolve(
    s: &StateVector,
    h: &GraphHamiltonian,
    t: f64,
    cfg: &LanczosConfig,
) -> Result<StateVector> {
    let n_sub = ((t.abs() * h.norm_bound()) / cfg.max_phase_per_step).ceil().max(1.0) as usize;
    let dt = t / n_sub as f64;
    let mut v = s.amplitudes().to_vec();
    for _ in 0..n_sub {
        v = advance(h, &v, dt, cfg, 0)?;
    }
    Ok(StateVector::from_amplitudes_unchecked(s.n_qubits(), v))
}

fn advance(
    h: &GraphHamiltonian,
    v: &[Complex64],
    dt: f64,
    cfg: &LanczosConfig,
    depth: usize,
) -> Result<Vec<Complex64>> {
    if let Some(out) = lanczos_step(h, v, dt, cfg) {
        return Ok(out);
    }
    if depth >= cfg.max_halvings {
        return Err(Error::Numerical(format!(
            "Lanczos exponential did not reach tolerance {:e} with dimension {} after {depth} halvings",
            cfg.tol, cfg.max_dim
        )));
    }
    let half = advance(h, v, dt / 2.0, cfg, depth + 1)?;
    advance(h, &half, dt / 2.0, cfg, depth + 1)
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// One Krylov step `exp(-i H dt) v`, or `None` if `max_dim` was not enough.
fn lanczos_step(
    h: &GraphHamiltonian,
    v: &[Complex64],
    dt: f64,
    cfg: &LanczosConfig,
) -> Option<Vec<Complex64>> {
    let dim = v.len();
    let beta0 = norm(v);
    if beta0 == 0.0 {
        return Some(v.to_vec());
    }
    let max_dim = cfg.max_dim.min(dim);
    let mut basis: Vec<Vec<Complex64>> = vec![v.iter().map(|a| a / beta0).collect()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![Complex64::new(0.0, 0.0); dim];

    for m in 1..=max_dim {
        h.apply(&basis[m - 1], &mut w);
        let alpha = dot(&basis[m - 1], &w).re;
        for (x, b) in w.iter_mut().zip(&basis[m - 1]) {
            *x -= b * alpha;
        }
        if m > 1 {
            let b_prev = betas[m - 2];
            for (x, b) in w.iter_mut().zip(&basis[m - 2]) {
                *x -= b * b_prev;
            }
        }
        // full reorthogonalization keeps the basis orthonormal to machine precision
        for b in &basis {
            let c = dot(b, &w);
            for (x, y) in w.iter_mut().zip(b) {
                *x -= y * c;
            }
        }
        alphas.push(alpha);
        let beta = norm(&w);
        let y = tridiagonal_exp(&alphas, &betas, dt);
        let err = beta * y[m - 1].norm();
        if beta <= 1e-13 || err <= cfg.tol || m == dim {
            let mut out = vec![Complex64::new(0.0, 0.0); dim];
            for (coef, b) in y.iter().zip(&basis) {
                let c = coef * beta0;
                for (o, x) in out.iter_mut().zip(b) {
                    *o += x * c;
                }
            }
            return Some(out);
        }
        betas.push(beta);
        basis.push(w.iter().map(|a| a / beta).collect());
    }
    None
}

/// `exp(-i dt T) e_1` for the symmetric tridiagonal `T`.
fn tridiagonal_exp(alphas: &[f64], betas: &[f64], dt: f64) -> Vec<Complex64> {
    let m = alphas.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for k in 0..m {
        t[(k, k)] = alphas[k];
        if k + 1 < m {
            t[(k, k + 1)] = betas[k];
            t[(k + 1, k)] = betas[k];
        }
    }
    let eig = SymmetricEigen::new(t);
    let q = &eig.eigenvectors;
    (0..m)
        .map(|r| {
            (0..m)
                .map(|c| {
                    Complex64::from_polar(1.0, -dt * eig.eigenvalues[c]) * (q[(r, c)] * q[(0, c)])
                })
                .sum()
        })
        .collect()
}

/// Dense Hermitian matrix of `h`, built column by column from the
/// matrix-free kernel.
pub fn dense_matrix(h: &GraphHamiltonian) -> DMatrix<Complex64> {
    let dim = 1usize << h.n_qubits();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    let mut e = vec![Complex64::new(0.0, 0.0); dim];
    let mut col = vec![Complex64::new(0.0, 0.0); dim];
    for c in 0..dim {
        e[c] = Complex64::new(1.0, 0.0);
        h.apply(&e, &mut col);
        m.set_column(c, &DVector::from_column_slice(&col));
        e[c] = Complex64::new(0.0, 0.0);
    }
    m
}

fn dense_evolve(s: &StateVector, h: &GraphHamiltonian, t: f64) -> Result<StateVector> {
    let eig = SymmetricEigen::new(dense_matrix(h));
    let q = &eig.eigenvectors;
    let psi = DVector::from_column_slice(s.amplitudes());
    let mut coeffs = q.adjoint() * psi;
    for (c, &lambda) in coeffs.iter_mut().zip(eig.eigenvalues.iter()) {
        *c *= Complex64::from_polar(1.0, -t * lambda);
    }
    let out = q * coeffs;
    Ok(StateVector::from_amplitudes_unchecked(
        s.n_qubits(),
        out.iter().copied().collect(),
    ))
}
