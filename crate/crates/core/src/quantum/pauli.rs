//! Pauli strings applied matrix-free to statevectors.
//!
//! Qubit `q` is bit `q` of a basis-state index, so qubit 0 is the rightmost
//! character when a basis state is written as a bitstring.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Tensor product of single-qubit Paulis; identity on every qubit not listed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    ops: Vec<(usize, Pauli)>,
    flip_mask: usize,
    sign_mask: usize,
    n_y: usize,
}

impl PauliString {
    pub fn new(n_qubits: usize, ops: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        let mut ops: Vec<(usize, Pauli)> = ops.into_iter().collect();
        ops.sort_unstable();
        for w in ops.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidArgument(format!(
                    "qubit {} appears twice in a Pauli string",
                    w[0].0
                )));
            }
        }
        let (mut flip_mask, mut sign_mask, mut n_y) = (0usize, 0usize, 0usize);
        for &(q, p) in &ops {
            if q >= n_qubits {
                return Err(Error::InvalidArgument(format!(
                    "qubit index {q} out of range for {n_qubits} qubits"
                )));
            }
            match p {
                Pauli::X => flip_mask |= 1 << q,
                Pauli::Y => {
                    flip_mask |= 1 << q;
                    sign_mask |= 1 << q;
                    n_y += 1;
                }
                Pauli::Z => sign_mask |= 1 << q,
            }
        }
        Ok(Self {
            n_qubits,
            ops,
            flip_mask,
            sign_mask,
            n_y,
        })
    }

    /// Two-qubit string `P_i Q_j`.
    pub fn pair(n_qubits: usize, i: usize, p: Pauli, j: usize, q: Pauli) -> Result<Self> {
        Self::new(n_qubits, [(i, p), (j, q)])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[(usize, Pauli)] {
        &self.ops
    }

    pub fn is_diagonal(&self) -> bool {
        self.flip_mask == 0
    }

    /// `i^{n_Y}`, the phase contributed by the `Y` factors.
    fn y_phase(&self) -> Complex64 {
        match self.n_y % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    fn check(&self, s: &StateVector) -> Result<()> {
        if s.n_qubits() != self.n_qubits {
            return Err(Error::Shape(format!(
                "Pauli string on {} qubits applied to a {}-qubit state",
                self.n_qubits,
                s.n_qubits()
            )));
        }
        Ok(())
    }

    /// `out += coeff * P |psi>`.
    pub fn apply_into(&self, psi: &[Complex64], coeff: Complex64, out: &mut [Complex64]) {
        let c = coeff * self.y_phase();
        let (f, m) = (self.flip_mask, self.sign_mask);
        for (x, &a) in psi.iter().enumerate() {
            let v = c * a;
            out[x ^ f] += if (x & m).count_ones() & 1 == 1 { -v } else { v };
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ops.is_empty() {
            return write!(f, "I");
        }
        for &(q, p) in self.ops.iter().rev() {
            write!(f, "{p:?}{q}")?;
        }
        Ok(())
    }
}

/// Returns `coeff * P |psi>` without building any dense operator.
pub fn apply_pauli_string(s: &StateVector, ps: &PauliString, coeff: Complex64) -> Result<StateVector> {
    ps.check(s)?;
    let mut out = vec![Complex64::new(0.0, 0.0); s.dim()];
    ps.apply_into(s.amplitudes(), coeff, &mut out);
    Ok(StateVector::from_amplitudes_unchecked(s.n_qubits(), out))
}

/// Imaginary residues above this indicate a non-Hermitian input or a broken state.
pub const IMAG_TOL: f64 = 1e-12;

/// `<psi| P |psi>` as a real number.
pub fn expectation(s: &StateVector, ps: &PauliString) -> Result<f64> {
    ps.check(s)?;
    let psi = s.amplitudes();
    let (f, m) = (ps.flip_mask, ps.sign_mask);
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, &a) in psi.iter().enumerate() {
        let v = psi[x ^ f].conj() * a;
        if (x & m).count_ones() & 1 == 1 {
            acc -= v;
        } else {
            acc += v;
        }
    }
    let value = acc * ps.y_phase();
    if value.im.abs() > IMAG_TOL {
        return Err(Error::Numerical(format!(
            "expectation of {ps} has imaginary part {:e}",
            value.im
        )));
    }
    Ok(value.re)
}
