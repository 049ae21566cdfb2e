use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Largest register the simulator will allocate (256 MiB of amplitudes).
pub const MAX_QUBITS: usize = 24;

/// Allowed deviation of `<psi|psi>` from one.
pub const NORM_TOL: f64 = 1e-10;

/// `2^N` complex amplitudes of an `N`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

pub(crate) fn check_size(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(Error::TooManyQubits { n, cap: MAX_QUBITS });
    }
    Ok(())
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_size(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Validates length and normalization.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_size(n_qubits)?;
        if amps.len() != 1 << n_qubits {
            return Err(Error::Shape(format!(
                "{} amplitudes for {n_qubits} qubits",
                amps.len()
            )));
        }
        let s = Self { n_qubits, amps };
        let drift = (s.norm_sqr() - 1.0).abs();
        if drift > NORM_TOL {
            return Err(Error::Numerical(format!("state norm deviates from 1 by {drift:e}")));
        }
        Ok(s)
    }

    pub(crate) fn from_amplitudes_unchecked(n_qubits: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n_qubits);
        Self { n_qubits, amps }
    }

    /// Haar-like random state from normally distributed amplitudes.
    pub fn random(n_qubits: usize, rng: &mut impl Rng) -> Result<Self> {
        check_size(n_qubits)?;
        let mut amps: Vec<Complex64> = (0..1usize << n_qubits)
            .map(|_| Complex64::new(gaussian(rng), gaussian(rng)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }

    /// Moves qubit `q` to position `perm[q]`.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<StateVector> {
        crate::graph::check_permutation(perm, self.n_qubits)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (x, &a) in self.amps.iter().enumerate() {
            let mut y = 0;
            for (q, &p) in perm.iter().enumerate() {
                y |= ((x >> q) & 1) << p;
            }
            out[y] = a;
        }
        Ok(Self::from_amplitudes_unchecked(self.n_qubits, out))
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Formats basis index `x` as an `n`-character bitstring, qubit 0 rightmost.
pub fn bitstring(x: usize, n: usize) -> String {
    (0..n)
        .rev()
        .map(|q| if (x >> q) & 1 == 1 { '1' } else { '0' })
        .collect()
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Draws `shots` i.i.d. computational-basis samples from `|a_x|^2`.
///
/// Keys of the returned map are basis indices.
pub fn sample_counts(
    s: &StateVector,
    shots: usize,
    seed: u64,
) -> Result<std::collections::BTreeMap<usize, usize>> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let mut cumulative = Vec::with_capacity(s.dim());
    let mut acc = 0.0;
    for a in s.amplitudes() {
        acc += a.norm_sqr();
        cumulative.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = std::collections::BTreeMap::new();
    for _ in 0..shots {
        let u = rng.random::<f64>() * total;
        // first index whose cumulative mass exceeds u; zero-probability
        // entries share their predecessor's value and are never selected
        let x = cumulative.partition_point(|&c| c <= u).min(s.dim() - 1);
        *counts.entry(x).or_insert(0) += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn size_cap() {
        assert!(matches!(StateVector::zero(25), Err(Error::TooManyQubits { .. })));
    }

    #[test]
    fn normalization_is_checked() {
        let bad = vec![Complex64::new(1.0, 0.0); 2];
        assert!(StateVector::from_amplitudes(1, bad).is_err());
        assert!(StateVector::from_amplitudes(2, vec![Complex64::new(1.0, 0.0); 2]).is_err());
    }

    #[test]
    fn bitstrings_put_qubit_zero_last() {
        assert_eq!(bitstring(1, 3), "001");
        assert_eq!(bitstring(6, 3), "110");
    }

    #[test]
    fn permute_qubits_moves_excitations() {
        let s = StateVector::basis(3, 0b001).unwrap();
        let p = s.permute_qubits(&[2, 0, 1]).unwrap();
        assert_eq!(p.probability(0b100), 1.0);
    }

    #[test]
    fn zero_state_samples_only_zero() {
        let counts = sample_counts(&StateVector::zero(3).unwrap(), 500, 1).unwrap();
        assert_eq!(counts.len(), 1);
        assert_eq!(counts[&0], 500);
    }

    #[test]
    fn plus_state_is_balanced() {
        let plus = StateVector::from_amplitudes(1, vec![Complex64::new(FRAC_1_SQRT_2, 0.0); 2])
            .unwrap();
        let shots = 1_000_000;
        let counts = sample_counts(&plus, shots, 42).unwrap();
        for x in 0..2 {
            let freq = counts[&x] as f64 / shots as f64;
            assert!((freq - 0.5).abs() <= 0.002, "frequency {freq}");
        }
    }

    #[test]
    fn ghz_never_yields_mixed_outcomes() {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let ghz = StateVector::from_amplitudes(2, vec![h, zero, zero, h]).unwrap();
        let counts = sample_counts(&ghz, 100_000, 3).unwrap();
        assert!(counts.keys().all(|&x| x == 0 || x == 3));
        assert_eq!(counts.values().sum::<usize>(), 100_000);
    }

    #[test]
    fn sampling_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = StateVector::random(4, &mut rng).unwrap();
        assert_eq!(sample_counts(&s, 1000, 9).unwrap(), sample_counts(&s, 1000, 9).unwrap());
    }
}
