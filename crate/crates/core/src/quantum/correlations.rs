//! Two-body Pauli correlations of a statevector for every pair of qubits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::quantum::pauli::Pauli;
use crate::quantum::state::StateVector;

/// Component order of a correlation vector `C_ij`, as `(op on i, op on j)`:
/// `Z_iZ_j, X_iX_j, Y_iY_j, X_iZ_j, X_iY_j, Y_iZ_j, X_jZ_i, X_jY_i, Y_jZ_i`.
pub const COMPONENTS: [(Pauli, Pauli); 9] = [
    (Pauli::Z, Pauli::Z),
    (Pauli::X, Pauli::X),
    (Pauli::Y, Pauli::Y),
    (Pauli::X, Pauli::Z),
    (Pauli::X, Pauli::Y),
    (Pauli::Y, Pauli::Z),
    (Pauli::Z, Pauli::X),
    (Pauli::Y, Pauli::X),
    (Pauli::Z, Pauli::Y),
];

pub const COMPONENT_NAMES: [&str; 9] = [
    "ZiZj", "XiXj", "YiYj", "XiZj", "XiYj", "YiZj", "XjZi", "XjYi", "YjZi",
];

/// Index map taking `C_ij` to `C_ji`.
pub const SWAP: [usize; 9] = [0, 1, 2, 6, 7, 8, 3, 4, 5];

pub const N_COMPONENTS: usize = 9;

/// `N × N × 9` correlation values; the diagonal `C_ii` is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTensor {
    n: usize,
    values: Vec<f64>,
}

impl CorrelationTensor {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            values: vec![0.0; n * n * N_COMPONENTS],
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &[f64] {
        let o = (i * self.n + j) * N_COMPONENTS;
        &self.values[o..o + N_COMPONENTS]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let o = (i * self.n + j) * N_COMPONENTS;
        &mut self.values[o..o + N_COMPONENTS]
    }

    /// Flat storage, row-major over `(i, j, component)`.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Sets `C_ij` and fills `C_ji` by the component swap.
    pub fn set_pair(&mut self, i: usize, j: usize, c: &[f64; N_COMPONENTS]) {
        self.get_mut(i, j).copy_from_slice(c);
        let swapped: Vec<f64> = SWAP.iter().map(|&k| c[k]).collect();
        self.get_mut(j, i).copy_from_slice(&swapped);
    }

    /// `sum_k w_k * t_k` over tensors of equal size.
    pub fn linear_combination(terms: &[(f64, &CorrelationTensor)]) -> Self {
        let n = terms.first().map_or(0, |(_, t)| t.n);
        let mut out = Self::zeros(n);
        for (w, t) in terms {
            for (o, v) in out.values.iter_mut().zip(&t.values) {
                *o += w * v;
            }
        }
        out
    }

    /// Relabels nodes: entry `(i, j)` moves to `(perm[i], perm[j])`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        crate::graph::check_permutation(perm, self.n)?;
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.get_mut(perm[i], perm[j]).copy_from_slice(self.get(i, j));
            }
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct CorrelationJson {
    n: usize,
    components: Vec<String>,
    values: Vec<Vec<Vec<f64>>>,
}

impl Serialize for CorrelationTensor {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let values = (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).to_vec()).collect())
            .collect();
        CorrelationJson {
            n: self.n,
            components: COMPONENT_NAMES.iter().map(|s| s.to_string()).collect(),
            values,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CorrelationTensor {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = CorrelationJson::deserialize(deserializer)?;
        if raw.components != COMPONENT_NAMES {
            return Err(D::Error::custom("unexpected correlation component order"));
        }
        let mut out = CorrelationTensor::zeros(raw.n);
        if raw.values.len() != raw.n {
            return Err(D::Error::custom("values must have n rows"));
        }
        for (i, row) in raw.values.iter().enumerate() {
            if row.len() != raw.n {
                return Err(D::Error::custom(format!("row {i} must have n entries")));
            }
            for (j, c) in row.iter().enumerate() {
                if c.len() != N_COMPONENTS {
                    return Err(D::Error::custom(format!("entry [{i}][{j}] must have 9 components")));
                }
                out.get_mut(i, j).copy_from_slice(c);
            }
        }
        Ok(out)
    }
}

/// Exact correlations of `s` for every ordered pair of distinct qubits.
///
/// Terms that flip at most one qubit come from one pass per qubit followed by
/// per-bit marginal sums; only the two-flip terms (`XX`, `YY`, `XY`) need a
/// sweep per pair.
pub fn measure_correlations(s: &StateVector) -> Result<CorrelationTensor> {
    let n = s.n_qubits();
    let psi = s.amplitudes();
    let mut out = CorrelationTensor::zeros(n);
    if n < 2 {
        return Ok(out);
    }
    // zz[i][k] = <Z_i Z_k>, flip[i][k] = sum over x_i = 0 of z_k(x) conj(psi(x)) psi(x ^ 2^i)
    let mut zz = vec![vec![0.0; n]; n];
    let mut flip = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    let half = psi.len() / 2;
    let (mut w, mut ur, mut ui) = (Vec::with_capacity(half), Vec::with_capacity(half), Vec::with_capacity(half));
    for i in 0..n {
        w.clear();
        ur.clear();
        ui.clear();
        let mi = 1usize << i;
        for block in psi.chunks_exact(2 * mi) {
            let (lo, hi) = block.split_at(mi);
            for (a, b) in lo.iter().zip(hi) {
                w.push(a.norm_sqr() - b.norm_sqr());
                ur.push(a.re * b.re + a.im * b.im);
                ui.push(a.re * b.im - a.im * b.re);
            }
        }
        let (wt, wm) = z_marginals(&mut w);
        let (rt, rm) = z_marginals(&mut ur);
        let (it, im) = z_marginals(&mut ui);
        for k in (0..n).filter(|&k| k != i) {
            let kc = if k < i { k } else { k - 1 };
            zz[i][k] = wt - 2.0 * wm[kc];
            flip[i][k] = Complex64::new(rt - 2.0 * rm[kc], it - 2.0 * im[kc]);
        }
    }
    let doubles = double_flip_sums(psi, n);
    for j in 1..n {
        for i in 0..j {
            let [r5, r6, r7, r8] = doubles[j * n + i];
            let (tij, tji) = (flip[i][j], flip[j][i]);
            let c = [
                zz[i][j],
                2.0 * (r5 + r7),
                2.0 * (r7 - r5),
                2.0 * tij.re,
                -2.0 * (r6 + r8),
                2.0 * tij.im,
                2.0 * tji.re,
                2.0 * (r8 - r6),
                2.0 * tji.im,
            ];
            out.set_pair(i, j, &c);
        }
    }
    Ok(out)
}

/// Total of `v` and, for every bit `k`, the sum over indices with bit `k` set.
/// Consumes `v` as scratch.
fn z_marginals(v: &mut [f64]) -> (f64, Vec<f64>) {
    let bits = v.len().trailing_zeros() as usize;
    let mut marg = vec![0.0; bits];
    let mut len = v.len();
    for k in (0..bits).rev() {
        len /= 2;
        let (lo, hi) = v[..2 * len].split_at_mut(len);
        marg[k] = lane_sum(hi);
        lo.iter_mut().zip(hi.iter()).for_each(|(a, b)| *a += b);
    }
    (v[0], marg)
}

/// Sum with independent partial sums, so the adds can overlap.
fn lane_sum(v: &[f64]) -> f64 {
    let mut lanes = [0.0; 8];
    let chunks = v.chunks_exact(8);
    let rest: f64 = chunks.remainder().iter().sum();
    for c in chunks {
        for (l, x) in lanes.iter_mut().zip(c) {
            *l += x;
        }
    }
    lanes.iter().sum::<f64>() + rest
}

/// Qubits below this index are handled on cache-sized tiles.
const TILE_BITS: usize = 13;

/// `[Re rho_03, Im rho_03, Re rho_12, Im rho_12]` for every pair `i < j` at
/// index `j * n + i`, where `a_b` is the amplitude with local bits
/// `b = 2 b_j + b_i` and `rho_ab = sum a_a conj(a_b)`.
fn double_flip_sums(psi: &[Complex64], n: usize) -> Vec<[f64; 4]> {
    let mut out = vec![[0.0; 4]; n * n];
    let t = n.min(TILE_BITS);
    let add = |acc: &mut [f64; 4], r: [f64; 4]| acc.iter_mut().zip(r).for_each(|(a, b)| *a += b);
    for tile in psi.chunks_exact(1 << t) {
        for j in 1..t {
            for block in tile.chunks_exact(2 << j) {
                let (low, high) = block.split_at(1 << j);
                for i in 0..j {
                    add(&mut out[j * n + i], cross_sums(low, high, i));
                }
            }
        }
    }
    for j in t..n {
        for block in psi.chunks_exact(2 << j) {
            let (low, high) = block.split_at(1 << j);
            for (tl, th) in low.chunks_exact(1 << t).zip(high.chunks_exact(1 << t)) {
                for i in 0..t {
                    add(&mut out[j * n + i], cross_sums(tl, th, i));
                }
            }
            for i in t..j {
                add(&mut out[j * n + i], cross_sums(low, high, i));
            }
        }
    }
    out
}

/// Contribution of `low` (bit `j` clear) and `high` (bit `j` set) to the
/// sums of [`double_flip_sums`] for qubit `i`.
fn cross_sums(low: &[Complex64], high: &[Complex64], i: usize) -> [f64; 4] {
    const L: usize = 4;
    let mi = 1usize << i;
    // acc[q][lane]: independent partial sums so the adds can overlap
    let mut acc = [[0.0f64; L]; 4];
    let mut add = |lane: usize, a0: Complex64, a1: Complex64, a2: Complex64, a3: Complex64| {
        acc[0][lane] += a0.re * a3.re + a0.im * a3.im;
        acc[1][lane] += a0.im * a3.re - a0.re * a3.im;
        acc[2][lane] += a1.re * a2.re + a1.im * a2.im;
        acc[3][lane] += a1.im * a2.re - a1.re * a2.im;
    };
    let pairs = low.chunks_exact(2 * mi).zip(high.chunks_exact(2 * mi));
    if mi >= L {
        for (b0, b1) in pairs {
            let (s0, s1) = b0.split_at(mi);
            let (s2, s3) = b1.split_at(mi);
            for (((c0, c1), c2), c3) in s0.chunks_exact(L).zip(s1.chunks_exact(L)).zip(s2.chunks_exact(L)).zip(s3.chunks_exact(L)) {
                for lane in 0..L {
                    add(lane, c0[lane], c1[lane], c2[lane], c3[lane]);
                }
            }
        }
    } else {
        for (c, (b0, b1)) in pairs.enumerate() {
            for k in 0..mi {
                add((c * mi + k) % L, b0[k], b0[mi + k], b1[k], b1[mi + k]);
            }
        }
    }
    acc.map(|lanes| lanes.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::pauli::{expectation, PauliString};
    use rand::SeedableRng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn zero_state_has_only_zz() {
        let t = measure_correlations(&StateVector::zero(2).unwrap()).unwrap();
        assert_eq!(t.get(0, 1), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(t.get(0, 0), &[0.0; 9]);
    }

    #[test]
    fn plus_plus_has_only_xx() {
        let s = StateVector::from_amplitudes(2, vec![c(0.5); 4]).unwrap();
        let t = measure_correlations(&s).unwrap();
        assert!((t.get(0, 1)[1] - 1.0).abs() < 1e-15);
        assert!(t.get(0, 1)[0].abs() < 1e-15);
    }

    #[test]
    fn bell_state() {
        let s = StateVector::from_amplitudes(2, vec![c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)])
            .unwrap();
        let t = measure_correlations(&s).unwrap();
        let expected = [1.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        for (a, b) in t.get(0, 1).iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_direct_expectations_on_random_state() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let s = StateVector::random(5, &mut rng).unwrap();
        let t = measure_correlations(&s).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                if i == j {
                    continue;
                }
                for (k, &(pi, pj)) in COMPONENTS.iter().enumerate() {
                    let ps = PauliString::pair(5, i, pi, j, pj).unwrap();
                    let direct = expectation(&s, &ps).unwrap();
                    assert!((t.get(i, j)[k] - direct).abs() < 1e-13, "({i},{j}) component {k}");
                }
            }
        }
    }

    #[test]
    fn json_roundtrip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let t = measure_correlations(&StateVector::random(3, &mut rng).unwrap()).unwrap();
        let text = serde_json::to_string(&t).unwrap();
        assert_eq!(serde_json::from_str::<CorrelationTensor>(&text).unwrap(), t);
    }
}
