mod common;

use common::{arb_angles, arb_graph, arb_permuted};
use gtqc_core::attention::{attention_from_correlations, parameter_gradient, AttentionHead, GradientStrategy};
use gtqc_core::quantum::{GraphHamiltonian, HamiltonianKind, QuantumParams, N_COMPONENTS};
use gtqc_core::permute_graph;
use proptest::prelude::*;

fn arb_gamma() -> impl Strategy<Value = [f64; N_COMPONENTS]> {
    proptest::array::uniform9(-2.0..2.0f64)
}

fn head(angles: Vec<f64>, gamma: [f64; N_COMPONENTS], softmax: bool, kind: HamiltonianKind) -> AttentionHead {
    AttentionHead {
        params: QuantumParams::new(angles).unwrap(),
        gamma,
        softmax,
        kind,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn attention_is_permutation_equivariant((g, p) in arb_permuted(2, 8), angles in arb_angles(3), gamma in arb_gamma(), softmax: bool, xy: bool) {
        let kind = if xy { HamiltonianKind::Xy } else { HamiltonianKind::Ising };
        let h = head(angles, gamma, softmax, kind);
        let a = h.attention(&g).unwrap();
        let b = h.attention(&permute_graph(&g, &p).unwrap()).unwrap();
        let n = g.n_nodes();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((a[(i, j)] - b[(p[i], p[j])]).abs() <= 1e-10, "err {:e}", (a[(i, j)] - b[(p[i], p[j])]).abs());
            }
        }
        if softmax {
            for r in 0..n {
                prop_assert!((a.row(r).sum() - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn attention_is_linear_in_gamma(g in arb_graph(2, 7), angles in arb_angles(3), gamma in arb_gamma(), k in 0usize..N_COMPONENTS) {
        let h = head(angles, gamma, false, HamiltonianKind::Ising);
        let c = h.correlations(&g).unwrap();
        let base = attention_from_correlations(&c, &gamma, false).unwrap();
        let mut bumped = gamma;
        bumped[k] += 1.0;
        let d = attention_from_correlations(&c, &bumped, false).unwrap() - base;
        for i in 0..g.n_nodes() {
            for j in 0..g.n_nodes() {
                prop_assert!((d[(i, j)] - c.get(i, j)[k]).abs() <= 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn trig_gradient_matches_finite_differences(g in arb_graph(2, 6), angles in arb_angles(5), index in 0usize..5, xy: bool) {
        // time parameters only have a finite spectrum under the Ising Hamiltonian
        let kind = if xy && index % 2 == 0 { HamiltonianKind::Xy } else { HamiltonianKind::Ising };
        let h = GraphHamiltonian::new(&g, kind).unwrap();
        let qp = QuantumParams::new(angles).unwrap();
        let trig = parameter_gradient(&h, &qp, index, GradientStrategy::Trig).unwrap();
        let fd = parameter_gradient(&h, &qp, index, GradientStrategy::FiniteDiff).unwrap();
        prop_assert!(trig.max_abs_diff(&fd) <= 1e-5, "diff {}", trig.max_abs_diff(&fd));
    }
}

#[test]
fn trig_refuses_non_ising_time() {
    let g = gtqc_core::graph::path(3);
    let h = GraphHamiltonian::new(&g, HamiltonianKind::Xy).unwrap();
    let qp = QuantumParams::new(vec![0.3, 0.2, 0.1]).unwrap();
    assert!(parameter_gradient(&h, &qp, 1, GradientStrategy::Trig).is_err());
    let auto = parameter_gradient(&h, &qp, 1, GradientStrategy::Auto).unwrap();
    let fd = parameter_gradient(&h, &qp, 1, GradientStrategy::FiniteDiff).unwrap();
    assert_eq!(auto, fd);
}
