mod common;

use common::{arb_permuted, graph};
use gtqc_core::model::{normalized_adjacency, GcnConfig, GcnModel, GtqcConfig, GtqcModel, Model, ModelInput, Task};
use gtqc_core::quantum::{CorrelationTensor, HamiltonianKind};
use gtqc_core::{permute_graph, Graph};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gtqc(input_dim: usize, task: Task, softmax: bool, seed: u64) -> Model {
    Model::Gtqc(
        GtqcModel::new(
            GtqcConfig {
                input_dim,
                hidden: 5,
                layers: 2,
                heads: 2,
                head_dim: 3,
                kind: HamiltonianKind::Ising,
                depth: 1,
                softmax,
                task,
            },
            seed,
        )
        .unwrap(),
    )
}

fn gcn(input_dim: usize, task: Task, seed: u64) -> Model {
    Model::Gcn(GcnModel::new(GcnConfig { input_dim, hidden: 6, layers: 2, task }, seed).unwrap())
}

fn random_matrix(r: usize, c: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

fn with_features(g: Graph, d: usize, seed: u64) -> Graph {
    let x = random_matrix(g.n_nodes(), d, &mut ChaCha8Rng::seed_from_u64(seed));
    g.with_features(x).unwrap()
}

fn tasks() -> [Task; 3] {
    [Task::GraphClassification(3), Task::GraphRegression(2), Task::NodeClassification(4)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn output_shapes((g, _) in arb_permuted(2, 7), seed: u64, softmax: bool) {
        let n = g.n_nodes();
        let g = with_features(g, 3, seed);
        for task in tasks() {
            for m in [gtqc(3, task, softmax, seed), gcn(3, task, seed)] {
                let y = m.predict(&g).unwrap();
                let rows = if task.is_graph_level() { 1 } else { n };
                prop_assert_eq!(y.shape(), (rows, task.outputs()));
            }
        }
    }

    #[test]
    fn outputs_follow_node_relabeling((g, p) in arb_permuted(2, 7), seed: u64, softmax: bool) {
        let g = with_features(g, 3, seed);
        let h = permute_graph(&g, &p).unwrap();
        for task in tasks() {
            for m in [gtqc(3, task, softmax, seed), gcn(3, task, seed)] {
                let a = m.predict(&g).unwrap();
                let b = m.predict(&h).unwrap();
                for i in 0..a.nrows() {
                    let r = if task.is_graph_level() { i } else { p[i] };
                    for k in 0..a.ncols() {
                        prop_assert!((a[(i, k)] - b[(r, k)]).abs() <= 1e-9);
                    }
                }
            }
        }
    }
}

/// `L = Σ y ⊙ R` for fixed `R`, so `dL/dy = R`.
fn scalar_loss(m: &Model, x: &DMatrix<f64>, a_hat: &DMatrix<f64>, corr: &[CorrelationTensor], r: &DMatrix<f64>) -> f64 {
    let input = ModelInput {
        features: x,
        a_hat: Some(a_hat),
        correlations: corr,
    };
    m.forward(input).unwrap().0.component_mul(r).sum()
}

/// Central difference, or `None` when halving the step changes it (a ReLU kink
/// lies within the step).
fn stable_difference(f: impl Fn(f64) -> f64) -> Option<f64> {
    let d = |h: f64| (f(h) - f(-h)) / (2.0 * h);
    let (a, b) = (d(1e-6), d(5e-7));
    ((a - b).abs() <= 1e-6 * (1.0 + a.abs())).then_some(a)
}

#[test]
fn backward_matches_finite_differences() {
    let mut checked = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = with_features(graph(3 + seed as usize % 4, 2, seed), 3, seed);
        let task = tasks()[seed as usize % 3];
        let x = g.features().unwrap().clone();
        let a_hat = normalized_adjacency(&g);
        for model in [gtqc(3, task, seed % 2 == 0, seed), gcn(3, task, seed)] {
            let corr = model.correlations(&g).unwrap();
            let input = ModelInput {
                features: &x,
                a_hat: Some(&a_hat),
                correlations: &corr,
            };
            let (y, mut tape) = model.forward(input).unwrap();
            let r = random_matrix(y.nrows(), y.ncols(), &mut rng);
            let grads = tape.backward(&model, &r).unwrap();
            assert!(tape.backward(&model, &r).is_err());

            for k in 0..model.params().len() {
                let f = |h: f64| {
                    let mut m = model.clone();
                    m.params_mut().values_mut()[k] += h;
                    scalar_loss(&m, &x, &a_hat, &corr, &r)
                };
                if let Some(fd) = stable_difference(f) {
                    let an = grads.params.values()[k];
                    assert!((an - fd).abs() <= 1e-5 * (1.0 + fd.abs()), "seed {seed} param {k}: {an} vs {fd}");
                    checked += 1;
                }
            }
            for (head, gc) in grads.correlations.iter().enumerate() {
                for k in (0..gc.as_slice().len()).step_by(5) {
                    let f = |h: f64| {
                        let mut c = corr.clone();
                        c[head].as_mut_slice()[k] += h;
                        scalar_loss(&model, &x, &a_hat, &c, &r)
                    };
                    if let Some(fd) = stable_difference(f) {
                        let an = gc.as_slice()[k];
                        assert!((an - fd).abs() <= 1e-5 * (1.0 + fd.abs()), "seed {seed} corr {head}/{k}: {an} vs {fd}");
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked > 1000, "only {checked} derivatives checked");
}

#[test]
fn checkpoints_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = with_features(graph(5, 3, 1), 3, 1);
    for m in [gtqc(3, Task::GraphClassification(2), true, 4), gcn(3, Task::NodeClassification(2), 4)] {
        let path = dir.path().join("m.json");
        m.save(&path).unwrap();
        let back = Model::load(&path).unwrap();
        assert_eq!(back.params().values(), m.params().values());
        assert_eq!(back.predict(&g).unwrap(), m.predict(&g).unwrap());
    }
}
