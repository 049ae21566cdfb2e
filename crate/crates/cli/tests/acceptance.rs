//! Acceptance run: one line per criterion, then a single assertion over all of them.
//!
//! Slow by design (the quantum training runs simulate 21 qubits); run with
//! `cargo test -p gtqc-cli --test acceptance`.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use gtqc_core::attention::{parameter_gradient, AttentionHead, GradientStrategy};
use gtqc_core::experiments::{lattice_antiferro, lattice_le, reproduce, AntiferroExperiment, Experiment, LatticeLeExperiment, Report};
use gtqc_core::lift::random_connected_graph;
use gtqc_core::model::{normalized_adjacency, GtqcConfig, GtqcModel, Model, ModelInput, Task};
use gtqc_core::quantum::ground::sector_states;
use gtqc_core::quantum::{
    evolve_graph, evolve_mixing, hardcore_walk_graph, CorrelationTensor, GraphHamiltonian, HamiltonianKind,
    QuantumParams, StateVector,
};
use gtqc_core::{permute_graph, Graph};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Writes past the test harness's output capture so the report always shows.
fn say(line: &str) {
    let _ = writeln!(std::io::stderr(), "{line}");
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn random_graph(lo: usize, hi: usize, rng: &mut ChaCha8Rng) -> Graph {
    let n = rng.random_range(lo..=hi);
    let extra = rng.random_range(0..=n);
    random_connected_graph(n, extra, rng).unwrap()
}

fn random_kind(rng: &mut ChaCha8Rng) -> HamiltonianKind {
    match rng.random_range(0..3) {
        0 => HamiltonianKind::Ising,
        1 => HamiltonianKind::Xy,
        _ => HamiltonianKind::xxz(rng.random_range(0.2..2.0)).unwrap(),
    }
}

fn angles(len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect()
}

/// Dense Hamiltonian from bit arithmetic: ZZ on the diagonal, XX + YY as a
/// hop of weight 2 between configurations differing on both ends of an edge.
fn dense_hamiltonian(g: &Graph, kind: HamiltonianKind) -> DMatrix<Complex64> {
    let (zz, hop) = match kind {
        HamiltonianKind::Ising => (1.0, 0.0),
        HamiltonianKind::Xy => (0.0, 1.0),
        HamiltonianKind::Xxz { j } => (j, 1.0),
    };
    let dim = 1usize << g.n_nodes();
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for x in 0..dim {
        for &(i, j) in g.edges() {
            let same = (x >> i) & 1 == (x >> j) & 1;
            h[(x, x)] += Complex64::from(if same { zz } else { -zz });
            if !same {
                h[(x ^ (1 << i) ^ (1 << j), x)] += Complex64::from(2.0 * hop);
            }
        }
    }
    h
}

fn dense_propagator(h: DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let e = SymmetricEigen::new(h);
    let phases = DMatrix::from_diagonal(&e.eigenvalues.map(|l| Complex64::new(0.0, -l * t).exp()));
    &e.eigenvectors * phases * e.eigenvectors.adjoint()
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let g = random_graph(2, 8, &mut rng);
        let kind = random_kind(&mut rng);
        let t = rng.random_range(-3.0..3.0);
        let s = StateVector::random(g.n_nodes(), &mut rng).unwrap();
        let got = evolve_graph(&s, &GraphHamiltonian::new(&g, kind).unwrap(), t).unwrap();
        let want = dense_propagator(dense_hamiltonian(&g, kind), t) * DVector::from_column_slice(s.amplitudes());
        worst = worst.max(max_diff(got.amplitudes(), want.as_slice()));
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-8 && elapsed < Duration::from_secs(60),
        format!("200 draws, max amplitude error {worst:.2e} (tol 1e-8), {elapsed:.1?} (limit 60s)"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = random_connected_graph(12, 8, &mut rng).unwrap();
    let hams: Vec<GraphHamiltonian> = [HamiltonianKind::Ising, HamiltonianKind::Xy, HamiltonianKind::xxz(0.6).unwrap()]
        .into_iter()
        .map(|k| GraphHamiltonian::new(&g, k).unwrap())
        .collect();
    let mut s = StateVector::random(12, &mut rng).unwrap();
    let mut drift = 0.0f64;
    for step in 0..1000 {
        s = evolve_graph(&s, &hams[step % 3], rng.random_range(0.0..1.0)).unwrap();
        s = evolve_mixing(&s, rng.random_range(0.0..std::f64::consts::TAU));
        drift = drift.max((s.norm_sqr() - 1.0).abs());
    }
    outcome(drift <= 1e-10, format!("1000 chained evolutions on 12 qubits, max |‖ψ‖² − 1| {drift:.2e} (tol 1e-10)"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut leak, mut walk_err) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let g = random_graph(3, 12, &mut rng);
        let n = g.n_nodes();
        let h = GraphHamiltonian::new(&g, HamiltonianKind::Xy).unwrap();
        let t = rng.random_range(-2.0..2.0);

        let w = rng.random_range(1..=n.min(3));
        let sector = sector_states(n, w);
        let mut amps = vec![Complex64::default(); 1 << n];
        for &x in &sector {
            amps[x] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        let out = evolve_graph(&StateVector::from_amplitudes(n, amps).unwrap(), &h, t).unwrap();
        let outside = (0..1usize << n).filter(|x| x.count_ones() as usize != w).map(|x| out.amplitudes()[x].norm());
        leak = leak.max(outside.fold(0.0, f64::max));

        let singles = sector_states(n, 1);
        let psi: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let mut amps = vec![Complex64::default(); 1 << n];
        for (&x, a) in singles.iter().zip(&psi) {
            amps[x] = a / norm;
        }
        let out = evolve_graph(&StateVector::from_amplitudes(n, amps.clone()).unwrap(), &h, t).unwrap();
        let walk = hardcore_walk_graph(&g, 1).unwrap();
        let a = walk.adjacency_matrix().map(Complex64::from);
        let coords = DVector::from_iterator(n, singles.iter().map(|&x| amps[x]));
        let want = dense_propagator(a * Complex64::from(2.0), t) * coords;
        let got: Vec<Complex64> = singles.iter().map(|&x| out.amplitudes()[x]).collect();
        walk_err = walk_err.max(max_diff(&got, want.as_slice()));
    }
    outcome(
        leak <= 1e-10 && walk_err <= 1e-8,
        format!("50 graphs ≤ 12 nodes, sector leakage {leak:.2e} (tol 1e-10), single-excitation walk error {walk_err:.2e} (tol 1e-8)"),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = [0.0f64; 2];
    for _ in 0..100 {
        let g = random_graph(2, 10, &mut rng);
        let n = g.n_nodes();
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(&mut rng);
        let pg = permute_graph(&g, &p).unwrap();
        let params = QuantumParams::new(angles(3, &mut rng)).unwrap();
        let gamma: [f64; 9] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let kind = random_kind(&mut rng);
        for (k, softmax) in [false, true].into_iter().enumerate() {
            let head = AttentionHead { params: params.clone(), gamma, softmax, kind };
            let (a, b) = (head.attention(&g).unwrap(), head.attention(&pg).unwrap());
            for i in 0..n {
                for j in 0..n {
                    worst[k] = worst[k].max((b[(p[i], p[j])] - a[(i, j)]).abs());
                }
            }
        }
    }
    outcome(
        worst.iter().all(|&w| w <= 1e-10),
        format!("100 draws ≤ 10 nodes, ‖A(πg) − PA(g)Pᵀ‖∞ {:.2e} plain, {:.2e} softmax (tol 1e-10)", worst[0], worst[1]),
    )
}

/// Derivatives below this magnitude are compared on this absolute scale.
const GRAD_FLOOR: f64 = 1e-6;

fn criterion_5a() -> Outcome {
    let mut worst = 0.0f64;
    let (mut checked, mut kinks) = (0usize, 0usize);
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        let g = random_graph(4, 8, &mut rng);
        let x = DMatrix::from_fn(g.n_nodes(), 3, |_, _| rng.random_range(-1.0..1.0));
        let task = [Task::GraphClassification(3), Task::GraphRegression(2), Task::NodeClassification(2)][seed as usize % 3];
        let cfg = GtqcConfig {
            input_dim: 3,
            hidden: 6,
            layers: 2,
            heads: 2,
            head_dim: 3,
            kind: HamiltonianKind::Ising,
            depth: 1,
            softmax: seed % 2 == 1,
            task,
        };
        let model = Model::Gtqc(GtqcModel::new(cfg, seed).unwrap());
        let corr = model.correlations(&g).unwrap();
        let a_hat = normalized_adjacency(&g);
        let loss = |m: &Model, c: &[CorrelationTensor], r: &DMatrix<f64>| {
            let input = ModelInput { features: &x, a_hat: Some(&a_hat), correlations: c };
            m.forward(input).unwrap().0.component_mul(r).sum()
        };
        let input = ModelInput { features: &x, a_hat: Some(&a_hat), correlations: &corr };
        let (y, mut tape) = model.forward(input).unwrap();
        let r = DMatrix::from_fn(y.nrows(), y.ncols(), |_, _| rng.random_range(-1.0..1.0));
        let grads = tape.backward(&model, &r).unwrap();
        for k in 0..model.params().len() {
            let f = |h: f64| {
                let mut m = model.clone();
                m.params_mut().values_mut()[k] += h;
                loss(&m, &corr, &r)
            };
            let d = |h: f64| (f(h) - f(-h)) / (2.0 * h);
            let (fd, half) = (d(1e-5), d(5e-6));
            // a ReLU switching inside the stencil shows up as step dependence
            if (fd - half).abs() > 1e-6 * (1.0 + fd.abs()) {
                kinks += 1;
                continue;
            }
            let an = grads.params.values()[k];
            worst = worst.max((an - fd).abs() / an.abs().max(fd.abs()).max(GRAD_FLOOR));
            checked += 1;
        }
    }
    outcome(
        worst <= 1e-4 && checked > 0,
        format!(
            "20 seeds, 2-layer GTQC on 4-8 nodes, {checked} parameters, max relative error {worst:.2e} (tol 1e-4, floor {GRAD_FLOOR:e}), {kinks} kink-straddling stencils skipped"
        ),
    )
}

fn criterion_5b() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst, mut pairs) = (0.0f64, 0usize);
    for _ in 0..40 {
        let g = random_graph(2, 7, &mut rng);
        let qp = QuantumParams::new(angles(5, &mut rng)).unwrap();
        for kind in [HamiltonianKind::Ising, HamiltonianKind::Xy] {
            let h = GraphHamiltonian::new(&g, kind).unwrap();
            for index in 0..qp.len() {
                if !matches!(kind, HamiltonianKind::Ising) && index % 2 == 1 {
                    continue;
                }
                let trig = parameter_gradient(&h, &qp, index, GradientStrategy::Trig).unwrap();
                let fd = parameter_gradient(&h, &qp, index, GradientStrategy::FiniteDiff).unwrap();
                worst = worst.max(trig.max_abs_diff(&fd));
                pairs += 1;
            }
        }
    }
    outcome(worst <= 1e-5, format!("{pairs} mixing / Ising-time derivatives, max |trig − fd| {worst:.2e} (tol 1e-5)"))
}

fn check_line(report: &Report, name: &str) -> (bool, String) {
    match report.check(name) {
        Some(c) => (c.passed, format!("{name}: {}", c.detail)),
        None => (false, format!("{name}: missing")),
    }
}

fn run_gtqc(args: &[&str], dir: &Path) -> (String, Duration, bool) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_gtqc")).args(args).current_dir(dir).output().expect("binary runs");
    (String::from_utf8_lossy(&out.stdout).into_owned(), start.elapsed(), out.status.success())
}

fn status_of(stdout: &str, check: &str) -> Option<bool> {
    stdout.lines().find_map(|l| {
        let (status, rest) = l.split_once(' ')?;
        rest.starts_with(&format!("{check}:")).then(|| status == "PASS")
    })
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn criteria_6_and_9() -> (Outcome, Outcome) {
    let dir = tempfile::tempdir().unwrap();
    let (first, elapsed, ok1) = run_gtqc(&["reproduce", "graphcovers", "--seed", "0", "--out", "run1"], dir.path());
    let (_, _, ok2) = run_gtqc(&["reproduce", "graphcovers", "--seed", "0", "--out", "run2"], dir.path());
    for line in first.lines().filter(|l| !l.starts_with("wrote")) {
        say(&format!("    {line}"));
    }
    let names = ["covers-wl-indistinguishable", "gtqc-fits-covers", "gcn-stuck-at-chance"];
    let flags: Vec<Option<bool>> = names.iter().map(|n| status_of(&first, n)).collect();
    let six = outcome(
        ok1 && flags.iter().all(|f| *f == Some(true)) && elapsed < Duration::from_secs(600),
        format!(
            "{} in {elapsed:.0?} (limit 600s)",
            names.iter().zip(&flags).map(|(n, f)| format!("{n} {}", if *f == Some(true) { "ok" } else { "failed" })).collect::<Vec<_>>().join(", ")
        ),
    );
    let (a, b) = (csv_files(&dir.path().join("run1")), csv_files(&dir.path().join("run2")));
    let nine = outcome(
        ok1 && ok2 && !a.is_empty() && a == b,
        format!("{} CSV files per run, byte-identical: {}", a.len(), a == b),
    );
    (six, nine)
}

fn criterion_7() -> Outcome {
    let le = lattice_le(&LatticeLeExperiment::default()).unwrap();
    let af = lattice_antiferro(&AntiferroExperiment::default()).unwrap();
    let mut lines = Vec::new();
    let mut passed = true;
    for c in af.checks.iter().filter(|c| c.name.starts_with("gcn-")).chain(&le.checks) {
        passed &= c.passed;
        lines.push(format!("{}: {}", c.name, c.detail));
    }
    for kind in ["square", "honeycomb"] {
        let (ok, line) = check_line(&af, &format!("gtqc-fits-{kind}"));
        passed &= ok;
        lines.push(line);
    }
    for kind in ["triangular", "kagome"] {
        lines.push(format!("{} (reported only)", check_line(&af, &format!("gtqc-fits-{kind}")).1));
    }
    for l in &lines {
        say(&format!("    {l}"));
    }
    let failed: Vec<&str> = af.checks.iter().chain(&le.checks).filter(|c| c.gated && !c.passed).map(|c| c.name.as_str()).collect();
    outcome(passed, if failed.is_empty() { "all lattice checks passed".to_string() } else { format!("failed: {}", failed.join(", ")) })
}

fn criterion_8() -> Outcome {
    let report = reproduce(Experiment::LetterMed, 0, None).unwrap();
    let hist = &report.run("gtqc-random").unwrap().history;
    let finite = hist.epochs.iter().all(|r| r.train_loss.is_finite());
    let (halves, l1) = check_line(&report, "random-gtqc-loss-halves");
    let (error, l2) = check_line(&report, "random-gtqc-test-error");
    for r in &report.references {
        say(&format!("    reference: {r}"));
    }
    outcome(halves && error && finite && hist.epochs.len() <= 200, format!("{l1}; {l2}; losses finite: {finite}"))
}

#[test]
fn acceptance() {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut record = |name: &'static str, o: Outcome| {
        say(&format!("criterion {name}: {} {}", if o.passed { "PASS" } else { "FAIL" }, o.detail));
        results.push((name, o));
    };
    record("1", criterion_1());
    record("2", criterion_2());
    record("3", criterion_3());
    record("4", criterion_4());
    record("5a", criterion_5a());
    record("5b", criterion_5b());
    let (six, nine) = criteria_6_and_9();
    record("6", six);
    record("7", criterion_7());
    record("8", criterion_8());
    record("9", nine);
    let failed: Vec<&str> = results.iter().filter(|(_, o)| !o.passed).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
