//! `gtqc`: dataset generation, simulation utilities, training and the named
//! reproduction runs.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use gtqc_core::data::{graphs_to_json, load_graphs, save_json_graphs, write_tudataset, RunManifest};
use gtqc_core::experiments::{reproduce, synthetic_letters, Experiment};
use gtqc_core::lattice::{lattice_graph, LatticeKind, LatticeSpec};
use gtqc_core::lift::{graph_covers, CoversSpec};
use gtqc_core::model::Model;
use gtqc_core::quantum::{bitstring, ising_ground_states, measure_correlations, prepare_graph_state, HamiltonianKind, QuantumParams};
use gtqc_core::run::{execute, load_dataset, DataFormat, RunConfig};
use gtqc_core::spectral::laplacian_eigenmaps;
use gtqc_core::train::{evaluate, LossKind};
use gtqc_core::wl::{wl_indistinguishable, are_isomorphic};
use gtqc_core::{Error, Graph};

#[derive(Parser)]
#[command(name = "gtqc", version, about = "Graph attention from simulated quantum correlations")]
struct Cli {
    /// Seed for every random choice of the command.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file or directory, depending on the command.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset.
    #[command(subcommand)]
    GenDataset(GenDataset),
    /// Compare two graphs with 1-WL color refinement.
    WlTest {
        first: PathBuf,
        second: PathBuf,
    },
    /// Minimum Ising energy and all minimizing bitstrings of a graph.
    GroundState { graph: PathBuf },
    /// Two-body correlations of the layered state prepared on a graph.
    Correlations(CorrelationsArgs),
    /// Train a model described by --config.
    Train,
    /// Evaluate a saved model on a dataset.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Defaults to cross-entropy for classification, MSE for regression.
        #[arg(long)]
        loss: Option<LossKind>,
    },
    /// Run a named experiment and export its histories.
    Reproduce {
        /// graphcovers, lattice-le, lattice-antiferro or letter-med
        experiment: Experiment,
        /// TUDataset directory for letter-med.
        #[arg(long)]
        data: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Format {
    Json,
    Tudataset,
}

impl From<Format> for DataFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => DataFormat::Json,
            Format::Tudataset => DataFormat::Tudataset,
        }
    }
}

#[derive(Subcommand)]
enum GenDataset {
    /// Pairwise non-isomorphic, 1-WL-equivalent covering graphs.
    Covers {
        #[arg(long, default_value_t = 21)]
        nodes: usize,
        #[arg(long, default_value_t = 3)]
        classes: usize,
        #[arg(long, default_value_t = 2)]
        per_class: usize,
        #[arg(long, default_value_t = 3)]
        lift_degree: usize,
    },
    /// A lattice patch with antiferromagnetic node labels.
    Lattice {
        #[arg(long)]
        kind: LatticeKind,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        /// Attach this many Laplacian eigenmaps as node features.
        #[arg(long)]
        le: Option<usize>,
    },
    /// Distorted letter drawings written in TUDataset layout to --out.
    Letters {
        #[arg(long, default_value_t = 20)]
        per_class: usize,
    },
}

#[derive(Args)]
struct CorrelationsArgs {
    graph: PathBuf,
    /// Comma-separated layer parameters, mixing angles at even positions.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    params: Vec<f64>,
    /// ising, xy or xxz:J
    #[arg(long, default_value = "ising")]
    kind: HamiltonianKind,
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(e) if e.is_numerical() => 3,
        Some(e) if e.is_data() || matches!(e, Error::TooManyQubits { .. }) => 2,
        Some(_) => 1,
        None if e.chain().any(|c| c.is::<std::io::Error>()) => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Writes to `out` when given, stdout otherwise.
fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn single_graph(path: &Path) -> anyhow::Result<Graph> {
    let mut gs = load_graphs(path)?;
    if gs.len() != 1 {
        return Err(Error::Data(format!("{}: expected one graph, found {}", path.display(), gs.len())).into());
    }
    Ok(gs.remove(0))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let seed = cli.seed.unwrap_or(0);
    let out = cli.out.as_deref();
    match cli.command {
        Command::GenDataset(GenDataset::Covers {
            nodes,
            classes,
            per_class,
            lift_degree,
        }) => {
            let graphs = graph_covers(&CoversSpec {
                nodes,
                classes,
                per_class,
                lift_degree,
                seed,
            })?;
            match out {
                Some(p) => save_json_graphs(p, &graphs, None)?,
                None => emit(None, &(serde_json::to_string_pretty(&graphs_to_json(&graphs, None))? + "\n"))?,
            }
        }
        Command::GenDataset(GenDataset::Lattice { kind, rows, cols, le }) => {
            let mut g = lattice_graph(&LatticeSpec::new(kind, rows, cols))?;
            if let Some(k) = le {
                let x = laplacian_eigenmaps(&g, k)?.vectors;
                g = g.with_features(x)?;
            }
            let text = serde_json::to_string_pretty(&graphs_to_json(std::slice::from_ref(&g), None))? + "\n";
            emit(out, &text)?;
        }
        Command::GenDataset(GenDataset::Letters { per_class }) => {
            let dir = out.context("--out <DIR> is required for letters")?;
            let d = synthetic_letters(per_class, seed)?;
            write_tudataset(&d, dir, "Letter-med")?;
            println!("wrote {} graphs to {}", d.len(), dir.display());
        }
        Command::WlTest { first, second } => {
            let (a, b) = (single_graph(&first)?, single_graph(&second)?);
            let iters = a.n_nodes().max(b.n_nodes());
            if wl_indistinguishable(&a, &b, iters) {
                let iso = a.n_nodes() <= 24 && are_isomorphic(&a, &b);
                println!("indistinguishable{}", if iso { " (isomorphic)" } else { "" });
            } else {
                println!("distinguishable");
            }
        }
        Command::GroundState { graph } => {
            let g = single_graph(&graph)?;
            let gs = ising_ground_states(&g)?;
            let mut text = format!("energy {}\n", gs.energy);
            for s in &gs.states {
                text += &bitstring(*s, g.n_nodes());
                text.push('\n');
            }
            emit(out, &text)?;
        }
        Command::Correlations(a) => {
            let g = single_graph(&a.graph)?;
            let qp = QuantumParams::new(a.params)?;
            let c = measure_correlations(&prepare_graph_state(&g, a.kind, &qp)?)?;
            emit(out, &(serde_json::to_string(&c)? + "\n"))?;
        }
        Command::Train => {
            let path = cli.config.context("train needs --config <FILE>")?;
            let cfg = RunConfig::from_file(&path)?;
            let outcome = execute(&cfg, cli.seed)?;
            let seed = cli.seed.unwrap_or(cfg.train.seed);
            let name = path.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
            let manifest = RunManifest::new(&name, &cfg, seed)?;
            let dir = out.unwrap_or(Path::new("results"));
            let files = gtqc_core::data::export_results(&outcome.history, &manifest, dir)?;
            let ckpt = dir.join(format!("{name}-{}.model.json", manifest.tag()));
            outcome.model.save(&ckpt)?;
            if outcome.removed > 0 {
                println!("removed {} graphs above the node cap", outcome.removed);
            }
            println!("train loss {:.6} error {:.6}", outcome.train.loss, outcome.train.error);
            for (split, m) in [("val", outcome.val), ("test", outcome.test)] {
                if let Some(m) = m {
                    println!("{split} loss {:.6} error {:.6}", m.loss, m.error);
                }
            }
            for f in files.iter().chain([&ckpt]) {
                println!("wrote {}", f.display());
            }
        }
        Command::Eval { model, data, format, loss } => {
            let m = Model::load(&model)?;
            let d = load_dataset(&data, format.map(Into::into))?;
            let loss = loss.unwrap_or(if m.task().is_classification() { LossKind::CrossEntropy } else { LossKind::Mse });
            let r = evaluate(&m, &d, loss)?;
            let json = serde_json::json!({"graphs": d.len(), "loss": r.loss, "error": r.error, "mse": r.mse});
            emit(out, &(serde_json::to_string_pretty(&json)? + "\n"))?;
        }
        Command::Reproduce { experiment, data } => {
            if experiment != Experiment::LetterMed && data.is_some() {
                bail!(Error::InvalidArgument("--data only applies to letter-med".into()));
            }
            let report = reproduce(experiment, seed, data.as_deref())?;
            let dir = out.unwrap_or(Path::new("results"));
            let files = report.write(dir)?;
            for c in &report.checks {
                let status = match (c.passed, c.gated) {
                    (true, _) => "PASS",
                    (false, true) => "FAIL",
                    (false, false) => "NOTE",
                };
                println!("{status} {}: {}", c.name, c.detail);
            }
            for r in &report.references {
                println!("reference: {r}");
            }
            for f in &files {
                println!("wrote {}", f.display());
            }
            println!("{}", if report.passed() { "all gated checks passed" } else { "some gated checks failed" });
        }
    }
    Ok(())
}
