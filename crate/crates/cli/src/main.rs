use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cmv_krylov::circuit::{demultiplex, emit_circuit, gate_count, GateList};
use cmv_krylov::{cmv_factorization, linalg, VerblunskySequence};
use cmv_krylov_cli::config::RunConfig;
use cmv_krylov_cli::experiments::dual::dual_unitary_scan;
use cmv_krylov_cli::experiments::ensemble::{ensemble_scan, spreading_profile};
use cmv_krylov_cli::experiments::ising::{kicked_ising_scan, FieldDirection};
use cmv_krylov_cli::experiments::top::{kicked_top_scan, TopRegime};
use cmv_krylov_cli::formats::{read_json, Manifest, MatrixJson, OutputDir};
use cmv_krylov_cli::tables::{AlphaRow, EnsembleRow, SeriesRow};
use cmv_krylov_cli::verify::run_verify;
use cmv_krylov_cli::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "cmv-krylov",
    version,
    about = "Krylov chains of Floquet unitaries"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Tolerance override for verification checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Random Verblunsky ensembles: spacing ratios and localization.
    EnsembleScan,
    /// Kicked top over the kick-strength window in both regimes.
    KickedTop,
    /// Kicked Ising chain over the field window in both directions.
    KickedIsing,
    /// Operator spreading at the self-dual kicked Ising point.
    DualUnitary,
    /// Circuit emission for a Krylov chain.
    #[command(subcommand)]
    Circuit(CircuitCommand),
    /// Oracle suite for the recursions, reductions and circuits.
    Verify,
}

#[derive(Subcommand)]
enum CircuitCommand {
    /// Writes the gate list of a sequence as JSON and text.
    Emit {
        /// JSON Verblunsky sequence (overrides the config).
        #[arg(long)]
        alphas: Option<PathBuf>,
        #[arg(long)]
        qubits: Option<usize>,
    },
    /// Reads a JSON gate list and compares it with a sequence's CMV matrix.
    Check {
        #[arg(long)]
        gates: PathBuf,
        #[arg(long)]
        alphas: PathBuf,
    },
}

struct Run {
    cfg: RunConfig,
    seed: u64,
    out: PathBuf,
    threads: usize,
    tol: Option<f64>,
}

impl Run {
    fn resolve(common: &Common, default_out: &str) -> CliResult<Self> {
        let mut cfg = match &common.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if common.seed.is_some() {
            cfg.seed = common.seed;
        }
        if common.out.is_some() {
            cfg.out = common.out.clone();
        }
        if common.threads.is_some() {
            cfg.threads = common.threads;
        }
        if common.tol.is_some() {
            cfg.tol = common.tol;
        }
        cfg.validate()?;
        let threads = cfg
            .threads
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        // a second build (e.g. in tests) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
        if cfg.verify.tol.is_none() {
            cfg.verify.tol = cfg.tol;
        }
        Ok(Self {
            seed: cfg.seed.unwrap_or(0),
            out: cfg
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from(default_out)),
            threads,
            tol: cfg.tol,
            cfg,
        })
    }

    fn output<C: serde::Serialize>(&self, experiment: &str, config: &C) -> CliResult<OutputDir> {
        let manifest = Manifest::new(experiment, self.seed, self.threads, self.tol, config)?;
        OutputDir::create(&self.out, manifest)
    }
}

fn ensemble(run: &Run) -> CliResult<()> {
    let cfg = &run.cfg.ensemble;
    let report = ensemble_scan(cfg, run.seed)?;
    let mut out = run.output("ensemble-scan", cfg)?;
    let rows: Vec<EnsembleRow> = report
        .kinds
        .iter()
        .flat_map(|k| {
            k.rows.iter().map(|r| EnsembleRow {
                kind: k.kind,
                row: r.clone(),
            })
        })
        .collect();
    out.csv("ensemble.csv", &rows)?;
    if cfg.series_dim > 0 {
        for k in &cfg.kinds {
            let p = spreading_profile(*k, cfg.series_dim, Some(cfg.series_steps), run.seed)?;
            let series: Vec<SeriesRow> = p
                .times
                .iter()
                .zip(&p.k)
                .zip(&p.exp_s)
                .map(|((&t, &k), &e)| SeriesRow { t, k, exp_s: e })
                .collect();
            out.csv(&format!("series-{}.csv", k.label()), &series)?;
        }
    }
    out.json("report.json", &report)?;
    for k in &report.kinds {
        let slope = k.slope.map_or("-".to_string(), |s| format!("{s:.3}"));
        println!("{}: e^S slope {slope}", k.kind.label());
        for r in &k.rows {
            println!(
                "  d={:>5} <r>={:.4} e^S={:.2}",
                r.dim, r.mean_r, r.mean_exp_s
            );
        }
    }
    for h in &report.haar {
        println!("haar d={:>5} <r>={:.4}", h.dim, h.mean_r);
    }
    out.finish()?;
    Ok(())
}

fn top(run: &Run) -> CliResult<()> {
    let cfg = &run.cfg.kicked_top;
    let mut out = run.output("kicked-top", cfg)?;
    let mut sizes = Vec::new();
    for regime in [TopRegime::Integrable, TopRegime::Chaotic] {
        let report = kicked_top_scan(regime, cfg)?;
        println!("{}: e^S slope {:.3}", regime.name(), report.slope);
        out.csv(&format!("bins-{}.csv", regime.name()), &report.bins)?;
        out.json(&format!("report-{}.json", regime.name()), &report)?;
        sizes.extend(report.sizes);
    }
    out.csv("sizes.csv", &sizes)?;
    out.finish()?;
    Ok(())
}

fn ising(run: &Run) -> CliResult<()> {
    let cfg = &run.cfg.kicked_ising;
    let mut out = run.output("kicked-ising", cfg)?;
    let mut sizes = Vec::new();
    for dir in [FieldDirection::Integrable, FieldDirection::Chaotic] {
        let report = kicked_ising_scan(dir, cfg, run.seed)?;
        for s in &report.sizes {
            println!("{} L={}: e^S {:.2}", dir.name(), s.sites, s.mean_exp_s);
        }
        out.csv(&format!("bins-{}.csv", dir.name()), &report.bins)?;
        out.json(&format!("report-{}.json", dir.name()), &report)?;
        sizes.extend(report.sizes);
    }
    out.csv("sizes.csv", &sizes)?;
    out.finish()?;
    Ok(())
}

fn dual(run: &Run) -> CliResult<()> {
    let cfg = &run.cfg.dual_unitary;
    let report = dual_unitary_scan(cfg)?;
    let mut out = run.output("dual-unitary", cfg)?;
    out.csv("summary.csv", &report.rows)?;
    for row in &report.rows {
        let alphas: Vec<AlphaRow> = row
            .dual_alphas
            .iter()
            .enumerate()
            .map(|(n, &a)| AlphaRow {
                n,
                alpha: cmv_krylov::C64::new(a, 0.0),
            })
            .collect();
        out.csv(&format!("alphas-L{}.csv", row.sites), &alphas)?;
        println!(
            "L={} first nonzero {:?}, plateau x 4^L = {:.2}",
            row.sites, row.first_nonzero, row.plateau_ratio
        );
    }
    out.json("report.json", &report)?;
    out.finish()?;
    Ok(())
}

fn qubits_for(len: usize) -> usize {
    len.next_power_of_two().trailing_zeros().max(1) as usize
}

fn circuit_emit(run: &Run, alphas: Option<PathBuf>, qubits: Option<usize>) -> CliResult<()> {
    let mut cfg = run.cfg.circuit.clone();
    if alphas.is_some() {
        cfg.alphas = alphas;
    }
    if qubits.is_some() {
        cfg.qubits = qubits;
    }
    let path = cfg
        .alphas
        .clone()
        .ok_or_else(|| CliError::Config("circuit emit needs --alphas or circuit.alphas".into()))?;
    let seq: VerblunskySequence = read_json(&path)?;
    let q = cfg.qubits.unwrap_or_else(|| qubits_for(seq.len()));
    let list = emit_circuit(&seq, q)?;
    let mut out = run.output("circuit-emit", &cfg)?;
    out.json("gates.json", &list)?;
    out.text("gates.txt", &list.to_text())?;
    out.json("counts.json", &gate_count(&list))?;
    out.json("unitary.json", &MatrixJson::from_matrix(&list.to_dense()))?;
    if cfg.demultiplex {
        let flat = demultiplex(&list);
        out.json("gates-demultiplexed.json", &flat)?;
        out.json("counts-demultiplexed.json", &gate_count(&flat))?;
    }
    let c = gate_count(&list);
    println!(
        "{q} qubits: {} rotations, {} multiplexors",
        c.rotations, c.multiplexors
    );
    out.finish()?;
    Ok(())
}

fn circuit_check(gates: &Path, alphas: &Path) -> CliResult<()> {
    let list: GateList = read_json(gates)?;
    let seq: VerblunskySequence = read_json(alphas)?;
    let n = 1usize << list.qubits;
    if seq.len() > n {
        return Err(CliError::Config(format!(
            "{} coefficients do not fit {} qubits",
            seq.len(),
            list.qubits
        )));
    }
    let want = cmv_factorization(&seq.padded(n, linalg::ONE))?.to_dense();
    let dev = linalg::max_abs(&(list.to_dense() - want));
    println!("max deviation {dev:.3e}");
    if dev < 1e-10 {
        Ok(())
    } else {
        Err(CliError::ChecksFailed {
            failed: 1,
            total: 1,
        })
    }
}

fn verify(run: &Run) -> CliResult<()> {
    let report = run_verify(&run.cfg.verify, run.seed)?;
    let mut out = run.output("verify", &run.cfg.verify)?;
    for c in &report.checks {
        println!(
            "{} {:<32} {:.3e} (threshold {:.1e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.deviation,
            c.threshold
        );
    }
    out.json("report.json", &report)?;
    out.finish()?;
    println!("{} passed, {} failed", report.passed, report.failed);
    if report.failed > 0 {
        return Err(CliError::ChecksFailed {
            failed: report.failed,
            total: report.checks.len(),
        });
    }
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let name = match &cli.command {
        Command::EnsembleScan => "ensemble-scan",
        Command::KickedTop => "kicked-top",
        Command::KickedIsing => "kicked-ising",
        Command::DualUnitary => "dual-unitary",
        Command::Circuit(_) => "circuit",
        Command::Verify => "verify",
    };
    let run = Run::resolve(&cli.common, &format!("out/{name}"))?;
    match cli.command {
        Command::EnsembleScan => ensemble(&run),
        Command::KickedTop => top(&run),
        Command::KickedIsing => ising(&run),
        Command::DualUnitary => dual(&run),
        Command::Circuit(CircuitCommand::Emit { alphas, qubits }) => {
            circuit_emit(&run, alphas, qubits)
        }
        Command::Circuit(CircuitCommand::Check { gates, alphas }) => circuit_check(&gates, &alphas),
        Command::Verify => verify(&run),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
