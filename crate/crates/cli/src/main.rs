use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{ensure, Result};
use clap::{Args, Parser, Subcommand};
use collapse_lab::acceptance;
use collapse_lab::chain::{
    interference_readout, rho_superposed, run_collapse, run_linear, run_trajectories,
    write_outcome_csv, ChainOutcome, ChainSpec, CollapseMode, OutcomeRow, OUT_A, OUT_B,
};
use collapse_lab::decoherence::{
    attach_bath, decohered_output, fapp_report, write_sweep_csv, BathMode, BathModel,
};
use collapse_lab::eraser::{
    coincidence_histogram, curve_points, fringe_metrics, no_signaling_check, sample_events,
    write_curve_csv, write_events_csv, write_histogram_csv, EraserParams, SetupKind,
};
use collapse_lab::linalg::max_abs_diff;
use collapse_lab::metrics::{purity, trace_distance};
use serde::Serialize;

mod config;
mod output;

use config::{ChainSettings, Common, DecohereSettings, EraserSettings, FileConfig, Format};
use output::{prepare_dir, Artifacts};

#[derive(Parser)]
#[command(
    name = "collapse-lab",
    version,
    about = "Quantum eraser, measurement chain and bath decoherence simulations"
)]
struct Cli {
    /// JSON file with run settings; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, env = "COLLAPSE_LAB_SEED")]
    seed: Option<u64>,
    /// Output directory [default: out]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Format of tabular outputs [default: csv]
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a delayed-choice eraser run and reconstruct its fringes
    Eraser(EraserArgs),
    /// Run the measurement chain with linear and collapse dynamics
    Chain(ChainArgs),
    /// Attach a qubit bath to the chain and find when it hides the difference
    Decohere(DecohereArgs),
    /// Run the acceptance criteria and print PASS/FAIL for each
    Check(CheckArgs),
}

#[derive(Args)]
struct EraserArgs {
    /// whichpath or eraser
    #[arg(long)]
    setup: Option<SetupKind>,
    #[arg(long)]
    events: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    window_ns: Option<f64>,
}

#[derive(Args)]
struct ChainArgs {
    /// Overlap of the observer's and box's branch states after reset
    #[arg(long)]
    epsilon: Option<f64>,
    /// Step after which the observer is measured (1, 2 or 3)
    #[arg(long)]
    collapse_point: Option<usize>,
    /// Number of sampled collapse trajectories (0 to skip)
    #[arg(long)]
    trajectories: Option<usize>,
}

#[derive(Args)]
struct DecohereArgs {
    /// Per-qubit branch rotation angle
    #[arg(long)]
    theta: Option<f64>,
    /// Bath size for a single decohered run
    #[arg(long)]
    n: Option<usize>,
    /// Trace distance the bath must reach
    #[arg(long)]
    target: Option<f64>,
    /// analytic or full-tensor
    #[arg(long, value_parser = parse_mode)]
    mode: Option<BathMode>,
}

#[derive(Args)]
struct CheckArgs {
    /// Comma-separated criterion numbers [default: all]
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<u8>,
}

fn parse_mode(s: &str) -> std::result::Result<BathMode, String> {
    match s {
        "analytic" => Ok(BathMode::Analytic),
        "full-tensor" => Ok(BathMode::FullTensor),
        other => Err(format!(
            "unknown mode {other:?} (expected analytic or full-tensor)"
        )),
    }
}

/// Seed used by `check` when none is given.
const CHECK_SEED: u64 = 20_240_601;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let common = config::merge_common(cli.seed, cli.out, cli.format, &file);
    match cli.command {
        Command::Eraser(a) => eraser(&common, a, &file),
        Command::Chain(a) => chain(&common, a, &file),
        Command::Decohere(a) => decohere(&common, a, &file),
        Command::Check(a) => check(&common, a),
    }
}

fn report_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

#[derive(Serialize)]
struct NoSignalingSummary {
    reference_setup: SetupKind,
    reference_seed: u64,
    statistic: f64,
    p_value: f64,
    consistent: bool,
}

#[derive(Serialize)]
struct EraserMetrics {
    seed: u64,
    setup: SetupKind,
    events: usize,
    params: EraserParams,
    window_ns: f64,
    accepted: u64,
    visibility_d3: f64,
    visibility_d4: f64,
    visibility_combined: f64,
    phase_d3: f64,
    phase_d4: f64,
    relative_phase: f64,
    no_signaling: NoSignalingSummary,
}

fn eraser(common: &Common, a: EraserArgs, file: &FileConfig) -> Result<ExitCode> {
    let d = EraserSettings::defaults();
    let f = &file.eraser;
    let s = EraserSettings {
        setup: a.setup.or(f.setup).unwrap_or(d.setup),
        events: a.events.or(f.events).unwrap_or(d.events),
        alpha: a.alpha.or(f.alpha).unwrap_or(d.alpha),
        beta: a.beta.or(f.beta).unwrap_or(d.beta),
        bins: a.bins.or(f.bins).unwrap_or(d.bins),
        window_ns: a.window_ns.or(f.window_ns).unwrap_or(d.window_ns),
        x_range: (
            f.x_min.unwrap_or(d.x_range.0),
            f.x_max.unwrap_or(d.x_range.1),
        ),
    };
    // everything is validated before sampling starts
    let seed = common.require_seed("eraser")?;
    let params = EraserParams::new(s.alpha, s.beta, s.x_range, s.bins)?;
    ensure!(s.events >= 1, "--events must be at least 1");
    ensure!(
        s.window_ns > 0.0,
        "--window-ns must be positive, got {}",
        s.window_ns
    );
    ensure!(
        s.beta > 0.0,
        "--beta must be positive for the fringe fit, got {}",
        s.beta
    );
    prepare_dir(&common.out)?;

    let stream = sample_events(s.events, s.setup, &params, seed)?;
    let hist = coincidence_histogram(&stream.events, s.window_ns, &params)?;
    let fringes = fringe_metrics(&hist, &params)?;
    let reference_setup = match s.setup {
        SetupKind::Eraser => SetupKind::WhichPath,
        SetupKind::WhichPath => SetupKind::Eraser,
    };
    let reference_seed = seed.wrapping_add(1);
    let reference = sample_events(s.events, reference_setup, &params, reference_seed)?;
    let ns = no_signaling_check(&stream, &reference)?;

    let metrics = EraserMetrics {
        seed,
        setup: s.setup,
        events: s.events,
        params,
        window_ns: s.window_ns,
        accepted: hist.accepted(),
        visibility_d3: fringes.d3.visibility,
        visibility_d4: fringes.d4.visibility,
        visibility_combined: fringes.combined.visibility,
        phase_d3: fringes.d3.phase,
        phase_d4: fringes.d4.phase,
        relative_phase: fringes.relative_phase,
        no_signaling: NoSignalingSummary {
            reference_setup,
            reference_seed,
            statistic: ns.ks.statistic,
            p_value: ns.ks.p_value,
            consistent: ns.consistent,
        },
    };
    let mut out = Artifacts::default();
    match common.format {
        Format::Csv => {
            out.add_csv("events.csv", |w| write_events_csv(w, &stream.events))?;
            out.add_csv("histogram.csv", |w| write_histogram_csv(w, &hist))?;
            out.add_csv("curve.csv", |w| write_curve_csv(w, &params))?;
        }
        Format::Json => {
            out.add_json("events.json", &stream.events)?;
            out.add_json("histogram.json", &hist)?;
            out.add_json("curve.json", &curve_points(&params)?)?;
        }
    }
    out.add_json("metrics.json", &metrics)?;
    report_written(&out.commit(&common.out)?);
    println!(
        "V(D3) {:.4}  V(D4) {:.4}  V(all) {:.4}  relative phase {:.4}  no-signaling p {:.3}",
        metrics.visibility_d3,
        metrics.visibility_d4,
        metrics.visibility_combined,
        metrics.relative_phase,
        metrics.no_signaling.p_value
    );
    Ok(ExitCode::SUCCESS)
}

/// Reset overlaps always included in the chain outcome table.
const SWEEP_OVERLAPS: [f64; 6] = [0.0, 0.25, 0.5, 0.75, 0.9, 1.0];

fn outcome_row(
    dynamics: &str,
    epsilon: f64,
    out: &ChainOutcome,
    linear: &ChainOutcome,
) -> Result<OutcomeRow> {
    Ok(OutcomeRow {
        dynamics: dynamics.into(),
        epsilon,
        purity: out.purity,
        coherence: out.coherence,
        visibility: interference_readout(out)?,
        trace_distance_vs_linear: trace_distance(&out.rho_out, &linear.rho_out)?,
    })
}

#[derive(Serialize)]
struct TrajectorySummary {
    runs: usize,
    seed: u64,
    a_prime_frequency: f64,
    trace_distance_to_channel: f64,
}

#[derive(Serialize)]
struct ChainReport {
    epsilon: f64,
    collapse_point: usize,
    rows: Vec<OutcomeRow>,
    linear_output: collapse_lab::state::DensityMatrix,
    collapse_output: collapse_lab::state::DensityMatrix,
    trajectories: Option<TrajectorySummary>,
}

fn chain(common: &Common, a: ChainArgs, file: &FileConfig) -> Result<ExitCode> {
    let f = &file.chain;
    let s = ChainSettings {
        epsilon: a.epsilon.or(f.epsilon).unwrap_or(1.0),
        collapse_point: a.collapse_point.or(f.collapse_point).unwrap_or(1),
        trajectories: a.trajectories.or(f.trajectories).unwrap_or(0),
    };
    let spec = ChainSpec::standard(s.epsilon)?.with_collapse_point(s.collapse_point)?;
    let seed = if s.trajectories > 0 {
        Some(common.require_seed("chain --trajectories")?)
    } else {
        None
    };
    prepare_dir(&common.out)?;

    let input = rho_superposed();
    let linear = run_linear(&spec, &input)?;
    let channel = run_collapse(&spec, &input, CollapseMode::Channel, 0)?;
    let mut rows = vec![
        outcome_row("linear", s.epsilon, &linear, &linear)?,
        outcome_row("collapse", s.epsilon, &channel, &linear)?,
    ];
    let mut trajectories = None;
    if let Some(seed) = seed {
        let ens = run_trajectories(&spec, &input, s.trajectories, seed)?;
        let rho = ens.mean_output.clone();
        let mean = ChainOutcome {
            purity: purity(&rho),
            coherence: rho.entry(OUT_A, OUT_B).norm(),
            rho_out: rho,
            full_state: None,
            trajectory_record: None,
        };
        rows.push(outcome_row("trajectory", s.epsilon, &mean, &linear)?);
        trajectories = Some(TrajectorySummary {
            runs: s.trajectories,
            seed,
            a_prime_frequency: ens.a_prime_frequency,
            trace_distance_to_channel: trace_distance(&ens.mean_output, &channel.rho_out)?,
        });
    }
    for eps in SWEEP_OVERLAPS.into_iter().filter(|&e| e != s.epsilon) {
        let sp = spec.with_reset_overlap(eps)?;
        let l = run_linear(&sp, &input)?;
        let k = run_collapse(&sp, &input, CollapseMode::Channel, 0)?;
        rows.push(outcome_row("linear", eps, &l, &l)?);
        rows.push(outcome_row("collapse", eps, &k, &l)?);
    }

    let report = ChainReport {
        epsilon: s.epsilon,
        collapse_point: s.collapse_point,
        rows: rows.clone(),
        linear_output: linear.rho_out.clone(),
        collapse_output: channel.rho_out.clone(),
        trajectories,
    };
    let mut out = Artifacts::default();
    match common.format {
        Format::Csv => out.add_csv("outcome.csv", |w| write_outcome_csv(w, &rows))?,
        Format::Json => out.add_json("outcome.json", &rows)?,
    }
    out.add_json("report.json", &report)?;
    report_written(&out.commit(&common.out)?);
    for r in rows.iter().filter(|r| r.epsilon == s.epsilon) {
        println!(
            "{:<10} ε={:<5} purity {:.6}  coherence {:.6}  V {:.4}  distance to linear {:.6}",
            r.dynamics, r.epsilon, r.purity, r.coherence, r.visibility, r.trace_distance_vs_linear
        );
    }
    if let Some(t) = &report.trajectories {
        println!(
            "A' frequency {:.4} over {} trajectories",
            t.a_prime_frequency, t.runs
        );
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct BathRun {
    n: usize,
    theta: f64,
    mode: BathMode,
    coherence: f64,
    trace_distance_to_collapse: f64,
    /// Largest entrywise difference from the analytic formula (full-tensor runs only).
    analytic_agreement: Option<f64>,
}

#[derive(Serialize)]
struct DecohereReport {
    #[serde(flatten)]
    fapp: FappSummary,
    run: Option<BathRun>,
}

#[derive(Serialize)]
struct FappSummary {
    theta: f64,
    target: f64,
    minimal_n: usize,
    distance_at_minimal_n: f64,
    overlap_sign: f64,
}

fn decohere(common: &Common, a: DecohereArgs, file: &FileConfig) -> Result<ExitCode> {
    let f = &file.decohere;
    let s = DecohereSettings {
        theta: a.theta.or(f.theta).unwrap_or(0.2),
        n: a.n.or(f.n),
        target: a.target.or(f.target).unwrap_or(1e-6),
        mode: a.mode.or(f.mode).unwrap_or(BathMode::Analytic),
    };
    let spec = ChainSpec::default();
    let bath = match s.n {
        Some(n) => Some(BathModel::new(n, s.theta, s.mode)?),
        None => {
            ensure!(s.mode == BathMode::Analytic, "--mode full-tensor needs --n");
            None
        }
    };
    prepare_dir(&common.out)?;

    let fapp = fapp_report(&spec, s.theta, s.target)?;
    let input = rho_superposed();
    let run = match bath {
        Some(b) => {
            let out = decohered_output(&spec, &b, &input)?;
            let collapse = run_collapse(&spec, &input, CollapseMode::Channel, 0)?;
            let analytic_agreement = if b.mode == BathMode::FullTensor {
                let analytic = attach_bath(&run_linear(&spec, &input)?, &b)?;
                Some(max_abs_diff(
                    analytic.rho_out.matrix(),
                    out.rho_out.matrix(),
                ))
            } else {
                None
            };
            Some(BathRun {
                n: b.n,
                theta: b.theta,
                mode: b.mode,
                coherence: out.coherence,
                trace_distance_to_collapse: trace_distance(&out.rho_out, &collapse.rho_out)?,
                analytic_agreement,
            })
        }
        None => None,
    };
    let report = DecohereReport {
        fapp: FappSummary {
            theta: fapp.theta,
            target: fapp.target,
            minimal_n: fapp.minimal_n,
            distance_at_minimal_n: fapp.distance_at_minimal_n,
            overlap_sign: fapp.overlap_sign,
        },
        run,
    };
    let mut out = Artifacts::default();
    match common.format {
        Format::Csv => out.add_csv("sweep.csv", |w| write_sweep_csv(w, &fapp.sweep))?,
        Format::Json => out.add_json("sweep.json", &fapp.sweep)?,
    }
    out.add_json("fapp.json", &report)?;
    report_written(&out.commit(&common.out)?);
    println!(
        "minimal n {} (distance {:.3e} < {})",
        fapp.minimal_n, fapp.distance_at_minimal_n, fapp.target
    );
    if let Some(r) = &report.run {
        print!(
            "n={} θ={}: coherence {:.6e}, distance to collapse {:.6e}",
            r.n, r.theta, r.coherence, r.trace_distance_to_collapse
        );
        match r.analytic_agreement {
            Some(d) => println!(", agreement with analytic {d:.1e}"),
            None => println!(),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn check(common: &Common, a: CheckArgs) -> Result<ExitCode> {
    let selected = if a.criteria.is_empty() {
        acceptance::ALL.to_vec()
    } else {
        a.criteria
    };
    for &id in &selected {
        ensure!(
            acceptance::ALL.contains(&id),
            "no criterion {id} (expected 1-10)"
        );
    }
    let seed = common.seed.unwrap_or(CHECK_SEED);
    let reports = acceptance::run(&selected, seed);
    for r in &reports {
        println!("{r}");
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    println!(
        "{passed} of {} criteria passed (seed {seed})",
        reports.len()
    );
    Ok(if passed == reports.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
