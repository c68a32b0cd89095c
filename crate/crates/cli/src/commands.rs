use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use cpm_core::checks::{self, CheckReport};
use cpm_core::game::make_normal_form_spec;
use cpm_core::{metrics, CpmError, NormalFormGame, ProximalSetup, RunTrace};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::args::{BenchArgs, Cli, Command, RunArgs, VerifyArgs};
use crate::error::{CliError, Result};
use crate::solvers::{run_solver, InnerModeArg, SolverKind};
use crate::summary::summarize;
use crate::trace_csv;

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => run(&args),
        Command::Bench(args) => bench(&args),
        Command::Verify(args) => verify(&args),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

fn write_trace(out: Option<&Path>, game: &NormalFormGame, trace: &RunTrace, cadence: usize) -> Result<()> {
    let rows = trace_csv::rows(trace, game, cadence)?;
    match out {
        Some(path) => trace_csv::write_rows(create(path)?, game.num_players(), &rows),
        None => trace_csv::write_rows(io::stdout().lock(), game.num_players(), &rows),
    }
}

pub fn run(args: &RunArgs) -> Result<()> {
    if args.cadence == 0 {
        return Err(CliError::Usage("--cadence must be at least 1".into()));
    }
    let game = args.source.load()?;
    let trace = match run_solver(&game, args.solver, &args.solver_args.options(true)) {
        Ok(trace) => trace,
        Err(CliError::Solver(CpmError::Convergence(failure))) => {
            // keep whatever completed before the failing step
            if let (Some(partial), Some(out)) = (&failure.partial_trace, &args.out) {
                write_trace(Some(out), &game, partial, args.cadence)?;
            }
            return Err(CliError::Solver(CpmError::Convergence(failure)));
        }
        Err(e) => return Err(e),
    };
    if trace.eta_clamped() {
        eprintln!("warning: step size {} exceeds 1/(2L); using {}", trace.eta_requested, trace.eta);
    }
    write_trace(args.out.as_deref(), &game, &trace, args.cadence)?;
    let summary = serde_json::to_string_pretty(&summarize(&game, args.solver, &trace)?).expect("summary serializes");
    match &args.out {
        Some(out) => {
            let path = summary_path(out);
            std::fs::write(&path, format!("{summary}\n")).map_err(|e| CliError::io(&path, e))?;
            println!("{summary}");
        }
        None => eprintln!("{summary}"),
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub solver: SolverKind,
    pub eps: f64,
    pub iterations: usize,
    pub prox_evals: usize,
    pub reached: bool,
}

/// First horizon whose CCE gap is at most each target, with the prox
/// evaluations spent up to it. Unreached targets report the whole run.
pub fn bench_rows(game: &NormalFormGame, solver: SolverKind, trace: &RunTrace, grid: &[f64]) -> Result<Vec<BenchRow>> {
    let mut gaps = Vec::with_capacity(trace.len());
    let mut spent = Vec::with_capacity(trace.len());
    let mut total = 0;
    for it in trace.iterates() {
        total += it.prox_evaluations;
        spent.push(total);
        gaps.push(metrics::cce_gap(trace, game, it.t)?);
    }
    Ok(grid
        .iter()
        .map(|&eps| match gaps.iter().position(|&g| g <= eps) {
            Some(k) => BenchRow { solver, eps, iterations: k + 1, prox_evals: spent[k], reached: true },
            None => BenchRow { solver, eps, iterations: trace.len(), prox_evals: total, reached: false },
        })
        .collect())
}

pub fn bench(args: &BenchArgs) -> Result<()> {
    if args.solvers.is_empty() {
        return Err(CliError::Usage("bench needs at least one solver".into()));
    }
    if args.eps_grid.is_empty() || args.eps_grid.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(CliError::Usage("--eps-grid needs positive targets".into()));
    }
    let game = args.source.load()?;
    let opts = args.solver_args.options(true);
    let traces = std::thread::scope(|scope| {
        let handles: Vec<_> = args
            .solvers
            .iter()
            .map(|&solver| {
                let (game, opts) = (&game, &opts);
                scope.spawn(move || run_solver(game, solver, opts))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect::<Vec<_>>()
    });
    let mut rows = Vec::new();
    for (&solver, trace) in args.solvers.iter().zip(traces) {
        rows.extend(bench_rows(&game, solver, &trace?, &args.eps_grid)?);
    }
    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["solver", "eps", "iterations", "prox_evals", "reached"])?;
    for r in &rows {
        w.write_record([
            r.solver.name().to_string(),
            trace_csv::format_real(r.eps),
            r.iterations.to_string(),
            r.prox_evals.to_string(),
            r.reached.to_string(),
        ])?;
    }
    w.flush().map_err(|e| CliError::Input(format!("cannot write bench table: {e}")))?;
    Ok(())
}

fn print_report(r: &CheckReport) {
    let worst = if r.evaluated == 0 { "n/a".to_string() } else { format!("{:.3e}", r.worst_excess) };
    println!(
        "{}  {:<32} evaluated {:>8}  worst excess {:>10}  {}",
        if r.passed { "PASS" } else { "FAIL" },
        r.name,
        r.evaluated,
        worst,
        r.detail
    );
}

/// Runs the property checks and returns them in print order.
pub fn verify_reports(game: &NormalFormGame, args: &VerifyArgs) -> Result<Vec<CheckReport>> {
    if !args.solver.is_prox_method() {
        return Err(CliError::Usage(format!(
            "verify checks the prox-method guarantees; {} is not one of cpm, cpm-decentralized, cmwu",
            args.solver
        )));
    }
    let spec = make_normal_form_spec(game.clone());
    let setup = ProximalSetup::for_spec(&spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut reports = Vec::new();

    let (bound, lip) = checks::operator_constants(&setup, &spec, args.samples, &mut rng)?;
    reports.push(bound);
    reports.push(lip);
    reports.push(checks::prox_lipschitz(&setup, args.samples, 1e-9, &mut rng)?);
    reports.push(checks::three_point(&setup, args.samples, 1e-9, &mut rng)?);
    reports.push(checks::strong_convexity(&setup, args.samples, 1e-9, &mut rng)?);

    // the requested step is used as is, so a bad step shows up as a failure
    let trace = match run_solver(game, args.solver, &args.solver_args.options(false)) {
        Ok(trace) => trace,
        Err(CliError::Solver(CpmError::Convergence(failure))) => {
            reports.push(CheckReport {
                name: "inner solve".into(),
                passed: false,
                evaluated: failure.iterations,
                violations: 1,
                worst_excess: failure.residual - failure.tolerance,
                detail: format!(
                    "outer step {}: residual {:.3e} above tolerance {:.3e} after {} applications",
                    failure.outer, failure.residual, failure.tolerance, failure.iterations
                ),
            });
            failure.partial_trace.unwrap_or_else(|| {
                RunTrace::new(cpm_core::trace::Algorithm::Cpm, setup.domains().to_vec(), 0.0, 0.0, setup.center_point())
            })
        }
        Err(e) => return Err(e),
    };
    reports.push(checks::contraction(&trace, spec.lipschitz(), 1e-9));
    if args.solver == SolverKind::Cpm && args.solver_args.inner_mode == InnerModeArg::Residual {
        reports.push(checks::inner_iteration_count(&setup, &trace));
    }
    reports.push(checks::per_iteration_inequality(&setup, &spec, &trace, args.comparators, 1e-7, &mut rng)?);
    reports.push(checks::regret_bound(&setup, &spec, &trace, 1e-6)?);
    Ok(reports)
}

pub fn verify(args: &VerifyArgs) -> Result<()> {
    let game = args.source.load()?;
    let reports = verify_reports(&game, args)?;
    for r in &reports {
        print_report(r);
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}
