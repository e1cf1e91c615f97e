//! Command-line driver: scenario ingestion, solver orchestration and
//! artifact emission for the `retime` toolkit.
//!
//! Exit codes are part of the contract:
//!
//! * `0` — run completed and every check passed;
//! * `1` — I/O or parse failure (unreadable config, syntax error,
//!   unknown keys, unwritable output);
//! * `2` — certificate or precondition violation (invalid scenario,
//!   coupling budget, monotonicity certificate, degenerate seed, …);
//! * `3` — the run completed but at least one verification check failed.
//!
//! Artifacts, all under `--out` (CSV: UTF-8, header row, `.` decimal
//! separator, 17 significant digits, byte-identical across runs of the
//! same config):
//!
//! * `solve` → `<name>-original.csv` with columns
//!   `t, y1…ym, dy1…dym, delay, delay_rate` on the integration mesh,
//!   plus a `<name>-solve.json` envelope;
//! * `transform` → `<name>-map.csv` with `s, alpha, alpha_rate` (seed
//!   window included) and `<name>-transformed.csv` with
//!   `s, z1…zm, dz1…dzm, delay_component, delay_component_rate`, plus
//!   `<name>-transform.json`;
//! * `verify` → `<name>-verify.json` with the full claim-anchored
//!   reports and a flat `<name>-checks.csv` margin table;
//! * `experiment` → `<name>-experiment.json` with the dependence and
//!   map-convergence sweeps.
//!
//! Every JSON envelope is self-describing: it embeds the resolved
//! scenario, its SHA-256 digest, the effective step sizes and the
//! pinned tolerances.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use retime::scenario::{RequestedCheck, Scenario};
use retime::sdd::{integrate, InitialData, Params, SddSolution};
use retime::transform::build_time_map;
use retime::transformed::{integrate_transformed, process_restart_check, TransformedSolution};
use retime::verify::{
    alpha_convergence_experiment, continuous_dependence_experiment, manifold_residual,
    regularity_estimates, stability_transfer_check, verify_equivalence, BoundKind, Check, Claim,
    VerificationReport, EQUIVALENCE_TOLERANCE, RATE_FIT_MIN_R2,
};

/// Sup-distance allowed between a restarted and an uninterrupted march.
pub const RESTART_TOLERANCE: f64 = 1e-8;
/// Residual under which a datum counts as lying on the smooth-start
/// manifold.
pub const MANIFOLD_TOLERANCE: f64 = 1e-6;
/// Perturbation sizes used by the `experiment` sweeps.
pub const EXPERIMENT_DELTAS: [f64; 3] = [1e-2, 1e-3, 1e-4];

#[derive(Parser)]
#[command(name = "retime", version, about = "Delay equations with state-governed delay: solve, transform, verify")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Integrate the original system and write its trajectories.
    Solve(RunArgs),
    /// Build the time map and solve the constant-lag companion system.
    Transform(RunArgs),
    /// Run the scenario's requested verification blocks.
    Verify(VerifyArgs),
    /// Perturbation sweeps: dependence bound and map convergence.
    Experiment(RunArgs),
}

#[derive(Args)]
pub struct RunArgs {
    /// Scenario config document (TOML; unknown keys are rejected).
    pub config: PathBuf,
    /// Output directory for CSV and report artifacts.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Override the direct-solve step from the config.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Override the transformed-solve step from the config.
    #[arg(long)]
    pub ds: Option<f64>,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Testing hook: shift the constructed time map by this offset
    /// before checking, to demonstrate that a corrupted map fails.
    #[arg(long, value_name = "OFFSET")]
    pub corrupt_map: Option<f64>,
}

/// Runs a parsed invocation and returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    let outcome = match cli.command {
        Command::Solve(args) => solve_cmd(&args),
        Command::Transform(args) => transform_cmd(&args),
        Command::Verify(args) => verify_cmd(&args),
        Command::Experiment(args) => experiment_cmd(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Precondition(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

enum Failure {
    Io(String),
    Precondition(String),
}

fn io_failure(context: &str, err: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{context}: {err}"))
}

fn precondition(err: impl std::fmt::Display) -> Failure {
    Failure::Precondition(err.to_string())
}

/// Pinned thresholds, repeated in every envelope so each report is
/// interpretable on its own.
#[derive(Serialize)]
struct Tolerances {
    equivalence: f64,
    restart: f64,
    manifold: f64,
    rate_fit_min_r2: f64,
}

impl Tolerances {
    fn pinned() -> Self {
        Tolerances {
            equivalence: EQUIVALENCE_TOLERANCE,
            restart: RESTART_TOLERANCE,
            manifold: MANIFOLD_TOLERANCE,
            rate_fit_min_r2: RATE_FIT_MIN_R2,
        }
    }
}

#[derive(Serialize)]
struct MapSummary {
    s0: f64,
    t0: f64,
    s_end: f64,
    t_end: f64,
    slope_floor: f64,
    compatibility_residual: f64,
}

#[derive(Serialize)]
struct Envelope<'a> {
    tool: &'static str,
    subcommand: &'static str,
    scenario: &'a Scenario,
    scenario_sha256: String,
    dt: f64,
    ds: f64,
    tolerances: Tolerances,
    artifacts: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    map: Option<MapSummary>,
    reports: Vec<VerificationReport>,
    all_pass: bool,
}

impl<'a> Envelope<'a> {
    fn new(subcommand: &'static str, scenario: &'a Scenario) -> Self {
        Envelope {
            tool: "retime",
            subcommand,
            scenario,
            scenario_sha256: scenario_digest(scenario),
            dt: scenario.dt,
            ds: scenario.ds,
            tolerances: Tolerances::pinned(),
            artifacts: Vec::new(),
            map: None,
            reports: Vec::new(),
            all_pass: true,
        }
    }

    fn push_report(&mut self, mut report: VerificationReport, scenario_name: &str) {
        report.set_scenario(scenario_name);
        self.all_pass &= report.all_pass();
        self.reports.push(report);
    }

    fn write(&self, out_dir: &Path, stem: &str) -> Result<u8, Failure> {
        let path = out_dir.join(format!("{stem}.json"));
        let body = serde_json::to_string_pretty(self).expect("reports serialize");
        write_text(&path, &(body + "\n"))?;
        Ok(if self.all_pass { 0 } else { 3 })
    }
}

/// SHA-256 of the canonical JSON form of the resolved scenario.
fn scenario_digest(scenario: &Scenario) -> String {
    let canonical = serde_json::to_string(scenario).expect("scenario serializes");
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        write!(hex, "{byte:02x}").expect("hex digest");
    }
    hex
}

fn load_scenario(args: &RunArgs) -> Result<Scenario, Failure> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| io_failure(&format!("reading {}", args.config.display()), e))?;
    let mut scenario: Scenario = toml::from_str(&text)
        .map_err(|e| io_failure(&format!("parsing {}", args.config.display()), e))?;
    if let Some(dt) = args.dt {
        scenario.dt = dt;
    }
    if let Some(ds) = args.ds {
        scenario.ds = ds;
    }
    scenario.validate().map_err(precondition)?;
    fs::create_dir_all(&args.out)
        .map_err(|e| io_failure(&format!("creating {}", args.out.display()), e))?;
    Ok(scenario)
}

fn compile(scenario: &Scenario) -> Result<(Params<f64>, InitialData<f64>), Failure> {
    let params = scenario.params().map_err(precondition)?;
    let init = scenario.initial_data(&params).map_err(precondition)?;
    Ok((params, init))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| io_failure(&format!("writing {}", path.display()), e))
}

fn push_row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(out, "{v:.16e}").expect("row format");
    }
    out.push('\n');
}

fn state_header(time: &str, component: &str, dim: usize, tail: &str) -> String {
    let mut header = String::from(time);
    for i in 1..=dim {
        write!(header, ",{component}{i}").expect("header");
    }
    for i in 1..=dim {
        write!(header, ",d{component}{i}").expect("header");
    }
    header.push_str(tail);
    header.push('\n');
    header
}

fn original_csv(sol: &SddSolution<f64>) -> String {
    let dim = sol.state().dim();
    let mut out = state_header("t", "y", dim, ",delay,delay_rate");
    // The delay trajectory spans exactly the integration mesh; the
    // state additionally carries the history window, which is input,
    // not output.
    for t in sol.delay().node_times() {
        let mut row = vec![t];
        row.extend(sol.state().eval(t).expect("node eval"));
        row.extend(sol.state().eval_derivative(t).expect("node eval"));
        row.push(sol.delay().eval_scalar(t).expect("node eval"));
        row.push(sol.delay().eval_derivative_scalar(t).expect("node eval"));
        push_row(&mut out, &row);
    }
    out
}

fn transformed_csv(ts: &TransformedSolution<f64>) -> String {
    let dim = ts.state().dim();
    let mut out = state_header("s", "z", dim, ",delay_component,delay_component_rate");
    for s in ts.delay().node_times() {
        let mut row = vec![s];
        row.extend(ts.state().eval(s).expect("node eval"));
        row.extend(ts.state().eval_derivative(s).expect("node eval"));
        row.push(ts.delay().eval_scalar(s).expect("node eval"));
        row.push(ts.delay().eval_derivative_scalar(s).expect("node eval"));
        push_row(&mut out, &row);
    }
    out
}

fn map_csv(map: &retime::transform::TimeMap<f64>) -> String {
    let mut out = String::from("s,alpha,alpha_rate\n");
    for s in map.as_monotone().trajectory().node_times() {
        let row = [s, map.to_original(s).expect("node eval"), map.rate(s).expect("node eval")];
        push_row(&mut out, &row);
    }
    out
}

fn map_summary(map: &retime::transform::TimeMap<f64>) -> MapSummary {
    MapSummary {
        s0: map.s0(),
        t0: map.t0(),
        s_end: map.s_end(),
        t_end: map.to_original(map.s_end()).expect("map endpoint"),
        slope_floor: map.as_monotone().slope_floor(),
        compatibility_residual: map.compatibility_residual(),
    }
}

fn checks_csv(reports: &[VerificationReport]) -> String {
    let mut out = String::from("report,claim,label,bound,observed,threshold,pass\n");
    for report in reports {
        for check in &report.checks {
            let bound = match check.bound {
                BoundKind::AtMost => "at-most",
                BoundKind::AtLeast => "at-least",
            };
            writeln!(
                out,
                "{},{},\"{}\",{},{:.16e},{:.16e},{}",
                report.experiment,
                check.claim.id(),
                check.label.replace('"', "\"\""),
                bound,
                check.observed,
                check.threshold,
                check.pass
            )
            .expect("row format");
        }
    }
    out
}

fn solve_cmd(args: &RunArgs) -> Result<u8, Failure> {
    let scenario = load_scenario(args)?;
    let (params, init) = compile(&scenario)?;
    let sol = integrate(&params, &init, scenario.t_end, scenario.dt).map_err(precondition)?;
    let csv_name = format!("{}-original.csv", scenario.name);
    write_text(&args.out.join(&csv_name), &original_csv(&sol))?;
    let mut envelope = Envelope::new("solve", &scenario);
    envelope.artifacts.push(csv_name);
    envelope.write(&args.out, &format!("{}-solve", scenario.name))
}

fn transform_cmd(args: &RunArgs) -> Result<u8, Failure> {
    let scenario = load_scenario(args)?;
    let (params, init) = compile(&scenario)?;
    let seed = scenario.seed(&params, &init).map_err(precondition)?;
    let sol = integrate(&params, &init, scenario.t_end, scenario.dt).map_err(precondition)?;
    let map = build_time_map(&sol, &seed, scenario.s_end, scenario.ds).map_err(precondition)?;
    let ts = integrate_transformed(&params, &init, &seed, scenario.s_end - scenario.s0, scenario.ds)
        .map_err(precondition)?;

    let map_name = format!("{}-map.csv", scenario.name);
    let ts_name = format!("{}-transformed.csv", scenario.name);
    write_text(&args.out.join(&map_name), &map_csv(&map))?;
    write_text(&args.out.join(&ts_name), &transformed_csv(&ts))?;
    let mut envelope = Envelope::new("transform", &scenario);
    envelope.artifacts.push(map_name);
    envelope.artifacts.push(ts_name);
    envelope.map = Some(map_summary(&map));
    envelope.write(&args.out, &format!("{}-transform", scenario.name))
}

fn verify_cmd(args: &VerifyArgs) -> Result<u8, Failure> {
    let scenario = load_scenario(&args.run)?;
    let (params, init) = compile(&scenario)?;
    let mut envelope = Envelope::new("verify", &scenario);

    // Everything requested shares one direct solve and one transformed
    // march. A zero initial delay admits no seed window, so scenarios
    // declaring an empty check list stay solve-free here as well.
    if !scenario.checks.is_empty() {
        let seed = scenario.seed(&params, &init).map_err(precondition)?;
        let sol = integrate(&params, &init, scenario.t_end, scenario.dt).map_err(precondition)?;
        let mut ts = integrate_transformed(&params, &init, &seed, scenario.s_end - scenario.s0, scenario.ds)
            .map_err(precondition)?;
        if let Some(offset) = args.corrupt_map {
            ts = ts.with_alpha_shifted(offset).map_err(precondition)?;
        }

        for check in scenario.requested_checks() {
            let report = match check {
                RequestedCheck::Equivalence => verify_equivalence(&sol, &ts, 1000).map_err(precondition)?,
                RequestedCheck::Regularity => regularity_estimates(ts.alpha()).map_err(precondition)?,
                RequestedCheck::Stability => stability_transfer_check(&sol, &ts).map_err(precondition)?,
                RequestedCheck::Restart => {
                    let steps = ((scenario.s_end - scenario.s0) / scenario.ds).round() as usize;
                    if steps < 2 {
                        return Err(Failure::Precondition(
                            "horizon too short for a mid-course restart".into(),
                        ));
                    }
                    let s_mid = scenario.s0 + (steps / 2) as f64 * scenario.ds;
                    let restart =
                        process_restart_check(&params, &init, &seed, s_mid, scenario.s_end - scenario.s0, scenario.ds)
                            .map_err(precondition)?;
                    let mut report = VerificationReport::new("process-restart");
                    report.checks.push(Check::at_most(
                        Claim::ProcessRestart,
                        format!("restart at s = {s_mid} reproduces the march"),
                        restart.max_distance(),
                        RESTART_TOLERANCE,
                    ));
                    report
                }
                RequestedCheck::Manifold => {
                    let residual = manifold_residual(&params, &init).map_err(precondition)?;
                    let mut report = VerificationReport::new("smooth-start-manifold");
                    report.checks.push(Check::at_most(
                        Claim::ManifoldResidual,
                        "datum distance from the smooth-start manifold",
                        residual,
                        MANIFOLD_TOLERANCE,
                    ));
                    report
                }
            };
            envelope.push_report(report, &scenario.name);
        }
    }

    let checks_name = format!("{}-checks.csv", scenario.name);
    write_text(&args.run.out.join(&checks_name), &checks_csv(&envelope.reports))?;
    envelope.artifacts.push(checks_name);
    envelope.write(&args.run.out, &format!("{}-verify", scenario.name))
}

fn experiment_cmd(args: &RunArgs) -> Result<u8, Failure> {
    let scenario = load_scenario(args)?;
    let (params, init) = compile(&scenario)?;
    let seed = scenario.seed(&params, &init).map_err(precondition)?;
    let t_span = (scenario.t_end - scenario.t0).min(2.0);
    let s_span = (scenario.s_end - scenario.s0).min(4.0);

    // Independent sweeps on worker threads; the merge order is fixed, so
    // the emitted report is deterministic regardless of scheduling.
    let (dependence, convergence) = std::thread::scope(|scope| {
        let dependence = scope.spawn(|| {
            continuous_dependence_experiment(&params, &init, &EXPERIMENT_DELTAS, scenario.t0 + t_span, scenario.dt)
        });
        let convergence = scope.spawn(|| {
            alpha_convergence_experiment(&params, &init, &seed, &EXPERIMENT_DELTAS, s_span, scenario.dt)
        });
        (dependence.join(), convergence.join())
    });
    let dependence = dependence.expect("dependence worker panicked").map_err(precondition)?;
    let convergence = convergence.expect("convergence worker panicked").map_err(precondition)?;

    let mut envelope = Envelope::new("experiment", &scenario);
    envelope.push_report(dependence, &scenario.name);
    envelope.push_report(convergence, &scenario.name);
    envelope.write(&args.out, &format!("{}-experiment", scenario.name))
}
