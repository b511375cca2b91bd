//! Command-line scenario runner: every subcommand is deterministic given the
//! scenario config and seed, and emits CSV/JSON carrying the full effective
//! configuration so runs can be reproduced from the artifact alone.

mod scenario;

use clap::{Parser, Subcommand};
use scenario::Scenario;
use serde::Serialize;
use std::path::PathBuf;
use std::sync::Arc;
use superarrival::oracle::{self, CnSolver, Grid, PotentialSpec};
use superarrival::protocol::{self, Codebook, EveParams, RunConfig};
use superarrival::superarrival::{g17, perturbation_start, sweep_k};
use superarrival::trajectories::{integrate_ensemble, trajectories_csv, EnsembleConfig};
use superarrival::wavepacket::{transmission_curve, DetectorParams};

#[derive(Parser)]
#[command(
    name = "superarrival",
    version,
    about = "Transient parabolic barrier wave packet simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Built-in scenario: fig1 or fig2 (default fig2).
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Full scenario as JSON; unknown keys are rejected.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed for trajectory sampling and detection noise.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Override the detector position x_T.
    #[arg(long = "x-detector", global = true)]
    x_detector: Option<f64>,
    /// Override the deviation threshold eps_dev.
    #[arg(long = "eps-dev", global = true)]
    eps_dev: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Time-resolved transmission CSV: t, T_free, then one column per k.
    Transmission,
    /// k-sweep key table CSV: eta, v_I, onset/crossing times per k.
    Sweep,
    /// Seeded ensemble of classical trajectories as CSV.
    Trajectories {
        /// Number of trajectories.
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Barrier strength (default: median of the scenario k list).
        #[arg(long)]
        k: Option<f64>,
    },
    /// Grid-solver cross-check: JSON report of max |Delta T| and L2 error.
    OracleCompare {
        #[arg(long, default_value_t = -3000.0, allow_negative_numbers = true)]
        x_min: f64,
        #[arg(long, default_value_t = 4000.0, allow_negative_numbers = true)]
        x_max: f64,
        #[arg(long, default_value_t = 16384)]
        grid_n: usize,
        #[arg(long, default_value_t = 0.05)]
        dt: f64,
        /// Barrier strength (omit for the free case).
        #[arg(long)]
        k: Option<f64>,
        /// Number of comparison times, evenly spaced over [t0, t_final].
        #[arg(long, default_value_t = 100)]
        records: usize,
        /// Comparison horizon (default: scenario t_end).
        #[arg(long)]
        t_final: Option<f64>,
    },
    /// Encode a message, simulate detection, decode, run the security check.
    Protocol {
        #[arg(long, default_value_t = 100_000)]
        n_particles: usize,
        /// Comma-separated symbol ids; overrides --message-len.
        #[arg(long)]
        message: Option<String>,
        /// Length of a generated message cycling through the codebook.
        #[arg(long, default_value_t = 20)]
        message_len: usize,
        /// Comma-separated codebook strengths (default: scenario k list).
        #[arg(long)]
        codebook_k: Option<String>,
        /// Switch on the interceptor for every symbol.
        #[arg(long, default_value_t = false)]
        eve: bool,
        #[arg(long, default_value_t = 1.0 / 500.0)]
        eve_k: f64,
        #[arg(long, default_value_t = 250.0)]
        eve_x: f64,
        #[arg(long, default_value_t = 1.0 / 500.0)]
        eve_g: f64,
        #[arg(long, default_value_t = 450.0)]
        eve_t: f64,
        #[arg(long, default_value_t = 0.05)]
        delta_sec: f64,
        /// Readout spacing (default: span/2000).
        #[arg(long)]
        readout_step: Option<f64>,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("--preset and --config are mutually exclusive")]
    PresetAndConfig,
    #[error("cannot read config {0}: {1}")]
    ConfigRead(PathBuf, std::io::Error),
    #[error("config parse error: {0}")]
    ConfigParse(#[from] serde_json::Error),
    #[error(transparent)]
    Scenario(#[from] scenario::ScenarioError),
    #[error("simulation failed: {0}")]
    Run(String),
    #[error("cannot write output: {0}")]
    Write(std::io::Error),
    #[error("bad argument: {0}")]
    BadArg(String),
}

macro_rules! run_err {
    ($e:expr) => {
        $e.map_err(|e| CliError::Run(e.to_string()))
    };
}

fn resolve_scenario(cli: &Cli) -> Result<Scenario, CliError> {
    let mut sc = match (&cli.preset, &cli.config) {
        (Some(_), Some(_)) => return Err(CliError::PresetAndConfig),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::ConfigRead(path.clone(), e))?;
            serde_json::from_str::<Scenario>(&text)?
        }
        (Some(name), None) => Scenario::preset(name)?,
        (None, None) => Scenario::fig2(),
    };
    if let Some(x) = cli.x_detector {
        sc.x_detector = x;
    }
    if let Some(e) = cli.eps_dev {
        sc.eps_dev = e;
    }
    sc.validate()?;
    Ok(sc)
}

/// Header comment block embedded in CSV artifacts: tool version, command
/// name, full scenario and the extra arguments that shaped the run.
fn csv_header(command: &str, sc: &Scenario, args: &impl Serialize) -> String {
    format!(
        "# superarrival {} command={}\n# scenario: {}\n# args: {}\n",
        env!("CARGO_PKG_VERSION"),
        command,
        serde_json::to_string(sc).expect("scenario serializes"),
        serde_json::to_string(args).expect("args serialize"),
    )
}

#[derive(Serialize)]
struct JsonArtifact<A: Serialize, R: Serialize> {
    version: &'static str,
    command: &'static str,
    scenario: Scenario,
    args: A,
    result: R,
}

fn to_json<A: Serialize, R: Serialize>(command: &'static str, sc: &Scenario, args: A, result: R) -> String {
    let artifact = JsonArtifact {
        version: env!("CARGO_PKG_VERSION"),
        command,
        scenario: sc.clone(),
        args,
        result,
    };
    let mut s = serde_json::to_string_pretty(&artifact).expect("artifact serializes");
    s.push('\n');
    s
}

fn sorted_k(sc: &Scenario) -> Vec<f64> {
    let mut ks = sc.k_list.clone();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    ks
}

fn cmd_transmission(sc: &Scenario) -> Result<String, CliError> {
    let ks = sorted_k(sc);
    let det = DetectorParams { x_t: sc.x_detector };
    let grid = sc.t_grid();
    let free_sol = run_err!(superarrival::dynamics::TrajectorySolution::free(sc.params, sc.t_end))?;
    let free = run_err!(transmission_curve(Arc::new(free_sol), det, &grid))?;
    let mut columns = vec![free.values.clone()];
    let mut header = String::from("t,T_free");
    for &k in &ks {
        let sol = run_err!(superarrival::dynamics::evolve_barrier(
            &sc.params,
            &sc.barrier(k),
            sc.t_end,
            sc.ode_tol
        ))?;
        let curve = run_err!(transmission_curve(Arc::new(sol), det, &grid))?;
        columns.push(curve.values.clone());
        header.push_str(&format!(",T_k={}", g17(k)));
    }
    let mut out = csv_header("transmission", sc, &serde_json::json!({ "k_list": ks }));
    out.push_str(&header);
    out.push('\n');
    for (i, &t) in grid.iter().enumerate() {
        out.push_str(&g17(t));
        for col in &columns {
            out.push(',');
            out.push_str(&g17(col[i]));
        }
        out.push('\n');
    }
    Ok(out)
}

fn cmd_sweep(sc: &Scenario) -> Result<String, CliError> {
    let ks = sorted_k(sc);
    let mut out = csv_header("sweep", sc, &serde_json::json!({ "k_list": ks }));
    if ks.is_empty() {
        out.push_str("k,eta,v_I,v_ratio,t_k,t_d,t_c,status\n");
        return Ok(out);
    }
    let table = run_err!(sweep_k(&sc.sweep_scenario(), &ks))?;
    out.push_str(&table.to_csv());
    Ok(out)
}

fn cmd_trajectories(sc: &Scenario, n: usize, k: Option<f64>, seed: u64) -> Result<String, CliError> {
    let k = match k {
        Some(k) => k,
        None => {
            let ks = sorted_k(sc);
            if ks.is_empty() {
                return Err(CliError::BadArg("--k required when the scenario k list is empty".into()));
            }
            ks[ks.len() / 2]
        }
    };
    let cfg = EnsembleConfig { n_traj: n, seed, t_grid: sc.t_grid() };
    let args = serde_json::json!({ "n": n, "k": k, "seed": seed });
    let mut out = csv_header("trajectories", sc, &args);
    if n == 0 {
        out.push_str("traj_id,t,q\n");
        return Ok(out);
    }
    let trajs = run_err!(integrate_ensemble(&sc.params, &sc.barrier(k), &cfg))?;
    out.push_str(&trajectories_csv(&trajs));
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_oracle_compare(
    sc: &Scenario,
    x_min: f64,
    x_max: f64,
    grid_n: usize,
    dt: f64,
    k: Option<f64>,
    records: usize,
    t_final: Option<f64>,
) -> Result<String, CliError> {
    if records < 2 {
        return Err(CliError::BadArg("--records must be at least 2".into()));
    }
    let t_final = t_final.unwrap_or(sc.t_end);
    if !(t_final > sc.params.t0) {
        return Err(CliError::BadArg("--t-final must exceed the scenario t0".into()));
    }
    let grid = run_err!(Grid::new(x_min, x_max, grid_n))?;
    let solver = run_err!(CnSolver::new(grid, &sc.params, dt))?;
    let (sol, pot) = match k {
        None => (
            run_err!(superarrival::dynamics::TrajectorySolution::free(sc.params, t_final))?,
            PotentialSpec::free(),
        ),
        Some(k) => {
            let b = sc.barrier(k);
            (
                run_err!(superarrival::dynamics::evolve_barrier(&sc.params, &b, t_final, sc.ode_tol))?,
                PotentialSpec::barrier(&b),
            )
        }
    };
    let record: Vec<f64> = (0..records)
        .map(|i| sc.params.t0 + (t_final - sc.params.t0) * i as f64 / (records - 1) as f64)
        .collect();
    let run = run_err!(oracle::compare_run(&solver, &sol, &pot, &record, sc.x_detector))?;
    let args = serde_json::json!({
        "x_min": x_min, "x_max": x_max, "grid_n": grid_n, "dt": dt,
        "k": k, "records": records, "t_final": t_final,
    });
    Ok(to_json("oracle-compare", sc, args, run))
}

#[allow(clippy::too_many_arguments)]
fn cmd_protocol(
    sc: &Scenario,
    n_particles: usize,
    message: Option<String>,
    message_len: usize,
    codebook_k: Option<String>,
    eve: Option<EveParams>,
    delta_sec: f64,
    readout_step: Option<f64>,
    seed: u64,
) -> Result<String, CliError> {
    let parse_f64_list = |s: &str| -> Result<Vec<f64>, CliError> {
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| CliError::BadArg(e.to_string())))
            .collect()
    };
    let ks = match &codebook_k {
        Some(s) => parse_f64_list(s)?,
        None => sorted_k(sc),
    };
    let sweep_sc = sc.sweep_scenario();
    let table = run_err!(sweep_k(&sweep_sc, &ks))?;
    let book = run_err!(Codebook::from_key_table(&table, n_particles))?;
    let msg: Vec<usize> = match &message {
        Some(s) => s
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|e| CliError::BadArg(e.to_string())))
            .collect::<Result<_, _>>()?,
        None => (0..message_len).map(|i| i % book.symbols.len()).collect(),
    };
    let span = sc.t_end - sc.params.t0;
    let step = readout_step.unwrap_or(span / 2000.0);
    if !(step > 0.0) {
        return Err(CliError::BadArg("--readout-step must be positive".into()));
    }
    let n_read = (span / step).floor() as usize;
    let readout_times: Vec<f64> = (0..=n_read).map(|i| sc.params.t0 + i as f64 * step).collect();
    let t_k = run_err!(perturbation_start(&sc.barrier(1.0), sc.eps_w))?;
    let cfg = RunConfig {
        n_particles,
        readout_times,
        seed,
        d: sc.x_detector,
        t_k,
        delta_sec,
    };
    let transcript = run_err!(protocol::roundtrip(&sweep_sc, &book, &msg, &cfg, eve.as_ref()))?;
    let args = serde_json::json!({
        "n_particles": n_particles, "message": msg, "codebook_k": ks,
        "eve": eve, "delta_sec": delta_sec, "readout_step": step, "seed": seed,
    });
    Ok(to_json("protocol", sc, args, serde_json::json!({
        "codebook": book,
        "transcript": transcript,
    })))
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let sc = resolve_scenario(cli)?;
    match &cli.command {
        Command::Transmission => cmd_transmission(&sc),
        Command::Sweep => cmd_sweep(&sc),
        Command::Trajectories { n, k } => cmd_trajectories(&sc, *n, *k, cli.seed),
        Command::OracleCompare { x_min, x_max, grid_n, dt, k, records, t_final } => {
            cmd_oracle_compare(&sc, *x_min, *x_max, *grid_n, *dt, *k, *records, *t_final)
        }
        Command::Protocol {
            n_particles,
            message,
            message_len,
            codebook_k,
            eve,
            eve_k,
            eve_x,
            eve_g,
            eve_t,
            delta_sec,
            readout_step,
        } => {
            let eve_params = eve.then_some(EveParams {
                k_e: *eve_k,
                x_e: *eve_x,
                g_e: *eve_g,
                t_e: *eve_t,
            });
            cmd_protocol(
                &sc,
                *n_particles,
                message.clone(),
                *message_len,
                codebook_k.clone(),
                eve_params,
                *delta_sec,
                *readout_step,
                cli.seed,
            )
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            let result = match &cli.out {
                Some(path) => std::fs::write(path, output).map_err(CliError::Write),
                None => {
                    print!("{output}");
                    Ok(())
                }
            };
            if let Err(e) = result {
                eprintln!("error: {e}");
                std::process::exit(1);
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
