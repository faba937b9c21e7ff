//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use reachvox::reachability::StepSchedule;
use reachvox::scenario::{precompute_all, MapSet, Scenario, WorkpieceConfig};
use reachvox::store::{read_map_set, write_map_set};

use crate::api::IkCheckRequest;
use crate::oracle::run_oracle;
use crate::service::{ik_check, serve, AppState};

/// Agreement below this percentage fails `reachvox oracle`.
pub const ORACLE_PASS_PERCENT: f64 = 99.0;

#[derive(Debug, Parser)]
#[command(name = "reachvox", version, about = "Voxel reachability maps for a robot arm around a crane-hung workpiece")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep every crane configuration and write a map-set file.
    Compute {
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a per-configuration table of a map-set file.
    Stats {
        #[arg(long)]
        maps: PathBuf,
    },
    /// Compare the pruned sweep with the dense reference sweep.
    Oracle {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Limit to one rotation index.
        #[arg(long)]
        rot: Option<u32>,
        /// Limit to one height index.
        #[arg(long)]
        height: Option<u32>,
    },
    /// Serve the HTTP API and the viewer.
    Serve {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        maps: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Directory with the built viewer, served under `/`.
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
    /// Run a single IK and collision check and print the verdict as JSON.
    IkCheck {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_parser = parse_point)]
        target: [f64; 3],
        #[arg(long, default_value_t = 0)]
        rot: u32,
        #[arg(long, default_value_t = 0)]
        height: u32,
    },
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Worker threads; defaults to REACHVOX_THREADS or the core count.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Per-joint step schedule in degrees, e.g. 30,20,12,10,8.
    #[arg(long, value_delimiter = ',')]
    pub steps: Option<Vec<f64>>,
    #[arg(long)]
    pub voxel_size: Option<f64>,
    #[arg(long)]
    pub band: Option<f64>,
}

fn parse_point(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got {s:?}"));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.trim().parse().map_err(|e| format!("{p:?}: {e}"))?;
    }
    Ok(out)
}

/// Failure of a subcommand, split by who is at fault.
#[derive(Debug)]
pub enum Failure {
    User(String),
    Internal(String),
}

impl From<reachvox::Error> for Failure {
    fn from(e: reachvox::Error) -> Self {
        if e.is_user_error() {
            Failure::User(e.to_string())
        } else {
            Failure::Internal(e.to_string())
        }
    }
}

pub fn default_threads() -> usize {
    std::env::var("REACHVOX_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

impl SweepArgs {
    fn threads(&self) -> Result<usize, Failure> {
        match self.threads {
            Some(0) => Err(Failure::User("--threads must be at least 1".into())),
            Some(n) => Ok(n),
            None => Ok(default_threads()),
        }
    }

    fn load(&self) -> Result<Scenario, Failure> {
        let scenario = Scenario::load(&self.scenario)?;
        let schedule = self.steps.clone().map(StepSchedule::new).transpose()?;
        Ok(scenario.with_overrides(schedule, self.voxel_size, self.band)?)
    }
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut out = std::io::stdout().lock();
    match execute(cli.command, &mut out) {
        Ok(code) => code,
        Err(Failure::User(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure::Internal(format!("writing output: {e}"))
}

fn execute(command: Command, out: &mut impl Write) -> Result<ExitCode, Failure> {
    match command {
        Command::Compute { sweep, out: path } => {
            let threads = sweep.threads()?;
            let scenario = sweep.load()?;
            compute(&scenario, threads, &path, out)?;
        }
        Command::Stats { maps } => {
            let set = read_map_set(&maps)?;
            stats(&set, out).map_err(io_failure)?;
        }
        Command::Oracle { sweep, rot, height } => {
            let threads = sweep.threads()?;
            let scenario = sweep.load()?;
            let configs: Vec<WorkpieceConfig> = scenario
                .crane
                .configs()
                .filter(|c| rot.is_none_or(|r| r == c.rot_index) && height.is_none_or(|h| h == c.height_index))
                .collect();
            if configs.is_empty() {
                return Err(Failure::User("no crane configuration matches --rot/--height".into()));
            }
            return oracle(&scenario, threads, &configs, out);
        }
        Command::Serve {
            scenario,
            maps,
            port,
            static_dir,
        } => {
            let scenario = Scenario::load(&scenario)?;
            let set = read_map_set(&maps)?;
            let state = AppState::new(scenario, set)?;
            let runtime = tokio::runtime::Runtime::new()
                .map_err(|e| Failure::Internal(format!("starting runtime: {e}")))?;
            runtime
                .block_on(serve(state, port, static_dir))
                .map_err(|e| Failure::User(format!("serving on port {port}: {e}")))?;
        }
        Command::IkCheck {
            scenario,
            target,
            rot,
            height,
        } => {
            let scenario = Scenario::load(&scenario)?;
            let req = IkCheckRequest {
                target,
                rot,
                height,
                seed: None,
            };
            let res = ik_check(&scenario, &req)?;
            let json = serde_json::to_string_pretty(&res)
                .map_err(|e| Failure::Internal(e.to_string()))?;
            writeln!(out, "{json}").map_err(io_failure)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn compute(scenario: &Scenario, threads: usize, path: &PathBuf, out: &mut impl Write) -> Result<(), Failure> {
    let start = Instant::now();
    writeln!(
        out,
        "scenario {:?}: {} configs, schedule {:?} deg, {} threads",
        scenario.name,
        scenario.crane.config_count(),
        scenario.schedule.per_joint_deg(),
        threads
    )
    .map_err(io_failure)?;
    writeln!(out, "{:>4} {:>6} {:>8} {:>9} {:>8} {:>12} {:>8}", "rot", "height", "active", "reachable", "fraction", "configs", "seconds")
        .map_err(io_failure)?;
    let mut write_err = None;
    let set = precompute_all(scenario, &scenario.schedule, threads, |cfg, map| {
        let s = map.stats();
        if let Err(e) = writeln!(
            out,
            "{:>4} {:>6} {:>8} {:>9} {:>8.4} {:>12} {:>8.3}",
            cfg.rot_index,
            cfg.height_index,
            s.active_count,
            s.reachable_count,
            s.reachable_fraction,
            map.meta.configs_tested,
            map.meta.sweep_seconds
        ) {
            write_err.get_or_insert(e);
        }
    })?;
    if let Some(e) = write_err {
        return Err(io_failure(e));
    }
    let bytes = write_map_set(path, &set)?;
    writeln!(out, "wrote {} ({bytes} bytes) in {:.2} s", path.display(), start.elapsed().as_secs_f64())
        .map_err(io_failure)?;
    Ok(())
}

fn stats(set: &MapSet, out: &mut impl Write) -> std::io::Result<()> {
    let c = &set.crane;
    writeln!(
        out,
        "crane: {} rotations of {}°, {} heights of {} m",
        c.rotation_count, c.rotation_step_deg, c.height_count, c.height_step
    )?;
    writeln!(out, "{:>4} {:>6} {:>12} {:>8} {:>9} {:>8}", "rot", "height", "dims", "active", "reachable", "fraction")?;
    let (mut active, mut reachable) = (0, 0);
    for (cfg, map) in &set.maps {
        let s = map.stats();
        active += s.active_count;
        reachable += s.reachable_count;
        let d = map.grid.dims;
        writeln!(
            out,
            "{:>4} {:>6} {:>12} {:>8} {:>9} {:>8.4}",
            cfg.rot_index,
            cfg.height_index,
            format!("{}x{}x{}", d[0], d[1], d[2]),
            s.active_count,
            s.reachable_count,
            s.reachable_fraction
        )?;
    }
    let fraction = if active == 0 { 0.0 } else { reachable as f64 / active as f64 };
    writeln!(out, "total: {active} active, {reachable} reachable ({fraction:.4})")
}

fn oracle(
    scenario: &Scenario,
    threads: usize,
    configs: &[WorkpieceConfig],
    out: &mut impl Write,
) -> Result<ExitCode, Failure> {
    let mut write_err = None;
    let reports = run_oracle(scenario, &scenario.schedule, threads, configs, |r| {
        let annulus = r
            .annulus
            .map(|a| format!(", annulus {}/{} ({:.2}%)", a.agree, a.total, a.percent()))
            .unwrap_or_default();
        if let Err(e) = writeln!(
            out,
            "rot {} height {}: dense {}/{} ({:.2}%){annulus}",
            r.cfg.rot_index,
            r.cfg.height_index,
            r.dense.agree,
            r.dense.total,
            r.dense.percent()
        ) {
            write_err.get_or_insert(e);
        }
    })?;
    if let Some(e) = write_err {
        return Err(io_failure(e));
    }
    let worst = reports
        .iter()
        .map(|r| r.worst_percent())
        .fold(100.0, f64::min);
    let pass = worst >= ORACLE_PASS_PERCENT;
    writeln!(out, "agreement {worst:.2}% ({})", if pass { "pass" } else { "fail" }).map_err(io_failure)?;
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
