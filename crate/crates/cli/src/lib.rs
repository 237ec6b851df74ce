//! Command-line front end: config loading, case dispatch, CSV output and
//! exit-code discipline.
//!
//! Exit codes: 0 success, 1 invalid input (arguments, configuration), 2
//! runtime failure (solver, wall model, I/O). Diagnostics go to standard
//! error; results are written to files.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use dgfv::config::{self, CaseId, ConfigErrors, RunConfig, ENV_OUTPUT_DIR, ENV_THREADS};
use dgfv::{cases, output, perf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dgfv", version, about = "Hybrid DG/FV Euler solver kit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Overrides {
    /// Worker threads (overrides config and DGFV_THREADS).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory (overrides config and DGFV_OUTPUT_DIR).
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Override any config key, e.g. `--set mesh.elements=[32]`. Repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a flow case; writes the final state and per-step diagnostics.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Sample u+(y+) for Spalding's law and its compressible variants.
    SweepWallModel {
        /// Optional config providing `[wall]` and `[gas]` values.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Freestream Mach number.
        #[arg(long, allow_hyphen_values = true)]
        ma: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<f64>,
        /// Prandtl number.
        #[arg(long, allow_hyphen_values = true)]
        pr: Option<f64>,
        /// Output CSV (default: output directory / sweep file name).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Freestream scaling campaign; writes the perf and speedup CSVs.
    Scale {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Parse and validate a config without running it.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
        /// Also write the fully expanded config to this file.
        #[arg(long)]
        render: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// List the built-in cases.
    ListCases,
}

/// Error carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_RUNTIME,
            message: message.into(),
        }
    }
}

fn config_failure(source: &str, e: ConfigErrors) -> Failure {
    Failure::invalid(format!("invalid configuration {source}:\n{e}"))
}

/// Runs the command line `args` (including the program name) with the
/// process environment.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_env(args, |k| std::env::var(k).ok())
}

/// As [`run`], reading environment overrides through `env`.
pub fn run_with_env<I, T, E>(args: I, env: E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    E: Fn(&str) -> Option<String>,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, &env) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, env: &dyn Fn(&str) -> Option<String>) -> Result<(), Failure> {
    match command {
        Command::Run { config, overrides } => {
            let c = load(Some(&config), None, &overrides, env)?;
            run_flow(&c)
        }
        Command::SweepWallModel {
            config,
            ma,
            gamma,
            pr,
            out,
            mut overrides,
        } => {
            for (key, value) in [("wall.ma_inf", ma), ("gas.gamma", gamma), ("gas.prandtl", pr)] {
                if let Some(v) = value {
                    overrides.set.push(format!("{key}={v:?}"));
                }
            }
            let c = load(config.as_deref(), Some(CaseId::WallSweep), &overrides, env)?;
            sweep(&c, out)
        }
        Command::Scale { config, overrides } => {
            let c = load(Some(&config), None, &overrides, env)?;
            if c.case != CaseId::Scaling {
                return Err(Failure::invalid(format!(
                    "`scale` needs a config with case id \"scaling\", found \"{}\"",
                    c.case
                )));
            }
            scale(&c)
        }
        Command::ValidateConfig {
            config,
            render,
            overrides,
        } => {
            let c = load(Some(&config), None, &overrides, env)?;
            if let Some(path) = render {
                write_atomic(&path, &config::render(&c))?;
            }
            eprintln!("{}: valid {} configuration", config.display(), c.case);
            Ok(())
        }
        Command::ListCases => {
            for case in CaseId::ALL {
                println!("{:<12} {}", case.name(), case.description());
            }
            Ok(())
        }
    }
}

/// Builds the effective config. Precedence, lowest first: case defaults,
/// config file, environment, command-line flags.
fn load(
    path: Option<&Path>,
    default_case: Option<CaseId>,
    overrides: &Overrides,
    env: &dyn Fn(&str) -> Option<String>,
) -> Result<RunConfig, Failure> {
    let (text, source) = match path {
        Some(p) => (
            fs::read_to_string(p).map_err(|e| Failure::invalid(format!("cannot read {}: {e}", p.display())))?,
            p.display().to_string(),
        ),
        None => {
            let case = default_case.unwrap_or(CaseId::Freestream);
            (format!("[case]\nid = \"{case}\"\n"), "(built-in defaults)".to_string())
        }
    };
    let mut pairs = Vec::new();
    for item in &overrides.set {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Failure::invalid(format!("--set expects SECTION.KEY=VALUE, got `{item}`")))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    if let Some(t) = overrides.threads {
        pairs.push(("run.threads".into(), t.to_string()));
    }
    if let Some(dir) = &overrides.output_dir {
        let quoted = dir.to_string_lossy().replace('\\', "\\\\").replace('"', "\\\"");
        pairs.push(("output.directory".into(), format!("\"{quoted}\"")));
    }
    let mut c = config::parse_config_with_overrides(&text, &pairs).map_err(|e| config_failure(&source, e))?;
    if let Some(case) = default_case {
        if path.is_some() && c.case != case {
            return Err(Failure::invalid(format!(
                "{source}: expected case \"{case}\", found \"{}\"",
                c.case
            )));
        }
    }
    // flags beat the environment
    let flagged = |key: &str| pairs.iter().any(|(k, _)| k == key);
    let env_lookup = |name: &str| -> Option<String> {
        match name {
            ENV_THREADS if flagged("run.threads") => None,
            ENV_OUTPUT_DIR if flagged("output.directory") => None,
            _ => env(name),
        }
    };
    config::apply_env(&mut c, env_lookup).map_err(|e| config_failure("(environment)", e))?;
    Ok(c)
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let fail = |what: &str, e: &dyn std::fmt::Display| Failure::runtime(format!("{what} {}: {e}", path.display()));
    fs::create_dir_all(&dir).map_err(|e| fail("cannot create directory for", &e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| fail("cannot create temporary file for", &e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| fail("cannot write", &e))?;
    tmp.as_file().sync_all().map_err(|e| fail("cannot flush", &e))?;
    tmp.persist(path).map_err(|e| fail("cannot rename into", &e.error))?;
    Ok(())
}

fn meta(c: &RunConfig) -> String {
    format!("case={} N={} dims={} elements={:?}", c.case, c.degree, c.mesh.dims, &c.mesh.elements[..c.mesh.dims])
}

fn run_flow(c: &RunConfig) -> Result<(), Failure> {
    match c.case {
        CaseId::WallSweep => return sweep(c, None),
        CaseId::Scaling => return scale(c),
        _ => {}
    }
    let out = cases::run_case(c).map_err(|e| Failure::runtime(format!("{} case failed: {e}", c.case)))?;
    let solver = &out.solver;
    let m = format!("{} time={:e}", meta(c), solver.time());
    let dir = &c.output.directory;
    let state = dir.join(&c.output.state);
    let diagnostics = dir.join(&c.output.diagnostics);
    write_atomic(
        &state,
        &output::state_csv(solver.operator(), solver.field(), &solver.blending().alpha, &m),
    )?;
    write_atomic(&diagnostics, &output::diagnostics_csv(&out.diagnostics, &m))?;
    let pid = perf::compute_pid(&out.perf).map(|p| format!("{p:.3e} s")).unwrap_or_else(|_| "n/a".into());
    eprintln!(
        "{}: {} steps to t = {:.6}, peak alpha {:.3}, {} threads, time loop {:.3} s, PID {pid}",
        c.case,
        solver.steps(),
        solver.time(),
        out.summary.peak_max_alpha,
        out.perf.cores,
        out.perf.mean_wall_clock(),
    );
    eprintln!("wrote {} and {}", state.display(), diagnostics.display());
    Ok(())
}

fn sweep(c: &RunConfig, out: Option<PathBuf>) -> Result<(), Failure> {
    let w = &c.wall;
    let rows = cases::wall_sweep(w, &c.gas).map_err(|e| Failure::runtime(format!("wall-model sweep failed: {e}")))?;
    if rows.iter().any(|r| r.u_plus_edge.is_none()) {
        eprintln!(
            "warning: the {:?} recovery ratio at Ma = {} puts T_aw below T_e; the edge-form column is left empty",
            w.edge_recovery, w.ma_inf
        );
    }
    let m = format!(
        "ma_inf={:?} gamma={:?} prandtl={:?} u_inf_plus={:?} edge_recovery={:?}",
        w.ma_inf, c.gas.gamma, c.gas.prandtl, w.u_inf_plus, w.edge_recovery
    );
    let path = out.unwrap_or_else(|| c.output.directory.join(&c.output.sweep));
    write_atomic(&path, &output::sweep_csv(&rows, &m))?;
    eprintln!("wrote {} ({} samples)", path.display(), rows.len());
    Ok(())
}

fn scale(c: &RunConfig) -> Result<(), Failure> {
    let report = perf::scaling_campaign(c, |line| eprintln!("{line}"))
        .map_err(|e| Failure::runtime(format!("scaling campaign failed: {e}")))?;
    let csv = report.to_csv().map_err(|e| Failure::runtime(e.to_string()))?;
    let speedups = report.speedups().map_err(|e| Failure::runtime(e.to_string()))?;
    let dir = &c.output.directory;
    let perf_path = dir.join(&c.output.perf);
    let speedup_path = perf_path.with_extension("speedup.csv");
    write_atomic(&perf_path, &csv)?;
    write_atomic(&speedup_path, &perf::speedup_csv(&speedups))?;
    let worst = report.cells.iter().map(|cell| cell.max_deviation).fold(0.0, f64::max);
    eprintln!("largest deviation of a parallel run from the serial one: {worst:e}");
    eprintln!("wrote {} and {}", perf_path.display(), speedup_path.display());
    if worst > 1e-12 {
        return Err(Failure::runtime(format!(
            "parallel results differ from serial by {worst:e} (> 1e-12)"
        )));
    }
    Ok(())
}
