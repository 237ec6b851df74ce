use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use dgfv_cli::{run_with_env, EXIT_INVALID, EXIT_OK, EXIT_RUNTIME};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn no_env(_: &str) -> Option<String> {
    None
}

fn dgfv(args: &[&str]) -> i32 {
    run_with_env(std::iter::once("dgfv").chain(args.iter().copied()), no_env)
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(String::from)
        .collect()
}

#[test]
fn shipped_configs_validate() {
    let mut seen = 0;
    for entry in fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cfg") {
            assert_eq!(dgfv(&["validate-config", "--config", path.to_str().unwrap()]), EXIT_OK, "{path:?}");
            seen += 1;
        }
    }
    assert_eq!(seen, 5);
}

#[test]
fn sod_run_writes_state_and_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("results");
    let cfg = configs().join("sod.cfg");
    let code = dgfv(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--output-dir",
        out.to_str().unwrap(),
        "--set",
        "mesh.elements=[16]",
        "--set",
        "time.end_time=0.05",
    ]);
    assert_eq!(code, EXIT_OK);
    let state = data_lines(&out.join("sod_state.csv"));
    assert_eq!(state[0], "element,node,x,y,rho,rhou,rhov,E,alpha");
    assert_eq!(state.len(), 1 + 16 * 5);
    for line in &state[1..] {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 9);
        assert!(cols[4] > 0.0);
        assert!((0.0..=1.0).contains(&cols[8]));
    }
    let diag = data_lines(&out.join("sod_diagnostics.csv"));
    assert_eq!(diag[0], "step,time,dt,mass,mom_x,mom_y,energy,max_alpha,active_elements");
    let last: Vec<&str> = diag.last().unwrap().split(',').collect();
    assert!((last[1].parse::<f64>().unwrap() - 0.05).abs() < 1e-14);
    // no temporary files left behind
    assert_eq!(fs::read_dir(&out).unwrap().count(), 2);
}

#[test]
fn wall_sweep_flags_override_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("sweep.csv");
    let code = dgfv(&[
        "sweep-wall-model",
        "--ma",
        "1.5",
        "--gamma",
        "1.3",
        "--pr",
        "0.7",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# dgfv wall-sweep v1 ma_inf=1.5 gamma=1.3 prandtl=0.7"));
    let rows = data_lines(&path);
    assert_eq!(rows[0], "y_plus,u_plus_spalding,u_plus_van_driest,u_plus_edge");
    assert_eq!(rows.len(), 201);
    let mut prev = 0.0;
    for line in &rows[1..] {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(cols[0] > prev);
        prev = cols[0];
        // the transformed velocity never trails the incompressible one
        assert!(cols[2] <= cols[1] * (1.0 + 1e-12));
    }
}

#[test]
fn wall_sweep_reads_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "w.cfg",
        "[case]\nid = \"wall-sweep\"\n[wall]\npoints = 7\nedge_recovery = \"printed\"\n[output]\nsweep = \"w.csv\"\n",
    );
    let code = dgfv(&["sweep-wall-model", "--config", &cfg, "--output-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let rows = data_lines(&tmp.path().join("w.csv"));
    assert_eq!(rows.len(), 8);
    // printed recovery at the default Mach number leaves the edge column empty
    assert!(rows[1..].iter().all(|r| r.ends_with(',')));
}

#[test]
fn scale_writes_complete_campaign() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "s.cfg",
        "[case]\nid = \"scaling\"\n[solver]\ndegree = 2\n[time]\nsteps = 2\n[run]\nrepeats = 2\n\
         [campaign]\nelements = [4, 16]\ncores = [1, 2]\n[output]\nperf = \"p.csv\"\n",
    );
    let code = dgfv(&["scale", "--config", &cfg, "--output-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let perf = data_lines(&tmp.path().join("p.csv"));
    assert_eq!(
        perf[0],
        "case,n_elements,N,dof_points,cores,steps,rk_stages,repeat_idx,wall_clock_s,pid_s,speedup"
    );
    assert_eq!(perf.len(), 1 + 2 * 2 * 2);
    let speedup = data_lines(&tmp.path().join("p.speedup.csv"));
    assert_eq!(speedup.len(), 1 + 2 * 2);
}

#[test]
fn scale_rejects_other_cases() {
    let cfg = configs().join("sod.cfg");
    assert_eq!(dgfv(&["scale", "--config", cfg.to_str().unwrap()]), EXIT_INVALID);
}

#[test]
fn invalid_input_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write_config(tmp.path(), "bad.cfg", "[case]\nid = \"sod\"\n[time]\ncfl = 0\n");
    assert_eq!(dgfv(&["validate-config", "--config", &bad]), EXIT_INVALID);
    assert_eq!(dgfv(&["run", "--config", &bad]), EXIT_INVALID);
    let missing = tmp.path().join("nope.cfg");
    assert_eq!(dgfv(&["run", "--config", missing.to_str().unwrap()]), EXIT_INVALID);
    assert_eq!(dgfv(&["run"]), EXIT_INVALID);
    assert_eq!(dgfv(&["frobnicate"]), EXIT_INVALID);
    let good = configs().join("sod.cfg");
    assert_eq!(dgfv(&["run", "--config", good.to_str().unwrap(), "--set", "noequals"]), EXIT_INVALID);
    assert_eq!(dgfv(&["sweep-wall-model", "--ma", "-1", "--out", "/dev/null"]), EXIT_INVALID);
    assert_eq!(dgfv(&["--help"]), EXIT_OK);
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = blocker.join("sub");
    let code = dgfv(&["sweep-wall-model", "--out", out.join("w.csv").to_str().unwrap()]);
    assert_eq!(code, EXIT_RUNTIME);
}

#[test]
fn flags_beat_environment_beats_file() {
    let tmp = tempfile::tempdir().unwrap();
    let file_dir = tmp.path().join("from_file");
    let env_dir = tmp.path().join("from_env");
    let flag_dir = tmp.path().join("from_flag");
    let cfg = write_config(
        tmp.path(),
        "v.cfg",
        &format!(
            "[case]\nid = \"vortex\"\n[mesh]\nelements = 2\n[time]\nsteps = 1\n[output]\ndirectory = \"{}\"\n",
            file_dir.display()
        ),
    );
    let rendered = tmp.path().join("r.cfg");
    let env_path = env_dir.to_string_lossy().into_owned();
    let env = move |k: &str| match k {
        "DGFV_OUTPUT_DIR" => Some(env_path.clone()),
        "DGFV_THREADS" => Some("3".to_string()),
        _ => None,
    };
    let args = ["dgfv", "validate-config", "--config", &cfg, "--render", rendered.to_str().unwrap()];
    assert_eq!(run_with_env(args, &env), EXIT_OK);
    let text = fs::read_to_string(&rendered).unwrap();
    assert!(text.contains(&format!("directory = \"{}\"", env_dir.display())), "{text}");
    assert!(text.contains("threads = 3"));

    let mut args = args.to_vec();
    let flag = flag_dir.to_string_lossy().into_owned();
    args.extend(["--output-dir", &flag, "--threads", "2"]);
    assert_eq!(run_with_env(args, &env), EXIT_OK);
    let text = fs::read_to_string(&rendered).unwrap();
    assert!(text.contains(&format!("directory = \"{}\"", flag_dir.display())), "{text}");
    assert!(text.contains("threads = 2"));

    assert_eq!(run_with_env(["dgfv", "run", "--config", &cfg], no_env), EXIT_OK);
    assert!(file_dir.join("vortex_state.csv").exists());
}

#[test]
fn binary_reports_errors_on_stderr() {
    let out = Command::new(env!("CARGO_BIN_EXE_dgfv"))
        .args(["validate-config", "--config", "/nonexistent/x.cfg"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_INVALID));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));

    let out = Command::new(env!("CARGO_BIN_EXE_dgfv")).arg("list-cases").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 5);
}
