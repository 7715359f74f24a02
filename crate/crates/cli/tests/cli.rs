use std::path::Path;
use std::process::{Command, Output};

fn ricci2d(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ricci2d"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RICCI_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .lines()
        .map(str::to_string)
        .collect()
}

#[test]
fn simulate_with_defaults_writes_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let out = ricci2d(&["simulate"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = lines(&dir.path().join("diagnostics.csv"));
    assert_eq!(
        rows[0],
        "t,volume,energy,dissipation_cum,energy_residual,curv_dev_linf,curv_dev_l2,rg"
    );
    assert_eq!(rows.len(), 1002);
    for f in ["config.txt", "spec.txt", "metadata.txt", "trajectory.bin"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let config = std::fs::read_to_string(dir.path().join("config.txt")).unwrap();
    assert!(config.contains("surface.resolution = 64") && config.contains("flow.integrator = rk4"));
}

#[test]
fn guard_trip_exits_two_with_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = ricci2d(
        &[
            "simulate",
            "--set",
            "init.amplitude=40",
            "--set",
            "surface.resolution=16",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let note = std::fs::read_to_string(dir.path().join("blowup.txt")).unwrap();
    assert!(note.contains("blow-up guard"));
    assert!(dir.path().join("trajectory.bin").exists());
    assert!(lines(&dir.path().join("diagnostics.csv")).len() >= 2);
}

#[test]
fn config_errors_exit_one_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = ricci2d(&["--set", "flow.dt=-1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("flow.dt") && err.contains("> 0"), "{err}");

    let out = ricci2d(&["--set", "flow.dtt=0.1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key `flow.dtt`"));
}

#[test]
fn config_file_is_overridden_by_flags_and_reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# short torus run\ncommand = simulate\nsurface.resolution = 16\nflow.integrator = imex4\nflow.dt = 0.05\nflow.t_end = 0.1\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let run = ricci2d(&["--config", cfg, "--set", "flow.dt=0.01"], out);
        assert_eq!(
            run.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&run.stderr)
        );
    }
    let rows = lines(&a.join("diagnostics.csv"));
    assert_eq!(rows.len(), 12);
    assert_eq!(
        std::fs::read(a.join("diagnostics.csv")).unwrap(),
        std::fs::read(b.join("diagnostics.csv")).unwrap()
    );
}

#[test]
fn uniqueness_summary_has_delta_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = ricci2d(
        &[
            "uniqueness",
            "--plots",
            "--set",
            "surface.resolution=16",
            "--set",
            "flow.t_end=0.1",
            "--set",
            "experiment.dt_levels=0.02 0.01",
            "--set",
            "experiment.horizons=0.1 0.05",
            "--set",
            "experiment.samples=20",
            "--set",
            "experiment.trajectory_samples=2",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = lines(&dir.path().join("summary.csv"));
    assert!(summary[0].split(',').any(|c| c == "delta"));
    assert_eq!(summary.len(), 3);
    assert_eq!(lines(&dir.path().join("ladder.csv")).len(), 3);
    assert!(dir.path().join("delta.svg").exists());
}

#[test]
fn manufactured_convergence_and_inequalities_write_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m");
    let out = ricci2d(&["manufactured", "--plots"], &m);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = lines(&m.join("summary.csv"));
    assert_eq!(summary.len(), 4);
    let rk4: Vec<&str> = summary[1].split(',').collect();
    assert_eq!(rk4[0], "rk4");
    let slope: f64 = rk4[2].parse().unwrap();
    assert!((slope - 4.0).abs() < 0.3, "{slope}");
    assert!(m.join("errors_rk4.svg").exists());

    let c = dir.path().join("c");
    let args = [
        "convergence",
        "--plots",
        "--set",
        "surface.resolution=16",
        "--set",
        "flow.integrator=imex4",
        "--set",
        "flow.dt=0.005",
        "--set",
        "flow.t_end=0.2",
    ];
    let out = ricci2d(&args, &c);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(lines(&c.join("summary.csv"))[1].starts_with("decaying,"));
    assert!(c.join("diagnostics_curvature.svg").exists());

    let i = dir.path().join("i");
    let args = [
        "inequalities",
        "--set",
        "experiment.samples=20",
        "--set",
        "experiment.trajectory_samples=2",
        "--set",
        "experiment.resolutions=16 32",
    ];
    let out = ricci2d(&args, &i);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = lines(&i.join("summary.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows[0].contains("moment_plus_p8"));
    assert!(rows[1].ends_with(",true"));
}
