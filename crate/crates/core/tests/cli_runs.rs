use fractorus::cli::verify::VerifyReport;
use fractorus::cli::{parse_config_in, read_solution, run, DiagnoseReport, RunOptions, SolveReport, SweepReport};
use fractorus::continuation::{read_sweep_csv, RecordStatus};
use fractorus::extension::CylinderFunction;
use fractorus::linking::read_trace_csv;
use serde_json::{json, Value};
use std::fs;
use std::path::Path;
use std::process::Command;

fn document(mode: &str) -> Value {
    json!({
        "grid": {"N": 1, "T": std::f64::consts::TAU, "n": 64},
        "frac": {"s": 0.5, "m": 1},
        "nonlinearity": {"kind": "pure_power", "p": 3, "mu": 4, "r0": 1},
        "solver": {},
        "mode": mode,
        "seed": 7
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> T {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_artifacts_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config_in(&document("solve").to_string(), dir.path()).unwrap();
    let opts = RunOptions {
        solver_trace: true,
        dump_extension: true,
        ..Default::default()
    };
    run(&cfg, &opts).unwrap();
    let report: SolveReport = read_json(&dir.path().join("energy.json"));
    assert!(report.residual < 1e-8);
    assert_eq!(report.seed, 7);
    let u = read_solution(&dir.path().join("solution.json")).unwrap();
    assert!((cfg_level(&cfg, &u) - report.level).abs() < 1e-12);
    let trace = read_trace_csv(fs::File::open(dir.path().join("solver_trace.csv")).unwrap()).unwrap();
    assert_eq!(trace.len(), report.deform_sweeps + trace.iter().filter(|r| r.stage != fractorus::linking::Stage::Deform).count());
    let ext: Value = read_json(&dir.path().join("extension.json"));
    let cyl = CylinderFunction::from_json(&ext).unwrap();
    assert!(cyl.trace().lincomb(1.0, &u, -1.0).l2_norm() < 1e-6 * u.l2_norm());

    let diag = dir.path().join("diag");
    let mut doc = document("diagnose");
    doc["solution"] = json!("solution.json");
    doc["output_dir"] = json!("diag");
    let cfg = parse_config_in(&doc.to_string(), dir.path()).unwrap();
    run(&cfg, &RunOptions::default()).unwrap();
    let report: DiagnoseReport = read_json(&diag.join("diagnose.json"));
    assert!(report.bootstrap.rows.len() >= 2);
    assert!(report.holder.is_some());
}

fn cfg_level(cfg: &fractorus::cli::RunConfig, u: &fractorus::spectral::Spectrum) -> f64 {
    fractorus::energy::Functional::new(cfg.frac, cfg.spec.clone()).value(u)
}

#[test]
fn sweep_artifacts_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc = document("sweep");
    doc["m_list"] = json!([0.5, 0.1, 0.02]);
    let cfg = parse_config_in(&doc.to_string(), dir.path()).unwrap();
    run(&cfg, &RunOptions::default()).unwrap();
    let rows = read_sweep_csv(fs::File::open(dir.path().join("sweep.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.status == RecordStatus::Converged));
    for r in &rows {
        let u = read_solution(&dir.path().join(format!("sol_m{}.json", r.m))).unwrap();
        assert!((u.l2_norm() - r.l2_norm).abs() < 1e-12 * r.l2_norm);
    }
    let report: SweepReport = read_json(&dir.path().join("sweep_report.json"));
    let limit = report.limit.expect("limit extracted");
    assert!(limit.residual < 1e-8 && limit.f_u_integral > 0.0);
    read_solution(&dir.path().join("limit.json")).unwrap();
}

#[test]
fn verify_report_lists_passing_properties() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config_in(&document("verify").to_string(), dir.path()).unwrap();
    run(&cfg, &RunOptions::default()).unwrap();
    let report: VerifyReport = read_json(&dir.path().join("verify_report.json"));
    assert!(report.properties.len() >= 20);
    assert!(report.all_passed);
}

fn solver(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_solver"))
        .args(args)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, doc: &Value| {
        let p = dir.path().join(name);
        fs::write(&p, doc.to_string()).unwrap();
        p.display().to_string()
    };
    let out = dir.path().join("out").display().to_string();

    let good = write("solve.json", &document("solve"));
    assert_eq!(solver(&["solve", "--config", &good, "--output", &out, "--solver-trace"]), 0);
    let first = fs::read(dir.path().join("out/solver_trace.csv")).unwrap();
    assert_eq!(solver(&["solve", "--config", &good, "--output", &out, "--solver-trace"]), 0);
    assert_eq!(first, fs::read(dir.path().join("out/solver_trace.csv")).unwrap());

    fs::write(dir.path().join("broken.json"), "{\"grid\":").unwrap();
    let broken = dir.path().join("broken.json").display().to_string();
    assert_eq!(solver(&["solve", "--config", &broken]), 2);

    let mut heavy = document("sweep");
    heavy["m_list"] = json!([2.0, 0.1]);
    let heavy = write("heavy.json", &heavy);
    assert_eq!(solver(&["sweep", "--config", &heavy, "--output", &out]), 2);

    let mut zero = document("solve");
    zero["nonlinearity"] = json!({"kind": "zero_probe"});
    let zero = write("zero.json", &zero);
    assert_eq!(solver(&["solve", "--config", &zero, "--output", &out]), 3);

    let missing = dir.path().join("missing.json").display().to_string();
    assert_eq!(solver(&["solve", "--config", &missing]), 1);
}
