use std::path::Path;
use std::process::{Command, Output};

use popdyn::Species;
use popdyn_cli::config::RunConfig;
use popdyn_cli::report::{AnalysisReport, Classification, ReportBody, TerminationKind};
use serde_json::Value;

fn config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .to_str()
        .unwrap()
        .to_owned()
}

fn popdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_popdyn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = popdyn(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn exit_code(args: &[&str]) -> i32 {
    popdyn(args).status.code().expect("exit code")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

fn read_csv(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_owned();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn report(json: &str) -> AnalysisReport {
    serde_json::from_str(json).expect("report deserializes")
}

#[test]
fn simulate_periodic_orbit_closes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("orbit.csv");
    ok(&[
        "simulate",
        "--config",
        &config("periodic_orbit.json"),
        "--out",
        csv.to_str().unwrap(),
    ]);
    let (header, rows) = read_csv(&csv);
    assert_eq!(header, "t,x,y");
    let (first, last) = (&rows[0], rows.last().unwrap());
    assert_eq!(first[1..], [10.0, 3.0]);
    // t_span ends a hair past the exact period 2.56509966...
    assert!(
        (last[1] - first[1]).abs() < 1e-3 * first[1]
            && (last[2] - first[2]).abs() < 1e-3 * first[2],
        "{last:?}"
    );

    let r = report(&std::fs::read_to_string(csv.with_extension("json")).unwrap());
    let ReportBody::Simulate(s) = r.body else {
        panic!("wrong body")
    };
    assert_eq!(s.termination, TerminationKind::ReachedEnd);
    assert_eq!(s.rows, rows.len());
}

#[test]
fn simulate_reports_predator_blow_up() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("blow.csv");
    ok(&[
        "simulate",
        "--config",
        &config("predator_blowup.json"),
        "--out",
        csv.to_str().unwrap(),
    ]);
    let r = report(&std::fs::read_to_string(csv.with_extension("json")).unwrap());
    let ReportBody::Simulate(s) = r.body else {
        panic!("wrong body")
    };
    assert_eq!(s.termination, TerminationKind::BlowUp);
    let b = s.blow_up.unwrap();
    assert_eq!(b.species, Species::Y);
    assert!((b.time - 0.038582).abs() < 1e-5, "T = {}", b.time);
    let limit = b.other_limit.unwrap();
    assert!((limit - 11.5367).abs() < 1e-3, "x(T) = {limit}");
}

#[test]
fn simulate_reciprocal_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    ok(&[
        "simulate",
        "--config",
        &config("predator_blowup.json"),
        "--coords",
        "reciprocal",
        "--out",
        csv.to_str().unwrap(),
    ]);
    let (header, rows) = read_csv(&csv);
    assert_eq!(header, "t,X,Y");
    assert_eq!(rows[0][1..], [1.0 / 20.0, 1.0 / 30.0]);
    assert!(rows.last().unwrap()[2].abs() < 1e-9);
}

#[test]
fn malformed_config_is_a_config_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(
        dir.path(),
        "bad.json",
        r#"{"model": {"type": "predator_prey", "b": 3"#,
    );
    let csv = dir.path().join("out.csv");
    assert_eq!(
        exit_code(&["simulate", "--config", &bad, "--out", csv.to_str().unwrap()]),
        2
    );
    let unknown = write_config(
        dir.path(),
        "unknown.json",
        r#"{"model": {"type": "predator_prey", "b": 3, "d": 2}, "colour": 1}"#,
    );
    assert_eq!(exit_code(&["classify", "--config", &unknown]), 2);
    let negative = write_config(
        dir.path(),
        "neg.json",
        r#"{"model": {"type": "predator_prey", "b": -3, "d": 2}, "initial": [{"x": 1, "y": 1}]}"#,
    );
    assert_eq!(exit_code(&["classify", "--config", &negative]), 2);
    let entries: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(entries.len(), 3, "{entries:?}");
}

#[test]
fn unreadable_config_is_config_error_and_unwritable_output_is_io_error() {
    assert_eq!(
        exit_code(&["classify", "--config", "/nonexistent/popdyn.json"]),
        2
    );
    let out = "/nonexistent/dir/orbit.csv";
    assert_eq!(
        exit_code(&[
            "simulate",
            "--config",
            &config("periodic_orbit.json"),
            "--out",
            out
        ]),
        1
    );
}

#[test]
fn classify_examples() {
    let r = report(&ok(&[
        "classify",
        "--config",
        &config("competing_exit_classify.json"),
    ]));
    let ReportBody::Classify(Classification::Competing {
        class,
        eigenvalues,
        coexistence,
        outcome,
        ..
    }) = r.body
    else {
        panic!("wrong body")
    };
    assert_eq!(serde_json::to_value(class).unwrap(), "stable_node");
    assert!((eigenvalues[0] + 5.618034).abs() < 1e-6 && (eigenvalues[1] + 3.381966).abs() < 1e-6);
    let [x, y] = coexistence.unwrap();
    assert!((x - 19.0 / 4.0).abs() < 1e-12 && (y - 19.0 / 3.0).abs() < 1e-12);
    assert!(matches!(
        outcome,
        Some(popdyn::competing::Outcome::BlowUp {
            species: Species::Y,
            ..
        })
    ));

    let v: Value = serde_json::from_str(&ok(&[
        "classify",
        "--config",
        &config("periodic_orbit.json"),
    ]))
    .unwrap();
    assert_eq!(v["result"]["class"], "periodic");
    let period = v["result"]["period"].as_f64().unwrap();
    assert!((period - 2.565099660323728).abs() < 1e-12);

    let v: Value = serde_json::from_str(&ok(&[
        "classify",
        "--config",
        &config("predator_blowup.json"),
    ]))
    .unwrap();
    assert_eq!(v["result"]["class"], "blow_up");
    assert_eq!(v["result"]["species"], "y");
}

#[test]
fn classify_boundary_parameters_is_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_config(
        dir.path(),
        "c.json",
        r#"{"model": {"type": "competing", "a": 1, "b": 1, "c": 1, "d": 1}}"#,
    );
    let out = popdyn(&["classify", "--config", &c]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("popdyn classify:"));
}

#[test]
fn floquet_forced_and_resonant() {
    let r = report(&ok(&[
        "floquet",
        "--config",
        &config("floquet_forced.json"),
    ]));
    let ReportBody::Floquet(f) = r.body else {
        panic!("wrong body")
    };
    assert!((f.product - 1.0).abs() < 1e-8);
    assert!(f.positive);
    assert_eq!(f.samples.len(), 64);
    assert_eq!(
        exit_code(&["floquet", "--config", &config("floquet_resonant.json")]),
        3
    );
}

#[test]
fn abel_examples() {
    let r = report(&ok(&["abel", "--config", &config("abel_cubic.json")]));
    let ReportBody::Abel(a) = r.body else {
        panic!("wrong body")
    };
    assert_eq!(a.count, 3);
    for (p, want) in a.fixed_points.iter().zip([-1.0, 0.0, 1.0]) {
        assert!((p.x0 - want).abs() < 1e-8, "{p:?}");
    }
    assert_eq!(serde_json::to_value(a.hypothesis).unwrap(), "negative");
    assert!(a.sweep.is_none());

    let r = report(&ok(&["abel", "--config", &config("abel_indefinite.json")]));
    let ReportBody::Abel(a) = r.body else {
        panic!("wrong body")
    };
    assert_eq!(serde_json::to_value(a.hypothesis).unwrap(), "indefinite");
}

#[test]
fn abel_seeded_sweep_is_reproducible() {
    let args = [
        "abel",
        "--config",
        &config("abel_cubic.json"),
        "--seed",
        "5",
        "--samples",
        "6",
    ];
    let (a, b) = (ok(&args), ok(&args));
    assert_eq!(a, b);
    let ReportBody::Abel(r) = report(&a).body else {
        panic!("wrong body")
    };
    let s = r.sweep.unwrap();
    assert_eq!((s.seed, s.instances), (5, 6));
    assert!(s.max_count <= 3 && s.max_positive_count_without_a3 <= 2);
    assert_eq!(s.histogram.iter().sum::<usize>() + s.no_data, 6);
}

#[test]
fn portrait_predator_prey_has_four_closed_curves() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("f1.svg");
    let r = report(&ok(&[
        "portrait",
        "--config",
        &config("predator_prey_orbits.json"),
        "--out",
        svg.to_str().unwrap(),
    ]));
    let ReportBody::Portrait(p) = r.body else {
        panic!("wrong body")
    };
    assert_eq!(p.trajectories, 4);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches(r#"class="trajectory""#).count(), 4);
    assert_eq!(text.matches("<polyline").count(), 4);
    assert!(text.contains("rest-point"));
    for line in text.lines().filter(|l| l.starts_with("<polyline")) {
        let pts: Vec<&str> = line.split('"').nth(1).unwrap().split(' ').collect();
        let (first, last) = (pts[0], pts[pts.len() - 1]);
        let parse = |s: &str| -> Vec<f64> { s.split(',').map(|v| v.parse().unwrap()).collect() };
        let (a, b) = (parse(first), parse(last));
        assert!(
            (a[0] - b[0]).abs() < 0.5 && (a[1] - b[1]).abs() < 0.5,
            "{first} vs {last}"
        );
    }
}

#[test]
fn portrait_competing_exit_reciprocal_ends_on_axis() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("f2.svg");
    let r = report(&ok(&[
        "portrait",
        "--config",
        &config("competing_exit_portrait.json"),
        "--out",
        svg.to_str().unwrap(),
    ]));
    let ReportBody::Portrait(p) = r.body else {
        panic!("wrong body")
    };
    assert_eq!(p.trajectories, 1);
    // Y = 0 is the X-axis: the y population explodes there
    let text = std::fs::read_to_string(&svg).unwrap();
    let line = text.lines().find(|l| l.starts_with("<polyline")).unwrap();
    let last = line
        .split('"')
        .nth(1)
        .unwrap()
        .split(' ')
        .next_back()
        .unwrap();
    let y_px: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    let [_, [y0, y1]] = p.view;
    let axis_px = 480.0 - 56.0 - (0.0 - y0) / (y1 - y0) * (480.0 - 2.0 * 56.0);
    assert!((y_px - axis_px).abs() < 0.02, "{y_px} vs {axis_px}");
}

#[test]
fn portrait_without_trajectories_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_config(
        dir.path(),
        "p.json",
        r#"{"model": {"type": "predator_prey", "b": 3, "d": 2}, "initial": []}"#,
    );
    let svg = dir.path().join("p.svg");
    assert_eq!(
        exit_code(&["portrait", "--config", &c, "--out", svg.to_str().unwrap()]),
        2
    );
    assert!(!svg.exists());
}

#[test]
fn config_echo_resolves_to_itself() {
    for (cmd, name) in [
        ("classify", "competing_exit_classify.json"),
        ("floquet", "floquet_forced.json"),
        ("abel", "abel_cubic.json"),
        ("classify", "periodic_orbit.json"),
    ] {
        let r = report(&ok(&[cmd, "--config", &config(name)]));
        let json = serde_json::to_string(&r.config).unwrap();
        let again: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(again, r.config);
        assert_eq!(r.toolkit, "popdyn");
    }
}

#[test]
fn report_round_trips_bit_exactly() {
    let text = ok(&["floquet", "--config", &config("floquet_forced.json")]);
    let r = report(&text);
    assert_eq!(popdyn_cli::report::to_json(&r), text);
}

#[test]
fn help_lists_subcommands() {
    let help = ok(&["--help"]);
    for cmd in ["simulate", "classify", "floquet", "abel", "portrait"] {
        assert!(help.contains(cmd), "{help}");
    }
}
