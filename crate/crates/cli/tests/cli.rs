use std::process::{Command, Output};

fn pcf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_builtin_gasket() {
    let o = pcf(&["validate"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("5 of 5 axioms passed"));
}

#[test]
fn validate_reports_failed_axiom() {
    let dir = tempfile::tempdir().unwrap();
    // two cells glued at both ends: the relation identifies (1,1) with (2,1)
    // and (1,2) with (2,1), which breaks injectivity on cells
    let spec = r#"{"name":"bad","N":2,"N0":2,"relation":[[1,2,2,1],[1,1,2,1]],
                  "alpha":["1/2","1/2"],"beta":["1/2","1/2"]}"#;
    let p = dir.path().join("bad.json");
    std::fs::write(&p, spec).unwrap();
    let o = pcf(&["validate", "--structure", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn invalid_config_exits_one() {
    assert_eq!(pcf(&["spectrum"]).status.code(), Some(1));
    assert_eq!(pcf(&["validate", "--builtin", "torus"]).status.code(), Some(1));
    assert_eq!(
        pcf(&["validate", "--structure", "/nonexistent.json"]).status.code(),
        Some(1)
    );
    assert_eq!(pcf(&["decimation", "--builtin", "interval:1/3"]).status.code(), Some(1));
}

#[test]
fn ceiling_exits_three() {
    let o = pcf(&["spectrum", "--n", "5", "--ceiling", "100"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("ceiling"));
}

#[test]
fn degrees_table_and_verdict() {
    let o = pcf(&["degrees", "--builtin", "gasket", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("n,d00,d01,d10,d11,l_n,l_n^{1/n}"));
    assert!(out.lines().any(|l| l.starts_with("1,1,1,1,2,")));
    assert!(stderr(&o).contains("verdict: case_i"));
}

#[test]
fn csv_is_deterministic_and_tagged() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    for d in [&d1, &d2] {
        let o = pcf(&[
            "spectrum",
            "--n",
            "3",
            "--out",
            d.path().to_str().unwrap(),
            "--matrix-market",
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let a = std::fs::read(d1.path().join("spectrum.csv")).unwrap();
    let b = std::fs::read(d2.path().join("spectrum.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    let head = lines.next().unwrap();
    assert!(head.starts_with("# pcf spectrum config_sha256=") && head.contains("merge_tol="));
    assert_eq!(lines.next(), Some("lambda,multiplicity"));
    // 17 significant digits
    let first = lines.next().unwrap();
    let mant = first
        .split(',')
        .next()
        .unwrap()
        .trim_start_matches('-')
        .split('e')
        .next()
        .unwrap();
    assert_eq!(mant.replace('.', "").len(), 17);
    let mm = std::fs::read_to_string(d1.path().join("A_3.mtx")).unwrap();
    assert!(mm.starts_with("%%MatrixMarket matrix coordinate real symmetric"));
    // the hash changes with the configuration
    let o = pcf(&["spectrum", "--n", "2"]);
    let other = stdout(&o).lines().next().unwrap().to_string();
    assert_ne!(other, head);
}

#[test]
fn gasket_measure_report() {
    let d = tempfile::tempdir().unwrap();
    let o = pcf(&[
        "gasket-measure",
        "--n",
        "4",
        "--kmax",
        "3",
        "--out",
        d.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let err = stderr(&o);
    assert!(err.contains("unmatched atoms: 0"));
    let mism: f64 = err
        .lines()
        .find_map(|l| l.strip_prefix("max atom-location mismatch: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(mism <= 1e-7);
    let trees = std::fs::read_to_string(d.path().join("preimage_trees.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&trees).unwrap();
    assert_eq!(v[0]["nodes"].as_array().unwrap().len(), 15);
}

#[test]
fn green_and_dos_schemas() {
    let o = pcf(&["green", "--steps", "2", "--re", "-4", "0", "--im", "0.5", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().nth(1), Some("re_lambda,im_lambda,value,iters,tail"));
    assert_eq!(out.lines().count(), 2 + 9);
    let o = pcf(&["dos", "--n", "2", "--steps", "10"]);
    let out = stdout(&o);
    assert_eq!(out.lines().nth(1), Some("lambda,cdf"));
    let cdf = |l: &str| -> f64 { l.split(',').nth(1).unwrap().parse().unwrap() };
    // mass of [lambda, 0]; nu^+_<2> has 15 points over 3^2 cells
    let vals: Vec<f64> = out.lines().skip(2).map(cdf).collect();
    assert!((vals[0] - 15.0 / 9.0).abs() < 1e-12);
    assert!(vals.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn nd_and_decimation() {
    let o = pcf(&["nd", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("lambda,rho_n"));
    let o = pcf(&["decimation", "--n", "2"]);
    assert!(stdout(&o).contains("contained: true"));
}
