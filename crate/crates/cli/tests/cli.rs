use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steinbasis"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn assert_schema(name: &str, v: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(v) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    panic!("{name} report violates its schema: {msgs:#?}");
}

#[test]
fn construct_quarter_is_certified() {
    let out = run(&["construct", "--alpha", "1/4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_schema("construct", &v);
    assert_eq!(v["family"], "l1");
    assert_eq!(v["certified"], true);
}

#[test]
fn construct_three_quarters_uses_slab_family() {
    let out = run(&["construct", "--alpha", "3/4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_schema("construct", &v);
    assert_eq!(v["family"], "l3");
    assert_eq!(v["solution"]["integers"]["m"], 2);
}

#[test]
fn usage_errors_exit_three() {
    for args in [
        &["construct", "--alpha", "1/1"][..],
        &["construct", "--alpha", "0.25"],
        &["construct", "--alpha", "1/4", "--unknown"],
        &["construct", "--alpha", "1/4", "--M", "0"],
        &["planes", "--B", "0,1,-1,0"],
        &["planes", "--B", "0,1,0,0"],
        &["planes", "--mu", "1", "--precision", "20"],
        &["verify", "/nonexistent/certificate.json"],
    ] {
        assert_eq!(run(args).status.code(), Some(3), "{args:?}");
    }
}

#[test]
fn emitted_certificate_verifies_and_tampering_fails() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = run(&["construct", "--alpha", "3/10", "--emit-certificate", d]);
    assert_eq!(out.status.code(), Some(0));
    let cert = dir.path().join("certificate.json");
    assert!(dir.path().join("phi.txt").exists());

    let out = run(&["verify", cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_schema("verify", &v);
    assert_eq!(v["certified"], true);

    // Flip the sign of E: the ledger and the stored Levi targets no longer match.
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    let e = doc["solution"]["E"].as_str().unwrap().to_string();
    doc["solution"]["E"] = Value::String(format!("-{e}"));
    std::fs::write(&cert, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = run(&["verify", cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_schema("verify", &v);
    assert_eq!(v["ledger_holds"], false);
}

#[test]
fn sweep_reports_every_alpha_in_order() {
    let out = run(&["sweep", "--alphas", "0,1/10,1/2,9/10", "--jobs", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_schema("sweep", &v);
    let alphas: Vec<&str> = v["rows"].as_array().unwrap().iter().map(|r| r["alpha"].as_str().unwrap()).collect();
    assert_eq!(alphas, ["0/1", "1/10", "1/2", "9/10"]);
}

#[test]
fn roots_match_claimed_intervals() {
    let out = run(&["roots"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_schema("roots", &v);
    assert_eq!(v["claims"]["alpha0"]["lo"], "43/100");
    assert_eq!(v["claims"]["alpha1"]["hi"], "21/50");
    assert_eq!(v["claims"]["q_sign_at_052"], -1);
}

#[test]
fn planes_classifications() {
    let out = run(&["planes", "--mu", "1", "--samples", "200"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_schema("planes", &v);
    assert_eq!(v["label"], "hyperbolic");
    assert!((v["alpha"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-15);

    let out = run(&["planes", "--mu", "2", "--elliptic", "--samples", "200"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_schema("planes", &v);
    assert_eq!(v["label"], "non-polynomially-convex (Weinstock)");

    let out = run(&["planes", "--B", "1,0,0,2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_schema("planes", &json(&out));

    let out = run(&["planes", "--B", "0,1,1,0", "--samples", "100"]);
    assert_eq!(json(&out)["union"]["mu2"], "1/1");
}

#[test]
fn retract_passes_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("flows.csv");
    let out = run(&[
        "retract", "--alpha", "1/4", "--eps", "1/1000,1/10000", "--samples", "200", "--lines", "200", "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_schema("retract", &v);
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("eps,sample,step,x,y,u,v,phi\n"));
    assert!(text.lines().count() > 400);
}

#[test]
fn outputs_are_byte_stable() {
    for args in [
        &["retract", "--alpha", "1/4", "--samples", "100", "--lines", "100", "--seed", "9"][..],
        &["planes", "--mu", "1/2", "--samples", "100", "--seed", "9"],
        &["construct", "--alpha", "51/100"],
    ] {
        let a = run(args);
        let mut with_jobs = args.to_vec();
        with_jobs.extend(["--jobs", "3"]);
        let b = run(&with_jobs);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}
