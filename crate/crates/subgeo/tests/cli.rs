use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn chain(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../chains/{name}.toml"))
}

fn subgeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subgeo"))
        .args(args)
        .output()
        .expect("spawn subgeo")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Rows of a CSV as header-keyed lookups.
fn records(text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().unwrap().iter().map(str::to_owned).collect();
    r.records()
        .map(|rec| {
            header
                .iter()
                .cloned()
                .zip(rec.unwrap().iter().map(str::to_owned))
                .collect()
        })
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn write_spec(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const TWO_STATE: &str = r#"schema_version = 1
id = "tmp"
states = 2
v = [1.0, 2.0]
f = [3.0, 3.0]
xi = [0.0, 1.0]

[sequence]
mode = "homogeneous"
kernels = [ROWS]

[phi]
alpha = 0.5
beta = 1.0

[run]
start = [0, 1]
eps_b = 0.5
"#;

fn two_state(rows: &str) -> String {
    TWO_STATE.replace("ROWS", rows)
}

#[test]
fn rates_table() {
    let o = subgeo(&[
        "rates", "--alpha", "0.5", "--beta", "1", "--eps-b", "0.5", "--n", "8",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("n,r,delta,big_h,big_h_inv\n"));
    let rows = records(&text);
    assert_eq!(rows.len(), 8);
    assert_eq!(num(&rows[6]["r"]), 2.5);
    let o = subgeo(&["rates", "--alpha", "0", "--n", "20"]);
    assert!(records(&stdout(&o))
        .iter()
        .all(|r| num(&r["r"]) == 1.0 && num(&r["delta"]) == 0.0));
}

#[test]
fn certify_examples() {
    let o = subgeo(&[
        "certify",
        "--spec",
        chain("worked_two_state").to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let rows = records(&stdout(&o));
    let get = |k: &str| rows.iter().find(|r| r["quantity"] == k).unwrap()["value"].clone();
    assert!((num(&get("eps_nu")) - 0.7).abs() < 1e-15);
    assert_eq!(num(&get("c_v")), 2.0);

    let dir = tempfile::tempdir().unwrap();
    let same = write_spec(&dir, "same.toml", &two_state("[[0.2, 0.8], [0.2, 0.8]]"));
    let o = subgeo(&["certify", "--spec", same.to_str().unwrap()]);
    let rows = records(&stdout(&o));
    assert_eq!(
        num(&rows.iter().find(|r| r["quantity"] == "eps_nu").unwrap()["value"]),
        1.0
    );

    let flat = r#"schema_version = 1
id = "flat"
states = 3
v = [1.0, 1.0, 1.0]
small_set = [0]

[sequence]
mode = "homogeneous"
kernels = [[[0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5]]]

[phi]
alpha = 0.0
beta = 0.1
"#;
    let flat = write_spec(&dir, "flat.toml", flat);
    let o = subgeo(&["certify", "--spec", flat.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.starts_with("kernel_index,state,margin\n"));
    assert_eq!(records(&text).len(), 2);
}

#[test]
fn constants_examples() {
    let path = chain("constant_phi_certificate");
    let o = subgeo(&["constants", "--spec", path.to_str().unwrap()]);
    assert!(o.status.success());
    let row = &records(&stdout(&o))[0];
    assert_eq!(num(&row["c"]), 88.0);
    assert_eq!(num(&row["c_star"]), 2.0);

    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(&path)
        .unwrap()
        .replace("eps_nu = 0.5", "eps_nu = 1.0");
    let p = write_spec(&dir, "one.toml", &text);
    let row = &records(&stdout(&subgeo(&[
        "constants",
        "--spec",
        p.to_str().unwrap(),
    ])))[0];
    assert_eq!(num(&row["c"]), 48.0);
    assert_eq!(row["m_one"], "");
}

#[test]
fn verify_exit_codes() {
    let o = subgeo(&[
        "verify",
        "--spec",
        chain("worked_two_state").to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = records(&stdout(&o));
    assert!(rows.iter().all(|r| r["pass"] == "true"));
    for id in [
        "drift_iv",
        "lemma_rate_sum",
        "theorem_stationary",
        "corollary_rescaled",
    ] {
        assert!(rows.iter().any(|r| r["check_id"] == id), "{id}");
    }
    // C̄ is the whole square on this chain.
    assert!(!rows.iter().any(|r| r["check_id"] == "drift_i"));

    let dir = tempfile::tempdir().unwrap();
    let bad = write_spec(&dir, "bad.toml", &two_state("[[0.7, 0.3], [0.4, 0.5]]"));
    let o = subgeo(&["verify", "--spec", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 1"));

    let constant_f = write_spec(&dir, "c.toml", &two_state("[[0.7, 0.3], [0.4, 0.6]]"));
    let o = subgeo(&[
        "verify",
        "--suite",
        "theorem",
        "--spec",
        constant_f.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let rows = records(&stdout(&o));
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| num(&r["lhs"]) == 0.0));
}

#[test]
fn worked_chain_summed_differences_snapshot() {
    // With λ = 0.3 the second eigenvalue, f = (1, -1) and r(n) = 1 + n/4:
    // Σ r(n) |Δ_n f| = 2 Σ (1 + n/4) 0.3^n = 2 (1/0.7 + 0.075/0.49).
    let o = subgeo(&[
        "verify",
        "--suite",
        "theorem",
        "--spec",
        chain("worked_two_state").to_str().unwrap(),
    ]);
    let rows = records(&stdout(&o));
    let row = rows
        .iter()
        .find(|r| r["check_id"] == "theorem" && r["param"] == "xi=1" && r["pair"] == "(0,1)")
        .unwrap();
    let want = 2.0 * (1.0 / 0.7 + 0.075 / 0.49);
    assert!((num(&row["lhs"]) - want).abs() < 1e-13 * want);
    let ratio = (num(&row["lhs"]) + num(&row["tail"])) / num(&row["rhs"]);
    assert!((ratio - 1.768_372_624e-8).abs() < 1e-17, "{ratio:e}");
}

#[test]
fn simulate_examples() {
    let dir = tempfile::tempdir().unwrap();
    let same = write_spec(&dir, "same.toml", &two_state("[[0.2, 0.8], [0.2, 0.8]]"));
    let o = subgeo(&[
        "simulate",
        "--replicates",
        "5000",
        "--seed",
        "3",
        "--spec",
        same.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let rows = records(&stdout(&o));
    let tau = rows.iter().find(|r| r["statistic"] == "tau").unwrap();
    assert_eq!(num(&tau["mean"]), 1.0);
    assert_eq!(num(&tau["dp_value"]), 1.0);

    let args = ["simulate", "--replicates", "3000", "--seed", "5", "--spec"];
    let path = chain("alternating_cycle");
    let mut full: Vec<&str> = args.to_vec();
    full.push(path.to_str().unwrap());
    assert_eq!(subgeo(&full).stdout, subgeo(&full).stdout);
    let mut other = full.clone();
    other[4] = "6";
    assert_ne!(subgeo(&full).stdout, subgeo(&other).stdout);
}
