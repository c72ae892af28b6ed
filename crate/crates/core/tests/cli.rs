use std::path::Path;
use std::process::{Command, Output};

use seqcliff::cli::records::{read_jsonl_strict, TrialLine};
use seqcliff::tasks::TaskInstance;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqcliff"))
        .current_dir(dir)
        .env_remove("SEQCLIFF_OUT_DIR")
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

const CYCLIC: &str = "[task]\nkind = \"cyclic\"\nalphabet_size = 13\n[grid]\nlengths = [5, 10]\ninstances_per_n = 3\nseed = 4\n";

fn self_responses(instances: &str, model: &str) -> String {
    instances
        .lines()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            let r = serde_json::json!({"task": v["task"], "n": v["n"], "seed": v["seed"], "model": model, "response": v["expected"]});
            format!("{r}\n")
        })
        .collect()
}

#[test]
fn generate_writes_valid_deterministic_instances() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.toml", CYCLIC);
    assert!(run(dir.path(), &["generate", "--config", "run.toml", "--out", "a"]).status.success());
    assert!(run(dir.path(), &["generate", "--config", "run.toml", "--out", "b"]).status.success());
    let a = read(dir.path(), "a/instances.jsonl");
    assert_eq!(a, read(dir.path(), "b/instances.jsonl"));
    assert_eq!(a.lines().count(), 6);
    assert!(a.ends_with('\n') && !a.contains('\r'));

    let instances: Vec<TaskInstance> = read_jsonl_strict(&dir.path().join("a/instances.jsonl")).unwrap();
    for inst in &instances {
        inst.verify().unwrap();
    }
    // Writing the parsed records back reproduces the file byte for byte.
    let rewritten: String = instances.iter().map(|i| serde_json::to_string(i).unwrap() + "\n").collect();
    assert_eq!(rewritten, a);
    assert!(a.lines().next().unwrap().starts_with(r#"{"task":"cyclic","n":5,"seed":"#));

    assert!(run(dir.path(), &["generate", "--config", "run.toml", "--out", "c", "--seed", "5"]).status.success());
    assert_ne!(a, read(dir.path(), "c/instances.jsonl"));
}

#[test]
fn forced_addition_pair() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "run.toml",
        "[task]\nkind = \"addition\"\n[grid]\nlengths = [4]\ninstances_per_n = 1\nfixed_inputs = [\"1234 + 5678\"]\n",
    );
    assert!(run(dir.path(), &["generate", "--config", "run.toml", "--out", "."]).status.success());
    let text = read(dir.path(), "instances.jsonl");
    let last = text.lines().last().unwrap();
    assert_eq!(last, r#"{"task":"addition","n":4,"seed":0,"params":{"digits":4},"input":"1234 + 5678","expected":"6912"}"#);
}

#[test]
fn judge_builds_curve_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "run.toml", CYCLIC);
    run(d, &["generate", "--config", "run.toml", "--out", "."]);
    let mut responses = self_responses(&read(d, "instances.jsonl"), "m");
    responses.push_str("not json\n");
    responses.push_str("{\"task\":\"cyclic\",\"n\":7,\"seed\":1,\"model\":\"m\",\"response\":\"AB\"}\n");
    write(d, "responses.jsonl", &responses);
    let out = run(d, &["judge", "--instances", "instances.jsonl", "--responses", "responses.jsonl", "--out", "."]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let curve = read(d, "curve.csv");
    let mut lines = curve.lines();
    assert_eq!(lines.next(), Some("n,trials,successes,sar,ci_low,ci_high"));
    assert!(lines.next().unwrap().starts_with("5,3,3,1.0,"));
    let rejects = read(d, "rejects.jsonl");
    assert_eq!(rejects.lines().count(), 2);
    assert!(rejects.starts_with(r#"{"line":7,"#));

    let trials: Vec<TrialLine> = read_jsonl_strict(&d.join("trials.jsonl")).unwrap();
    assert_eq!(trials.len(), 6);
    assert!(trials.iter().all(|t| t.strict && t.relaxed && t.model == "m"));
}

#[test]
fn relaxed_criterion_ignores_pauli_phase() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(
        d,
        "run.toml",
        "[task]\nkind = \"pauli\"\n[grid]\nlengths = [1]\ninstances_per_n = 1\nfixed_inputs = [\"+1 X * +1 Y\"]\n",
    );
    run(d, &["generate", "--config", "run.toml", "--out", "."]);
    // Seed 0 is the fixed input; its answer is "+i Z".
    write(d, "responses.jsonl", "{\"task\":\"pauli\",\"n\":1,\"seed\":0,\"model\":\"m\",\"response\":\"-i Z\"}\n");
    for (criterion, sar) in [("strict", "0.0"), ("relaxed", "1.0")] {
        let out = run(
            d,
            &["judge", "--instances", "instances.jsonl", "--responses", "responses.jsonl", "--criterion", criterion, "--out", criterion],
        );
        assert!(out.status.success());
        let curve = read(d, &format!("{criterion}/curve.csv"));
        assert_eq!(curve.lines().nth(1).unwrap().split(',').nth(3), Some(sar), "{criterion}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "run.toml", CYCLIC);
    run(d, &["generate", "--config", "run.toml", "--out", "."]);

    write(d, "empty.jsonl", "");
    let out = run(d, &["judge", "--instances", "instances.jsonl", "--responses", "empty.jsonl", "--out", "e"]);
    assert_eq!(out.status.code(), Some(7));
    assert_eq!(read(d, "e/curve.csv"), "n,trials,successes,sar,ci_low,ci_high\n");

    write(d, "bad.toml", "[grid]\nlengths = [3, 2]\n");
    let out = run(d, &["generate", "--config", "bad.toml"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.lengths"));

    assert_eq!(run(d, &["fit", "--curve", "missing.csv"]).status.code(), Some(4));
    write(d, "ones.csv", "n,trials,successes,sar,ci_low,ci_high\n1,5,5,1.0,0.5,1.0\n2,5,5,1.0,0.5,1.0\n");
    assert_eq!(run(d, &["fit", "--curve", "ones.csv"]).status.code(), Some(5));
    write(d, "broken.csv", "n,trials,successes\n1,5,9\n");
    assert_eq!(run(d, &["fit", "--curve", "broken.csv"]).status.code(), Some(6));
    write(d, "dup.jsonl", &(read(d, "instances.jsonl") + &read(d, "instances.jsonl")));
    write(d, "resp.jsonl", &self_responses(&read(d, "instances.jsonl"), "m"));
    assert_eq!(
        run(d, &["judge", "--instances", "dup.jsonl", "--responses", "resp.jsonl"]).status.code(),
        Some(6)
    );
    assert_eq!(run(d, &["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(d, &["plan", "--alpha", "1.2"]).status.code(), Some(3));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "run.toml", &format!("{CYCLIC}[output]\ndir = \"cfg\"\n"));
    let out = Command::new(env!("CARGO_BIN_EXE_seqcliff"))
        .current_dir(d)
        .env("SEQCLIFF_OUT_DIR", "env")
        .args(["generate", "--config", "run.toml"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(d.join("env/instances.jsonl").exists());
    run(d, &["generate", "--config", "run.toml"]);
    assert!(d.join("cfg/instances.jsonl").exists());
}

#[test]
fn fit_recovers_noise_free_curve() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // Counts out of 10^15 trials reproduce SAR(n) for α = 1.1, β₀ = 0.01 to about 1e-15.
    let trials = 1_000_000_000_000_000u64;
    let mut csv = String::from("n,trials,successes,sar,ci_low,ci_high\n");
    for n in 1..=40 {
        let p = (-0.01 * n as f64 * 1.1f64.powi(n - 1)).exp();
        let s = (p * trials as f64).round() as u64;
        csv.push_str(&format!("{n},{trials},{s},0,0,0\n"));
    }
    write(d, "curve.csv", &csv);
    let out = run(d, &["fit", "--curve", "curve.csv", "--out", "."]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&read(d, "fit.json")).unwrap();
    let alpha = report["alpha"].as_f64().unwrap();
    let beta0 = report["beta0"].as_f64().unwrap();
    assert!((alpha / 1.1 - 1.0).abs() < 1e-9, "{alpha}");
    assert!((beta0 / 0.01 - 1.0).abs() < 1e-9, "{beta0}");
    assert_eq!(report["points_used"], 40);
    assert!(report["map"]["log_nstar"].as_f64().is_some());
    assert!(report["nstar_closed"].as_f64().is_some());
}

#[test]
fn simulate_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(
        d,
        "zero.toml",
        "[simulate]\nj0 = 0.0\nh = 1.0\nlengths = [1, 3, 6]\nrealizations = 8\nmaster_seed = 3\n",
    );
    assert!(run(d, &["simulate", "--config", "zero.toml", "--out", "z"]).status.success());
    let theory = read(d, "z/theory.csv");
    assert!(theory.starts_with("n,sar_geo,sar_arith,stderr_log,sar_pert2,sar_pert4,sar_crossover,sar_independent\n"));
    for row in theory.lines().skip(1) {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[1], cols[7], "{row}");
        assert_eq!(cols[4], cols[7]);
        assert_eq!(cols[5], cols[7]);
    }
    assert!(read(d, "z/ensemble.csv").starts_with("n,j0,h,R,sar_geo,sar_arith,stderr_log\n1,0.0,1.0,8,"));

    write(
        d,
        "sk.toml",
        "[simulate]\nj0 = 0.1\nh = 2.0\nlengths = [6]\nrealizations = 400\nmaster_seed = 11\ntrials_per_realization = 5\n",
    );
    let one = run(d, &["simulate", "--config", "sk.toml", "--out", "t1", "--threads", "1"]);
    let four = run(d, &["simulate", "--config", "sk.toml", "--out", "t4", "--threads", "4"]);
    assert!(one.status.success() && four.status.success());
    for f in ["theory.csv", "ensemble.csv", "synthetic_curve.csv", "simulate_meta.json"] {
        assert_eq!(read(d, &format!("t1/{f}")), read(d, &format!("t4/{f}")), "{f}");
    }
    let row: Vec<f64> = read(d, "t1/theory.csv").lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    let (geo, se, o4) = (row[1].ln(), row[3], row[5].ln());
    assert!((geo - o4).abs() <= 3.0 * se);
}

#[test]
fn plan_table() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run(d, &["plan", "--alpha", "1.2", "--beta0", "0.001", "--theta", "1", "--n", "30", "--k-max", "3", "--out", "."]);
    assert!(out.status.success());
    let text = read(d, "plan.csv");
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["k", "sar_single", "sar_dc", "gain", "n_dc", "nstar_extended", "first_positive"]);
    assert_eq!(rows[1][4], "");
    assert_eq!(rows[1][6], "false");
    assert_eq!(rows[2][6], "true");
    assert!((rows[2][4].parse::<f64>().unwrap() - 8.604).abs() < 1e-3);
    assert!((rows[3][3].parse::<f64>().unwrap() - 5.779).abs() < 1e-3);

    run(d, &["plan", "--alpha", "1", "--beta0", "0.01", "--n", "20", "--k-max", "4", "--out", "flat"]);
    let flat = read(d, "flat/plan.csv");
    assert!(flat.lines().skip(1).all(|l| l.split(',').nth(3) == Some("0.0")));
}
