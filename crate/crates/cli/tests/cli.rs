use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn specmult(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specmult")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn record_of(out: &Output) -> Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    let line = text.lines().last().expect("a record line");
    serde_json::from_str(line).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn multiplicity_sets() {
    let out = specmult(&["multiplicity", "--set", "1,3", "--regime", "chacon"]);
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "{1,3,∞}\n"));
    let out = specmult(&["multiplicity", "--set", "1", "--regime", "salem"]);
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "{1,∞}\n"));
    let out = specmult(&["theorem1-1", "--set", "2,5"]);
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "{2,5,∞}\n"));
}

#[test]
fn explain_adds_the_trace() {
    let out = specmult(&["multiplicity", "--set", "2", "--regime", "chacon", "--explain"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("{2,∞}\n"));
    assert!(text.lines().count() > 2, "{text}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&specmult(&["multiplicity", "--set", ""])), 1);
    assert_eq!(code(&specmult(&["multiplicity", "--set", "1", "--regime", "weak"])), 1);
    assert_eq!(code(&specmult(&["multiplicity", "--set", "1", "--turbo"])), 1);
    assert_eq!(code(&specmult(&["theorem4", "--m", "4=1", "--t", "2"])), 1);
    assert_eq!(code(&specmult(&["flow-scan", "--flow", "/no/such/file", "--times", "1"])), 1);
    assert_eq!(code(&specmult(&[])), 1);
}

#[test]
fn help_exits_zero() {
    let out = specmult(&["rankone", "--help"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("--weak-limit"));
}

#[test]
fn flow_commands() {
    let out = specmult(&["theorem4", "--m", "2=1,3=2", "--t", "12"]);
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "{1,2,∞}\n"));

    let out = specmult(&["flow-scan", "--flow", "theorem2", "--times", "1..6"]);
    assert_eq!(code(&out), 0);
    let lines: Vec<Value> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 6);
    for (i, line) in lines.iter().enumerate() {
        let t = i + 1;
        let want = if t % 2 == 0 { "{2,∞}" } else { "{1,∞}" };
        assert_eq!(line["t"], t.to_string());
        assert_eq!(line["multiplicities"], want);
    }

    let out = specmult(&["exceptional", "--flow", "theorem2", "--interval", "0,5", "--max-den", "1"]);
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "2, 4\n"));

    let out = specmult(&["theorem4-scan", "--m", "2=2,3=3,5=4", "--target", "2,4"]);
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "10\n"));
    let out = specmult(&["theorem4-scan", "--m", "2=2,3=3", "--target", "7"]);
    assert_eq!((code(&out), stdout(&out).as_str()), (3, "none\n"));
}

#[test]
fn flow_from_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let flow = write(
        dir.path(),
        "flow.toml",
        "profile = \"chacon\"\n[[component]]\nfrequency = \"0\"\ncopies = 1\nbase = \"sigma\"\n\
         [[component]]\nfrequency = \"1/3\"\ncopies = 1\nbase = \"sigma\"\n",
    );
    let out = specmult(&["exceptional", "--flow", &flow, "--interval", "0,10", "--max-den", "2"]);
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "3, 6, 9\n"));
}

#[test]
fn gaussian_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let ty = write(
        dir.path(),
        "u.toml",
        "[[term]]\nbase = \"sigma\"\nlevel = 1\nphase = \"1\"\nregularity = \"singular\"\npower_tag = 1\nmultiplicity = \"2\"\n",
    );
    let out = specmult(&["gaussian", "--type", &ty, "--profile", "chacon", "--explain"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.starts_with("{2,∞}\n"));
    assert!(text.contains("level 2"));

    // an undecided regime cannot saturate the expansion: refusal, not an error
    let profile = write(dir.path(), "none.toml", "name = \"open\"\nregime = \"none\"\n");
    let out = specmult(&["gaussian", "--type", &ty, "--profile", &profile]);
    assert_eq!(code(&out), 2);
    assert!(record_of(&out)["error"].as_str().unwrap().contains("saturation"));
}

#[test]
fn rankone_tables_and_budget() {
    let out = specmult(&["rankone", "--stage", "99"]);
    assert_eq!(code(&out), 2);

    let out = specmult(&["rankone", "--preset", "classic-chacon", "--stage", "6", "--max-lag", "3"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().take(2).collect::<Vec<_>>(), ["k,r_k", "0,1"]);
    assert_eq!(stdout(&out).lines().count(), 5);

    let args = ["rankone", "--preset", "two-adic-chacon", "--weak-limit", "--stages", "6..10", "--target", "1/2"];
    let out = specmult(&args);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("stage,height,r_h,deviation\n"));
    assert_eq!(record_of(&out)["result"]["summary"]["decreasing"], true);

    let out = specmult(&["rankone", "--preset", "two-adic-chacon", "--weak-limit", "--stages", "6..10", "--target", "3/4"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn riesz_reports() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "r.toml",
        "frequencies = [3, 9, 27, 81, 243, 729]\ncoefficients = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0]\n",
    );
    let out = specmult(&["riesz", "--spec", &spec, "--affinity-z", "golden", "--grid", "4096"]);
    assert!(stdout(&out).starts_with("K,affinity\n4,"));
    assert_eq!(stdout(&out).lines().count(), 4);
    let record = record_of(&out);
    let last: f64 = record["result"]["summary"]["final"].as_f64().unwrap();
    assert_eq!(code(&out), if last < 0.1 { 0 } else { 3 });

    let out = specmult(&["riesz", "--spec", &spec, "--affinity-z", "0", "--grid", "4096", "--threshold", "0.5"]);
    assert_eq!(code(&out), 3);

    let out = specmult(&["riesz", "--default", "--coefficients", "1"]);
    assert_eq!(stdout(&out), "n,re,im\n-1,0,0\n0,1,0\n1,0,0\n");
    assert_eq!(code(&specmult(&["riesz", "--default", "--depth", "30"])), 1);
}

#[test]
fn output_is_deterministic_and_runs_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["flow-scan", "--flow", "theorem2", "--times", "1..12,3/2,5/2"];
    let a = specmult(&args);
    let b = specmult(&args);
    assert_eq!(a.stdout, b.stdout);

    let rec = dir.path().join("run.json");
    let out_path = dir.path().join("out.txt");
    let mut with_files = args.to_vec();
    let rec_s = rec.to_str().unwrap();
    let out_s = out_path.to_str().unwrap();
    with_files.extend(["--record", rec_s, "--output", out_s]);
    let c = specmult(&with_files);
    assert_eq!(code(&c), 0);
    assert!(c.stdout.is_empty() && c.stderr.is_empty());
    assert_eq!(fs::read(&out_path).unwrap(), a.stdout);

    let record: Value = serde_json::from_str(&fs::read_to_string(&rec).unwrap()).unwrap();
    assert_eq!(record["command"], "flow-scan");
    assert_eq!(record["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(record["config"]["command"]["times"], "1..12,3/2,5/2");
    assert_eq!(record["exit_code"], 0);
    assert!(record["metadata"]["timestamp_unix_ms"].as_u64().unwrap() > 0);

    // records differ only in metadata
    let (mut ra, mut rb) = (record_of(&a), record_of(&b));
    ra.as_object_mut().unwrap().remove("metadata");
    rb.as_object_mut().unwrap().remove("metadata");
    assert_eq!(ra, rb);
}
