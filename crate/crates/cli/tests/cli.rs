use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qgnls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgnls"))
        .args(args)
        .env_remove("QGNLS_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const DUMBBELL: &str = "\
vertex a
vertex b
edge la a a 6.283185307179586
edge lb b b 6.283185307179586
edge e0 a b 3.141592653589793
";

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn linear_dtn_of_single_edge_is_tanh() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(
        dir.path(),
        "edge.graph",
        "vertex a\nvertex b\nedge e a b 1\nboundary a\n",
    );
    for route in ["linear", "scattering"] {
        let o = qgnls(&["dtn", route, "--graph", &g, "--mu", "5"]);
        assert!(o.status.success());
        let r = rows(&stdout(&o));
        assert_eq!(r[0], ["vertex", "a"]);
        let v: f64 = r[1][1].parse().unwrap();
        assert!((v - 5f64.tanh()).abs() < 1e-10, "{route}: {v}");
    }
    let o = qgnls(&[
        "dtn",
        "linear",
        "--graph",
        &g,
        "--mu",
        "5",
        "--graph-convention",
    ]);
    let v: f64 = rows(&stdout(&o))[1][1].parse().unwrap();
    assert!((v - 5.0 * 5f64.tanh()).abs() < 1e-9);
}

#[test]
fn rank_prefers_the_loop_of_a_single_edge_dumbbell() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "db.graph", DUMBBELL);
    let o = qgnls(&["rank", "--graph", &g, "--mu", "3"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["schema"], "qgnls.rank");
    let first = doc["ranking"][0]["edge"].as_str().unwrap();
    assert!(first == "la" || first == "lb", "{first}");
}

#[test]
fn malformed_graph_exits_with_configuration_status() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "bad.graph", "vertex a\nedge e a b 1\n");
    let o = qgnls(&["graph", "validate", &g]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    let o = qgnls(&[
        "graph",
        "validate",
        dir.path().join("missing").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let g = write(dir.path(), "db.graph", DUMBBELL);
    let o = qgnls(&[
        "solve", "--graph", &g, "--lambda", "1", "--seed", "constant",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "db.graph", DUMBBELL);
    let a = qgnls(&[
        "--threads",
        "1",
        "predict",
        "--graph",
        &g,
        "--mu",
        "3",
        "--refine",
    ]);
    let b = qgnls(&[
        "--threads",
        "4",
        "predict",
        "--graph",
        &g,
        "--mu",
        "3",
        "--refine",
    ]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn solve_dump_seeds_an_identical_state() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "db.graph", DUMBBELL);
    let dump = dir.path().join("state.csv");
    let o = qgnls(&[
        "--strict",
        "solve",
        "--graph",
        &g,
        "--lambda",
        "-9",
        "--seed",
        "prediction:la",
        "--out",
        dump.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(first["loc_edge"], "la");
    let seed = format!("file:{}", dump.display());
    let o = qgnls(&["solve", "--graph", &g, "--lambda", "-9", "--seed", &seed]);
    assert!(o.status.success());
    let second: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let q = |v: &serde_json::Value| v["mass"].as_f64().unwrap();
    assert!((q(&first) - q(&second)).abs() < 1e-9);
}

#[test]
fn continued_branches_compare_through_their_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "db.graph", DUMBBELL);
    let mut files = Vec::new();
    for edge in ["la", "e0"] {
        let out = dir.path().join(format!("{edge}.csv"));
        let seed = format!("prediction:{edge}");
        let o = qgnls(&[
            "--strict",
            "continue",
            "--graph",
            &g,
            "--lambda-range=-9:-16:8",
            "--seed",
            &seed,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let text = fs::read_to_string(&out).unwrap();
        let r = rows(&text);
        assert_eq!(
            r[0],
            [
                "Lambda",
                "mu",
                "Q",
                "E",
                "residual",
                "loc_edge",
                "loc_ratio"
            ]
        );
        assert_eq!(r.len(), 9);
        assert!(r[1..].iter().all(|row| row[5] == edge));
        files.push(out);
    }
    let o = qgnls(&[
        "--strict",
        "compare",
        "--first",
        files[0].to_str().unwrap(),
        "--second",
        files[1].to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(doc["comparisons"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["winner"] == "first"));
    assert_eq!(doc["lemma"]["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn manifold_starts_at_the_origin() {
    let o = qgnls(&["dtn", "manifold", "--L", "3", "--grid", "0:1:11"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert_eq!(r[0], ["amplitude", "p", "q", "regime", "drift"]);
    assert_eq!(r.len(), 12);
    let p: f64 = r[1][1].parse().unwrap();
    assert_eq!(p, 0.0);
}

#[test]
fn every_subcommand_has_help() {
    for args in [
        vec!["--help"],
        vec!["graph", "validate", "--help"],
        vec!["graph", "absorb", "--help"],
        vec!["dtn", "linear", "--help"],
        vec!["dtn", "scattering", "--help"],
        vec!["dtn", "manifold", "--help"],
        vec!["predict", "--help"],
        vec!["rank", "--help"],
        vec!["solve", "--help"],
        vec!["continue", "--help"],
        vec!["compare", "--help"],
        vec!["reproduce", "dumbbell", "--help"],
        vec!["reproduce", "tadpole", "--help"],
        vec!["reproduce", "periodic", "--help"],
    ] {
        let o = qgnls(&args);
        assert!(o.status.success(), "{args:?}");
        assert!(stdout(&o).contains("Usage"), "{args:?}");
    }
}

#[test]
fn perturbed_seed_is_reproducible_and_converges_back() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "db.graph", DUMBBELL);
    let base = [
        "solve",
        "--graph",
        &g,
        "--lambda",
        "-9",
        "--seed",
        "prediction:e0",
    ];
    let plain = qgnls(&base);
    let mut args = base.to_vec();
    args.extend(["--perturb", "0.05", "--rng-seed", "7"]);
    let (a, b) = (qgnls(&args), qgnls(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mass = |o: &Output| {
        let v: serde_json::Value = serde_json::from_str(&stdout(o)).unwrap();
        v["mass"].as_f64().unwrap()
    };
    assert!((mass(&a) - mass(&plain)).abs() < 1e-9);
}
