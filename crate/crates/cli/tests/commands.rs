use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn texmetric(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_texmetric"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = texmetric(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SPEC: &str = r#"
n_classes = 4
samples_per_class = 4
sample_rate = 2500.0
duration = 0.4
band_range = [10.0, 600.0]
nuisance_center = 500.0
"#;

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        let ws = Workspace {
            dir: tempfile::tempdir().unwrap(),
        };
        fs::write(ws.path("spec.toml"), SPEC).unwrap();
        ws
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// Train and test datasets plus their feature CSVs.
    fn corpus(&self) {
        let spec = self.path("spec.toml");
        ok(&["synth", s(&spec), s(&self.path("train")), "--seed", "1"]);
        ok(&["synth", s(&spec), s(&self.path("test")), "--seed", "2"]);
        for set in ["train", "test"] {
            ok(&[
                "extract",
                s(&self.path(set)),
                s(&self.path(&format!("{set}.csv"))),
            ]);
        }
    }
}

fn tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(root).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn synth_is_reproducible() {
    let ws = Workspace::new();
    let spec = ws.path("spec.toml");
    ok(&["synth", s(&spec), s(&ws.path("a"))]);
    ok(&["synth", s(&spec), s(&ws.path("b"))]);
    let (a, b) = (tree(&ws.path("a")), tree(&ws.path("b")));
    assert_eq!(a.len(), 16);
    assert_eq!(a, b);
}

#[test]
fn missing_spec_exits_2() {
    let ws = Workspace::new();
    let out = texmetric(&["synth", s(&ws.path("nope.toml")), s(&ws.path("x"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.toml"));
}

#[test]
fn invalid_spec_and_config_exit_2() {
    let ws = Workspace::new();
    fs::write(ws.path("bad.toml"), "n_classes = 0\n").unwrap();
    let out = texmetric(&["synth", s(&ws.path("bad.toml")), s(&ws.path("x"))]);
    assert_eq!(out.status.code(), Some(2));

    ws.corpus();
    fs::write(ws.path("cfg.toml"), "bogus_key = 1\n").unwrap();
    let out = texmetric(&[
        "extract",
        s(&ws.path("train")),
        s(&ws.path("f.csv")),
        "--config",
        s(&ws.path("cfg.toml")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!ws.path("f.csv").exists());
}

#[test]
fn extract_writes_one_row_per_recording_and_is_stable() {
    let ws = Workspace::new();
    ws.corpus();
    let csv = fs::read_to_string(ws.path("train.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "label,a1,a2,a3,a4,a5,a6,a7,a8,a9,a10,a11");
    assert_eq!(lines.len(), 17);
    assert!(lines[1].starts_with("class_00,"));
    assert!(lines.iter().all(|l| l.split(',').count() == 12));

    ok(&["extract", s(&ws.path("train")), s(&ws.path("again.csv"))]);
    assert_eq!(
        fs::read(ws.path("train.csv")).unwrap(),
        fs::read(ws.path("again.csv")).unwrap()
    );

    ok(&[
        "extract",
        s(&ws.path("train")),
        s(&ws.path("b5.csv")),
        "--bins",
        "5",
        "--alpha",
        "1.0",
        "--mode",
        "bounded",
        "--log-energy",
    ]);
    let b5 = fs::read_to_string(ws.path("b5.csv")).unwrap();
    assert!(b5.starts_with("label,a1,a2,a3,a4,a5\n"));
}

#[test]
fn extract_empty_dir_exits_2() {
    let ws = Workspace::new();
    fs::create_dir(ws.path("empty")).unwrap();
    let out = texmetric(&["extract", s(&ws.path("empty")), s(&ws.path("f.csv"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn train_defaults_are_recorded_and_reproducible() {
    let ws = Workspace::new();
    ws.corpus();
    let train = s(&ws.path("train.csv")).to_string();
    ok(&[
        "train",
        &train,
        s(&ws.path("m1.txt")),
        "--max-iterations",
        "40",
    ]);
    ok(&[
        "train",
        &train,
        s(&ws.path("m2.txt")),
        "--max-iterations",
        "40",
    ]);
    let m1 = fs::read_to_string(ws.path("m1.txt")).unwrap();
    assert_eq!(m1, fs::read_to_string(ws.path("m2.txt")).unwrap());
    assert!(m1.starts_with("dim=11\n"));
    assert!(m1.contains("regularizer=1e-7\n"));
    assert!(m1.contains("max_iterations=40\n"));

    ok(&[
        "train",
        &train,
        s(&ws.path("zero.txt")),
        "--max-iterations",
        "0",
    ]);
    let zero = fs::read_to_string(ws.path("zero.txt")).unwrap();
    assert!(zero.starts_with("dim=11\nterms=0\n"));
    assert!(zero.contains("max_iterations=0\n"));

    fs::write(ws.path("cfg.toml"), "max_iterations = 5\n").unwrap();
    ok(&[
        "train",
        &train,
        s(&ws.path("m3.txt")),
        "--config",
        s(&ws.path("cfg.toml")),
    ]);
    assert!(fs::read_to_string(ws.path("m3.txt"))
        .unwrap()
        .contains("max_iterations=5\n"));
}

#[test]
fn full_default_training_records_protocol_values() {
    let ws = Workspace::new();
    ws.corpus();
    ok(&["train", s(&ws.path("train.csv")), s(&ws.path("m.txt"))]);
    let m = fs::read_to_string(ws.path("m.txt")).unwrap();
    assert!(m.contains("regularizer=1e-7\n"));
    assert!(m.contains("max_iterations=3000\n"));
}

#[test]
fn evaluate_identical_sets_k1_is_perfect() {
    let ws = Workspace::new();
    ws.corpus();
    let train = s(&ws.path("train.csv")).to_string();
    let out = ok(&[
        "evaluate",
        &train,
        &train,
        "--k",
        "1",
        "--out",
        s(&ws.path("conf.csv")),
    ]);
    assert!(out.contains("accuracy: 100.00% (16/16)"), "{out}");
    let conf = fs::read_to_string(ws.path("conf.csv")).unwrap();
    assert!(conf.starts_with("class,class_00,class_01,class_02,class_03\n"));
}

#[test]
fn evaluate_with_model_file_nb_and_boost() {
    let ws = Workspace::new();
    ws.corpus();
    let (train, test) = (
        s(&ws.path("train.csv")).to_string(),
        s(&ws.path("test.csv")).to_string(),
    );
    ok(&[
        "train",
        &train,
        s(&ws.path("m.txt")),
        "--max-iterations",
        "50",
    ]);
    let a = ok(&["evaluate", &train, &test, "--metric", s(&ws.path("m.txt"))]);
    let b = ok(&[
        "evaluate",
        &train,
        &test,
        "--metric",
        "boost",
        "--max-iterations",
        "50",
    ]);
    assert_eq!(a, b);
    assert!(a.starts_with("accuracy: "));
    let nb = ok(&["evaluate", &train, &test, "--classifier", "nb"]);
    assert!(nb.starts_with("accuracy: "));
    ok(&[
        "evaluate",
        &train,
        &test,
        "--standardize",
        "--representatives",
        "3",
        "--k",
        "1",
    ]);
}

#[test]
fn evaluate_missing_model_exits_2() {
    let ws = Workspace::new();
    ws.corpus();
    let train = s(&ws.path("train.csv")).to_string();
    let out = texmetric(&[
        "evaluate",
        &train,
        &train,
        "--metric",
        s(&ws.path("missing.txt")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.txt"));
}

#[test]
fn evaluate_sweep_over_dimensions() {
    let ws = Workspace::new();
    ws.corpus();
    let out = ok(&[
        "evaluate",
        s(&ws.path("train")),
        s(&ws.path("test")),
        "--sweep-dims",
        "3..5",
        "--out",
        s(&ws.path("sweep.csv")),
    ]);
    assert_eq!(out.lines().count(), 3, "{out}");
    let table = fs::read_to_string(ws.path("sweep.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "bins,accuracy");
    assert!(rows[1].starts_with("3,") && rows[3].starts_with("5,"));
}

#[test]
fn discriminate_perfectly_separated_classes() {
    let ws = Workspace::new();
    let mut csv = String::from("label,a1,a2\n");
    for (c, centre) in [(0, 0.0), (1, 100.0), (2, 200.0)] {
        for i in 0..3 {
            csv.push_str(&format!("k{c},{},{}\n", centre + i as f64 * 0.1, -centre));
        }
    }
    fs::write(ws.path("f.csv"), csv).unwrap();
    let out = ok(&["discriminate", s(&ws.path("f.csv")), s(&ws.path("d.csv"))]);
    assert_eq!(out.trim(), "average discrimination error: 0.00%");
    let d = fs::read_to_string(ws.path("d.csv")).unwrap();
    assert!(
        d.starts_with("class,k0,k1,k2\nk0,0.000000000,1.000000000,1.000000000\n"),
        "{d}"
    );
}

#[test]
fn discriminate_single_class_exits_2() {
    let ws = Workspace::new();
    fs::write(ws.path("f.csv"), "label,a1\nx,1\nx,2\n").unwrap();
    let out = texmetric(&["discriminate", s(&ws.path("f.csv")), s(&ws.path("d.csv"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!ws.path("d.csv").exists());
}

#[test]
fn boosted_discrimination_not_worse_on_synthetic_corpus() {
    let ws = Workspace::new();
    ws.corpus();
    ok(&[
        "train",
        s(&ws.path("train.csv")),
        s(&ws.path("m.txt")),
        "--max-iterations",
        "200",
    ]);
    let err = |metric: &str| -> f64 {
        let out = ok(&[
            "discriminate",
            s(&ws.path("test.csv")),
            s(&ws.path("d.csv")),
            "--metric",
            metric,
        ]);
        out.trim()
            .strip_prefix("average discrimination error: ")
            .and_then(|v| v.strip_suffix('%'))
            .unwrap()
            .parse()
            .unwrap()
    };
    let euclid = err("euclidean");
    let boosted = err(s(&ws.path("m.txt")));
    assert!(boosted <= euclid, "{boosted} > {euclid}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(texmetric(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        texmetric(&["evaluate", "a", "b", "--sweep-dims", "9..2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        texmetric(&["extract", "a", "b", "--mode", "sideways"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn overflowing_features_exit_1_without_output() {
    let ws = Workspace::new();
    fs::write(
        ws.path("huge.csv"),
        "label,a1\nx,1e300\nx,-1e300\ny,0\ny,5e299\n",
    )
    .unwrap();
    let out = texmetric(&["train", s(&ws.path("huge.csv")), s(&ws.path("m.txt"))]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(!ws.path("m.txt").exists());
}
