use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn shapelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shapelab"))
        .args(args)
        .env_remove("SHAPELAB_OUT")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", stderr(o)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn compute_disc_document() {
    let o = shapelab(&["compute", "--family", "disc", "--h", "1/64"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "compute");
    assert_eq!(v["input"]["family"]["family"], "disc");
    assert_eq!(v["input"]["h"], 1.0 / 64.0);
    let f = v["functional"]["f_q"].as_f64().unwrap();
    assert!((f - 0.5f64.sqrt()).abs() < 0.005 * 0.5f64.sqrt(), "{f}");
    for key in ["measure", "hole_count", "topology", "solve", "richardson", "torsion"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn domain_files_and_their_errors() {
    let dir = tempfile::tempdir().unwrap();
    let square = write(dir.path(), "square.json", r#"{"outer": [[[0,0],[1,0],[1,1],[0,1]]]}"#);
    let o = shapelab(&["compute", "--domain", &square, "--h", "1/64"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert!((v["measure"]["perimeter"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert_eq!(v["input"]["domain_file"], square.as_str());

    let typo = write(
        dir.path(),
        "typo.json",
        r#"{"outer": [[[0,0],[1,0],[1,1]]], "hole": []}"#,
    );
    let o = shapelab(&["compute", "--domain", &typo]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("hole"), "{}", stderr(&o));

    let broken = write(dir.path(), "broken.json", r#"{"outer": [[[0,0],[1,0]"#);
    assert_eq!(code(&shapelab(&["compute", "--domain", &broken])), 2);

    let bowtie = write(dir.path(), "bowtie.json", r#"{"outer": [[[0,0],[1,1],[1,0],[0,1]]]}"#);
    let o = shapelab(&["compute", "--domain", &bowtie]);
    assert_eq!(code(&o), 2);
    assert!(!stderr(&o).is_empty());

    let missing = dir.path().join("absent.json").display().to_string();
    assert_eq!(code(&shapelab(&["compute", "--domain", &missing])), 2);
}

#[test]
fn bad_settings_exit_with_input_error() {
    assert_eq!(code(&shapelab(&["compute", "--family", "disc", "--q", "0.7"])), 2);
    assert_eq!(code(&shapelab(&["compute", "--family", "disc", "--h", "-1"])), 2);
    assert_eq!(code(&shapelab(&["compute", "--family", "hexagon"])), 2);
    assert_eq!(code(&shapelab(&["compute", "--radius", "2"])), 2);
    assert_eq!(code(&shapelab(&["compute", "--family", "disc", "--width", "2"])), 2);
}

#[test]
fn verify_passes_on_disc_and_flags_too_many_holes() {
    let o = shapelab(&["verify", "--family", "disc", "--h", "1/64"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["summary"]["all_pass"], true);
    let labels: Vec<&str> = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["label"].as_str().unwrap())
        .collect();
    for l in [
        "isoperimetric",
        "saint_venant",
        "nagy_concavity",
        "bonnesen",
        "torsion_bound_chain",
        "hole_count",
    ] {
        assert!(labels.contains(&l), "no {l} in {labels:?}");
    }

    let o = shapelab(&[
        "verify",
        "--family",
        "k_hole_disc",
        "--holes",
        "2",
        "--k",
        "0",
        "--h",
        "1/64",
    ]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert!(v["summary"]["failed"]
        .as_array()
        .unwrap()
        .iter()
        .any(|n| n == "class_membership"));
}

#[test]
fn profile_csv_and_sweep_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let o = shapelab(&["profile", "--family", "square", "--h", "1/64", "--out", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,A,L_diff,L_contour,g");
    assert_eq!(fs::read_to_string(dir.path().join("profile.csv")).unwrap(), csv);
    let doc: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("profile.json")).unwrap()).unwrap();
    assert_eq!(doc["command"], "profile");

    let o = shapelab(&[
        "sweep",
        "--family",
        "rectangle",
        "--width",
        "2,3,4,5",
        "--no-richardson",
        "--h",
        "1/32",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 5);

    // Two ramps at once are refused.
    let o = shapelab(&[
        "sweep",
        "--family",
        "rectangle",
        "--width",
        "2,3,4,5",
        "--height",
        "1..2",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn optimize_edge_cases() {
    let o = shapelab(&["optimize", "--budget", "0"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("no feasible point"), "{}", stderr(&o));
    assert_eq!(
        code(&shapelab(&[
            "optimize",
            "--start-holes",
            "2",
            "--k",
            "1",
            "--budget",
            "10"
        ])),
        2
    );

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let args = [
        "optimize",
        "--budget",
        "40",
        "--resolution",
        "16",
        "--fine-resolution",
        "0",
        "--seed",
        "5",
    ];
    let o = shapelab(&[&args[..], &["--out", &out]].concat());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["summary"]["evaluations"], 40);
    let artifact = dir.path().join("optimize.json").display().to_string();
    let more = shapelab(&["optimize", "--resume", &artifact, "--budget", "20"]);
    assert_eq!(code(&more), 0, "{}", stderr(&more));
    assert_eq!(json(&more)["summary"]["evaluations"], 60);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let runs: [&[&str]; 3] = [
        &["compute", "--family", "annulus", "--h", "1/32"],
        &["verify", "--family", "slit_disc", "--n", "4", "--h", "1/32"],
        &[
            "optimize",
            "--budget",
            "30",
            "--resolution",
            "16",
            "--fine-resolution",
            "24",
            "--seed",
            "9",
        ],
    ];
    for args in runs {
        let a = shapelab(args);
        let b = shapelab(args);
        assert!(a.status.success(), "{args:?}: {}", stderr(&a));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn top_level_keys_match_the_shipped_schemas() {
    let schemas = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let runs: [&[&str]; 5] = [
        &["compute", "--family", "disc", "--h", "1/32"],
        &["verify", "--family", "disc", "--h", "1/32"],
        &["profile", "--family", "disc", "--h", "1/32"],
        &[
            "sweep",
            "--family",
            "rectangle",
            "--width",
            "2,3,4,5",
            "--h",
            "1/16",
            "--no-richardson",
        ],
        &[
            "optimize",
            "--budget",
            "20",
            "--resolution",
            "12",
            "--fine-resolution",
            "16",
        ],
    ];
    for args in runs {
        let o = shapelab(&[args, &["--out", &out]].concat());
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        let doc: Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(format!("{}.json", args[0]))).unwrap()).unwrap();
        let schema: Value =
            serde_json::from_str(&fs::read_to_string(schemas.join(format!("{}.schema.json", args[0]))).unwrap())
                .unwrap();
        let mut want: Vec<&str> = schema["required"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap())
            .collect();
        let mut got: Vec<&str> = doc.as_object().unwrap().keys().map(String::as_str).collect();
        want.sort_unstable();
        got.sort_unstable();
        assert_eq!(got, want, "{}", args[0]);
        assert_eq!(doc["schema_version"], schema["properties"]["schema_version"]["const"]);
    }
}
