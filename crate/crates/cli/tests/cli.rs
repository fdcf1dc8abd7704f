use std::path::PathBuf;
use std::process::{Command, Output};

use higherk::atlas::{parse_generated_csv, regenerate, VerifyOptions};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_higherk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data")
}

#[test]
fn curve_info() {
    let o = run(&["curve-info", "3:0:-1:-1"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("a       3"), "{s}");
    assert!(s.contains("E(F)    {O}"));
    assert!(s.contains("(3±√−3)/2"));

    let s = stdout(&run(&["curve-info", "5:0:1:0", "--format", "kv"]));
    assert!(s.contains("EF=\"Z/2Z x Z/2Z\""), "{s}");

    let o = run(&["curve-info", "3:0:0:0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("singular"));
}

#[test]
fn kgroup_orders_and_structures() {
    let s = stdout(&run(&[
        "kgroup",
        "3:0:-1:-1",
        "--m",
        "1..6",
        "--format",
        "csv",
    ]));
    let orders: Vec<&str> = s
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(orders, ["19", "217", "2107", "19441", "176419", "1592137"]);

    let s = stdout(&run(&["kgroup", "7:0:0:2", "--m", "1", "--format", "csv"]));
    assert!(s.contains("1,K_2,351,Z/3 x Z/117,Z/3Z x Z/117Z,yes"), "{s}");

    let s = stdout(&run(&["kgroup", "13:0:0:5", "--m", "1", "--format", "csv"]));
    assert!(s.contains("Z/4 x Z/556"), "{s}");

    assert_eq!(
        run(&["kgroup", "3:0:-1:-1", "--m", "3..1"]).status.code(),
        Some(2)
    );
}

#[test]
fn tower_reports() {
    let s = stdout(&run(&["tower", "3:0:-1:-1", "--l", "19"]));
    assert!(
        s.starts_with("λ=1; K_2(19^m)(19) ≅ Z/19^{m+1}, m ≥ 0"),
        "{s}"
    );

    let s = stdout(&run(&["tower", "5:0:1:0", "--l", "2", "--format", "csv"]));
    assert!(
        s.starts_with("l,lambda,nu,m0,formula\n2,2,3,1,2:1/2:1\n"),
        "{s}"
    );

    let o = run(&["tower", "3:0:-1:-1", "--l", "5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_shipped_data() {
    let o = run(&["verify"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("PASS over 92 rows"), "{s}");

    let o = run(&["verify", "--format", "csv"]);
    let s = stdout(&o);
    let registered = s
        .lines()
        .filter(|l| l.contains(",registered,") || l.contains(",duplicate,"))
        .count();
    assert!(registered >= 6);
    assert!(!s.contains(",hard,"));

    let o = run(&["verify", "--table", "I"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("Table I: 8 rows"), "{s}");
    assert!(s.contains("I      2    K8    registered"));
}

#[test]
fn perturbed_digit_fails() {
    let dir = std::env::temp_dir().join(format!("higherk-perturbed-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for t in ["I", "II", "III", "IV", "V"] {
        let name = format!("table_{t}.csv");
        std::fs::copy(data_dir().join(&name), dir.join(&name)).unwrap();
    }
    let path = dir.join("table_I.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains(",Z/2107Z,"));
    std::fs::write(&path, text.replacen(",Z/2107Z,", ",Z/2108Z,", 1)).unwrap();

    let o = run(&[
        "verify",
        "--data-dir",
        dir.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let s = stdout(&o);
    assert!(
        s.lines()
            .any(|l| l.starts_with("I,1,K6,hard,Z/2108Z,Z/2107Z")),
        "{s}"
    );

    let o = run(&[
        "verify",
        "--data-dir",
        dir.to_str().unwrap(),
        "--table",
        "II",
    ]);
    assert_eq!(o.status.code(), Some(0));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_is_deterministic() {
    let a = run(&["verify", "--format", "csv", "--seed", "7"]);
    let b = run(&["verify", "--format", "csv", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn tables_round_trip() {
    let o = run(&["tables", "--field", "5", "--m", "1..2", "--format", "csv"]);
    assert!(o.status.success());
    let parsed = parse_generated_csv(&stdout(&o)).unwrap();
    let in_memory = regenerate(5, &[1, 2], &VerifyOptions::default()).unwrap();
    assert_eq!(parsed, in_memory);
    assert_eq!(parsed.len(), 12);
    assert_eq!(run(&["tables", "--field", "9"]).status.code(), Some(2));
}
