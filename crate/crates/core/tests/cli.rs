use std::process::{Command, Output};

fn bnqn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bnqn"))
        .args(args)
        .env("BNQN_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn solve_reaches_the_positive_root() {
    let o = bnqn(&["solve", "--poly", "-1,0,1", "--method", "bnqn", "--z0", "0.3,-1.7"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(field(&text, "class"), "Root(1)");
    let point: Vec<f64> = field(&text, "terminal_point")
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!((point[0] - 1.0).abs() < 1e-9 && point[1].abs() < 1e-9);
    // 17 significant digits
    assert!(field(&text, "grad_norm").contains('e'));
    let mantissa = field(&text, "terminal_point")
        .split(',')
        .next()
        .unwrap()
        .split('e')
        .next()
        .unwrap();
    assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
}

#[test]
fn solve_writes_trace_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let o = bnqn(&["solve", "--z0", "0,0.8", "--trace", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,x,y,gamma,delta_index,grad_norm"));
    assert!(csv
        .trim_end()
        .ends_with("# terminal=CriticalNonRoot(0.0000000000000000e0+0.0000000000000000e0i)"));
}

#[test]
fn basin_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let ppm = dir.path().join("b.ppm");
    let csv = dir.path().join("b.csv");
    let o = bnqn(&[
        "basin",
        "--poly",
        "-1,0,1",
        "--method",
        "bnqn",
        "--window",
        "-2,2,-2,2",
        "--res",
        "101,101",
        "--out",
        ppm.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let bytes = std::fs::read(&ppm).unwrap();
    let header = b"P6\n101 101\n255\n";
    assert!(bytes.starts_with(header));
    assert_eq!(bytes.len(), header.len() + 101 * 101 * 3);
    let table = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(table.lines().next(), Some("i,j,x,y,class,root_index,iterations"));
    assert_eq!(table.lines().count(), 1 + 101 * 101);
    let text = stdout(&o);
    assert_eq!(field(&text, "diverged"), "0");
    assert_eq!(field(&text, "undecided"), "0");
    assert_eq!(field(&text, "critical"), "101");
}

#[test]
fn invariance_deviation_is_tiny() {
    let o = bnqn(&[
        "invariance",
        "--poly",
        "-1,0,1",
        "--c",
        "2",
        "--rotation",
        "0.7",
        "--z0",
        "0.4,1.1",
        "--steps",
        "100",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let dev: f64 = field(&stdout(&o), "max_deviation").parse().unwrap();
    assert!(dev <= 1e-8, "{dev}");
}

#[test]
fn rrn_cubic_hits_every_root() {
    let o = bnqn(&["rrn", "--poly", "-1,0,0,1", "--rho", "0.7", "--trials", "500"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for i in 0..3 {
        let n: usize = field(&text, &format!("root_{i}")).parse().unwrap();
        assert!(n > 0);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<(Vec<u8>, Vec<u8>)> = ["2", "1"]
        .iter()
        .enumerate()
        .map(|(k, threads)| {
            let ppm = dir.path().join(format!("{k}.ppm"));
            let o = Command::new(env!("CARGO_BIN_EXE_bnqn"))
                .args([
                    "basin", "--poly", "-1,0,0,1", "--method", "rrn1d", "--res", "40,40", "--seed", "11",
                ])
                .args(["--out", ppm.to_str().unwrap()])
                .env("BNQN_THREADS", threads)
                .output()
                .unwrap();
            assert_eq!(o.status.code(), Some(0));
            (o.stdout, std::fs::read(&ppm).unwrap())
        })
        .collect();
    assert_eq!(runs[0], runs[1]);

    let a = bnqn(&["rrn", "--trials", "100", "--seed", "3"]);
    let b = bnqn(&["rrn", "--trials", "100", "--seed", "3"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(bnqn(&["--help"]).status.code(), Some(0));
    assert_eq!(bnqn(&["rrn", "--rho", "1.0"]).status.code(), Some(1));
    assert_eq!(bnqn(&["solve", "--deltas", "0,0,1"]).status.code(), Some(1));
    assert_eq!(bnqn(&["solve", "--poly", "abc"]).status.code(), Some(1));
    assert_eq!(bnqn(&["frobnicate"]).status.code(), Some(1));
    let unwritable = bnqn(&["basin", "--res", "3,3", "--out", "/nonexistent-dir/x.ppm"]);
    assert_eq!(unwritable.status.code(), Some(2));
    assert!(!unwritable.stderr.is_empty());
}

#[test]
fn help_lists_defaults() {
    let text = stdout(&bnqn(&["solve", "--help"]));
    for needle in ["[default: 0,1,-1]", "[default: 1]", "[default: 0]", "[default: 1e-10]"] {
        assert!(text.contains(needle), "missing {needle} in\n{text}");
    }
}
