use std::io::Write;
use std::process::{Command, Output, Stdio};

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_casp-forge"))
        .args(args)
        .env_remove("CASP_FORGE_SEED")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SAT: &str = "var x 1..3\nvar y 1..3\nvar z {2,3}\nalldiff x y z\nallowed c (x,y) {(1,2),(2,1),(3,1)}\n";
const UNSAT: &str = "var x 1..2\nvar y 1..2\nvar z 1..2\nalldiff x y z\n";

#[test]
fn solve_exit_codes() {
    for enc in ["direct", "support", "bound", "range", "B1", "R2"] {
        let o = run(&["solve", "-", "--encoding", enc], SAT);
        assert_eq!(o.status.code(), Some(10), "{enc}");
        assert!(stdout(&o).starts_with("status sat\n"));
        let o = run(&["solve", "-", "--encoding", enc], UNSAT);
        assert_eq!(o.status.code(), Some(20), "{enc}");
    }
}

#[test]
fn solve_prints_a_solution() {
    let o = run(&["solve", "-", "--heuristic", "smallest-domain"], SAT);
    let text = stdout(&o);
    let value = |name: &str| -> i64 {
        let line = text.lines().find(|l| l.starts_with(&format!("{name} = "))).unwrap();
        line.rsplit(' ').next().unwrap().parse().unwrap()
    };
    let (x, y, z) = (value("x"), value("y"), value("z"));
    assert!([(1, 2), (2, 1), (3, 1)].contains(&(x, y)));
    assert!(x != z && y != z && [2, 3].contains(&z));
}

#[test]
fn conflict_budget_gives_unknown() {
    let pigeons: String = (1..=9)
        .map(|i| format!("var p{i} 1..8\n"))
        .chain(["alldiff p1 p2 p3 p4 p5 p6 p7 p8 p9\n".to_string()])
        .collect();
    let o = run(&["solve", "-", "--encoding", "S", "--budget-conflicts", "5"], &pigeons);
    assert_eq!(o.status.code(), Some(30));
    assert!(stdout(&o).contains("conflicts 5 "));
}

#[test]
fn encode_prints_program() {
    let o = run(&["encode", "-", "--encoding", "direct"], "var x 1..2\nvar y 1..2\nneq x y\n");
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("{e(x,1); e(x,2)}."));
    assert!(text.contains("violate(c1) :- e(x,1), e(y,1)."));
    assert!(text.contains(":- violate(c1)."));
}

#[test]
fn encode_accepts_json() {
    let json = r#"{"variables":[{"name":"x","domain":[1,2]},{"name":"y","domain":[1,2]}],
        "constraints":[{"id":"c","kind":"neq","scope":["x","y"]}]}"#;
    let o = run(&["encode", "-", "--encoding", "support"], json);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("violate(c) :- e(x,1), not e(y,2)."));
}

#[test]
fn verify_reports_agreement() {
    for oracle in ["ac", "bound", "range", "domain", "semantic", "cardinality"] {
        let o = run(&["verify", "--oracle", oracle, "--instances", "30", "--seed", "4"], "");
        assert!(o.status.success(), "{oracle}: {}", stdout(&o));
        assert!(stdout(&o).contains("30/30 agree") || stdout(&o).contains("120/120 agree"));
    }
}

#[test]
fn bench_csv_rows_in_order() {
    let o = run(
        &["bench", "--family", "pigeonhole", "--n", "5,6", "--encodings", "S,B,R1", "--jobs", "2"],
        "",
    );
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "family,params,encoding,k,status,time_s,decisions,conflicts,propagations,seed,note");
    let keys: Vec<String> = lines[1..]
        .iter()
        .map(|l| l.split(',').take(4).collect::<Vec<_>>().join(","))
        .collect();
    assert_eq!(
        keys,
        vec![
            "pigeonhole,n=5,support,",
            "pigeonhole,n=5,bound,",
            "pigeonhole,n=5,range,1",
            "pigeonhole,n=6,support,",
            "pigeonhole,n=6,bound,",
            "pigeonhole,n=6,range,1",
        ]
    );
    assert!(lines[1..].iter().all(|l| l.split(',').nth(4) == Some("unsat")));
}

#[test]
fn seed_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_casp-forge"))
        .args(["bench", "--family", "qcp", "--n", "4", "--encodings", "S"])
        .env("CASP_FORGE_SEED", "17")
        .output()
        .unwrap();
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().nth(1).unwrap().split(',').nth(9), Some("17"));
}

#[test]
fn errors_exit_with_two() {
    let o = run(&["solve", "-"], "var x 1..2\nneq x q\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown variable"));
    let o = run(&["solve", "-", "--encoding", "Q"], SAT);
    assert_eq!(o.status.code(), Some(2));
}
