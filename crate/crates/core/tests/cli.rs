use quadtors::cli::ResultRecord;
use quadtors::growth::TorsionF;
use quadtors::torsion::Shape;
use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadtors")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("quadtors-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn shape(m: u64, n: u64) -> Shape {
    Shape::new(m, n).unwrap()
}

#[test]
fn classify_single_curves() {
    let o = run(&["classify", "--field", "gauss", "--curve", "[0,0,0,4,0]"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = ResultRecord::from_line(stdout(&o).trim()).unwrap();
    assert_eq!(r.v, 1);
    assert_eq!(r.torsion_k, shape(2, 4));
    assert_eq!(r.torsion_f, TorsionF::Exact(shape(4, 8)));

    let o = run(&["classify", "--field", "eisenstein", "--curve", "[0,0,0,0,1]"]);
    let r = ResultRecord::from_line(stdout(&o).trim()).unwrap();
    assert_eq!(r.torsion_f, TorsionF::Exact(shape(4, 12)));
}

#[test]
fn malformed_input_names_the_position() {
    let o = run(&["classify", "--curve", "[0,0,0,4x,0]"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("position 8") && err.contains('x'), "{err}");

    let o = run(&["classify", "--curve", "[0,0,0,0,0]"]);
    assert_eq!(o.status.code(), Some(1));

    let p = tmp("bad.jsonl");
    std::fs::write(&p, "{\"coefficients\":[0,0,0,4,0]}\n{\"coefficients\": [1,\n").unwrap();
    let o = run(&["classify", "--input", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let o = run(&["classify"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn record_files_and_expectations() {
    let p = tmp("curves.jsonl");
    std::fs::write(
        &p,
        concat!(
            "{\"id\":\"x32\",\"field\":\"gauss\",\"coefficients\":[\"0\",\"0\",\"0\",\"4\",\"0\"],\"expected\":{\"torsion_F\":{\"exact\":{\"m\":4,\"n\":8}}}}\n",
            "\n",
            "{\"id\":\"x36\",\"field\":\"eisenstein\",\"coefficients\":\"[0,0,0,0,1]\"}\n",
        ),
    )
    .unwrap();
    let o = run(&["classify", "--input", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let ids: Vec<String> = stdout(&o).lines().map(|l| ResultRecord::from_line(l).unwrap().id).collect();
    assert_eq!(ids, ["x32", "x36"]);

    std::fs::write(&p, "{\"id\":\"x32\",\"field\":\"gauss\",\"coefficients\":[0,0,0,4,0],\"expected\":{\"torsion_K\":{\"m\":4,\"n\":4}}}\n").unwrap();
    let o = run(&["classify", "--input", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("violation"));
}

#[test]
fn corpus_is_deterministic_and_listed() {
    let (a, b, t) = (tmp("a.jsonl"), tmp("b.jsonl"), tmp("t.jsonl"));
    for out in [&a, &b] {
        let o = run(&["corpus", "--field", "gauss", "--coeff-bound", "3", "--out", out.to_str().unwrap(), "--timing", t.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let summary: Value = serde_json::from_str(stderr(&o).trim()).unwrap();
        assert_eq!(summary["v"], 1);
        assert_eq!(summary["candidate_sets"], 0);
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!x.is_empty());
    assert_eq!(x, y);
    let lines = String::from_utf8(x).unwrap();
    let n = lines.lines().count();
    for l in lines.lines() {
        let r = ResultRecord::from_line(l).unwrap();
        assert!(!l.contains("ms"));
        assert_eq!(ResultRecord::from_line(&r.to_line()).unwrap(), r);
    }
    assert_eq!(std::fs::read_to_string(&t).unwrap().lines().count(), n);

    let o = run(&["corpus", "--field", "eisenstein", "--coeff-bound", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().all(|l| ResultRecord::from_line(l).is_ok()));
}

#[test]
fn empty_corpus() {
    let (input, out) = (tmp("empty.jsonl"), tmp("empty-out.jsonl"));
    std::fs::write(&input, "").unwrap();
    let o = run(&["corpus", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(&out).unwrap(), Vec::<u8>::new());
}

fn verify(suite: &str) -> (Option<i32>, Vec<Value>) {
    let o = run(&["verify", suite]);
    (o.status.code(), stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect())
}

#[test]
fn verify_suites() {
    let (code, lines) = verify("cusps");
    assert_eq!(code, Some(0));
    assert_eq!(lines.last().unwrap()["failed"], 0);

    let (code, lines) = verify("jacobian");
    assert_eq!(code, Some(0));
    let computed: Vec<&str> = lines.iter().filter_map(|l| l["computed"].as_str()).collect();
    assert!(computed.contains(&"79") && computed.contains(&"171"));

    let (code, lines) = verify("fermat");
    assert_eq!(code, Some(0));
    assert_eq!(lines[0]["computed"], "40");

    let (code, lines) = verify("jinv");
    assert_eq!(code, Some(2));
    assert_eq!(lines.last().unwrap()["failed"], 1);
}

#[test]
fn small_commands() {
    let o = run(&["cusps", "32"]);
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["total"], 8);
    assert_eq!(run(&["cusps", "0"]).status.code(), Some(1));

    let o = run(&["count-points", "--field", "gauss", "--curve", "[0,0,0,4,0]", "--prime", "2-s"]);
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!((v["q"].as_u64(), v["points"].as_u64()), (Some(5), Some(8)));

    let o = run(&["fermat-search", "--field", "gauss", "--height", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let last: Value = serde_json::from_str(stdout(&o).lines().last().unwrap()).unwrap();
    assert_eq!((last["solutions"].as_u64(), last["nontrivial"].as_u64()), (Some(8), Some(0)));

    let o = run(&["--factor-norm-bound", "1000", "fermat-search", "--field", "gauss", "--radicands", "-7", "--height", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let last: Value = serde_json::from_str(stdout(&o).lines().last().unwrap()).unwrap();
    assert_eq!(last["nontrivial"], 32);
}
