use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_structgen"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn schema_validate_reports_counts_and_errors() {
    let ok = run(&["schema-validate", p(&data("transport.schema"))]);
    assert!(ok.status.success());
    assert_eq!(stdout(&ok).trim(), "ok: 2 event types, 9 roles");

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.schema");
    std::fs::write(&bad, "Attack: Target\nAttack: Victim\n").unwrap();
    let out = run(&["schema-validate", p(&bad)]);
    assert_eq!(out.status.code(), Some(5));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    let out = run(&["schema-validate", p(&dir.path().join("missing"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn encode_two_event_sentence() {
    let out = run(&["encode", p(&data("capture.jsonl")), "--schema", p(&data("transport.schema"))]);
    assert!(out.status.success(), "{}", stderr(&out));
    let lines: Vec<String> = stdout(&out).lines().map(str::to_owned).collect();
    assert_eq!(
        lines,
        [
            "( ( Transport returned ( Artifact The man ) ( Destination Los Angeles ) ( Origin Mexico ) ) \
             ( Arrest Jail capture ( Person The man ) ( Time Tuesday ) ( Agent bounty hunters ) ) )",
            "( )",
        ]
    );
}

#[test]
fn encode_rejects_records_outside_the_schema() {
    let out = run(&["encode", p(&data("capture.jsonl")), "--schema", p(&data("transfer.schema"))]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn parse_empty_structure() {
    let dir = tempfile::tempdir().unwrap();
    let seqs = dir.path().join("seqs.txt");
    std::fs::write(&seqs, "( )\n").unwrap();
    let out = run(&["parse", p(&seqs), "--schema", p(&data("transport.schema"))]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "{\"id\":\"1\",\"text\":\"\",\"events\":[]}\n");
}

#[test]
fn parse_errors_are_positioned() {
    let dir = tempfile::tempdir().unwrap();
    let seqs = dir.path().join("seqs.txt");
    std::fs::write(&seqs, "( )\n( ( Transport x ( Bogus y ) ) )\n").unwrap();
    let out = run(&["parse", p(&seqs), "--schema", p(&data("transport.schema"))]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("line 2: unknown role \"Bogus\" at position 5"), "{}", stderr(&out));
}

#[test]
fn encode_and_parse_are_inverse() {
    let dir = tempfile::tempdir().unwrap();
    let schema = data("transport.schema");
    let records = dir.path().join("records.jsonl");
    let synth = run(&["synth", "--schema", p(&schema), "--n", "40", "--seed", "3", "-o", p(&records)]);
    assert!(synth.status.success());

    let pairs = dir.path().join("pairs.jsonl");
    let back = dir.path().join("back.jsonl");
    let pairs2 = dir.path().join("pairs2.jsonl");
    assert!(run(&["encode", p(&records), "--schema", p(&schema), "--pairs", "-o", p(&pairs)]).status.success());
    assert!(run(&["parse", p(&pairs), "--schema", p(&schema), "-o", p(&back)]).status.success());
    assert!(run(&["encode", p(&back), "--schema", p(&schema), "--pairs", "-o", p(&pairs2)]).status.success());
    let read = |f: &Path| std::fs::read_to_string(f).unwrap();
    assert_eq!(read(&back), read(&records));
    assert_eq!(read(&pairs2), read(&pairs));

    let sample = data("capture.jsonl");
    let sample_pairs = dir.path().join("sample_pairs.jsonl");
    let sample_back = dir.path().join("sample_back.jsonl");
    assert!(run(&["encode", p(&sample), "--schema", p(&schema), "--pairs", "-o", p(&sample_pairs)]).status.success());
    assert!(run(&["parse", p(&sample_pairs), "--schema", p(&schema), "-o", p(&sample_back)]).status.success());
    assert_eq!(read(&sample_back), read(&sample));
}

#[test]
fn synth_train_decode_eval_pipeline_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let schema = data("transport.schema");
    let corpus = dir.path().join("corpus.jsonl");
    let model = dir.path().join("model.json");
    let pred = dir.path().join("pred.jsonl");

    let a = run(&["synth", "--schema", p(&schema), "--n", "60", "--seed", "7"]);
    let b = run(&["synth", "--schema", p(&schema), "--n", "60", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    std::fs::write(&corpus, &a.stdout).unwrap();

    let train = run(&["train", p(&corpus), "--schema", p(&schema), "-o", p(&model), "--seed", "1"]);
    assert!(train.status.success(), "{}", stderr(&train));
    let report = stdout(&train);
    assert!(report.contains("curriculum") && report.contains("direct"), "{report}");
    let first_model = std::fs::read(&model).unwrap();
    assert!(run(&["train", p(&corpus), "--schema", p(&schema), "-o", p(&model), "--seed", "1"]).status.success());
    assert_eq!(std::fs::read(&model).unwrap(), first_model);

    let dec = |extra: &[&str]| {
        let mut args = vec!["decode", p(&corpus), "--schema", p(&schema), "--scorer", p(&model), "-o", p(&pred)];
        args.extend_from_slice(extra);
        let out = run(&args);
        assert!(out.status.success(), "{}", stderr(&out));
        std::fs::read_to_string(&pred).unwrap()
    };
    let greedy = dec(&["--greedy"]);
    assert_eq!(dec(&[]), greedy);
    assert_eq!(greedy.lines().count(), 60);
    let beam = dec(&["--beam", "3"]);
    assert_eq!(beam.lines().count(), 60);

    let eval = run(&["eval", "--gold", p(&corpus), "--pred", p(&pred), "--json"]);
    assert!(eval.status.success(), "{}", stderr(&eval));
    let json: serde_json::Value = serde_json::from_str(&stdout(&eval)).unwrap();
    for key in ["Trig-I", "Trig-C", "Arg-I", "Arg-C"] {
        let f1 = json[key]["f1"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&f1));
    }
    let text = run(&["eval", "--gold", p(&corpus), "--pred", p(&corpus)]);
    assert!(stdout(&text).contains("Trig-C"));
    assert!(stdout(&text).contains("100.00"));
}

#[test]
fn decode_with_builtin_scorers() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.jsonl");
    std::fs::write(&input, "{\"id\":\"e\",\"text\":\"\"}\n{\"id\":\"x\",\"text\":\"He returned home.\"}\n").unwrap();
    for scorer in ["uniform", "random:4"] {
        let out = run(&["decode", p(&input), "--schema", p(&data("transport.schema")), "--scorer", scorer, "--beam", "2"]);
        assert!(out.status.success(), "{}", stderr(&out));
        let first = stdout(&out).lines().next().unwrap().to_owned();
        assert_eq!(first, "{\"id\":\"e\",\"text\":\"\",\"events\":[],\"target\":\"( )\"}");
    }
    let out = run(&["decode", p(&input), "--schema", p(&data("transport.schema")), "--scorer", "random:x"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_rejects_misaligned_files() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("pred.jsonl");
    std::fs::write(&pred, "{\"id\":\"other\",\"text\":\"x\",\"events\":[]}\n").unwrap();
    let out = run(&["eval", "--gold", p(&data("capture.jsonl")), "--pred", p(&pred)]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn fuzz_reports_zero_violations() {
    let out = run(&["fuzz", "--schema", p(&data("transfer.schema")), "--seeds", "500"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("decodes: 500"));
    assert!(text.lines().any(|l| l == "violations: 0"), "{text}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["decode"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
}
