use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn aksara(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aksara")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn translit_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    fs::write(&input, "tjara djawa\nsugeng enjing\n").unwrap();
    let o = aksara(&["translit", "--language", "jav", p(&input)]);
    assert!(o.status.success());
    let aksara_path = dir.path().join("ak.txt");
    fs::write(&aksara_path, stdout(&o)).unwrap();
    let back = aksara(&["translit", "--language", "jav", "--to", "latin", p(&aksara_path)]);
    assert_eq!(stdout(&back), "cara jawa\nsugeng enjing\n");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(aksara(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(aksara(&["--help"]).status.code(), Some(0));
    let missing = dir.path().join("nope.toml");
    assert_eq!(
        aksara(&["--config", p(&missing), "build-dataset"]).status.code(),
        Some(1)
    );
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    fs::write(&a, "x\ny\n").unwrap();
    fs::write(&b, "x\n").unwrap();
    let o = aksara(&["score", "--refs", p(&a), "--hyps", p(&b)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("2 references but 1 hypotheses"));
    let o = aksara(&["score", "--refs", p(&a), "--hyps", p(&a), "--beta", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn score_reports_wer_over_100() {
    let dir = tempfile::tempdir().unwrap();
    let r = dir.path().join("r.txt");
    let h = dir.path().join("h.txt");
    fs::write(&r, "a\n").unwrap();
    fs::write(&h, "b c\n").unwrap();
    let o = aksara(&["score", "--refs", p(&r), "--hyps", p(&h), "--format", "jsonl"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["wer_pct"], 200.0);
    assert_eq!(v["language"], "all");
}

#[test]
fn build_dataset_from_config_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.txt"),
        "aku lunga\naku mulih\nkowe neng endi\nsugeng\n",
    )
    .unwrap();
    let cfg = dir.path().join("build.toml");
    fs::write(
        &cfg,
        "language = \"jav\"\ninput_paths = [\"c.txt\"]\noutput_dir = \"out\"\nbuild_vocab = true\n\n[split]\ntrain = 0.5\neval = 0.5\nseed = 1\n",
    )
    .unwrap();
    let o = aksara(&["--config", p(&cfg), "--seed", "5", "build-dataset", "--workers", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("train.jsonl\t2 examples"));
    let first = fs::read(dir.path().join("out/train.jsonl")).unwrap();
    let o = aksara(&["--config", p(&cfg), "--seed", "5", "build-dataset"]);
    assert!(o.status.success());
    assert_eq!(fs::read(dir.path().join("out/train.jsonl")).unwrap(), first);
}

#[test]
fn tokenize_stats_and_split() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    fs::write(&corpus, "aku lunga\naku mulih\n").unwrap();
    let vocab = dir.path().join("v.txt");
    let o = aksara(&["tokenize", "--language", "jav", "--build-vocab", p(&vocab), p(&corpus)]);
    assert!(o.status.success());
    let o = aksara(&[
        "tokenize",
        "--language",
        "jav",
        "--vocab",
        p(&vocab),
        "--sentinels",
        p(&corpus),
    ]);
    assert_eq!(stdout(&o), "2 4 5 3\n2 4 6 3\n");

    let corpus_arg = format!("jav={}", p(&corpus));
    let vocab_arg = format!("jav={}", p(&vocab));
    let o = aksara(&[
        "stats",
        "--corpus",
        &corpus_arg,
        "--vocab",
        &vocab_arg,
        "--format",
        "jsonl",
    ]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["oov_rate"], 0.0);
    assert_eq!(v["fertility"], 1.0);

    let tr = dir.path().join("tr.txt");
    let ev = dir.path().join("ev.txt");
    let o = aksara(&[
        "split",
        "--input",
        p(&corpus),
        "--train-fraction",
        "0.5",
        "--seed",
        "3",
        "--train-out",
        p(&tr),
        "--eval-out",
        p(&ev),
    ]);
    assert!(o.status.success());
    let mut lines: Vec<String> = fs::read_to_string(&tr)
        .unwrap()
        .lines()
        .chain(fs::read_to_string(&ev).unwrap().lines())
        .map(String::from)
        .collect();
    lines.sort();
    assert_eq!(lines, ["aku lunga", "aku mulih"]);
}

#[test]
fn render_writes_png_and_tensor() {
    let dir = tempfile::tempdir().unwrap();
    let png = dir.path().join("h.png");
    let bin = dir.path().join("h.bin");
    let o = aksara(&[
        "render",
        "--text",
        "Hello, aks",
        "--output",
        p(&png),
        "--tensor",
        p(&bin),
    ]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o).trim(),
        r#"{"num_text_patches":4,"patches":4,"truncated":false}"#
    );
    let tensor = fs::read(&bin).unwrap();
    assert_eq!(&tensor[..12], &[4, 0, 0, 0, 16, 0, 0, 0, 16, 0, 0, 0]);
    assert_eq!(tensor.len(), 16 + 4 * 256);
    assert!(png.exists());
}

#[test]
fn graphemes_merge_sundanese_pamaeh() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("s.txt");
    fs::write(&f, "\u{1B8A}\u{1BAA}\u{1B8A}\u{1BA4}\n").unwrap();
    let o = aksara(&["tokenize", "--language", "sun", "--graphemes", p(&f)]);
    assert_eq!(stdout(&o), "\u{1B8A}\u{1BAA}\u{1B8A}\u{1BA4}\n");
    let o = aksara(&["tokenize", "--graphemes", p(&f)]);
    assert_eq!(stdout(&o), "\u{1B8A}\u{1BAA}|\u{1B8A}\u{1BA4}\n");
}
