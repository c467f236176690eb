use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use roipcc::codec::Bitstream;
use roipcc::geometry::io::load_cloud;

fn roipcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roipcc"))
        .args(args)
        .env("ROIPCC_WORKERS", "2")
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> serde_json::Value {
    let out = roipcc(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON report on stdout")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, seed: &str) -> std::path::PathBuf {
    ok(&["synth", "--out", p(dir), "--seed", seed, "--frames", "3", "--ground-points", "4000", "--object-points", "500"]);
    dir.join("manifest.json")
}

#[test]
fn synth_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    synth(&tmp.path().join("a"), "17");
    synth(&tmp.path().join("b"), "17");
    for sub in ["frames/000002.bin", "boxes/000001.json", "labels/000000.json"] {
        assert_eq!(
            fs::read(tmp.path().join("a").join(sub)).unwrap(),
            fs::read(tmp.path().join("b").join(sub)).unwrap(),
            "{sub}"
        );
    }
}

#[test]
fn roi_encode_decode_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = synth(&tmp.path().join("scene"), "3");
    let masks = tmp.path().join("masks");
    let roi = ok(&["roi", "--manifest", p(&manifest), "--out", p(&masks), "--stride", "2"]);
    assert_eq!(roi["frames"], 3);
    assert_eq!(roi["key_frames"], 2);

    let stream = tmp.path().join("seq.rpcc");
    let enc = ok(&["encode", "--manifest", p(&manifest), "--masks", p(&masks), "--out", p(&stream), "--q-b", "45"]);
    let bytes = fs::read(&stream).unwrap();
    assert_eq!(enc["total_bits"].as_u64().unwrap(), bytes.len() as u64 * 8);
    let parsed = Bitstream::from_bytes(&bytes).unwrap();
    assert_eq!(parsed.to_bytes().unwrap(), bytes);

    let out = tmp.path().join("decoded");
    let dec = ok(&["decode", "--input", p(&stream), "--out", p(&out), "--format", "ply"]);
    assert_eq!(dec["frames"].as_array().unwrap().len(), 3);
    assert!(!load_cloud(&out.join("000000.ply")).unwrap().is_empty());
}

#[test]
fn eval_writes_curves() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = synth(&tmp.path().join("scene"), "5");
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "q_r = 20\nq_b = [36, 45]\n").unwrap();
    let out = tmp.path().join("eval");
    let report = ok(&["--config", p(&cfg), "eval", "--manifest", p(&manifest), "--out", p(&out)]);
    assert_eq!(report["q_b"], serde_json::json!([36, 45]));
    assert!(report["advantage"]["roi_mse"].is_number());
    for f in ["rows.csv", "summary_roi.csv", "summary_uniform.csv", "curves.csv", "advantage.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert_eq!(fs::read_to_string(out.join("rows.csv")).unwrap().lines().count(), 5);
}

#[test]
fn uniform_eval_bits_match_uniform_encode() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = synth(&tmp.path().join("scene"), "8");
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "q_b = [30, 40, 45]\n").unwrap();
    let out = tmp.path().join("eval");
    ok(&["--config", p(&cfg), "eval", "--manifest", p(&manifest), "--out", p(&out)]);
    let enc = ok(&["encode", "--manifest", p(&manifest), "--out", p(&tmp.path().join("u.rpcc")), "--q-b", "40"]);

    let mut rows = csv::Reader::from_path(out.join("rows.csv")).unwrap();
    let headers = rows.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let uniform = rows
        .records()
        .map(Result::unwrap)
        .find(|r| &r[col("mode")] == "uniform" && &r[col("q_b")] == "40")
        .unwrap();
    assert_eq!(uniform[col("bits")].parse::<u64>().unwrap(), enc["total_bits"].as_u64().unwrap());
}

#[test]
fn bench_reports_ratio() {
    let report = ok(&["bench-pib", "--points", "20000", "--boxes", "20", "--repeats", "1"]);
    assert!(report["ratio"].as_f64().unwrap() > 0.0);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(roipcc(&["encode"]).status.code(), Some(2));

    let manifest = synth(&tmp.path().join("scene"), "1");
    let bad_qp = roipcc(&["encode", "--manifest", p(&manifest), "--out", p(&tmp.path().join("x")), "--q-b", "60"]);
    assert_eq!(bad_qp.status.code(), Some(2));

    let missing = roipcc(&["decode", "--input", p(&tmp.path().join("nope.rpcc")), "--out", p(tmp.path())]);
    assert_eq!(missing.status.code(), Some(3));

    let garbage = tmp.path().join("garbage.rpcc");
    fs::write(&garbage, b"RPCC but not really").unwrap();
    let malformed = roipcc(&["decode", "--input", p(&garbage), "--out", p(tmp.path())]);
    assert_eq!(malformed.status.code(), Some(3));
    assert!(!malformed.stderr.is_empty());

    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "gamma = 2.0\n").unwrap();
    let bad_cfg = roipcc(&["--config", p(&cfg), "roi", "--manifest", p(&manifest), "--out", p(tmp.path())]);
    assert_eq!(bad_cfg.status.code(), Some(2));
}
