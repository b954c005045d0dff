use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use darkbench::cli::reports::{
    CerReport, LossReport, PrtReport, RunProvenance, StatsReport, SweepReport, XentReport,
};
use darkbench::imgcore::save_image;
use darkbench::synth::synth_corpus;
use darkbench::RngSeed;
use serde::de::DeserializeOwned;
use tempfile::TempDir;

fn darkbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_darkbench"))
        .args(args)
        .env_remove("DARKBENCH_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn parse<T: DeserializeOwned>(text: &str) -> T {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("schema violation: {e}\n{text}"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes `n` word crops as PNGs and a manifest `labels.tsv` next to them.
fn image_dir(n: usize) -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    let mut manifest = String::new();
    for (i, sample) in synth_corpus(n, 48, 20, RngSeed(3)).unwrap().iter().enumerate() {
        let name = format!("w{i}.png");
        save_image(&sample.image, dir.path().join(&name)).unwrap();
        manifest += &format!("{name}\t{}\n", sample.label);
    }
    let m = dir.path().join("labels.tsv");
    std::fs::write(&m, manifest).unwrap();
    (dir, m)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(darkbench(&["cer", "--bogus"]).status.code(), Some(2));
    assert_eq!(darkbench(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn every_command_documents_its_flags() {
    for (cmd, flag) in [
        ("darken", "--config"),
        ("enhance", "--params"),
        ("loss", "--phi"),
        ("xent", "--logits"),
        ("cer", "--lenient"),
        ("stats", "--manifest"),
        ("sweep", "--k"),
        ("prt-demo", "--quad-steps"),
    ] {
        let o = darkbench(&[cmd, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{cmd}");
        assert!(stdout(&o).contains(flag), "{cmd} --help lacks {flag}");
    }
}

#[test]
fn darken_empty_dir() {
    let (inp, out) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let o = darkbench(&["darken", "--in", s(inp.path()), "--out", s(out.path())]);
    assert_eq!(o.status.code(), Some(0));
    let prov: RunProvenance = parse(&std::fs::read_to_string(out.path().join("provenance.json")).unwrap());
    assert!(prov.files.is_empty() && prov.failures.is_empty());
}

#[test]
fn darken_dir_mirrors_and_reproduces() {
    let (inp, _) = image_dir(3);
    let run = |seed: &str| {
        let out = TempDir::new().unwrap();
        let o = darkbench(&[
            "darken", "--in", s(inp.path()), "--out", s(out.path()), "--seed", seed, "--set", "ssr_sigma=4",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let prov: RunProvenance =
            parse(&std::fs::read_to_string(out.path().join("provenance.json")).unwrap());
        for name in ["w0.png", "w1.png", "w2.png"] {
            assert!(out.path().join(name).is_file());
        }
        (out, prov)
    };
    let (_a, pa) = run("42");
    let (_b, pb) = run("42");
    let (_c, pc) = run("43");
    assert_eq!(pa.files.len(), 3);
    assert_eq!(pa.master_seed, 42);
    assert_eq!(pa.config["ssr_sigma"], "4");
    let digests = |p: &RunProvenance| p.files.iter().map(|f| f.output_sha256.clone()).collect::<Vec<_>>();
    assert_eq!(digests(&pa), digests(&pb));
    assert_ne!(digests(&pa), digests(&pc));
    let seeds: Vec<u64> = pa.files.iter().map(|f| f.seed).collect();
    assert_eq!(seeds, pb.files.iter().map(|f| f.seed).collect::<Vec<_>>());
}

#[test]
fn darken_records_failures_and_continues() {
    let (inp, _) = image_dir(2);
    std::fs::write(inp.path().join("broken.png"), b"not a png").unwrap();
    let out = TempDir::new().unwrap();
    let o = darkbench(&["darken", "--in", s(inp.path()), "--out", s(out.path())]);
    assert_eq!(o.status.code(), Some(1));
    let prov: RunProvenance = parse(&std::fs::read_to_string(out.path().join("provenance.json")).unwrap());
    assert_eq!(prov.files.len(), 2);
    assert_eq!(prov.failures.len(), 1);
    assert!(prov.failures[0].input.ends_with("broken.png"));
}

#[test]
fn darken_manifest_config_and_env_seed() {
    let (inp, manifest) = image_dir(2);
    let cfg = write(inp.path(), "dark.cfg", "# test config\nk = 0.5\nnoise_level=0\nssr_sigma=3\n");
    let out = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_darkbench"))
        .args(["darken", "--in", s(&manifest), "--out", s(out.path()), "--config", s(&cfg), "--set", "gamma=2"])
        .env("DARKBENCH_SEED", "1234")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let prov: RunProvenance = parse(&std::fs::read_to_string(out.path().join("provenance.json")).unwrap());
    assert_eq!(prov.master_seed, 1234);
    assert_eq!(prov.config["k"], "0.5");
    assert_eq!(prov.config["gamma"], "2");
    assert_eq!(prov.files.len(), 2);
    assert!(out.path().join("w1.png").is_file());

    let bad = write(inp.path(), "bad.cfg", "k=2\n");
    let o = darkbench(&["darken", "--in", s(&manifest), "--out", s(out.path()), "--config", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn cer_command() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "m.tsv", "a.png\ttea\nb.png\tdark\n");
    let o = darkbench(&["cer", "--manifest", s(&m), "--preds", s(&m)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("CER 0.00\n"));

    let p = write(dir.path(), "p.tsv", "a.png\tten\nb.png\tdark\n");
    let o = darkbench(&["cer", "--manifest", s(&m), "--preds", s(&p)]);
    assert!(stdout(&o).starts_with("CER 14.29\n"));

    let partial = write(dir.path(), "q.tsv", "a.png\ttea\n");
    let o = darkbench(&["cer", "--manifest", s(&m), "--preds", s(&partial)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("b.png"));
    let o = darkbench(&["cer", "--manifest", s(&m), "--preds", s(&partial), "--lenient", "--json"]);
    let r: CerReport = parse(&stdout(&o));
    assert_eq!(r.missing, vec!["b.png".to_string()]);
    assert!((r.cer - 400.0 / 7.0).abs() < 1e-9);
}

#[test]
fn loss_command() {
    let (dir, _) = image_dir(2);
    let (a, b) = (dir.path().join("w0.png"), dir.path().join("w1.png"));
    let o = darkbench(&["loss", "--low", s(&a), "--out", s(&a)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("L_EC 0\n"));
    let o = darkbench(&["loss", "--low", s(&a), "--out", s(&b), "--phi", "2", "--json"]);
    let r: LossReport = parse(&stdout(&o));
    assert!(r.edge_content_loss > 0.0);
    assert_eq!(r.weighted, 2.0 * r.edge_content_loss);
}

#[test]
fn xent_command() {
    let dir = TempDir::new().unwrap();
    let z = write(dir.path(), "z.csv", "0.3,0.3,0.3,0.3\n1,1,1,1\n");
    let y = write(dir.path(), "y.txt", "2, 0\n");
    let o = darkbench(&["xent", "--logits", s(&z), "--targets", s(&y), "--json"]);
    let r: XentReport = parse(&stdout(&o));
    assert!((r.cross_entropy - 4f64.ln()).abs() < 1e-12);
    assert_eq!((r.tokens, r.vocab), (2, 4));
    let bad = write(dir.path(), "bad.txt", "2 9\n");
    assert_eq!(darkbench(&["xent", "--logits", s(&z), "--targets", s(&bad)]).status.code(), Some(1));
}

#[test]
fn enhance_command() {
    let (dir, _) = image_dir(1);
    let (inp, out) = (dir.path().join("w0.png"), dir.path().join("bright.png"));
    let o = darkbench(&["enhance", "--in", s(&inp), "--out", s(&out), "--alpha", "0.3", "--beta", "0.9"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.is_file());

    let o = darkbench(&["enhance", "--in", s(&inp), "--out", s(&out), "--alpha", "3", "--beta", "0.9"]);
    assert_eq!(o.status.code(), Some(2));
    let o = darkbench(&["enhance", "--in", s(&inp), "--out", s(&out), "--alpha", "3", "--beta", "0.9", "--relaxed"]);
    assert_eq!(o.status.code(), Some(0));

    let csv = write(dir.path(), "p.csv", "iter,channel,alpha,beta\n0,0,0.2,0.9\n0,1,0.2,0.9\n0,2,-0.1,0.8\n");
    let o = darkbench(&["enhance", "--in", s(&inp), "--out", s(&out), "--params", s(&csv)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn stats_command() {
    let (dir, m) = image_dir(3);
    let img = dir.path().join("w0.png");
    let o = darkbench(&["stats", "--manifest", s(&m), "--image", s(&img), "--json"]);
    let r: StatsReport = parse(&stdout(&o));
    assert_eq!(r.dataset.unwrap().n_images, 3);
    assert_eq!(r.images.len(), 1);
    assert_eq!(darkbench(&["stats"]).status.code(), Some(2));
}

#[test]
fn sweep_command() {
    let (dir, m) = image_dir(3);
    let perfect = write(dir.path(), "perfect.tsv", &std::fs::read_to_string(&m).unwrap());
    let empty = write(dir.path(), "empty.tsv", "");
    let report = dir.path().join("sweep.json");
    let o = darkbench(&[
        "sweep", "--manifest", s(&m), "--k", "0.3,0.9", "--preds", s(&empty), "--preds", s(&perfect),
        "--set", "noise_level=0", "--set", "ssr_sigma=4", "--out", s(&report),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: SweepReport = parse(&std::fs::read_to_string(&report).unwrap());
    assert_eq!(r.levels.len(), 2);
    assert_eq!((r.levels[0].k, r.levels[0].cer), (0.9, Some(0.0)));
    assert_eq!(r.levels[1].cer, Some(100.0));
    assert!(r.levels[1].mean_luma <= r.levels[0].mean_luma);

    let again = darkbench(&["sweep", "--manifest", s(&m), "--k", "0.3,0.9", "--seed", "5", "--set", "ssr_sigma=4"]);
    let twice = darkbench(&["sweep", "--manifest", s(&m), "--k", "0.3,0.9", "--seed", "5", "--set", "ssr_sigma=4"]);
    assert_eq!(again.stdout, twice.stdout);
    let _: SweepReport = parse(&stdout(&again));
}

#[test]
fn prt_demo_matches_oracle() {
    let o = darkbench(&["prt-demo", "--order", "4", "--samples", "400000", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let r: PrtReport = parse(&stdout(&o));
    assert!(r.relative_error < 0.03);
    let (p, q) = (r.prt_shaded[0], r.oracle_radiance[0]);
    assert!((p - q).abs() / q < 0.03);

    let o = darkbench(&["prt-demo", "--samples", "10000", "--occluder", "0,0,1,30", "--normal", "0,0.1,1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("oracle_radiance"));
    assert_eq!(darkbench(&["prt-demo", "--normal", "0,0,0"]).status.code(), Some(2));
}
