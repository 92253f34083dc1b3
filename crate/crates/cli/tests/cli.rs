use std::path::{Path, PathBuf};
use std::time::Instant;

use dustlab::pgm;
use dustlab_core::data::load_dataset;
use dustlab_core::linalg::ConvKernel;
use dustlab_core::network::{
    network_forward, save_checkpoint, Checkpoint, LayerParams, NetworkConfig, NetworkInput,
};

fn run(args: &[&str]) -> i32 {
    let mut v = vec!["dustlab".to_string()];
    v.extend(args.iter().map(|s| s.to_string()));
    dustlab::run(v)
}

fn s(p: &Path) -> String {
    p.display().to_string()
}

fn tiny_dataset(dir: &Path) -> PathBuf {
    let out = dir.join("data");
    let code = run(&[
        "gen-data",
        "--data.num_sequences",
        "4",
        "--data.test_fraction",
        "0.25",
        "--output_dir",
        &s(&out),
    ]);
    assert_eq!(code, 0);
    out.join("dataset.bin")
}

fn read_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn unknown_flag_exits_one_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    assert_eq!(run(&["gen-data", "--output_dir", &s(&out), "--data.colour", "red"]), 1);
    assert_eq!(run(&["gen-data", "--output_dir", &s(&out), "--verbose"]), 1);
    assert_eq!(run(&["transmogrify", "--output_dir", &s(&out)]), 1);
    assert_eq!(run(&["eval", "--output_dir", &s(&out)]), 1);
    assert!(!out.exists());
}

#[test]
fn gen_data_writes_cache_manifest_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let ds = tiny_dataset(dir.path());
    let (h, rows) = read_rows(&ds.with_file_name("manifest.csv"));
    assert_eq!(h, ["train_samples", "test_samples", "m", "n", "q", "rank", "seed"]);
    assert_eq!(rows, [["3", "1", "16", "16", "10", "5", "0"]]);
    let loaded = load_dataset(&ds).unwrap();
    assert_eq!((loaded.train.len(), loaded.test.len()), (3, 1));
    // the archived config reproduces the run
    let again = dir.path().join("again");
    let cfg = ds.with_file_name("config.json");
    assert_eq!(run(&["gen-data", "--config", &s(&cfg), "--output_dir", &s(&again)]), 0);
    assert_eq!(
        std::fs::read(&ds).unwrap(),
        std::fs::read(again.join("dataset.bin")).unwrap()
    );
}

#[test]
fn decompose_metrics_recompute_from_dumps_and_frames_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let ds_path = tiny_dataset(dir.path());
    let out = dir.path().join("dec");
    let args = ["decompose", "--dataset", &s(&ds_path), "--output_dir", &s(&out), "--solver.mu_growth", "1.05"];
    assert_eq!(run(&args), 0);
    let ds = load_dataset(&ds_path).unwrap();
    let sample = &ds.test[0];
    let l = dustlab::read_matrix(&out.join("L_hat.csv")).unwrap();
    let sp = dustlab::read_matrix(&out.join("S_hat.csv")).unwrap();
    let (h, rows) = read_rows(&out.join("decompose.csv"));
    let el: f64 = rows[0][col(&h, "rel_err_l")].parse().unwrap();
    let es: f64 = rows[0][col(&h, "rel_err_s")].parse().unwrap();
    let want_l = (&l - &sample.l_true).norm() / sample.l_true.norm();
    let want_s = (&sp - &sample.s_true).norm() / sample.s_true.norm();
    assert!((el - want_l).abs() <= 1e-12 * want_l.max(1.0));
    assert!((es - want_s).abs() <= 1e-12 * want_s.max(1.0));

    for t in [0usize, 9] {
        let img = pgm::read(&out.join(format!("frames/D_t{t:02}.pgm"))).unwrap();
        assert_eq!((img.width, img.height), (16, 16));
        let want: Vec<u16> = sample.d.column(t).iter().map(|&v| pgm::quantize(v)).collect();
        assert_eq!(img.pixels, want);
    }

    // same config, same bytes outside the timing column
    let out2 = dir.path().join("dec2");
    let a2 = ["decompose", "--dataset", &s(&ds_path), "--output_dir", &s(&out2), "--solver.mu_growth", "1.05"];
    assert_eq!(run(&a2), 0);
    let (_, rows2) = read_rows(&out2.join("decompose.csv"));
    let w = col(&h, "wall_seconds");
    let strip = |r: &Vec<String>| -> Vec<String> {
        r.iter().enumerate().filter(|(i, _)| *i != w).map(|(_, v)| v.clone()).collect()
    };
    assert_eq!(strip(&rows[0]), strip(&rows2[0]));
    assert_eq!(
        std::fs::read(out.join("S_hat.csv")).unwrap(),
        std::fs::read(out2.join("S_hat.csv")).unwrap()
    );
}

/// One layer whose multipliers inject the ground truth of a single sample.
fn oracle_checkpoint(ds_path: &Path, path: &Path) {
    let ds = load_dataset(ds_path).unwrap();
    let t = &ds.test[0];
    let cfg = NetworkConfig {
        layers: 1,
        ..NetworkConfig::default()
    };
    let (p, q) = t.d.shape();
    let mut lp = LayerParams::zeros(p, q);
    lp.kernels = [ConvKernel::zeros(); 8];
    lp.log_mu = 40.0 * std::f64::consts::LN_2;
    lp.log_lambda = -200.0;
    let mu = lp.mu();
    lp.y1 = &t.s_true * mu;
    lp.y2 = (&t.l_true - &t.s_true) * mu;
    save_checkpoint(
        &Checkpoint {
            cfg,
            q,
            params: vec![lp],
        },
        path,
    )
    .unwrap();
}

#[test]
fn eval_of_an_oracle_checkpoint_is_zero_and_timing_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let ds_path = tiny_dataset(dir.path());
    let ck = dir.path().join("oracle.bin");
    oracle_checkpoint(&ds_path, &ck);
    let out = dir.path().join("eval");
    let list = format!("[\"{}\"]", s(&ck));
    assert_eq!(
        run(&["eval", "--dataset", &s(&ds_path), "--checkpoints", &list, "--output_dir", &s(&out)]),
        0
    );
    let (h, rows) = read_rows(&out.join("eval.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][col(&h, "variant")], "dust");
    let mse: f64 = rows[0][col(&h, "mse_total")].parse().unwrap();
    assert!(mse <= 1e-20, "oracle mse {mse}");

    let reported: f64 = rows[0][col(&h, "per_frame_seconds")].parse().unwrap();
    let ds = load_dataset(&ds_path).unwrap();
    let ckpt = dustlab_core::network::load_checkpoint(&ck).unwrap();
    let t = &ds.test[0];
    let input = NetworkInput {
        d: &t.d,
        w_hat: &t.w_hat,
        pair: Some(&t.pair),
    };
    let mut times: Vec<f64> = (0..5)
        .map(|_| {
            let start = Instant::now();
            network_forward(&input, &ckpt.params, &ckpt.cfg).unwrap();
            start.elapsed().as_secs_f64() / ds.q as f64
        })
        .collect();
    times.sort_by(|a, b| a.total_cmp(b));
    let ratio = reported / times[2];
    assert!((0.05..20.0).contains(&ratio), "per-frame {reported} vs {}", times[2]);
}

#[test]
fn eval_rejects_mismatched_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let ds_path = tiny_dataset(dir.path());
    let ck = dir.path().join("small.bin");
    let cfg = NetworkConfig {
        layers: 1,
        m: 8,
        n: 8,
        ..NetworkConfig::default()
    };
    save_checkpoint(
        &Checkpoint {
            cfg,
            q: 10,
            params: vec![LayerParams::zeros(64, 10)],
        },
        &ck,
    )
    .unwrap();
    let out = dir.path().join("eval");
    let list = format!("[\"{}\"]", s(&ck));
    let args = ["eval", "--dataset", &s(&ds_path), "--checkpoints", &list, "--output_dir", &s(&out)];
    assert_eq!(run(&args), 1);
    assert!(dustlab::run_checked(["dustlab", "eval", "--dataset", &s(&ds_path), "--checkpoints", &list, "--output_dir", &s(&out)])
        .unwrap_err()
        .to_string()
        .contains("dimension"));
}

#[test]
fn train_then_report_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let ds_path = tiny_dataset(dir.path());
    let mut outs = Vec::new();
    for tag in ["a", "b"] {
        let out = dir.path().join(tag);
        let args = [
            "train", "--dataset", &s(&ds_path), "--output_dir", &s(&out),
            "--network.layers", "2", "--train.epochs", "2", "--train.batch_size", "2",
        ];
        assert_eq!(run(&args), 0);
        outs.push(out);
    }
    let ha = std::fs::read(outs[0].join("history.csv")).unwrap();
    assert_eq!(ha, std::fs::read(outs[1].join("history.csv")).unwrap());
    assert_eq!(
        std::fs::read(outs[0].join("checkpoint.bin")).unwrap(),
        std::fs::read(outs[1].join("checkpoint.bin")).unwrap()
    );
    let (h, rows) = read_rows(&outs[0].join("history.csv"));
    assert_eq!(h, ["epoch", "split", "loss_total", "loss_L", "loss_S"]);
    assert_eq!(rows.len(), 4);

    let rep = dir.path().join("report");
    let list = format!("[\"{}\"]", s(&outs[0].join("checkpoint.bin")));
    assert_eq!(
        run(&["report", "--dataset", &s(&ds_path), "--checkpoints", &list, "--output_dir", &s(&rep)]),
        0
    );
    assert!(rep.join("frames/S_hat_t09.pgm").is_file());
    assert!(rep.join("report.csv").is_file());
}

#[test]
fn bench_mask_smoke_on_a_tiny_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench");
    let args = [
        "bench-mask", "--output_dir", &s(&out), "--bench.count", "2", "--bench.p", "8",
        "--bench.q", "4", "--bench.rank", "1", "--bench.godec.rank", "1",
    ];
    assert_eq!(run(&args), 0);
    let (h, rows) = read_rows(&out.join("bench_mask.csv"));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2][0], "median");
    let r: f64 = rows[2][col(&h, "ratio")].parse().unwrap();
    assert!(r.is_finite() && r > 0.0);
}

#[test]
fn godec_mask_command_dumps_binary_frames() {
    let dir = tempfile::tempdir().unwrap();
    let ds_path = tiny_dataset(dir.path());
    let out = dir.path().join("mask");
    assert_eq!(run(&["godec-mask", "--dataset", &s(&ds_path), "--output_dir", &s(&out)]), 0);
    let img = pgm::read(&out.join("frames/mask_t00.pgm")).unwrap();
    assert!(img.pixels.iter().all(|&v| v == 0 || v == 65535));
    let (h, rows) = read_rows(&out.join("godec_mask.csv"));
    let f: f64 = rows[0][col(&h, "foreground_fraction")].parse().unwrap();
    assert!((f - 0.1).abs() < 1e-12);
}

#[test]
fn divergent_training_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let ds_path = tiny_dataset(dir.path());
    let out = dir.path().join("boom");
    let args = [
        "train", "--dataset", &s(&ds_path), "--output_dir", &s(&out), "--network.layers", "2",
        "--train.epochs", "3", "--train.batch_size", "2", "--train.learning_rate", "1e300",
    ];
    assert_eq!(run(&args), 2);
    assert!(!out.join("checkpoint.bin").exists());
}
