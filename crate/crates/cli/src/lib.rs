//! `dustlab` command-line front end.

pub mod config;
pub mod pgm;

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use dustlab_core::data::{build_dataset, load_dataset, planted_model, save_dataset, Dataset, Sample};
use dustlab_core::godec::{foreground_mask, godec, mask_prior, prior_weights};
use dustlab_core::network::{load_checkpoint, network_forward, save_checkpoint, Checkpoint, NetworkInput};
use dustlab_core::solver::{rpca_pcp, solve};
use dustlab_core::train::{train, EpochRecord};
use dustlab_core::{FrameDims, Mat};
use serde::Serialize;

pub use config::RunConfig;
use config::{BenchSource, DataSplit, SampleRef};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(dustlab_core::Error),
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Output(m) => write!(f, "{m}"),
        }
    }
}

impl From<dustlab_core::Error> for CliError {
    fn from(e: dustlab_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    GenData,
    Decompose,
    GodecMask,
    Train,
    Eval,
    BenchMask,
    Report,
}

#[derive(Debug, Parser)]
#[command(name = "dustlab", version, about = "Low-rank plus sparse video decomposition")]
struct Cli {
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `--section.key value` overrides.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, num_args = 0..)]
    rest: Vec<String>,
}

/// Parses, validates and executes; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match run_checked(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("dustlab: {e}");
            e.exit_code()
        }
    }
}

pub fn run_checked<I, T>(args: I) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.to_string().trim_end().to_string())),
    };
    let overrides = config::parse_overrides(&cli.rest).map_err(CliError::Usage)?;
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides).map_err(CliError::Usage)?;
    preflight(cli.command, &cfg)?;
    execute(cli.command, &cfg)
}

fn needs_dataset(cmd: Command, cfg: &RunConfig) -> bool {
    match cmd {
        Command::GenData => false,
        Command::BenchMask => cfg.bench.source == BenchSource::Dataset,
        _ => true,
    }
}

/// Everything checkable without doing work or touching the output directory.
fn preflight(cmd: Command, cfg: &RunConfig) -> CliResult<()> {
    cfg.solver.validate()?;
    cfg.network.validate()?;
    cfg.train.validate()?;
    if cmd == Command::GenData {
        cfg.data.validate()?;
    }
    if needs_dataset(cmd, cfg) {
        match &cfg.dataset {
            None => return Err(CliError::Usage("this command needs --dataset".into())),
            Some(p) if !p.is_file() => {
                return Err(CliError::Usage(format!("dataset {} not found", p.display())))
            }
            _ => {}
        }
    }
    if matches!(cmd, Command::Eval | Command::Report) {
        if cfg.checkpoints.is_empty() {
            return Err(CliError::Usage("this command needs --checkpoints".into()));
        }
        if let Some(p) = cfg.checkpoints.iter().find(|p| !p.is_file()) {
            return Err(CliError::Usage(format!("checkpoint {} not found", p.display())));
        }
    }
    if cmd == Command::BenchMask && (cfg.bench.repeats == 0 || cfg.bench.count == 0) {
        return Err(CliError::Usage("bench.repeats and bench.count must be >= 1".into()));
    }
    if cfg.output_dir.exists() && !cfg.output_dir.is_dir() {
        return Err(CliError::Usage(format!(
            "output_dir {} is not a directory",
            cfg.output_dir.display()
        )));
    }
    Ok(())
}

pub fn execute(cmd: Command, cfg: &RunConfig) -> CliResult<()> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let snapshot = serde_json::to_string_pretty(cfg).map_err(|e| CliError::Output(e.to_string()))?;
    std::fs::write(cfg.output_dir.join("config.json"), snapshot + "\n")?;
    log::info!("{cmd:?} -> {}", cfg.output_dir.display());
    match cmd {
        Command::GenData => gen_data(cfg),
        Command::Decompose => decompose(cfg),
        Command::GodecMask => godec_mask(cfg),
        Command::Train => train_cmd(cfg),
        Command::Eval => eval(cfg),
        Command::BenchMask => bench_mask(cfg),
        Command::Report => report(cfg),
    }
}

pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `p × q` values, one CSV record per row, shortest round-trip formatting.
pub fn write_matrix(path: &Path, x: &Mat) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for r in 0..x.nrows() {
        w.write_record(x.row(r).iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> CliResult<Mat> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        rows.push(row);
    }
    let q = rows.first().map_or(0, |r| r.len());
    Ok(Mat::from_fn(rows.len(), q, |i, j| rows[i][j]))
}

/// One PGM per column: `<prefix>_tNN.pgm`.
pub fn dump_frames(dir: &Path, prefix: &str, x: &Mat, dims: FrameDims) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    for t in 0..x.ncols() {
        let col: Vec<f64> = x.column(t).iter().copied().collect();
        pgm::write(&dir.join(format!("{prefix}_t{t:02}.pgm")), dims.n, dims.m, &col)?;
    }
    Ok(())
}

fn load_ds(cfg: &RunConfig) -> CliResult<Dataset> {
    let path = cfg.dataset.as_ref().expect("checked in preflight");
    Ok(load_dataset(path)?)
}

fn pick(ds: &Dataset, r: SampleRef) -> CliResult<&Sample> {
    let set = match r.split {
        DataSplit::Train => &ds.train,
        DataSplit::Test => &ds.test,
    };
    set.get(r.index).ok_or_else(|| {
        CliError::Usage(format!(
            "sample {} out of range ({:?} split has {})",
            r.index,
            r.split,
            set.len()
        ))
    })
}

fn rel_err(x: &Mat, truth: &Mat) -> f64 {
    let n = truth.norm();
    let e = (x - truth).norm();
    if n > 0.0 {
        e / n
    } else {
        e
    }
}

/// Fraction of entries where two binary masks agree.
pub fn agreement(a: &Mat, b: &Mat) -> f64 {
    let same = a.iter().zip(b.iter()).filter(|(x, y)| x == y).count();
    same as f64 / a.len() as f64
}

pub fn support(x: &Mat) -> Mat {
    x.map(|v| if v != 0.0 { 1.0 } else { 0.0 })
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Serialize)]
struct ManifestRow {
    train_samples: usize,
    test_samples: usize,
    m: usize,
    n: usize,
    q: usize,
    rank: usize,
    seed: u64,
}

fn gen_data(cfg: &RunConfig) -> CliResult<()> {
    let ds = build_dataset(&cfg.data)?;
    save_dataset(&ds, &cfg.output_dir.join("dataset.bin"))?;
    write_csv(
        &cfg.output_dir.join("manifest.csv"),
        &[ManifestRow {
            train_samples: ds.train.len(),
            test_samples: ds.test.len(),
            m: ds.dims.m,
            n: ds.dims.n,
            q: ds.q,
            rank: cfg.data.rank,
            seed: cfg.data.seed,
        }],
    )
}

#[derive(Serialize)]
struct DecomposeRow {
    split: DataSplit,
    index: usize,
    rel_err_l: f64,
    rel_err_s: f64,
    iterations: usize,
    converged: bool,
    wall_seconds: f64,
}

fn decompose(cfg: &RunConfig) -> CliResult<()> {
    let ds = load_ds(cfg)?;
    let s = pick(&ds, cfg.sample)?;
    let w = if cfg.decompose.weighted {
        let prior = foreground_mask(&s.w_hat.map(|v| 1.0 - v), 0.0)?;
        prior_weights(&prior, cfg.decompose.rho)
    } else {
        Mat::from_element(s.d.nrows(), s.d.ncols(), 1.0)
    };
    let t = Instant::now();
    let (l, sp, rep) = solve(&s.d, Some(&s.pair), &w, &cfg.solver)?;
    let wall = t.elapsed().as_secs_f64();
    let out = &cfg.output_dir;
    write_matrix(&out.join("L_hat.csv"), &l)?;
    write_matrix(&out.join("S_hat.csv"), &sp)?;
    if cfg.decompose.frames {
        let dir = out.join("frames");
        dump_frames(&dir, "D", &s.d, ds.dims)?;
        dump_frames(&dir, "L", &l, ds.dims)?;
        dump_frames(&dir, "S", &sp, ds.dims)?;
    }
    write_csv(
        &out.join("decompose.csv"),
        &[DecomposeRow {
            split: cfg.sample.split,
            index: cfg.sample.index,
            rel_err_l: rel_err(&l, &s.l_true),
            rel_err_s: rel_err(&sp, &s.s_true),
            iterations: rep.iterations,
            converged: rep.converged,
            wall_seconds: wall,
        }],
    )
}

#[derive(Serialize)]
struct GodecRow {
    split: DataSplit,
    index: usize,
    foreground_fraction: f64,
    agreement_truth: f64,
    final_residual: f64,
    wall_seconds: f64,
}

fn godec_mask(cfg: &RunConfig) -> CliResult<()> {
    let ds = load_ds(cfg)?;
    let s = pick(&ds, cfg.sample)?;
    let t = Instant::now();
    let out = godec(&s.d, &cfg.data.godec)?;
    let prior = foreground_mask(&out.sparse, 0.0)?;
    let wall = t.elapsed().as_secs_f64();
    dump_frames(&cfg.output_dir.join("frames"), "mask", &prior.fg_mask, ds.dims)?;
    write_csv(
        &cfg.output_dir.join("godec_mask.csv"),
        &[GodecRow {
            split: cfg.sample.split,
            index: cfg.sample.index,
            foreground_fraction: prior.fg_mask.sum() / prior.fg_mask.len() as f64,
            agreement_truth: agreement(&prior.fg_mask, &support(&s.s_true)),
            final_residual: out.residual_trace.last().copied().unwrap_or(f64::NAN),
            wall_seconds: wall,
        }],
    )
}

#[derive(Serialize)]
pub struct HistoryRow {
    pub epoch: usize,
    pub split: &'static str,
    pub loss_total: f64,
    #[serde(rename = "loss_L")]
    pub loss_l: f64,
    #[serde(rename = "loss_S")]
    pub loss_s: f64,
}

impl From<&EpochRecord> for HistoryRow {
    fn from(r: &EpochRecord) -> Self {
        Self {
            epoch: r.epoch,
            split: r.split.as_str(),
            loss_total: r.loss.total,
            loss_l: r.loss.f_l,
            loss_s: r.loss.f_s,
        }
    }
}

fn train_cmd(cfg: &RunConfig) -> CliResult<()> {
    let ds = load_ds(cfg)?;
    let (params, history) = train(&ds, &cfg.network, &cfg.train)?;
    let rows: Vec<HistoryRow> = history.iter().map(HistoryRow::from).collect();
    write_csv(&cfg.output_dir.join("history.csv"), &rows)?;
    save_checkpoint(
        &Checkpoint {
            cfg: cfg.network.clone(),
            q: ds.q,
            params,
        },
        &cfg.output_dir.join("checkpoint.bin"),
    )?;
    Ok(())
}

fn check_compatible(ck: &Checkpoint, ds: &Dataset, path: &Path) -> CliResult<()> {
    if ck.cfg.dims() != ds.dims || ck.q != ds.q {
        return Err(CliError::Core(dustlab_core::Error::Dimension(format!(
            "checkpoint {} is {}x{}x{}, dataset is {}x{}x{}",
            path.display(),
            ck.cfg.m,
            ck.cfg.n,
            ck.q,
            ds.dims.m,
            ds.dims.n,
            ds.q
        ))));
    }
    Ok(())
}

fn input_of(s: &Sample) -> NetworkInput<'_> {
    NetworkInput {
        d: &s.d,
        w_hat: &s.w_hat,
        pair: Some(&s.pair),
    }
}

#[derive(Serialize)]
struct EvalRow {
    /// Position in `checkpoints`.
    model: usize,
    variant: &'static str,
    layers: usize,
    samples: usize,
    mse_total: f64,
    #[serde(rename = "mse_L")]
    mse_l: f64,
    #[serde(rename = "mse_S")]
    mse_s: f64,
    per_frame_seconds: f64,
}

fn eval(cfg: &RunConfig) -> CliResult<()> {
    let ds = load_ds(cfg)?;
    if ds.test.is_empty() {
        return Err(CliError::Usage("dataset has no test split".into()));
    }
    let mut rows = Vec::new();
    for (model, path) in cfg.checkpoints.iter().enumerate() {
        let ck = load_checkpoint(path)?;
        check_compatible(&ck, &ds, path)?;
        let (mut sum_l, mut sum_s) = (0.0, 0.0);
        let t = Instant::now();
        for s in &ds.test {
            let (l, sp) = network_forward(&input_of(s), &ck.params, &ck.cfg)?;
            sum_l += (&l - &s.l_true).norm_squared();
            sum_s += (&sp - &s.s_true).norm_squared();
        }
        let wall = t.elapsed().as_secs_f64();
        let n = ds.test.len() as f64;
        rows.push(EvalRow {
            model,
            variant: ck.cfg.variant.name(),
            layers: ck.cfg.layers,
            samples: ds.test.len(),
            mse_total: 0.5 * (sum_l + sum_s) / n,
            mse_l: sum_l / n,
            mse_s: sum_s / n,
            per_frame_seconds: wall / (n * ds.q as f64),
        });
    }
    write_csv(&cfg.output_dir.join("eval.csv"), &rows)
}

#[derive(Serialize)]
struct BenchRow {
    sample: String,
    godec_seconds: f64,
    pcp_seconds: f64,
    ratio: f64,
    agreement_pcp: f64,
    agreement_truth: f64,
}

fn timed<T>(repeats: usize, mut f: impl FnMut() -> CliResult<T>) -> CliResult<(T, f64)> {
    let mut times = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats {
        let t = Instant::now();
        last = Some(f()?);
        times.push(t.elapsed().as_secs_f64());
    }
    Ok((last.expect("repeats >= 1"), median(&mut times)))
}

fn bench_mask(cfg: &RunConfig) -> CliResult<()> {
    let b = &cfg.bench;
    let cases: Vec<(Mat, Mat)> = match b.source {
        BenchSource::Planted => (0..b.count)
            .map(|i| {
                let (l, s) = planted_model(b.p, b.q, b.rank, b.fraction, b.magnitude, b.seed + i as u64)?;
                Ok((&l + &s, s))
            })
            .collect::<CliResult<_>>()?,
        BenchSource::Dataset => load_ds(cfg)?
            .test
            .into_iter()
            .take(b.count)
            .map(|s| (s.d, s.s_true))
            .collect(),
    };
    let mut rows = Vec::new();
    for (i, (d, s_true)) in cases.iter().enumerate() {
        let (mask_g, tg) = timed(b.repeats, || Ok(mask_prior(d, &b.godec)?.fg_mask))?;
        let lambda = cfg.solver.lambda_for(d);
        let (s_p, tp) = timed(b.repeats, || Ok(rpca_pcp(d, lambda, &cfg.solver)?.1))?;
        let mask_p = support(&s_p);
        rows.push(BenchRow {
            sample: i.to_string(),
            godec_seconds: tg,
            pcp_seconds: tp,
            ratio: tg / tp,
            agreement_pcp: agreement(&mask_g, &mask_p),
            agreement_truth: agreement(&mask_g, &support(s_true)),
        });
        log::info!("bench sample {i}: ratio {:.3}", tg / tp);
    }
    let col = |f: fn(&BenchRow) -> f64| median(&mut rows.iter().map(f).collect::<Vec<_>>());
    let summary = BenchRow {
        sample: "median".into(),
        godec_seconds: col(|r| r.godec_seconds),
        pcp_seconds: col(|r| r.pcp_seconds),
        ratio: col(|r| r.ratio),
        agreement_pcp: col(|r| r.agreement_pcp),
        agreement_truth: col(|r| r.agreement_truth),
    };
    rows.push(summary);
    write_csv(&cfg.output_dir.join("bench_mask.csv"), &rows)
}

#[derive(Serialize)]
struct ReportRow {
    split: DataSplit,
    index: usize,
    variant: &'static str,
    rel_err_l: f64,
    rel_err_s: f64,
    #[serde(rename = "sq_err_L")]
    sq_err_l: f64,
    #[serde(rename = "sq_err_S")]
    sq_err_s: f64,
}

fn report(cfg: &RunConfig) -> CliResult<()> {
    let ds = load_ds(cfg)?;
    let s = pick(&ds, cfg.sample)?;
    let path = &cfg.checkpoints[0];
    let ck = load_checkpoint(path)?;
    check_compatible(&ck, &ds, path)?;
    let (l, sp) = network_forward(&input_of(s), &ck.params, &ck.cfg)?;
    let dir = cfg.output_dir.join("frames");
    dump_frames(&dir, "D", &s.d, ds.dims)?;
    dump_frames(&dir, "L_true", &s.l_true, ds.dims)?;
    dump_frames(&dir, "S_true", &s.s_true, ds.dims)?;
    dump_frames(&dir, "L_hat", &l, ds.dims)?;
    dump_frames(&dir, "S_hat", &sp, ds.dims)?;
    write_csv(
        &cfg.output_dir.join("report.csv"),
        &[ReportRow {
            split: cfg.sample.split,
            index: cfg.sample.index,
            variant: ck.cfg.variant.name(),
            rel_err_l: rel_err(&l, &s.l_true),
            rel_err_s: rel_err(&sp, &s.s_true),
            sq_err_l: (&l - &s.l_true).norm_squared(),
            sq_err_s: (&sp - &s.s_true).norm_squared(),
        }],
    )
}
