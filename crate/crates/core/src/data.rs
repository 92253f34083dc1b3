//! Synthetic video sequences (rank-r Gaussian backgrounds plus moving bright
//! sprites), IDX image ingestion, per-sample priors and the dataset cache.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rand::seq::index::sample as sample_indices;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::godec::{mask_prior, GoDecConfig};
use crate::graph::{build_priors, GraphConfig, LaplacianPair};
use crate::linalg::{FrameDims, Mat};

pub const IDX_IMAGE_MAGIC: u32 = 0x0000_0803;
pub const CACHE_MAGIC: &[u8; 5] = b"DSTD1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "path")]
pub enum Foreground {
    Blobs,
    Idx(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub m: usize,
    pub n: usize,
    pub q: usize,
    pub rank: usize,
    pub num_sequences: usize,
    /// Fraction of sequences held out for testing.
    pub test_fraction: f64,
    pub foreground: Foreground,
    /// Inclusive ranges.
    pub sprite_count: [usize; 2],
    pub sprite_size: [usize; 2],
    /// Pixels per frame.
    pub sprite_speed: [f64; 2],
    pub sprite_intensity: f64,
    pub seed: u64,
    pub godec: GoDecConfig,
    pub graph: GraphConfig,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl SyntheticConfig {
    /// 16×16×10, 1200 sequences, 1000/200 split.
    pub fn desk() -> Self {
        Self {
            m: 16,
            n: 16,
            q: 10,
            rank: 5,
            num_sequences: 1200,
            test_fraction: 1.0 / 6.0,
            foreground: Foreground::Blobs,
            sprite_count: [1, 3],
            sprite_size: [3, 5],
            sprite_speed: [0.5, 1.5],
            sprite_intensity: 4.0,
            seed: 0,
            godec: GoDecConfig::default(),
            graph: GraphConfig::default(),
        }
    }

    /// 32×32×20, 10000 sequences, 9:1 split.
    pub fn full() -> Self {
        Self {
            m: 32,
            n: 32,
            q: 20,
            num_sequences: 10_000,
            test_fraction: 0.1,
            sprite_size: [6, 10],
            ..Self::desk()
        }
    }

    pub fn dims(&self) -> FrameDims {
        FrameDims::new(self.m, self.n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 || self.q == 0 {
            return Err(Error::arg("frame dims and q must be positive"));
        }
        if self.rank == 0 || self.rank > (self.m * self.n).min(self.q) {
            return Err(Error::arg(format!(
                "rank {} must be in 1..={}",
                self.rank,
                (self.m * self.n).min(self.q)
            )));
        }
        if !(0.0..1.0).contains(&self.test_fraction) {
            return Err(Error::arg("test_fraction must be in [0, 1)"));
        }
        let [s0, s1] = self.sprite_size;
        if s0 == 0 || s0 > s1 || s1 >= self.m.min(self.n) {
            return Err(Error::arg(format!(
                "sprite sizes {s0}..={s1} must be >= 1 and below the frame size"
            )));
        }
        let [c0, c1] = self.sprite_count;
        let [v0, v1] = self.sprite_speed;
        if c0 > c1 || !(0.0 <= v0 && v0 <= v1) || !(self.sprite_intensity > 0.0) {
            return Err(Error::arg("bad sprite count/speed/intensity range"));
        }
        self.graph.validate()
    }
}

fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat {
    Mat::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

/// `U Vᵀ` with standard normal `U: p×r`, `V: q×r`, `p = m·n`.
pub fn gen_lowrank(m: usize, n: usize, q: usize, r: usize, seed: u64) -> Result<Mat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    lowrank_with(&mut rng, m * n, q, r)
}

fn lowrank_with(rng: &mut ChaCha8Rng, p: usize, q: usize, r: usize) -> Result<Mat> {
    if r == 0 || r > p.min(q) {
        return Err(Error::arg(format!("rank {r} exceeds min({p}, {q})")));
    }
    let u = gaussian(rng, p, r);
    let v = gaussian(rng, q, r);
    Ok(u * v.transpose())
}

/// Gaussian rank-`rank` `L*` plus `round(frac·p·q)` spikes uniform in `[−magnitude, magnitude]`.
pub fn planted_model(
    p: usize,
    q: usize,
    rank: usize,
    frac: f64,
    magnitude: f64,
    seed: u64,
) -> Result<(Mat, Mat)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = lowrank_with(&mut rng, p, q, rank)?;
    let count = (frac * (p * q) as f64).round() as usize;
    if count > p * q {
        return Err(Error::arg("support fraction above 1"));
    }
    let mut s = Mat::zeros(p, q);
    for i in sample_indices(&mut rng, p * q, count) {
        s[i] = rng.random_range(-magnitude..=magnitude);
    }
    Ok((l, s))
}

/// A moving patch; positions are top-left corners in pixels.
#[derive(Clone, Debug, PartialEq)]
pub struct Sprite {
    pub row: f64,
    pub col: f64,
    pub v_row: f64,
    pub v_col: f64,
    /// `size×size` intensities, row-major.
    pub patch: Vec<f64>,
    pub size: usize,
}

impl Sprite {
    /// Filled disc of the given diameter.
    pub fn disc(size: usize, intensity: f64) -> Vec<f64> {
        let c = (size as f64 - 1.0) / 2.0;
        let r2 = (size as f64 / 2.0).powi(2);
        let mut patch = vec![0.0; size * size];
        for a in 0..size {
            for b in 0..size {
                let d2 = (a as f64 - c).powi(2) + (b as f64 - c).powi(2);
                if d2 <= r2 {
                    patch[a * size + b] = intensity;
                }
            }
        }
        patch
    }
}

/// One step of linear motion inside `[0, hi]` with elastic reflection.
fn bounce(pos: f64, vel: f64, hi: f64) -> (f64, f64) {
    let mut p = pos + vel;
    let mut v = vel;
    // fast sprites may need more than one reflection
    loop {
        if p < 0.0 {
            p = -p;
            v = -v;
        } else if p > hi {
            p = 2.0 * hi - p;
            v = -v;
        } else {
            return (p, v);
        }
    }
}

/// Renders `q` frames; overlapping sprites combine by maximum.
pub fn render_sprites(dims: FrameDims, q: usize, sprites: &[Sprite]) -> Mat {
    let (m, n) = (dims.m, dims.n);
    let mut out = Mat::zeros(m * n, q);
    let mut state: Vec<(f64, f64, f64, f64)> = sprites
        .iter()
        .map(|s| (s.row, s.col, s.v_row, s.v_col))
        .collect();
    for t in 0..q {
        for (sp, st) in sprites.iter().zip(state.iter_mut()) {
            let r0 = st.0.round() as usize;
            let c0 = st.1.round() as usize;
            for a in 0..sp.size {
                for b in 0..sp.size {
                    let w = sp.patch[a * sp.size + b];
                    let (r, c) = (r0 + a, c0 + b);
                    if w != 0.0 && r < m && c < n {
                        let px = &mut out[(r * n + c, t)];
                        *px = px.max(w);
                    }
                }
            }
            let hi_r = (m - sp.size) as f64;
            let hi_c = (n - sp.size) as f64;
            (st.0, st.2) = bounce(st.0, st.2, hi_r);
            (st.1, st.3) = bounce(st.1, st.3, hi_c);
        }
    }
    out
}

fn nearest_resize(img: &[f64], h: usize, w: usize, size: usize) -> Vec<f64> {
    let mut out = vec![0.0; size * size];
    for a in 0..size {
        for b in 0..size {
            let r = (a * h) / size;
            let c = (b * w) / size;
            out[a * size + b] = img[r * w + c];
        }
    }
    out
}

fn random_sprites(
    cfg: &SyntheticConfig,
    images: Option<&IdxImages>,
    rng: &mut ChaCha8Rng,
) -> Vec<Sprite> {
    let count = rng.random_range(cfg.sprite_count[0]..=cfg.sprite_count[1]);
    (0..count)
        .map(|_| {
            let size = rng.random_range(cfg.sprite_size[0]..=cfg.sprite_size[1]);
            let speed = rng.random_range(cfg.sprite_speed[0]..=cfg.sprite_speed[1]);
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let row = rng.random_range(0.0..=(cfg.m - size) as f64);
            let col = rng.random_range(0.0..=(cfg.n - size) as f64);
            let patch = match images {
                Some(imgs) if !imgs.images.is_empty() => {
                    let k = rng.random_range(0..imgs.images.len());
                    let mut p = nearest_resize(&imgs.images[k], imgs.rows, imgs.cols, size);
                    p.iter_mut().for_each(|v| *v *= cfg.sprite_intensity);
                    p
                }
                _ => Sprite::disc(size, cfg.sprite_intensity),
            };
            Sprite {
                row,
                col,
                v_row: speed * angle.sin(),
                v_col: speed * angle.cos(),
                patch,
                size,
            }
        })
        .collect()
}

/// Sparse moving foreground for one sequence drawn from the config's ranges.
pub fn gen_sparse_motion(cfg: &SyntheticConfig, seed: u64) -> Result<Mat> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sprites = random_sprites(cfg, None, &mut rng);
    Ok(render_sprites(cfg.dims(), cfg.q, &sprites))
}

/// Maps `D = L + S` affinely onto `[0, 1]`; the offset is absorbed by the background.
pub fn compose_and_normalize(l_raw: &Mat, s_raw: &Mat) -> Result<(Mat, Mat, Mat)> {
    crate::linalg::ensure_same_shape(l_raw, s_raw, "compose_and_normalize")?;
    let d_raw = l_raw + s_raw;
    let lo = d_raw.min();
    let hi = d_raw.max();
    if !(hi > lo) {
        return Err(Error::Degenerate("constant input cannot be normalized".into()));
    }
    let span = hi - lo;
    let d = d_raw.map(|v| (v - lo) / span);
    let s = s_raw / span;
    let l = &d - &s;
    Ok((d, l, s))
}

/// Images from an IDX file with pixels scaled to `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    /// Row-major pixels per image.
    pub images: Vec<Vec<f64>>,
}

fn read_be_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(Error::Format {
            offset: offset as u64,
            msg: "truncated header".into(),
        })
}

pub fn idx_parse(bytes: &[u8]) -> Result<IdxImages> {
    let magic = read_be_u32(bytes, 0)?;
    if magic != IDX_IMAGE_MAGIC {
        return Err(Error::Format {
            offset: 0,
            msg: format!("magic {magic:#010x}, expected {IDX_IMAGE_MAGIC:#010x}"),
        });
    }
    let count = read_be_u32(bytes, 4)? as usize;
    let rows = read_be_u32(bytes, 8)? as usize;
    let cols = read_be_u32(bytes, 12)? as usize;
    let px = rows * cols;
    let need = 16 + count * px;
    if bytes.len() < need {
        return Err(Error::Format {
            offset: bytes.len() as u64,
            msg: format!("truncated pixel data, expected {need} bytes"),
        });
    }
    let images = bytes[16..need]
        .chunks_exact(px.max(1))
        .take(count)
        .map(|c| c.iter().map(|&b| f64::from(b) / 255.0).collect())
        .collect();
    Ok(IdxImages { rows, cols, images })
}

pub fn idx_read(path: &Path) -> Result<IdxImages> {
    idx_parse(&std::fs::read(path)?)
}

#[derive(Clone, Debug)]
pub struct Sample {
    pub d: Mat,
    pub l_true: Mat,
    pub s_true: Mat,
    pub w_hat: Mat,
    pub pair: LaplacianPair,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub dims: FrameDims,
    pub q: usize,
    pub graph: GraphConfig,
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
}

fn with_priors(
    d: Mat,
    l: Mat,
    s: Mat,
    w_hat: Option<Mat>,
    godec: &GoDecConfig,
    graph: &GraphConfig,
) -> Result<Sample> {
    let w_hat = match w_hat {
        Some(w) => w,
        None => mask_prior(&d, godec)?.w_hat,
    };
    let pair = build_priors(&d, graph)?;
    Ok(Sample {
        d,
        l_true: l,
        s_true: s,
        w_hat,
        pair,
    })
}

fn sequence_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One normalized sequence with its GoDec mask and Laplacians.
pub fn gen_sample(
    cfg: &SyntheticConfig,
    images: Option<&IdxImages>,
    index: u64,
) -> Result<Sample> {
    let mut rng = sequence_rng(cfg.seed, index);
    let l_raw = lowrank_with(&mut rng, cfg.m * cfg.n, cfg.q, cfg.rank)?;
    let sprites = random_sprites(cfg, images, &mut rng);
    let s_raw = render_sprites(cfg.dims(), cfg.q, &sprites);
    let (d, l, s) = compose_and_normalize(&l_raw, &s_raw)?;
    let godec = GoDecConfig {
        seed: cfg.godec.seed ^ index,
        ..cfg.godec
    };
    with_priors(d, l, s, None, &godec, &cfg.graph)
}

/// Generates every sequence and splits by a seeded shuffle.
pub fn build_dataset(cfg: &SyntheticConfig) -> Result<Dataset> {
    cfg.validate()?;
    let images = match &cfg.foreground {
        Foreground::Blobs => None,
        Foreground::Idx(p) => Some(idx_read(p)?),
    };
    let n = cfg.num_sequences;
    let mut samples: Vec<Option<Sample>> = Vec::with_capacity(n);
    for i in 0..n {
        samples.push(Some(gen_sample(cfg, images.as_ref(), i as u64)?));
    }
    let n_test = (n as f64 * cfg.test_fraction).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut sequence_rng(cfg.seed, u64::MAX));
    let mut test_idx = order[..n_test].to_vec();
    let mut train_idx = order[n_test..].to_vec();
    test_idx.sort_unstable();
    train_idx.sort_unstable();
    let mut take = |idx: &[usize]| -> Vec<Sample> {
        idx.iter().map(|&i| samples[i].take().expect("index used once")).collect()
    };
    let train = take(&train_idx);
    let test = take(&test_idx);
    log::info!("dataset: {} train, {} test", train.len(), test.len());
    Ok(Dataset {
        dims: cfg.dims(),
        q: cfg.q,
        graph: cfg.graph,
        train,
        test,
    })
}

fn write_u64(w: &mut impl Write, v: u64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_f64s(w: &mut impl Write, vals: &[f64]) -> std::io::Result<()> {
    for v in vals {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Writes the dataset cache: magic, dims header, then D, L, S, Ŵ per sample
/// (train first) as little-endian f64 in column-major order.
pub fn save_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(CACHE_MAGIC)?;
    for v in [
        ds.dims.m,
        ds.dims.n,
        ds.q,
        ds.train.len(),
        ds.test.len(),
    ] {
        write_u64(&mut w, v as u64)?;
    }
    write_f64s(&mut w, &[ds.graph.tau_s, ds.graph.tau_t])?;
    for s in ds.train.iter().chain(&ds.test) {
        for m in [&s.d, &s.l_true, &s.s_true, &s.w_hat] {
            write_f64s(&mut w, m.as_slice())?;
        }
    }
    w.flush()?;
    Ok(())
}

struct CacheReader<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> CacheReader<R> {
    fn bytes<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => Error::Format {
                offset: self.offset,
                msg: format!("truncated while reading {what}"),
            },
            _ => Error::Io(e),
        })?;
        self.offset += N as u64;
        Ok(buf)
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes::<8>(what)?))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes::<8>(what)?))
    }

    fn mat(&mut self, p: usize, q: usize) -> Result<Mat> {
        let mut vals = Vec::with_capacity(p * q);
        for _ in 0..p * q {
            vals.push(self.f64("matrix")?);
        }
        Ok(Mat::from_vec(p, q, vals))
    }
}

/// Reads a cache written by [`save_dataset`]; Laplacians are rebuilt.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let mut r = CacheReader {
        inner: BufReader::new(File::open(path)?),
        offset: 0,
    };
    let magic = r.bytes::<5>("magic")?;
    if &magic != CACHE_MAGIC {
        return Err(Error::Format {
            offset: 0,
            msg: "not a dataset cache".into(),
        });
    }
    let mut hdr = [0usize; 5];
    for h in hdr.iter_mut() {
        *h = r.u64("header")? as usize;
    }
    let [m, n, q, n_train, n_test] = hdr;
    let graph = GraphConfig {
        tau_s: r.f64("header")?,
        tau_t: r.f64("header")?,
    };
    if m == 0 || n == 0 || q == 0 {
        return Err(Error::Format {
            offset: 5,
            msg: "zero dimension in header".into(),
        });
    }
    let p = m * n;
    let godec = GoDecConfig::default();
    let mut all = Vec::with_capacity(n_train + n_test);
    for _ in 0..n_train + n_test {
        let d = r.mat(p, q)?;
        let l = r.mat(p, q)?;
        let s = r.mat(p, q)?;
        let w = r.mat(p, q)?;
        all.push(with_priors(d, l, s, Some(w), &godec, &graph)?);
    }
    let test = all.split_off(n_train);
    Ok(Dataset {
        dims: FrameDims::new(m, n),
        q,
        graph,
        train: all,
        test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::svd_thin;

    fn small() -> SyntheticConfig {
        SyntheticConfig {
            m: 8,
            n: 8,
            q: 6,
            rank: 2,
            num_sequences: 10,
            test_fraction: 0.1,
            sprite_size: [2, 3],
            ..SyntheticConfig::desk()
        }
    }

    #[test]
    fn lowrank_rank_and_determinism() {
        let l = gen_lowrank(32, 32, 20, 5, 3).unwrap();
        let s = svd_thin(&l).unwrap().sigma;
        assert!(s.iter().filter(|&&v| v > 1e-8 * s[0]).count() <= 5);
        assert_eq!(l, gen_lowrank(32, 32, 20, 5, 3).unwrap());
        assert!(gen_lowrank(2, 2, 3, 4, 0).is_err());

        let l1 = gen_lowrank(4, 4, 6, 1, 9).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let (a, b) = (l1.column(i), l1.column(j));
                let cross = a.dot(&b).powi(2) - a.norm_squared() * b.norm_squared();
                assert!(cross.abs() <= 1e-10 * a.norm_squared() * b.norm_squared());
            }
        }
    }

    #[test]
    fn sprites_static_and_empty() {
        let dims = FrameDims::new(10, 10);
        assert_eq!(render_sprites(dims, 4, &[]).amax(), 0.0);
        let sp = Sprite {
            row: 2.0,
            col: 3.0,
            v_row: 0.0,
            v_col: 0.0,
            patch: Sprite::disc(3, 1.0),
            size: 3,
        };
        let s = render_sprites(dims, 4, &[sp]);
        for t in 1..4 {
            assert_eq!(s.column(t), s.column(0));
        }
        assert!(s.amax() > 0.0);
    }

    #[test]
    fn sprite_bounces_like_a_ball() {
        let dims = FrameDims::new(16, 16);
        let sp = Sprite {
            row: 10.0,
            col: 4.0,
            v_row: 1.0,
            v_col: 0.0,
            patch: vec![1.0; 4],
            size: 2,
        };
        let s = render_sprites(dims, 12, &[sp]);
        // top row of the sprite: 10..=14, then back down
        let want = [10, 11, 12, 13, 14, 13, 12, 11, 10, 9, 8, 7];
        for (t, &r) in want.iter().enumerate() {
            let support: Vec<usize> = (0..256).filter(|&i| s[(i, t)] != 0.0).collect();
            let expect = vec![r * 16 + 4, r * 16 + 5, (r + 1) * 16 + 4, (r + 1) * 16 + 5];
            assert_eq!(support, expect, "frame {t}");
        }
    }

    #[test]
    fn normalization_contract() {
        let id = Mat::from_row_slice(2, 2, &[0.0, 0.25, 0.5, 1.0]);
        let z = Mat::zeros(2, 2);
        let (d, l, s) = compose_and_normalize(&id, &z).unwrap();
        assert_eq!(d, id);
        assert_eq!(l, id);
        assert_eq!(s, z);
        assert!(matches!(
            compose_and_normalize(&Mat::from_element(2, 2, 3.0), &z),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn idx_cases() {
        let mut bytes = vec![0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2];
        bytes.extend_from_slice(&[0, 255, 51, 102, 204, 0, 0, 255]);
        let imgs = idx_parse(&bytes).unwrap();
        assert_eq!((imgs.rows, imgs.cols), (2, 2));
        assert_eq!(imgs.images[0], vec![0.0, 1.0, 0.2, 0.4]);
        assert_eq!(imgs.images[1], vec![0.8, 0.0, 0.0, 1.0]);

        let mut bad = bytes.clone();
        bad[3] = 1;
        assert!(matches!(idx_parse(&bad), Err(Error::Format { offset: 0, .. })));
        assert!(matches!(idx_parse(&[]), Err(Error::Format { offset: 0, .. })));
        assert!(matches!(
            idx_parse(&bytes[..20]),
            Err(Error::Format { offset: 20, .. })
        ));
    }

    #[test]
    fn dataset_split_and_invariants() {
        let cfg = small();
        let ds = build_dataset(&cfg).unwrap();
        assert_eq!((ds.train.len(), ds.test.len()), (9, 1));
        for s in ds.train.iter().chain(&ds.test) {
            assert!((&s.d - &s.l_true - &s.s_true).amax() <= 1e-12);
            assert_eq!(s.d.min(), 0.0);
            assert_eq!(s.d.max(), 1.0);
            assert_eq!(s.w_hat.shape(), (64, 6));
            assert_eq!(s.pair.spatial.shape(), (64, 64));
            assert_eq!(s.pair.temporal.shape(), (6, 6));
        }
        let again = build_dataset(&cfg).unwrap();
        assert_eq!(ds.test[0].d, again.test[0].d);
        assert_eq!(ds.train[4].w_hat, again.train[4].w_hat);
    }
}
