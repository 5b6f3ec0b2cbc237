//! GEMM and max-pooling accuracy benchmarks.
//!
//! Inputs are generated as f64 and converted once per format. Every
//! format accumulates with the same fixed row-major ascending-k loop so
//! MSE differences reflect arithmetic, not reassociation. The golden
//! result is f64 with fused multiply-add; the `f64` format row
//! accumulates with separate multiply and add, which is what keeps its
//! MSE meaningful against that golden. Wall time is informational only.

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Posit32, Quire32};

/// Arithmetic configuration for one GEMM run.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GemmFormat {
    Posit32Quire,
    Posit32NoQuire,
    F32Fused,
    F32NoFused,
    F64,
}

impl GemmFormat {
    pub const ALL: [GemmFormat; 5] = [
        GemmFormat::Posit32Quire,
        GemmFormat::Posit32NoQuire,
        GemmFormat::F32Fused,
        GemmFormat::F32NoFused,
        GemmFormat::F64,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GemmFormat::Posit32Quire => "posit32_quire",
            GemmFormat::Posit32NoQuire => "posit32_noquire",
            GemmFormat::F32Fused => "f32_fused",
            GemmFormat::F32NoFused => "f32_nofused",
            GemmFormat::F64 => "f64",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|f| f.name() == name)
    }
}

impl fmt::Display for GemmFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Two n x n row-major matrices with entries uniform on
/// [-10^range_exp, 10^range_exp], deterministic per seed.
pub fn gen_inputs(n: usize, range_exp: i32, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = 10f64.powi(range_exp);
    let mut draw = |len: usize| -> Vec<f64> {
        (0..len).map(|_| rng.gen_range(-bound..=bound)).collect()
    };
    let a = draw(n * n);
    let b = draw(n * n);
    (a, b)
}

/// Reference result: f64 with fused multiply-add.
pub fn gemm_golden(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0f64;
            for k in 0..n {
                acc = a[i * n + k].mul_add(b[k * n + j], acc);
            }
            c[i * n + j] = acc;
        }
    }
    c
}

/// Posit32 with one quire accumulation and one rounding per output
/// entry, returned as raw bit patterns for bit-exact comparison.
pub fn gemm_posit_quire_bits(a: &[f64], b: &[f64], n: usize) -> Vec<u32> {
    let pa: Vec<Posit32> = a.iter().map(|&x| Posit32::from_f64(x)).collect();
    let pb: Vec<Posit32> = b.iter().map(|&x| Posit32::from_f64(x)).collect();
    let mut c = vec![0u32; n * n];
    let mut q = Quire32::new();
    for i in 0..n {
        for j in 0..n {
            q.clear();
            for k in 0..n {
                q.madd(pa[i * n + k], pb[k * n + j]);
            }
            c[i * n + j] = q.round().to_bits();
        }
    }
    c
}

fn gemm_posit_noquire_bits(a: &[f64], b: &[f64], n: usize) -> Vec<u32> {
    let pa: Vec<Posit32> = a.iter().map(|&x| Posit32::from_f64(x)).collect();
    let pb: Vec<Posit32> = b.iter().map(|&x| Posit32::from_f64(x)).collect();
    let mut c = vec![0u32; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = Posit32::ZERO;
            for k in 0..n {
                acc = acc + pa[i * n + k] * pb[k * n + j];
            }
            c[i * n + j] = acc.to_bits();
        }
    }
    c
}

fn gemm_f32(a: &[f64], b: &[f64], n: usize, fused: bool) -> Vec<f64> {
    let fa: Vec<f32> = a.iter().map(|&x| x as f32).collect();
    let fb: Vec<f32> = b.iter().map(|&x| x as f32).collect();
    let mut c = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0f32;
            for k in 0..n {
                let (x, y) = (fa[i * n + k], fb[k * n + j]);
                acc = if fused { x.mul_add(y, acc) } else { acc + x * y };
            }
            c[i * n + j] = acc as f64;
        }
    }
    c
}

fn gemm_f64_unfused(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0f64;
            for k in 0..n {
                acc += a[i * n + k] * b[k * n + j];
            }
            c[i * n + j] = acc;
        }
    }
    c
}

/// Runs one GEMM in the given format and widens the result to f64.
pub fn gemm(a: &[f64], b: &[f64], n: usize, format: GemmFormat) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n * n);
    let widen = |bits: Vec<u32>| -> Vec<f64> {
        bits.into_iter().map(|w| Posit32::from_bits(w).to_f64()).collect()
    };
    match format {
        GemmFormat::Posit32Quire => widen(gemm_posit_quire_bits(a, b, n)),
        GemmFormat::Posit32NoQuire => widen(gemm_posit_noquire_bits(a, b, n)),
        GemmFormat::F32Fused => gemm_f32(a, b, n, true),
        GemmFormat::F32NoFused => gemm_f32(a, b, n, false),
        GemmFormat::F64 => gemm_f64_unfused(a, b, n),
    }
}

/// Mean of squared entrywise differences, computed in f64.
pub fn mse(result: &[f64], golden: &[f64]) -> f64 {
    assert_eq!(result.len(), golden.len());
    assert!(!golden.is_empty());
    let sum: f64 = result
        .iter()
        .zip(golden)
        .map(|(&r, &g)| (r - g) * (r - g))
        .sum();
    sum / golden.len() as f64
}

pub fn geometric_mean(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let log_sum: f64 = values.iter().map(|&v| v.ln()).sum();
    (log_sum / values.len() as f64).exp()
}

/// Max-pooling layer geometry. Tensors are channel-major: the element
/// (ch, y, x) sits at ch*h*w + y*w + x.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct PoolLayer {
    pub name: &'static str,
    pub h: usize,
    pub w: usize,
    pub c: usize,
    pub kernel: usize,
    pub stride: usize,
}

pub const POOL_LAYERS: [PoolLayer; 3] = [
    PoolLayer { name: "lenet5", h: 28, w: 28, c: 6, kernel: 2, stride: 2 },
    PoolLayer { name: "alexnet", h: 54, w: 54, c: 96, kernel: 3, stride: 2 },
    PoolLayer { name: "resnet50", h: 112, w: 112, c: 64, kernel: 3, stride: 2 },
];

impl PoolLayer {
    pub fn from_name(name: &str) -> Option<Self> {
        POOL_LAYERS.iter().copied().find(|l| l.name == name)
    }

    pub fn out_h(&self) -> usize {
        (self.h - self.kernel) / self.stride + 1
    }

    pub fn out_w(&self) -> usize {
        (self.w - self.kernel) / self.stride + 1
    }

    pub fn shape_label(&self) -> String {
        format!(
            "{}x{}x{}k{}s{}",
            self.h, self.w, self.c, self.kernel, self.stride
        )
    }
}

/// An h x w x c tensor with entries uniform on
/// [-10^range_exp, 10^range_exp], deterministic per seed.
pub fn gen_tensor(layer: PoolLayer, range_exp: i32, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = 10f64.powi(range_exp);
    (0..layer.h * layer.w * layer.c)
        .map(|_| rng.gen_range(-bound..=bound))
        .collect()
}

fn pool_windows(layer: PoolLayer, mut emit: impl FnMut(usize, &[usize])) {
    let (h, w) = (layer.h, layer.w);
    let mut window = Vec::with_capacity(layer.kernel * layer.kernel);
    for ch in 0..layer.c {
        let plane = ch * h * w;
        for oy in 0..layer.out_h() {
            for ox in 0..layer.out_w() {
                window.clear();
                for ky in 0..layer.kernel {
                    for kx in 0..layer.kernel {
                        let y = oy * layer.stride + ky;
                        let x = ox * layer.stride + kx;
                        window.push(plane + y * w + x);
                    }
                }
                let out = (ch * layer.out_h() + oy) * layer.out_w() + ox;
                emit(out, &window);
            }
        }
    }
}

/// Per-window maximum over f64 entries.
pub fn maxpool_f64(input: &[f64], layer: PoolLayer) -> Vec<f64> {
    assert_eq!(input.len(), layer.h * layer.w * layer.c);
    let mut out = vec![f64::NEG_INFINITY; layer.out_h() * layer.out_w() * layer.c];
    pool_windows(layer, |o, window| {
        out[o] = window.iter().map(|&i| input[i]).fold(f64::NEG_INFINITY, f64::max);
    });
    out
}

/// Per-window maximum over posit entries using ordered-bit comparison.
pub fn maxpool_posit(input: &[Posit32], layer: PoolLayer) -> Vec<Posit32> {
    assert_eq!(input.len(), layer.h * layer.w * layer.c);
    let mut out = vec![Posit32::NAR; layer.out_h() * layer.out_w() * layer.c];
    pool_windows(layer, |o, window| {
        out[o] = window
            .iter()
            .map(|&i| input[i])
            .fold(Posit32::NAR, |m, v| m.max(v));
    });
    out
}

/// What a benchmark run sweeps over.
#[derive(Clone, Debug)]
pub enum BenchTarget {
    Gemm { sizes: Vec<usize>, formats: Vec<GemmFormat> },
    Maxpool { layers: Vec<PoolLayer> },
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub target: BenchTarget,
    pub range_exps: Vec<i32>,
    pub seeds: Vec<u64>,
}

/// One measured cell.
#[derive(Clone, Debug)]
pub struct MseRow {
    pub kind: &'static str,
    pub size_or_shape: String,
    pub range_exp: i32,
    pub format: String,
    pub seed: u64,
    pub mse: f64,
    pub wall_ns: u128,
}

pub const CSV_HEADER: &str = "kind,size_or_shape,range_exp,format,seed,mse,wall_ns";

impl MseRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{:e},{}",
            self.kind,
            self.size_or_shape,
            self.range_exp,
            self.format,
            self.seed,
            self.mse,
            self.wall_ns
        )
    }
}

pub fn to_csv(rows: &[MseRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    out
}

/// Runs every cell of the config in deterministic key order.
pub fn run(config: &BenchConfig) -> Vec<MseRow> {
    let mut rows = Vec::new();
    match &config.target {
        BenchTarget::Gemm { sizes, formats } => {
            for &n in sizes {
                for &range_exp in &config.range_exps {
                    for &seed in &config.seeds {
                        let (a, b) = gen_inputs(n, range_exp, seed);
                        let golden = gemm_golden(&a, &b, n);
                        for &format in formats {
                            let start = Instant::now();
                            let result = gemm(&a, &b, n, format);
                            let wall_ns = start.elapsed().as_nanos();
                            rows.push(MseRow {
                                kind: "gemm",
                                size_or_shape: n.to_string(),
                                range_exp,
                                format: format.name().to_string(),
                                seed,
                                mse: mse(&result, &golden),
                                wall_ns,
                            });
                        }
                    }
                }
            }
        }
        BenchTarget::Maxpool { layers } => {
            for &layer in layers {
                for &range_exp in &config.range_exps {
                    for &seed in &config.seeds {
                        let input = gen_tensor(layer, range_exp, seed);
                        let golden = maxpool_f64(&input, layer);
                        let pin: Vec<Posit32> =
                            input.iter().map(|&x| Posit32::from_f64(x)).collect();
                        let start = Instant::now();
                        let pooled = maxpool_posit(&pin, layer);
                        let wall_ns = start.elapsed().as_nanos();
                        let widened: Vec<f64> =
                            pooled.iter().map(|p| p.to_f64()).collect();
                        rows.push(MseRow {
                            kind: "maxpool",
                            size_or_shape: layer.shape_label(),
                            range_exp,
                            format: "posit32".to_string(),
                            seed,
                            mse: mse(&widened, &golden),
                            wall_ns,
                        });
                    }
                }
            }
        }
    }
    rows
}
