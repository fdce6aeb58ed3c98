//! Inflation maps `Ψ(x_1, …, x_d) = (ψ_1(x), …, ψ_k(x))` with
//! `ψ_j = Σ_i T_{ji} x_i`, the slab measures on `K_0` that transport onto
//! Lebesgue measure, and Monte Carlo checks of the resulting inequalities.
//!
//! Variables `x_i`, output blocks `ψ_j` and coordinate axes are numbered
//! from 1 in every public field, so they read like the formulas.

use std::collections::HashSet;
use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curve::ParametricCurve;
use crate::error::{invalid, Error, Result};
use crate::fit::least_squares;

pub const MAX_AMBIENT: usize = 8;
/// Samples drawn from one RNG stream; stream `c` serves samples
/// `c·CHUNK..(c+1)·CHUNK`, so results do not depend on the thread count.
pub const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InflationMapSpec {
    pub d: usize,
    pub k: usize,
    pub q: usize,
    pub r: usize,
    /// `n_j` for each output block; empty when `r = 0`.
    pub n: Vec<usize>,
    /// `k × d` coefficients of `Ψ`.
    pub t: Vec<Vec<i8>>,
    pub t_prime: Vec<Vec<i8>>,
    pub t_double_prime: Vec<Vec<i8>>,
}

/// Builds `Ψ` for `d = qk + r`.
///
/// Row `j` of `T′` is `x_{jq} + … + x_{jq−q+2} − x_{(j−1)q+1}` (only the
/// negative term when `q = 1`); row `j` of `T″` is `x_d + … + x_{d−n_j}`
/// with `n_j = ⌈jr/k⌉ − 1`, and vanishes when `r = 0`.
pub fn build_inflation(d: usize, k: usize) -> Result<InflationMapSpec> {
    if !(1..=MAX_AMBIENT).contains(&d) {
        return Err(invalid("d", format!("d must be in 2..={MAX_AMBIENT}, got {d}")));
    }
    if k == 0 || k >= d {
        return Err(invalid("k", format!("need 1 ≤ k < d, got k = {k}, d = {d}")));
    }
    let (q, r) = (d / k, d % k);
    let n: Vec<usize> = if r == 0 {
        Vec::new()
    } else {
        (1..=k).map(|j| (j * r).div_ceil(k) - 1).collect()
    };
    let mut t_prime = vec![vec![0i8; d]; k];
    let mut t_double_prime = vec![vec![0i8; d]; k];
    for j in 1..=k {
        let row = &mut t_prime[j - 1];
        for pos in (j * q - (q - 1) + 1)..=(j * q) {
            row[pos - 1] = 1;
        }
        row[(j - 1) * q] = -1;
        if r > 0 {
            for pos in (d - n[j - 1])..=d {
                t_double_prime[j - 1][pos - 1] = 1;
            }
        }
    }
    let t = t_prime
        .iter()
        .zip(&t_double_prime)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
        .collect();
    Ok(InflationMapSpec {
        d,
        k,
        q,
        r,
        n,
        t,
        t_prime,
        t_double_prime,
    })
}

impl InflationMapSpec {
    /// `ψ_j` in the form `x_5+x_2−x_1`, terms by decreasing index.
    pub fn component(&self, j: usize) -> String {
        let mut out = String::new();
        for i in (1..=self.d).rev() {
            let sign = match self.t[j - 1][i - 1] {
                0 => continue,
                c if c > 0 => "+",
                _ => "−",
            };
            if !(out.is_empty() && sign == "+") {
                out.push_str(sign);
            }
            out.push_str(&format!("x_{i}"));
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

impl fmt::Display for InflationMapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = (1..=self.k).map(|j| self.component(j)).collect();
        write!(f, "Ψ = ({})", parts.join(", "))
    }
}

/// Whether `Ψ_0 = x_1 + … + x_l`-type maps can be nondegenerate, by counting
/// dimensions.
pub fn psi0_degeneracy_check(d: usize, k: usize) -> bool {
    (d - k) * k <= d || k == 1 || k + 1 == d || d <= 4
}

/// Uniform probability measure on the centred slab
/// `{Σ_n a_n σ_n e_{axes[n]} : |a_n| ≤ 1/2}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlabMeasure {
    pub ambient: usize,
    pub axes: Vec<usize>,
    pub signs: Vec<i8>,
}

impl SlabMeasure {
    pub fn contains_axis(&self, axis: usize) -> bool {
        self.axes.contains(&axis)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VariableClass {
    First,
    Second,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportPlan {
    pub spec: InflationMapSpec,
    /// Slab measure for each variable `x_1..x_d`.
    pub slabs: Vec<SlabMeasure>,
    pub classes: Vec<VariableClass>,
    /// Row `(j−1)d + (c−1)` is coordinate `c` of `ψ_j`; column `(i−1)k + (n−1)`
    /// is the `n`-th slab parameter of `x_i`.
    pub matrix: Vec<Vec<i64>>,
    pub determinant: f64,
    /// Rows and columns indexed by `t = 1..kr` as in [`build_transport`].
    pub second_class_block: Vec<Vec<i64>>,
    pub second_class_unit_lower_triangular: bool,
}

/// Wraps an index into `1..=d`.
fn wrap(t: usize, d: usize) -> usize {
    (t - 1) % d + 1
}

/// Assigns a slab to every variable and assembles the parameter matrix.
///
/// Output block `j` reserves the axes `[(j−1)r+1], …, [jr]` (indices mod
/// `d`) for second-class variables. Its other `qk` axes, in increasing
/// order, are split into `q` groups of `k` and given to the first-class
/// variables `x_{(j−1)q+1}, …, x_{jq}`. The second-class variable
/// `x_{d−j'+1}` receives the axes `[(j'−1)k+1], …, [j'k]`.
pub fn build_transport(spec: &InflationMapSpec) -> Result<TransportPlan> {
    let (d, k, q, r) = (spec.d, spec.k, spec.q, spec.r);
    let mut slabs: Vec<Option<SlabMeasure>> = vec![None; d];
    let mut classes = vec![VariableClass::First; d];
    for j in 1..=k {
        let reserved: Vec<usize> = ((j - 1) * r + 1..=j * r).map(|t| wrap(t, d)).collect();
        let first: Vec<usize> = (1..=d).filter(|c| !reserved.contains(c)).collect();
        for (g, group) in first.chunks(k).enumerate() {
            slabs[(j - 1) * q + g] = Some(SlabMeasure {
                ambient: d,
                axes: group.to_vec(),
                signs: vec![1; k],
            });
        }
    }
    for jp in 1..=r {
        let var = d - jp + 1;
        let axes: Vec<usize> = (1..=k).map(|n| wrap((jp - 1) * k + n, d)).collect();
        let distinct: HashSet<usize> = axes.iter().copied().collect();
        if distinct.len() != k {
            return Err(Error::Construction(format!(
                "slab axes {axes:?} of x_{var} are not distinct"
            )));
        }
        classes[var - 1] = VariableClass::Second;
        slabs[var - 1] = Some(SlabMeasure {
            ambient: d,
            axes,
            signs: vec![1; k],
        });
    }
    let slabs: Vec<SlabMeasure> = slabs
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.ok_or_else(|| Error::Construction(format!("x_{} has no slab", i + 1))))
        .collect::<Result<_>>()?;

    let size = d * k;
    let mut matrix = vec![vec![0i64; size]; size];
    for j in 1..=k {
        for c in 1..=d {
            let row = (j - 1) * d + (c - 1);
            for (i, slab) in slabs.iter().enumerate() {
                let coef = spec.t[j - 1][i] as i64;
                if coef == 0 {
                    continue;
                }
                for (n, (&axis, &sign)) in slab.axes.iter().zip(&slab.signs).enumerate() {
                    if axis == c {
                        matrix[row][i * k + n] = coef * sign as i64;
                    }
                }
            }
        }
    }
    let determinant = DMatrix::from_fn(size, size, |a, b| matrix[a][b] as f64).determinant();
    if (determinant.abs() - 1.0).abs() > 1e-9 {
        return Err(Error::Construction(format!(
            "|det M| = {} for (d, k) = ({d}, {k})",
            determinant.abs()
        )));
    }

    let kr = k * r;
    let second_class_block: Vec<Vec<i64>> = (1..=kr)
        .map(|t| {
            let row = (t.div_ceil(r) - 1) * d + (wrap(t, d) - 1);
            (1..=kr)
                .map(|tp| {
                    let jp = tp.div_ceil(k);
                    let n = tp - (jp - 1) * k;
                    matrix[row][(d - jp) * k + (n - 1)]
                })
                .collect()
        })
        .collect();
    let unit_lower = second_class_block.iter().enumerate().all(|(a, row)| {
        row.iter()
            .enumerate()
            .all(|(b, &v)| if a == b { v == 1 } else if b > a { v == 0 } else { true })
    });
    if !unit_lower {
        return Err(Error::Construction(format!(
            "second-class block is not unit lower triangular for (d, k) = ({d}, {k})"
        )));
    }
    Ok(TransportPlan {
        spec: spec.clone(),
        slabs,
        classes,
        matrix,
        determinant,
        second_class_block,
        second_class_unit_lower_triangular: unit_lower,
    })
}

impl TransportPlan {
    pub fn output_dim(&self) -> usize {
        self.matrix.len()
    }

    /// `Ψ` applied to slab parameters.
    pub fn apply(&self, params: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.matrix) {
            *o = row.iter().zip(params).map(|(&m, &p)| m as f64 * p).sum();
        }
    }

    /// Half-widths of the image of `[−1/2, 1/2]^{dk}` along each output axis.
    pub fn image_half_widths(&self) -> Vec<f64> {
        self.matrix
            .iter()
            .map(|row| row.iter().map(|v| v.abs() as f64).sum::<f64>() / 2.0)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(invalid("box", "corners need equal, nonzero length"));
        }
        Ok(Self { lo, hi })
    }

    pub fn cube(dim: usize, corner: f64, side: f64) -> Self {
        Self {
            lo: vec![corner; dim],
            hi: vec![corner + side; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a).max(0.0)).product()
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        y.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| *a <= *v && *v <= *b)
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn chunk_ranges(samples: usize) -> Vec<(usize, usize)> {
    (0..samples.div_ceil(CHUNK))
        .map(|c| (c, CHUNK.min(samples - c * CHUNK)))
        .collect()
}

/// Smallest and largest box volume drawn by [`random_boxes`].
pub const BOX_VOLUME_RANGE: (f64, f64) = (0.01, 0.5);

/// Boxes centred at `Ψ(X)` for random `X ~ ∏ λ_j`, so each one overlaps the
/// image, with volume log-uniform in [`BOX_VOLUME_RANGE`] split across axes
/// by random weights. At `10^4` samples even the smallest box expects `100`
/// hits where the density is 1, which keeps the binomial threshold meaningful.
pub fn random_boxes(plan: &TransportPlan, count: usize, seed: u64) -> Vec<AxisBox> {
    let dim = plan.output_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ln_lo, ln_hi) = (BOX_VOLUME_RANGE.0.ln(), BOX_VOLUME_RANGE.1.ln());
    let mut params = vec![0.0; dim];
    let mut center = vec![0.0; dim];
    (0..count)
        .map(|_| {
            for p in params.iter_mut() {
                *p = rng.gen::<f64>() - 0.5;
            }
            plan.apply(&params, &mut center);
            let ln_volume = rng.gen_range(ln_lo..=ln_hi);
            let weights: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.5..1.5)).collect();
            let total: f64 = weights.iter().sum();
            let half: Vec<f64> = weights.iter().map(|w| 0.5 * (ln_volume * w / total).exp()).collect();
            AxisBox {
                lo: center.iter().zip(&half).map(|(c, h)| c - h).collect(),
                hi: center.iter().zip(&half).map(|(c, h)| c + h).collect(),
            }
        })
        .collect()
}

pub fn image_bounding_box(plan: &TransportPlan) -> AxisBox {
    let half = plan.image_half_widths();
    AxisBox {
        lo: half.iter().map(|h| -h).collect(),
        hi: half,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxCheck {
    pub volume: f64,
    pub hits: u64,
    pub estimate: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PushforwardReport {
    pub samples: usize,
    pub seed: u64,
    pub boxes: Vec<BoxCheck>,
    pub all_pass: bool,
}

pub const MIN_PUSHFORWARD_SAMPLES: usize = 10_000;

/// Estimates `P(Ψ(X) ∈ B)` for `X ~ ∏ λ_j` and checks it against `vol(B)`
/// plus three binomial standard errors.
pub fn mc_pushforward_check(plan: &TransportPlan, boxes: &[AxisBox], samples: usize, seed: u64) -> Result<PushforwardReport> {
    if samples < MIN_PUSHFORWARD_SAMPLES {
        return Err(invalid("samples", format!("need at least {MIN_PUSHFORWARD_SAMPLES} samples")));
    }
    let dim = plan.output_dim();
    if let Some(b) = boxes.iter().find(|b| b.dim() != dim) {
        return Err(invalid("box", format!("box has dimension {}, expected {dim}", b.dim())));
    }
    let hits = chunk_ranges(samples)
        .into_par_iter()
        .map(|(chunk, len)| {
            let mut rng = chunk_rng(seed, chunk);
            let mut params = vec![0.0; dim];
            let mut y = vec![0.0; dim];
            let mut hits = vec![0u64; boxes.len()];
            for _ in 0..len {
                for p in params.iter_mut() {
                    *p = rng.gen::<f64>() - 0.5;
                }
                plan.apply(&params, &mut y);
                for (h, b) in hits.iter_mut().zip(boxes) {
                    if b.contains(&y) {
                        *h += 1;
                    }
                }
            }
            hits
        })
        .reduce(
            || vec![0u64; boxes.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let n = samples as f64;
    let checks: Vec<BoxCheck> = boxes
        .iter()
        .zip(hits)
        .map(|(b, h)| {
            let volume = b.volume();
            let v = volume.min(1.0);
            let threshold = volume + 3.0 * (v * (1.0 - v) / n).sqrt();
            let estimate = h as f64 / n;
            BoxCheck {
                volume,
                hits: h,
                estimate,
                threshold,
                pass: estimate <= threshold,
            }
        })
        .collect();
    Ok(PushforwardReport {
        samples,
        seed,
        all_pass: checks.iter().all(|c| c.pass),
        boxes: checks,
    })
}

/// A sampler for points on a surface `K ⊂ R^d`.
pub trait Surface: Sync {
    fn ambient_dim(&self) -> usize;
    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [f64]);
}

/// Parameter-uniform samples.
impl Surface for ParametricCurve {
    fn ambient_dim(&self) -> usize {
        self.dim()
    }

    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let [lo, hi] = self.domain;
        self.eval_into(rng.gen_range(lo..=hi), out);
    }
}

/// The plane corner `[0,1]×{0} ∪ {1}×[0,1]`, uniform in length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CornerK0;

impl Surface for CornerK0 {
    fn ambient_dim(&self) -> usize {
        2
    }

    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let s: f64 = rng.gen();
        if rng.gen_bool(0.5) {
            out.copy_from_slice(&[s, 0.0]);
        } else {
            out.copy_from_slice(&[1.0, s]);
        }
    }
}

/// Union of centred slabs, each chosen with equal probability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlabUnion(pub Vec<SlabMeasure>);

impl Surface for SlabUnion {
    fn ambient_dim(&self) -> usize {
        self.0.first().map_or(0, |s| s.ambient)
    }

    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        out.fill(0.0);
        let slab = &self.0[rng.gen_range(0..self.0.len())];
        for (&axis, &sign) in slab.axes.iter().zip(&slab.signs) {
            out[axis - 1] = sign as f64 * (rng.gen::<f64>() - 0.5);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NondegeneracyReport {
    pub level: u32,
    pub samples: usize,
    pub occupied_cells: usize,
    pub cell_volume: f64,
    pub volume: f64,
}

pub const MAX_NONDEGENERACY_DIM: usize = 6;
pub const MAX_NONDEGENERACY_SAMPLES: usize = 1 << 24;

/// Volume of the level-`ℓ` dyadic cells met by `Ψ(x_1, …, x_d)` for
/// independent samples `x_i ∈ K`.
pub fn nondegeneracy_estimate(
    surface: &dyn Surface,
    spec: &InflationMapSpec,
    level: u32,
    samples: usize,
    seed: u64,
) -> Result<NondegeneracyReport> {
    let (d, k) = (spec.d, spec.k);
    if surface.ambient_dim() != d {
        return Err(Error::Mismatch(format!(
            "surface lives in R^{} but Ψ expects R^{d}",
            surface.ambient_dim()
        )));
    }
    if d * k > MAX_NONDEGENERACY_DIM {
        return Err(Error::BudgetExceeded(format!("dk = {} exceeds {MAX_NONDEGENERACY_DIM}", d * k)));
    }
    if samples > MAX_NONDEGENERACY_SAMPLES || level > 20 {
        return Err(Error::BudgetExceeded(format!("{samples} samples at level {level}")));
    }
    let scale = 2f64.powi(level as i32);
    let per_chunk: Vec<Vec<Vec<i64>>> = chunk_ranges(samples)
        .into_par_iter()
        .map(|(chunk, len)| {
            let mut rng = chunk_rng(seed, chunk);
            let mut xs = vec![vec![0.0; d]; d];
            let mut keys = Vec::with_capacity(len);
            for _ in 0..len {
                for x in xs.iter_mut() {
                    surface.sample(&mut rng, x);
                }
                let mut key = Vec::with_capacity(d * k);
                for row in &spec.t {
                    for c in 0..d {
                        let y: f64 = row.iter().zip(&xs).map(|(&t, x)| t as f64 * x[c]).sum();
                        key.push((y * scale).floor() as i64);
                    }
                }
                keys.push(key);
            }
            keys
        })
        .collect();
    let occupied: HashSet<Vec<i64>> = per_chunk.into_iter().flatten().collect();
    let cell_volume = scale.powi(-((d * k) as i32));
    Ok(NondegeneracyReport {
        level,
        samples,
        occupied_cells: occupied.len(),
        cell_volume,
        volume: occupied.len() as f64 * cell_volume,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlabFunctionalReport {
    pub lhs: f64,
    pub std_error: f64,
    pub rhs: f64,
    /// `lhs / rhs`, the constant the inequality needs at this box.
    pub ratio: f64,
    pub samples: usize,
}

pub const MIN_SLAB_SAMPLES: usize = 100_000;

/// Length of `[y − 1/2, y + 1/2] ∩ [lo, hi]`.
fn window_overlap(y: f64, lo: f64, hi: f64) -> f64 {
    ((y + 0.5).min(hi) - (y - 0.5).max(lo)).max(0.0)
}

/// `λ_j({x : y + x ∈ E})` for the centred slab `λ_j` and an axis box `E`.
pub fn slab_hit_probability(slab: &SlabMeasure, e: &AxisBox, y: &[f64]) -> f64 {
    let mut p = 1.0;
    for axis in 1..=slab.ambient {
        let (lo, hi, v) = (e.lo[axis - 1], e.hi[axis - 1], y[axis - 1]);
        if slab.contains_axis(axis) {
            p *= window_overlap(v, lo, hi);
        } else if !(lo <= v && v <= hi) {
            return 0.0;
        }
    }
    p
}

/// Monte Carlo estimate of `∫ ∏_j λ_j({x : y + x ∈ E}) dy` with `λ_j` the
/// plan's slab measures, against `m(E)^{d/(d−k)}`.
///
/// Each inner probability is evaluated exactly, so only the outer integral
/// is sampled. `y` is drawn uniformly from the support of the integrand:
/// `E_i` on axes missing from some slab, `E_i ± 1/2` elsewhere.
pub fn slab_functional_check(plan: &TransportPlan, e: &AxisBox, samples: usize, seed: u64) -> Result<SlabFunctionalReport> {
    let d = plan.spec.d;
    if e.dim() != d {
        return Err(invalid("E", format!("box has dimension {}, expected {d}", e.dim())));
    }
    if samples < MIN_SLAB_SAMPLES {
        return Err(invalid("samples", format!("need at least {MIN_SLAB_SAMPLES} samples")));
    }
    let exponent = d as f64 / (d - plan.spec.k) as f64;
    let rhs = e.volume().powf(exponent);
    if e.volume() == 0.0 {
        return Ok(SlabFunctionalReport {
            lhs: 0.0,
            std_error: 0.0,
            rhs,
            ratio: f64::NAN,
            samples,
        });
    }
    let support: Vec<(f64, f64)> = (1..=d)
        .map(|axis| {
            let (lo, hi) = (e.lo[axis - 1], e.hi[axis - 1]);
            if plan.slabs.iter().all(|s| s.contains_axis(axis)) {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        })
        .collect();
    let support_volume: f64 = support.iter().map(|(a, b)| b - a).product();
    let (sum, sum_sq) = chunk_ranges(samples)
        .into_par_iter()
        .map(|(chunk, len)| {
            let mut rng = chunk_rng(seed, chunk);
            let mut y = vec![0.0; d];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..len {
                for (v, &(a, b)) in y.iter_mut().zip(&support) {
                    *v = a + (b - a) * rng.gen::<f64>();
                }
                let value: f64 = plan.slabs.iter().map(|slab| slab_hit_probability(slab, e, &y)).product();
                s += value;
                s2 += value * value;
            }
            (s, s2)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    let lhs = support_volume * mean;
    Ok(SlabFunctionalReport {
        lhs,
        std_error: support_volume * (var / n).sqrt(),
        rhs,
        ratio: lhs / rhs,
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentProbe {
    /// `(side, m(E), lhs)` for each cube `E = [0, side]^d`.
    pub points: Vec<(f64, f64, f64)>,
    pub exponent: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Fits `ln lhs` against `ln m(E)` over cubes `[0, side]^d`.
pub fn slab_exponent_probe(
    plan: &TransportPlan,
    sides: &[f64],
    samples: usize,
    seed: u64,
    tolerance: f64,
) -> Result<ExponentProbe> {
    let d = plan.spec.d;
    let mut points = Vec::with_capacity(sides.len());
    for (i, &side) in sides.iter().enumerate() {
        let e = AxisBox::cube(d, 0.0, side);
        let report = slab_functional_check(plan, &e, samples, seed.wrapping_add(i as u64))?;
        if report.lhs <= 0.0 {
            return Err(Error::Fit(format!("zero estimate at side {side}")));
        }
        points.push((side, e.volume(), report.lhs));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.2.ln()).collect();
    let (exponent, _, _) = least_squares(&xs, &ys)?;
    let target = d as f64 / (d - plan.spec.k) as f64;
    Ok(ExponentProbe {
        points,
        exponent,
        target,
        tolerance,
        pass: exponent >= target - tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn plan(d: usize, k: usize) -> TransportPlan {
        build_transport(&build_inflation(d, k).unwrap()).unwrap()
    }

    #[test]
    fn printed_maps() {
        assert_eq!(build_inflation(5, 2).unwrap().to_string(), "Ψ = (x_5+x_2−x_1, x_5+x_4−x_3)");
        assert_eq!(build_inflation(2, 1).unwrap().to_string(), "Ψ = (x_2−x_1)");
        let s = build_inflation(3, 2).unwrap();
        assert_eq!((s.q, s.r), (1, 1));
        assert_eq!(s.to_string(), "Ψ = (x_3−x_1, x_3−x_2)");
        assert!(build_inflation(3, 3).is_err());
        assert!(build_inflation(9, 2).is_err());
    }

    #[test]
    fn n_j_bracket() {
        for d in 2..=8 {
            for k in 1..d {
                let s = build_inflation(d, k).unwrap();
                for (j, &nj) in s.n.iter().enumerate() {
                    let j = j + 1;
                    assert!(nj * k < j * s.r && j * s.r <= (nj + 1) * k);
                }
            }
        }
    }

    #[test]
    fn structure_of_coefficients() {
        for d in 2..=7 {
            for k in 1..d {
                let s = build_inflation(d, k).unwrap();
                assert_eq!(s.q * k + s.r, d);
                for j in 0..k {
                    let tp = &s.t_prime[j];
                    assert_eq!(tp.iter().map(|&v| v as i64).sum::<i64>(), s.q as i64 - 2);
                    assert_eq!(tp.iter().filter(|&&v| v == 1).count(), s.q - 1);
                    assert_eq!(tp.iter().filter(|&&v| v == -1).count(), 1);
                    let tpp = &s.t_double_prime[j];
                    let support = tpp.iter().filter(|&&v| v != 0).count();
                    assert_eq!(support, if s.r == 0 { 0 } else { s.n[j] + 1 });
                    for i in 0..d {
                        assert!(tp[i] == 0 || tpp[i] == 0);
                        assert!((-1..=1).contains(&s.t[j][i]));
                    }
                }
            }
        }
    }

    #[test]
    fn transport_examples() {
        let p = plan(5, 2);
        assert_eq!(p.matrix.len(), 10);
        assert!((p.determinant.abs() - 1.0).abs() < 1e-12);
        assert_eq!(p.second_class_block, vec![vec![1, 0], vec![0, 1]]);
        let p = plan(2, 1);
        assert_eq!(p.matrix, vec![vec![-1, 0], vec![0, 1]]);
        let p = plan(4, 2);
        assert!(p.second_class_block.is_empty());
        for row in &p.matrix {
            assert_eq!(row.iter().filter(|&&v| v != 0).count(), 1);
        }
        assert!(p.classes.iter().all(|&c| c == VariableClass::First));
    }

    #[test]
    fn all_plans_are_unimodular() {
        for d in 2..=7 {
            for k in 1..d {
                let p = plan(d, k);
                assert!((p.determinant.abs() - 1.0).abs() < 1e-9, "({d},{k})");
                assert!(p.second_class_unit_lower_triangular);
                assert_eq!(p.second_class_block.len(), k * p.spec.r);
            }
        }
    }

    #[test]
    fn psi0_examples() {
        assert!(!psi0_degeneracy_check(5, 2));
        assert!(psi0_degeneracy_check(4, 2));
        assert!(psi0_degeneracy_check(9, 8));
        assert!(psi0_degeneracy_check(9, 1));
        assert!(!psi0_degeneracy_check(10, 3));
    }

    #[test]
    fn pushforward_passes() {
        for (d, k) in [(2, 1), (3, 2), (4, 2), (5, 2)] {
            let p = plan(d, k);
            let mut boxes = random_boxes(&p, 20, 11);
            boxes.push(image_bounding_box(&p));
            let far = AxisBox::cube(d * k, 100.0, 1.0);
            boxes.push(far);
            let report = mc_pushforward_check(&p, &boxes, 20_000, 5).unwrap();
            assert!(report.all_pass, "({d},{k})");
            let whole = &report.boxes[20];
            assert_eq!(whole.estimate, 1.0);
            assert!(whole.volume >= 1.0);
            assert_eq!(report.boxes[21].hits, 0);
        }
    }

    #[test]
    fn random_box_volumes_stay_in_range() {
        let (lo, hi) = BOX_VOLUME_RANGE;
        for (d, k) in [(2, 1), (5, 2), (7, 3)] {
            for b in random_boxes(&plan(d, k), 50, 4) {
                let v = b.volume();
                assert!(v >= lo * (1.0 - 1e-12) && v <= hi * (1.0 + 1e-12), "({d},{k}): {v}");
            }
        }
    }

    #[test]
    fn pushforward_is_uniform_for_large_boxes() {
        // a box inside the image of the unit cube has probability = volume
        let p = plan(2, 1);
        let b = AxisBox::new(vec![-0.25, -0.25], vec![0.25, 0.25]).unwrap();
        let report = mc_pushforward_check(&p, &[b], 100_000, 3).unwrap();
        assert!((report.boxes[0].estimate - 0.25).abs() < 0.01);
    }

    #[test]
    fn pushforward_is_deterministic() {
        let p = plan(3, 2);
        let boxes = random_boxes(&p, 5, 1);
        let a = mc_pushforward_check(&p, &boxes, 10_000, 9).unwrap();
        let b = mc_pushforward_check(&p, &boxes, 10_000, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nondegeneracy_examples() {
        let spec = build_inflation(2, 1).unwrap();
        let parabola = nondegeneracy_estimate(&ParametricCurve::parabola(), &spec, 7, 400_000, 1).unwrap();
        assert!((parabola.volume - 2.0 / 3.0).abs() < 0.05, "{}", parabola.volume);
        let segment = nondegeneracy_estimate(&ParametricCurve::segment(2), &spec, 7, 100_000, 1).unwrap();
        assert!(segment.volume < 0.02);
        let corner = nondegeneracy_estimate(&CornerK0, &spec, 6, 400_000, 1).unwrap();
        assert!((corner.volume - 2.0).abs() < 0.1, "{}", corner.volume);
        assert!(nondegeneracy_estimate(&CornerK0, &build_inflation(3, 2).unwrap(), 4, 10, 1).is_err());
    }

    #[test]
    fn nondegeneracy_monotonicity() {
        let spec = build_inflation(2, 1).unwrap();
        let curve = ParametricCurve::parabola();
        // nested samples only add occupied cells
        let mut last = 0.0;
        for samples in [1_000, 10_000, 50_000] {
            let v = nondegeneracy_estimate(&curve, &spec, 6, samples, 4).unwrap().volume;
            assert!(v >= last);
            last = v;
        }
        // for fixed samples a finer grid can only shrink the occupied volume
        let mut last = f64::INFINITY;
        for level in 3..=8 {
            let v = nondegeneracy_estimate(&curve, &spec, level, 20_000, 4).unwrap().volume;
            assert!(v <= last);
            last = v;
        }
    }

    /// Closed-form `∫ ∏_j P_j(y) dy` for the slab functional, factored over axes and
    /// integrated by the midpoint rule on each axis.
    fn slab_oracle(p: &TransportPlan, e: &AxisBox) -> f64 {
        let d = p.spec.d;
        (1..=d)
            .map(|axis| {
                let (lo, hi) = (e.lo[axis - 1], e.hi[axis - 1]);
                let (a, b) = (lo - 0.5, hi + 0.5);
                let n = 200_000;
                let h = (b - a) / n as f64;
                (0..n)
                    .map(|i| {
                        let y = a + (i as f64 + 0.5) * h;
                        p.slabs
                            .iter()
                            .map(|s| {
                                if s.contains_axis(axis) {
                                    ((y + 0.5).min(hi) - (y - 0.5).max(lo)).max(0.0)
                                } else if lo <= y && y <= hi {
                                    1.0
                                } else {
                                    0.0
                                }
                            })
                            .product::<f64>()
                            * h
                    })
                    .sum::<f64>()
            })
            .product()
    }

    #[test]
    fn slab_functional_matches_oracle() {
        for (d, k) in [(2, 1), (3, 2), (4, 2)] {
            let p = plan(d, k);
            for e in [AxisBox::cube(d, 0.0, 0.3), AxisBox::cube(d, -0.2, 1.0), AxisBox::cube(d, 0.1, 0.05)] {
                let r = slab_functional_check(&p, &e, 100_000, 2).unwrap();
                let want = slab_oracle(&p, &e);
                assert!((r.lhs - want).abs() <= 4.0 * r.std_error + 1e-4 * want, "({d},{k}) {} vs {want}", r.lhs);
            }
        }
        let p = plan(2, 1);
        let r = slab_functional_check(&p, &AxisBox::cube(2, 0.0, 0.25), 100_000, 3).unwrap();
        assert!((r.lhs - 0.25f64.powi(4)).abs() < 1e-12);
        let r = slab_functional_check(&p, &AxisBox::cube(2, 0.0, 1.0), 100_000, 3).unwrap();
        assert!((r.lhs - 9.0 / 16.0).abs() < 0.01);
    }

    #[test]
    fn slab_functional_extremes() {
        let p = plan(2, 1);
        let empty = AxisBox::new(vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(slab_functional_check(&p, &empty, 100_000, 1).unwrap().lhs, 0.0);
        // every y ∈ E at distance ≥ 1/2 from the boundary hits with probability 1
        let huge = AxisBox::cube(2, -50.0, 100.0);
        let r = slab_functional_check(&p, &huge, 100_000, 1).unwrap();
        assert!((r.lhs / huge.volume() - 1.0).abs() < 0.02);
    }

    #[test]
    fn slab_functional_exponent() {
        let p = plan(2, 1);
        let sides: Vec<f64> = (0..=5).map(|i| 2f64.powi(-i)).collect();
        let probe = slab_exponent_probe(&p, &sides, 100_000, 1, 0.1).unwrap();
        assert!(probe.pass, "exponent {}", probe.exponent);
        assert!(probe.exponent <= 2.0 + 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn apply_matches_coefficients(d in 2usize..6, k_seed in 0usize..10, params in prop::collection::vec(-0.5f64..0.5, 30)) {
            // Ψ(x) with x_i = Σ_n a_{i,n} e_{axes}, computed from T directly
            let k = 1 + k_seed % (d - 1);
            let p = plan(d, k);
            let params = &params[..d * k];
            let mut y = vec![0.0; d * k];
            p.apply(params, &mut y);
            for j in 0..k {
                for c in 0..d {
                    let mut want = 0.0;
                    for (i, slab) in p.slabs.iter().enumerate() {
                        for (n, &axis) in slab.axes.iter().enumerate() {
                            if axis == c + 1 {
                                want += p.spec.t[j][i] as f64 * params[i * k + n];
                            }
                        }
                    }
                    prop_assert!((y[j * d + c] - want).abs() < 1e-12);
                }
            }
        }
    }
}
