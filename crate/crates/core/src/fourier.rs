//! Fourier transforms `μ̂(ξ) = ∫ e^{−2πi⟨ξ,x⟩} dμ(x)` of Cantor and curve
//! measures, dyadic decay fits and lattice energy sums.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::ParametricCurve;
use crate::digits::DigitCantorSpec;
use crate::error::{invalid, Error, Result};
use crate::fit::least_squares;

/// Target for the documented truncation bound of the Cantor product.
pub const TRUNCATION_TOLERANCE: f64 = 1e-10;
pub const MIN_QUADRATURE_POINTS: usize = 1000;
/// Quadrature nodes per unit of `|ξ|·Lip(γ)·|domain|`.
pub const NODES_PER_WAVE: f64 = 10.0;

/// `e^{−2πi x}` after reducing `x` to `[−1/2, 1/2]`, so integer phases are
/// exactly 1 and `x ↦ −x` conjugates exactly.
fn unit_phase(x: f64) -> Complex64 {
    let f = x - x.round();
    let (s, c) = (2.0 * PI * f).sin_cos();
    Complex64::new(c, -s)
}

/// `(1/|S|) Σ_s e^{−2πi s x}`.
fn digit_factor(spec: &DigitCantorSpec, x: f64) -> Complex64 {
    let sum: Complex64 = spec.digits().iter().map(|&s| unit_phase(s as f64 * x)).sum();
    sum / spec.len() as f64
}

/// `Σ_{j>J} 2π·max(S)·n^{−j}·|ξ|`.
pub fn truncation_bound(spec: &DigitCantorSpec, xi: f64, truncation: u32) -> f64 {
    let n = spec.base() as f64;
    2.0 * PI * spec.max_digit() as f64 * xi.abs() * n.powi(-(truncation as i32)) / (n - 1.0)
}

/// Smallest `J ≥ 1` whose truncation bound is below [`TRUNCATION_TOLERANCE`].
pub fn default_truncation(spec: &DigitCantorSpec, xi: f64) -> u32 {
    let mut j = 1;
    while truncation_bound(spec, xi, j) >= TRUNCATION_TOLERANCE {
        j += 1;
    }
    j
}

/// `∏_{j=1..J} (1/|S|) Σ_{s∈S} e^{−2πi s n^{−j} ξ}`, the transform of the
/// uniform digit measure truncated after `J` digits.
pub fn cantor_transform(spec: &DigitCantorSpec, xi: f64, truncation: u32) -> Result<Complex64> {
    if truncation == 0 {
        return Err(invalid("J", "truncation must be at least 1"));
    }
    let n = spec.base() as f64;
    let mut x = xi;
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..truncation {
        // repeated division keeps ξ·n^{−j} exact while it is an integer
        x /= n;
        acc *= digit_factor(spec, x);
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveWeighting {
    /// `dt` on the parameter domain, normalized.
    #[default]
    Parameter,
    /// Arclength, normalized.
    Arclength,
}

/// Nodes used when none are requested: ten per oscillation, at least 1000.
pub fn default_points(curve: &ParametricCurve, xi_norm: f64) -> usize {
    let len = curve.domain[1] - curve.domain[0];
    let waves = xi_norm * curve.lipschitz_sup().max(1.0) * len.max(1.0);
    (NODES_PER_WAVE * waves).ceil().max(MIN_QUADRATURE_POINTS as f64) as usize
}

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Midpoint-rule transform of the normalized parameter or arclength measure
/// on `γ`.
pub fn curve_transform(curve: &ParametricCurve, xi: &[f64], points: usize, weighting: CurveWeighting) -> Result<Complex64> {
    if xi.len() != curve.dim() {
        return Err(Error::Mismatch(format!("ξ has {} coordinates, curve lives in R^{}", xi.len(), curve.dim())));
    }
    if points < MIN_QUADRATURE_POINTS {
        return Err(invalid("M", format!("need at least {MIN_QUADRATURE_POINTS} quadrature points")));
    }
    let xi_norm = norm(xi);
    if xi_norm > points as f64 / NODES_PER_WAVE {
        return Err(Error::BudgetExceeded(format!(
            "|ξ| = {xi_norm} exceeds the quadrature limit M/10 = {}",
            points as f64 / NODES_PER_WAVE
        )));
    }
    let phase = curve.phase(xi);
    let speed = curve.velocity();
    let [lo, hi] = curve.domain;
    let h = (hi - lo) / points as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut mass = 0.0;
    let mut v = vec![0.0; curve.dim()];
    for m in 0..points {
        let t = lo + (m as f64 + 0.5) * h;
        let w = match weighting {
            CurveWeighting::Parameter => 1.0,
            CurveWeighting::Arclength => {
                speed.eval_into(t, &mut v);
                norm(&v)
            }
        };
        sum += unit_phase(phase.eval(t)) * w;
        mass += w;
    }
    if mass <= 0.0 {
        return Err(Error::Construction("curve has zero length".into()));
    }
    Ok(sum / mass)
}

/// A probability measure with an on-demand transform evaluator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureTransform {
    DigitCantor {
        spec: DigitCantorSpec,
        /// Digits kept; chosen per `ξ` by [`default_truncation`] when absent.
        #[serde(default)]
        truncation: Option<u32>,
    },
    CurveQuadrature {
        curve: ParametricCurve,
        /// Nodes; chosen per `ξ` by [`default_points`] when absent.
        #[serde(default)]
        points: Option<usize>,
        #[serde(default)]
        weighting: CurveWeighting,
    },
    PointMass {
        dim: usize,
    },
    UniformInterval,
}

impl MeasureTransform {
    pub fn cantor(spec: DigitCantorSpec) -> Self {
        Self::DigitCantor { spec, truncation: None }
    }

    pub fn curve(curve: ParametricCurve, weighting: CurveWeighting) -> Self {
        Self::CurveQuadrature {
            curve,
            points: None,
            weighting,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::DigitCantor { .. } | Self::UniformInterval => 1,
            Self::CurveQuadrature { curve, .. } => curve.dim(),
            Self::PointMass { dim } => *dim,
        }
    }

    pub fn eval(&self, xi: &[f64]) -> Result<Complex64> {
        if xi.len() != self.dim() {
            return Err(Error::Mismatch(format!("ξ has {} coordinates, measure lives in R^{}", xi.len(), self.dim())));
        }
        match self {
            Self::DigitCantor { spec, truncation } => {
                let j = truncation.unwrap_or_else(|| default_truncation(spec, xi[0]));
                cantor_transform(spec, xi[0], j)
            }
            Self::CurveQuadrature {
                curve,
                points,
                weighting,
            } => {
                let m = points.unwrap_or_else(|| default_points(curve, norm(xi)));
                curve_transform(curve, xi, m, *weighting)
            }
            Self::PointMass { .. } => Ok(Complex64::new(1.0, 0.0)),
            Self::UniformInterval => Ok(uniform_interval_transform(xi[0])),
        }
    }
}

/// `e^{−πiξ}·sin(πξ)/(πξ)`, the transform of Lebesgue measure on `[0, 1)`.
pub fn uniform_interval_transform(xi: f64) -> Complex64 {
    if xi == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    unit_phase(xi / 2.0) * ((PI * xi).sin() / (PI * xi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Directions {
    /// `count` directions: `±1` in R, evenly spaced on a half circle in R²,
    /// a Fibonacci lattice on the upper hemisphere in R³.
    Spread { count: usize },
    Explicit { vectors: Vec<Vec<f64>> },
}

impl Directions {
    pub fn default_for(dim: usize) -> Self {
        Self::Spread {
            count: if dim >= 3 { 128 } else { 32 },
        }
    }

    /// Unit vectors in `R^dim`.
    pub fn vectors(&self, dim: usize) -> Result<Vec<Vec<f64>>> {
        match self {
            Self::Explicit { vectors } => vectors
                .iter()
                .map(|v| {
                    let n = norm(v);
                    if v.len() != dim || n == 0.0 {
                        Err(invalid("directions", format!("direction {v:?} is not a nonzero vector in R^{dim}")))
                    } else {
                        Ok(v.iter().map(|x| x / n).collect())
                    }
                })
                .collect(),
            Self::Spread { count } => {
                let count = (*count).max(1);
                match dim {
                    1 => Ok(vec![vec![1.0]]),
                    2 => Ok((0..count)
                        .map(|i| {
                            let (s, c) = (PI * i as f64 / count as f64).sin_cos();
                            vec![c, s]
                        })
                        .collect()),
                    3 => {
                        let golden = PI * (3.0 - 5f64.sqrt());
                        Ok((0..count)
                            .map(|i| {
                                let z = 1.0 - (i as f64 + 0.5) / count as f64;
                                let rho = (1.0 - z * z).sqrt();
                                let (s, c) = (golden * i as f64).sin_cos();
                                vec![rho * c, rho * s, z]
                            })
                            .collect())
                    }
                    _ => Err(invalid("directions", format!("no default directions in R^{dim}; pass them explicitly"))),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Radii {
    /// `per_octave` log-uniform radii in each `[2^m, 2^{m+1}]`.
    Octaves { m0: i32, m1: i32, per_octave: usize, seed: u64 },
    /// One group per listed radius, numbered by position.
    Explicit { radii: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OctaveSup {
    /// `m` for octave `[2^m, 2^{m+1}]`, or the index of an explicit radius.
    pub octave: i32,
    /// Abscissa of the fit: `2^{m+1/2}`, or the explicit radius.
    pub radius: f64,
    pub sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub octaves: Vec<OctaveSup>,
    /// Least-squares slope of `−ln sup` against `ln radius`; the exponent of
    /// `|μ̂|`, not of `|μ̂|²`.
    pub exponent: f64,
    pub intercept: f64,
    pub r2: f64,
}

impl DecayFit {
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "octave,radius,sup")?;
        for o in &self.octaves {
            writeln!(out, "{},{:e},{:e}", o.octave, o.radius, o.sup)?;
        }
        Ok(())
    }
}

/// Per-group sup of `|μ̂(ρθ)|` over sampled radii `ρ` and directions `θ`,
/// and the fitted decay exponent.
pub fn decay_fit(mt: &MeasureTransform, radii: &Radii, directions: &Directions) -> Result<DecayFit> {
    let dirs = directions.vectors(mt.dim())?;
    let groups: Vec<(i32, f64, Vec<f64>)> = match radii {
        Radii::Octaves {
            m0,
            m1,
            per_octave,
            seed,
        } => {
            if !(*m1 > *m0 && *m0 >= 2) {
                return Err(invalid("octaves", format!("need m1 > m0 ≥ 2, got {m0}..{m1}")));
            }
            if *per_octave == 0 {
                return Err(invalid("per_octave", "need at least one radius per octave"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (*m0..=*m1)
                .map(|m| {
                    let rs = (0..*per_octave).map(|_| 2f64.powf(m as f64 + rng.gen::<f64>())).collect();
                    (m, 2f64.powf(m as f64 + 0.5), rs)
                })
                .collect()
        }
        Radii::Explicit { radii } => {
            if radii.len() < 2 || radii.iter().any(|&r| !(r > 0.0)) {
                return Err(invalid("radii", "need at least two positive radii"));
            }
            radii.iter().enumerate().map(|(i, &r)| (i as i32, r, vec![r])).collect()
        }
    };
    let nd = dirs.len();
    let jobs: Vec<(usize, f64, usize)> = groups
        .iter()
        .enumerate()
        .flat_map(|(g, (_, _, rs))| rs.iter().flat_map(move |&r| (0..nd).map(move |k| (g, r, k))))
        .collect();
    let values: Vec<(usize, f64)> = jobs
        .par_iter()
        .map(|&(g, r, k)| {
            let xi: Vec<f64> = dirs[k].iter().map(|v| v * r).collect();
            mt.eval(&xi).map(|z| (g, z.norm()))
        })
        .collect::<Result<_>>()?;
    let mut sups = vec![0.0f64; groups.len()];
    for (g, v) in values {
        sups[g] = sups[g].max(v);
    }
    let octaves: Vec<OctaveSup> = groups
        .iter()
        .zip(&sups)
        .map(|((m, r, _), &sup)| OctaveSup {
            octave: *m,
            radius: *r,
            sup,
        })
        .collect();
    if let Some(o) = octaves.iter().find(|o| o.sup <= 0.0) {
        return Err(Error::Fit(format!("transform vanishes on group {}", o.octave)));
    }
    let xs: Vec<f64> = octaves.iter().map(|o| o.radius.ln()).collect();
    let ys: Vec<f64> = octaves.iter().map(|o| -o.sup.ln()).collect();
    let (exponent, intercept, r2) = least_squares(&xs, &ys)?;
    Ok(DecayFit {
        octaves,
        exponent,
        intercept,
        r2,
    })
}

pub const MAX_ENERGY_POINTS: u64 = 1 << 24;

fn check_energy(mt: &MeasureTransform, r: f64, lambda: f64) -> Result<u64> {
    let d = mt.dim();
    if !(r > 0.0 && r < d as f64) {
        return Err(invalid("r", format!("need 0 < r < {d}, got {r}")));
    }
    if !(lambda >= 1.0) {
        return Err(invalid("Λ", format!("need Λ ≥ 1, got {lambda}")));
    }
    let side = 2 * lambda.floor() as u64 + 1;
    let points = side.checked_pow(d as u32).unwrap_or(u64::MAX);
    if points > MAX_ENERGY_POINTS {
        return Err(Error::BudgetExceeded(format!("{points} lattice points exceed {MAX_ENERGY_POINTS}")));
    }
    Ok(lambda.floor() as u64)
}

/// Lattice points `ξ ≠ 0` with `|ξ| ≤ Λ`, one of each pair `±ξ`.
fn half_lattice(d: usize, reach: i64, lambda: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut cur = vec![-reach; d];
    loop {
        // first nonzero coordinate positive picks one point of each pair
        if let Some(first) = cur.iter().find(|&&v| v != 0) {
            let n2: i64 = cur.iter().map(|v| v * v).sum();
            if *first > 0 && (n2 as f64) <= lambda * lambda {
                out.push(cur.iter().map(|&v| v as f64).collect());
            }
        }
        let mut i = 0;
        loop {
            if i == d {
                return out;
            }
            if cur[i] < reach {
                cur[i] += 1;
                break;
            }
            cur[i] = -reach;
            i += 1;
        }
    }
}

/// `Σ_{ξ∈Z^d, 0<|ξ|≤Λ} |ξ|^{r−d}|μ̂(ξ)|²`.
pub fn energy_partial_sum(mt: &MeasureTransform, r: f64, lambda: f64) -> Result<f64> {
    let reach = check_energy(mt, r, lambda)? as i64;
    let d = mt.dim();
    let terms: Vec<f64> = half_lattice(d, reach, lambda)
        .par_iter()
        .map(|xi| mt.eval(xi).map(|z| norm(xi).powf(r - d as f64) * z.norm_sqr()))
        .collect::<Result<_>>()?;
    // Hermitian symmetry: ξ and −ξ contribute equally
    Ok(2.0 * terms.iter().sum::<f64>())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyGrowth {
    pub r: f64,
    /// `(Λ, partial sum)`.
    pub sums: Vec<(f64, f64)>,
    /// Slope of `ln S(Λ)` against `ln Λ`; 0 for a convergent series in the
    /// limit, `r` for a point mass.
    pub growth_exponent: f64,
    pub r2: f64,
    /// Slope of `ln(S(Λ_{i+1}) − S(Λ_i))` against `ln Λ_{i+1}`. For geometric
    /// cutoffs this is negative exactly when the series converges, while
    /// `growth_exponent` only tends to 0 as slowly as the tail decays.
    /// `None` with fewer than two positive increments.
    pub increment_exponent: Option<f64>,
}

/// Partial sums at each `Λ` and their log-log growth exponent.
pub fn energy_growth(mt: &MeasureTransform, r: f64, lambdas: &[f64]) -> Result<EnergyGrowth> {
    if lambdas.len() < 2 {
        return Err(invalid("Λ", "need at least two cutoffs"));
    }
    let top = lambdas.iter().cloned().fold(f64::NAN, f64::max);
    let reach = check_energy(mt, r, top)? as i64;
    for &l in lambdas {
        check_energy(mt, r, l)?;
    }
    let d = mt.dim();
    // one pass over the largest ball, binned by the smallest cutoff reached
    let mut sorted: Vec<f64> = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let terms: Vec<(f64, f64)> = half_lattice(d, reach, top)
        .par_iter()
        .map(|xi| {
            let n = norm(xi);
            mt.eval(xi).map(|z| (n, n.powf(r - d as f64) * z.norm_sqr()))
        })
        .collect::<Result<_>>()?;
    let mut bins = vec![0.0; sorted.len()];
    for (n, t) in terms {
        let idx = sorted.partition_point(|&l| l < n);
        bins[idx] += 2.0 * t;
    }
    let mut acc = 0.0;
    let sums: Vec<(f64, f64)> = sorted
        .iter()
        .zip(bins)
        .map(|(&l, b)| {
            acc += b;
            (l, acc)
        })
        .collect();
    if sums.iter().any(|&(_, s)| s <= 0.0) {
        return Err(Error::Fit("partial sums vanish; no growth exponent".into()));
    }
    let xs: Vec<f64> = sums.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = sums.iter().map(|s| s.1.ln()).collect();
    let (growth_exponent, _, r2) = least_squares(&xs, &ys)?;
    let (ix, iy): (Vec<f64>, Vec<f64>) = sums
        .windows(2)
        .filter(|w| w[1].1 > w[0].1)
        .map(|w| (w[1].0.ln(), (w[1].1 - w[0].1).ln()))
        .unzip();
    let increment_exponent = if ix.len() >= 2 { least_squares(&ix, &iy).ok().map(|f| f.0) } else { None };
    Ok(EnergyGrowth {
        r,
        sums,
        growth_exponent,
        r2,
        increment_exponent,
    })
}
