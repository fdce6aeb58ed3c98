//! Closed-form lower bounds for `dim(E + K)` and a tabulator that lists
//! every bound applicable to a scenario.
//!
//! `α` is the dimension of `K`, `β` that of `E`, `d` the ambient dimension.
//! Raw evaluators are uncapped; [`tabulate`] clamps to `[trivial, d]`.

pub use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::digits::DigitCantorSpec;
use crate::error::{invalid, Error, Result};
use crate::group::{best_gamma, Dedup, SearchMode, MAX_EXHAUSTIVE_BITS};

const EPS: f64 = 1e-12;

pub fn trivial_bound(alpha: f64, beta: f64) -> f64 {
    alpha.max(beta)
}

/// Minkowski bound for a plane curve that is not a line segment.
pub fn minkowski_curve_bound(beta: f64) -> f64 {
    1.0 + beta / 2.0
}

pub fn minkowski_general_bound(alpha: f64, beta: f64, d: f64) -> f64 {
    alpha + beta - alpha * beta / d
}

/// Minkowski bound from a mass-growth exponent `γ`: with `α = d(1−γ)` this
/// is `α + β − αβ/d = d(1−γ) + γβ`.
pub fn growth_to_dimension(gamma: f64, beta: f64, d: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(invalid("gamma", format!("growth exponent must lie in (0, 1], got {gamma}")));
    }
    Ok(d * (1.0 - gamma) + gamma * beta)
}

pub fn salem_bound(alpha: f64, beta: f64, d: f64) -> f64 {
    (alpha + beta).min(d)
}

/// Hausdorff bound for `K` carrying a measure with `|λ̂(ξ)|² ≲ |ξ|^{−s}`.
pub fn fourier_decay_bound(s: f64, beta: f64, d: f64) -> Result<f64> {
    if !(0.0..=d).contains(&s) {
        return Err(invalid("s", format!("decay exponent must lie in [0, {d}], got {s}")));
    }
    Ok((beta + s).min(d))
}

/// `(1/p, 1/q)`, so that `p = ∞` is representable as `0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub inv_p: f64,
    pub inv_q: f64,
}

impl Exponents {
    pub fn from_pq(p: f64, q: f64) -> Self {
        Self {
            inv_p: 1.0 / p,
            inv_q: 1.0 / q,
        }
    }
}

/// The third vertex `(d/(2d−α), (d−α)/(2d−α))` of the triangle `Δ(α, d)`.
pub fn triangle_vertex(alpha: f64, d: f64) -> Exponents {
    Exponents {
        inv_p: d / (2.0 * d - alpha),
        inv_q: (d - alpha) / (2.0 * d - alpha),
    }
}

fn check_pq(p: f64, q: f64) -> Result<()> {
    if !(p > 1.0 && p < q && q.is_finite()) {
        return Err(invalid("p", format!("need 1 < p < q < ∞, got p = {p}, q = {q}")));
    }
    Ok(())
}

/// `q′·(d/p − d/q + β/p′)` for an `L^p → L^q` convolution estimate.
pub fn convolution_bound(p: f64, q: f64, d: f64, beta: f64) -> Result<f64> {
    check_pq(p, q)?;
    Ok(convolution_bound_inv(Exponents::from_pq(p, q), d, beta))
}

/// [`convolution_bound`] in terms of `(1/p, 1/q)`, valid up to the boundary.
pub fn convolution_bound_inv(e: Exponents, d: f64, beta: f64) -> f64 {
    let (a, b) = (e.inv_p, e.inv_q);
    (d * (a - b) + beta * (1.0 - a)) / (1.0 - b)
}

/// [`convolution_bound`] in exact rational arithmetic.
pub fn convolution_bound_exact(p: Rational64, q: Rational64, d: i64, beta: Rational64) -> Result<Rational64> {
    let one = Rational64::from_integer(1);
    if !(p > one && p < q) {
        return Err(invalid("p", format!("need 1 < p < q < ∞, got p = {p}, q = {q}")));
    }
    let conj = |x: Rational64| x / (x - one);
    let d = Rational64::from_integer(d);
    Ok(conj(q) * (d / p - d / q + beta / conj(p)))
}

/// Whether `(1/p, 1/q)` lies in the closed triangle with vertices `(0,0)`,
/// `(1,1)` and [`triangle_vertex`]. Only this necessary condition is tested.
pub fn triangle_membership(e: Exponents, alpha: f64, d: f64) -> bool {
    let v = triangle_vertex(alpha, d);
    let (a, b) = (e.inv_p, e.inv_q);
    let gap = v.inv_p - v.inv_q;
    if gap.abs() < EPS {
        // degenerate triangle: the diagonal segment
        return (a - b).abs() <= 1e-9 && (-1e-9..=1.0 + 1e-9).contains(&a);
    }
    // P = s·(1,1) + t·V
    let t = (a - b) / gap;
    let s = a - t * v.inv_p;
    let tol = 1e-9;
    s >= -tol && t >= -tol && s + t <= 1.0 + tol
}

/// Barycentric weights `(s, t)` of `(1/p, 1/q)` on the vertices `(1,1)` and
/// [`triangle_vertex`].
pub fn triangle_coordinates(e: Exponents, alpha: f64, d: f64) -> (f64, f64) {
    let v = triangle_vertex(alpha, d);
    let t = (e.inv_p - e.inv_q) / (v.inv_p - v.inv_q);
    (e.inv_p - t * v.inv_p, t)
}

/// `q′/p′`, the exponent in `m(F)^{q′/p′} ≲ m(F + K)`.
pub fn mass_growth_exponent(p: f64, q: f64) -> Result<f64> {
    if !(p > 1.0 && p <= q && q.is_finite()) {
        return Err(invalid("p", format!("need 1 < p ≤ q < ∞, got p = {p}, q = {q}")));
    }
    Ok(mass_growth_exponent_inv(Exponents::from_pq(p, q)))
}

pub fn mass_growth_exponent_inv(e: Exponents) -> f64 {
    (1.0 - e.inv_p) / (1.0 - e.inv_q)
}

/// Hausdorff bound `min(β + 1, 3)` for a finite-type curve in `R^3`, valid
/// for `0 < β ≤ 2`.
pub fn finite_type_r3_bound(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(Error::HypothesisViolated(format!(
            "finite-type curve bound needs 0 < β ≤ 2, got β = {beta}"
        )));
    }
    Ok((beta + 1.0).min(3.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentCurveBounds {
    /// From Fourier decay `|ξ|^{−1/d}` of the parameter measure.
    pub fourier_decay: f64,
    /// `(1 − 1/d)β + 1`, from the convolution estimate for the curve.
    pub convolution: f64,
    /// `β + 1` by projecting to three coordinates, for `β ≤ 2`.
    pub projection: Option<f64>,
}

pub fn moment_curve_bounds(d: u32, beta: f64) -> Result<MomentCurveBounds> {
    if d < 3 {
        return Err(invalid("d", format!("moment curve bounds need d ≥ 3, got {d}")));
    }
    let df = d as f64;
    Ok(MomentCurveBounds {
        fourier_decay: (beta + 2.0 / df).min(df),
        convolution: ((1.0 - 1.0 / df) * beta + 1.0).min(df),
        projection: (beta <= 2.0).then_some(beta + 1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimFlavor {
    Minkowski,
    Hausdorff,
    /// Valid for both notions (the trivial bound).
    Both,
}

impl DimFlavor {
    fn counts_as(self, target: DimFlavor) -> bool {
        self == target || self == DimFlavor::Both
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KKind {
    DigitCantor { n: u32, digits: Vec<u32> },
    NondegenerateCurve2d,
    NondegenerateKSurface { k: u32 },
    Salem { alpha: f64 },
    FourierDecay { s: f64 },
    FiniteTypeCurveR3,
    MomentCurve,
    Convolution { p: f64, q: f64 },
    Generic { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub d: u32,
    pub k: KKind,
    pub beta: f64,
    /// Dimension of `K` where `k` does not determine it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEntry {
    pub name: &'static str,
    pub value: f64,
    pub raw_value: f64,
    pub flavor: DimFlavor,
    pub citation: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedBound {
    pub name: &'static str,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub scenario: Scenario,
    pub alpha: f64,
    pub entries: Vec<BoundEntry>,
    pub skipped: Vec<SkippedBound>,
    pub best_minkowski: f64,
    pub best_hausdorff: f64,
}

impl BoundReport {
    pub fn entry(&self, name: &str) -> Option<&BoundEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

pub mod cite {
    pub const TRIVIAL: &str = "trivial bound dim(E+K) ≥ max(dim E, dim K)";
    pub const CURVE: &str = "Minkowski bound 1 + dim E/2 for plane curves other than segments";
    pub const GENERAL: &str = "Minkowski bound α + β − αβ/d from mass growth with exponent 1 − α/d";
    pub const GROWTH: &str = "Minkowski bound d(1−γ) + γβ from a certified cyclic-group growth exponent γ";
    pub const CANTOR_CONVOLUTION: &str = "Hausdorff bound (1 + β)/2 from the L^{3/2} → L^3 convolution estimate for the Cantor–Lebesgue measure";
    pub const SALEM: &str = "Hausdorff bound min(α + β, d) for Salem K";
    pub const DECAY: &str = "Hausdorff bound min(β + s, d) for K carrying a measure with |λ̂(ξ)|² ≲ |ξ|^{−s}";
    pub const CONVOLUTION: &str = "Hausdorff bound q′(d/p − d/q + β/p′) from an L^p → L^q convolution estimate";
    pub const CONVOLUTION_GROWTH: &str = "Minkowski bound from mass growth with exponent q′/p′ implied by an L^p → L^q convolution estimate";
    pub const FINITE_TYPE: &str = "Hausdorff bound min(β + 1, 3) for finite-type curves in R^3, 0 < β ≤ 2";
    pub const MOMENT_DECAY: &str = "Hausdorff bound min(β + 2/d, d) from Fourier decay of the moment curve";
    pub const MOMENT_CONVOLUTION: &str = "Hausdorff bound (1 − 1/d)β + 1 from the convolution estimate for the moment curve";
    pub const MOMENT_PROJECTION: &str = "Hausdorff bound β + 1 for the moment curve by projection onto three coordinates, β ≤ 2";
    pub const SURFACE: &str = "Minkowski bound k + β − kβ/d for nondegenerate k-surfaces";
    pub const GAMMA: &str = "optimal growth exponent γ* = max over E of log m̃(E+S) / log m̃(E) in the cyclic group";
    pub const MASS_GROWTH: &str = "discrete mass growth m̃(E+S) ≥ m̃(E)^γ for the lifted digit set";
    pub const BOX_COUNTING: &str = "least-squares box-counting slope of the exact cell cover of E + K";
    pub const TRANSPORT: &str = "unimodular transport of the slab measures through Ψ onto Lebesgue measure";
    pub const PUSHFORWARD: &str = "Monte Carlo pushforward ∫ f(Ψ) dλ_1…dλ_d ≤ ∫ f dm_{dk}";
    pub const NONDEGENERACY: &str = "nondegeneracy m_{dk}(Ψ(K^d)) > 0, estimated by occupied grid cells";
    pub const SLAB_FUNCTIONAL: &str = "∫ ∏_j λ_j(E − y) dy ≲ m(E)^{d/(d−k)}";
    pub const FOURIER_DECAY: &str = "per-octave sup of |μ̂| fitted against |ξ|";
    pub const ENERGY: &str = "lattice partial sums of ∫ |ξ|^{r−d} |μ̂(ξ)|² dξ";
}

/// Evaluates every bound that applies to the scenario.
pub fn tabulate(sc: &Scenario) -> Result<BoundReport> {
    if sc.d == 0 {
        return Err(invalid("d", "ambient dimension must be ≥ 1"));
    }
    let d = sc.d as f64;
    let beta = sc.beta;
    if !(0.0..=d).contains(&beta) {
        return Err(invalid("beta", format!("dim E must lie in [0, {d}], got {beta}")));
    }
    let alpha = scenario_alpha(sc)?;
    if !(0.0..=d).contains(&alpha) {
        return Err(invalid("alpha", format!("dim K must lie in [0, {d}], got {alpha}")));
    }
    let trivial = trivial_bound(alpha, beta);
    let mut raw: Vec<(&'static str, f64, DimFlavor, &'static str)> =
        vec![("trivial", trivial, DimFlavor::Both, cite::TRIVIAL)];
    let mut skipped = Vec::new();

    match &sc.k {
        KKind::DigitCantor { n, digits } => {
            let spec = DigitCantorSpec::new(*n, digits.iter().copied())?;
            if sc.d != 1 {
                return Err(invalid("d", "digit Cantor scenarios live on the line"));
            }
            if *n as u64 <= MAX_EXHAUSTIVE_BITS as u64 {
                let s: Vec<u64> = spec.digits().iter().map(|&x| x as u64).collect();
                let cert = best_gamma(*n as u64, &s, SearchMode::Exhaustive(Dedup::Translation))?;
                if cert.unconstrained {
                    skipped.push(SkippedBound {
                        name: "cyclic_growth",
                        reason: "every sumset in Z_n is full".into(),
                    });
                } else {
                    match growth_to_dimension(cert.gamma_star, beta, d) {
                        Ok(v) => raw.push(("cyclic_growth", v, DimFlavor::Minkowski, cite::GROWTH)),
                        Err(e) => skipped.push(SkippedBound {
                            name: "cyclic_growth",
                            reason: e.to_string(),
                        }),
                    }
                }
            } else {
                skipped.push(SkippedBound {
                    name: "cyclic_growth",
                    reason: format!("n = {n} exceeds the exhaustive budget"),
                });
            }
            if spec == DigitCantorSpec::middle_thirds() {
                let v = convolution_bound(1.5, 3.0, d, beta)?;
                raw.push(("cantor_convolution", v, DimFlavor::Hausdorff, cite::CANTOR_CONVOLUTION));
            }
        }
        KKind::NondegenerateCurve2d => {
            if sc.d != 2 {
                return Err(invalid("d", "plane curve scenarios need d = 2"));
            }
            raw.push(("minkowski_curve", minkowski_curve_bound(beta), DimFlavor::Minkowski, cite::CURVE));
        }
        KKind::NondegenerateKSurface { k } => {
            if *k == 0 || *k >= sc.d {
                return Err(invalid("k", format!("need 1 ≤ k < d, got k = {k}")));
            }
            let v = minkowski_general_bound(*k as f64, beta, d);
            raw.push(("minkowski_surface", v, DimFlavor::Minkowski, cite::SURFACE));
        }
        KKind::Salem { .. } => {
            raw.push(("salem", salem_bound(alpha, beta, d), DimFlavor::Hausdorff, cite::SALEM));
        }
        KKind::FourierDecay { s } => {
            raw.push(("fourier_decay", fourier_decay_bound(*s, beta, d)?, DimFlavor::Hausdorff, cite::DECAY));
        }
        KKind::FiniteTypeCurveR3 => {
            if sc.d != 3 {
                return Err(invalid("d", "finite-type curve scenarios need d = 3"));
            }
            match finite_type_r3_bound(beta) {
                Ok(v) => raw.push(("finite_type_r3", v, DimFlavor::Hausdorff, cite::FINITE_TYPE)),
                Err(Error::HypothesisViolated(reason)) => skipped.push(SkippedBound {
                    name: "finite_type_r3",
                    reason,
                }),
                Err(e) => return Err(e),
            }
        }
        KKind::MomentCurve => {
            let m = moment_curve_bounds(sc.d, beta)?;
            raw.push(("moment_fourier_decay", m.fourier_decay, DimFlavor::Hausdorff, cite::MOMENT_DECAY));
            raw.push(("moment_convolution", m.convolution, DimFlavor::Hausdorff, cite::MOMENT_CONVOLUTION));
            match m.projection {
                Some(v) => raw.push(("moment_projection", v, DimFlavor::Hausdorff, cite::MOMENT_PROJECTION)),
                None => skipped.push(SkippedBound {
                    name: "moment_projection",
                    reason: format!("projection bound needs β ≤ 2, got β = {beta}"),
                }),
            }
        }
        KKind::Convolution { p, q } => {
            let e = Exponents::from_pq(*p, *q);
            if !triangle_membership(e, alpha, d) {
                return Err(invalid(
                    "p",
                    format!("(1/p, 1/q) = ({:.6}, {:.6}) lies outside the triangle Δ(α, d)", e.inv_p, e.inv_q),
                ));
            }
            raw.push(("convolution", convolution_bound(*p, *q, d, beta)?, DimFlavor::Hausdorff, cite::CONVOLUTION));
            let gamma = mass_growth_exponent(*p, *q)?;
            match growth_to_dimension(gamma, beta, d) {
                Ok(v) => raw.push(("convolution_growth", v, DimFlavor::Minkowski, cite::CONVOLUTION_GROWTH)),
                Err(e) => skipped.push(SkippedBound {
                    name: "convolution_growth",
                    reason: e.to_string(),
                }),
            }
        }
        KKind::Generic { .. } => {}
    }

    let entries: Vec<BoundEntry> = raw
        .into_iter()
        .map(|(name, raw_value, flavor, citation)| BoundEntry {
            name,
            value: raw_value.min(d).max(trivial),
            raw_value,
            flavor,
            citation,
        })
        .collect();
    let best = |flavor: DimFlavor| {
        entries
            .iter()
            .filter(|e| e.flavor.counts_as(flavor))
            .map(|e| e.value)
            .fold(trivial, f64::max)
    };
    Ok(BoundReport {
        scenario: sc.clone(),
        alpha,
        best_minkowski: best(DimFlavor::Minkowski),
        best_hausdorff: best(DimFlavor::Hausdorff),
        entries,
        skipped,
    })
}

fn scenario_alpha(sc: &Scenario) -> Result<f64> {
    let given = |what: &str| {
        sc.alpha
            .ok_or_else(|| invalid("alpha", format!("{what} scenarios need alpha = dim K")))
    };
    let fixed = |value: f64| match sc.alpha {
        Some(a) if (a - value).abs() > 1e-9 => Err(invalid(
            "alpha",
            format!("alpha = {a} contradicts dim K = {value} for this kind of K"),
        )),
        _ => Ok(value),
    };
    match &sc.k {
        KKind::DigitCantor { n, digits } => {
            fixed(DigitCantorSpec::new(*n, digits.iter().copied())?.dimension())
        }
        KKind::NondegenerateCurve2d | KKind::FiniteTypeCurveR3 | KKind::MomentCurve => fixed(1.0),
        KKind::NondegenerateKSurface { k } => fixed(*k as f64),
        KKind::Salem { alpha } | KKind::Generic { alpha } => fixed(*alpha),
        KKind::FourierDecay { .. } | KKind::Convolution { .. } => given("this"),
    }
}
