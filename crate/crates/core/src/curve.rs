//! Polynomial curves `t ↦ (p_1(t), …, p_d(t))` on a compact parameter interval.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// `Σ c_j t^j`, coefficients in increasing degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn monomial(degree: usize) -> Self {
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[degree] = 1.0;
        Self { coeffs }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Polynomial {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, &c)| j as f64 * c)
            .collect();
        Polynomial { coeffs }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().skip(1).all(|&c| c == 0.0)
    }

    /// Bound on `|p|` over `[lo, hi]`.
    pub fn sup_bound(&self, lo: f64, hi: f64) -> f64 {
        let r = lo.abs().max(hi.abs());
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c.abs() * r.powi(j as i32))
            .sum()
    }

    /// Points in `(lo, hi)` where `p'` changes sign, located by scanning
    /// `scan` subintervals and bisecting.
    pub fn turning_points(&self, lo: f64, hi: f64, scan: usize) -> Vec<f64> {
        let dp = self.derivative();
        if dp.is_constant() {
            return Vec::new();
        }
        let h = (hi - lo) / scan as f64;
        let mut out = Vec::new();
        let mut a = lo;
        let mut fa = dp.eval(a);
        for i in 1..=scan {
            let b = if i == scan { hi } else { lo + i as f64 * h };
            let fb = dp.eval(b);
            if fa == 0.0 && a > lo {
                out.push(a);
            } else if fa * fb < 0.0 {
                let (mut x0, mut x1, mut f0) = (a, b, fa);
                for _ in 0..80 {
                    let mid = 0.5 * (x0 + x1);
                    let fm = dp.eval(mid);
                    if (fm < 0.0) == (f0 < 0.0) {
                        x0 = mid;
                        f0 = fm;
                    } else {
                        x1 = mid;
                    }
                }
                out.push(0.5 * (x0 + x1));
            }
            a = b;
            fa = fb;
        }
        out
    }

    /// Exact range of `p` over `[lo, hi]`, using the turning points of `p`.
    pub fn range_on(&self, lo: f64, hi: f64, turning: &[f64]) -> (f64, f64) {
        let (mut min, mut max) = {
            let (a, b) = (self.eval(lo), self.eval(hi));
            (a.min(b), a.max(b))
        };
        for &t in turning.iter().filter(|&&t| t > lo && t < hi) {
            let v = self.eval(t);
            min = min.min(v);
            max = max.max(v);
        }
        (min, max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametricCurve {
    pub coords: Vec<Polynomial>,
    pub domain: [f64; 2],
}

impl ParametricCurve {
    pub fn new(coords: Vec<Polynomial>, domain: [f64; 2]) -> Result<Self> {
        let curve = Self { coords, domain };
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<()> {
        if self.coords.is_empty() {
            return Err(invalid("coords", "curve needs at least one coordinate"));
        }
        let [lo, hi] = self.domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid("domain", format!("need finite lo < hi, got [{lo}, {hi}]")));
        }
        if self.coords.iter().flat_map(|p| &p.coeffs).any(|c| !c.is_finite()) {
            return Err(invalid("coords", "coefficients must be finite"));
        }
        Ok(())
    }

    /// `(t, t²)` on `[0, 1]`.
    pub fn parabola() -> Self {
        Self::moment(2)
    }

    /// `(t, t², …, t^d)` on `[0, 1]`.
    pub fn moment(dim: usize) -> Self {
        Self {
            coords: (1..=dim).map(Polynomial::monomial).collect(),
            domain: [0.0, 1.0],
        }
    }

    /// `t ↦ t·e_1` in `R^dim`, on `[0, 1]`.
    pub fn segment(dim: usize) -> Self {
        let mut coords = vec![Polynomial::new(vec![0.0]); dim];
        coords[0] = Polynomial::monomial(1);
        Self {
            coords,
            domain: [0.0, 1.0],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(&self.coords) {
            *o = p.eval(t);
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(t, &mut out);
        out
    }

    pub fn velocity(&self) -> ParametricCurve {
        ParametricCurve {
            coords: self.coords.iter().map(Polynomial::derivative).collect(),
            domain: self.domain,
        }
    }

    /// Bound on `max_i |γ_i'(t)|` over the domain.
    pub fn lipschitz_sup(&self) -> f64 {
        let [lo, hi] = self.domain;
        self.coords
            .iter()
            .map(|p| p.derivative().sup_bound(lo, hi))
            .fold(0.0, f64::max)
    }

    /// The scalar polynomial `⟨ξ, γ(t)⟩`.
    pub fn phase(&self, xi: &[f64]) -> Polynomial {
        let degree = self.coords.iter().map(|p| p.coeffs.len()).max().unwrap_or(0);
        let mut coeffs = vec![0.0; degree];
        for (p, &x) in self.coords.iter().zip(xi) {
            for (c, &a) in coeffs.iter_mut().zip(&p.coeffs) {
                *c += x * a;
            }
        }
        Polynomial { coeffs }
    }

    pub fn is_constant(&self) -> bool {
        self.coords.iter().all(Polynomial::is_constant)
    }
}
