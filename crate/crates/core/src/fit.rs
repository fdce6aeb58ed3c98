//! Least-squares slopes of log-log box counts.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub base: u32,
    pub pairs: Vec<(u32, u64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Summary written next to the `level,count` table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

impl LogLogFit {
    pub fn summary(&self) -> FitSummary {
        FitSummary {
            slope: self.slope,
            intercept: self.intercept,
            r2: self.r2,
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "level,count")?;
        for (level, count) in &self.pairs {
            writeln!(out, "{level},{count}")?;
        }
        Ok(())
    }
}

/// Unweighted least squares `y = slope·x + intercept`, returning `r²`
/// alongside. A perfectly flat `y` has `r² = 1`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Fit(format!("{} points", xs.len().min(ys.len()))));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let r2 = if syy <= f64::EPSILON * (1.0 + my * my) * n {
        1.0
    } else {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    };
    Ok((slope, intercept, r2))
}

/// Slope of `ln N_L` against `L·ln b`.
pub fn fit_dimension(pairs: &[(u32, u64)], base: u32) -> Result<LogLogFit> {
    if base < 2 {
        return Err(invalid("base", format!("base must be ≥ 2, got {base}")));
    }
    if let Some((level, _)) = pairs.iter().find(|(_, n)| *n == 0) {
        return Err(Error::Fit(format!("zero count at level {level}")));
    }
    let mut levels: Vec<u32> = pairs.iter().map(|p| p.0).collect();
    levels.sort_unstable();
    levels.dedup();
    if levels.len() < 2 {
        return Err(Error::Fit(format!("{} distinct level(s)", levels.len())));
    }
    let ln_b = (base as f64).ln();
    let xs: Vec<f64> = pairs.iter().map(|&(l, _)| l as f64 * ln_b).collect();
    let ys: Vec<f64> = pairs.iter().map(|&(_, n)| (n as f64).ln()).collect();
    let (slope, intercept, r2) = least_squares(&xs, &ys)?;
    Ok(LogLogFit {
        base,
        pairs: pairs.to_vec(),
        slope,
        intercept,
        r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_counts() {
        let pairs: Vec<(u32, u64)> = (1..=8).map(|l| (l, 1u64 << l)).collect();
        let fit = fit_dimension(&pairs, 3).unwrap();
        assert!((fit.slope - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
    }

    #[test]
    fn full_square_and_sumset_counts() {
        for b in [2u32, 3, 5] {
            let pairs: Vec<(u32, u64)> = (1..=5).map(|l| (l, (b as u64).pow(2 * l))).collect();
            assert!((fit_dimension(&pairs, b).unwrap().slope - 2.0).abs() < 1e-12);
        }
        let pairs: Vec<(u32, u64)> = (1..=8).map(|l| (l, 6u64.pow(l))).collect();
        let slope = fit_dimension(&pairs, 3).unwrap().slope;
        assert!((slope - (1.0 + 2f64.ln() / 3f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(fit_dimension(&[(1, 2)], 3), Err(Error::Fit(_))));
        assert!(matches!(fit_dimension(&[(1, 2), (1, 4)], 3), Err(Error::Fit(_))));
        assert!(matches!(fit_dimension(&[(1, 2), (2, 0)], 3), Err(Error::Fit(_))));
        assert!(fit_dimension(&[(1, 2), (2, 4)], 1).is_err());
    }

    #[test]
    fn constant_counts_have_zero_slope() {
        let fit = fit_dimension(&[(1, 7), (2, 7), (3, 7)], 2).unwrap();
        assert!(fit.slope.abs() < 1e-15);
        assert_eq!(fit.r2, 1.0);
    }

    #[test]
    fn csv_layout() {
        let fit = fit_dimension(&[(1, 2), (2, 4)], 3).unwrap();
        let mut buf = Vec::new();
        fit.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "level,count\n1,2\n2,4\n");
    }

    proptest::proptest! {
        #[test]
        fn power_laws_are_exact(c in 1u64..50, rate in 1u64..6, base in 2u32..6) {
            let pairs: Vec<(u32, u64)> = (0..6).map(|l| (l, c * rate.pow(l))).collect();
            let fit = fit_dimension(&pairs, base).unwrap();
            let want = (rate as f64).ln() / (base as f64).ln();
            proptest::prop_assert!((fit.slope - want).abs() < 1e-12);
            proptest::prop_assert!((fit.r2 - 1.0).abs() < 1e-12);
        }
    }
}
