use serde::Serialize;
use sumdim_core::bounds::cite;
use sumdim_core::fourier::{decay_fit, energy_growth, CurveWeighting, Directions, EnergyGrowth, Radii};
use sumdim_core::{DigitCantorSpec, MeasureTransform, ParametricCurve};

use crate::args::{FourierArgs, WeightingArg};
use crate::config::load_json;
use crate::manifest::{csv, RunDir};
use crate::{CliError, CliResult, Outcome};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_range(text: &str, name: &str) -> CliResult<(i32, i32)> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| usage(format!("--{name} expects a:b, got {text:?}")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<i32>()
            .map_err(|_| usage(format!("--{name}: {s:?} is not an integer")))
    };
    Ok((parse(a)?, parse(b)?))
}

fn parse_dim(text: Option<&str>, name: &str) -> CliResult<usize> {
    let t = text.ok_or_else(|| usage(format!("measure {name} needs a dimension, e.g. {name}:3")))?;
    t.parse()
        .map_err(|_| usage(format!("measure {name}: {t:?} is not a dimension")))
}

/// Parses `cantor:3:0,2`, `uniform`, `point:1`, `parabola`, `moment:3` or `segment:2`.
pub fn parse_measure(text: &str, weighting: CurveWeighting) -> CliResult<MeasureTransform> {
    let mut parts = text.split(':');
    let kind = parts.next().unwrap_or_default();
    let measure = match kind {
        "cantor" => {
            let n: u32 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| usage("measure cantor expects cantor:N:D1,D2,…"))?;
            let digits = parts
                .next()
                .ok_or_else(|| usage("measure cantor expects cantor:N:D1,D2,…"))?
                .split(',')
                .map(|d| d.trim().parse::<u32>().map_err(|_| usage(format!("digit {d:?} is not an integer"))))
                .collect::<CliResult<Vec<u32>>>()?;
            MeasureTransform::cantor(DigitCantorSpec::new(n, digits)?)
        }
        "uniform" => MeasureTransform::UniformInterval,
        "point" => MeasureTransform::PointMass {
            dim: parse_dim(parts.next(), "point")?,
        },
        "parabola" => MeasureTransform::curve(ParametricCurve::parabola(), weighting),
        "moment" => MeasureTransform::curve(ParametricCurve::moment(parse_dim(parts.next(), "moment")?), weighting),
        "segment" => MeasureTransform::curve(ParametricCurve::segment(parse_dim(parts.next(), "segment")?), weighting),
        other => return Err(usage(format!("unknown measure {other:?}"))),
    };
    if parts.next().is_some() {
        return Err(usage(format!("trailing fields in measure {text:?}")));
    }
    Ok(measure)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourierReport {
    pub measure: MeasureTransform,
    pub decay: sumdim_core::DecayFit,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy: Option<EnergyGrowth>,
    pub citation: &'static str,
}

pub fn run(args: &FourierArgs) -> CliResult<Outcome> {
    let weighting = match args.weighting {
        WeightingArg::Parameter => CurveWeighting::Parameter,
        WeightingArg::Arclength => CurveWeighting::Arclength,
    };
    let (measure, config_bytes) = match (&args.measure, &args.measure_file) {
        (Some(text), None) => (parse_measure(text, weighting)?, None),
        (None, Some(path)) => {
            let loaded = load_json::<MeasureTransform>(path)?;
            (loaded.value, Some(loaded.bytes))
        }
        _ => return Err(usage("pass exactly one of --measure and --measure-file")),
    };
    let (m0, m1) = parse_range(&args.octaves, "octaves")?;
    let radii = match args.powers_of {
        Some(b) if b > 1.0 => Radii::Explicit {
            radii: (m0..=m1).map(|m| b.powi(m)).collect(),
        },
        Some(b) => return Err(usage(format!("--powers-of must exceed 1, got {b}"))),
        None => Radii::Octaves {
            m0,
            m1,
            per_octave: args.per_octave,
            seed: args.seed,
        },
    };
    let directions = if !args.direction.is_empty() {
        let vectors = args
            .direction
            .iter()
            .map(|v| {
                v.split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|_| usage(format!("--direction: {x:?} is not a number"))))
                    .collect::<CliResult<Vec<f64>>>()
            })
            .collect::<CliResult<_>>()?;
        Directions::Explicit { vectors }
    } else if let Some(count) = args.directions {
        Directions::Spread { count }
    } else {
        Directions::default_for(measure.dim())
    };
    let fit = decay_fit(&measure, &radii, &directions)?;
    let energy = match args.energy {
        Some(r) => {
            let (a, b) = parse_range(&args.lambda, "lambda")?;
            let lambdas: Vec<f64> = (a..=b).map(|e| 2f64.powi(e)).collect();
            Some(energy_growth(&measure, r, &lambdas)?)
        }
        None => None,
    };

    let mut dir = RunDir::create("fourier", &args.output, args)?;
    if let Some(bytes) = &config_bytes {
        dir.config_bytes(bytes);
    }
    dir.seed(args.seed);
    let mut decay_csv = Vec::new();
    fit.write_csv(&mut decay_csv).expect("writing to a Vec cannot fail");
    dir.write_text("decay.csv", &String::from_utf8_lossy(&decay_csv))?;
    if let Some(g) = &energy {
        let rows = g.sums.iter().map(|(l, s)| vec![l.to_string(), format!("{s:e}")]);
        dir.write_text("energy.csv", &csv(&["lambda", "partial_sum"], rows))?;
    }
    dir.say(format!(
        "|μ̂| decay exponent = {:.4} (r² = {:.4}) over {} groups  [{}]",
        fit.exponent,
        fit.r2,
        fit.octaves.len(),
        cite::FOURIER_DECAY
    ));
    if let Some(g) = &energy {
        let inc = g
            .increment_exponent
            .map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
        dir.say(format!(
            "r = {}: partial-sum growth exponent = {:.4}, increment exponent = {inc}  [{}]",
            g.r,
            g.growth_exponent,
            cite::ENERGY
        ));
    }
    let report = FourierReport {
        measure,
        decay: fit,
        energy,
        citation: cite::FOURIER_DECAY,
    };
    dir.primary_json("fourier.json", &report)?;
    dir.finish()?;
    Ok(Outcome::clean())
}
