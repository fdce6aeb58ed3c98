use serde::Serialize;
use sumdim_core::bounds::cite;
use sumdim_core::group::{best_gamma, level_digit_set, random_mass_growth_check, Dedup, GammaCertificate, SearchMode};
use sumdim_core::DigitCantorSpec;

use super::digit_list;
use crate::args::{DedupArg, GammaArgs};
use crate::manifest::RunDir;
use crate::{CliError, CliResult, Outcome};

/// Exhaustive runs from this modulus on need `--deep`.
pub const DEEP_MODULUS: u64 = 25;

/// The serialized form of a [`GammaCertificate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateJson {
    pub m: u64,
    #[serde(rename = "S")]
    pub s: Vec<u64>,
    pub gamma_star: f64,
    pub witness_mask_hex: Option<String>,
    pub exhaustive: bool,
    pub unconstrained: bool,
    pub evaluated: u64,
    pub citation: &'static str,
}

impl From<&GammaCertificate> for CertificateJson {
    fn from(c: &GammaCertificate) -> Self {
        Self {
            m: c.modulus,
            s: c.digits.clone(),
            gamma_star: c.gamma_star,
            witness_mask_hex: c.witness_mask_hex(),
            exhaustive: c.exhaustive,
            unconstrained: c.unconstrained,
            evaluated: c.evaluated,
            citation: cite::GAMMA,
        }
    }
}

fn dedup(arg: DedupArg) -> Dedup {
    match arg {
        DedupArg::None => Dedup::None,
        DedupArg::Translation => Dedup::Translation,
        DedupArg::Units => Dedup::TranslationAndUnits,
    }
}

pub fn run(args: &GammaArgs) -> CliResult<Outcome> {
    let spec = DigitCantorSpec::new(args.n, args.digits.iter().copied())?;
    let modulus = (args.n as u64)
        .checked_pow(args.level)
        .ok_or_else(|| CliError::Usage(format!("{}^{} overflows", args.n, args.level)))?;
    if !args.growth_check && args.random.is_none() && modulus >= DEEP_MODULUS && !args.deep {
        return Err(CliError::Usage(format!(
            "exhaustive search over Z_{modulus} needs --deep (m ≥ {DEEP_MODULUS})"
        )));
    }
    let mut dir = RunDir::create("gamma", &args.output, args)?;
    let outcome = if args.growth_check {
        growth_check(args, &spec, &mut dir)?
    } else {
        certificate(args, &spec, &mut dir)?
    };
    dir.finish()?;
    Ok(outcome)
}

fn certificate(args: &GammaArgs, spec: &DigitCantorSpec, dir: &mut RunDir) -> CliResult<Outcome> {
    let digits = level_digit_set(spec, args.level)?;
    let modulus = (args.n as u64).pow(args.level);
    let mode = match args.random {
        Some(trials) => {
            dir.seed(args.seed);
            SearchMode::Random { trials, seed: args.seed }
        }
        None => SearchMode::Exhaustive(dedup(args.dedup)),
    };
    let cert = best_gamma(modulus, &digits, mode)?;
    let json = CertificateJson::from(&cert);
    dir.primary_json("certificate.json", &json)?;
    let how = if cert.exhaustive { "exhaustive" } else { "random" };
    dir.say(format!(
        "S = {} ⊂ Z_{modulus} ({how}, {} sets evaluated)",
        digit_list(&cert.digits),
        cert.evaluated
    ));
    if cert.unconstrained {
        dir.say(format!("every evaluated E has E + S = Z_{modulus}; γ* is unconstrained  [{}]", cite::GAMMA));
    } else {
        dir.say(format!("γ* = {:.15}  [{}]", cert.gamma_star, cite::GAMMA));
        if let Some(hex) = &json.witness_mask_hex {
            dir.say(format!("witness mask = {hex}"));
        }
    }
    Ok(Outcome::clean())
}

fn growth_check(args: &GammaArgs, spec: &DigitCantorSpec, dir: &mut RunDir) -> CliResult<Outcome> {
    let gamma = match args.gamma {
        Some(g) => g,
        None => {
            let s: Vec<u64> = spec.digits().iter().map(|&d| d as u64).collect();
            best_gamma(args.n as u64, &s, SearchMode::Exhaustive(Dedup::Translation))?.gamma_star
        }
    };
    dir.seed(args.seed);
    let report = random_mass_growth_check(spec, args.level, gamma, args.trials, args.seed)?;
    dir.primary_json("growth.json", &report)?;
    dir.say(format!(
        "m̃(E+S) ≥ m̃(E)^{gamma:.12} on {} random E ⊂ Z_{}: {} violation(s)  [{}]",
        report.trials, report.modulus, report.violations, cite::MASS_GROWTH
    ));
    if let Some(r) = report.max_ratio {
        dir.say(format!("largest log m̃(E+S)/log m̃(E) seen = {r:.12}"));
    }
    for w in &report.witnesses {
        dir.say(format!(
            "witness {}: |E| = {}, |E+S| = {}, lhs = {:.6e} < rhs = {:.6e}",
            w.mask_hex, w.size, w.sumset_size, w.lhs, w.rhs
        ));
    }
    Ok(Outcome::finding_if(
        report.violations > 0,
        format!("{} mass-growth violation(s) at γ = {gamma}; witnesses in growth.json", report.violations),
    ))
}
