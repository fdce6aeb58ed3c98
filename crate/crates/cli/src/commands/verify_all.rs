use crate::args::VerifyArgs;
use crate::manifest::{csv, RunDir};
use crate::verify::run_suite;
use crate::{CliResult, Outcome};

pub fn run(args: &VerifyArgs) -> CliResult<Outcome> {
    let report = run_suite(args.seed, args.deep)?;
    let mut dir = RunDir::create("verify-all", &args.output, args)?;
    dir.seed(args.seed);
    dir.primary_json("verify.json", &report)?;
    let rows = report.checks.iter().map(|c| {
        vec![
            c.criterion.to_string(),
            quote(&c.name),
            quote(&c.measured),
            quote(&c.target),
            c.pass.to_string(),
        ]
    });
    dir.write_text("verify.csv", &csv(&["criterion", "name", "measured", "target", "pass"], rows))?;
    for c in &report.checks {
        dir.say(format!(
            "[{}] {:>2}. {} = {} (target {})",
            if c.pass { "pass" } else { "FAIL" },
            c.criterion,
            c.name,
            c.measured,
            c.target
        ));
    }
    dir.finish()?;
    let mut outcome = Outcome::clean();
    for c in report.checks.iter().filter(|c| !c.pass) {
        outcome.check(true, format!("criterion {}: {} = {} misses {}", c.criterion, c.name, c.measured, c.target));
    }
    Ok(outcome)
}

/// RFC 4180 quoting for fields that may hold commas.
fn quote(field: &str) -> String {
    format!("\"{}\"", field.replace('"', "\"\""))
}
