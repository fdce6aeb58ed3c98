use sumdim_core::bounds::cite;
use sumdim_core::group::search_digit_sets;

use super::digit_list;
use crate::args::SearchArgs;
use crate::manifest::{csv, RunDir};
use crate::{CliError, CliResult, Outcome};

pub fn run(args: &SearchArgs) -> CliResult<Outcome> {
    if args.n < 2 {
        return Err(CliError::Usage("base must be ≥ 2".into()));
    }
    if args.size == 0 {
        return Err(CliError::Usage("size must be ≥ 1".into()));
    }
    let target = args
        .target
        .unwrap_or_else(|| 1.0 - (args.size as f64).ln() / (args.n as f64).ln());
    let results = search_digit_sets(args.n as u64, args.size, target)?;
    let mut dir = RunDir::create("gamma-search", &args.output, args)?;
    dir.primary_json("search.json", &results)?;
    let rows = results.iter().map(|r| {
        let digits: Vec<String> = r.digits.iter().map(|d| d.to_string()).collect();
        vec![
            digits.join(" "),
            format!("{:e}", r.gamma_star),
            r.unconstrained.to_string(),
            r.flagged.to_string(),
        ]
    });
    dir.write_text("search.csv", &csv(&["digits", "gamma_star", "unconstrained", "flagged"], rows))?;
    let flagged = results.iter().filter(|r| r.flagged).count();
    dir.say(format!(
        "{} digit sets of size {} in base {}; {flagged} with γ* ≤ {target:.12}  [{}]",
        results.len(),
        args.size,
        args.n,
        cite::GAMMA
    ));
    for r in results.iter().filter(|r| r.flagged) {
        dir.say(format!("  S = {}: γ* = {:.15}", digit_list(&r.digits), r.gamma_star));
    }
    dir.finish()?;
    Ok(Outcome::clean())
}
