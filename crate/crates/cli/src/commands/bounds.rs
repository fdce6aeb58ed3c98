use sumdim_core::{tabulate, Scenario};

use crate::args::BoundsArgs;
use crate::config::load_json;
use crate::manifest::RunDir;
use crate::{CliResult, Outcome};

pub fn run(args: &BoundsArgs) -> CliResult<Outcome> {
    let loaded = load_json::<Scenario>(&args.scenario)?;
    let report = tabulate(&loaded.value)?;
    let mut dir = RunDir::create("bounds", &args.output, &loaded.value)?;
    dir.config_bytes(&loaded.bytes);
    dir.primary_json("report.json", &report)?;
    dir.say(format!(
        "dim K = {}, dim E = {}, d = {}",
        report.alpha, report.scenario.beta, report.scenario.d
    ));
    for e in &report.entries {
        let flavor = serde_json::to_value(e.flavor)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        dir.say(format!("  {:<22} {:>10.6}  {:<9}  [{}]", e.name, e.value, flavor, e.citation));
    }
    for s in &report.skipped {
        dir.say(format!("  {:<22} skipped: {}", s.name, s.reason));
    }
    dir.say(format!(
        "best Minkowski = {:.6}, best Hausdorff = {:.6}",
        report.best_minkowski, report.best_hausdorff
    ));
    dir.finish()?;
    Ok(Outcome::clean())
}
