use sumdim_core::bounds::cite;
use sumdim_core::boxdim::dim_sumset_experiment;

use crate::args::BoxdimArgs;
use crate::config::load_boxdim;
use crate::manifest::{csv, RunDir};
use crate::{CliResult, Outcome};

pub fn run(args: &BoxdimArgs) -> CliResult<Outcome> {
    let loaded = load_boxdim(&args.config)?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    let c = &loaded.value;
    let result = dim_sumset_experiment(&c.e, &c.k, c.base, &c.levels, c.bound, c.tolerance)?;
    let mut dir = RunDir::create("boxdim", &args.output, &loaded.value)?;
    dir.config_bytes(&loaded.bytes);
    dir.primary_json("result.json", &result)?;
    let rows = result.counts.iter().map(|r| {
        vec![
            r.level.to_string(),
            r.count_e.to_string(),
            r.count_k.to_string(),
            r.count_sum.to_string(),
        ]
    });
    dir.write_text("counts.csv", &csv(&["level", "count_e", "count_k", "count_sum"], rows))?;
    let mut fit_csv = Vec::new();
    result
        .fit
        .write_csv(&mut fit_csv)
        .expect("writing to a Vec cannot fail");
    dir.write_text("fit.csv", &String::from_utf8_lossy(&fit_csv))?;
    dir.say(format!(
        "slope = {:.6} (r² = {:.6}) over levels {:?}, base {}  [{}]",
        result.fit.slope,
        result.fit.r2,
        result.levels,
        result.base,
        cite::BOX_COUNTING
    ));
    let relation = if result.bound_name == "equals" { "=" } else { "≥" };
    dir.say(format!(
        "{} bound: slope {relation} {:.6} ± {}: {}",
        result.bound_name,
        result.bound_value,
        result.tolerance,
        if result.pass { "pass" } else { "FAIL" }
    ));
    dir.finish()?;
    Ok(Outcome::finding_if(
        !result.pass,
        format!(
            "box-counting slope {:.6} misses the {} bound {:.6} at tolerance {}",
            result.fit.slope, result.bound_name, result.bound_value, result.tolerance
        ),
    ))
}
