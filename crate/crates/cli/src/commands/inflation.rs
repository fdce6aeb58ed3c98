use sumdim_core::bounds::cite;
use sumdim_core::inflation::{
    build_inflation, build_transport, image_bounding_box, slab_exponent_probe, mc_pushforward_check,
    nondegeneracy_estimate, psi0_degeneracy_check, random_boxes, CornerK0, SlabUnion, Surface,
};
use sumdim_core::ParametricCurve;

use crate::args::{InflationArgs, SurfaceArg};
use crate::manifest::RunDir;
use crate::{CliResult, Outcome};

/// Cube sides for the exponent probe.
pub fn slab_probe_sides() -> Vec<f64> {
    (1..=6).map(|i| 2f64.powi(-i)).collect()
}

pub const SLAB_PROBE_TOLERANCE: f64 = 0.1;

pub fn run(args: &InflationArgs) -> CliResult<Outcome> {
    let spec = build_inflation(args.d, args.k)?;
    let plan = build_transport(&spec)?;
    let mut dir = RunDir::create("inflation", &args.output, args)?;
    let mut outcome = Outcome::clean();
    dir.primary_json("plan.json", &plan)?;
    dir.say(spec.to_string());
    dir.say(format!(
        "d = {} = {}·{} + {}; Ψ_0 dimension count allows nondegeneracy: {}",
        spec.d,
        spec.q,
        spec.k,
        spec.r,
        psi0_degeneracy_check(spec.d, spec.k)
    ));
    if args.verify_det {
        dir.say(format!(
            "det M = {} ({}×{}); second-class block {}×{} unit lower triangular: {}  [{}]",
            plan.determinant,
            plan.output_dim(),
            plan.output_dim(),
            plan.second_class_block.len(),
            plan.second_class_block.len(),
            plan.second_class_unit_lower_triangular,
            cite::TRANSPORT
        ));
    }
    if let Some(samples) = args.mc {
        dir.seed(args.seed);
        let mut boxes = random_boxes(&plan, args.boxes, args.seed);
        boxes.push(image_bounding_box(&plan));
        let report = mc_pushforward_check(&plan, &boxes, samples, args.seed)?;
        dir.write_json("pushforward.json", &report)?;
        let passed = report.boxes.iter().filter(|b| b.pass).count();
        dir.say(format!(
            "pushforward: {passed}/{} boxes within vol + 3σ at {samples} samples  [{}]",
            report.boxes.len(),
            cite::PUSHFORWARD
        ));
        outcome.check(!report.all_pass, format!("{} box(es) exceed vol + 3σ", report.boxes.len() - passed));
    }
    if args.slab_probe {
        dir.seed(args.seed);
        let probe = slab_exponent_probe(&plan, &slab_probe_sides(), args.slab_samples, args.seed, SLAB_PROBE_TOLERANCE)?;
        dir.write_json("slab_probe.json", &probe)?;
        dir.say(format!(
            "exponent of m(E) = {:.4}, needs ≥ {:.4} − {}  [{}]",
            probe.exponent,
            probe.target,
            probe.tolerance,
            cite::SLAB_FUNCTIONAL
        ));
        outcome.check(!probe.pass, format!("fitted exponent {:.4} below {:.4}", probe.exponent, probe.target - probe.tolerance));
    }
    if let Some(surface) = args.surface {
        dir.seed(args.seed);
        let sampler: Box<dyn Surface> = match surface {
            SurfaceArg::Parabola if args.d == 2 => Box::new(ParametricCurve::parabola()),
            SurfaceArg::Parabola => Box::new(ParametricCurve::moment(args.d)),
            SurfaceArg::Segment => Box::new(ParametricCurve::segment(args.d)),
            SurfaceArg::Corner => Box::new(CornerK0),
            SurfaceArg::Slabs => Box::new(SlabUnion(plan.slabs.clone())),
        };
        let report = nondegeneracy_estimate(sampler.as_ref(), &spec, args.grid_level, args.samples, args.seed)?;
        dir.write_json("nondegeneracy.json", &report)?;
        dir.say(format!(
            "m(Ψ(K^d)) ≈ {:.6} ({} cells at level {})  [{}]",
            report.volume,
            report.occupied_cells,
            report.level,
            cite::NONDEGENERACY
        ));
    }
    dir.finish()?;
    Ok(outcome)
}
