//! Inputs shared by the benchmarks.

use sumdim_core::{rasterize, CellSet, SetGenerator};

/// Cover of `C × C` for the middle-thirds set `C` at `level`.
pub fn cantor_square(level: u32) -> CellSet {
    let c = SetGenerator::middle_thirds();
    rasterize(&SetGenerator::product(c.clone(), c), 3, level).expect("level within budget")
}

/// Cover of `[0,1]×{0} ∪ {1}×[0,1]` at `level`.
pub fn polygon_k0(level: u32) -> CellSet {
    rasterize(&SetGenerator::PolygonK0, 3, level).expect("level within budget")
}
