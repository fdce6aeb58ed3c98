//! Finite sets of grid cells and their Minkowski sums.
//!
//! A cell `c` at base `b` and level `L` is the half-open box
//! `∏ [c_i b^{-L}, (c_i + 1) b^{-L})`. Sums of cell covers are exact:
//! `[a, a+1) + [b, b+1) = [a+b, a+b+2)`, so the sum of two covered regions is
//! covered by `{a + b + e : e ∈ {0,1}^d}` and nothing else is needed.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use crate::error::{invalid, Error, Result};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 6;

/// Bounding boxes up to this many cells use the dense bit-grid sumset.
pub const DENSE_LIMIT: u128 = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSet {
    dim: usize,
    base: u32,
    level: u32,
    /// Lexicographically sorted, deduplicated, stride `dim`.
    coords: Vec<i64>,
}

/// Which sumset algorithm to run. `Auto` follows [`DENSE_LIMIT`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Auto,
    Dense,
    Sparse,
}

impl CellSet {
    pub fn empty(dim: usize, base: u32, level: u32) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(invalid("d", format!("dimension must be in 1..={MAX_DIM}, got {dim}")));
        }
        if base < 2 {
            return Err(invalid("b", "base must be ≥ 2"));
        }
        Ok(Self {
            dim,
            base,
            level,
            coords: Vec::new(),
        })
    }

    pub fn from_cells<I, C>(dim: usize, base: u32, level: u32, cells: I) -> Result<Self>
    where
        I: IntoIterator<Item = C>,
        C: AsRef<[i64]>,
    {
        let mut coords = Vec::new();
        for cell in cells {
            let cell = cell.as_ref();
            if cell.len() != dim {
                return Err(invalid(
                    "cells",
                    format!("cell has {} coordinates, expected {dim}", cell.len()),
                ));
            }
            coords.extend_from_slice(cell);
        }
        Self::from_flat(dim, base, level, coords)
    }

    /// Builds a set from a flat coordinate buffer (stride `dim`), sorting and
    /// removing duplicates.
    pub fn from_flat(dim: usize, base: u32, level: u32, coords: Vec<i64>) -> Result<Self> {
        let mut set = Self::empty(dim, base, level)?;
        if coords.len() % dim != 0 {
            return Err(invalid("cells", "coordinate buffer is not a multiple of d"));
        }
        let mut rows: Vec<&[i64]> = coords.chunks_exact(dim).collect();
        rows.sort_unstable();
        rows.dedup();
        set.coords = rows.concat();
        Ok(set)
    }

    /// Caller guarantees `coords` is sorted and free of duplicates.
    fn from_sorted_unchecked(dim: usize, base: u32, level: u32, coords: Vec<i64>) -> Self {
        debug_assert!(coords.chunks_exact(dim).zip(coords.chunks_exact(dim).skip(1)).all(|(a, b)| a < b));
        Self {
            dim,
            base,
            level,
            coords,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[i64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn contains(&self, cell: &[i64]) -> bool {
        cell.len() == self.dim && self.position(cell).is_ok()
    }

    fn position(&self, cell: &[i64]) -> std::result::Result<usize, usize> {
        let mut lo = 0usize;
        let mut hi = self.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            let probe = &self.coords[mid * self.dim..(mid + 1) * self.dim];
            match probe.cmp(cell) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Ok(mid),
            }
        }
        Err(lo)
    }

    /// Side length `b^{-L}` of one cell.
    pub fn cell_width(&self) -> f64 {
        (self.base as f64).powi(-(self.level as i32))
    }

    /// Lebesgue measure of the covered region, `|cells| · b^{-dL}`.
    pub fn measure(&self) -> f64 {
        self.len() as f64 * self.cell_width().powi(self.dim as i32)
    }

    pub fn is_subset(&self, other: &CellSet) -> bool {
        self.same_grid(other).is_ok() && self.iter().all(|c| other.contains(c))
    }

    pub fn union(&self, other: &CellSet) -> Result<CellSet> {
        self.same_grid(other)?;
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        CellSet::from_flat(self.dim, self.base, self.level, coords)
    }

    pub fn translate(&self, offset: &[i64]) -> Result<CellSet> {
        if offset.len() != self.dim {
            return Err(invalid("offset", "offset length must equal d"));
        }
        let coords = self
            .coords
            .chunks_exact(self.dim)
            .flat_map(|c| c.iter().zip(offset).map(|(x, t)| x + t))
            .collect();
        Ok(Self::from_sorted_unchecked(self.dim, self.base, self.level, coords))
    }

    /// Per-axis inclusive bounds, `None` when empty.
    pub fn bounding_box(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        let mut cells = self.iter();
        let first = cells.next()?;
        let mut lo = first.to_vec();
        let mut hi = first.to_vec();
        for cell in cells {
            for i in 0..self.dim {
                lo[i] = lo[i].min(cell[i]);
                hi[i] = hi[i].max(cell[i]);
            }
        }
        Some((lo, hi))
    }

    fn same_grid(&self, other: &CellSet) -> Result<()> {
        if self.dim != other.dim || self.base != other.base || self.level != other.level {
            return Err(Error::Mismatch(format!(
                "(d,b,L) = ({},{},{}) vs ({},{},{})",
                self.dim, self.base, self.level, other.dim, other.base, other.level
            )));
        }
        Ok(())
    }

    /// Cartesian product; the result lives in dimension `d1 + d2`.
    pub fn product(&self, other: &CellSet) -> Result<CellSet> {
        if self.base != other.base || self.level != other.level {
            return Err(Error::Mismatch("product factors need equal base and level".into()));
        }
        let dim = self.dim + other.dim;
        if dim > MAX_DIM {
            return Err(invalid("d", format!("product dimension {dim} exceeds {MAX_DIM}")));
        }
        let mut coords = Vec::with_capacity(self.len() * other.len() * dim);
        for a in self.iter() {
            for b in other.iter() {
                coords.extend_from_slice(a);
                coords.extend_from_slice(b);
            }
        }
        Ok(Self::from_sorted_unchecked(dim, self.base, self.level, coords))
    }

    /// Subdivides every cell into its `b^{d·extra}` children at level `L + extra`.
    pub fn refine(&self, extra: u32) -> Result<CellSet> {
        if extra == 0 {
            return Ok(self.clone());
        }
        let factor = (self.base as i64)
            .checked_pow(extra)
            .ok_or_else(|| Error::BudgetExceeded("refinement factor overflows i64".into()))?;
        let children = (factor as u128).pow(self.dim as u32);
        if children * self.len() as u128 > 1 << 32 {
            return Err(Error::BudgetExceeded(format!(
                "refining {} cells by {children} children each",
                self.len()
            )));
        }
        let mut coords = Vec::with_capacity(self.len() * children as usize * self.dim);
        let mut child = vec![0i64; self.dim];
        for cell in self.iter() {
            for index in 0..children as u64 {
                let mut rem = index as i64;
                for i in (0..self.dim).rev() {
                    child[i] = cell[i] * factor + rem % factor;
                    rem /= factor;
                }
                coords.extend_from_slice(&child);
            }
        }
        CellSet::from_flat(self.dim, self.base, self.level + extra, coords)
    }

    fn negated(&self) -> CellSet {
        let coords = self.coords.iter().map(|&x| -x).collect();
        CellSet::from_flat(self.dim, self.base, self.level, coords).expect("same grid")
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{},{},{}", self.dim, self.base, self.level)?;
        for cell in self.iter() {
            let line: Vec<String> = cell.iter().map(i64::to_string).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<CellSet> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing `d,b,L` header".into()))?
            .map_err(|e| Error::Parse(e.to_string()))?;
        let fields: Vec<&str> = header.trim().split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("header `{header}` is not `d,b,L`")));
        }
        let parse = |s: &str| s.trim().parse::<u32>().map_err(|e| Error::Parse(format!("{s}: {e}")));
        let dim = parse(fields[0])? as usize;
        let base = parse(fields[1])?;
        let level = parse(fields[2])?;
        let mut coords = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let cell: Vec<i64> = line
                .split(',')
                .map(|s| s.trim().parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?;
            if cell.len() != dim {
                return Err(Error::Parse(format!("line {}: expected {dim} coordinates", lineno + 2)));
            }
            coords.extend(cell);
        }
        CellSet::from_flat(dim, base, level, coords)
    }
}

/// Cell cover of `A + B`.
pub fn sumset_cells(a: &CellSet, b: &CellSet) -> Result<CellSet> {
    sumset_cells_with(a, b, Backend::Auto)
}

pub fn sumset_cells_with(a: &CellSet, b: &CellSet, backend: Backend) -> Result<CellSet> {
    minkowski(a, b, 0, backend)
}

/// Cell cover of `A − B`: `{a − b + e : e ∈ {−1,0}^d}`.
pub fn diffset_cells(a: &CellSet, b: &CellSet) -> Result<CellSet> {
    diffset_cells_with(a, b, Backend::Auto)
}

pub fn diffset_cells_with(a: &CellSet, b: &CellSet, backend: Backend) -> Result<CellSet> {
    a.same_grid(b)?;
    minkowski(a, &b.negated(), -1, backend)
}

/// `{x + y + e : e ∈ {slack, slack+1}^d}`.
fn minkowski(a: &CellSet, b: &CellSet, slack: i64, backend: Backend) -> Result<CellSet> {
    a.same_grid(b)?;
    let (dim, base, level) = (a.dim, a.base, a.level);
    let (Some((lo_a, hi_a)), Some((lo_b, hi_b))) = (a.bounding_box(), b.bounding_box()) else {
        return CellSet::empty(dim, base, level);
    };
    // raw sums live in [lo_a+lo_b, hi_a+hi_b]; one extra layer for the slack
    let lo: Vec<i64> = lo_a.iter().zip(&lo_b).map(|(x, y)| x + y).collect();
    let extent: Vec<usize> = (0..dim)
        .map(|i| (hi_a[i] + hi_b[i] - lo[i] + 2) as usize)
        .collect();
    let cells: u128 = extent.iter().map(|&e| e as u128).product();
    let dense = match backend {
        Backend::Dense => true,
        Backend::Sparse => false,
        Backend::Auto => cells <= DENSE_LIMIT,
    };
    if dense {
        if cells > 1 << 34 {
            return Err(Error::BudgetExceeded(format!("dense grid of {cells} cells")));
        }
        Ok(dense_minkowski(a, b, &lo, &extent, slack))
    } else {
        Ok(sparse_minkowski(a, b, &lo, &extent, slack))
    }
}

/// Most words the row-keyed sparse backend may allocate before falling back
/// to pairwise hashing.
const ROW_HASH_WORDS: u128 = 1 << 25;

/// Hash map from occupied row prefixes to bit rows over the last axis.
fn sparse_minkowski(a: &CellSet, b: &CellSet, lo: &[i64], extent: &[usize], slack: i64) -> CellSet {
    let dim = a.dim;
    let row_len = extent[dim - 1];
    let words = row_len.div_ceil(64);
    let rows_a = rows_of(a);
    let rows_b = rows_of(b);
    let box_rows: u128 = extent[..dim - 1].iter().map(|&e| e as u128).product();
    let out_rows = ((rows_a.len() as u128 * rows_b.len() as u128) << (dim - 1)).min(box_rows);
    if out_rows.saturating_mul(words as u128) > ROW_HASH_WORDS {
        return pairwise_minkowski(a, b, slack);
    }
    let last_lo = lo[dim - 1];
    let mut rows: HashMap<Vec<i64>, Vec<u64>> = HashMap::new();
    for ra in &rows_a {
        for rb in &rows_b {
            let key: Vec<i64> = ra.prefix.iter().zip(&rb.prefix).map(|(x, y)| x + y).collect();
            let dst = rows.entry(key).or_insert_with(|| vec![0u64; words]);
            let (sparse, dense) = if ra.lasts.len() <= rb.lasts.len() { (ra, rb) } else { (rb, ra) };
            for &x in &sparse.lasts {
                or_shifted(dst, &dense.bits, (x + dense.first - last_lo) as usize);
            }
        }
    }
    for bits in rows.values_mut() {
        let mut carry = 0;
        for w in bits.iter_mut() {
            let next = *w >> 63;
            *w |= (*w << 1) | carry;
            carry = next;
        }
    }
    for axis in 0..dim - 1 {
        let mut grown = rows.clone();
        for (key, bits) in &rows {
            let mut up = key.clone();
            up[axis] += 1;
            let dst = grown.entry(up).or_insert_with(|| vec![0u64; words]);
            for (d, s) in dst.iter_mut().zip(bits) {
                *d |= s;
            }
        }
        rows = grown;
    }
    let mut keys: Vec<&Vec<i64>> = rows.keys().collect();
    keys.sort_unstable();
    let mut coords = Vec::new();
    for key in keys {
        for (k, &word) in rows[key].iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let t = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let pos = k * 64 + t;
                if pos >= row_len {
                    break;
                }
                coords.extend(key.iter().map(|&c| c + slack));
                coords.push(last_lo + slack + pos as i64);
            }
        }
    }
    CellSet::from_sorted_unchecked(dim, a.base, a.level, coords)
}

fn pairwise_minkowski(a: &CellSet, b: &CellSet, slack: i64) -> CellSet {
    let dim = a.dim;
    let mut raw: HashSet<Vec<i64>> = HashSet::with_capacity(a.len().saturating_mul(b.len()).min(1 << 24));
    for x in a.iter() {
        for y in b.iter() {
            raw.insert(x.iter().zip(y).map(|(p, q)| p + q).collect());
        }
    }
    let mut out: HashSet<Vec<i64>> = HashSet::with_capacity(raw.len() << dim);
    for cell in &raw {
        for corner in 0..(1u32 << dim) {
            let shifted: Vec<i64> = cell
                .iter()
                .enumerate()
                .map(|(i, &c)| c + slack + ((corner >> i) & 1) as i64)
                .collect();
            out.insert(shifted);
        }
    }
    let coords: Vec<i64> = out.into_iter().flatten().collect();
    CellSet::from_flat(dim, a.base, a.level, coords).expect("grid already validated")
}

/// One row of a cell set: all cells sharing the first `d − 1` coordinates.
struct Row {
    prefix: Vec<i64>,
    lasts: Vec<i64>,
    /// bit `k` is set when `lasts` contains `first + k`
    bits: Vec<u64>,
    first: i64,
}

fn rows_of(set: &CellSet) -> Vec<Row> {
    let dim = set.dim;
    let mut rows: Vec<Row> = Vec::new();
    for cell in set.iter() {
        let (prefix, last) = (&cell[..dim - 1], cell[dim - 1]);
        match rows.last_mut() {
            Some(row) if row.prefix == prefix => row.lasts.push(last),
            _ => rows.push(Row {
                prefix: prefix.to_vec(),
                lasts: vec![last],
                bits: Vec::new(),
                first: last,
            }),
        }
    }
    for row in &mut rows {
        let span = (row.lasts[row.lasts.len() - 1] - row.first) as usize + 1;
        row.bits = vec![0u64; span.div_ceil(64)];
        for &x in &row.lasts {
            let k = (x - row.first) as usize;
            row.bits[k / 64] |= 1 << (k % 64);
        }
    }
    rows
}

/// `dst |= src << shift` (bitwise, little-endian words).
fn or_shifted(dst: &mut [u64], src: &[u64], shift: usize) {
    let (word, bit) = (shift / 64, shift % 64);
    for (i, &w) in src.iter().enumerate() {
        if w == 0 {
            continue;
        }
        dst[i + word] |= w << bit;
        if bit != 0 {
            if let Some(next) = dst.get_mut(i + word + 1) {
                *next |= w >> (64 - bit);
            }
        }
    }
}

fn dense_minkowski(a: &CellSet, b: &CellSet, lo: &[i64], extent: &[usize], slack: i64) -> CellSet {
    let dim = a.dim;
    let row_len = extent[dim - 1];
    let words = row_len.div_ceil(64);
    // row-major strides over the prefix axes
    let mut strides = vec![1usize; dim.saturating_sub(1)];
    for i in (0..dim.saturating_sub(1)).rev() {
        if i + 1 < dim - 1 {
            strides[i] = strides[i + 1] * extent[i + 1];
        }
    }
    let n_rows: usize = extent[..dim - 1].iter().product();
    let mut grid = vec![0u64; n_rows * words];

    let rows_a = rows_of(a);
    let rows_b = rows_of(b);
    let last_lo = lo[dim - 1];
    for ra in &rows_a {
        for rb in &rows_b {
            let mut row_index = 0usize;
            for i in 0..dim - 1 {
                row_index += (ra.prefix[i] + rb.prefix[i] - lo[i]) as usize * strides[i];
            }
            let dst = &mut grid[row_index * words..(row_index + 1) * words];
            // shift the denser row by each element of the sparser one
            let (sparse, dense) = if ra.lasts.len() <= rb.lasts.len() { (ra, rb) } else { (rb, ra) };
            for &x in &sparse.lasts {
                or_shifted(dst, &dense.bits, (x + dense.first - last_lo) as usize);
            }
        }
    }

    // dilate by {0,1} along every axis
    let scratch = grid.clone();
    for w in 0..grid.len() {
        let carry = if w % words == 0 { 0 } else { scratch[w - 1] >> 63 };
        grid[w] |= (scratch[w] << 1) | carry;
    }
    for axis in 0..dim - 1 {
        let step = strides[axis];
        let snapshot = grid.clone();
        for r in 0..n_rows {
            let coord = (r / step) % extent[axis];
            if coord == 0 {
                continue;
            }
            let (src, dst) = ((r - step) * words, r * words);
            for k in 0..words {
                grid[dst + k] |= snapshot[src + k];
            }
        }
    }

    let mut coords = Vec::new();
    let mut cell = vec![0i64; dim];
    for r in 0..n_rows {
        let row = &grid[r * words..(r + 1) * words];
        if row.iter().all(|&w| w == 0) {
            continue;
        }
        let mut rem = r;
        for i in 0..dim - 1 {
            cell[i] = lo[i] + slack + (rem / strides[i]) as i64;
            rem %= strides[i];
        }
        for (k, &word) in row.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let t = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let pos = k * 64 + t;
                if pos >= row_len {
                    break;
                }
                cell[dim - 1] = last_lo + slack + pos as i64;
                coords.extend_from_slice(&cell);
            }
        }
    }
    CellSet::from_sorted_unchecked(dim, a.base, a.level, coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set1(b: u32, l: u32, cells: &[i64]) -> CellSet {
        CellSet::from_cells(1, b, l, cells.iter().map(|&c| [c])).unwrap()
    }

    fn cells1(s: &CellSet) -> Vec<i64> {
        s.iter().map(|c| c[0]).collect()
    }

    #[test]
    fn measure_examples() {
        assert_eq!(CellSet::empty(2, 3, 4).unwrap().measure(), 0.0);
        let full = set1(3, 2, &(0..9).collect::<Vec<_>>());
        assert!((full.measure() - 1.0).abs() < 1e-15);
        // level-5 middle-thirds cells: 2^5 cells of width 3^-5
        let cantor: Vec<i64> = (0..32i64)
            .map(|w| (0..5).map(|j| ((w >> j) & 1) * 2 * 3i64.pow(j)).sum())
            .collect();
        let set = set1(3, 5, &cantor);
        assert_eq!(set.len(), 32);
        assert!((set.measure() - 32.0 / 243.0).abs() < 1e-15);
        assert!((set.measure() - 0.131687).abs() < 1e-6);
    }

    #[test]
    fn sumset_examples() {
        let zero = set1(2, 0, &[0]);
        assert_eq!(cells1(&sumset_cells(&zero, &zero).unwrap()), vec![0, 1]);

        let thirds = set1(3, 1, &[0, 2]);
        assert_eq!(cells1(&sumset_cells(&thirds, &thirds).unwrap()), vec![0, 1, 2, 3, 4, 5]);

        let a = CellSet::from_cells(2, 2, 0, [[0, 0]]).unwrap();
        let b = CellSet::from_cells(2, 2, 0, [[1, 1]]).unwrap();
        let s = sumset_cells(&a, &b).unwrap();
        let got: Vec<Vec<i64>> = s.iter().map(<[i64]>::to_vec).collect();
        assert_eq!(got, vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
    }

    #[test]
    fn sumset_rejects_mismatched_grids() {
        let a = set1(3, 1, &[0]);
        let b = set1(3, 2, &[0]);
        assert!(matches!(sumset_cells(&a, &b), Err(Error::Mismatch(_))));
        let c = CellSet::from_cells(2, 3, 1, [[0, 0]]).unwrap();
        assert!(sumset_cells(&a, &c).is_err());
        assert!(diffset_cells(&a, &c).is_err());
    }

    #[test]
    fn diffset_examples() {
        let zero = set1(2, 0, &[0]);
        assert_eq!(cells1(&diffset_cells(&zero, &zero).unwrap()), vec![-1, 0]);
        let empty = CellSet::empty(1, 2, 0).unwrap();
        assert!(diffset_cells(&zero, &empty).unwrap().is_empty());
        assert!(sumset_cells(&empty, &zero).unwrap().is_empty());
    }

    #[test]
    fn refine_examples() {
        let s = set1(3, 0, &[0]);
        assert_eq!(s.refine(0).unwrap(), s);
        let r = s.refine(1).unwrap();
        assert_eq!(cells1(&r), vec![0, 1, 2]);
        assert_eq!(r.level(), 1);
        let sq = CellSet::from_cells(2, 2, 1, [[0, 1], [-1, 0]]).unwrap();
        let r = sq.refine(2).unwrap();
        assert_eq!(r.len(), 32);
        assert_eq!(r.measure(), sq.measure());
        assert!(r.contains(&[-4, 0]) && r.contains(&[3, 7]) && !r.contains(&[4, 4]));
    }

    #[test]
    fn csv_round_trip() {
        let s = CellSet::from_cells(2, 3, 2, [[0, -1], [4, 2]]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "2,3,2\n0,-1\n4,2\n");
        assert_eq!(CellSet::read_csv(buf.as_slice()).unwrap(), s);
        assert!(CellSet::read_csv("2,3\n".as_bytes()).is_err());
        assert!(CellSet::read_csv("1,3,2\n0,1\n".as_bytes()).is_err());
    }

    fn arb_set(dim: usize) -> impl Strategy<Value = CellSet> {
        prop::collection::vec(prop::collection::vec(-6i64..6, dim), 1..24)
            .prop_map(move |cells| CellSet::from_cells(dim, 2, 3, cells).unwrap())
    }

    fn arb_pair() -> impl Strategy<Value = (CellSet, CellSet)> {
        (1usize..=3).prop_flat_map(|d| (arb_set(d), arb_set(d)))
    }

    proptest! {
        #[test]
        fn pairwise_hash_agrees((a, b) in arb_pair()) {
            prop_assert_eq!(pairwise_minkowski(&a, &b, 0), sumset_cells_with(&a, &b, Backend::Sparse).unwrap());
            prop_assert_eq!(pairwise_minkowski(&a, &b.negated(), -1), diffset_cells(&a, &b).unwrap());
        }

        #[test]
        fn dense_and_sparse_agree((a, b) in arb_pair()) {
            let dense = sumset_cells_with(&a, &b, Backend::Dense).unwrap();
            let sparse = sumset_cells_with(&a, &b, Backend::Sparse).unwrap();
            prop_assert_eq!(&dense, &sparse);
            let dense = diffset_cells_with(&a, &b, Backend::Dense).unwrap();
            let sparse = diffset_cells_with(&a, &b, Backend::Sparse).unwrap();
            prop_assert_eq!(dense, sparse);
        }

        #[test]
        fn sumset_dominates_operands((a, b) in arb_pair()) {
            let s = sumset_cells(&a, &b).unwrap();
            prop_assert!(s.measure() >= a.measure().max(b.measure()));
        }

        #[test]
        fn sumset_commutes_and_translates((a, b) in arb_pair(), t in prop::collection::vec(-5i64..5, 3)) {
            let ab = sumset_cells(&a, &b).unwrap();
            prop_assert_eq!(&ab, &sumset_cells(&b, &a).unwrap());
            let t = &t[..a.dim()];
            let shifted = sumset_cells(&a.translate(t).unwrap(), &b).unwrap();
            prop_assert_eq!(shifted, ab.translate(t).unwrap());
        }

        #[test]
        fn sumset_with_origin(a in (1usize..=3).prop_flat_map(arb_set)) {
            let origin = CellSet::from_cells(a.dim(), 2, 3, [vec![0; a.dim()]]).unwrap();
            let s = sumset_cells(&a, &origin).unwrap();
            prop_assert!(a.is_subset(&s));
            prop_assert!(s.len() <= (1 << a.dim()) * a.len());
        }

        #[test]
        fn refine_preserves_measure_and_tightens((a, b) in arb_pair(), extra in 0u32..3) {
            let ra = a.refine(extra).unwrap();
            prop_assert!((ra.measure() - a.measure()).abs() <= 1e-15);
            let fine = sumset_cells(&ra, &b.refine(extra).unwrap()).unwrap();
            let coarse = sumset_cells(&a, &b).unwrap().refine(extra).unwrap();
            prop_assert!(fine.is_subset(&coarse));
        }
    }
}
