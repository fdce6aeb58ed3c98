//! Growth exponents of sumsets in the cyclic group `Z_m`.
//!
//! For a digit set `S ⊂ Z_m` the optimal exponent `γ*` is the least `γ` with
//! `|E+S|/m ≥ (|E|/m)^γ` for every `E ⊂ Z_m`. Empty and full `E` are
//! excluded (both sides are 0 or 1) and so is every `E` whose sumset is the
//! whole group, for which the inequality holds for all `γ ≥ 0`.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digits::DigitCantorSpec;
use crate::error::{invalid, Error, Result};

pub const MAX_MODULUS: u64 = 1 << 30;
/// Largest modulus for exhaustive enumeration (masks fit one machine word).
pub const MAX_EXHAUSTIVE_BITS: u32 = 27;
/// Ratios closer than this are ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// A subset of `Z_m` stored as a little-endian bitmask.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupSubset {
    modulus: u32,
    words: Vec<u64>,
}

impl GroupSubset {
    pub fn empty(modulus: u64) -> Result<Self> {
        if !(2..=MAX_MODULUS).contains(&modulus) {
            return Err(invalid("m", format!("modulus must be in [2, 2^30], got {modulus}")));
        }
        Ok(Self {
            modulus: modulus as u32,
            words: vec![0; (modulus as usize).div_ceil(64)],
        })
    }

    pub fn from_elements(modulus: u64, elements: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut set = Self::empty(modulus)?;
        for x in elements {
            if x >= modulus {
                return Err(invalid("E", format!("element {x} out of range for modulus {modulus}")));
            }
            set.insert(x as u32);
        }
        Ok(set)
    }

    pub fn full(modulus: u64) -> Result<Self> {
        Self::from_elements(modulus, 0..modulus)
    }

    fn from_word(modulus: u32, mask: u64) -> Self {
        Self {
            modulus,
            words: vec![mask],
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus as u64
    }

    pub fn insert(&mut self, x: u32) {
        self.words[x as usize / 64] |= 1 << (x % 64);
    }

    pub fn contains(&self, x: u64) -> bool {
        x < self.modulus as u64 && self.words[x as usize / 64] >> (x % 64) & 1 == 1
    }

    pub fn len(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.modulus as u64
    }

    /// Normalized counting measure `|E|/m`.
    pub fn density(&self) -> f64 {
        self.len() as f64 / self.modulus as f64
    }

    pub fn elements(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let t = bits.trailing_zeros() as u64;
                bits &= bits - 1;
                Some(k as u64 * 64 + t)
            })
        })
    }

    /// Mask as a hexadecimal integer, most significant digit first.
    pub fn mask_hex(&self) -> String {
        let top = self.words.iter().rposition(|&w| w != 0);
        match top {
            None => "0x0".to_string(),
            Some(top) => {
                let mut s = format!("0x{:x}", self.words[top]);
                for w in self.words[..top].iter().rev() {
                    s.push_str(&format!("{w:016x}"));
                }
                s
            }
        }
    }

    /// `E + t mod m`.
    pub fn rotate(&self, t: u64) -> GroupSubset {
        let m = self.modulus as u64;
        let t = t % m;
        if t == 0 {
            return self.clone();
        }
        if m <= 64 {
            return Self::from_word(self.modulus, rotate_word(self.words[0], t as u32, self.modulus));
        }
        let mut out = GroupSubset {
            modulus: self.modulus,
            words: vec![0; self.words.len()],
        };
        for x in self.elements() {
            out.insert(((x + t) % m) as u32);
        }
        out
    }

    /// `{u·x mod m : x ∈ E}`.
    pub fn scale(&self, unit: u64) -> GroupSubset {
        let m = self.modulus as u64;
        let mut out = GroupSubset {
            modulus: self.modulus,
            words: vec![0; self.words.len()],
        };
        for x in self.elements() {
            out.insert(((x as u128 * unit as u128) % m as u128) as u32);
        }
        out
    }

    /// Compares masks as unsigned integers.
    fn cmp_value(&self, other: &GroupSubset) -> Ordering {
        self.words.iter().rev().cmp(other.words.iter().rev())
    }

    /// The translate with the smallest mask value; every nonempty set's
    /// canonical form contains 0.
    pub fn canonical_translate(&self) -> GroupSubset {
        let mut best = self.clone();
        for t in 1..self.modulus as u64 {
            let r = self.rotate(t);
            if r.cmp_value(&best) == Ordering::Less {
                best = r;
            }
        }
        best
    }
}

fn rotate_word(mask: u64, t: u32, m: u32) -> u64 {
    if t == 0 {
        return mask;
    }
    let full = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    ((mask << t) | (mask >> (m - t))) & full
}

fn validate_residues(modulus: u64, digits: &[u64]) -> Result<()> {
    if digits.is_empty() {
        return Err(invalid("S", "digit set must be nonempty"));
    }
    if let Some(&bad) = digits.iter().find(|&&s| s >= modulus) {
        return Err(invalid("S", format!("digit {bad} out of range for modulus {modulus}")));
    }
    Ok(())
}

/// `E + S mod m`, the union of the shifts of `E` by the elements of `S`.
pub fn cyclic_sumset(set: &GroupSubset, digits: &[u64]) -> Result<GroupSubset> {
    validate_residues(set.modulus(), digits)?;
    let m = set.modulus;
    if m <= 64 {
        let mask = digits
            .iter()
            .fold(0u64, |acc, &s| acc | rotate_word(set.words[0], s as u32, m));
        return Ok(GroupSubset::from_word(m, mask));
    }
    let mut out = GroupSubset {
        modulus: m,
        words: vec![0; set.words.len()],
    };
    for &s in digits {
        or_rotated(&mut out.words, &set.words, s as usize, m as usize);
    }
    Ok(out)
}

/// `dst |= rotate(src, t)` over an `m`-bit ring.
fn or_rotated(dst: &mut [u64], src: &[u64], t: usize, m: usize) {
    // bits [0, m-t) move up by t; bits [m-t, m) wrap to [0, t)
    let or_range = |dst: &mut [u64], from: usize, to: usize, len: usize| {
        let mut done = 0;
        while done < len {
            let (sb, db) = (from + done, to + done);
            let chunk = (64 - sb % 64).min(64 - db % 64).min(len - done);
            let mask = if chunk == 64 { u64::MAX } else { (1u64 << chunk) - 1 };
            let bits = (src[sb / 64] >> (sb % 64)) & mask;
            dst[db / 64] |= bits << (db % 64);
            done += chunk;
        }
    };
    or_range(dst, 0, t, m - t);
    or_range(dst, m - t, 0, t);
}

/// `log(|E+S|/m) / log(|E|/m)`, or `None` when `E + S` is the whole group.
pub fn ratio(set: &GroupSubset, digits: &[u64]) -> Result<Option<f64>> {
    if set.is_empty() || set.is_full() {
        return Err(invalid("E", "ratio is undefined for the empty and the full set"));
    }
    let sum = cyclic_sumset(set, digits)?;
    let m = set.modulus() as f64;
    let sum_len = sum.len();
    if sum_len == set.modulus() {
        return Ok(None);
    }
    Ok(Some((sum_len as f64 / m).ln() / (set.len() as f64 / m).ln()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dedup {
    /// Every nonempty proper subset.
    None,
    /// One representative per translation class.
    Translation,
    /// One representative per class under translations and the unit
    /// multiples that map `S` to a translate of itself.
    TranslationAndUnits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive(Dedup),
    Random { trials: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaCertificate {
    pub modulus: u64,
    pub digits: Vec<u64>,
    pub gamma_star: f64,
    /// Canonical translate of the maximizing set; `None` when unconstrained.
    pub witness: Option<GroupSubset>,
    pub exhaustive: bool,
    /// Every enumerated `E` has `E + S = Z_m`.
    pub unconstrained: bool,
    pub evaluated: u64,
}

impl GammaCertificate {
    pub fn witness_mask_hex(&self) -> Option<String> {
        self.witness.as_ref().map(GroupSubset::mask_hex)
    }
}

#[derive(Clone, Copy)]
struct Best {
    ratio: f64,
    /// canonical mask (exhaustive masks fit in one word)
    mask: u64,
}

fn better(candidate: Best, incumbent: Option<Best>) -> bool {
    match incumbent {
        None => true,
        Some(cur) => {
            if candidate.ratio > cur.ratio + TIE_TOLERANCE {
                true
            } else if candidate.ratio >= cur.ratio - TIE_TOLERANCE {
                candidate.mask < cur.mask
            } else {
                false
            }
        }
    }
}

fn merge(a: Option<Best>, b: Option<Best>) -> Option<Best> {
    match b {
        Some(cand) if better(cand, a) => Some(cand),
        _ => a,
    }
}

/// Minimal-value rotation of an `m`-bit mask.
fn canonical_word(mask: u64, m: u32) -> u64 {
    (0..m).map(|t| rotate_word(mask, t, m)).min().unwrap_or(mask)
}

/// Binary necklaces of length `m` (lexicographically least rotations,
/// characters `a_1..a_m` mapped to bits `0..m-1`), by the
/// Fredricksen–Kessler–Maiorana algorithm.
fn for_each_necklace(m: usize, mut visit: impl FnMut(u64)) {
    let mut a = vec![0u8; m + 1];
    let to_mask = |a: &[u8]| -> u64 {
        a[1..].iter().enumerate().fold(0u64, |acc, (j, &c)| acc | ((c as u64) << j))
    };
    visit(0);
    let mut i = m;
    loop {
        a[i] += 1;
        for j in 1..=m - i {
            a[i + j] = a[j];
        }
        if m % i == 0 {
            visit(to_mask(&a));
        }
        i = m;
        while i > 0 && a[i] == 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
    }
}

/// Lexicographic key of a mask read as the string `a_1..a_m`.
fn necklace_key(mask: u64, m: u32) -> u64 {
    mask.reverse_bits() >> (64 - m)
}

fn necklace_canonical_key(mask: u64, m: u32) -> u64 {
    (0..m).map(|t| necklace_key(rotate_word(mask, t, m), m)).min().unwrap_or(0)
}

fn units(m: u64) -> Vec<u64> {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    (1..m).filter(|&u| gcd(u, m) == 1).collect()
}

fn scale_word(mask: u64, unit: u64, m: u32) -> u64 {
    let mut out = 0u64;
    let mut bits = mask;
    while bits != 0 {
        let x = bits.trailing_zeros() as u64;
        bits &= bits - 1;
        out |= 1 << ((x * unit) % m as u64);
    }
    out
}

/// Units `u` with `u·S` a translate of `S`. Multiplying `E` by such a unit
/// preserves `|E + S|`, since `|uE + S| = |E + u⁻¹S|`.
fn stabilizing_units(m: u32, digits: &[u64]) -> Vec<u64> {
    let mask = digits.iter().fold(0u64, |acc, &s| acc | 1 << s);
    let canon = canonical_word(mask, m);
    units(m as u64)
        .into_iter()
        .filter(|&u| canonical_word(scale_word(mask, u, m), m) == canon)
        .collect()
}

/// Candidate subsets for exhaustive search under the requested dedup.
fn exhaustive_candidates(m: u32, digits: &[u64], dedup: Dedup) -> Vec<u64> {
    let full = (1u64 << m) - 1;
    match dedup {
        Dedup::None => (1..full).collect(),
        Dedup::Translation | Dedup::TranslationAndUnits => {
            let unit_list = stabilizing_units(m, digits);
            let mut out = Vec::new();
            for_each_necklace(m as usize, |mask| {
                if mask == 0 || mask == full {
                    return;
                }
                if dedup == Dedup::TranslationAndUnits {
                    let key = necklace_key(mask, m);
                    let dominated = unit_list
                        .iter()
                        .any(|&u| necklace_canonical_key(scale_word(mask, u, m), m) < key);
                    if dominated {
                        return;
                    }
                }
                out.push(mask);
            });
            out
        }
    }
}

/// Computes `γ*` for `S ⊂ Z_m` by exhaustive enumeration or random sampling.
pub fn best_gamma(modulus: u64, digits: &[u64], mode: SearchMode) -> Result<GammaCertificate> {
    if !(2..=MAX_MODULUS).contains(&modulus) {
        return Err(invalid("m", format!("modulus must be in [2, 2^30], got {modulus}")));
    }
    validate_residues(modulus, digits)?;
    let mut digits = digits.to_vec();
    digits.sort_unstable();
    digits.dedup();
    match mode {
        SearchMode::Exhaustive(dedup) => exhaustive_gamma(modulus, digits, dedup),
        SearchMode::Random { trials, seed } => random_gamma(modulus, digits, trials, seed),
    }
}

fn exhaustive_gamma(modulus: u64, digits: Vec<u64>, dedup: Dedup) -> Result<GammaCertificate> {
    if modulus > MAX_EXHAUSTIVE_BITS as u64 {
        return Err(Error::BudgetExceeded(format!(
            "exhaustive search over Z_{modulus} exceeds the {MAX_EXHAUSTIVE_BITS}-bit enumeration budget"
        )));
    }
    let m = modulus as u32;
    let candidates = exhaustive_candidates(m, &digits, dedup);
    let log_density: Vec<f64> = (0..=modulus).map(|c| (c as f64 / modulus as f64).ln()).collect();
    let shifts: Vec<u32> = digits.iter().map(|&s| s as u32).collect();

    let chunk_best: Vec<Option<Best>> = candidates
        .par_chunks(1 << 14)
        .map(|chunk| {
            let mut best = None;
            for &mask in chunk {
                let sum = shifts.iter().fold(0u64, |acc, &s| acc | rotate_word(mask, s, m));
                let sum_len = sum.count_ones() as usize;
                if sum_len == m as usize {
                    continue;
                }
                let ratio = log_density[sum_len] / log_density[mask.count_ones() as usize];
                let incumbent: Option<Best> = best;
                // canonicalize only candidates that can win
                if incumbent.is_some_and(|b: Best| ratio < b.ratio - TIE_TOLERANCE) {
                    continue;
                }
                let cand = Best {
                    ratio,
                    mask: canonical_word(mask, m),
                };
                if better(cand, best) {
                    best = Some(cand);
                }
            }
            best
        })
        .collect();
    let best = chunk_best.into_iter().fold(None, merge);

    Ok(GammaCertificate {
        modulus,
        digits,
        gamma_star: best.map_or(0.0, |b| b.ratio),
        witness: best.map(|b| GroupSubset::from_word(m, b.mask)),
        exhaustive: true,
        unconstrained: best.is_none(),
        evaluated: candidates.len() as u64,
    })
}

/// Inclusion probabilities used for random subsets, chosen per trial.
pub const RANDOM_DENSITIES: [f64; 3] = [0.125, 0.25, 0.5];

/// Random nonempty proper subset; each trial picks a density from
/// [`RANDOM_DENSITIES`] and includes each element independently.
pub fn random_subset(modulus: u64, rng: &mut impl Rng) -> GroupSubset {
    let p = RANDOM_DENSITIES[rng.gen_range(0..RANDOM_DENSITIES.len())];
    loop {
        let mut set = GroupSubset::empty(modulus).expect("modulus validated by caller");
        for x in 0..modulus {
            if rng.gen_bool(p) {
                set.insert(x as u32);
            }
        }
        if !set.is_empty() && !set.is_full() {
            return set;
        }
    }
}

fn random_gamma(modulus: u64, digits: Vec<u64>, trials: u64, seed: u64) -> Result<GammaCertificate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, GroupSubset)> = None;
    for _ in 0..trials {
        let set = random_subset(modulus, &mut rng);
        let Some(r) = ratio(&set, &digits)? else {
            continue;
        };
        let wins = match &best {
            None => true,
            Some((cur, _)) if r > cur + TIE_TOLERANCE => true,
            Some((cur, w)) if r >= cur - TIE_TOLERANCE => {
                set.canonical_translate().cmp_value(w) == Ordering::Less
            }
            _ => false,
        };
        if wins {
            best = Some((r, set.canonical_translate()));
        }
    }
    Ok(GammaCertificate {
        modulus,
        digits,
        gamma_star: best.as_ref().map_or(0.0, |b| b.0),
        unconstrained: best.is_none(),
        witness: best.map(|b| b.1),
        exhaustive: false,
        evaluated: trials,
    })
}

/// Residues `Σ_{j=1..L} s_j n^{L-j}` of the level-`L` digit strings, sorted.
pub fn level_digit_set(spec: &DigitCantorSpec, level: u32) -> Result<Vec<u64>> {
    if level == 0 {
        return Err(invalid("L", "level must be ≥ 1"));
    }
    let n = spec.base() as u64;
    let modulus = n
        .checked_pow(level)
        .filter(|&m| m <= MAX_MODULUS)
        .ok_or_else(|| Error::BudgetExceeded(format!("{n}^{level} exceeds 2^30")))?;
    let _ = modulus;
    let mut out = vec![0u64];
    for _ in 0..level {
        out = out
            .iter()
            .flat_map(|&prefix| spec.digits().iter().map(move |&s| prefix * n + s as u64))
            .collect();
    }
    out.sort_unstable();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DigitSetResult {
    pub digits: Vec<u64>,
    pub gamma_star: f64,
    pub unconstrained: bool,
    pub flagged: bool,
}

/// Upper bound on `C(n-1, size-1) · (candidates per set)` for digit-set search.
pub const SEARCH_BUDGET: u128 = 1 << 34;

/// All digit sets of the given size containing 0, each with its exhaustive
/// `γ*`; sets with `γ* ≤ target + 1e-12` are flagged.
pub fn search_digit_sets(n: u64, size: usize, target_gamma: f64) -> Result<Vec<DigitSetResult>> {
    if size == 0 || size as u64 > n {
        return Err(invalid("size", format!("size must be in 1..={n}")));
    }
    if n > MAX_EXHAUSTIVE_BITS as u64 {
        return Err(Error::BudgetExceeded(format!("n = {n} exceeds the exhaustive budget")));
    }
    let sets = binomial(n - 1, size as u64 - 1);
    let per_set = (1u128 << n) / n as u128;
    if sets * per_set > SEARCH_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "{sets} digit sets over Z_{n} exceed the search budget"
        )));
    }
    let mut results = Vec::new();
    let mut rest = Vec::with_capacity(size - 1);
    combinations(1, n, size - 1, &mut rest, &mut |tail| -> Result<()> {
        let mut digits = vec![0u64];
        digits.extend_from_slice(tail);
        let cert = best_gamma(n, &digits, SearchMode::Exhaustive(Dedup::Translation))?;
        let gamma_effective = if cert.unconstrained { 0.0 } else { cert.gamma_star };
        results.push(DigitSetResult {
            digits,
            gamma_star: cert.gamma_star,
            unconstrained: cert.unconstrained,
            flagged: gamma_effective <= target_gamma + TIE_TOLERANCE,
        });
        Ok(())
    })?;
    Ok(results)
}

fn binomial(n: u64, k: u64) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn combinations(
    start: u64,
    end: u64,
    k: usize,
    chosen: &mut Vec<u64>,
    visit: &mut impl FnMut(&[u64]) -> Result<()>,
) -> Result<()> {
    if chosen.len() == k {
        return visit(chosen);
    }
    for x in start..end {
        chosen.push(x);
        combinations(x + 1, end, k, chosen, visit)?;
        chosen.pop();
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthViolation {
    pub mask_hex: String,
    pub size: u64,
    pub sumset_size: u64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassGrowthReport {
    pub modulus: u64,
    pub level: u32,
    pub gamma: f64,
    pub trials: u64,
    pub seed: u64,
    pub violations: u64,
    /// Largest `log m̃(E+S) / log m̃(E)` seen over trials with non-full sumsets.
    pub max_ratio: Option<f64>,
    /// First few violating sets, in trial order.
    pub witnesses: Vec<GrowthViolation>,
}

pub const MAX_RANDOM_MODULUS: u64 = 1 << 24;
const MAX_REPORTED_WITNESSES: usize = 16;

/// Checks `|E + S^{(L)}|/n^L ≥ (|E|/n^L)^γ` on random `E ⊂ Z_{n^L}`.
pub fn random_mass_growth_check(
    spec: &DigitCantorSpec,
    level: u32,
    gamma: f64,
    trials: u64,
    seed: u64,
) -> Result<MassGrowthReport> {
    let n = spec.base() as u64;
    let modulus = n
        .checked_pow(level)
        .filter(|&m| m <= MAX_RANDOM_MODULUS)
        .ok_or_else(|| Error::BudgetExceeded(format!("{n}^{level} exceeds 2^24")))?;
    let digits = level_digit_set(spec, level)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = MassGrowthReport {
        modulus,
        level,
        gamma,
        trials,
        seed,
        violations: 0,
        max_ratio: None,
        witnesses: Vec::new(),
    };
    for _ in 0..trials {
        let set = random_subset(modulus, &mut rng);
        let sum = cyclic_sumset(&set, &digits)?;
        let lhs = sum.density();
        let rhs = set.density().powf(gamma);
        if sum.len() < modulus {
            let r = lhs.ln() / set.density().ln();
            report.max_ratio = Some(report.max_ratio.map_or(r, |cur: f64| cur.max(r)));
        }
        if lhs < rhs - TIE_TOLERANCE {
            report.violations += 1;
            if report.witnesses.len() < MAX_REPORTED_WITNESSES {
                report.witnesses.push(GrowthViolation {
                    mask_hex: set.mask_hex(),
                    size: set.len(),
                    sumset_size: sum.len(),
                    lhs,
                    rhs,
                });
            }
        }
    }
    Ok(report)
}
