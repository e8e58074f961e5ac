//! Multi-level quantization of CSI magnitudes into Gray-coded bits.
//!
//! Each estimate contributes exactly `S` bits: `k = ceil(S / b)` subcarriers
//! are sampled, each mapped to one of `L` levels and its `b = ceil(log2 L)`
//! bit Gray code, and the concatenation is truncated to `S` bits.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::csi::CsiEstimate;
use crate::error::{Error, Result};

pub const MIN_LEVELS: usize = 2;
pub const MAX_LEVELS: usize = 16;
pub const MIN_BITS: usize = 2;
pub const MAX_BITS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthRule {
    EqualWidth,
    Equiprobable,
}

impl std::str::FromStr for WidthRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal_width" => Ok(WidthRule::EqualWidth),
            "equiprobable" => Ok(WidthRule::Equiprobable),
            other => Err(Error::InvalidConfig(format!("unknown width rule '{other}'"))),
        }
    }
}

impl fmt::Display for WidthRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WidthRule::EqualWidth => "equal_width",
            WidthRule::Equiprobable => "equiprobable",
        })
    }
}

/// `ceil(log2 L)`.
pub fn bits_per_level(levels: usize) -> usize {
    assert!(levels >= 2);
    (usize::BITS - (levels - 1).leading_zeros()) as usize
}

/// Reflected binary Gray code over `ceil(log2 L)` bits, MSB first, first `L` codes.
pub fn gray_codebook(levels: usize) -> Vec<Vec<bool>> {
    let width = bits_per_level(levels);
    (0..levels)
        .map(|i| {
            let g = i ^ (i >> 1);
            (0..width).rev().map(|bit| (g >> bit) & 1 == 1).collect()
        })
        .collect()
}

/// `count` subcarrier indices spread evenly over the grid, skipping the
/// inclusive `excluded` band.
pub fn sample_positions(
    num_subcarriers: usize,
    count: usize,
    excluded: Option<(usize, usize)>,
) -> Result<Vec<usize>> {
    let candidates: Vec<usize> = (0..num_subcarriers)
        .filter(|k| !matches!(excluded, Some((lo, hi)) if (lo..=hi).contains(k)))
        .collect();
    if count == 0 || count > candidates.len() {
        return Err(Error::InvalidConfig(format!(
            "cannot place {count} sample positions on {} usable subcarriers",
            candidates.len()
        )));
    }
    let len = candidates.len();
    Ok((0..count).map(|j| candidates[(2 * j + 1) * len / (2 * count)]).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizerConfig {
    pub levels: usize,
    pub width_rule: WidthRule,
    pub bits_per_estimate: usize,
    pub sample_positions: Vec<usize>,
    /// Subcarriers left out of sampling and calibration (the DC repair band).
    pub excluded: Option<(usize, usize)>,
}

impl QuantizerConfig {
    pub fn new(
        levels: usize,
        width_rule: WidthRule,
        bits_per_estimate: usize,
        num_subcarriers: usize,
        excluded: Option<(usize, usize)>,
    ) -> Result<Self> {
        if !(MIN_LEVELS..=MAX_LEVELS).contains(&levels) {
            return Err(Error::InvalidConfig(format!(
                "levels must be in [{MIN_LEVELS}, {MAX_LEVELS}], got {levels}"
            )));
        }
        if !(MIN_BITS..=MAX_BITS).contains(&bits_per_estimate) {
            return Err(Error::InvalidConfig(format!(
                "bits_per_estimate must be in [{MIN_BITS}, {MAX_BITS}], got {bits_per_estimate}"
            )));
        }
        let count = bits_per_estimate.div_ceil(bits_per_level(levels));
        let sample_positions = sample_positions(num_subcarriers, count, excluded)?;
        Ok(Self {
            levels,
            width_rule,
            bits_per_estimate,
            sample_positions,
            excluded,
        })
    }

    fn is_excluded(&self, k: usize) -> bool {
        matches!(self.excluded, Some((lo, hi)) if (lo..=hi).contains(&k))
    }
}

/// Level edges plus the Gray codebook. Values below `edges[0]` map to level
/// 0; values at or above the last edge map to level `L-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelBoundaries {
    pub edges: Vec<f64>,
    pub codebook: Vec<Vec<bool>>,
}

impl LevelBoundaries {
    fn from_edges(edges: Vec<f64>) -> Result<Self> {
        if edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Degenerate(format!("level edges not strictly increasing: {edges:?}")));
        }
        let codebook = gray_codebook(edges.len() + 1);
        Ok(Self { edges, codebook })
    }

    pub fn levels(&self) -> usize {
        self.edges.len() + 1
    }

    pub fn level_of(&self, value: f64) -> usize {
        self.edges.partition_point(|e| *e <= value)
    }
}

fn check_levels(levels: usize) -> Result<()> {
    if levels < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 levels, got {levels}")));
    }
    Ok(())
}

/// `L-1` edges splitting `[min, max]` into equal intervals.
pub fn boundaries_equal_width(samples: &[f64], levels: usize) -> Result<LevelBoundaries> {
    check_levels(levels)?;
    let finite = samples.iter().copied().filter(|v| v.is_finite());
    let (min, max) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !(max > min) {
        return Err(Error::Degenerate(format!("sample range [{min}, {max}] is empty")));
    }
    let width = (max - min) / levels as f64;
    LevelBoundaries::from_edges((1..levels).map(|j| min + width * j as f64).collect())
}

/// Fractional rank `(n-1)·p` split into its neighbouring order statistics.
fn inclusive_rank(n: usize, p: f64) -> (usize, usize, f64) {
    let mut h = (n - 1) as f64 * p;
    // (n-1)·k/L can land a hair off an integer rank; snap it back.
    if (h - h.round()).abs() < 1e-9 {
        h = h.round();
    }
    let lo = h.floor() as usize;
    (lo, h.ceil() as usize, h - lo as f64)
}

/// Quantile of sorted data by linear interpolation between order
/// statistics, position `(n-1)·p` (the inclusive convention).
pub fn quantile_inclusive(sorted: &[f64], p: f64) -> f64 {
    let (lo, hi, frac) = inclusive_rank(sorted.len(), p);
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Number of distinct values, counting no further than `limit`.
fn distinct_up_to(values: &[f64], limit: usize) -> usize {
    let mut seen: Vec<f64> = Vec::with_capacity(limit);
    for v in values {
        if !seen.contains(v) {
            seen.push(*v);
            if seen.len() == limit {
                break;
            }
        }
    }
    seen.len()
}

/// Edges at the `k/L` empirical quantiles.
pub fn boundaries_equiprobable(samples: &[f64], levels: usize) -> Result<LevelBoundaries> {
    check_levels(levels)?;
    let mut data: Vec<f64> = samples.iter().copied().filter(|v| v.is_finite()).collect();
    let distinct = distinct_up_to(&data, levels);
    if distinct < levels {
        return Err(Error::TooFewDistinct {
            needed: levels,
            found: distinct,
        });
    }
    let ranks: Vec<(usize, usize, f64)> = (1..levels)
        .map(|k| inclusive_rank(data.len(), k as f64 / levels as f64))
        .collect();
    // Successive selections on the shrinking upper part place each lower
    // order statistic; its upper neighbour is the minimum of what follows.
    let mut edges = Vec::with_capacity(ranks.len());
    let mut start = 0;
    for (lo, hi, frac) in ranks {
        if lo >= start {
            data[start..].select_nth_unstable_by(lo - start, f64::total_cmp);
            start = lo + 1;
        }
        let below = data[lo];
        let above = if hi == lo {
            below
        } else {
            data[lo + 1..].iter().copied().min_by(f64::total_cmp).expect("hi is in range")
        };
        edges.push(below + frac * (above - below));
    }
    LevelBoundaries::from_edges(edges)
}

/// Where a quantized bit came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitSource {
    pub probe_index: u64,
    pub subcarrier: usize,
}

/// Ordered bits with per-bit provenance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitStream {
    bits: Vec<bool>,
    provenance: Vec<BitSource>,
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bit: bool, source: BitSource) {
        self.bits.push(bit);
        self.provenance.push(source);
    }

    pub fn append(&mut self, other: &mut BitStream) {
        self.bits.append(&mut other.bits);
        self.provenance.append(&mut other.provenance);
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn provenance(&self) -> &[BitSource] {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

impl fmt::Display for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Quantizes one estimate's mean-normalized magnitudes to exactly `S` bits.
///
/// `bounds` must come from the same node's calibration population.
pub fn quantize_estimate(est: &CsiEstimate, cfg: &QuantizerConfig, bounds: &LevelBoundaries) -> BitStream {
    let scale = if est.mean_mag > 0.0 { est.mean_mag.recip() } else { 0.0 };
    let mut out = BitStream::new();
    'positions: for &k in &cfg.sample_positions {
        let level = bounds.level_of(est.magnitudes[k] * scale);
        for &bit in &bounds.codebook[level] {
            if out.len() == cfg.bits_per_estimate {
                break 'positions;
            }
            out.push(
                bit,
                BitSource {
                    probe_index: est.probe_index,
                    subcarrier: k,
                },
            );
        }
    }
    out
}

/// Level boundaries from every usable subcarrier of every estimate, after
/// mean normalization. Each node calibrates on its own estimates.
pub fn calibrate(estimates: &[CsiEstimate], cfg: &QuantizerConfig) -> Result<LevelBoundaries> {
    let population: Vec<f64> = estimates
        .iter()
        .flat_map(|e| {
            e.normalized()
                .into_iter()
                .enumerate()
                .filter(|(k, _)| !cfg.is_excluded(*k))
                .map(|(_, v)| v)
        })
        .collect();
    match cfg.width_rule {
        WidthRule::EqualWidth => boundaries_equal_width(&population, cfg.levels),
        WidthRule::Equiprobable => boundaries_equiprobable(&population, cfg.levels),
    }
}

/// Calibrates on `estimates` and concatenates their fragments:
/// `S · estimates.len()` bits in total.
pub fn quantize_session(estimates: &[CsiEstimate], cfg: &QuantizerConfig) -> Result<BitStream> {
    if estimates.is_empty() {
        return Ok(BitStream::new());
    }
    let bounds = calibrate(estimates, cfg)?;
    let mut out = BitStream::new();
    for est in estimates {
        out.append(&mut quantize_estimate(est, cfg, &bounds));
    }
    Ok(out)
}
