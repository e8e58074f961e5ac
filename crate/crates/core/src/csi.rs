//! Cleaning of raw CSI observations: frame averaging, DC repair,
//! elimination of static or noisy estimates, reciprocity statistics.

use serde::{Deserialize, Serialize};

use crate::channel::{Node, RawObservation};
use crate::error::{Error, Result};

/// Magnitude CSI for one probe at one node, with summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsiEstimate {
    pub probe_index: u64,
    pub node: Node,
    pub timestamp_ms: f64,
    pub magnitudes: Vec<f64>,
    pub mean_mag: f64,
    /// Variance of magnitudes across subcarriers.
    pub variance: f64,
    pub snr_proxy_db: f64,
}

impl CsiEstimate {
    pub fn new(probe_index: u64, node: Node, timestamp_ms: f64, magnitudes: Vec<f64>) -> Self {
        let (mean_mag, variance) = mean_and_variance(&magnitudes);
        let snr_proxy_db = snr_proxy_db(&magnitudes);
        Self {
            probe_index,
            node,
            timestamp_ms,
            magnitudes,
            mean_mag,
            variance,
            snr_proxy_db,
        }
    }

    pub fn from_observation(obs: &RawObservation) -> Self {
        Self::new(obs.probe_index, obs.node, obs.timestamp_ms, obs.magnitudes.clone())
    }

    /// Same estimate with different magnitudes; statistics recomputed.
    pub fn with_magnitudes(&self, magnitudes: Vec<f64>) -> Self {
        Self::new(self.probe_index, self.node, self.timestamp_ms, magnitudes)
    }

    /// Magnitudes divided by their mean. Removes per-node gain mismatch.
    pub fn normalized(&self) -> Vec<f64> {
        if self.mean_mag > 0.0 {
            self.magnitudes.iter().map(|m| m / self.mean_mag).collect()
        } else {
            vec![0.0; self.magnitudes.len()]
        }
    }
}

fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

/// Centered moving average; the window is truncated at the grid edges.
fn moving_average(values: &[f64], half_width: usize) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half_width);
            let hi = (i + half_width + 1).min(n);
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// `10·log10(mean² / var(residual))`, where the residual is the estimate
/// minus its 5-point moving average.
///
/// The channel is smooth across neighbouring subcarriers while noise is not,
/// so the residual tracks the noise floor without ground truth.
pub fn snr_proxy_db(magnitudes: &[f64]) -> f64 {
    let (mean, _) = mean_and_variance(magnitudes);
    let smooth = moving_average(magnitudes, 2);
    let residual: Vec<f64> = magnitudes.iter().zip(&smooth).map(|(m, s)| m - s).collect();
    let (_, noise) = mean_and_variance(&residual);
    if mean <= 0.0 {
        f64::NEG_INFINITY
    } else if noise <= 0.0 {
        f64::INFINITY
    } else {
        10.0 * (mean * mean / noise).log10()
    }
}

/// Element-wise mean of equal-length magnitude vectors.
pub fn average_frames(frames: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = frames.first().ok_or(Error::EmptyInput("no frames to average"))?;
    let mut acc = vec![0.0; first.len()];
    for frame in frames {
        if frame.len() != acc.len() {
            return Err(Error::LengthMismatch {
                left: acc.len(),
                right: frame.len(),
            });
        }
        acc.iter_mut().zip(frame).for_each(|(a, v)| *a += v);
    }
    let n = frames.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}

/// Replaces `center ± window` with a straight line between the nearest
/// untouched neighbours. Everything outside the band is left as is.
pub fn suppress_dc(est: &CsiEstimate, center: usize, window: usize) -> Result<CsiEstimate> {
    let len = est.magnitudes.len();
    let too_large = Error::WindowTooLarge { center, window, len };
    if window == 0 || center < window + 1 || center + window + 1 >= len {
        return Err(too_large);
    }
    let left = center - window - 1;
    let right = center + window + 1;
    let (y0, y1) = (est.magnitudes[left], est.magnitudes[right]);
    let span = (right - left) as f64;
    let mut mags = est.magnitudes.clone();
    for (i, m) in mags.iter_mut().enumerate().take(right).skip(left + 1) {
        let t = (i - left) as f64 / span;
        *m = y0 + (y1 - y0) * t;
    }
    Ok(est.with_magnitudes(mags))
}

/// Thresholds for discarding estimates before quantization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminationPolicy {
    #[serde(with = "crate::config::extended_float")]
    pub min_snr_proxy_db: f64,
    /// Minimum RMS distance between mean-normalized magnitude vectors.
    pub min_temporal_delta: f64,
}

impl Default for EliminationPolicy {
    fn default() -> Self {
        Self {
            min_snr_proxy_db: 10.0,
            min_temporal_delta: 0.1,
        }
    }
}

impl EliminationPolicy {
    /// Keeps everything.
    pub fn vacuous() -> Self {
        Self {
            min_snr_proxy_db: f64::NEG_INFINITY,
            min_temporal_delta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_snr_proxy_db.is_nan() || self.min_snr_proxy_db == f64::INFINITY {
            return Err(Error::InvalidConfig("min_snr_proxy_db must be below +inf".into()));
        }
        if !(self.min_temporal_delta >= 0.0) || !self.min_temporal_delta.is_finite() {
            return Err(Error::InvalidConfig("min_temporal_delta must be finite and nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    LowSnr,
    Static,
}

impl DropReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::LowSnr => "low_snr",
            DropReason::Static => "static",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Elimination {
    pub kept: Vec<CsiEstimate>,
    pub dropped: Vec<(CsiEstimate, DropReason)>,
}

impl Elimination {
    pub fn count(&self, reason: DropReason) -> usize {
        self.dropped.iter().filter(|(_, r)| *r == reason).count()
    }
}

/// RMS difference of the two mean-normalized magnitude vectors.
pub fn normalized_distance(a: &CsiEstimate, b: &CsiEstimate) -> f64 {
    let (na, nb) = (a.normalized(), b.normalized());
    let n = na.len().max(1) as f64;
    (na.iter().zip(&nb).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / n).sqrt()
}

/// Splits a time-ordered stream into kept and dropped estimates.
///
/// Low-SNR estimates are dropped first. An estimate too close to the last
/// *kept* estimate of the same node is dropped as static, so slow drift
/// cannot slip through in small steps.
pub fn eliminate(estimates: &[CsiEstimate], policy: &EliminationPolicy) -> Elimination {
    let mut out = Elimination::default();
    let mut last_kept: [Option<usize>; 3] = [None; 3];
    for est in estimates {
        let slot = est.node as usize;
        if est.snr_proxy_db < policy.min_snr_proxy_db {
            out.dropped.push((est.clone(), DropReason::LowSnr));
            continue;
        }
        if let Some(prev) = last_kept[slot] {
            if normalized_distance(est, &out.kept[prev]) < policy.min_temporal_delta {
                out.dropped.push((est.clone(), DropReason::Static));
                continue;
            }
        }
        last_kept[slot] = Some(out.kept.len());
        out.kept.push(est.clone());
    }
    out
}

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.is_empty() {
        return None;
    }
    let (ma, _) = mean_and_variance(a);
    let (mb, _) = mean_and_variance(b);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSummary {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    pub defined: usize,
    pub undefined: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReciprocityStats {
    pub per_probe: Vec<Option<f64>>,
    /// `None` when no probe had a defined correlation.
    pub summary: Option<CorrelationSummary>,
}

/// Per-probe Pearson correlation between two nodes' magnitude vectors.
pub fn reciprocity_stats(a: &[CsiEstimate], b: &[CsiEstimate]) -> Result<ReciprocityStats> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let mut per_probe = Vec::with_capacity(a.len());
    for (position, (x, y)) in a.iter().zip(b).enumerate() {
        if x.probe_index != y.probe_index {
            return Err(Error::ProbeMismatch {
                position,
                left: x.probe_index,
                right: y.probe_index,
            });
        }
        if x.magnitudes.len() != y.magnitudes.len() {
            return Err(Error::LengthMismatch {
                left: x.magnitudes.len(),
                right: y.magnitudes.len(),
            });
        }
        per_probe.push(pearson(&x.magnitudes, &y.magnitudes));
    }
    let defined: Vec<f64> = per_probe.iter().flatten().copied().collect();
    let summary = (!defined.is_empty()).then(|| CorrelationSummary {
        min: defined.iter().copied().fold(f64::INFINITY, f64::min),
        max: defined.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: defined.iter().sum::<f64>() / defined.len() as f64,
        defined: defined.len(),
        undefined: per_probe.len() - defined.len(),
    });
    Ok(ReciprocityStats { per_probe, summary })
}

/// Mean over subcarriers of the variance across probes.
fn temporal_variance(estimates: &[CsiEstimate]) -> Result<f64> {
    let first = estimates.first().ok_or(Error::EmptyInput("no estimates"))?;
    let n = first.magnitudes.len();
    // Shifted by the first estimate so a constant series gives exactly zero.
    let shift = &first.magnitudes;
    let mut sum = vec![0.0; n];
    let mut sum_sq = vec![0.0; n];
    for est in estimates {
        if est.magnitudes.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: est.magnitudes.len(),
            });
        }
        for (k, m) in est.magnitudes.iter().enumerate() {
            let d = m - shift[k];
            sum[k] += d;
            sum_sq[k] += d * d;
        }
    }
    let count = estimates.len() as f64;
    let total: f64 = sum
        .iter()
        .zip(&sum_sq)
        .map(|(s, q)| (q / count - (s / count).powi(2)).max(0.0))
        .sum();
    Ok(total / n.max(1) as f64)
}

/// Ratio of mean per-subcarrier temporal variance, dynamic over static.
pub fn variance_ratio(dynamic: &[CsiEstimate], static_: &[CsiEstimate]) -> Result<f64> {
    let d = temporal_variance(dynamic)?;
    let s = temporal_variance(static_)?;
    if s <= 0.0 {
        return Err(Error::Degenerate("static estimates have zero temporal variance".into()));
    }
    Ok(d / s)
}
