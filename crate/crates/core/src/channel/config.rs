use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::bessel::bessel_j0;
use super::Node;
use crate::error::{Error, Result};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// OFDM resource grid. Defaults to a 20 MHz n78 carrier with 30 kHz spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfdmConfig {
    pub bandwidth_hz: f64,
    pub subcarrier_spacing_hz: f64,
    pub num_subcarriers: usize,
    pub center_frequency_hz: f64,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        Self {
            bandwidth_hz: 20e6,
            subcarrier_spacing_hz: 30e3,
            num_subcarriers: 612,
            center_frequency_hz: 3.75e9,
        }
    }
}

impl OfdmConfig {
    pub fn validate(&self) -> Result<()> {
        positive("bandwidth_hz", self.bandwidth_hz)?;
        positive("subcarrier_spacing_hz", self.subcarrier_spacing_hz)?;
        positive("center_frequency_hz", self.center_frequency_hz)?;
        if self.num_subcarriers == 0 {
            return Err(invalid("num_subcarriers must be positive"));
        }
        let occupied = self.num_subcarriers as f64 * self.subcarrier_spacing_hz;
        if occupied > self.bandwidth_hz * 1.02 {
            return Err(invalid(format!(
                "{} subcarriers at {} Hz occupy {occupied} Hz, more than the {} Hz band",
                self.num_subcarriers, self.subcarrier_spacing_hz, self.bandwidth_hz
            )));
        }
        Ok(())
    }

    /// Index of the subcarrier sitting on the carrier frequency.
    pub fn dc_index(&self) -> usize {
        self.num_subcarriers / 2
    }

    /// Baseband frequency of subcarrier `k` relative to the carrier.
    pub fn subcarrier_offset_hz(&self, k: usize) -> f64 {
        (k as f64 - self.dc_index() as f64) * self.subcarrier_spacing_hz
    }

    /// Time resolution of the grid, `1 / (N·Δf)`.
    pub fn sample_period_s(&self) -> f64 {
        1.0 / (self.num_subcarriers as f64 * self.subcarrier_spacing_hz)
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.center_frequency_hz
    }
}

/// TDD frame split between uplink, downlink and an idle guard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TddPattern {
    pub period_ms: f64,
    pub uplink_ms: f64,
    pub downlink_ms: f64,
    pub guard_ms: f64,
}

impl Default for TddPattern {
    fn default() -> Self {
        Self {
            period_ms: 5.0,
            uplink_ms: 2.0,
            downlink_ms: 2.5,
            guard_ms: 0.5,
        }
    }
}

impl TddPattern {
    pub fn validate(&self) -> Result<()> {
        positive("period_ms", self.period_ms)?;
        positive("uplink_ms", self.uplink_ms)?;
        positive("downlink_ms", self.downlink_ms)?;
        if !(self.guard_ms >= 0.0) {
            return Err(invalid("guard_ms must be nonnegative"));
        }
        let total = self.uplink_ms + self.downlink_ms + self.guard_ms;
        if (total - self.period_ms).abs() > 1e-9 * self.period_ms {
            return Err(invalid(format!(
                "uplink + downlink + guard = {total} ms, period is {} ms",
                self.period_ms
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DopplerMode {
    Static,
    Dynamic,
}

impl std::str::FromStr for DopplerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(DopplerMode::Static),
            "dynamic" => Ok(DopplerMode::Dynamic),
            other => Err(invalid(format!("unknown doppler mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for DopplerMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DopplerMode::Static => "static",
            DopplerMode::Dynamic => "dynamic",
        })
    }
}

/// Tapped-delay-line Rayleigh fading parameters.
///
/// Tap `i` sits at delay `i · tap_spacing_samples` grid samples, so taps are
/// orthogonal over the subcarrier grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FadingConfig {
    pub tap_power_profile: Vec<f64>,
    pub tap_spacing_samples: usize,
    pub coherence_time_ms: f64,
    pub doppler_mode: DopplerMode,
    pub rng_seed: u64,
}

impl Default for FadingConfig {
    fn default() -> Self {
        Self {
            tap_power_profile: exponential_profile(8, 1.5),
            tap_spacing_samples: 1,
            coherence_time_ms: 50.0,
            doppler_mode: DopplerMode::Dynamic,
            rng_seed: 1,
        }
    }
}

/// Power profile decaying by `decay_db` per tap, normalized to unit sum.
pub fn exponential_profile(num_taps: usize, decay_db: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..num_taps)
        .map(|i| 10f64.powf(-decay_db * i as f64 / 10.0))
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / total).collect()
}

impl FadingConfig {
    pub fn num_taps(&self) -> usize {
        self.tap_power_profile.len()
    }

    pub fn validate(&self, ofdm: &OfdmConfig) -> Result<()> {
        if self.tap_power_profile.is_empty() {
            return Err(invalid("tap_power_profile must hold at least one tap"));
        }
        if self.tap_power_profile.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(invalid("tap powers must be finite and nonnegative"));
        }
        let total: f64 = self.tap_power_profile.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(invalid(format!("tap_power_profile sums to {total}, expected 1")));
        }
        if self.tap_spacing_samples == 0 {
            return Err(invalid("tap_spacing_samples must be positive"));
        }
        if (self.num_taps() - 1) * self.tap_spacing_samples >= ofdm.num_subcarriers {
            return Err(invalid("tap delays exceed the grid's unambiguous delay range"));
        }
        positive("coherence_time_ms", self.coherence_time_ms)
    }
}

/// Per-node receiver impairments and measurement skew.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpairmentConfig {
    /// Per-frame SNR; `inf` disables noise.
    #[serde(with = "crate::config::extended_float")]
    pub snr_db: f64,
    pub dc_offset_magnitude: f64,
    pub dc_offset_node: Node,
    pub hardware_asymmetry_db: f64,
    pub probe_timing_offset_ms: f64,
}

impl Default for ImpairmentConfig {
    fn default() -> Self {
        Self {
            snr_db: 25.0,
            dc_offset_magnitude: 0.0,
            dc_offset_node: Node::Alice,
            hardware_asymmetry_db: 0.0,
            probe_timing_offset_ms: 0.0,
        }
    }
}

impl ImpairmentConfig {
    pub fn validate(&self, tdd: &TddPattern) -> Result<()> {
        if self.snr_db.is_nan() {
            return Err(invalid("snr_db must be a number"));
        }
        nonnegative("dc_offset_magnitude", self.dc_offset_magnitude)?;
        nonnegative("hardware_asymmetry_db", self.hardware_asymmetry_db)?;
        nonnegative("probe_timing_offset_ms", self.probe_timing_offset_ms)?;
        if self.probe_timing_offset_ms >= tdd.period_ms {
            return Err(invalid(format!(
                "probe_timing_offset_ms {} must be below the TDD period {}",
                self.probe_timing_offset_ms, tdd.period_ms
            )));
        }
        Ok(())
    }

    /// Complex noise power relative to unit mean channel power.
    pub fn noise_power(&self) -> f64 {
        10f64.powf(-self.snr_db / 10.0)
    }

    /// Linear amplitude gain applied at `node`. Bob carries the full mismatch.
    pub fn node_gain(&self, node: Node) -> f64 {
        match node {
            Node::Bob => 10f64.powf(self.hardware_asymmetry_db / 20.0),
            Node::Alice | Node::Eve => 1.0,
        }
    }
}

/// Eavesdropper distance from the nearest legitimate node, in carrier wavelengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvePlacement {
    pub distance_wavelengths: f64,
}

impl Default for EvePlacement {
    fn default() -> Self {
        Self {
            distance_wavelengths: 0.5,
        }
    }
}

impl EvePlacement {
    /// Tap correlation with the legitimate link: `J0(2π·d/λ)` clamped to `[0, 1]`.
    pub fn tap_correlation(&self) -> f64 {
        bessel_j0(2.0 * PI * self.distance_wavelengths).clamp(0.0, 1.0)
    }

    pub fn distance_m(&self, ofdm: &OfdmConfig) -> f64 {
        self.distance_wavelengths * ofdm.wavelength_m()
    }
}

/// Everything needed to generate one probing session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub ofdm: OfdmConfig,
    pub tdd: TddPattern,
    pub fading: FadingConfig,
    pub impairments: ImpairmentConfig,
    pub eve: EvePlacement,
    /// Noisy frames averaged into each observation.
    pub frames_per_probe: usize,
    pub duration_s: f64,
    pub probe_interval_ms: f64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            ofdm: OfdmConfig::default(),
            tdd: TddPattern::default(),
            fading: FadingConfig::default(),
            impairments: ImpairmentConfig::default(),
            eve: EvePlacement::default(),
            frames_per_probe: 4,
            duration_s: 5.0,
            probe_interval_ms: 10.0,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        self.ofdm.validate()?;
        self.tdd.validate()?;
        self.fading.validate(&self.ofdm)?;
        self.impairments.validate(&self.tdd)?;
        positive("distance_wavelengths", self.eve.distance_wavelengths)?;
        if self.frames_per_probe == 0 {
            return Err(invalid("frames_per_probe must be positive"));
        }
        nonnegative("duration_s", self.duration_s)?;
        if !(self.probe_interval_ms >= self.tdd.period_ms) || !self.probe_interval_ms.is_finite() {
            return Err(invalid(format!(
                "probe_interval_ms {} must be at least the TDD period {}",
                self.probe_interval_ms, self.tdd.period_ms
            )));
        }
        Ok(())
    }

    /// `floor(duration · 1000 / interval)`.
    pub fn num_probes(&self) -> u64 {
        // Round away float noise such as 5.0 * 1000 / 10 = 499.99999.
        let exact = self.duration_s * 1000.0 / self.probe_interval_ms;
        (exact + 1e-9).floor() as u64
    }

    /// Non-fatal modelling caveats worth surfacing in reports.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.fading.num_taps() < 2 {
            out.push("single-tap channel is flat fading; bits will repeat across subcarriers".into());
        }
        if self.fading.coherence_time_ms <= self.tdd.period_ms {
            out.push(format!(
                "coherence time {} ms does not exceed the TDD period {} ms; reciprocity is not assured",
                self.fading.coherence_time_ms, self.tdd.period_ms
            ));
        }
        if self.eve.distance_wavelengths < 0.5 {
            out.push(format!(
                "eve is {} wavelengths away, inside the half-wavelength decorrelation distance",
                self.eve.distance_wavelengths
            ));
        }
        out
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be nonnegative and finite, got {v}")))
    }
}
