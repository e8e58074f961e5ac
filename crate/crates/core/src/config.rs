//! Pipeline configuration and the flat `key = value` file format.
//!
//! Keys mirror the field names of the configuration types, e.g.
//! `snr_db = 30`, `doppler_mode = static`, `levels = 7`. Blank lines and
//! `#` comments are ignored. Flag overrides use the same keys and win over
//! the file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{exponential_profile, DopplerMode, Node, SessionConfig};
use crate::csi::EliminationPolicy;
use crate::error::{Error, Result};
use crate::quantizer::WidthRule;

const DEFAULT_TAP_DECAY_DB: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Simulation,
    Trace(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub source: Source,
    pub session: SessionConfig,
    /// Subcarriers repaired on each side of the DC bin; 0 disables repair.
    pub dc_window: usize,
    pub elimination: EliminationPolicy,
    /// Node whose estimates drive elimination; the kept probe indices are
    /// shared with the other nodes.
    pub coordinator: Node,
    pub levels: usize,
    pub width_rule: WidthRule,
    pub bits_per_estimate: usize,
    pub bias_tolerance: f64,
    /// Also simulate a twin session in the opposite Doppler mode and report
    /// the dynamic/static variance ratio.
    pub variance_reference: bool,
    /// Include raw quantized streams in the report.
    pub insecure_debug: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            source: Source::Simulation,
            session: SessionConfig::default(),
            dc_window: 1,
            elimination: EliminationPolicy::default(),
            coordinator: Node::Bob,
            levels: 4,
            width_rule: WidthRule::Equiprobable,
            bits_per_estimate: 3,
            bias_tolerance: crate::entropy::DEFAULT_BIAS_TOLERANCE,
            variance_reference: false,
            insecure_debug: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.source == Source::Simulation {
            self.session.validate()?;
        }
        self.elimination.validate()?;
        if self.coordinator == Node::Eve {
            return Err(Error::InvalidConfig("coordinator must be alice or bob".into()));
        }
        if !(0.0..=0.5).contains(&self.bias_tolerance) {
            return Err(Error::InvalidConfig(format!(
                "bias_tolerance must be in [0, 0.5], got {}",
                self.bias_tolerance
            )));
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.session.fading.rng_seed
    }

    /// Reads a config file and applies `overrides` on top.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut pairs = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                parse_pairs(&text)?
            }
            None => BTreeMap::new(),
        };
        for (k, v) in overrides {
            pairs.insert(k.clone(), v.clone());
        }
        Self::from_pairs(&pairs)
    }

    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply(pairs)?;
        Ok(cfg)
    }

    /// Applies key/value pairs. The tap profile keys are resolved together,
    /// so their order does not matter.
    pub fn apply(&mut self, pairs: &BTreeMap<String, String>) -> Result<()> {
        let num_taps = pairs.get("num_taps").map(|v| parse::<usize>("num_taps", v)).transpose()?;
        let decay = pairs
            .get("tap_decay_db")
            .map(|v| parse::<f64>("tap_decay_db", v))
            .transpose()?;
        if num_taps.is_some() || decay.is_some() {
            let n = num_taps.unwrap_or(self.session.fading.num_taps());
            if n == 0 {
                return Err(Error::InvalidConfig("num_taps must be positive".into()));
            }
            self.session.fading.tap_power_profile = exponential_profile(n, decay.unwrap_or(DEFAULT_TAP_DECAY_DB));
        }
        for (key, value) in pairs {
            match key.as_str() {
                "num_taps" | "tap_decay_db" => {}
                _ => self.set(key, value)?,
            }
        }
        Ok(())
    }

    /// Sets one key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let s = &mut self.session;
        let v = value.trim();
        match key {
            "source" => {
                self.source = match v {
                    "simulation" => Source::Simulation,
                    other => Source::Trace(PathBuf::from(other)),
                }
            }
            "trace" => self.source = Source::Trace(PathBuf::from(v)),
            "bandwidth_hz" => s.ofdm.bandwidth_hz = parse(key, v)?,
            "subcarrier_spacing_hz" => s.ofdm.subcarrier_spacing_hz = parse(key, v)?,
            "num_subcarriers" => s.ofdm.num_subcarriers = parse(key, v)?,
            "center_frequency_hz" => s.ofdm.center_frequency_hz = parse(key, v)?,
            "period_ms" => s.tdd.period_ms = parse(key, v)?,
            "uplink_ms" => s.tdd.uplink_ms = parse(key, v)?,
            "downlink_ms" => s.tdd.downlink_ms = parse(key, v)?,
            "guard_ms" => s.tdd.guard_ms = parse(key, v)?,
            "tap_power_profile" => {
                s.fading.tap_power_profile = v
                    .split(',')
                    .map(|p| parse::<f64>(key, p))
                    .collect::<Result<_>>()?
            }
            "tap_spacing_samples" => s.fading.tap_spacing_samples = parse(key, v)?,
            "coherence_time_ms" => s.fading.coherence_time_ms = parse(key, v)?,
            "doppler_mode" => s.fading.doppler_mode = v.parse::<DopplerMode>()?,
            "rng_seed" | "seed" => s.fading.rng_seed = parse(key, v)?,
            "snr_db" => s.impairments.snr_db = parse(key, v)?,
            "dc_offset_magnitude" => s.impairments.dc_offset_magnitude = parse(key, v)?,
            "dc_offset_node" => s.impairments.dc_offset_node = v.parse()?,
            "hardware_asymmetry_db" => s.impairments.hardware_asymmetry_db = parse(key, v)?,
            "probe_timing_offset_ms" => s.impairments.probe_timing_offset_ms = parse(key, v)?,
            "distance_wavelengths" | "distance_fraction_of_wavelength" => s.eve.distance_wavelengths = parse(key, v)?,
            "frames_per_probe" => s.frames_per_probe = parse(key, v)?,
            "duration_s" => s.duration_s = parse(key, v)?,
            "probe_interval_ms" => s.probe_interval_ms = parse(key, v)?,
            "dc_window" => self.dc_window = parse(key, v)?,
            "min_snr_proxy_db" => self.elimination.min_snr_proxy_db = parse(key, v)?,
            "min_temporal_delta" => self.elimination.min_temporal_delta = parse(key, v)?,
            "coordinator" => self.coordinator = v.parse()?,
            "levels" => self.levels = parse(key, v)?,
            "width_rule" => self.width_rule = v.parse()?,
            "bits_per_estimate" => self.bits_per_estimate = parse(key, v)?,
            "bias_tolerance" => self.bias_tolerance = parse(key, v)?,
            "variance_reference" => self.variance_reference = parse(key, v)?,
            "insecure_debug" => self.insecure_debug = parse(key, v)?,
            "num_taps" | "tap_decay_db" => {
                let mut one = BTreeMap::new();
                one.insert(key.to_string(), v.to_string());
                self.apply(&one)?;
            }
            other => return Err(Error::InvalidConfig(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad value '{value}' for '{key}'")))
}

/// Parses `key = value` lines. Later duplicates win.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key = value, got '{raw}'", i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Splits a `key=value` flag.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| Error::InvalidConfig(format!("expected key=value, got '{s}'")))
}

/// Serde adapter for floats that may be infinite, which plain JSON cannot hold.
pub(crate) mod extended_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else if *v < 0.0 {
            s.serialize_str("-inf")
        } else {
            s.serialize_str("nan")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}
