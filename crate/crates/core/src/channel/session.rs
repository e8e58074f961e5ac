use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::SessionConfig;
use super::link::{complex_gaussian, FrequencyKernel, LinkState};
use super::Node;
use crate::csi::average_frames;
use crate::error::{Error, Result};

const STREAM_CHANNEL: u64 = 0;
const STREAM_EVE: u64 = 1;
const STREAM_NOISE: u64 = 2;

/// One node's magnitude-only CSI for a single probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawObservation {
    pub probe_index: u64,
    pub node: Node,
    pub timestamp_ms: f64,
    pub magnitudes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeTriple {
    pub alice: RawObservation,
    pub bob: RawObservation,
    pub eve: RawObservation,
}

impl ProbeTriple {
    pub fn get(&self, node: Node) -> &RawObservation {
        match node {
            Node::Alice => &self.alice,
            Node::Bob => &self.bob,
            Node::Eve => &self.eve,
        }
    }
}

/// Stateful probe generator for a single session. Not shareable; create one
/// per session.
pub struct ProbeSession {
    cfg: SessionConfig,
    kernel: FrequencyKernel,
    link: LinkState,
    link_time_ms: f64,
    eve_link: LinkState,
    eve_time_ms: f64,
    eve_rho: f64,
    next_index: u64,
    total: u64,
    channel_rng: ChaCha8Rng,
    eve_rng: ChaCha8Rng,
    noise_rng: ChaCha8Rng,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

impl ProbeSession {
    pub fn new(cfg: SessionConfig) -> Result<Self> {
        cfg.validate()?;
        let seed = cfg.fading.rng_seed;
        let mut channel_rng = stream(seed, STREAM_CHANNEL);
        let mut eve_rng = stream(seed, STREAM_EVE);
        let link = LinkState::generate(&cfg.fading, &cfg.ofdm, &mut channel_rng);
        let eve_link = LinkState::generate(&cfg.fading, &cfg.ofdm, &mut eve_rng);
        let kernel = FrequencyKernel::new(link.delays_s(), &cfg.ofdm);
        Ok(Self {
            kernel,
            link,
            link_time_ms: 0.0,
            eve_link,
            eve_time_ms: 0.0,
            eve_rho: cfg.eve.tap_correlation(),
            next_index: 0,
            total: cfg.num_probes(),
            channel_rng,
            eve_rng,
            noise_rng: stream(seed, STREAM_NOISE),
            cfg,
        })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.cfg
    }

    pub fn num_probes(&self) -> u64 {
        self.total
    }

    /// Probes the channel at `probe_index · probe_interval_ms`.
    ///
    /// Alice measures first; Bob measures the same taps evolved by the probe
    /// timing offset. Eve listens at Alice's instant. Indices may skip ahead
    /// but never go back.
    pub fn probe_pair(&mut self, probe_index: u64) -> Result<ProbeTriple> {
        if probe_index >= self.total {
            return Err(Error::SessionExhausted {
                index: probe_index,
                available: self.total,
            });
        }
        if probe_index < self.next_index {
            return Err(Error::ProbeOrder {
                index: probe_index,
                previous: self.next_index - 1,
            });
        }
        let t_alice = probe_index as f64 * self.cfg.probe_interval_ms;
        let offset = self.cfg.impairments.probe_timing_offset_ms;

        self.link = self.link.evolve(t_alice - self.link_time_ms, &mut self.channel_rng);
        self.eve_link = self.eve_link.evolve(t_alice - self.eve_time_ms, &mut self.eve_rng);
        self.eve_time_ms = t_alice;

        let alice_h = self.kernel.apply(self.link.taps());
        let eve_h = self.kernel.apply(self.link.blend(&self.eve_link, self.eve_rho).taps());

        self.link = self.link.evolve(offset, &mut self.channel_rng);
        self.link_time_ms = t_alice + offset;
        let bob_h = self.kernel.apply(self.link.taps());

        let alice = self.observe(Node::Alice, probe_index, t_alice, &alice_h);
        let eve = self.observe(Node::Eve, probe_index, t_alice, &eve_h);
        let bob = self.observe(Node::Bob, probe_index, t_alice + offset, &bob_h);
        self.next_index = probe_index + 1;
        Ok(ProbeTriple { alice, bob, eve })
    }

    fn observe(&mut self, node: Node, probe_index: u64, timestamp_ms: f64, h: &[Complex64]) -> RawObservation {
        let imp = &self.cfg.impairments;
        let gain = imp.node_gain(node);
        let sigma = imp.noise_power().sqrt();
        let frames: Vec<Vec<f64>> = if sigma > 0.0 {
            (0..self.cfg.frames_per_probe)
                .map(|_| {
                    h.iter()
                        .map(|z| (z * gain + complex_gaussian(&mut self.noise_rng) * sigma).norm())
                        .collect()
                })
                .collect()
        } else {
            vec![h.iter().map(|z| z.norm() * gain).collect()]
        };
        let mut magnitudes = average_frames(&frames).expect("at least one frame of equal length");
        if node == imp.dc_offset_node && imp.dc_offset_magnitude > 0.0 {
            magnitudes[self.cfg.ofdm.dc_index()] += imp.dc_offset_magnitude;
        }
        RawObservation {
            probe_index,
            node,
            timestamp_ms,
            magnitudes,
        }
    }
}

/// Runs a full session: `floor(duration_s · 1000 / probe_interval_ms)` probes.
pub fn run_session(cfg: &SessionConfig) -> Result<Vec<ProbeTriple>> {
    let mut session = ProbeSession::new(cfg.clone())?;
    (0..session.num_probes()).map(|k| session.probe_pair(k)).collect()
}
