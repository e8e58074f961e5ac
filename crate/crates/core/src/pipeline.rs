//! End-to-end orchestration: probe, clean, eliminate, quantize, evaluate,
//! amplify. Also parameter sweeps and their summary table.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{run_session, DopplerMode, Node, SessionConfig};
use crate::config::{PipelineConfig, Source};
use crate::csi::{self, CorrelationSummary, CsiEstimate, DropReason};
use crate::entropy::{evaluate_stream, BiasReport, CompressionReport};
use crate::error::{Error, Result, Stage};
use crate::keygen::{agree, AgreementReport, KEY_BITS};
use crate::quantizer::{quantize_session, QuantizerConfig};
use crate::trace::{read_trace, Trace};

/// The compression band observed on the reference testbed.
pub const REFERENCE_RATIO_BAND: (f64, f64) = (0.1, 0.2);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeCounts {
    pub probes: usize,
    pub kept: usize,
    pub dropped_low_snr: usize,
    pub dropped_static: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reciprocity {
    pub alice_bob: Option<CorrelationSummary>,
    pub alice_eve: Option<CorrelationSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeReport {
    pub bits_quantized: usize,
    pub bias: BiasReport,
    pub compression: CompressionReport,
    pub key_sha256: String,
    /// Entropy bound below the key length.
    pub key_warning: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub config: PipelineConfig,
    pub seed: u64,
    pub counts: ProbeCounts,
    pub reciprocity: Reciprocity,
    /// Dynamic over static temporal variance, when a reference twin was run.
    pub variance_ratio: Option<f64>,
    pub nodes: BTreeMap<Node, NodeReport>,
    pub alice_bob: AgreementReport,
    pub alice_eve: Option<AgreementReport>,
    pub warnings: Vec<String>,
    /// Quantized streams as `0`/`1` strings; only with `insecure_debug`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub debug_streams: Option<BTreeMap<Node, String>>,
}

impl SessionReport {
    pub fn node(&self, node: Node) -> Result<&NodeReport> {
        self.nodes.get(&node).ok_or(Error::MissingNode(node))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(format!("bad report: {e}")))
    }

    /// Re-runs the pipeline from the embedded config.
    pub fn rerun(&self) -> Result<Self> {
        run_pipeline(&self.config)
    }
}

struct Observed {
    nodes: BTreeMap<Node, Vec<CsiEstimate>>,
    num_subcarriers: usize,
}

fn simulate(session: &SessionConfig) -> Result<Observed> {
    let triples = run_session(session)?;
    let trace = Trace::from_session(session, &triples);
    Ok(Observed {
        nodes: trace.nodes,
        num_subcarriers: session.ofdm.num_subcarriers,
    })
}

fn observe(cfg: &PipelineConfig) -> Result<Observed> {
    match &cfg.source {
        Source::Simulation => simulate(&cfg.session),
        Source::Trace(path) => {
            let trace = read_trace(path)?;
            Ok(Observed {
                num_subcarriers: trace.header.num_subcarriers,
                nodes: trace.nodes,
            })
        }
    }
}

fn take_node(nodes: &mut BTreeMap<Node, Vec<CsiEstimate>>, node: Node) -> Result<Vec<CsiEstimate>> {
    nodes.remove(&node).ok_or(Error::MissingNode(node))
}

fn dc_band(num_subcarriers: usize, window: usize) -> Option<(usize, usize)> {
    let center = num_subcarriers / 2;
    (window > 0).then(|| (center - window, center + window))
}

fn clean(estimates: Vec<CsiEstimate>, num_subcarriers: usize, window: usize) -> Result<Vec<CsiEstimate>> {
    if window == 0 {
        return Ok(estimates);
    }
    estimates
        .iter()
        .map(|e| csi::suppress_dc(e, num_subcarriers / 2, window))
        .collect()
}

fn keep_indices(estimates: Vec<CsiEstimate>, kept: &BTreeSet<u64>) -> Vec<CsiEstimate> {
    estimates
        .into_iter()
        .filter(|e| kept.contains(&e.probe_index))
        .collect()
}

fn stream_text(bits: &[bool]) -> String {
    bits.iter().map(|b| if *b { '1' } else { '0' }).collect()
}

/// Runs every stage in order. Errors carry the stage they came from;
/// warnings never fail the run.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<SessionReport> {
    cfg.validate()?;
    let mut warnings = match cfg.source {
        Source::Simulation => cfg.session.warnings(),
        Source::Trace(_) => Vec::new(),
    };

    // Probe.
    let Observed {
        mut nodes,
        num_subcarriers,
    } = observe(cfg).map_err(Error::at(Stage::Probe))?;
    let alice = take_node(&mut nodes, Node::Alice).map_err(Error::at(Stage::Probe))?;
    let bob = take_node(&mut nodes, Node::Bob).map_err(Error::at(Stage::Probe))?;
    let eve = nodes.remove(&Node::Eve);
    if eve.is_none() {
        warnings.push("no eve observations; eavesdropper metrics omitted".into());
    }
    let probes = alice.len();

    // Clean.
    let clean_stage = |v| clean(v, num_subcarriers, cfg.dc_window).map_err(Error::at(Stage::Clean));
    let alice = clean_stage(alice)?;
    let bob = clean_stage(bob)?;
    let eve = eve.map(clean_stage).transpose()?;
    let alice_bob_corr = csi::reciprocity_stats(&alice, &bob).map_err(Error::at(Stage::Clean))?;
    let alice_eve_corr = eve
        .as_ref()
        .map(|e| csi::reciprocity_stats(&alice, e))
        .transpose()
        .map_err(Error::at(Stage::Clean))?;
    let reciprocity = Reciprocity {
        alice_bob: alice_bob_corr.summary,
        alice_eve: alice_eve_corr.and_then(|s| s.summary),
    };

    let variance_ratio = if cfg.variance_reference && cfg.source == Source::Simulation {
        Some(variance_reference(cfg, &alice, num_subcarriers)?)
    } else {
        None
    };

    // Eliminate on the coordinator; the kept index set is public.
    let coordinator = if cfg.coordinator == Node::Alice { &alice } else { &bob };
    let elimination = csi::eliminate(coordinator, &cfg.elimination);
    let kept: BTreeSet<u64> = elimination.kept.iter().map(|e| e.probe_index).collect();
    if kept.is_empty() {
        return Err(Error::at(Stage::Eliminate)(Error::EmptyInput("elimination kept no probes")));
    }
    let counts = ProbeCounts {
        probes,
        kept: kept.len(),
        dropped_low_snr: elimination.count(DropReason::LowSnr),
        dropped_static: elimination.count(DropReason::Static),
    };
    if counts.kept * 2 < counts.probes {
        warnings.push(format!(
            "elimination dropped most probes: kept {} of {} ({} low_snr, {} static)",
            counts.kept, counts.probes, counts.dropped_low_snr, counts.dropped_static
        ));
    }
    let alice = keep_indices(alice, &kept);
    let bob = keep_indices(bob, &kept);
    let eve = eve.map(|e| keep_indices(e, &kept));

    // Quantize.
    let qcfg = QuantizerConfig::new(
        cfg.levels,
        cfg.width_rule,
        cfg.bits_per_estimate,
        num_subcarriers,
        dc_band(num_subcarriers, cfg.dc_window),
    )
    .map_err(Error::at(Stage::Quantize))?;
    let quantize = |v: &[CsiEstimate]| quantize_session(v, &qcfg).map_err(Error::at(Stage::Quantize));
    let alice_bits = quantize(&alice)?;
    let bob_bits = quantize(&bob)?;
    let eve_bits = eve.as_deref().map(quantize).transpose()?;

    // Evaluate.
    let mut streams: Vec<(Node, &[bool])> = vec![(Node::Alice, alice_bits.bits()), (Node::Bob, bob_bits.bits())];
    if let Some(e) = &eve_bits {
        streams.push((Node::Eve, e.bits()));
    }
    let mut evaluations = BTreeMap::new();
    for (node, bits) in &streams {
        let eval = evaluate_stream(bits, cfg.bias_tolerance).map_err(Error::at(Stage::Evaluate))?;
        evaluations.insert(*node, eval);
    }

    // Amplify.
    let agreement = agree(alice_bits.bits(), bob_bits.bits(), eve_bits.as_ref().map(|e| e.bits()))
        .map_err(Error::at(Stage::Amplify))?;
    let mut keys = BTreeMap::from([(Node::Alice, agreement.alice_key), (Node::Bob, agreement.bob_key)]);
    if let Some(k) = agreement.eve_key {
        keys.insert(Node::Eve, k);
    }

    let mut node_reports = BTreeMap::new();
    for (node, eval) in evaluations {
        let key = &keys[&node];
        let ratio = eval.compression.ratio;
        if node != Node::Eve {
            if key.warning {
                warnings.push(format!(
                    "{node}: entropy bound {} bits is below the {KEY_BITS}-bit key length",
                    key.entropy_bound_bits
                ));
            }
            let (lo, hi) = REFERENCE_RATIO_BAND;
            if !(lo..=hi).contains(&ratio) {
                warnings.push(format!("{node}: off-paper compression ratio {ratio:.4} outside [{lo}, {hi}]"));
            }
        }
        node_reports.insert(
            node,
            NodeReport {
                bits_quantized: eval.compression.input_bits,
                key_sha256: key.hex(),
                key_warning: key.warning,
                bias: eval.bias,
                compression: eval.compression,
            },
        );
    }

    let debug_streams = cfg
        .insecure_debug
        .then(|| streams.iter().map(|(n, b)| (*n, stream_text(b))).collect());

    Ok(SessionReport {
        config: cfg.clone(),
        seed: cfg.seed(),
        counts,
        reciprocity,
        variance_ratio,
        nodes: node_reports,
        alice_bob: agreement.alice_bob,
        alice_eve: agreement.alice_eve,
        warnings,
        debug_streams,
    })
}

/// Simulates the same seed in the other Doppler mode and compares Alice's
/// temporal variance.
fn variance_reference(cfg: &PipelineConfig, alice: &[CsiEstimate], num_subcarriers: usize) -> Result<f64> {
    let mut twin = cfg.session.clone();
    let mode = cfg.session.fading.doppler_mode;
    twin.fading.doppler_mode = match mode {
        DopplerMode::Dynamic => DopplerMode::Static,
        DopplerMode::Static => DopplerMode::Dynamic,
    };
    let mut observed = simulate(&twin).map_err(Error::at(Stage::Probe))?;
    let other = take_node(&mut observed.nodes, Node::Alice).map_err(Error::at(Stage::Probe))?;
    let other = clean(other, num_subcarriers, cfg.dc_window).map_err(Error::at(Stage::Clean))?;
    let ratio = match mode {
        DopplerMode::Dynamic => csi::variance_ratio(alice, &other),
        DopplerMode::Static => csi::variance_ratio(&other, alice),
    };
    ratio.map_err(Error::at(Stage::Clean))
}

/// Grid axes for a sweep. Every combination is one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub levels: Vec<usize>,
    pub bits: Vec<usize>,
    #[serde(with = "extended_float_vec")]
    pub snr_db: Vec<f64>,
    pub modes: Vec<DopplerMode>,
}

impl SweepGrid {
    /// The base config's own values on every axis.
    pub fn single(base: &PipelineConfig) -> Self {
        Self {
            levels: vec![base.levels],
            bits: vec![base.bits_per_estimate],
            snr_db: vec![base.session.impairments.snr_db],
            modes: vec![base.session.fading.doppler_mode],
        }
    }

    /// L in {4, 7} by S in {3, 5, 7, 9}.
    pub fn table(base: &PipelineConfig) -> Self {
        Self {
            levels: vec![4, 7],
            bits: vec![3, 5, 7, 9],
            ..Self::single(base)
        }
    }

    pub fn len(&self) -> usize {
        self.levels.len() * self.bits.len() * self.snr_db.len() * self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

mod extended_float_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "crate::config::extended_float")] f64);

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|x| Wrap(*x)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Wrap>::deserialize(d)?.into_iter().map(|w| w.0).collect())
    }
}

/// MurmurHash3 64-bit finalizer.
pub fn fmix64(mut k: u64) -> u64 {
    k ^= k >> 33;
    k = k.wrapping_mul(0xff51_afd7_ed55_8ccd);
    k ^= k >> 33;
    k = k.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    k ^= k >> 33;
    k
}

/// `base ^ fmix64(coords)` with the four grid indices packed 16 bits each.
/// The origin point keeps the base seed.
pub fn point_seed(base: u64, coords: [usize; 4]) -> u64 {
    let packed = coords
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, c)| acc | ((*c as u64 & 0xffff) << (16 * i)));
    base ^ fmix64(packed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub levels: usize,
    pub bits_per_estimate: usize,
    pub snr_db: f64,
    pub mode: DopplerMode,
    pub seed: u64,
    /// The report, or the error message when this point failed.
    pub outcome: std::result::Result<SessionReport, String>,
}

/// Runs every grid point, in parallel. A failing point is recorded and the
/// sweep carries on.
pub fn sweep(base: &PipelineConfig, grid: &SweepGrid) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("sweep grid has an empty axis".into()));
    }
    let mut coords = Vec::with_capacity(grid.len());
    for (i_mode, _) in grid.modes.iter().enumerate() {
        for (i_snr, _) in grid.snr_db.iter().enumerate() {
            for (i_l, _) in grid.levels.iter().enumerate() {
                for (i_s, _) in grid.bits.iter().enumerate() {
                    coords.push([i_l, i_s, i_snr, i_mode]);
                }
            }
        }
    }
    let base_seed = base.seed();
    Ok(coords
        .par_iter()
        .map(|&c| {
            let [i_l, i_s, i_snr, i_mode] = c;
            let mut cfg = base.clone();
            cfg.levels = grid.levels[i_l];
            cfg.bits_per_estimate = grid.bits[i_s];
            cfg.session.impairments.snr_db = grid.snr_db[i_snr];
            cfg.session.fading.doppler_mode = grid.modes[i_mode];
            cfg.session.fading.rng_seed = point_seed(base_seed, c);
            SweepPoint {
                levels: cfg.levels,
                bits_per_estimate: cfg.bits_per_estimate,
                snr_db: cfg.session.impairments.snr_db,
                mode: cfg.session.fading.doppler_mode,
                seed: cfg.seed(),
                outcome: run_pipeline(&cfg).map_err(|e| e.to_string()),
            }
        })
        .collect())
}

pub const SUMMARY_COLUMNS: &str =
    "L,S,snr_db,mode,seed,kept,bits_after_quantization,bits_after_compression,ratio,kdr_alice_bob,kdr_alice_eve,status";

/// Comma-separated summary, one row per point, Table-1 columns first.
pub fn summary_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from(SUMMARY_COLUMNS);
    out.push('\n');
    for p in points {
        let head = format!("{},{},{},{},{}", p.levels, p.bits_per_estimate, p.snr_db, p.mode, p.seed);
        match &p.outcome {
            Ok(r) => {
                let a = &r.nodes[&Node::Alice];
                let eve = r.alice_eve.as_ref().map(|e| e.pre_hash_kdr.to_string()).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{head},{},{},{},{},{},{eve},ok",
                    r.counts.kept,
                    a.bits_quantized,
                    a.compression.output_bits,
                    a.compression.ratio,
                    r.alice_bob.pre_hash_kdr
                );
            }
            Err(e) => {
                let msg = e.replace(['"', '\n'], " ");
                let _ = writeln!(out, "{head},,,,,,,\"error: {msg}\"");
            }
        }
    }
    out
}

pub fn point_file_name(p: &SweepPoint) -> String {
    format!("report_L{}_S{}_snr{}_{}.json", p.levels, p.bits_per_estimate, p.snr_db, p.mode)
}

/// Writes one JSON report per successful point plus `summary.csv`.
pub fn write_sweep(dir: &Path, points: &[SweepPoint]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for p in points {
        if let Ok(r) = &p.outcome {
            fs::write(dir.join(point_file_name(p)), r.to_json())?;
        }
    }
    fs::write(dir.join("summary.csv"), summary_csv(points))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> PipelineConfig {
        let mut cfg = PipelineConfig::default();
        cfg.session.duration_s = 1.0;
        cfg
    }

    #[test]
    fn fmix64_reference_values() {
        assert_eq!(fmix64(0), 0);
        // Independent evaluation of the finalizer on 1.
        assert_eq!(fmix64(1), 0xb456_bcfc_34c2_cb2c);
        assert_eq!(point_seed(42, [0, 0, 0, 0]), 42);
        assert_ne!(point_seed(42, [1, 0, 0, 0]), point_seed(42, [0, 1, 0, 0]));
    }

    #[test]
    fn bits_are_three_per_kept_probe() {
        let r = run_pipeline(&small()).unwrap();
        assert_eq!(r.counts.probes, 100);
        for node in Node::ALL {
            assert_eq!(r.node(node).unwrap().bits_quantized, 3 * r.counts.kept);
            assert_eq!(r.node(node).unwrap().key_sha256.len(), 64);
        }
        assert!(r.debug_streams.is_none());
    }

    #[test]
    fn debug_streams_only_on_request() {
        let mut cfg = small();
        cfg.insecure_debug = true;
        let r = run_pipeline(&cfg).unwrap();
        let streams = r.debug_streams.unwrap();
        assert_eq!(streams[&Node::Alice].len(), r.nodes[&Node::Alice].bits_quantized);
    }

    #[test]
    fn errors_name_their_stage() {
        let mut cfg = small();
        cfg.dc_window = 400;
        let err = run_pipeline(&cfg).unwrap_err();
        assert!(matches!(err, Error::Stage { stage: Stage::Clean, .. }), "{err}");
        assert!(err.to_string().starts_with("clean stage"));

        let mut cfg = small();
        cfg.levels = 40;
        let err = run_pipeline(&cfg).unwrap_err();
        assert!(matches!(err, Error::Stage { stage: Stage::Quantize, .. }), "{err}");
    }

    #[test]
    fn sweep_records_failures_and_continues() {
        let grid = SweepGrid {
            levels: vec![4, 40],
            bits: vec![3],
            snr_db: vec![25.0],
            modes: vec![DopplerMode::Dynamic],
        };
        let points = sweep(&small(), &grid).unwrap();
        assert_eq!(points.len(), 2);
        assert!(points[0].outcome.is_ok());
        assert!(points[1].outcome.is_err());
        let csv = summary_csv(&points);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(2).unwrap().contains("error"));
    }

    #[test]
    fn empty_grid_rejected() {
        let mut grid = SweepGrid::single(&small());
        grid.modes.clear();
        assert!(sweep(&small(), &grid).is_err());
    }
}
