use plkg::csi::EliminationPolicy;
use plkg::keygen::KEY_BITS;
use plkg::pipeline::{point_seed, summary_csv, write_sweep, SUMMARY_COLUMNS};
use plkg::{run_pipeline, sweep, DopplerMode, Node, PipelineConfig, SessionReport, SweepGrid};

#[test]
fn default_run_yields_three_bits_per_kept_probe_and_full_keys() {
    let cfg = PipelineConfig::default();
    assert_eq!((cfg.levels, cfg.bits_per_estimate), (4, 3));
    let r = run_pipeline(&cfg).unwrap();
    assert_eq!(r.counts.probes, 500);
    assert!(r.counts.kept > 0);
    assert_eq!(
        r.counts.kept + r.counts.dropped_low_snr + r.counts.dropped_static,
        r.counts.probes
    );
    for node in Node::ALL {
        let n = r.node(node).unwrap();
        assert_eq!(n.bits_quantized, 3 * r.counts.kept);
        assert_eq!(n.key_sha256.len() * 4, KEY_BITS);
    }
    let ab = r.reciprocity.alice_bob.as_ref().unwrap();
    assert!(ab.min <= ab.mean && ab.mean <= ab.max);
    assert!(r.alice_eve.is_some());
}

#[test]
fn static_channel_drops_most_probes_and_says_so() {
    let mut cfg = PipelineConfig::default();
    cfg.session.fading.doppler_mode = DopplerMode::Static;
    cfg.session.impairments.snr_db = 40.0;
    let r = run_pipeline(&cfg).unwrap();
    assert!(r.counts.kept * 2 < r.counts.probes, "{:?}", r.counts);
    assert!(r.counts.dropped_static > r.counts.probes / 2);
    assert!(r.warnings.iter().any(|w| w.contains("dropped most probes")), "{:?}", r.warnings);
}

#[test]
fn low_snr_probes_are_dropped_for_low_snr() {
    let mut cfg = PipelineConfig::default();
    cfg.session.duration_s = 1.0;
    cfg.session.impairments.snr_db = -10.0;
    cfg.elimination.min_snr_proxy_db = 30.0;
    cfg.elimination.min_temporal_delta = 0.0;
    // Everything fails the SNR check, so nothing is left to quantize.
    let err = run_pipeline(&cfg).unwrap_err();
    assert!(err.to_string().starts_with("eliminate stage"), "{err}");
}

#[test]
fn report_json_round_trips_and_reruns_bit_exactly() {
    let mut cfg = PipelineConfig::default();
    cfg.session.duration_s = 2.0;
    cfg.session.impairments.snr_db = f64::INFINITY;
    cfg.elimination = EliminationPolicy::vacuous();
    cfg.variance_reference = true;
    let r = run_pipeline(&cfg).unwrap();
    let parsed = SessionReport::from_json(&r.to_json()).unwrap();
    assert_eq!(parsed, r);
    assert_eq!(parsed.rerun().unwrap(), r);
    assert!(r.variance_ratio.unwrap() > 1.0);
}

#[test]
fn table_sweep_has_eight_rows_in_layout() {
    let mut base = PipelineConfig::default();
    base.session.duration_s = 3.4;
    base.elimination = EliminationPolicy::vacuous();
    let grid = SweepGrid::table(&base);
    let points = sweep(&base, &grid).unwrap();
    assert_eq!(points.len(), 8);
    let csv = summary_csv(&points);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), SUMMARY_COLUMNS);
    for (p, line) in points.iter().zip(lines) {
        let cols: Vec<&str> = line.split(',').collect();
        let r = p.outcome.as_ref().unwrap();
        assert_eq!(r.counts.kept, 340);
        assert_eq!(cols[0].parse::<usize>().unwrap(), p.levels);
        assert_eq!(cols[1].parse::<usize>().unwrap(), p.bits_per_estimate);
        assert_eq!(cols[6].parse::<usize>().unwrap(), 340 * p.bits_per_estimate);
        assert_eq!(cols.last(), Some(&"ok"));
    }
    let dir = tempfile::tempdir().unwrap();
    write_sweep(dir.path(), &points).unwrap();
    let reports = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(reports, 9);
}

#[test]
fn repeated_sweep_is_identical() {
    let mut base = PipelineConfig::default();
    base.session.duration_s = 1.0;
    let grid = SweepGrid {
        levels: vec![2, 4],
        bits: vec![3],
        snr_db: vec![15.0, 30.0],
        modes: vec![DopplerMode::Dynamic, DopplerMode::Static],
    };
    let a = sweep(&base, &grid).unwrap();
    let b = sweep(&base, &grid).unwrap();
    assert_eq!(a, b);
    assert_eq!(summary_csv(&a), summary_csv(&b));
    let seeds: std::collections::BTreeSet<u64> = a.iter().map(|p| p.seed).collect();
    assert_eq!(seeds.len(), a.len());
}

#[test]
fn one_point_sweep_equals_run_pipeline() {
    let mut base = PipelineConfig::default();
    base.session.duration_s = 1.0;
    let points = sweep(&base, &SweepGrid::single(&base)).unwrap();
    assert_eq!(points.len(), 1);
    assert_eq!(points[0].seed, point_seed(base.seed(), [0; 4]));
    assert_eq!(points[0].outcome.as_ref().unwrap(), &run_pipeline(&base).unwrap());
}

#[test]
fn disagreement_grows_with_noise() {
    let mean_kdr = |snr: f64| {
        (0..30)
            .map(|seed| {
                let mut cfg = PipelineConfig::default();
                cfg.session.duration_s = 1.0;
                cfg.session.fading.rng_seed = seed;
                cfg.session.impairments.snr_db = snr;
                cfg.elimination = EliminationPolicy::vacuous();
                run_pipeline(&cfg).unwrap().alice_bob.pre_hash_kdr
            })
            .sum::<f64>()
            / 30.0
    };
    let kdrs: Vec<f64> = [40.0, 25.0, 10.0, 0.0].iter().map(|s| mean_kdr(*s)).collect();
    assert!(kdrs.windows(2).all(|w| w[0] < w[1]), "{kdrs:?}");
}

#[test]
fn dc_spike_is_repaired_before_quantization() {
    let mut cfg = PipelineConfig::default();
    cfg.session.duration_s = 1.0;
    cfg.session.impairments.snr_db = f64::INFINITY;
    cfg.session.impairments.dc_offset_magnitude = 50.0;
    cfg.elimination = EliminationPolicy::vacuous();
    let clean = run_pipeline(&cfg).unwrap();
    assert_eq!(clean.alice_bob.pre_hash_kdr, 0.0);
    assert!(clean.alice_bob.keys_match);
    cfg.dc_window = 0;
    let spiked = run_pipeline(&cfg).unwrap();
    assert!(spiked.reciprocity.alice_bob.unwrap().mean < clean.reciprocity.alice_bob.unwrap().mean);
}
