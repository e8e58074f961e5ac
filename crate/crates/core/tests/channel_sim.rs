use num_complex::Complex64;
use plkg::channel::{bessel_j0, run_session, DopplerMode, EvePlacement, FadingConfig, LinkState, OfdmConfig, SessionConfig};
use plkg::csi::{pearson, variance_ratio, CsiEstimate};
use plkg::Node;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn estimates(triples: &[plkg::channel::ProbeTriple], node: Node) -> Vec<CsiEstimate> {
    triples.iter().map(|t| CsiEstimate::from_observation(t.get(node))).collect()
}

fn long_session(snr_db: f64, distance: f64) -> SessionConfig {
    let mut cfg = SessionConfig::default();
    cfg.duration_s = 100.0;
    cfg.frames_per_probe = 1;
    cfg.impairments.snr_db = snr_db;
    cfg.eve.distance_wavelengths = distance;
    cfg.fading.rng_seed = 2024;
    cfg
}

#[test]
fn eve_decorrelates_at_half_wavelength_over_ten_thousand_probes() {
    let cfg = long_session(20.0, 0.5);
    let triples = run_session(&cfg).unwrap();
    assert_eq!(triples.len(), 10_000);
    let (mut eve_abs, mut bob) = (0.0, 0.0);
    for t in &triples {
        let a = &t.alice.magnitudes;
        eve_abs += pearson(a, &t.eve.magnitudes).unwrap().abs();
        bob += pearson(a, &t.bob.magnitudes).unwrap();
    }
    let n = triples.len() as f64;
    let (eve_abs, bob) = (eve_abs / n, bob / n);
    assert!(eve_abs <= 0.35, "mean |corr(eve, alice)| = {eve_abs}");
    assert!(eve_abs < bob, "eve {eve_abs} vs bob {bob}");
}

#[test]
fn eve_tap_correlation_follows_the_clamped_bessel_rule() {
    // Monte-Carlo over 10^4 draws of the blend against the configured rho.
    let ofdm = OfdmConfig::default();
    let fading = FadingConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for distance in [0.1, 0.2, 0.3, 0.5, 1.0] {
        let rho = EvePlacement {
            distance_wavelengths: distance,
        }
        .tap_correlation();
        let expected = bessel_j0(2.0 * std::f64::consts::PI * distance).clamp(0.0, 1.0);
        assert!((rho - expected).abs() < 1e-12);
        let (mut cross, mut pa, mut pe) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
        for _ in 0..10_000 {
            let legit = LinkState::generate(&fading, &ofdm, &mut rng);
            let other = LinkState::generate(&fading, &ofdm, &mut rng);
            let eve = legit.blend(&other, rho);
            let (a, e) = (legit.taps()[0], eve.taps()[0]);
            cross += a * e.conj();
            pa += a.norm_sqr();
            pe += e.norm_sqr();
        }
        let measured = cross.re / (pa * pe).sqrt();
        assert!((measured - rho).abs() < 0.03, "d={distance}: {measured} vs {rho}");
    }
}

#[test]
fn reciprocity_limit_at_sixty_db() {
    let mut cfg = SessionConfig::default();
    cfg.impairments.snr_db = 60.0;
    cfg.duration_s = 2.0;
    for t in run_session(&cfg).unwrap() {
        let r = pearson(&t.alice.magnitudes, &t.bob.magnitudes).unwrap();
        assert!(r >= 0.9999, "probe {}: {r}", t.alice.probe_index);
    }
}

#[test]
fn dynamic_varies_more_than_static_for_the_same_seed() {
    for seed in [1, 2, 3] {
        let mut cfg = SessionConfig::default();
        cfg.duration_s = 1.0;
        cfg.fading.rng_seed = seed;
        let dynamic = estimates(&run_session(&cfg).unwrap(), Node::Alice);
        cfg.fading.doppler_mode = DopplerMode::Static;
        let frozen = estimates(&run_session(&cfg).unwrap(), Node::Alice);
        assert_eq!(dynamic.len(), 100);
        let ratio = variance_ratio(&dynamic, &frozen).unwrap();
        assert!(ratio > 1.0, "seed {seed}: {ratio}");
    }
}

#[test]
fn hardware_asymmetry_scales_bob_only() {
    let mut cfg = SessionConfig::default();
    cfg.duration_s = 0.05;
    cfg.impairments.snr_db = f64::INFINITY;
    cfg.impairments.hardware_asymmetry_db = 6.0;
    let gain = 10f64.powf(6.0 / 20.0);
    for t in run_session(&cfg).unwrap() {
        for (a, b) in t.alice.magnitudes.iter().zip(&t.bob.magnitudes) {
            assert!((a * gain - b).abs() <= 1e-12 * b.max(1.0));
        }
    }
}

#[test]
fn timing_offset_decorrelates_bob_gradually() {
    let corr = |offset: f64| {
        let mut cfg = SessionConfig::default();
        cfg.duration_s = 2.0;
        cfg.impairments.snr_db = f64::INFINITY;
        cfg.impairments.probe_timing_offset_ms = offset;
        cfg.fading.coherence_time_ms = 5.0;
        let t = run_session(&cfg).unwrap();
        t.iter()
            .map(|t| pearson(&t.alice.magnitudes, &t.bob.magnitudes).unwrap())
            .sum::<f64>()
            / t.len() as f64
    };
    let (none, some, more) = (corr(0.0), corr(0.5), corr(4.0));
    assert!(none > 1.0 - 1e-12);
    assert!(none > some && some > more, "{none} {some} {more}");
}
