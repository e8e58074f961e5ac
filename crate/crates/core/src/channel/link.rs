use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::config::{DopplerMode, FadingConfig, OfdmConfig};

/// Relative tap jitter applied on every step of a static channel.
pub const STATIC_JITTER: f64 = 1e-3;

/// Per-step Gauss-Markov correlation `exp(-dt / coherence_time)`.
pub fn markov_correlation(dt_ms: f64, coherence_time_ms: f64) -> f64 {
    (-dt_ms / coherence_time_ms).exp()
}

/// Circularly-symmetric complex Gaussian with unit variance.
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Tap state of a tapped-delay-line channel.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkState {
    taps: Vec<Complex64>,
    // Anchor for static mode; jitter is applied around it, not accumulated.
    anchor: Vec<Complex64>,
    profile: Vec<f64>,
    delays_s: Vec<f64>,
    coherence_time_ms: f64,
    mode: DopplerMode,
}

impl LinkState {
    /// Builds a state from explicit taps. `profile` gives each tap's mean power.
    pub fn new(
        taps: Vec<Complex64>,
        delays_s: Vec<f64>,
        profile: Vec<f64>,
        coherence_time_ms: f64,
        mode: DopplerMode,
    ) -> Self {
        assert_eq!(taps.len(), delays_s.len());
        assert_eq!(taps.len(), profile.len());
        Self {
            anchor: taps.clone(),
            taps,
            profile,
            delays_s,
            coherence_time_ms,
            mode,
        }
    }

    /// Draws a Rayleigh realization and scales it to unit total energy.
    pub fn generate<R: Rng + ?Sized>(fading: &FadingConfig, ofdm: &OfdmConfig, rng: &mut R) -> Self {
        let profile = fading.tap_power_profile.clone();
        let mut taps: Vec<Complex64> = profile
            .iter()
            .map(|p| complex_gaussian(rng) * p.sqrt())
            .collect();
        let energy: f64 = taps.iter().map(|t| t.norm_sqr()).sum();
        if energy > 0.0 {
            let scale = energy.sqrt().recip();
            taps.iter_mut().for_each(|t| *t *= scale);
        }
        let ts = ofdm.sample_period_s();
        let delays_s = (0..profile.len())
            .map(|i| (i * fading.tap_spacing_samples) as f64 * ts)
            .collect();
        Self::new(taps, delays_s, profile, fading.coherence_time_ms, fading.doppler_mode)
    }

    pub fn taps(&self) -> &[Complex64] {
        &self.taps
    }

    pub fn delays_s(&self) -> &[f64] {
        &self.delays_s
    }

    pub fn mode(&self) -> DopplerMode {
        self.mode
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t.norm_sqr()).sum()
    }

    /// Advances the channel by `dt_ms`.
    ///
    /// Dynamic: `h' = ρ·h + sqrt(1-ρ²)·sqrt(p)·w` per tap. Static: the anchor
    /// taps with `STATIC_JITTER` relative jitter. `dt_ms == 0` returns an
    /// exact copy without touching the RNG.
    pub fn evolve<R: Rng + ?Sized>(&self, dt_ms: f64, rng: &mut R) -> Self {
        debug_assert!(dt_ms >= 0.0);
        if dt_ms == 0.0 {
            return self.clone();
        }
        let taps = match self.mode {
            DopplerMode::Dynamic => {
                let rho = markov_correlation(dt_ms, self.coherence_time_ms);
                let innovation = (1.0 - rho * rho).max(0.0).sqrt();
                self.taps
                    .iter()
                    .zip(&self.profile)
                    .map(|(h, p)| h * rho + complex_gaussian(rng) * (innovation * p.sqrt()))
                    .collect()
            }
            DopplerMode::Static => self
                .anchor
                .iter()
                .map(|h| h * (Complex64::new(1.0, 0.0) + complex_gaussian(rng) * STATIC_JITTER))
                .collect(),
        };
        Self {
            taps,
            ..self.clone()
        }
    }

    /// `rho·self + sqrt(1-rho²)·other`, tap by tap. Used for spatially
    /// correlated observers.
    pub fn blend(&self, other: &LinkState, rho: f64) -> Self {
        let rest = (1.0 - rho * rho).max(0.0).sqrt();
        let taps = self
            .taps
            .iter()
            .zip(&other.taps)
            .map(|(a, b)| a * rho + b * rest)
            .collect();
        Self {
            taps,
            ..self.clone()
        }
    }
}

/// Precomputed `exp(-j2π f_k τ_l)` phasors for a fixed delay set and grid.
#[derive(Debug, Clone)]
pub struct FrequencyKernel {
    // phasors[l * n + k]
    phasors: Vec<Complex64>,
    num_subcarriers: usize,
}

impl FrequencyKernel {
    pub fn new(delays_s: &[f64], ofdm: &OfdmConfig) -> Self {
        let n = ofdm.num_subcarriers;
        let mut phasors = Vec::with_capacity(delays_s.len() * n);
        for &tau in delays_s {
            for k in 0..n {
                let phase = -2.0 * PI * ofdm.subcarrier_offset_hz(k) * tau;
                phasors.push(Complex64::from_polar(1.0, phase));
            }
        }
        Self {
            phasors,
            num_subcarriers: n,
        }
    }

    pub fn apply(&self, taps: &[Complex64]) -> Vec<Complex64> {
        let n = self.num_subcarriers;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (l, h) in taps.iter().enumerate() {
            let row = &self.phasors[l * n..(l + 1) * n];
            for (o, p) in out.iter_mut().zip(row) {
                *o += h * p;
            }
        }
        out
    }
}

/// Channel frequency response on the subcarrier grid: the DFT of the tap
/// vector evaluated at each subcarrier's offset from the carrier.
pub fn channel_frequency_response(state: &LinkState, ofdm: &OfdmConfig) -> Vec<Complex64> {
    FrequencyKernel::new(state.delays_s(), ofdm).apply(state.taps())
}
