use std::f64::consts::PI;

/// Bessel function of the first kind, order zero.
///
/// Evaluates `(1/π) ∫₀^π cos(x sin θ) dθ` with the trapezoid rule. The
/// integrand is smooth and π-periodic, so the rule converges geometrically
/// once the node count exceeds `|x|`.
pub fn bessel_j0(x: f64) -> f64 {
    let nodes = 64 + x.abs().ceil() as usize;
    let step = PI / nodes as f64;
    let sum: f64 = (0..nodes).map(|i| (x * (i as f64 * step).sin()).cos()).sum();
    sum / nodes as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    // Power series Σ (-1)^k (x/2)^{2k} / (k!)^2, summed until terms vanish.
    fn series_j0(x: f64) -> f64 {
        let q = -(x * x) / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            term *= q / (k as f64 * k as f64);
            sum += term;
            if term.abs() < 1e-18 {
                break;
            }
        }
        sum
    }

    #[test]
    fn matches_power_series() {
        for i in 0..=100 {
            let x = i as f64 * 0.12;
            assert!(
                (bessel_j0(x) - series_j0(x)).abs() < 1e-10,
                "x = {x}: {} vs {}",
                bessel_j0(x),
                series_j0(x)
            );
        }
    }

    #[test]
    fn known_values() {
        assert_eq!(bessel_j0(0.0), 1.0);
        // J0(π) = -0.30424217764409...
        assert!((bessel_j0(PI) + 0.304_242_177_644_09).abs() < 1e-12);
        // first zero
        assert!(bessel_j0(2.404_825_557_695_773).abs() < 1e-12);
    }
}
