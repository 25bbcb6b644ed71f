//! Standard normal helpers.

use statrs::distribution::{ContinuousCDF, Normal};

fn standard() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal parameters are valid")
}

/// Φ(x)
pub fn cdf(x: f64) -> f64 {
    standard().cdf(x)
}

/// 1 − Φ(x), computed without cancellation in the upper tail.
pub fn upper_tail(x: f64) -> f64 {
    standard().sf(x)
}

/// The upper-α quantile z_α, i.e. Φ(z_α) = 1 − α.
pub fn upper_quantile(alpha: f64) -> f64 {
    -standard().inverse_cdf(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert!((cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((cdf(1.959963984540054) - 0.975).abs() < 1e-10);
        assert!((upper_quantile(0.05) - 1.6448536269514722).abs() < 1e-10);
        assert!((upper_quantile(0.01) - 2.3263478740408408).abs() < 1e-10);
        assert!((upper_tail(8.0) - 6.220960574271785e-16).abs() < 1e-10 * 6.2e-16);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &a in &[1e-6, 0.001, 0.05, 0.3, 0.5, 0.9] {
            assert!((upper_tail(upper_quantile(a)) - a).abs() < 1e-10 * a.max(1e-3));
        }
    }
}
