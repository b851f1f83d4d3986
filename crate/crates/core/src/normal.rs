//! Standard normal CDF via the complementary error function.

/// Φ(y) = P(N(0,1) ≤ y) = erfc(−y/√2)/2, accurate to a few ulp across the
/// real line (no tail cancellation: erfc handles y < 0 directly).
pub fn standard_normal_cdf(y: f64) -> f64 {
    0.5 * libm::erfc(-y / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // Abramowitz–Stegun style reference points.
        assert_eq!(standard_normal_cdf(0.0), 0.5);
        assert!((standard_normal_cdf(1.0) - 0.8413447460685429).abs() < 1e-12);
        assert!((standard_normal_cdf(-1.0) - 0.15865525393145705).abs() < 1e-12);
        assert!((standard_normal_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
        assert!((standard_normal_cdf(3.0) - 0.9986501019683699).abs() < 1e-12);
        assert!((standard_normal_cdf(-6.0) - 9.865876450376946e-10).abs() < 1e-18);
    }

    #[test]
    fn symmetry_and_monotonicity() {
        for i in -60..=60 {
            let y = i as f64 / 10.0;
            let p = standard_normal_cdf(y);
            let q = standard_normal_cdf(-y);
            assert!((p + q - 1.0).abs() < 1e-14, "y = {y}");
            assert!((0.0..=1.0).contains(&p));
        }
        let mut prev = 0.0;
        for i in -80..=80 {
            let p = standard_normal_cdf(i as f64 / 8.0);
            assert!(p >= prev);
            prev = p;
        }
    }
}
