//! The frequency-domain filter function of a pulse sequence.
//!
//! `f(omega) = sum_j (-1)^j (e^{i t_j omega} - e^{i t_{j+1} omega})` over the
//! augmented times `t_0 = 0, ..., t_{n+1} = T`. Everything downstream (the
//! decoupling error, its bounds, the optimizers) samples the noise spectrum
//! through `|f|^2`.

use num_complex::Complex64;

use crate::quad::{composite_gauss, quad_adaptive_panels, QuadError, QuadratureConfig};
use crate::sequences::PulseSequence;

/// Direct evaluation of the alternating-sum form.
pub fn filter_value(seq: &PulseSequence, omega: f64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut prev = Complex64::new(1.0, 0.0);
    let mut sign = 1.0;
    for &t in seq.times() {
        let e = Complex64::from_polar(1.0, t * omega);
        sum += sign * (prev - e);
        prev = e;
        sign = -sign;
    }
    let end = Complex64::from_polar(1.0, seq.duration() * omega);
    sum + sign * (prev - end)
}

/// Regrouped form `1 - (-1)^n e^{i T omega} + 2 sum_j (-1)^j e^{i t_j omega}`,
/// in which only the interior times carry coefficients. Used as an algebraic
/// cross-check of [`filter_value`] and as the basis of the timing gradient.
pub fn filter_value_regrouped(seq: &PulseSequence, omega: f64) -> Complex64 {
    let mut sum = Complex64::new(1.0, 0.0);
    let mut sign = -1.0;
    for &t in seq.times() {
        sum += 2.0 * sign * Complex64::from_polar(1.0, t * omega);
        sign = -sign;
    }
    sum + sign * Complex64::from_polar(1.0, seq.duration() * omega)
}

/// `|f(omega)|^2`, the weight through which the measure is sampled.
pub fn filter_magnitude_sq(seq: &PulseSequence, omega: f64) -> f64 {
    filter_value(seq, omega).norm_sqr()
}

/// Number of pre-split panels needed to resolve the structure of the filter
/// function on `[0, hi]`: two panels per oscillation period `pi / T` (the
/// fastest beat of `|f|^2`), with a floor tied to the pulse count (which
/// sets the number of deep notches) and an absolute floor of 32. Together
/// with the engine's forced first subdivision this samples every period at
/// more than ten points before any error estimate is trusted.
pub(crate) fn oscillation_panels(seq: &PulseSequence, hi: f64) -> usize {
    let n = seq.num_pulses();
    let periods = (hi * seq.duration() / std::f64::consts::PI).ceil() as usize;
    (n + 1).max(32).max(2 * periods)
}

/// L1 norm of the filter function over `[0, omega_c]`.
///
/// `|f|` has a kink at every zero crossing, which can stall the adaptive
/// engine; in that case a fixed composite Gauss-Legendre rule takes over and
/// its two-resolution difference is used as the error estimate.
pub fn filter_l1_norm(
    seq: &PulseSequence,
    omega_c: f64,
    quad: &QuadratureConfig,
) -> Result<f64, QuadError> {
    let g = |w: f64| filter_value(seq, w).norm();
    let panels = oscillation_panels(seq, omega_c);
    match quad_adaptive_panels(g, 0.0, omega_c, panels, quad) {
        Ok(r) => Ok(r.value),
        Err(QuadError::MaxDepth {
            evaluations,
            flagged,
            ..
        }) => {
            let coarse = composite_gauss(g, 0.0, omega_c, 4096);
            let fine = composite_gauss(g, 0.0, omega_c, 8192);
            let dev = (fine - coarse).abs();
            if dev <= f64::max(quad.abs_tol, 100.0 * quad.rel_tol * fine.abs()) {
                Ok(fine)
            } else {
                Err(QuadError::MaxDepth {
                    best_value: fine,
                    best_error: dev,
                    evaluations,
                    flagged,
                })
            }
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> QuadratureConfig {
        QuadratureConfig::for_cutoff(1.0)
    }

    #[test]
    fn vanishes_at_zero_frequency() {
        for n in [0usize, 1, 3, 8] {
            let seq = PulseSequence::udd(n, 2.7).unwrap();
            assert!(filter_value(&seq, 0.0).norm() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn free_evolution_closed_form() {
        let seq = PulseSequence::free_evolution(1.7).unwrap();
        for k in 1..40 {
            let w = 0.3 * k as f64;
            let expect = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, 1.7 * w);
            let got = filter_value(&seq, w);
            assert!((got - expect).norm() < 1e-13);
            // |1 - e^{iTw}|^2 = 4 sin^2(Tw/2)
            let mag = 4.0 * (1.7 * w / 2.0).sin().powi(2);
            assert!((filter_magnitude_sq(&seq, w) - mag).abs() < 1e-12);
        }
    }

    #[test]
    fn spin_echo_hand_value() {
        // (1 - e^{i pi}) - (e^{i pi} - e^{2 i pi}) = 4 at omega = 2 pi / T.
        let seq = PulseSequence::udd(1, 2.0).unwrap();
        let w = std::f64::consts::PI;
        let got = filter_value(&seq, w);
        assert!((got - Complex64::new(4.0, 0.0)).norm() < 1e-12, "got {got}");
    }

    #[test]
    fn spin_echo_magnitude_closed_form() {
        // 16 sin^4(omega T / 4).
        let t = 3.1;
        let seq = PulseSequence::udd(1, t).unwrap();
        for k in 0..60 {
            let w = 0.17 * k as f64;
            let expect = 16.0 * (w * t / 4.0).sin().powi(4);
            let got = filter_magnitude_sq(&seq, w);
            assert!((got - expect).abs() < 1e-11 * (1.0 + expect), "w={w}");
        }
    }

    #[test]
    fn algebraic_forms_agree() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for n in 0..=8usize {
            for _ in 0..20 {
                let mut intervals: Vec<f64> = (0..n + 1).map(|_| 0.05 + next()).collect();
                intervals[0] += 0.2;
                let seq = PulseSequence::from_intervals(&intervals).unwrap();
                let w = 6.0 * next();
                let a = filter_value(&seq, w);
                let b = filter_value_regrouped(&seq, w);
                assert!(
                    (a - b).norm() <= 1e-12 * (1.0 + a.norm()),
                    "n={n} w={w}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn magnitude_bounded_by_pulse_count() {
        for n in 0..=10usize {
            let seq = PulseSequence::udd(n, 4.0).unwrap();
            for k in 0..200 {
                let w = 0.11 * k as f64;
                let bound = 2.0 * (n as f64 + 1.0);
                assert!(filter_value(&seq, w).norm() <= bound + 1e-12, "n={n} w={w}");
            }
        }
    }

    #[test]
    fn udd_small_frequency_order() {
        // |f_UDD(omega)| ~ omega^{n+1}: the compensated ratio is stable
        // between two probe frequencies. For n = 6 the filter value at
        // omega T = 0.1 is already ~1e-14 (a sum of order-one terms
        // cancelling to 14 digits), so probes much below omega T = 0.1
        // would measure rounding noise rather than the leading order.
        for n in 1..=6usize {
            let t = 1.0;
            let seq = PulseSequence::udd(n, t).unwrap();
            let probe = |w: f64| filter_value(&seq, w).norm() / w.powi(n as i32 + 1);
            let r1 = probe(0.2 / t);
            let r2 = probe(0.1 / t);
            assert!(r1.is_finite() && r1 > 0.0);
            assert!((r1 / r2 - 1.0).abs() < 0.05, "n={n}: ratio {r1} vs {r2}");
        }
    }

    #[test]
    fn l1_norm_free_evolution_antiderivative() {
        // integral of 2|sin(w/2)| over [0, pi] = 4(1 - cos(pi/2)) = 4.
        let seq = PulseSequence::free_evolution(1.0).unwrap();
        let got = filter_l1_norm(&seq, std::f64::consts::PI, &quad()).unwrap();
        let expect = 4.0 * (1.0 - (std::f64::consts::PI / 2.0).cos());
        assert!((got - expect).abs() < 1e-8, "got {got} want {expect}");
    }

    #[test]
    fn l1_norm_matches_trapezoid_oracle() {
        let seq = PulseSequence::from_intervals(&[0.31, 0.17, 0.45, 0.23, 0.39, 0.27]).unwrap();
        let omega_c = 4.0;
        let got = filter_l1_norm(&seq, omega_c, &quad()).unwrap();
        let nodes = 1_000_001usize;
        let h = omega_c / (nodes - 1) as f64;
        let mut oracle =
            0.5 * (filter_value(&seq, 0.0).norm() + filter_value(&seq, omega_c).norm());
        for k in 1..nodes - 1 {
            oracle += filter_value(&seq, h * k as f64).norm();
        }
        oracle *= h;
        assert!(
            (got - oracle).abs() < 1e-5 * oracle,
            "got {got} oracle {oracle}"
        );
    }
}
