//! Strictly increasing bijections between sampler space p ∈ (0,1) and the
//! variable space, with exact log-Jacobian terms.
//!
//! Two maps are provided: a scaled sigmoid p = 1/(1 + e^(-x/A)) covering the
//! whole real line, and the ratio map x = p/(1 - p) covering the positive
//! reals. The log-Jacobian log(dx/dp) is what turns a density over x into the
//! equivalent density over p.

use thiserror::Error;

/// Default sigmoid scale; adequate for variables roughly inside (-1000, 1000).
pub const DEFAULT_SCALE: f64 = 100.0;

/// Guard band for `expand` and `log_jacobian`: p is accepted only strictly
/// inside (P_GUARD, 1 - P_GUARD). The shrinking interval never legitimately
/// reaches the endpoints, so p outside the band signals an upstream bug or a
/// state beyond the map's double-precision resolution.
pub const P_GUARD: f64 = 1e-15;

#[derive(Debug, Error, PartialEq)]
pub enum TransformError {
    #[error("input must be finite, got {0}")]
    NonFinite(f64),
    #[error("positive-ratio map requires x > 0, got {0}")]
    NonPositive(f64),
    #[error("p = {0} lies outside the unit-interval guard band (1e-15, 1 - 1e-15)")]
    OutsideUnitBand(f64),
    #[error("sigmoid scale must be positive and finite, got {0}")]
    BadScale(f64),
}

/// A bijection between (0,1) and the variable space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    /// p = 1/(1 + e^(-x/scale)), mapping all of R onto (0,1).
    ScaledSigmoid { scale: f64 },
    /// x = p/(1 - p), mapping (0,1) onto (0, inf). No scale knob: callers who
    /// need one should rescale x itself.
    PositiveRatio,
}

impl Transform {
    pub fn scaled_sigmoid(scale: f64) -> Result<Self, TransformError> {
        if scale > 0.0 && scale.is_finite() {
            Ok(Transform::ScaledSigmoid { scale })
        } else {
            Err(TransformError::BadScale(scale))
        }
    }

    pub fn positive_ratio() -> Self {
        Transform::PositiveRatio
    }

    /// Variable space -> (0,1). Saturates in floating point for very large
    /// |x|; `expand`/`log_jacobian` reject such values via the guard band.
    pub fn shrink(&self, x: f64) -> Result<f64, TransformError> {
        if !x.is_finite() {
            return Err(TransformError::NonFinite(x));
        }
        match *self {
            Transform::ScaledSigmoid { scale } => Ok(sigmoid(x / scale)),
            Transform::PositiveRatio => {
                if x <= 0.0 {
                    Err(TransformError::NonPositive(x))
                } else {
                    Ok(x / (1.0 + x))
                }
            }
        }
    }

    /// (0,1) -> variable space; inverse of `shrink`.
    pub fn expand(&self, p: f64) -> Result<f64, TransformError> {
        check_band(p)?;
        match *self {
            Transform::ScaledSigmoid { scale } => Ok(scale * logit(p)),
            Transform::PositiveRatio => Ok(p / (1.0 - p)),
        }
    }

    /// log(dx/dp) at p, computed directly in log space so it stays finite
    /// over the whole guard band.
    pub fn log_jacobian(&self, p: f64) -> Result<f64, TransformError> {
        check_band(p)?;
        match *self {
            // dx/dp = scale / (p (1-p))
            Transform::ScaledSigmoid { scale } => Ok(scale.ln() - p.ln() - ln_one_minus(p)),
            // dx/dp = 1 / (1-p)^2
            Transform::PositiveRatio => Ok(-2.0 * ln_one_minus(p)),
        }
    }
}

fn check_band(p: f64) -> Result<(), TransformError> {
    if p > P_GUARD && p < 1.0 - P_GUARD {
        Ok(())
    } else {
        Err(TransformError::OutsideUnitBand(p))
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(p / (1-p)) without cancellation on either side of 1/2.
fn logit(p: f64) -> f64 {
    if p <= 0.5 {
        p.ln() - (-p).ln_1p()
    } else {
        // 1 - p is exact for p in [1/2, 1] (Sterbenz), so go through it.
        let q = 1.0 - p;
        (-q).ln_1p() - q.ln()
    }
}

/// log(1 - p) without cancellation.
fn ln_one_minus(p: f64) -> f64 {
    if p <= 0.5 {
        (-p).ln_1p()
    } else {
        (1.0 - p).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sigmoid100() -> Transform {
        Transform::scaled_sigmoid(100.0).unwrap()
    }

    #[test]
    fn shrink_pinned_values() {
        assert_eq!(sigmoid100().shrink(0.0).unwrap(), 0.5);
        assert_eq!(Transform::positive_ratio().shrink(1.0).unwrap(), 0.5);
        // Direct evaluation of the scaled sigmoid at x = scale.
        assert_relative_eq!(
            sigmoid100().shrink(100.0).unwrap(),
            0.7310585786300049,
            max_relative = 1e-15
        );
    }

    #[test]
    fn expand_pinned_values() {
        assert_eq!(sigmoid100().expand(0.5).unwrap(), 0.0);
        assert_eq!(Transform::positive_ratio().expand(0.5).unwrap(), 1.0);
        let p = sigmoid100().shrink(100.0).unwrap();
        assert_relative_eq!(sigmoid100().expand(p).unwrap(), 100.0, max_relative = 1e-12);
    }

    #[test]
    fn log_jacobian_pinned_values() {
        // A/(p(1-p)) = 400 at p = 1/2, A = 100.
        assert_relative_eq!(
            sigmoid100().log_jacobian(0.5).unwrap(),
            5.991464547107982,
            max_relative = 1e-15
        );
        // 1/(1-p)^2 = 4 at p = 1/2.
        assert_relative_eq!(
            Transform::positive_ratio().log_jacobian(0.5).unwrap(),
            1.3862943611198906,
            max_relative = 1e-15
        );
        // With A = 1 the scaled map reduces to the plain sigmoid Jacobian.
        let unit = Transform::scaled_sigmoid(1.0).unwrap();
        assert_relative_eq!(
            unit.log_jacobian(0.5).unwrap(),
            1.3862943611198906,
            max_relative = 1e-15
        );
    }

    #[test]
    fn domain_errors() {
        let t = sigmoid100();
        assert!(matches!(
            t.shrink(f64::NAN).unwrap_err(),
            TransformError::NonFinite(_)
        ));
        assert!(matches!(
            t.shrink(f64::INFINITY).unwrap_err(),
            TransformError::NonFinite(_)
        ));
        assert_eq!(
            Transform::positive_ratio().shrink(-1.0).unwrap_err(),
            TransformError::NonPositive(-1.0)
        );
        assert_eq!(
            Transform::positive_ratio().shrink(0.0).unwrap_err(),
            TransformError::NonPositive(0.0)
        );
        for p in [0.0, 1.0, -0.5, 1.5, 1e-16, 1.0 - 1e-16] {
            assert!(matches!(
                t.expand(p).unwrap_err(),
                TransformError::OutsideUnitBand(_)
            ));
            assert!(t.log_jacobian(p).is_err());
        }
        assert_eq!(
            Transform::scaled_sigmoid(0.0).unwrap_err(),
            TransformError::BadScale(0.0)
        );
        assert!(Transform::scaled_sigmoid(-3.0).is_err());
        assert!(Transform::scaled_sigmoid(f64::NAN).is_err());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let h = 1e-8;
        for t in [
            sigmoid100(),
            Transform::scaled_sigmoid(1.0).unwrap(),
            Transform::positive_ratio(),
        ] {
            for p in [0.01, 0.1, 0.5, 0.9, 0.99] {
                let fd = (t.expand(p + h).unwrap() - t.expand(p - h).unwrap()) / (2.0 * h);
                let jac = t.log_jacobian(p).unwrap().exp();
                assert_relative_eq!(fd, jac, max_relative = 1e-5);
            }
        }
    }

    // Round-trip envelope actually achievable in f64: the sigmoid output
    // saturates toward 1.0 at roughly half an ulp per 2^-53, which caps the
    // recoverable |x| around 20*scale at the 1e-9 relative level. The
    // acceptance suite probes the full saturation region; here we pin the
    // conservative envelope.
    proptest! {
        #[test]
        fn sigmoid_round_trip(x in -1800.0f64..1800.0) {
            let t = sigmoid100();
            let back = t.expand(t.shrink(x).unwrap()).unwrap();
            prop_assert!((back - x).abs() <= 1e-9 * x.abs().max(1.0));
        }

        #[test]
        fn positive_round_trip(log_x in -6.0f64..6.0) {
            let x = 10f64.powf(log_x);
            let t = Transform::positive_ratio();
            let back = t.expand(t.shrink(x).unwrap()).unwrap();
            prop_assert!((back - x).abs() <= 1e-9 * x.abs().max(1.0));
        }

        #[test]
        fn shrink_is_strictly_increasing(a in -3000.0f64..3000.0, b in -3000.0f64..3000.0) {
            prop_assume!(a != b);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let t = sigmoid100();
            prop_assert!(t.shrink(lo).unwrap() < t.shrink(hi).unwrap());
        }

        #[test]
        fn positive_shrink_is_strictly_increasing(a in 1e-6f64..1e6, b in 1e-6f64..1e6) {
            prop_assume!(a != b);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let t = Transform::positive_ratio();
            prop_assert!(t.shrink(lo).unwrap() < t.shrink(hi).unwrap());
        }

        #[test]
        fn expand_is_strictly_increasing(a in 0.001f64..0.999, b in 0.001f64..0.999) {
            prop_assume!(a != b);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            for t in [sigmoid100(), Transform::positive_ratio()] {
                prop_assert!(t.expand(lo).unwrap() < t.expand(hi).unwrap());
            }
        }
    }
}
