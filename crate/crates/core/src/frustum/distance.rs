use super::{FrustumError, MAX_DISTANCE_M};

/// Metres in `[0, 250]` to the detector's normalized `[0, 1]` scale.
pub fn normalize_distance(d: f64) -> Result<f64, FrustumError> {
    if !(0.0..=MAX_DISTANCE_M).contains(&d) {
        return Err(FrustumError::Range { value: d, min: 0.0, max: MAX_DISTANCE_M });
    }
    Ok(d / MAX_DISTANCE_M)
}

pub fn denormalize_distance(n: f64) -> Result<f64, FrustumError> {
    if !(0.0..=1.0).contains(&n) {
        return Err(FrustumError::Range { value: n, min: 0.0, max: 1.0 });
    }
    Ok(n * MAX_DISTANCE_M)
}

/// Huber loss of a residual; quadratic inside `delta`, linear outside.
pub fn huber(residual: f64, delta: f64) -> f64 {
    assert!(delta > 0.0, "huber delta must be positive");
    let a = residual.abs();
    if a <= delta {
        0.5 * a * a
    } else {
        delta * (a - 0.5 * delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_distance(125.0).unwrap(), 0.5);
        assert_eq!(normalize_distance(0.0).unwrap(), 0.0);
        assert_eq!(normalize_distance(250.0).unwrap(), 1.0);
        assert!(normalize_distance(-0.1).is_err());
        assert!(normalize_distance(250.5).is_err());
        assert!(normalize_distance(f64::NAN).is_err());
        assert!(denormalize_distance(1.01).is_err());
    }

    #[test]
    fn huber_branches() {
        assert_eq!(huber(0.5, 1.0), 0.125);
        assert_eq!(huber(2.0, 1.0), 1.5);
        assert_eq!(huber(1.0, 1.0), 0.5);
    }

    proptest! {
        #[test]
        fn normalization_round_trip(d in 0.0f64..=250.0) {
            let back = denormalize_distance(normalize_distance(d).unwrap()).unwrap();
            prop_assert!((back - d).abs() <= 1e-12);
        }

        #[test]
        fn huber_symmetric_and_continuous(r in -50.0f64..50.0, delta in 0.01f64..10.0) {
            prop_assert_eq!(huber(-r, delta), huber(r, delta));
            let eps = 1e-9;
            prop_assert!((huber(delta - eps, delta) - huber(delta + eps, delta)).abs() < 1e-6);
        }
    }
}
