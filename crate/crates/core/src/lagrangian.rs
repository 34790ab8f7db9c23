//! The Lagrangian payoff and the explicit constants that set the dual learning rate.

use crate::error::{check_len, Error, Result};
use crate::types::DualVector;

/// `f - <lambda, g>`.
pub fn lagrangian(f_val: f64, g_vec: &[f64], lambda: &DualVector) -> Result<f64> {
    check_len("lagrangian cost vector", lambda.len(), g_vec.len())?;
    Ok(f_val - lambda.dot(g_vec))
}

/// Azuma slack `E_{T,delta} = sqrt(16 T ln(2T/delta))`, natural log.
pub fn concentration_constant(horizon: usize, delta: f64) -> Result<f64> {
    if horizon < 1 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta {delta} outside (0, 1)")));
    }
    let t = horizon as f64;
    Ok((16.0 * t * (2.0 * t / delta).ln()).sqrt())
}

/// Dual learning rate `1 / (800 m max(primal_bound, E))`.
pub fn eta_ogd(m: usize, primal_bound: f64, concentration: f64) -> Result<f64> {
    if m < 1 {
        return Err(Error::invalid("m must be at least 1"));
    }
    if !(primal_bound > 0.0) || !(concentration > 0.0) {
        return Err(Error::invalid(format!(
            "primal bound ({primal_bound}) and concentration ({concentration}) must be positive"
        )));
    }
    Ok(1.0 / (800.0 * m as f64 * primal_bound.max(concentration)))
}

/// Interval-regret bound of EXP3-SIX without its hidden constant: `sqrt(K T) ln(K T / delta)`.
pub fn exp3six_regret_bound(num_arms: usize, horizon: usize, delta: f64) -> Result<f64> {
    if num_arms < 2 || horizon < 1 || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("need K >= 2, T >= 1 and delta in (0, 1)"));
    }
    let kt = (num_arms * horizon) as f64;
    Ok(kt.sqrt() * (kt / delta).ln())
}

/// Interval-regret bound of the inverse-gap-weighting primal with the `L^2` factor removed:
/// `504 m Err ln(T^2/delta) sqrt(K T)`.
pub fn contextual_regret_bound(
    num_constraints: usize,
    num_arms: usize,
    horizon: usize,
    delta: f64,
    oracle_error_bound: f64,
) -> Result<f64> {
    if num_arms < 2 || horizon < 1 || !(delta > 0.0 && delta < 1.0) || !(oracle_error_bound > 0.0) {
        return Err(Error::invalid(
            "need K >= 2, T >= 1, delta in (0, 1) and a positive oracle error bound",
        ));
    }
    let t = horizon as f64;
    Ok(504.0
        * num_constraints as f64
        * oracle_error_bound
        * (t * t / delta).ln()
        * ((num_arms as f64) * t).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dv(v: &[f64]) -> DualVector {
        DualVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn lagrangian_examples() {
        assert!((lagrangian(0.7, &[0.2, -0.1], &dv(&[1.0, 2.0])).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(lagrangian(0.4, &[0.3], &dv(&[0.0])).unwrap(), 0.4);
        assert_eq!(lagrangian(1.0, &[1.0], &dv(&[13.0])).unwrap(), -12.0);
    }

    #[test]
    fn lagrangian_dimension_mismatch() {
        assert!(matches!(
            lagrangian(0.5, &[0.1, 0.2], &dv(&[1.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    // Reference values from a 30-digit evaluation of sqrt(16 T ln(2T/delta)).
    #[test]
    fn concentration_examples() {
        assert!((concentration_constant(100, 0.1).unwrap() - 110.278936952018773).abs() < 1e-9);
        assert!((concentration_constant(10_000, 0.05).unwrap() - 1436.61935535284330).abs() < 1e-8);
        assert!((concentration_constant(1, 0.5).unwrap() - 4.70964009006189876).abs() < 1e-12);
    }

    #[test]
    fn concentration_rejects_bad_delta() {
        assert!(concentration_constant(10, 0.0).is_err());
        assert!(concentration_constant(10, 1.0).is_err());
        assert!(concentration_constant(0, 0.5).is_err());
    }

    #[test]
    fn concentration_monotone_on_grid() {
        let deltas = [0.01, 0.05, 0.1, 0.3, 0.5, 0.9];
        let horizons = [1usize, 2, 10, 100, 1000, 100_000];
        for &d in &deltas {
            for w in horizons.windows(2) {
                assert!(
                    concentration_constant(w[0], d).unwrap()
                        < concentration_constant(w[1], d).unwrap()
                );
            }
        }
        for &t in &horizons {
            for w in deltas.windows(2) {
                assert!(
                    concentration_constant(t, w[0]).unwrap()
                        > concentration_constant(t, w[1]).unwrap()
                );
            }
        }
    }

    #[test]
    fn eta_ogd_examples() {
        assert_eq!(eta_ogd(2, 100.0, 50.0).unwrap(), 1.0 / 160_000.0);
        assert!((eta_ogd(2, 100.0, 50.0).unwrap() - 6.25e-6).abs() < 1e-18);
        assert_eq!(eta_ogd(1, 1.0, 1.0).unwrap(), 1.25e-3);
        assert!((eta_ogd(1, 50.0, 110.28).unwrap() - 1.13347841857091041e-5).abs() < 1e-15);
    }

    #[test]
    fn eta_ogd_rejects_nonpositive() {
        assert!(eta_ogd(0, 1.0, 1.0).is_err());
        assert!(eta_ogd(1, 0.0, 1.0).is_err());
        assert!(eta_ogd(1, 1.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn lagrangian_is_linear_in_lambda(
            f in 0.0f64..1.0,
            g in proptest::collection::vec(-1.0f64..1.0, 4),
            l1 in proptest::collection::vec(0.0f64..20.0, 4),
            l2 in proptest::collection::vec(0.0f64..20.0, 4),
        ) {
            let sum: Vec<f64> = l1.iter().zip(&l2).map(|(a, b)| a + b).collect();
            let lhs = lagrangian(f, &g, &dv(&sum)).unwrap();
            let rhs = lagrangian(f, &g, &dv(&l1)).unwrap() + lagrangian(0.0, &g, &dv(&l2)).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn eta_ogd_scales_inverse_in_m(m in 1usize..50, p in 0.1f64..1e6, e in 0.1f64..1e6) {
            prop_assert_eq!(eta_ogd(2 * m, p, e).unwrap(), eta_ogd(m, p, e).unwrap() / 2.0);
        }
    }
}
