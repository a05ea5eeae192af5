//! Privacy budget arithmetic: basic sequential and parallel composition,
//! unit-of-privacy conversion and noise calibration for the Laplace and
//! Gaussian mechanisms.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// An `(epsilon, delta)` guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    pub epsilon: f64,
    pub delta: f64,
}

impl PrivacyBudget {
    /// Identity of composition. Not a valid release budget on its own.
    pub const ZERO: PrivacyBudget = PrivacyBudget { epsilon: 0.0, delta: 0.0 };

    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::param("epsilon", format!("must be finite and > 0, got {epsilon}")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::param("delta", format!("must lie in [0, 1), got {delta}")));
        }
        Ok(PrivacyBudget { epsilon, delta })
    }

    pub fn pure(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 0.0)
    }
}

/// Granularity whose presence a guarantee hides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitOfPrivacy {
    Location,
    /// A window of `w` consecutive locations of one trajectory.
    MultiEvent { w: usize },
    /// One trajectory.
    Instance,
    /// All trajectories of one user.
    User,
}

impl UnitOfPrivacy {
    pub fn multi_event(w: usize) -> Result<Self> {
        if w == 0 {
            return Err(Error::param("w", "window must be >= 1"));
        }
        Ok(UnitOfPrivacy::MultiEvent { w })
    }

    /// Sort key from finest to coarsest. A one-location window is a location.
    fn granularity(&self) -> (u8, usize) {
        match *self {
            UnitOfPrivacy::Location | UnitOfPrivacy::MultiEvent { w: 1 } => (0, 1),
            UnitOfPrivacy::MultiEvent { w } => (1, w),
            UnitOfPrivacy::Instance => (2, 0),
            UnitOfPrivacy::User => (3, 0),
        }
    }

    /// True when `self` protects the same or a larger unit than `other`.
    pub fn at_least_as_coarse_as(&self, other: &UnitOfPrivacy) -> bool {
        self.granularity() >= other.granularity()
    }
}

impl fmt::Display for UnitOfPrivacy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitOfPrivacy::Location => f.write_str("location"),
            UnitOfPrivacy::MultiEvent { w } => write!(f, "multi:{w}"),
            UnitOfPrivacy::Instance => f.write_str("instance"),
            UnitOfPrivacy::User => f.write_str("user"),
        }
    }
}

impl FromStr for UnitOfPrivacy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "location" => Ok(UnitOfPrivacy::Location),
            "instance" => Ok(UnitOfPrivacy::Instance),
            "user" => Ok(UnitOfPrivacy::User),
            _ => {
                let w = s
                    .strip_prefix("multi:")
                    .and_then(|w| w.parse::<usize>().ok())
                    .ok_or_else(|| {
                        Error::param("uop", format!("expected user|instance|location|multi:W, got `{s}`"))
                    })?;
                UnitOfPrivacy::multi_event(w)
            }
        }
    }
}

/// Correctly rounded sum of finite values (Shewchuk / `math.fsum`).
/// The result does not depend on summation order.
pub fn exact_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }

    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        let y = partials[n - 1];
        n -= 1;
        hi = x + y;
        lo = y - (hi - x);
        if lo != 0.0 {
            break;
        }
    }
    // Round half-even across the remaining partials.
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

/// Basic sequential composition: `(sum eps_i, sum delta_i)`.
pub fn sequential_compose(budgets: &[PrivacyBudget]) -> PrivacyBudget {
    PrivacyBudget {
        epsilon: exact_sum(budgets.iter().map(|b| b.epsilon)),
        delta: exact_sum(budgets.iter().map(|b| b.delta)),
    }
}

/// Parallel composition over disjoint data: `(max eps_i, max delta_i)`.
pub fn parallel_compose(budgets: &[PrivacyBudget]) -> PrivacyBudget {
    budgets.iter().fold(PrivacyBudget::ZERO, |acc, b| PrivacyBudget {
        epsilon: acc.epsilon.max(b.epsilon),
        delta: acc.delta.max(b.delta),
    })
}

/// Re-expresses a guarantee at a coarser unit of privacy. A coarser unit
/// containing at most `m` finer units is protected at `(m eps, m delta)` by
/// sequential composition. Strengthening (coarse to fine) is rejected.
pub fn uop_convert(
    budget: PrivacyBudget,
    from: UnitOfPrivacy,
    to: UnitOfPrivacy,
    m: u64,
) -> Result<PrivacyBudget> {
    if m == 0 {
        return Err(Error::param("m", "must be >= 1"));
    }
    if !to.at_least_as_coarse_as(&from) {
        return Err(Error::UopDirection {
            from: from.to_string(),
            to: to.to_string(),
        });
    }
    if from.granularity() == to.granularity() {
        return Ok(budget);
    }
    let m = m as f64;
    let delta = budget.delta * m;
    if delta >= 1.0 {
        return Err(Error::param("delta", format!("composed delta {delta} is vacuous (>= 1)")));
    }
    Ok(PrivacyBudget {
        epsilon: budget.epsilon * m,
        delta,
    })
}

/// Laplace scale `b = sensitivity / epsilon`.
pub fn laplace_scale(sensitivity: f64, epsilon: f64) -> Result<f64> {
    check_positive("sensitivity", sensitivity)?;
    check_positive("epsilon", epsilon)?;
    Ok(sensitivity / epsilon)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianCalibration {
    pub sigma: f64,
    /// Set when `epsilon > 1`, outside the range where the classic bound is proven.
    pub outside_validity: bool,
}

/// Classic Gaussian mechanism bound `sigma = sensitivity * sqrt(2 ln(1.25 / delta)) / epsilon`.
pub fn gaussian_sigma(sensitivity: f64, epsilon: f64, delta: f64) -> Result<GaussianCalibration> {
    check_positive("sensitivity", sensitivity)?;
    check_positive("epsilon", epsilon)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    let sigma = sensitivity * (2.0 * (1.25 / delta).ln()).sqrt() / epsilon;
    let outside_validity = epsilon > 1.0;
    if outside_validity {
        log::warn!("gaussian_sigma: epsilon = {epsilon} > 1, classic calibration bound does not apply");
    }
    Ok(GaussianCalibration { sigma, outside_validity })
}

/// `delta = 1 / n` for a dataset of `n` records.
pub fn recommend_delta(n_records: u64) -> Result<f64> {
    if n_records < 2 {
        return Err(Error::param(
            "n_records",
            format!("1/n must be < 1, got n = {n_records}"),
        ));
    }
    Ok(1.0 / n_records as f64)
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(e: f64, d: f64) -> PrivacyBudget {
        PrivacyBudget::new(e, d).unwrap()
    }

    #[test]
    fn ten_tenths_make_one() {
        let total = sequential_compose(&[b(0.1, 0.0); 10]);
        assert_eq!(total, PrivacyBudget { epsilon: 1.0, delta: 0.0 });
    }

    #[test]
    fn sequential_cases() {
        assert_eq!(
            sequential_compose(&[b(0.5, 1e-6), b(0.5, 1e-6)]),
            PrivacyBudget { epsilon: 1.0, delta: 2e-6 }
        );
        assert_eq!(sequential_compose(&[]), PrivacyBudget::ZERO);
    }

    #[test]
    fn parallel_cases() {
        assert_eq!(parallel_compose(&[b(0.1, 0.0), b(0.9, 0.0)]), b(0.9, 0.0));
        assert_eq!(parallel_compose(&[b(0.3, 1e-5)]), b(0.3, 1e-5));
        assert_eq!(parallel_compose(&[b(0.9, 1e-7), b(0.1, 1e-5)]), b(0.9, 1e-5));
    }

    #[test]
    fn instance_to_user() {
        let user = uop_convert(b(0.2, 0.0), UnitOfPrivacy::Instance, UnitOfPrivacy::User, 5).unwrap();
        assert_eq!(user.epsilon, 1.0);
        let same = uop_convert(b(0.2, 1e-6), UnitOfPrivacy::Instance, UnitOfPrivacy::User, 1).unwrap();
        assert_eq!(same, b(0.2, 1e-6));
        assert!(matches!(
            uop_convert(b(0.2, 0.0), UnitOfPrivacy::User, UnitOfPrivacy::Instance, 1),
            Err(Error::UopDirection { .. })
        ));
        assert!(uop_convert(b(0.2, 0.0), UnitOfPrivacy::Location, UnitOfPrivacy::User, 0).is_err());
    }

    #[test]
    fn multi_event_ordering() {
        let loc = UnitOfPrivacy::Location;
        let w1 = UnitOfPrivacy::multi_event(1).unwrap();
        let w3 = UnitOfPrivacy::multi_event(3).unwrap();
        assert!(w1.at_least_as_coarse_as(&loc) && loc.at_least_as_coarse_as(&w1));
        assert!(w3.at_least_as_coarse_as(&loc));
        assert!(UnitOfPrivacy::Instance.at_least_as_coarse_as(&w3));
        assert!(uop_convert(b(1.0, 0.0), w3, loc, 1).is_err());
        assert!(UnitOfPrivacy::multi_event(0).is_err());
    }

    #[test]
    fn uop_parse_round_trip() {
        for s in ["user", "instance", "location", "multi:4"] {
            assert_eq!(s.parse::<UnitOfPrivacy>().unwrap().to_string(), s);
        }
        assert!("multi:0".parse::<UnitOfPrivacy>().is_err());
        assert!("window".parse::<UnitOfPrivacy>().is_err());
    }

    #[test]
    fn calibration() {
        assert_eq!(laplace_scale(1.0, 1.0).unwrap(), 1.0);
        // sqrt(2 ln 125000)
        let g = gaussian_sigma(1.0, 1.0, 1e-5).unwrap();
        assert!((g.sigma - 4.844_805_262_605_389).abs() < 1e-12, "{}", g.sigma);
        assert!(!g.outside_validity);
        assert!(gaussian_sigma(1.0, 2.0, 1e-5).unwrap().outside_validity);
        assert!(laplace_scale(1.0, 0.0).is_err());
    }

    #[test]
    fn delta_rule() {
        assert_eq!(recommend_delta(1_000_000).unwrap(), 1e-6);
        assert_eq!(recommend_delta(100).unwrap(), 0.01);
        assert!(recommend_delta(1).is_err());
    }

    #[test]
    fn exact_sum_matches_known_cases() {
        assert_eq!(exact_sum([0.1; 10]), 1.0);
        assert_eq!(exact_sum([1e100, 1.0, -1e100, 1e-100]), 1.0);
        assert_eq!(exact_sum([]), 0.0);
    }

    proptest! {
        #[test]
        fn sequential_is_order_independent(
            eps in prop::collection::vec(1e-4f64..5.0, 0..20),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            let budgets: Vec<_> = eps.iter().map(|&e| b(e, e * 1e-7)).collect();
            let mut shuffled = budgets.clone();
            shuffled.shuffle(&mut crate::rng::rng_from_seed(seed));
            prop_assert_eq!(sequential_compose(&budgets), sequential_compose(&shuffled));

            // associativity: composing a split equals composing the whole
            let k = budgets.len() / 2;
            let left = sequential_compose(&budgets[..k]);
            let right = sequential_compose(&budgets[k..]);
            let whole = sequential_compose(&budgets);
            let nested = sequential_compose(&[left, right]);
            prop_assert!((nested.epsilon - whole.epsilon).abs() <= 1e-12 * whole.epsilon.max(1.0));
        }

        #[test]
        fn parallel_is_idempotent(e in 1e-4f64..5.0, d in 0.0f64..0.01) {
            let x = b(e, d);
            prop_assert_eq!(parallel_compose(&[x, x]), x);
        }

        #[test]
        fn conversion_chains(e in 1e-4f64..2.0, k in 1u64..50, m in 1u64..50) {
            let base = b(e, 0.0);
            let two_step = uop_convert(
                uop_convert(base, UnitOfPrivacy::Location, UnitOfPrivacy::Instance, k).unwrap(),
                UnitOfPrivacy::Instance, UnitOfPrivacy::User, m).unwrap();
            let direct = uop_convert(base, UnitOfPrivacy::Location, UnitOfPrivacy::User, k * m).unwrap();
            prop_assert!((two_step.epsilon - direct.epsilon).abs() <= 1e-12 * direct.epsilon);
        }
    }
}
