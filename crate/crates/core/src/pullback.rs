//! Hitting sets `I_k = { x : min_i |f⁽ᵏ⁾(x) - βᵢ| ≤ ε }` as iterated preimages of `I₀`.
//!
//! `I_{k+1} = f⁻¹(I_k)`: an interval `[a, b]` pulls back to one interval per
//! branch, `[x(a), x(b)]`, because every branch is increasing. Endpoints are
//! rounded outward by one ulp (unless the root was met exactly) so the computed
//! set contains the true one.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::map::{MapSpec, PrecisionPolicy};
use crate::scalar::Real;

pub const DEFAULT_INTERVAL_BUDGET: usize = 1_000_000;

/// `⋃ᵢ [βᵢ - ε, βᵢ + ε]`; requires `ε < pole_gap / 2`.
pub fn build_i0<T: Real>(spec: &MapSpec<T>, eps: &T) -> Result<IntervalSet<T>> {
    if !eps.is_positive() {
        return Err(Error::invariant("eps", "must be positive"));
    }
    if let Some(gap) = spec.pole_gap() {
        let limit = gap.half();
        if *eps >= limit {
            return Err(Error::EpsilonTooLarge {
                eps: eps.to_decimal(),
                limit: limit.to_decimal(),
            });
        }
    }
    let intervals = spec
        .betas()
        .iter()
        .map(|b| Interval {
            lo: b.clone() - eps.clone(),
            hi: b.clone() + eps.clone(),
        })
        .collect();
    Ok(IntervalSet::from_intervals(intervals))
}

fn pull_interval<T: Real>(spec: &MapSpec<T>, iv: &Interval<T>, policy: &PrecisionPolicy) -> Result<Vec<Interval<T>>> {
    spec.branches()
        .iter()
        .map(|branch| {
            let left = spec.preimage_bracket(&iv.lo, branch, policy)?;
            let right = spec.preimage_bracket(&iv.hi, branch, policy)?;
            let lo = if left.is_exact() { left.lo } else { left.lo.next_down() };
            let hi = if right.is_exact() { right.hi } else { right.hi.next_up() };
            Ok(Interval { lo, hi })
        })
        .collect()
}

/// `f⁻¹(S)`: `(m + 1)·|S|` intervals before merging.
pub fn preimage_interval_set<T: Real>(
    spec: &MapSpec<T>,
    set: &IntervalSet<T>,
    policy: &PrecisionPolicy,
) -> Result<IntervalSet<T>> {
    let pieces = set
        .intervals()
        .par_iter()
        .map(|iv| pull_interval(spec, iv, policy))
        .collect::<Result<Vec<_>>>()?;
    Ok(IntervalSet::from_intervals(pieces.into_iter().flatten().collect()))
}

/// `[I₀, I₁, …, I_k]`, with the default interval budget.
pub fn pullback<T: Real>(spec: &MapSpec<T>, eps: &T, k: usize, policy: &PrecisionPolicy) -> Result<Vec<IntervalSet<T>>> {
    pullback_with_budget(spec, eps, k, policy, DEFAULT_INTERVAL_BUDGET)
}

pub fn pullback_with_budget<T: Real>(
    spec: &MapSpec<T>,
    eps: &T,
    k: usize,
    policy: &PrecisionPolicy,
    budget: usize,
) -> Result<Vec<IntervalSet<T>>> {
    let branches = spec.m() as u128 + 1;
    let final_count = (spec.m() as u128).saturating_mul(branches.saturating_pow(k.min(u32::MAX as usize) as u32));
    if final_count > budget as u128 {
        return Err(Error::BudgetExceeded {
            what: "pullback intervals",
            requested: final_count,
            limit: budget as u128,
        });
    }
    let mut levels = Vec::with_capacity(k + 1);
    levels.push(build_i0(spec, eps)?);
    for _ in 0..k {
        let next = preimage_interval_set(spec, levels.last().expect("non-empty"), policy)?;
        levels.push(next);
    }
    Ok(levels)
}

/// Entry `(k, l)` is `true` iff `I_k ∩ I_l = ∅`.
pub fn pairwise_disjoint<T: Real>(sets: &[IntervalSet<T>]) -> Vec<Vec<bool>> {
    let n = sets.len();
    let mut out = vec![vec![false; n]; n];
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|k| (k..n).map(move |l| (k, l))).collect();
    let results: Vec<bool> = pairs
        .par_iter()
        .map(|&(k, l)| !sets[k].intersects(&sets[l]))
        .collect();
    for (&(k, l), d) in pairs.iter().zip(results) {
        out[k][l] = d;
        out[l][k] = d;
    }
    out
}

/// Largest `w` such that every pair `k ≠ l` with `|k - l| ≤ w` is disjoint
/// (`n - 1` when all distinct pairs are).
pub fn disjointness_window(matrix: &[Vec<bool>]) -> usize {
    let n = matrix.len();
    (1..n)
        .find(|&gap| (0..n - gap).any(|k| !matrix[k][k + gap]))
        .map_or(n.saturating_sub(1), |gap| gap - 1)
}

/// `|measure(f⁻¹(S)) - measure(S)|`, zero in exact arithmetic for every bounded `S`.
pub fn glasser_measure_check<T: Real>(spec: &MapSpec<T>, set: &IntervalSet<T>, policy: &PrecisionPolicy) -> Result<T> {
    let pre = preimage_interval_set(spec, set, policy)?;
    Ok((pre.measure().clone() - set.measure().clone()).abs())
}

/// Per-level summary of a pullback run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSummary {
    pub k: usize,
    pub intervals: usize,
    pub expected_intervals: u128,
    pub measure: String,
    /// `|I_k| - |I₀|`.
    pub measure_discrepancy: String,
    pub radius: Option<String>,
    /// `R_k / √k` for `k ≥ 1`.
    pub containment_ratio: Option<f64>,
    pub merge_events: usize,
}

pub fn summarize_levels<T: Real>(spec: &MapSpec<T>, levels: &[IntervalSet<T>]) -> Vec<LevelSummary> {
    let base = levels.first().map(|l| l.measure().clone()).unwrap_or_else(T::zero);
    let m = spec.m() as u128;
    levels
        .iter()
        .enumerate()
        .map(|(k, set)| {
            let radius = set.radius();
            LevelSummary {
                k,
                intervals: set.len(),
                expected_intervals: m * (m + 1).pow(k as u32),
                measure: set.measure().to_decimal(),
                measure_discrepancy: (set.measure().clone() - base.clone()).to_decimal(),
                containment_ratio: radius
                    .as_ref()
                    .filter(|_| k > 0)
                    .map(|r| r.to_f64() / (k as f64).sqrt()),
                radius: radius.map(|r| r.to_decimal()),
                merge_events: set.merge_events().len(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{Signed, Zero};
    use crate::map::MapDef;
    use crate::scalar::{BigFloat, Rational};

    fn bf(v: f64) -> BigFloat {
        BigFloat::with_val(256, v)
    }

    fn graham() -> MapSpec<BigFloat> {
        MapDef::graham().instantiate(256).unwrap()
    }

    fn policy() -> PrecisionPolicy {
        PrecisionPolicy::big_float(256).unwrap()
    }

    #[test]
    fn i0_examples() {
        let g = MapDef::graham().instantiate::<Rational>(0).unwrap();
        let eps = Rational::from_ratio(1, 10);
        let s = build_i0(&g, &eps).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(*s.measure(), Rational::from_ratio(1, 5));
        let two = MapDef::parse(&["1", "1"], &["-1", "1"]).unwrap().instantiate::<Rational>(0).unwrap();
        let s = build_i0(&two, &eps).unwrap();
        assert_eq!(s.intervals()[0].lo, Rational::from_ratio(-11, 10));
        assert_eq!(s.intervals()[1].hi, Rational::from_ratio(11, 10));
        assert_eq!(*s.measure(), Rational::from_ratio(2, 5));
        assert!(matches!(
            build_i0(&two, &Rational::from_ratio(3, 2)),
            Err(Error::EpsilonTooLarge { .. })
        ));
    }

    #[test]
    fn preimage_of_neighbourhood_matches_quadratic_roots() {
        let g = graham();
        let s = IntervalSet::from_pairs(vec![(bf(-0.1), bf(0.1))]).unwrap();
        let pre = preimage_interval_set(&g, &s, &policy()).unwrap();
        assert_eq!(pre.len(), 2);
        // roots of x² - y x - 1 = 0 are (y ± √(y² + 4)) / 2
        let root = |y: f64, sign: f64| (y + sign * (y * y + 4.0).sqrt()) / 2.0;
        let iv = pre.intervals();
        assert!((iv[0].lo.to_f64() - root(-0.1, -1.0)).abs() < 1e-15);
        assert!((iv[0].hi.to_f64() - root(0.1, -1.0)).abs() < 1e-15);
        assert!((iv[1].lo.to_f64() - root(-0.1, 1.0)).abs() < 1e-15);
        assert!((iv[1].hi.to_f64() - root(0.1, 1.0)).abs() < 1e-15);
        assert!((iv[1].lo.to_f64() - 0.9512).abs() < 1e-4 && (iv[1].hi.to_f64() - 1.0512).abs() < 1e-4);
        let d = glasser_measure_check(&g, &s, &policy()).unwrap();
        assert!(d < bf(1e-20), "discrepancy {d}");
    }

    #[test]
    fn degenerate_and_empty_sets() {
        let g = graham();
        let point = IntervalSet::from_pairs(vec![(bf(0.0), bf(0.0))]).unwrap();
        let pre = preimage_interval_set(&g, &point, &policy()).unwrap();
        assert_eq!(pre.intervals()[0], Interval { lo: bf(-1.0), hi: bf(-1.0) });
        assert_eq!(pre.intervals()[1], Interval { lo: bf(1.0), hi: bf(1.0) });
        assert!(pre.measure().is_zero());
        let empty = IntervalSet::<BigFloat>::empty();
        assert!(preimage_interval_set(&g, &empty, &policy()).unwrap().is_empty());
        assert!(glasser_measure_check(&g, &empty, &policy()).unwrap().is_zero());
    }

    #[test]
    fn five_level_pullback() {
        let g = graham();
        let levels = pullback(&g, &bf(0.1), 5, &policy()).unwrap();
        assert_eq!(levels[5].len(), 32);
        for level in &levels {
            assert!((level.measure().clone() - bf(0.2)).abs() < bf(1e-20));
            assert!(level.merge_events().is_empty());
        }
        let summary = summarize_levels(&g, &levels);
        assert_eq!(summary[5].expected_intervals, 32);
        assert!(summary[5].containment_ratio.unwrap() < 10.0);
    }

    #[test]
    fn budget_guard() {
        let g = graham();
        let err = pullback_with_budget(&g, &bf(0.1), 10, &policy(), 1000).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { requested: 1024, .. }));
    }

    #[test]
    fn window_of_disjointness_matrix() {
        let t = true;
        let f = false;
        let all = vec![vec![f, t, t], vec![t, f, t], vec![t, t, f]];
        assert_eq!(disjointness_window(&all), 2);
        let gap2 = vec![vec![f, t, f], vec![t, f, t], vec![f, t, f]];
        assert_eq!(disjointness_window(&gap2), 1);
        let none = vec![vec![f, f], vec![f, f]];
        assert_eq!(disjointness_window(&none), 0);
    }

    #[test]
    fn shared_interval_is_not_disjoint() {
        let a = IntervalSet::from_pairs(vec![(bf(0.0), bf(1.0)), (bf(3.0), bf(4.0))]).unwrap();
        let b = IntervalSet::from_pairs(vec![(bf(3.0), bf(4.0))]).unwrap();
        let m = pairwise_disjoint(&[a, b]);
        assert!(!m[0][1] && !m[1][0] && !m[0][0]);
    }
}
