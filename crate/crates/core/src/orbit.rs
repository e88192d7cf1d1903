//! Orbits under precision shadowing.
//!
//! Every big-float orbit is, by default, recomputed in lockstep at
//! `bits + shadow_margin_bits`; the index up to which both runs stay within
//! `shadow_agreement_tol` is the orbit's verified prefix. Queries that need an
//! answer (first hit, halving time, itinerary) fail with
//! [`Error::PrecisionExhausted`] when the verified prefix ends before the
//! answer is known, and [`with_adaptive_precision`] retries them with more bits.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::{MapDef, MapSpec, PrecisionPolicy};
use crate::scalar::Real;

/// An exact landing on a pole; the orbit cannot be continued past `step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PoleHit {
    pub step: usize,
    pub pole_index: usize,
}

#[derive(Debug, Clone)]
pub struct Orbit<T> {
    pub x0: T,
    /// `x₀, x₁, …`; shorter than requested when `pole_hit` is set.
    pub values: Vec<T>,
    pub policy: PrecisionPolicy,
    /// Last index at which base and shadow agreed at every earlier index.
    pub verified_through: usize,
    pub pole_hit: Option<PoleHit>,
}

impl<T: Real> Orbit<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last_index(&self) -> usize {
        self.values.len() - 1
    }

    pub fn is_fully_verified(&self) -> bool {
        self.verified_through == self.last_index()
    }
}

/// Lockstep base/shadow iteration.
pub(crate) struct Tracker<'a, T> {
    spec: &'a MapSpec<T>,
    shadow: Option<(MapSpec<T>, T)>,
    tol: T,
    budget: Option<u64>,
    pub(crate) x: T,
    pub(crate) step: usize,
    pub(crate) verified_through: usize,
}

impl<'a, T: Real> Tracker<'a, T> {
    pub(crate) fn new(spec: &'a MapSpec<T>, x0: &T, policy: &PrecisionPolicy) -> Result<Self> {
        if let Some(i) = spec.pole_at(x0) {
            return Err(Error::PoleEvaluation {
                pole_index: i,
                pole: spec.betas()[i].to_decimal(),
            });
        }
        let shadow = if policy.shadow && !T::EXACT {
            let bits = spec.bits() + policy.shadow_margin_bits;
            let shadow_spec = spec.at_bits(bits)?;
            Some((shadow_spec, x0.with_precision(bits)))
        } else {
            None
        };
        let tol_bits = spec.bits() + policy.shadow_margin_bits;
        Ok(Tracker {
            spec,
            shadow,
            tol: T::from_f64(policy.shadow_agreement_tol, tol_bits),
            budget: T::EXACT.then_some(policy.rational_bit_budget),
            x: x0.clone(),
            step: 0,
            verified_through: 0,
        })
    }

    /// `true` while every index so far is verified (always true for exact scalars).
    pub(crate) fn verified(&self) -> bool {
        T::EXACT || self.verified_through == self.step
    }

    /// Advances one step. Pole landings surface as `Error::PoleEvaluation`.
    pub(crate) fn advance(&mut self) -> Result<&T> {
        let next = self.spec.eval(&self.x)?;
        if let Some(limit) = self.budget {
            if next.storage_bits() > limit {
                return Err(Error::exhausted(format!(
                    "exact iterate {} needs {} bits, budget is {limit}",
                    self.step + 1,
                    next.storage_bits()
                )));
            }
        }
        let in_sync = self.verified();
        if let Some((shadow_spec, sx)) = self.shadow.as_mut() {
            if in_sync {
                match shadow_spec.eval(sx) {
                    Ok(s_next) => {
                        let agree = (s_next.clone() - next.clone()).abs() <= self.tol;
                        *sx = s_next;
                        if agree {
                            self.verified_through = self.step + 1;
                        }
                    }
                    Err(_) => {}
                }
            }
        }
        self.x = next;
        self.step += 1;
        if T::EXACT {
            self.verified_through = self.step;
        }
        Ok(&self.x)
    }
}

/// `x₀, f(x₀), …, f⁽ⁿ⁾(x₀)`, truncated (with `pole_hit` set) if an iterate lands on a pole.
pub fn iterate<T: Real>(spec: &MapSpec<T>, x0: &T, n: usize, policy: &PrecisionPolicy) -> Result<Orbit<T>> {
    let mut tracker = Tracker::new(spec, x0, policy)?;
    let mut values = Vec::with_capacity(n + 1);
    values.push(x0.clone());
    let mut pole_hit = None;
    for k in 0..n {
        match tracker.advance() {
            Ok(x) => values.push(x.clone()),
            Err(Error::PoleEvaluation { pole_index, .. }) => {
                pole_hit = Some(PoleHit { step: k, pole_index });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Orbit {
        x0: x0.clone(),
        values,
        policy: policy.clone(),
        verified_through: tracker.verified_through,
        pole_hit,
    })
}

/// Largest `k ≤ n` such that the orbit and its shadow agree at every index up to `k`.
pub fn shadow_verify<T: Real>(spec: &MapSpec<T>, x0: &T, n: usize, policy: &PrecisionPolicy) -> Result<usize> {
    let policy = PrecisionPolicy {
        shadow: true,
        ..policy.clone()
    };
    Ok(iterate(spec, x0, n, &policy)?.verified_through)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hit<T> {
    pub step: usize,
    pub pole_index: usize,
    pub distance: T,
}

/// Outcome of a first-hit search over steps `1..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HitRecord<T> {
    pub x0: T,
    pub eps: T,
    pub n_max: usize,
    pub hit: Option<Hit<T>>,
    pub verified_through: usize,
}

impl<T: Real> HitRecord<T> {
    pub fn n_hit(&self) -> Option<usize> {
        self.hit.as_ref().map(|h| h.step)
    }
}

/// Runs the orbit until `stop(step, x)` fires, for at most `n_max` steps.
///
/// Returns the step at which `stop` fired. Errors with `PrecisionExhausted`
/// if verification is lost before that; a pole landing is an error too.
pub(crate) fn scan<'a, T: Real>(
    spec: &'a MapSpec<T>,
    x0: &T,
    n_max: usize,
    policy: &PrecisionPolicy,
    mut stop: impl FnMut(usize, &T) -> bool,
) -> Result<(Option<usize>, Tracker<'a, T>)> {
    let mut tracker = Tracker::new(spec, x0, policy)?;
    while tracker.step < n_max {
        tracker.advance()?;
        if policy.shadow && !tracker.verified() {
            return Err(Error::exhausted(format!(
                "shadow orbit diverged at step {} (verified through {})",
                tracker.step, tracker.verified_through
            )));
        }
        if stop(tracker.step, &tracker.x) {
            return Ok((Some(tracker.step), tracker));
        }
    }
    Ok((None, tracker))
}

/// Earliest `n ∈ [1, n_max]` with `min_i |f⁽ⁿ⁾(x₀) - βᵢ| ≤ eps`.
pub fn first_hit<T: Real>(
    spec: &MapSpec<T>,
    x0: &T,
    eps: &T,
    n_max: usize,
    policy: &PrecisionPolicy,
) -> Result<HitRecord<T>> {
    if !eps.is_positive() {
        return Err(Error::invariant("eps", "must be positive"));
    }
    let mut found: Option<Hit<T>> = None;
    let (_, tracker) = scan(spec, x0, n_max, policy, |step, x| {
        let (pole_index, distance) = spec.nearest_pole(x);
        if distance <= *eps {
            found = Some(Hit {
                step,
                pole_index,
                distance,
            });
            true
        } else {
            false
        }
    })?;
    Ok(HitRecord {
        x0: x0.clone(),
        eps: eps.clone(),
        n_max,
        hit: found,
        verified_through: tracker.verified_through,
    })
}

/// First `j ≥ 1` at which the distance to the nearest pole drops below half its starting value.
///
/// Requires the start to be at least `2(β_m - β_1) + 1` from every pole.
pub fn halving_time<T: Real>(spec: &MapSpec<T>, x0: &T, policy: &PrecisionPolicy) -> Result<usize> {
    let (_, d0) = spec.nearest_pole(x0);
    let threshold = spec.approach_threshold();
    if d0 < threshold {
        return Err(Error::invariant(
            "x0",
            format!(
                "distance {} to the nearest pole is below the threshold {}",
                d0.to_decimal(),
                threshold.to_decimal()
            ),
        ));
    }
    let half = d0.half();
    let cap = descent_step_cap(spec, &d0);
    match scan(spec, x0, cap, policy, |_, x| spec.nearest_pole(x).1 < half)? {
        (Some(j), _) => Ok(j),
        (None, _) => Err(Error::BudgetExceeded {
            what: "halving time steps",
            requested: cap as u128 + 1,
            limit: cap as u128,
        }),
    }
}

/// Generous cap on the steps a far point needs to come near the poles (`x²` drops by about `2Σα` per step).
pub(crate) fn descent_step_cap<T: Real>(spec: &MapSpec<T>, distance: &T) -> usize {
    let d = distance.to_f64();
    let rate = spec.alpha_sum().to_f64();
    (4.0 * d * d / rate).min(1e12) as usize + 1000
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoleSide {
    Above,
    Below,
}

/// `|f(β_j ± δ)|` for `0 < δ < ε₀`; at least `α_j / (2δ)`.
pub fn escape_magnitude<T: Real>(spec: &MapSpec<T>, pole: usize, delta: &T, side: PoleSide) -> Result<T> {
    if pole >= spec.m() {
        return Err(Error::invariant("pole", format!("index {pole} out of range for m = {}", spec.m())));
    }
    let eps0 = spec.epsilon0();
    if !delta.is_positive() || *delta >= eps0 {
        return Err(Error::EpsilonTooLarge {
            eps: delta.to_decimal(),
            limit: eps0.to_decimal(),
        });
    }
    let beta = spec.betas()[pole].clone();
    let x = match side {
        PoleSide::Above => beta + delta.clone(),
        PoleSide::Below => beta - delta.clone(),
    };
    Ok(spec.eval(&x)?.abs())
}

fn require_graham_like<T: Real>(spec: &MapSpec<T>) -> Result<()> {
    if spec.def().is_graham_like() {
        Ok(())
    } else {
        Err(Error::invariant(
            "map",
            "itineraries are defined only for the single-pole map with its pole at 0",
        ))
    }
}

/// Sign sequence `b_k = 0` if `x_k > 0`, `1` if `x_k < 0`, for `k = 0..=n`.
pub fn itinerary<T: Real>(spec: &MapSpec<T>, x0: &T, n: usize, policy: &PrecisionPolicy) -> Result<Vec<u8>> {
    require_graham_like(spec)?;
    let orbit = iterate(spec, x0, n, policy)?;
    if let Some(hit) = orbit.pole_hit {
        return Err(Error::PoleEvaluation {
            pole_index: hit.pole_index,
            pole: "0".into(),
        });
    }
    if policy.shadow && !T::EXACT && orbit.verified_through < n {
        return Err(Error::exhausted(format!(
            "itinerary verified only through step {} of {n}",
            orbit.verified_through
        )));
    }
    Ok(orbit
        .values
        .iter()
        .map(|x| u8::from(x.is_negative()))
        .collect())
}

/// `Σ_k b_k 2^{-k-1}`.
pub fn theta_from_bits(bits: &[u8]) -> f64 {
    bits.iter()
        .enumerate()
        .map(|(k, &b)| f64::from(b) * 0.5f64.powi(k as i32 + 1))
        .sum()
}

/// Binary read-out of the itinerary, an estimate of the doubling-map angle of `x₀`.
pub fn theta_estimate<T: Real>(spec: &MapSpec<T>, x0: &T, n: usize, policy: &PrecisionPolicy) -> Result<f64> {
    Ok(theta_from_bits(&itinerary(spec, x0, n, policy)?))
}

/// Runs `op` at the policy's precision, doubling the bits after each
/// `PrecisionExhausted` until `max_bits` is passed. Returns the result and the bits used.
pub fn with_adaptive_precision<T: Real, R>(
    def: &MapDef,
    policy: &PrecisionPolicy,
    max_bits: u32,
    mut op: impl FnMut(&MapSpec<T>, &PrecisionPolicy) -> Result<R>,
) -> Result<(R, u32)> {
    let mut bits = policy.bits();
    loop {
        let p = policy.with_bits(bits);
        let spec = def.instantiate::<T>(bits)?;
        match op(&spec, &p) {
            Err(e) if e.is_precision_exhausted() && !T::EXACT && bits.saturating_mul(2) <= max_bits => {
                bits *= 2;
            }
            other => return other.map(|r| (r, bits)),
        }
    }
}
