//! Iteration, shadowing and pole-hitting analysis for rational maps of the form
//! `f(x) = x - Σᵢ αᵢ / (x - βᵢ)` with `αᵢ > 0`.
//!
//! Every numeric routine is generic over [`Real`], implemented for `f64`,
//! [`BigFloat`] (MPFR, arbitrary precision) and [`Rational`] (exact).

pub mod error;
pub mod experiments;
pub mod interval;
pub mod map;
pub mod orbit;
pub mod preimage;
pub mod pullback;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use experiments::{ConjugacyConfig, DisjointnessConfig, ExperimentConfig, ExperimentReport};
pub use interval::{Interval, IntervalSet, MergeEvent};
pub use map::{Branch, Endpoint, MapDef, MapSpec, PrecisionMode, PrecisionPolicy};
pub use orbit::{Hit, HitRecord, Orbit, PoleHit, PoleSide};
pub use preimage::PreimageBracket;
pub use scalar::{BigFloat, Rational, Real};

/// Traits needed to call arithmetic helpers on the scalar types.
pub mod prelude {
    pub use crate::scalar::Real;
    pub use num_traits::{One, Signed, Zero};
}

pub type MapSpecF = MapSpec<BigFloat>;
pub type MapSpecQ = MapSpec<Rational>;
pub type MapSpec64 = MapSpec<f64>;
pub type OrbitF = Orbit<BigFloat>;
pub type OrbitQ = Orbit<Rational>;
pub type IntervalSetF = IntervalSet<BigFloat>;
pub type IntervalSetQ = IntervalSet<Rational>;
