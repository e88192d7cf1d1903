//! The map family `f(x) = x - Σ αᵢ/(x - βᵢ)` with `αᵢ > 0` and distinct `βᵢ`.
//!
//! [`MapDef`] holds the parameters exactly (as rationals, together with the
//! decimal text they were read from); [`MapSpec`] is that definition rounded
//! into a working scalar type at a fixed precision.
//!
//! Off the poles `f'(x) = 1 + Σ αᵢ/(x - βᵢ)² > 1`, and on every gap between
//! consecutive poles `f` runs from -∞ (just right of the left pole) to +∞
//! (just left of the right pole). So each of the `m + 1` gaps is a branch on
//! which `f` is a strictly increasing bijection onto ℝ, and every `y` has
//! exactly one preimage per branch.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{parse_exact, Real};

/// On-disk form: `{"alphas": ["1"], "betas": ["0"]}` with decimal strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub alphas: Vec<String>,
    pub betas: Vec<String>,
}

/// Exact, validated map parameters.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapFile", into = "MapFile")]
pub struct MapDef {
    alphas: Vec<rug::Rational>,
    betas: Vec<rug::Rational>,
    alpha_text: Vec<String>,
    beta_text: Vec<String>,
}

impl MapDef {
    /// Parses decimal or `p/q` strings and enforces `αᵢ > 0`, `β` strictly increasing.
    pub fn parse<A: AsRef<str>, B: AsRef<str>>(alphas: &[A], betas: &[B]) -> Result<Self> {
        let parse_all = |field: &'static str, items: &[&str]| -> Result<Vec<rug::Rational>> {
            items
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    parse_exact(s).map_err(|_| {
                        Error::invariant(field, format!("entry {i} ({s:?}) is not a decimal number"))
                    })
                })
                .collect()
        };
        let alpha_text: Vec<&str> = alphas.iter().map(AsRef::as_ref).collect();
        let beta_text: Vec<&str> = betas.iter().map(AsRef::as_ref).collect();
        let a = parse_all("alphas", &alpha_text)?;
        let b = parse_all("betas", &beta_text)?;
        Self::validate(&a, &b)?;
        Ok(MapDef {
            alphas: a,
            betas: b,
            alpha_text: alpha_text.iter().map(|s| s.trim().to_string()).collect(),
            beta_text: beta_text.iter().map(|s| s.trim().to_string()).collect(),
        })
    }

    pub fn from_rationals(alphas: Vec<rug::Rational>, betas: Vec<rug::Rational>) -> Result<Self> {
        Self::validate(&alphas, &betas)?;
        Ok(MapDef {
            alpha_text: alphas.iter().map(ToString::to_string).collect(),
            beta_text: betas.iter().map(ToString::to_string).collect(),
            alphas,
            betas,
        })
    }

    /// `x - 1/x`.
    pub fn graham() -> Self {
        Self::parse(&["1"], &["0"]).expect("valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MapFile = serde_json::from_str(text)?;
        Self::try_from(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&MapFile::from(self.clone())).expect("serializable")
    }

    fn validate(alphas: &[rug::Rational], betas: &[rug::Rational]) -> Result<()> {
        if alphas.is_empty() {
            return Err(Error::invariant("alphas", "at least one pole is required"));
        }
        if alphas.len() != betas.len() {
            return Err(Error::invariant(
                "betas",
                format!("{} alphas but {} betas", alphas.len(), betas.len()),
            ));
        }
        if let Some((i, a)) = alphas.iter().enumerate().find(|(_, a)| a.cmp0() != Ordering::Greater) {
            return Err(Error::invariant(
                "alphas",
                format!("alpha[{i}] = {a} must be strictly positive"),
            ));
        }
        for (i, pair) in betas.windows(2).enumerate() {
            match pair[0].cmp(&pair[1]) {
                Ordering::Less => {}
                Ordering::Equal => {
                    return Err(Error::invariant(
                        "betas",
                        format!("duplicate pole {} at positions {i} and {}; poles must be distinct", pair[0], i + 1),
                    ))
                }
                Ordering::Greater => {
                    let mut sorted = betas.to_vec();
                    sorted.sort();
                    let hint: Vec<String> = sorted.iter().map(ToString::to_string).collect();
                    return Err(Error::invariant(
                        "betas",
                        format!(
                            "poles must be strictly increasing (beta[{i}] = {} > beta[{}] = {}); sorted order would be [{}] (reorder alphas to match)",
                            pair[0],
                            i + 1,
                            pair[1],
                            hint.join(", ")
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[rug::Rational] {
        &self.alphas
    }

    pub fn betas(&self) -> &[rug::Rational] {
        &self.betas
    }

    /// `m = 1` with the pole at the origin (`x - α/x`, a rescaled Graham map).
    pub fn is_graham_like(&self) -> bool {
        self.m() == 1 && self.betas[0].cmp0() == Ordering::Equal
    }

    pub fn alpha_sum(&self) -> rug::Rational {
        self.alphas.iter().fold(rug::Rational::new(), |acc, a| acc + a)
    }

    /// Smallest gap between consecutive poles; `None` (infinite) when `m = 1`.
    pub fn pole_gap(&self) -> Option<rug::Rational> {
        self.betas
            .windows(2)
            .map(|w| rug::Rational::from(&w[1] - &w[0]))
            .min()
    }

    /// α-weighted mean of the poles; far from the poles `f(x) - c ≈ (x - c) - Σα/(x - c)`.
    pub fn pole_center(&self) -> rug::Rational {
        let weighted = self
            .alphas
            .iter()
            .zip(&self.betas)
            .fold(rug::Rational::new(), |acc, (a, b)| acc + rug::Rational::from(a * b));
        weighted / self.alpha_sum()
    }

    /// Distance threshold `2(β_m - β_1) + 1` beyond which the slow-approach bound applies.
    pub fn approach_threshold(&self) -> rug::Rational {
        let spread = rug::Rational::from(&self.betas[self.m() - 1] - &self.betas[0]);
        spread * 2u32 + 1u32
    }

    /// Neighbourhood radius `ε₀` below which a point `δ` from pole `j` is thrown
    /// to `|f| ≥ α_j / (2δ)`.
    ///
    /// With `B = max|βᵢ|`, `S_j = Σ_{i≠j} αᵢ` and `g` the pole gap:
    /// `ε₀ = min(g/4, min_j min(α_j / (4(1 + B + 2 S_j / g)), min(α_j, 1)/2))`.
    /// For `δ ≤ ε₀` the regular part of `f(β_j ± δ)` is bounded by
    /// `B + δ + 2 S_j / g ≤ α_j / (4δ) + α_j / (4δ)`.
    pub fn epsilon0(&self) -> rug::Rational {
        let b_max = self
            .betas
            .iter()
            .map(|b| rug::Rational::from(b.abs_ref()))
            .max()
            .expect("m >= 1");
        let gap = self.pole_gap();
        let total = self.alpha_sum();
        let mut eps0: Option<rug::Rational> = gap.as_ref().map(|g| rug::Rational::from(g / 4u32));
        for a in &self.alphas {
            let others = rug::Rational::from(&total - a);
            let coupling = match &gap {
                Some(g) => others * 2u32 / g,
                None => rug::Rational::new(),
            };
            let denom = (coupling + &b_max + 1u32) * 4u32;
            let singular = rug::Rational::from(a / &denom);
            let quadratic = rug::Rational::from(a.min(&rug::Rational::from(1)) / 2u32);
            let candidate = singular.min(quadratic);
            eps0 = Some(match eps0 {
                Some(e) => e.min(candidate),
                None => candidate,
            });
        }
        eps0.expect("m >= 1")
    }

    /// Rounds the exact parameters into `T` at `bits`.
    pub fn instantiate<T: Real>(&self, bits: u32) -> Result<MapSpec<T>> {
        let alphas: Vec<T> = self.alphas.iter().map(|a| T::from_rational(a, bits)).collect();
        let betas: Vec<T> = self.betas.iter().map(|b| T::from_rational(b, bits)).collect();
        if let Some(i) = betas.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::invariant(
                "betas",
                format!("poles {i} and {} coincide at {bits}-bit precision", i + 1),
            ));
        }
        if let Some(i) = alphas.iter().position(|a| !a.is_positive()) {
            return Err(Error::invariant(
                "alphas",
                format!("alpha[{i}] rounds to zero at {bits}-bit precision"),
            ));
        }
        Ok(MapSpec {
            alpha_sum: T::from_rational(&self.alpha_sum(), bits),
            pole_gap: self.pole_gap().map(|g| T::from_rational(&g, bits)),
            def: self.clone(),
            alphas,
            betas,
            bits,
        })
    }
}

impl TryFrom<MapFile> for MapDef {
    type Error = Error;
    fn try_from(file: MapFile) -> Result<Self> {
        MapDef::parse(&file.alphas, &file.betas)
    }
}

impl From<MapDef> for MapFile {
    fn from(def: MapDef) -> Self {
        MapFile {
            alphas: def.alpha_text,
            betas: def.beta_text,
        }
    }
}

impl fmt::Debug for MapDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapDef")
            .field("alphas", &self.alpha_text)
            .field("betas", &self.beta_text)
            .finish()
    }
}

/// How real arithmetic is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionMode {
    BigFloat { bits: u32 },
    ExactRational,
}

pub const MIN_BIGFLOAT_BITS: u32 = 64;
pub const DEFAULT_SHADOW_MARGIN_BITS: u32 = 128;
pub const DEFAULT_SHADOW_TOLERANCE: f64 = 1e-30;
pub const DEFAULT_RATIONAL_BIT_BUDGET: u64 = 1 << 20;
pub const DEFAULT_RATIONAL_RESOLUTION_BITS: u32 = 256;
pub const DEFAULT_MAX_BRACKET_DOUBLINGS: u32 = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    pub mode: PrecisionMode,
    /// Recompute orbits at `bits + shadow_margin_bits` and compare.
    pub shadow: bool,
    pub shadow_margin_bits: u32,
    /// Largest absolute base/shadow difference still counted as agreement.
    pub shadow_agreement_tol: f64,
    /// Exact mode refuses iterates whose numerator + denominator exceed this many bits.
    pub rational_bit_budget: u64,
    /// Exact mode stops bisecting preimages at brackets `2^-resolution` wide (relative).
    pub rational_resolution_bits: u32,
    pub max_bracket_doublings: u32,
}

impl PrecisionPolicy {
    pub fn big_float(bits: u32) -> Result<Self> {
        let policy = PrecisionPolicy {
            mode: PrecisionMode::BigFloat { bits },
            ..Self::exact()
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn exact() -> Self {
        PrecisionPolicy {
            mode: PrecisionMode::ExactRational,
            shadow: true,
            shadow_margin_bits: DEFAULT_SHADOW_MARGIN_BITS,
            shadow_agreement_tol: DEFAULT_SHADOW_TOLERANCE,
            rational_bit_budget: DEFAULT_RATIONAL_BIT_BUDGET,
            rational_resolution_bits: DEFAULT_RATIONAL_RESOLUTION_BITS,
            max_bracket_doublings: DEFAULT_MAX_BRACKET_DOUBLINGS,
        }
    }

    /// Big-float policy sized for an orbit of `n_steps`: `max(128, n_steps + 64)` bits.
    pub fn for_steps(n_steps: usize) -> Self {
        Self::big_float(default_bits(n_steps)).expect("default bits are valid")
    }

    pub fn validate(&self) -> Result<()> {
        if let PrecisionMode::BigFloat { bits } = self.mode {
            if bits < MIN_BIGFLOAT_BITS {
                return Err(Error::invariant(
                    "bits",
                    format!("{bits} bits requested; at least {MIN_BIGFLOAT_BITS} required"),
                ));
            }
        }
        if !(self.shadow_agreement_tol > 0.0 && self.shadow_agreement_tol.is_finite()) {
            return Err(Error::invariant(
                "shadow_agreement_tol",
                "must be a positive finite number",
            ));
        }
        Ok(())
    }

    /// Working bits: the big-float precision, or the bisection resolution in exact mode.
    pub fn bits(&self) -> u32 {
        match self.mode {
            PrecisionMode::BigFloat { bits } => bits,
            PrecisionMode::ExactRational => self.rational_resolution_bits,
        }
    }

    pub fn with_bits(&self, bits: u32) -> Self {
        let mut p = self.clone();
        if let PrecisionMode::BigFloat { .. } = p.mode {
            p.mode = PrecisionMode::BigFloat { bits };
        }
        p
    }

    pub fn without_shadow(&self) -> Self {
        PrecisionPolicy {
            shadow: false,
            ..self.clone()
        }
    }

    pub fn is_exact(&self) -> bool {
        self.mode == PrecisionMode::ExactRational
    }
}

pub fn default_bits(n_steps: usize) -> u32 {
    let wanted = (n_steps as u64).saturating_add(64).min(u64::from(u32::MAX / 2)) as u32;
    wanted.max(128)
}

/// One end of a branch.
#[derive(Debug, Clone, PartialEq)]
pub enum Endpoint<T> {
    NegInfinity,
    Pole(usize, T),
    PosInfinity,
}

/// Maximal open interval between consecutive poles on which `f` increases from -∞ to +∞.
///
/// Branch 0 is `(-∞, β₁)`, branch `i` is `(βᵢ, βᵢ₊₁)`, branch `m` is `(β_m, +∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch<T> {
    pub index: usize,
    pub lower: Endpoint<T>,
    pub upper: Endpoint<T>,
}

impl<T: Real> Branch<T> {
    pub fn contains(&self, x: &T) -> bool {
        let above = match &self.lower {
            Endpoint::Pole(_, b) => x > b,
            Endpoint::NegInfinity => true,
            Endpoint::PosInfinity => false,
        };
        let below = match &self.upper {
            Endpoint::Pole(_, b) => x < b,
            Endpoint::PosInfinity => true,
            Endpoint::NegInfinity => false,
        };
        above && below
    }
}

/// Map parameters rounded into a working scalar type.
#[derive(Debug, Clone)]
pub struct MapSpec<T> {
    def: MapDef,
    alphas: Vec<T>,
    betas: Vec<T>,
    alpha_sum: T,
    pole_gap: Option<T>,
    bits: u32,
}

impl<T: Real> MapSpec<T> {
    pub fn def(&self) -> &MapDef {
        &self.def
    }

    pub fn m(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[T] {
        &self.alphas
    }

    pub fn betas(&self) -> &[T] {
        &self.betas
    }

    pub fn alpha_sum(&self) -> &T {
        &self.alpha_sum
    }

    /// `None` stands for +∞ (a single pole).
    pub fn pole_gap(&self) -> Option<&T> {
        self.pole_gap.as_ref()
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Same map at a different precision, re-rounded from the exact parameters.
    pub fn at_bits(&self, bits: u32) -> Result<Self> {
        self.def.instantiate(bits)
    }

    /// Converts a rational into this spec's working precision.
    pub fn scalar(&self, q: &rug::Rational) -> T {
        T::from_rational(q, self.bits)
    }

    pub fn scalar_f64(&self, v: f64) -> T {
        T::from_f64(v, self.bits)
    }

    /// Index of the pole exactly equal to `x`, if any.
    pub fn pole_at(&self, x: &T) -> Option<usize> {
        let pos = self.betas.partition_point(|b| b < x);
        (pos < self.betas.len() && self.betas[pos] == *x).then_some(pos)
    }

    fn check_pole(&self, x: &T) -> Result<()> {
        match self.pole_at(x) {
            Some(i) => Err(Error::PoleEvaluation {
                pole_index: i,
                pole: self.betas[i].to_decimal(),
            }),
            None => Ok(()),
        }
    }

    /// `f(x) = x - Σ αᵢ/(x - βᵢ)`.
    pub fn eval(&self, x: &T) -> Result<T> {
        self.check_pole(x)?;
        let mut sum = T::zero();
        for (a, b) in self.alphas.iter().zip(&self.betas) {
            sum = sum + a.clone() / (x.clone() - b.clone());
        }
        Ok(x.clone() - sum)
    }

    /// `f'(x) = 1 + Σ αᵢ/(x - βᵢ)²`.
    pub fn derivative(&self, x: &T) -> Result<T> {
        Ok(self.eval_with_derivative(x)?.1)
    }

    pub fn eval_with_derivative(&self, x: &T) -> Result<(T, T)> {
        self.check_pole(x)?;
        let mut sum = T::zero();
        let mut slope = T::one();
        for (a, b) in self.alphas.iter().zip(&self.betas) {
            let term = a.clone() / (x.clone() - b.clone());
            let d = x.clone() - b.clone();
            slope = slope + term.clone() / d;
            sum = sum + term;
        }
        Ok((x.clone() - sum, slope))
    }

    /// Nearest pole to `x` and the distance `min_i |x - βᵢ|`.
    pub fn nearest_pole(&self, x: &T) -> (usize, T) {
        let pos = self.betas.partition_point(|b| b < x);
        let candidates = [pos.checked_sub(1), (pos < self.betas.len()).then_some(pos)];
        candidates
            .into_iter()
            .flatten()
            .map(|i| (i, (x.clone() - self.betas[i].clone()).abs()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal))
            .expect("m >= 1")
    }

    pub fn branch(&self, index: usize) -> Branch<T> {
        assert!(index <= self.m(), "branch {index} out of range 0..={}", self.m());
        let lower = match index {
            0 => Endpoint::NegInfinity,
            i => Endpoint::Pole(i - 1, self.betas[i - 1].clone()),
        };
        let upper = if index == self.m() {
            Endpoint::PosInfinity
        } else {
            Endpoint::Pole(index, self.betas[index].clone())
        };
        Branch {
            index,
            lower,
            upper,
        }
    }

    pub fn branches(&self) -> Vec<Branch<T>> {
        (0..=self.m()).map(|i| self.branch(i)).collect()
    }

    pub fn branch_of(&self, x: &T) -> Result<Branch<T>> {
        self.check_pole(x)?;
        Ok(self.branch(self.betas.partition_point(|b| b < x)))
    }

    /// `2(β_m - β_1) + 1` at working precision.
    pub fn approach_threshold(&self) -> T {
        self.scalar(&self.def.approach_threshold())
    }

    pub fn epsilon0(&self) -> T {
        self.scalar(&self.def.epsilon0())
    }

    /// Lower bound `d² / (4 Σα)` on the steps needed to halve a starting distance `d`.
    pub fn slow_approach_bound(&self, distance: &T) -> T {
        let four = T::from_i64(4, self.bits);
        distance.clone() * distance.clone() / (four * self.alpha_sum.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{BigFloat, Rational};

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn two_pole() -> MapDef {
        MapDef::parse(&["1", "1"], &["-1", "1"]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let g = MapDef::graham().instantiate::<Rational>(0).unwrap();
        assert_eq!(g.eval(&q(2, 1)).unwrap(), q(3, 2));
        let t = two_pole().instantiate::<Rational>(0).unwrap();
        assert_eq!(t.eval(&q(2, 1)).unwrap(), q(2, 3));
        assert!(matches!(
            g.eval(&q(0, 1)),
            Err(Error::PoleEvaluation { pole_index: 0, .. })
        ));
    }

    #[test]
    fn derivative_examples() {
        let g = MapDef::graham().instantiate::<Rational>(0).unwrap();
        assert_eq!(g.derivative(&q(1, 1)).unwrap(), q(2, 1));
        assert_eq!(g.derivative(&q(2, 1)).unwrap(), q(5, 4));
        assert!(g.derivative(&q(0, 1)).is_err());
    }

    #[test]
    fn branch_examples() {
        let g = MapDef::graham().instantiate::<BigFloat>(128).unwrap();
        let b = g.branch_of(&BigFloat::with_val(128, 2)).unwrap();
        assert_eq!(b.index, 1);
        assert_eq!(b.upper, Endpoint::PosInfinity);
        assert_eq!(g.branch_of(&BigFloat::with_val(128, -3)).unwrap().index, 0);
        let t = two_pole().instantiate::<BigFloat>(128).unwrap();
        let mid = t.branch_of(&BigFloat::with_val(128, 0)).unwrap();
        assert_eq!(mid.index, 1);
        assert!(matches!(mid.lower, Endpoint::Pole(0, _)));
        assert!(matches!(mid.upper, Endpoint::Pole(1, _)));
        assert!(t.branch_of(&BigFloat::with_val(128, 1)).is_err());
        assert_eq!(t.branches().len(), 3);
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        let err = MapDef::from_json(r#"{"alphas":["-1"],"betas":["0"]}"#).unwrap_err();
        assert!(matches!(err, Error::InvariantViolation { field: "alphas", .. }));
        let err = MapDef::from_json(r#"{"alphas":["1","1"],"betas":["1","1"]}"#).unwrap_err();
        assert!(matches!(err, Error::InvariantViolation { field: "betas", .. }));
        let err = MapDef::parse(&["1", "2"], &["3", "-1"]).unwrap_err();
        assert!(err.to_string().contains("sorted order would be [-1, 3]"), "{err}");
        assert!(MapDef::parse(&["1"], &["0", "1"]).is_err());
        assert!(MapDef::from_json(r#"{"alphas":[1],"betas":[0]}"#).is_err());
        let empty: [&str; 0] = [];
        assert!(MapDef::parse(&empty, &empty).is_err());
    }

    #[test]
    fn json_round_trip_keeps_text() {
        let def = MapDef::from_json(r#"{"alphas":["0.1","2"],"betas":["-1.5","3"]}"#).unwrap();
        assert_eq!(def.to_json(), r#"{"alphas":["0.1","2"],"betas":["-1.5","3"]}"#);
        assert_eq!(def.alphas()[0], rug::Rational::from((1, 10)));
        assert_eq!(MapDef::graham().to_json(), r#"{"alphas":["1"],"betas":["0"]}"#);
    }

    #[test]
    fn cached_constants() {
        let def = MapDef::parse(&["2", "3", "1"], &["-1", "4", "4.5"]).unwrap();
        let s = def.instantiate::<Rational>(0).unwrap();
        assert_eq!(*s.alpha_sum(), q(6, 1));
        assert_eq!(s.pole_gap(), Some(&q(1, 2)));
        let g = MapDef::graham().instantiate::<Rational>(0).unwrap();
        assert_eq!(g.pole_gap(), None);
        assert_eq!(g.approach_threshold(), q(1, 1));
        assert_eq!(two_pole().approach_threshold(), rug::Rational::from(5));
        assert_eq!(MapDef::graham().epsilon0(), rug::Rational::from((1, 4)));
    }

    #[test]
    fn instantiation_detects_collapsed_poles() {
        let def = MapDef::parse(&["1", "1"], &["1", "1.0000000000000000000000001"]).unwrap();
        assert!(def.instantiate::<BigFloat>(64).is_err());
        assert!(def.instantiate::<BigFloat>(256).is_ok());
    }

    #[test]
    fn policy_validation() {
        assert!(PrecisionPolicy::big_float(63).is_err());
        assert!(PrecisionPolicy::big_float(64).is_ok());
        let mut p = PrecisionPolicy::exact();
        p.shadow_agreement_tol = 0.0;
        assert!(p.validate().is_err());
        assert_eq!(default_bits(10), 128);
        assert_eq!(default_bits(300), 364);
        assert_eq!(PrecisionPolicy::for_steps(1000).bits(), 1064);
    }

    #[test]
    fn nearest_pole_picks_closest() {
        let t = two_pole().instantiate::<Rational>(0).unwrap();
        assert_eq!(t.nearest_pole(&q(1, 4)), (1, q(3, 4)));
        assert_eq!(t.nearest_pole(&q(-5, 1)), (0, q(4, 1)));
        assert_eq!(t.nearest_pole(&q(7, 1)), (1, q(6, 1)));
        assert_eq!(t.pole_at(&q(-1, 1)), Some(0));
        assert_eq!(t.pole_at(&q(0, 1)), None);
    }
}
