//! Per-branch preimages `f⁻¹(y)`.
//!
//! Each branch is a monotone bijection onto ℝ, so a bracket `[lo, hi]` with
//! `f(lo) ≤ y ≤ f(hi)` always exists and is kept throughout. The two unbounded
//! branches get their bracket by doubling outward from the extreme pole. Inside
//! the bracket a Newton step is taken when it lands strictly inside and
//! shrinks fast enough, otherwise the bracket is bisected. Iteration ends when
//! no representable point lies strictly between `lo` and `hi` (or, for exact
//! scalars, when the bracket is `2^-resolution` narrow).

use crate::error::{Error, Result};
use crate::map::{Branch, Endpoint, MapSpec, PrecisionPolicy};
use crate::scalar::{pow2, Real};

/// Final bracket of a preimage search.
///
/// `f(lo) ≤ y ≤ f(hi)` as evaluated; `lo == hi` when `f(lo) == y` was hit exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct PreimageBracket<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> PreimageBracket<T> {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }
}

/// One side of the running bracket: either a finite point with known `f` value
/// sign, or the pole at which `f` is infinite.
#[derive(Clone)]
struct Side<T> {
    x: T,
    at_pole: bool,
}

impl<T: Real> MapSpec<T> {
    /// The preimage of `y` in `branch`, as a bracket.
    pub fn preimage_bracket(
        &self,
        y: &T,
        branch: &Branch<T>,
        policy: &PrecisionPolicy,
    ) -> Result<PreimageBracket<T>> {
        let (mut lo, mut hi) = match self.initial_bracket(y, branch, policy)? {
            Ok(exact) => return Ok(PreimageBracket { lo: exact.clone(), hi: exact }),
            Err(pair) => pair,
        };

        let bits = y.precision().unwrap_or(0).max(self.bits());
        let max_iter = 8 * bits as usize + 4 * policy.rational_resolution_bits as usize + 512;
        let resolution = T::from_rational(&pow2(-(policy.rational_resolution_bits as i32)), bits);

        // best point so far (smallest residual) with f and f'
        let mut best: Option<(T, T, T)> = None;
        let mut force_bisect = false;

        for _ in 0..max_iter {
            if T::EXACT && !lo.at_pole && !hi.at_pole {
                let scale = T::max_of(T::one(), T::max_of(lo.x.abs(), hi.x.abs()));
                if hi.x.clone() - lo.x.clone() <= resolution.clone() * scale {
                    return self.finish(y, lo.x, hi.x, bits);
                }
            }

            let width = hi.x.clone() - lo.x.clone();
            let bisect = (lo.x.clone() + hi.x.clone()).half();
            let mut candidate = bisect.clone();
            if !T::EXACT && !force_bisect {
                if let Some((x, fx, dfx)) = &best {
                    let newton = x.clone() - (fx.clone() - y.clone()) / dfx.clone();
                    if newton > lo.x && newton < hi.x {
                        candidate = newton;
                    }
                    if candidate == *x {
                        // converged below one ulp: probe the neighbour across the root
                        candidate = if *fx < *y { x.next_up() } else { x.next_down() };
                    }
                }
            }
            if candidate <= lo.x || candidate >= hi.x {
                if bisect <= lo.x || bisect >= hi.x {
                    // no representable point strictly inside
                    return self.finish_sides(y, lo, hi, bits);
                }
                candidate = bisect;
            }

            let (fx, dfx) = self.eval_with_derivative(&candidate)?;
            if fx == *y {
                return Ok(PreimageBracket {
                    lo: candidate.clone(),
                    hi: candidate,
                });
            }
            if fx < *y {
                lo = Side {
                    x: candidate.clone(),
                    at_pole: false,
                };
            } else {
                hi = Side {
                    x: candidate.clone(),
                    at_pole: false,
                };
            }
            // bisect next time unless this step at least halved the bracket
            let new_width = hi.x.clone() - lo.x.clone();
            force_bisect = !force_bisect && new_width.clone() + new_width > width;

            let residual = (fx.clone() - y.clone()).abs();
            let better = best
                .as_ref()
                .is_none_or(|(_, bfx, _)| residual < (bfx.clone() - y.clone()).abs());
            if better {
                best = Some((candidate, fx, dfx));
            }
        }
        Err(Error::exhausted(format!(
            "preimage of {} in branch {} did not converge in {max_iter} steps",
            y.to_decimal(),
            branch.index
        )))
    }

    /// Either an exact root met during expansion, or the starting bracket.
    #[allow(clippy::type_complexity)]
    fn initial_bracket(
        &self,
        y: &T,
        branch: &Branch<T>,
        policy: &PrecisionPolicy,
    ) -> Result<std::result::Result<T, (Side<T>, Side<T>)>> {
        let step0 = match self.pole_gap() {
            Some(g) => g.half(),
            None => T::one(),
        };
        match (&branch.lower, &branch.upper) {
            (Endpoint::Pole(_, a), Endpoint::Pole(_, b)) => Ok(Err((
                Side {
                    x: a.clone(),
                    at_pole: true,
                },
                Side {
                    x: b.clone(),
                    at_pole: true,
                },
            ))),
            (Endpoint::Pole(_, pole), Endpoint::PosInfinity) => {
                let mut lo = Side {
                    x: pole.clone(),
                    at_pole: true,
                };
                let mut step = step0;
                for _ in 0..policy.max_bracket_doublings {
                    let h = pole.clone() + step.clone();
                    let fh = self.eval(&h)?;
                    if fh == *y {
                        return Ok(Ok(h));
                    }
                    if fh > *y {
                        return Ok(Err((lo, Side { x: h, at_pole: false })));
                    }
                    lo = Side { x: h, at_pole: false };
                    step = step.clone() + step;
                }
                Err(Error::BracketFailure {
                    branch: branch.index,
                    doublings: policy.max_bracket_doublings,
                })
            }
            (Endpoint::NegInfinity, Endpoint::Pole(_, pole)) => {
                let mut hi = Side {
                    x: pole.clone(),
                    at_pole: true,
                };
                let mut step = step0;
                for _ in 0..policy.max_bracket_doublings {
                    let l = pole.clone() - step.clone();
                    let fl = self.eval(&l)?;
                    if fl == *y {
                        return Ok(Ok(l));
                    }
                    if fl < *y {
                        return Ok(Err((Side { x: l, at_pole: false }, hi)));
                    }
                    hi = Side { x: l, at_pole: false };
                    step = step.clone() + step;
                }
                Err(Error::BracketFailure {
                    branch: branch.index,
                    doublings: policy.max_bracket_doublings,
                })
            }
            _ => unreachable!("every branch is bounded by at least one pole"),
        }
    }

    fn finish_sides(&self, y: &T, lo: Side<T>, hi: Side<T>, bits: u32) -> Result<PreimageBracket<T>> {
        if lo.at_pole || hi.at_pole {
            return Err(Error::exhausted(format!(
                "preimage of {} is within one ulp of a pole at {bits} bits",
                y.to_decimal()
            )));
        }
        self.finish(y, lo.x, hi.x, bits)
    }

    /// Checks the residual target `|f(x) - y| ≤ 2^(-bits/2) · max(1, |y|)`.
    fn finish(&self, y: &T, lo: T, hi: T, bits: u32) -> Result<PreimageBracket<T>> {
        let target = T::from_rational(&pow2(-((bits / 2) as i32)), bits) * T::max_of(T::one(), y.abs());
        let r_lo = (self.eval(&lo)? - y.clone()).abs();
        let r_hi = (self.eval(&hi)? - y.clone()).abs();
        if T::min_of(r_lo, r_hi) > target {
            return Err(Error::exhausted(format!(
                "preimage of {} cannot meet residual target at {bits} bits",
                y.to_decimal()
            )));
        }
        Ok(PreimageBracket { lo, hi })
    }

    /// The unique `x` in `branch` with `f(x) = y` (the better end of the final bracket).
    pub fn preimage_in_branch(&self, y: &T, branch: &Branch<T>, policy: &PrecisionPolicy) -> Result<T> {
        let PreimageBracket { lo, hi } = self.preimage_bracket(y, branch, policy)?;
        if lo == hi {
            return Ok(lo);
        }
        if T::EXACT {
            return Ok((lo + hi).half());
        }
        let r_lo = (self.eval(&lo)? - y.clone()).abs();
        let r_hi = (self.eval(&hi)? - y.clone()).abs();
        Ok(if r_hi < r_lo { hi } else { lo })
    }

    /// All `m + 1` preimages, increasing, interlaced with the poles.
    pub fn preimages_all(&self, y: &T, policy: &PrecisionPolicy) -> Result<Vec<T>> {
        self.branches()
            .iter()
            .map(|b| self.preimage_in_branch(y, b, policy))
            .collect()
    }
}
