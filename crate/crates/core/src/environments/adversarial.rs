//! The two-sequence adversarial instance.
//!
//! Two auxiliary sequences `a_t < ... ` and `b_t` live in `(0, delta)` at
//! scale `delta / 3^t`. With probability `zeta` a round emits `(b_t, 1)` and
//! the sequences move up past `b_t`; otherwise it emits `(a_t, zeta)` and they
//! move down below `a_t`. All state is kept as exact integers:
//! `a_t = delta * A_t / 3^t` and `b_t = delta * B_t / 3^t`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{Point, Valuation};
use crate::mechanism::Mechanism;
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coin {
    /// Emits `(b_t, 1)`; drawn with probability `zeta`.
    R,
    /// Emits `(a_t, zeta)`.
    L,
}

/// State at round `t`: `a_t = delta * a / 3^t`, `b_t = delta * b / 3^t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundState {
    pub t: usize,
    pub coin: Coin,
    pub a: BigInt,
    pub b: BigInt,
    pub scale: BigInt,
}

impl RoundState {
    pub fn a_value(&self, delta: &Rational) -> Rational {
        Rational::new(delta.numer() * &self.a, delta.denom() * &self.scale)
    }

    pub fn b_value(&self, delta: &Rational) -> Rational {
        Rational::new(delta.numer() * &self.b, delta.denom() * &self.scale)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialTrace {
    pub delta: Rational,
    pub zeta: Rational,
    pub coins: Vec<Coin>,
}

fn check_unit_open(name: &str, v: &Rational) -> Result<()> {
    if *v > Rational::zero() && *v < Rational::one() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")))
    }
}

impl AdversarialTrace {
    pub fn generate(delta: Rational, zeta: Rational, horizon: usize, rng: &mut impl Rng) -> Result<Self> {
        check_unit_open("delta", &delta)?;
        check_unit_open("zeta", &zeta)?;
        let p = Scalar::to_f64(&zeta);
        let coins = (0..horizon)
            .map(|_| if rng.gen_bool(p) { Coin::R } else { Coin::L })
            .collect();
        Ok(AdversarialTrace { delta, zeta, coins })
    }

    pub fn from_coins(delta: Rational, zeta: Rational, coins: Vec<Coin>) -> Result<Self> {
        check_unit_open("delta", &delta)?;
        check_unit_open("zeta", &zeta)?;
        Ok(AdversarialTrace { delta, zeta, coins })
    }

    pub fn len(&self) -> usize {
        self.coins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coins.is_empty()
    }

    /// Replays the recursion round by round.
    pub fn states(&self) -> impl Iterator<Item = RoundState> + '_ {
        let three = BigInt::from(3);
        let mut a = BigInt::one();
        let mut b = BigInt::from(2);
        let mut scale = three.clone();
        self.coins.iter().enumerate().map(move |(i, &coin)| {
            let state = RoundState { t: i + 1, coin, a: a.clone(), b: b.clone(), scale: scale.clone() };
            let (na, nb) = match coin {
                Coin::R => (&b * &three + 1, &b * &three + 2),
                Coin::L => (&a * &three - 1, &a * &three - 2),
            };
            a = na;
            b = nb;
            scale = &scale * &three;
            state
        })
    }

    pub fn valuation(&self, state: &RoundState) -> Valuation<Rational> {
        match state.coin {
            Coin::R => Point::new(state.b_value(&self.delta), Rational::one()),
            Coin::L => Point::new(state.a_value(&self.delta), self.zeta.clone()),
        }
    }

    /// Valuations rounded to floats, for simulation.
    pub fn valuations(&self) -> Vec<Valuation> {
        self.branches()
            .into_iter()
            .zip(&self.coins)
            .map(|((r, l), c)| if *c == Coin::R { r } else { l })
            .collect()
    }

    /// Per round, the valuation each coin outcome would emit: `(R, L)`.
    pub fn branches(&self) -> Vec<(Valuation, Valuation)> {
        let delta = Scalar::to_f64(&self.delta);
        let zeta = Scalar::to_f64(&self.zeta);
        self.states()
            .map(|s| {
                let a = delta * ratio_to_f64(&s.a, &s.scale);
                let b = delta * ratio_to_f64(&s.b, &s.scale);
                (Point::xy(b, 1.0), Point::xy(a, zeta))
            })
            .collect()
    }

    /// Both sequences stay strictly inside `(0, delta)`.
    pub fn within_bounds(&self) -> bool {
        self.states().all(|s| {
            s.a.is_positive() && s.b.is_positive() && s.a < s.scale && s.b < s.scale
        })
    }

    /// Compares the recursion with the closed forms
    /// `a_t = g_t D_t + sum_{j<t} g_j m_j D_j` and `b_t = 2 g_t D_t + sum_{j<t} g_j m_j D_j`,
    /// where `D_j = delta / 3^j`, `g_j = +1` if round `j - 1` was an R-round
    /// (round 0 counts as one) and `-1` otherwise, and `m_j = 2` on R-rounds
    /// and `1` on L-rounds. In units of `delta / 3^t` the sum is a running total.
    pub fn closed_form_matches(&self) -> bool {
        let three = BigInt::from(3);
        let mut prefix = BigInt::zero();
        let mut prev = Coin::R;
        for s in self.states() {
            let g = BigInt::from(if prev == Coin::R { 1 } else { -1 });
            if s.a != &g + &prefix || s.b != &g * 2 + &prefix {
                return false;
            }
            let m = if s.coin == Coin::R { 2 } else { 1 };
            prefix = (prefix + g * m) * &three;
            prev = s.coin;
        }
        true
    }

    /// `b_t` increases across R-rounds and `a_t` decreases across L-rounds.
    pub fn is_monotone(&self) -> bool {
        let mut last_r: Option<RoundState> = None;
        let mut last_l: Option<RoundState> = None;
        for s in self.states() {
            match s.coin {
                Coin::R => {
                    if let Some(p) = &last_r {
                        if cmp_scaled(&p.b, &p.scale, &s.b, &s.scale) != std::cmp::Ordering::Less {
                            return false;
                        }
                    }
                    last_r = Some(s);
                }
                Coin::L => {
                    if let Some(p) = &last_l {
                        if cmp_scaled(&p.a, &p.scale, &s.a, &s.scale) != std::cmp::Ordering::Greater {
                            return false;
                        }
                    }
                    last_l = Some(s);
                }
            }
        }
        true
    }

    /// Largest `b_t` over R-rounds and smallest `a_t` over L-rounds.
    pub fn extremes(&self) -> (Option<Rational>, Option<Rational>) {
        let mut max_b: Option<(BigInt, BigInt)> = None;
        let mut min_a: Option<(BigInt, BigInt)> = None;
        for s in self.states() {
            match s.coin {
                Coin::R => {
                    if max_b.as_ref().map_or(true, |(n, d)| {
                        cmp_scaled(&s.b, &s.scale, n, d) == std::cmp::Ordering::Greater
                    }) {
                        max_b = Some((s.b.clone(), s.scale.clone()));
                    }
                }
                Coin::L => {
                    if min_a.as_ref().map_or(true, |(n, d)| {
                        cmp_scaled(&s.a, &s.scale, n, d) == std::cmp::Ordering::Less
                    }) {
                        min_a = Some((s.a.clone(), s.scale.clone()));
                    }
                }
            }
        }
        let to_value = |(n, d): (BigInt, BigInt)| &self.delta * Rational::new(n, d);
        (max_b.map(to_value), min_a.map(to_value))
    }
}

/// `n / d` for positive `d` with `|n| <= d`. Operands too long for a double
/// keep their leading 64 bits.
pub(crate) fn ratio_to_f64(n: &BigInt, d: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    if d.bits() <= 1000 {
        return n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN);
    }
    let shift = d.bits() - 64;
    let (n, d) = (n >> shift, d >> shift);
    n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
}

fn cmp_scaled(n1: &BigInt, d1: &BigInt, n2: &BigInt, d2: &BigInt) -> std::cmp::Ordering {
    (n1 * d2).cmp(&(n2 * d1))
}

/// Midpoint between the R-side maximum and the L-side minimum; errors when
/// the two sides overlap.
pub fn separating_threshold(trace: &AdversarialTrace) -> Result<Rational> {
    let (max_b, min_a) = trace.extremes();
    let lo = max_b.unwrap_or_else(Rational::zero);
    let hi = min_a.unwrap_or_else(|| trace.delta.clone());
    if lo >= hi {
        return Err(Error::SeparationViolated { max_b: lo.to_string(), min_a: hi.to_string() });
    }
    Ok((lo + hi) / Rational::from_integer(2.into()))
}

/// Allocates `(x, 1)` for every `x` and `(x, y)` for `x >= tau`, `y >= zeta`.
pub fn threshold_mechanism(tau: &Rational, zeta: &Rational) -> Mechanism<Rational> {
    Mechanism::from_corners(&[
        Point::new(Rational::zero(), Rational::one()),
        Point::new(tau.clone(), zeta.clone()),
    ])
}
