//! The two-square smooth family and revenue on uniform rectangles.
//!
//! Valuations are uniform on `Q1 = [1/2, 3/4]^2` with probability `alpha` and
//! uniform on `Q2 = [3/4, 1]^2` otherwise. Two posted prices compete: `(1/2, 1/2)`
//! earns 1 in expectation and `(3/4, 3/4)` earns `1.5 (1 - alpha)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{Point, Valuation};
use crate::grid::MonotoneRegion;
use crate::mechanism::Mechanism;

/// Open interval of admissible mixture weights.
pub const ALPHA_RANGE: (f64, f64) = (4.0 / 15.0, 2.0 / 5.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Square {
    pub lo: f64,
    pub hi: f64,
}

impl Square {
    pub fn sample(&self, rng: &mut impl Rng) -> Valuation {
        let w = self.hi - self.lo;
        Point::xy(self.lo + w * rng.gen::<f64>(), self.lo + w * rng.gen::<f64>())
    }

    pub fn contains(&self, v: &Valuation) -> bool {
        (self.lo..=self.hi).contains(&v.x) && (self.lo..=self.hi).contains(&v.y)
    }
}

pub const LOW_SQUARE: Square = Square { lo: 0.5, hi: 0.75 };
pub const HIGH_SQUARE: Square = Square { lo: 0.75, hi: 1.0 };

pub fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > ALPHA_RANGE.0 && alpha < ALPHA_RANGE.1 {
        Ok(())
    } else {
        Err(Error::Config(format!("mixture weight {alpha} outside (4/15, 2/5)")))
    }
}

/// Posted price `(1/2, 1/2)`: allocates on all of `[1/2, 1]^2`.
pub fn low_mechanism() -> Mechanism {
    Mechanism::posted_price(0.5, 0.5)
}

/// Posted price `(3/4, 3/4)`: allocates on `Q2` only.
pub fn high_mechanism() -> Mechanism {
    Mechanism::posted_price(0.75, 0.75)
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]` carrying a uniform law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformRect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl UniformRect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let ok = 0.0 <= x0 && x0 < x1 && x1 <= 1.0 && 0.0 <= y0 && y0 < y1 && y1 <= 1.0;
        if !ok {
            return Err(Error::Config(format!("bad rectangle [{x0},{x1}]x[{y0},{y1}]")));
        }
        Ok(UniformRect { x0, x1, y0, y1 })
    }

    pub fn square(s: Square) -> Self {
        UniformRect { x0: s.lo, x1: s.hi, y0: s.lo, y1: s.hi }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Valuation {
        Point::xy(
            self.x0 + (self.x1 - self.x0) * rng.gen::<f64>(),
            self.y0 + (self.y1 - self.y0) * rng.gen::<f64>(),
        )
    }
}

/// Column bands `[lo, hi)` of the rectangle on which `lower_y` is constant,
/// each paired with the lowest allocated y inside the rectangle.
fn column_bands(rect: &UniformRect, mech: &Mechanism) -> Vec<(f64, f64, f64)> {
    let mut cuts: Vec<f64> = mech
        .nodes()
        .iter()
        .map(|n| n.x)
        .filter(|&x| x > rect.x0 && x < rect.x1)
        .collect();
    cuts.dedup();
    let mut edges = vec![rect.x0];
    edges.extend(cuts);
    edges.push(rect.x1);
    edges
        .windows(2)
        .filter_map(|w| {
            let y = mech.lower_y(&w[0])?;
            (y < rect.y1).then_some((w[0], w[1], y.max(rect.y0)))
        })
        .collect()
}

/// Exact expected revenue of `mech` under the uniform law on `rect`.
pub fn uniform_rect_revenue(rect: &UniformRect, mech: &Mechanism) -> f64 {
    super::product_revenue(mech, &|x| rect.cdf_x(x), &|y| rect.cdf_y(y))
}

impl UniformRect {
    fn cdf_x(&self, x: f64) -> f64 {
        ((x - self.x0) / (self.x1 - self.x0)).clamp(0.0, 1.0)
    }

    fn cdf_y(&self, y: f64) -> f64 {
        ((y - self.y0) / (self.y1 - self.y0)).clamp(0.0, 1.0)
    }
}

/// Integral of the virtual surplus `(2 (v1 + v2) - (x1 + y1)) / area` over the
/// allocated part of `rect`, in closed form band by band.
///
/// It matches expected revenue when every critical price inside the rectangle
/// is at least the rectangle's lower-left corner; prices below it count as if
/// raised to the corner.
pub fn rectangle_virtual_revenue(rect: &UniformRect, mech: &Mechanism) -> f64 {
    let s = rect.x1 + rect.y1;
    let total: f64 = column_bands(rect, mech)
        .into_iter()
        .map(|(lo, hi, y)| {
            let (w, h) = (hi - lo, rect.y1 - y);
            // integral over [lo,hi] x [y, y1] of 2 v1 + 2 v2 - s
            (hi * hi - lo * lo) * h + w * (rect.y1 * rect.y1 - y * y) - s * w * h
        })
        .sum();
    total / rect.area()
}

/// `(E[rev(low)], E[rev(high)])` under the mixture with weight `alpha`.
pub fn smooth_family_revenues(alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    Ok((mixture_revenue(alpha, &low_mechanism()), mixture_revenue(alpha, &high_mechanism())))
}

/// Exact expected revenue under the two-square mixture.
pub fn mixture_revenue(alpha: f64, mech: &Mechanism) -> f64 {
    alpha * uniform_rect_revenue(&UniformRect::square(LOW_SQUARE), mech)
        + (1.0 - alpha) * uniform_rect_revenue(&UniformRect::square(HIGH_SQUARE), mech)
}

pub fn sample_mixture(alpha: f64, rng: &mut impl Rng) -> Valuation {
    if rng.gen_bool(alpha) {
        LOW_SQUARE.sample(rng)
    } else {
        HIGH_SQUARE.sample(rng)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domination {
    /// `true` for the low posted price, `false` for the high one.
    pub by_low: bool,
    /// Mean of `rev(dominator) - rev(mech)` over the paired draws.
    pub mean_gap: f64,
    pub std_error: f64,
    pub holds: bool,
}

/// Checks by paired Monte Carlo that the matching posted price earns at least
/// as much as `mech`. The low price is the candidate when `mech` allocates
/// somewhere in the interior of `Q1`.
pub fn domination_check(alpha: f64, mech: &Mechanism, samples: usize, rng: &mut impl Rng) -> Result<Domination> {
    check_alpha(alpha)?;
    if samples < 2 {
        return Err(Error::Config("domination check needs at least two samples".into()));
    }
    let by_low = mech.meets_below_left(&Point::xy(LOW_SQUARE.hi, LOW_SQUARE.hi));
    let dominator = if by_low { low_mechanism() } else { high_mechanism() };
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let v = sample_mixture(alpha, rng);
        let d = dominator.revenue(&v) - mech.revenue(&v);
        sum += d;
        sum_sq += d * d;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    let std_error = (var / n).sqrt();
    Ok(Domination { by_low, mean_gap: mean, std_error, holds: mean + 2.0 * std_error >= 0.0 })
}
