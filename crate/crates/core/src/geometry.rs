//! Points, axis-parallel edges and their influence rectangles.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Point<S = f64> {
    pub x: S,
    pub y: S,
}

/// A pair of private values, one per buyer.
pub type Valuation<S = f64> = Point<S>;

impl<S: Scalar> Point<S> {
    pub fn new(x: S, y: S) -> Self {
        Point { x, y }
    }

    /// Builds a point, rejecting coordinates outside `[0, 1]`.
    pub fn in_square(x: S, y: S) -> Result<Self> {
        let p = Point { x, y };
        if p.is_in_square() {
            Ok(p)
        } else {
            Err(Error::OutOfSquare(p.x.to_string(), p.y.to_string()))
        }
    }

    pub fn is_in_square(&self) -> bool {
        let (zero, one) = (S::zero(), S::one());
        self.x >= zero && self.x <= one && self.y >= zero && self.y <= one
    }

    /// Componentwise `self >= other`.
    pub fn dominates(&self, other: &Point<S>) -> bool {
        self.x >= other.x && self.y >= other.y
    }

    pub fn to_f64(&self) -> Point<f64> {
        Point::new(self.x.to_f64(), self.y.to_f64())
    }

    pub fn convert<T: Scalar>(&self) -> Point<T> {
        Point::new(T::from_f64(self.x.to_f64()), T::from_f64(self.y.to_f64()))
    }
}

impl Point<f64> {
    pub fn xy(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

impl<S: fmt::Display> fmt::Display for Point<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.x, self.y)
    }
}

/// `[lo, hi)` or `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval<S> {
    pub lo: S,
    pub hi: S,
    pub hi_closed: bool,
}

impl<S: Scalar> Interval<S> {
    pub fn half_open(lo: S, hi: S) -> Self {
        Interval { lo, hi, hi_closed: false }
    }

    pub fn closed(lo: S, hi: S) -> Self {
        Interval { lo, hi, hi_closed: true }
    }

    pub fn contains(&self, v: &S) -> bool {
        *v >= self.lo && if self.hi_closed { *v <= self.hi } else { *v < self.hi }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rect<S> {
    pub x: Interval<S>,
    pub y: Interval<S>,
}

impl<S: Scalar> Rect<S> {
    pub fn contains(&self, p: &Point<S>) -> bool {
        self.x.contains(&p.x) && self.y.contains(&p.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Vertical,
    Horizontal,
}

/// A directed segment that either runs straight down or straight right.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge<S = f64> {
    pub from: Point<S>,
    pub to: Point<S>,
}

impl<S: Scalar> Edge<S> {
    pub fn new(from: Point<S>, to: Point<S>) -> Self {
        Edge { from, to }
    }

    pub fn orientation(&self) -> Result<Orientation> {
        if self.from.x == self.to.x && self.to.y < self.from.y {
            Ok(Orientation::Vertical)
        } else if self.from.y == self.to.y && self.to.x > self.from.x {
            Ok(Orientation::Horizontal)
        } else {
            Err(Error::NotAxisAligned(
                self.from.to_string(),
                self.to.to_string(),
            ))
        }
    }

    /// Valuations whose payment is set by this edge.
    ///
    /// A vertical edge at `x` spanning `[y_lo, y_hi)` prices the first buyer at
    /// `x` on `[x, 1] x [y_lo, y_hi)`; a horizontal edge at `y` spanning
    /// `[x_lo, x_hi)` prices the second buyer at `y` on `[x_lo, x_hi) x [y, 1]`.
    /// The top row and right column are priced by the path's end terms
    /// (see [`crate::mechanism::Mechanism::weight_terms`]).
    pub fn influence_region(&self) -> Result<Rect<S>> {
        let one = S::one();
        Ok(match self.orientation()? {
            Orientation::Vertical => Rect {
                x: Interval::closed(self.from.x.clone(), one),
                y: Interval::half_open(self.to.y.clone(), self.from.y.clone()),
            },
            Orientation::Horizontal => Rect {
                x: Interval::half_open(self.from.x.clone(), self.to.x.clone()),
                y: Interval::closed(self.from.y.clone(), one),
            },
        })
    }

    /// The price this edge charges: its x for vertical edges, its y for horizontal ones.
    pub fn intrinsic_weight(&self) -> Result<S> {
        Ok(match self.orientation()? {
            Orientation::Vertical => self.from.x.clone(),
            Orientation::Horizontal => self.from.y.clone(),
        })
    }

    pub(crate) fn segment_intersects(&self, other: &Edge<S>) -> bool {
        let (ax0, ax1) = ordered(&self.from.x, &self.to.x);
        let (ay0, ay1) = ordered(&self.from.y, &self.to.y);
        let (bx0, bx1) = ordered(&other.from.x, &other.to.x);
        let (by0, by1) = ordered(&other.from.y, &other.to.y);
        ax0 <= bx1 && bx0 <= ax1 && ay0 <= by1 && by0 <= ay1
    }
}

fn ordered<'a, S: Scalar>(a: &'a S, b: &'a S) -> (&'a S, &'a S) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::xy(x, y)
    }

    #[test]
    fn vertical_edge_region() {
        let e = Edge::new(p(0.5, 0.5), p(0.5, 0.0));
        let r = e.influence_region().unwrap();
        assert_eq!(r.x, Interval::closed(0.5, 1.0));
        assert_eq!(r.y, Interval::half_open(0.0, 0.5));
        assert_eq!(e.intrinsic_weight().unwrap(), 0.5);
        assert!(r.contains(&p(0.7, 0.2)));
        assert!(!r.contains(&p(0.7, 0.5)));
        assert!(r.contains(&p(1.0, 0.0)));
    }

    #[test]
    fn horizontal_edge_region() {
        let e = Edge::new(p(0.0, 0.5), p(0.5, 0.5));
        let r = e.influence_region().unwrap();
        assert_eq!(r.x, Interval::half_open(0.0, 0.5));
        assert_eq!(r.y, Interval::closed(0.5, 1.0));
        assert_eq!(e.intrinsic_weight().unwrap(), 0.5);
    }

    #[test]
    fn south_side_carries_no_weight() {
        let e = Edge::new(p(0.5, 0.0), p(1.0, 0.0));
        assert_eq!(e.intrinsic_weight().unwrap(), 0.0);
    }

    #[test]
    fn rejects_diagonal_and_backwards_edges() {
        assert!(Edge::new(p(0.0, 1.0), p(1.0, 0.0)).orientation().is_err());
        assert!(Edge::new(p(0.5, 0.0), p(0.5, 0.5)).orientation().is_err());
        assert!(Edge::new(p(0.5, 0.0), p(0.5, 0.0)).orientation().is_err());
    }

    #[test]
    fn square_check() {
        assert!(Point::in_square(0.0, 1.0).is_ok());
        assert!(Point::in_square(1.1, 0.0).is_err());
    }
}
