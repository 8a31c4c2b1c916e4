//! Staircases that pick out any subset of the grid's anti-diagonal.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mechanism::Mechanism;
use crate::scalar::{Rational, Scalar};

/// The anti-diagonal lattice points `(i/k, 1 - i/k)` for `i = 1..=k`.
pub fn diagonal_points(k: usize) -> Vec<Point<Rational>> {
    (1..=k as i64)
        .map(|i| Point::new(Rational::from_ratio(i, k as i64), Rational::from_ratio(k as i64 - i, k as i64)))
        .collect()
}

/// A grid staircase whose corners are exactly the chosen diagonal points, so it
/// earns 1 on each of them and nothing on the rest of the diagonal.
/// `chosen` holds indices `i` in `1..=k`.
pub fn shatter_path(k: usize, chosen: &[usize]) -> Result<Mechanism<Rational>> {
    if k == 0 {
        return Err(Error::BadGridStep("zero cells".into()));
    }
    let diag = diagonal_points(k);
    let corners = chosen
        .iter()
        .map(|&i| {
            if i == 0 || i > k {
                Err(Error::Config(format!("diagonal index {i} outside 1..={k}")))
            } else {
                Ok(diag[i - 1].clone())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Mechanism::from_corners(&corners))
}
