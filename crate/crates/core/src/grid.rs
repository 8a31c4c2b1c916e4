//! Uniform grids, data-point augmentation, and grid approximations of
//! arbitrary monotone allocation regions.

use crate::error::{Error, Result};
use crate::geometry::{Edge, Point};
use crate::graph::OrthogonalGraph;
use crate::mechanism::Mechanism;
use crate::scalar::{Rational, Scalar};

use num_traits::{One, Zero};

/// The lattice `{0, 1/k, ..., 1}^2` with right and down edges.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformGrid<S = f64> {
    k: usize,
    lines: Vec<S>,
    graph: OrthogonalGraph<S>,
}

impl<S: Scalar> UniformGrid<S> {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::BadGridStep("1/0".into()));
        }
        let lines: Vec<S> = (0..=k).map(|i| S::from_ratio(i as i64, k as i64)).collect();
        let graph = OrthogonalGraph::lattice(&lines, &lines);
        Ok(UniformGrid { k, lines, graph })
    }

    /// Accepts a step `eps` only if `1/eps` is a positive integer.
    pub fn with_step(eps: &Rational) -> Result<Self> {
        if !(*eps > Rational::zero()) {
            return Err(Error::BadGridStep(eps.to_string()));
        }
        let inv = eps.recip();
        if !inv.denom().is_one() {
            return Err(Error::BadGridStep(eps.to_string()));
        }
        let k = num_traits::ToPrimitive::to_usize(inv.numer())
            .ok_or_else(|| Error::BadGridStep(eps.to_string()))?;
        UniformGrid::new(k)
    }

    pub fn cells(&self) -> usize {
        self.k
    }

    pub fn step(&self) -> S {
        S::from_ratio(1, self.k as i64)
    }

    pub fn lines(&self) -> &[S] {
        &self.lines
    }

    pub fn graph(&self) -> &OrthogonalGraph<S> {
        &self.graph
    }

    pub fn is_line(&self, v: &S) -> bool {
        self.lines.binary_search_by(|c| c.total_cmp(v)).is_ok()
    }

    /// Tile `(column, row)` owning `v`. Tiles own their north and east sides,
    /// so `(i/k, (i+1)/k]`; the west and south sides of the square fall into
    /// the first column and row.
    pub fn tile_of(&self, v: &Point<S>) -> (usize, usize) {
        let band = |c: &S| self.lines.partition_point(|l| l < c).saturating_sub(1).min(self.k - 1);
        (band(&v.x), band(&v.y))
    }

    /// Corners `(x0, y0, x1, y1)` of tile `(i, j)`.
    pub fn tile_bounds(&self, i: usize, j: usize) -> (S, S, S, S) {
        (
            self.lines[i].clone(),
            self.lines[j].clone(),
            self.lines[i + 1].clone(),
            self.lines[j + 1].clone(),
        )
    }
}

/// A uniform grid with data points spliced into some tiles.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedGrid<S = f64> {
    pub base: UniformGrid<S>,
    pub added_points: Vec<Point<S>>,
    pub graph: OrthogonalGraph<S>,
}

/// Splices each point into its tile: an interior point is joined to all four
/// sides, a point on a tile side is joined to the opposite side, and a point
/// on a lattice node changes nothing. At most one point per tile and at most
/// `2k` points overall.
pub fn augment<S: Scalar>(grid: &UniformGrid<S>, points: &[Point<S>]) -> Result<AugmentedGrid<S>> {
    let k = grid.cells();
    if points.len() > 2 * k {
        return Err(Error::TooManyPoints { got: points.len(), cap: 2 * k });
    }
    let mut occupied = vec![false; k * k];
    let mut segments: Vec<Edge<S>> = Vec::new();
    let lines = grid.lines();
    for i in 0..=k {
        segments.push(Edge::new(
            Point::new(lines[i].clone(), S::one()),
            Point::new(lines[i].clone(), S::zero()),
        ));
        segments.push(Edge::new(
            Point::new(S::zero(), lines[i].clone()),
            Point::new(S::one(), lines[i].clone()),
        ));
    }
    for p in points {
        if !p.is_in_square() {
            return Err(Error::OutOfSquare(p.x.to_string(), p.y.to_string()));
        }
        let (i, j) = grid.tile_of(p);
        if occupied[i * k + j] {
            return Err(Error::TileOccupied(i, j));
        }
        occupied[i * k + j] = true;
        let (x0, y0, x1, y1) = grid.tile_bounds(i, j);
        let on_vertical = grid.is_line(&p.x);
        let on_horizontal = grid.is_line(&p.y);
        if !on_vertical {
            segments.push(Edge::new(Point::new(p.x.clone(), y1.clone()), Point::new(p.x.clone(), if on_horizontal { y0.clone() } else { p.y.clone() })));
            if !on_horizontal {
                segments.push(Edge::new(p.clone(), Point::new(p.x.clone(), y0.clone())));
            }
        }
        if !on_horizontal {
            if on_vertical {
                segments.push(Edge::new(Point::new(x0.clone(), p.y.clone()), Point::new(x1.clone(), p.y.clone())));
            } else {
                segments.push(Edge::new(Point::new(x0.clone(), p.y.clone()), p.clone()));
                segments.push(Edge::new(p.clone(), Point::new(x1.clone(), p.y.clone())));
            }
        }
    }
    let graph = OrthogonalGraph::from_segments(
        &segments,
        &grid.graph().nodes,
        &Point::new(S::zero(), S::one()),
        &Point::new(S::one(), S::zero()),
    );
    Ok(AugmentedGrid { base: grid.clone(), added_points: points.to_vec(), graph })
}

/// A closed, upward-closed subset of the unit square.
pub trait MonotoneRegion<S: Scalar> {
    fn contains(&self, v: &Point<S>) -> bool;
    /// Smallest x in row `y`, or `None` when the row is empty.
    fn left_x(&self, y: &S) -> Option<S>;
    /// Smallest y in column `x`, or `None` when the column is empty.
    fn lower_y(&self, x: &S) -> Option<S>;
    /// Whether some allocated point lies strictly left of and below `corner`.
    fn meets_below_left(&self, corner: &Point<S>) -> bool;
}

impl<S: Scalar> MonotoneRegion<S> for Mechanism<S> {
    fn contains(&self, v: &Point<S>) -> bool {
        self.allocates(v)
    }

    fn left_x(&self, y: &S) -> Option<S> {
        Mechanism::left_x(self, y)
    }

    fn lower_y(&self, x: &S) -> Option<S> {
        Mechanism::lower_y(self, x)
    }

    fn meets_below_left(&self, corner: &Point<S>) -> bool {
        let left = self.nodes().partition_point(|n| n.x < corner.x);
        left > 0 && self.nodes()[left - 1].y < corner.y
    }
}

/// `{v : v1 + v2 >= level}`.
#[derive(Debug, Clone)]
pub struct HalfPlane<S> {
    pub level: S,
}

impl<S: Scalar> MonotoneRegion<S> for HalfPlane<S> {
    fn contains(&self, v: &Point<S>) -> bool {
        v.x.clone() + v.y.clone() >= self.level
    }

    fn left_x(&self, y: &S) -> Option<S> {
        let x = (self.level.clone() - y.clone()).max_of(S::zero());
        (x <= S::one()).then_some(x)
    }

    fn lower_y(&self, x: &S) -> Option<S> {
        self.left_x(x)
    }

    fn meets_below_left(&self, corner: &Point<S>) -> bool {
        corner.x.clone() + corner.y.clone() > self.level
    }
}

/// A region given only by a membership test; boundary queries bisect to 1e-9
/// and return a point inside the region.
pub struct PredicateRegion<F> {
    pub inside: F,
}

const BISECTION_TOL: f64 = 1e-9;

impl<F: Fn(f64, f64) -> bool> PredicateRegion<F> {
    fn bisect(&self, along_x: bool, fixed: f64) -> Option<f64> {
        let test = |t: f64| if along_x { (self.inside)(t, fixed) } else { (self.inside)(fixed, t) };
        if !test(1.0) {
            return None;
        }
        if test(0.0) {
            return Some(0.0);
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            if test(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi)
    }
}

impl<F: Fn(f64, f64) -> bool> MonotoneRegion<f64> for PredicateRegion<F> {
    fn contains(&self, v: &Point<f64>) -> bool {
        (self.inside)(v.x, v.y)
    }

    fn left_x(&self, y: &f64) -> Option<f64> {
        self.bisect(true, *y)
    }

    fn lower_y(&self, x: &f64) -> Option<f64> {
        self.bisect(false, *x)
    }

    fn meets_below_left(&self, corner: &Point<f64>) -> bool {
        (self.inside)(corner.x - BISECTION_TOL, corner.y - BISECTION_TOL)
    }
}

/// Grid approximation of a target region together with the points it adds.
#[derive(Debug, Clone, PartialEq)]
pub struct Associated<S = f64> {
    pub mechanism: Mechanism<S>,
    pub added_points: Vec<Point<S>>,
}

/// Smallest augmented-grid mechanism containing `target`.
///
/// Each tile whose interior meets the target contributes the lower-left
/// corner of that intersection: the entry point on the north side (or the
/// west corner) paired with the exit point on the east side (or the south
/// corner). Parts of the target running along the north or east side of the
/// square add the two end points of its boundary. Non-lattice corners become
/// augmentation points, one per tile, so the result lives on an augmented
/// grid. Every target valuation stays allocated and loses at most one grid
/// step of price per buyer.
pub fn associated_augmented_mechanism<S: Scalar, R: MonotoneRegion<S> + ?Sized>(
    target: &R,
    grid: &UniformGrid<S>,
) -> Associated<S> {
    let k = grid.cells();
    let one = S::one();
    let mut corners = Vec::new();
    let mut added_points = Vec::new();
    let mut used = vec![false; k * k];
    for i in 0..k {
        for j in 0..k {
            let (x0, y0, x1, y1) = grid.tile_bounds(i, j);
            if !target.meets_below_left(&Point::new(x1.clone(), y1.clone())) {
                continue;
            }
            let entry = target.left_x(&y1).expect("tile corner is allocated");
            let exit = target.lower_y(&x1).expect("tile corner is allocated");
            let cx = entry.max_of(x0.clone());
            let cy = exit.max_of(y0.clone());
            let added = match (grid.is_line(&cx), grid.is_line(&cy)) {
                (true, true) => None,
                (false, false) => Some(Point::new(cx.clone(), cy.clone())),
                (false, true) => Some(Point::new(cx.clone(), y1.clone())),
                (true, false) => Some(Point::new(x1.clone(), cy.clone())),
            };
            if let Some(p) = added {
                used[i * k + j] = true;
                added_points.push(p);
            }
            corners.push(Point::new(cx, cy));
        }
    }
    if target.contains(&Point::new(one.clone(), one.clone())) {
        let ends = [
            Point::new(target.left_x(&one).expect("allocated"), one.clone()),
            Point::new(one.clone(), target.lower_y(&one).expect("allocated")),
        ];
        for end in ends {
            if corners.iter().any(|c| end.dominates(c)) {
                continue;
            }
            if !(grid.is_line(&end.x) && grid.is_line(&end.y)) {
                let (i, j) = grid.tile_of(&end);
                debug_assert!(!used[i * k + j], "tile ({i}, {j}) holds two points");
                used[i * k + j] = true;
                added_points.push(end.clone());
            }
            corners.push(end);
        }
    }
    Associated { mechanism: Mechanism::from_corners(&corners), added_points }
}

/// The union of grid tiles lying entirely inside `target`.
pub fn inner_hull<S: Scalar, R: MonotoneRegion<S> + ?Sized>(
    target: &R,
    grid: &UniformGrid<S>,
) -> Mechanism<S> {
    let k = grid.cells();
    let mut corners = Vec::new();
    for i in 0..k {
        // Lowest tile of column i whose lower-left corner is allocated.
        for j in 0..k {
            let (x0, y0, _, _) = grid.tile_bounds(i, j);
            let c = Point::new(x0, y0);
            if target.contains(&c) {
                corners.push(c);
                break;
            }
        }
    }
    Mechanism::from_corners(&corners)
}

/// All monotone lattice paths from `(0, 1)` to `(1, 0)` on the `1/k` grid as
/// move strings, `true` meaning a step down. There are `C(2k, k)` of them.
pub fn lattice_paths(k: usize) -> Vec<Vec<bool>> {
    fn extend(rights: usize, downs: usize, cur: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
        if rights == 0 && downs == 0 {
            out.push(cur.clone());
            return;
        }
        if downs > 0 {
            cur.push(true);
            extend(rights, downs - 1, cur, out);
            cur.pop();
        }
        if rights > 0 {
            cur.push(false);
            extend(rights - 1, downs, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    extend(k, k, &mut Vec::with_capacity(2 * k), &mut out);
    out
}

/// The mechanism traced by a move string on the `1/k` grid.
pub fn path_from_moves<S: Scalar>(k: usize, moves: &[bool]) -> Mechanism<S> {
    let (mut i, mut j) = (0usize, k);
    let mut nodes = vec![Point::new(S::zero(), S::one())];
    for &down in moves {
        if down {
            j -= 1;
        } else {
            i += 1;
        }
        nodes.push(Point::new(S::from_ratio(i as i64, k as i64), S::from_ratio(j as i64, k as i64)));
    }
    Mechanism::new(nodes).expect("lattice moves form a complete path")
}
