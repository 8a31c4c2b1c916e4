//! Truthful mechanisms as monotone staircases.
//!
//! A mechanism is a down-right path from the north side of the unit square to
//! its east side. It allocates to every valuation that dominates some path node
//! and charges each buyer the smallest bid that would still win.

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{Edge, Interval, Point, Rect, Valuation};
use crate::graph::OrthogonalGraph;
use crate::scalar::{parse_scalar, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct Mechanism<S = f64> {
    nodes: Vec<Point<S>>,
}

impl<S: Scalar> Mechanism<S> {
    /// Validates a complete path: starts at `y = 1`, ends at `x = 1`, every
    /// step goes straight down or straight right.
    pub fn new(nodes: Vec<Point<S>>) -> Result<Self> {
        let first = nodes
            .first()
            .ok_or_else(|| Error::InvalidPath("empty path".into()))?;
        if first.y != S::one() {
            return Err(Error::InvalidPath(format!("path starts at ({first}), not on y = 1")));
        }
        let last = nodes.last().unwrap();
        if last.x != S::one() {
            return Err(Error::InvalidPath(format!("path ends at ({last}), not on x = 1")));
        }
        if let Some(p) = nodes.iter().find(|p| !p.is_in_square()) {
            return Err(Error::OutOfSquare(p.x.to_string(), p.y.to_string()));
        }
        for w in nodes.windows(2) {
            Edge::new(w[0].clone(), w[1].clone()).orientation()?;
        }
        Ok(Mechanism { nodes })
    }

    /// Finds the complete path through the given graph nodes.
    pub fn from_graph_path(graph: &OrthogonalGraph<S>, path: &[usize]) -> Result<Self> {
        for w in path.windows(2) {
            if !graph.edges.contains(&(w[0], w[1])) {
                return Err(Error::InvalidPath(format!("no edge {} -> {}", w[0], w[1])));
            }
        }
        Mechanism::new(path.iter().map(|&i| graph.nodes[i].clone()).collect())
    }

    /// The staircase bounding the up-closure of `points`. With no points the
    /// result allocates only at `(1, 1)`.
    pub fn from_corners(points: &[Point<S>]) -> Self {
        let mut pts: Vec<Point<S>> = points.to_vec();
        pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        let mut minimal: Vec<Point<S>> = Vec::new();
        for p in pts {
            if minimal.last().map_or(true, |m: &Point<S>| p.y < m.y) {
                minimal.push(p);
            }
        }
        if minimal.is_empty() {
            return Mechanism { nodes: vec![Point::new(S::one(), S::one())] };
        }
        let one = S::one();
        let mut nodes = Vec::with_capacity(2 * minimal.len() + 1);
        nodes.push(Point::new(minimal[0].x.clone(), one.clone()));
        for (k, p) in minimal.iter().enumerate() {
            if k > 0 {
                nodes.push(Point::new(p.x.clone(), minimal[k - 1].y.clone()));
            }
            nodes.push(p.clone());
        }
        nodes.push(Point::new(one, minimal.last().unwrap().y.clone()));
        nodes.dedup();
        Mechanism { nodes }.canonical()
    }

    /// Allocates iff `v1 >= p1` and `v2 >= p2`.
    pub fn posted_price(p1: S, p2: S) -> Self {
        Mechanism::from_corners(&[Point::new(p1, p2)])
    }

    /// Always allocates, charges nothing.
    pub fn full_square() -> Self {
        Mechanism {
            nodes: vec![
                Point::new(S::zero(), S::one()),
                Point::new(S::zero(), S::zero()),
                Point::new(S::one(), S::zero()),
            ],
        }
    }

    pub fn nodes(&self) -> &[Point<S>] {
        &self.nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge<S>> + '_ {
        self.nodes
            .windows(2)
            .map(|w| Edge::new(w[0].clone(), w[1].clone()))
    }

    /// Number of nodes whose x is at most `v1`.
    fn count_left_of(&self, v1: &S) -> usize {
        self.nodes.partition_point(|n| n.x.compare(v1) != Ordering::Greater)
    }

    pub fn allocates(&self, v: &Valuation<S>) -> bool {
        match self.count_left_of(&v.x) {
            0 => false,
            k => self.nodes[k - 1].y.compare(&v.y) != Ordering::Greater,
        }
    }

    /// Critical prices `(p1, p2)`: the lowest winning bid of each buyer with
    /// the other bid held fixed, or zero if no bid wins.
    pub fn payments(&self, v: &Valuation<S>) -> (S, S) {
        let first_below = self.nodes.partition_point(|n| n.y.compare(&v.y) == Ordering::Greater);
        let p1 = self
            .nodes
            .get(first_below)
            .map_or_else(S::zero, |n| n.x.clone());
        let p2 = match self.count_left_of(&v.x) {
            0 => S::zero(),
            k => self.nodes[k - 1].y.clone(),
        };
        (p1, p2)
    }

    pub fn revenue(&self, v: &Valuation<S>) -> S {
        if self.allocates(v) {
            let (p1, p2) = self.payments(v);
            p1 + p2
        } else {
            S::zero()
        }
    }

    /// Smallest y allocated in column `x`, if any.
    pub fn lower_y(&self, x: &S) -> Option<S> {
        match self.count_left_of(x) {
            0 => None,
            k => Some(self.nodes[k - 1].y.clone()),
        }
    }

    /// Smallest x allocated in row `y`, if any.
    pub fn left_x(&self, y: &S) -> Option<S> {
        let first_below = self.nodes.partition_point(|n| n.y.compare(y) == Ordering::Greater);
        self.nodes.get(first_below).map(|n| n.x.clone())
    }

    /// Drops repeated nodes and the middle node of straight runs.
    pub fn canonical(&self) -> Self {
        let mut nodes: Vec<Point<S>> = Vec::with_capacity(self.nodes.len());
        for p in &self.nodes {
            if nodes.last() == Some(p) {
                continue;
            }
            if nodes.len() >= 2 {
                let a = &nodes[nodes.len() - 2];
                let b = &nodes[nodes.len() - 1];
                if (a.x == b.x && b.x == p.x) || (a.y == b.y && b.y == p.y) {
                    nodes.pop();
                }
            }
            nodes.push(p.clone());
        }
        Mechanism { nodes }
    }

    /// Pareto-minimal nodes, which determine the allocation region.
    pub fn corners(&self) -> Vec<Point<S>> {
        let n = self.nodes.len();
        (0..n)
            .filter(|&i| {
                let next_goes_down = i + 1 < n && self.nodes[i + 1].x == self.nodes[i].x;
                let came_from_left = i > 0 && self.nodes[i - 1].y == self.nodes[i].y;
                !next_goes_down && !came_from_left
            })
            .map(|i| self.nodes[i].clone())
            .collect()
    }

    /// Two mechanisms with the same corners allocate and charge identically.
    pub fn same_region(&self, other: &Mechanism<S>) -> bool {
        self.corners() == other.corners()
    }

    /// Revenue as a sum of priced rectangles: one per path edge plus the two
    /// end terms pricing the top row at the start x and the right column at
    /// the end y. For every valuation, `revenue(v) = sum of weights whose
    /// rectangle contains v`.
    pub fn weight_terms(&self) -> Vec<(S, Rect<S>)> {
        let one = S::one();
        let start = &self.nodes[0];
        let end = self.nodes.last().unwrap();
        let mut terms = Vec::with_capacity(self.nodes.len() + 1);
        terms.push((
            start.x.clone(),
            Rect {
                x: Interval::closed(start.x.clone(), one.clone()),
                y: Interval::closed(one.clone(), one.clone()),
            },
        ));
        for e in self.edges() {
            let w = e.intrinsic_weight().expect("validated path");
            let r = e.influence_region().expect("validated path");
            terms.push((w, r));
        }
        terms.push((
            end.y.clone(),
            Rect {
                x: Interval::closed(one.clone(), one.clone()),
                y: Interval::closed(end.y.clone(), one),
            },
        ));
        terms
    }

    pub fn to_f64(&self) -> Mechanism<f64> {
        Mechanism { nodes: self.nodes.iter().map(Point::to_f64).collect() }
    }

    pub fn convert<T: Scalar>(&self) -> Mechanism<T> {
        Mechanism { nodes: self.nodes.iter().map(Point::convert).collect() }
    }

    /// One `x y` pair per line.
    pub fn to_polyline(&self) -> String {
        let mut out = String::new();
        for p in &self.nodes {
            let _ = writeln!(out, "{} {}", p.x, p.y);
        }
        out
    }

    /// Reads the format written by [`Mechanism::to_polyline`]; coordinates may
    /// be decimals or `n/d` fractions. Blank lines and `#` comments are skipped.
    pub fn parse_polyline(text: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(x), Some(y), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse(format!("expected `x y`, got {line:?}")));
            };
            nodes.push(Point::new(parse_scalar(x)?, parse_scalar(y)?));
        }
        Mechanism::new(nodes)
    }
}

impl Mechanism<f64> {
    /// A short stable identifier for logs.
    pub fn fingerprint(&self) -> u64 {
        // FNV-1a over the coordinate bits.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for p in &self.nodes {
            for b in p.x.to_bits().to_le_bytes().into_iter().chain(p.y.to_bits().to_le_bytes()) {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }
}
