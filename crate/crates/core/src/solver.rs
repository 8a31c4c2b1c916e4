//! Exact revenue-optimal mechanisms for finitely supported valuations.
//!
//! The optimum is a longest path through the lattice spanned by the support
//! coordinates, where each edge is worth its price times the probability mass
//! it prices.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{Edge, Point, Rect, Valuation};
use crate::graph::OrthogonalGraph;
use crate::mechanism::Mechanism;
use crate::scalar::Scalar;

/// Largest support accepted by [`brute_force_best`].
pub const BRUTE_FORCE_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution<S = f64> {
    atoms: Vec<(Valuation<S>, S)>,
}

impl<S: Scalar> DiscreteDistribution<S> {
    /// Checks that atoms are distinct points of the square with nonnegative
    /// probabilities summing to one (exactly, or within 1e-12 for floats).
    pub fn new(atoms: Vec<(Valuation<S>, S)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        let mut total = S::zero();
        for (v, p) in &atoms {
            if !v.is_in_square() {
                return Err(Error::OutOfSquare(v.x.to_string(), v.y.to_string()));
            }
            if *p < S::zero() {
                return Err(Error::InvalidDistribution(format!("negative probability {p}")));
            }
            total = total + p.clone();
        }
        let exact_one = total == S::one();
        if !exact_one && (S::EXACT || (total.to_f64() - 1.0).abs() > 1e-12) {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        let mut sorted: Vec<&Valuation<S>> = atoms.iter().map(|(v, _)| v).collect();
        sorted.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidDistribution("repeated atom".into()));
        }
        Ok(DiscreteDistribution { atoms })
    }

    /// Normalizes nonnegative weights; repeated points are merged.
    pub fn from_weights(points: Vec<(Valuation<S>, S)>) -> Result<Self> {
        let mut merged: Vec<(Valuation<S>, S)> = Vec::with_capacity(points.len());
        let mut sorted = points;
        sorted.sort_by(|a, b| a.0.x.total_cmp(&b.0.x).then(a.0.y.total_cmp(&b.0.y)));
        let mut total = S::zero();
        for (v, w) in sorted {
            if w < S::zero() {
                return Err(Error::InvalidDistribution(format!("negative weight {w}")));
            }
            total = total + w.clone();
            match merged.last_mut() {
                Some((u, acc)) if *u == v => *acc = acc.clone() + w,
                _ => merged.push((v, w)),
            }
        }
        if !(total > S::zero()) {
            return Err(Error::InvalidDistribution("total weight is zero".into()));
        }
        let atoms = merged
            .into_iter()
            .map(|(v, w)| (v, w / total.clone()))
            .collect();
        let dist = DiscreteDistribution { atoms };
        for (v, _) in &dist.atoms {
            if !v.is_in_square() {
                return Err(Error::OutOfSquare(v.x.to_string(), v.y.to_string()));
            }
        }
        Ok(dist)
    }

    pub fn point_mass(v: Valuation<S>) -> Self {
        DiscreteDistribution { atoms: vec![(v, S::one())] }
    }

    pub fn atoms(&self) -> &[(Valuation<S>, S)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mass_in(&self, rect: &Rect<S>) -> S {
        self.atoms
            .iter()
            .filter(|(v, _)| rect.contains(v))
            .fold(S::zero(), |acc, (_, p)| acc + p.clone())
    }

    /// Sorted distinct support coordinates together with 0 and 1.
    pub fn coordinates(&self) -> (Vec<S>, Vec<S>) {
        let mut xs: Vec<S> = self.atoms.iter().map(|(v, _)| v.x.clone()).collect();
        let mut ys: Vec<S> = self.atoms.iter().map(|(v, _)| v.y.clone()).collect();
        for c in [&mut xs, &mut ys] {
            c.push(S::zero());
            c.push(S::one());
            c.sort_by(|a, b| a.total_cmp(b));
            c.dedup();
        }
        (xs, ys)
    }
}

impl DiscreteDistribution<f64> {
    /// Uniform weights over observed samples, merging exact repeats.
    pub fn empirical(samples: &[Valuation<f64>]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidDistribution("no samples".into()));
        }
        let mut counts: HashMap<(u64, u64), (Valuation<f64>, usize)> = HashMap::new();
        for v in samples {
            if !v.is_in_square() {
                return Err(Error::OutOfSquare(v.x.to_string(), v.y.to_string()));
            }
            counts
                .entry((v.x.to_bits(), v.y.to_bits()))
                .or_insert_with(|| (v.clone(), 0))
                .1 += 1;
        }
        let n = samples.len() as f64;
        let mut atoms: Vec<(Valuation<f64>, f64)> =
            counts.into_values().map(|(v, c)| (v, c as f64 / n)).collect();
        atoms.sort_by(|a, b| a.0.x.total_cmp(&b.0.x).then(a.0.y.total_cmp(&b.0.y)));
        Ok(DiscreteDistribution { atoms })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution<S = f64> {
    pub mechanism: Mechanism<S>,
    pub revenue: S,
}

/// The lattice on the support coordinates (plus the square's sides).
pub fn support_graph<S: Scalar>(dist: &DiscreteDistribution<S>) -> OrthogonalGraph<S> {
    let (xs, ys) = dist.coordinates();
    OrthogonalGraph::lattice(&xs, &ys)
}

/// Price of the edge times the probability it is the binding price.
pub fn edge_weight<S: Scalar>(edge: &Edge<S>, dist: &DiscreteDistribution<S>) -> Result<S> {
    Ok(edge.intrinsic_weight()? * dist.mass_in(&edge.influence_region()?))
}

pub fn expected_revenue<S: Scalar>(mech: &Mechanism<S>, dist: &DiscreteDistribution<S>) -> S {
    dist.atoms
        .iter()
        .fold(S::zero(), |acc, (v, p)| acc + p.clone() * mech.revenue(v))
}

/// Expected payments of the first and second buyer.
pub fn expected_payments<S: Scalar>(mech: &Mechanism<S>, dist: &DiscreteDistribution<S>) -> (S, S) {
    let mut out = (S::zero(), S::zero());
    for (v, p) in &dist.atoms {
        if mech.allocates(v) {
            let (p1, p2) = mech.payments(v);
            out.0 = out.0.clone() + p.clone() * p1;
            out.1 = out.1.clone() + p.clone() * p2;
        }
    }
    out
}

/// Expected revenue summed edge by edge (plus the two end terms).
pub fn decomposed_revenue<S: Scalar>(mech: &Mechanism<S>, dist: &DiscreteDistribution<S>) -> S {
    mech.weight_terms()
        .into_iter()
        .fold(S::zero(), |acc, (w, r)| acc + w * dist.mass_in(&r))
}

/// Longest-path search over a product lattice with probability mass bucketed
/// into the cells between lattice lines.
struct Lattice<S> {
    xs: Vec<S>,
    ys: Vec<S>,
    /// Per column band, `(row band, mass)` sorted by row band.
    columns: Vec<Vec<(usize, S)>>,
}

fn band<S: Scalar>(lines: &[S], v: &S) -> usize {
    lines.partition_point(|c| c <= v).saturating_sub(1)
}

impl<S: Scalar> Lattice<S> {
    fn new(xs: Vec<S>, ys: Vec<S>, atoms: &[(Valuation<S>, S)]) -> Self {
        let mut columns: Vec<Vec<(usize, S)>> = vec![Vec::new(); xs.len()];
        for (v, p) in atoms {
            columns[band(&xs, &v.x)].push((band(&ys, &v.y), p.clone()));
        }
        for col in &mut columns {
            col.sort_by_key(|&(j, _)| j);
        }
        Lattice { xs, ys, columns }
    }

    /// Runs the dynamic program column by column. With `trace` the path is
    /// recovered; otherwise memory stays linear in the number of rows.
    fn solve(&self, trace: bool) -> (S, Option<Vec<Point<S>>>) {
        let (nx, ny) = (self.xs.len(), self.ys.len());
        let top = ny - 1;
        // Mass in each row band at or right of the current column.
        let mut row_rest = vec![S::zero(); ny];
        for col in &self.columns {
            for (j, p) in col {
                row_rest[*j] = row_rest[*j].clone() + p.clone();
            }
        }
        let mut prev: Vec<S> = vec![S::zero(); ny];
        let mut cur: Vec<S> = vec![S::zero(); ny];
        // Mass of the previous column band at or above each row.
        let mut prev_up = vec![S::zero(); ny];
        let mut cur_up = vec![S::zero(); ny];
        let mut from_left = if trace { vec![0u64; (nx * ny).div_ceil(64)] } else { Vec::new() };

        for i in 0..nx {
            let x = &self.xs[i];
            for j in (0..ny).rev() {
                let down = if j == top {
                    x.clone() * row_rest[top].clone()
                } else {
                    cur[j + 1].clone() + x.clone() * row_rest[j].clone()
                };
                let mut best = down;
                if i > 0 {
                    let right = prev[j].clone() + self.ys[j].clone() * prev_up[j].clone();
                    if right > best {
                        best = right;
                        if trace {
                            let bit = i * ny + j;
                            from_left[bit / 64] |= 1 << (bit % 64);
                        }
                    }
                }
                cur[j] = best;
            }
            let col = &self.columns[i];
            let mut acc = S::zero();
            let mut k = col.len();
            for j in (0..ny).rev() {
                while k > 0 && col[k - 1].0 == j {
                    acc = acc + col[k - 1].1.clone();
                    k -= 1;
                }
                cur_up[j] = acc.clone();
            }
            for (j, p) in col {
                row_rest[*j] = row_rest[*j].clone() - p.clone();
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut prev_up, &mut cur_up);
        }

        // Ties end on the highest row, so no zero-mass drop along x = 1.
        let mut best_j = 0;
        let mut best = prev[0].clone() + self.ys[0].clone() * prev_up[0].clone();
        for j in 1..ny {
            let v = prev[j].clone() + self.ys[j].clone() * prev_up[j].clone();
            if v >= best {
                best = v;
                best_j = j;
            }
        }
        if !trace {
            return (best, None);
        }
        let (mut i, mut j) = (nx - 1, best_j);
        let mut rev_nodes = vec![Point::new(self.xs[i].clone(), self.ys[j].clone())];
        loop {
            let bit = i * ny + j;
            if from_left[bit / 64] >> (bit % 64) & 1 == 1 {
                i -= 1;
            } else if j == top {
                break;
            } else {
                j += 1;
            }
            rev_nodes.push(Point::new(self.xs[i].clone(), self.ys[j].clone()));
        }
        rev_nodes.reverse();
        (best, Some(rev_nodes))
    }
}

fn solution_from<S: Scalar>(value: S, nodes: Vec<Point<S>>) -> Solution<S> {
    let mechanism = Mechanism::new(nodes).expect("lattice path is complete").canonical();
    Solution { mechanism, revenue: value }
}

/// Revenue-maximizing mechanism, found as a longest path on the support lattice.
pub fn best_mechanism<S: Scalar>(dist: &DiscreteDistribution<S>) -> Solution<S> {
    let (xs, ys) = dist.coordinates();
    let (value, nodes) = Lattice::new(xs, ys, &dist.atoms).solve(true);
    solution_from(value, nodes.unwrap())
}

/// Optimal expected revenue without recovering the mechanism.
pub fn best_revenue<S: Scalar>(dist: &DiscreteDistribution<S>) -> S {
    let (xs, ys) = dist.coordinates();
    Lattice::new(xs, ys, &dist.atoms).solve(false).0
}

/// Best complete path on the uniform grid with step `1/k`.
pub fn best_grid_path<S: Scalar>(k: usize, dist: &DiscreteDistribution<S>) -> Solution<S> {
    let lines: Vec<S> = (0..=k).map(|i| S::from_ratio(i as i64, k as i64)).collect();
    let (value, nodes) = Lattice::new(lines.clone(), lines, &dist.atoms).solve(true);
    solution_from(value, nodes.unwrap())
}

/// Exhaustive search over allocated subsets; each subset's cheapest region is
/// the up-closure of its points. Only for small supports.
pub fn brute_force_best<S: Scalar>(dist: &DiscreteDistribution<S>) -> Result<Solution<S>> {
    let n = dist.len();
    if n > BRUTE_FORCE_CAP {
        return Err(Error::SupportTooLarge { got: n, cap: BRUTE_FORCE_CAP });
    }
    let mut best = Solution {
        mechanism: Mechanism::from_corners(&[]),
        revenue: expected_revenue(&Mechanism::from_corners(&[]), dist),
    };
    for mask in 1u32..(1 << n) {
        let chosen: Vec<Point<S>> = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| dist.atoms[i].0.clone())
            .collect();
        let mechanism = Mechanism::from_corners(&chosen);
        let revenue = expected_revenue(&mechanism, dist);
        if revenue > best.revenue {
            best = Solution { mechanism, revenue };
        }
    }
    Ok(best)
}

/// Best posted-price mechanism; prices range over support coordinates and 0.
pub fn best_posted_price<S: Scalar>(dist: &DiscreteDistribution<S>) -> Solution<S> {
    let (xs, ys) = dist.coordinates();
    let mut best: Option<Solution<S>> = None;
    for p1 in &xs {
        for p2 in &ys {
            let mechanism = Mechanism::posted_price(p1.clone(), p2.clone());
            let revenue = expected_revenue(&mechanism, dist);
            if best.as_ref().map_or(true, |b| revenue > b.revenue) {
                best = Some(Solution { mechanism, revenue });
            }
        }
    }
    best.expect("coordinates are never empty")
}
