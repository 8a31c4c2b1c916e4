//! Online learners that post one mechanism per round and then see the
//! realized valuation pair.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::Valuation;
use crate::grid::{associated_augmented_mechanism, lattice_paths, path_from_moves, UniformGrid};
use crate::mechanism::Mechanism;
use crate::solver::{best_mechanism, DiscreteDistribution};

pub type SimRng = ChaCha8Rng;

/// Full-information online learner.
pub trait Learner {
    fn name(&self) -> String;
    /// The mechanism for the coming round, chosen from past observations only.
    fn post(&mut self, round: usize, rng: &mut SimRng) -> Mechanism;
    fn observe(&mut self, v: &Valuation);
}

/// Posts the same mechanism every round.
#[derive(Debug, Clone)]
pub struct Fixed {
    label: String,
    mechanism: Mechanism,
}

impl Fixed {
    pub fn new(label: impl Into<String>, mechanism: Mechanism) -> Self {
        Fixed { label: label.into(), mechanism }
    }

    pub fn posted_price(p1: f64, p2: f64) -> Self {
        Fixed::new(format!("posted({p1},{p2})"), Mechanism::posted_price(p1, p2))
    }

    pub fn mechanism(&self) -> &Mechanism {
        &self.mechanism
    }
}

impl Learner for Fixed {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn post(&mut self, _round: usize, _rng: &mut SimRng) -> Mechanism {
        self.mechanism.clone()
    }

    fn observe(&mut self, _v: &Valuation) {}
}

// ---------------------------------------------------------------------------
// Adaptive-grid learner
// ---------------------------------------------------------------------------

pub const DEFAULT_ATBM_CONSTANT: f64 = 14.0;

/// Finest grid the adaptive learner will build.
pub const MAX_CELLS: usize = 1 << 12;

/// When the empirical optimum is recomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResolveSchedule {
    EveryRound,
    /// Recompute once the history has grown by this factor since the last solve.
    Geometric { ratio: f64 },
}

/// Grid resolution for round `t`: the step `c (ln T / t)^(1/4)`, capped at 1
/// and rounded down to the next `1/k`.
pub fn precision_cells(constant: f64, horizon: usize, t: usize) -> usize {
    let raw = constant * ((horizon as f64).ln() / t as f64).powf(0.25);
    let eps = raw.min(1.0);
    if !(eps > 1.0 / MAX_CELLS as f64) {
        return MAX_CELLS;
    }
    ((1.0 / eps - 1e-9).ceil() as usize).clamp(1, MAX_CELLS)
}

/// Solves the empirical problem on past rounds and posts the augmented-grid
/// approximation of the optimum at the current precision.
#[derive(Debug, Clone)]
pub struct Atbm {
    horizon: usize,
    constant: f64,
    schedule: ResolveSchedule,
    first: Mechanism,
    counts: HashMap<(u64, u64), (Valuation, usize)>,
    seen: usize,
    optimum: Option<Mechanism>,
    solved_at: usize,
    posted: Option<(usize, usize, Mechanism)>,
}

impl Atbm {
    pub fn new(horizon: usize) -> Self {
        Atbm {
            horizon,
            constant: DEFAULT_ATBM_CONSTANT,
            schedule: ResolveSchedule::EveryRound,
            first: Mechanism::full_square(),
            counts: HashMap::new(),
            seen: 0,
            optimum: None,
            solved_at: 0,
            posted: None,
        }
    }

    pub fn with_constant(mut self, constant: f64) -> Self {
        self.constant = constant;
        self
    }

    pub fn with_schedule(mut self, schedule: ResolveSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_first_mechanism(mut self, m: Mechanism) -> Self {
        self.first = m;
        self
    }

    pub fn history_len(&self) -> usize {
        self.seen
    }

    fn needs_solve(&self) -> bool {
        match (self.optimum.is_some(), self.schedule) {
            (false, _) => true,
            (true, ResolveSchedule::EveryRound) => self.seen > self.solved_at,
            (true, ResolveSchedule::Geometric { ratio }) => {
                self.seen as f64 >= self.solved_at as f64 * ratio
            }
        }
    }

    pub fn empirical(&self) -> DiscreteDistribution {
        let n = self.seen as f64;
        let atoms: Vec<(Valuation, f64)> = self
            .counts
            .values()
            .map(|(v, c)| (v.clone(), *c as f64 / n))
            .collect();
        DiscreteDistribution::from_weights(atoms).expect("history is nonempty")
    }

    /// Empirical optimum on the current history.
    pub fn optimum(&self) -> Option<&Mechanism> {
        self.optimum.as_ref()
    }
}

impl Learner for Atbm {
    fn name(&self) -> String {
        "atbm".into()
    }

    fn post(&mut self, round: usize, _rng: &mut SimRng) -> Mechanism {
        if self.seen == 0 {
            return self.first.clone();
        }
        if self.needs_solve() {
            self.optimum = Some(best_mechanism(&self.empirical()).mechanism);
            self.solved_at = self.seen;
        }
        let k = precision_cells(self.constant, self.horizon, round.max(1));
        if let Some((pk, at, m)) = &self.posted {
            if *pk == k && *at == self.solved_at {
                return m.clone();
            }
        }
        let grid = UniformGrid::new(k).expect("k >= 1");
        let target = self.optimum.as_ref().expect("solved above");
        let m = associated_augmented_mechanism(target, &grid).mechanism;
        self.posted = Some((k, self.solved_at, m.clone()));
        m
    }

    fn observe(&mut self, v: &Valuation) {
        self.seen += 1;
        self.counts
            .entry((v.x.to_bits(), v.y.to_bits()))
            .or_insert_with(|| (v.clone(), 0))
            .1 += 1;
    }
}

// ---------------------------------------------------------------------------
// Hedge over grid paths
// ---------------------------------------------------------------------------

/// Smallest `k` with `k^3 >= horizon`, so the step `1/k` is at most `T^(-1/3)`.
pub fn cells_for_horizon(horizon: usize) -> usize {
    let mut k = (horizon as f64).cbrt().round().max(1.0) as usize;
    while k.pow(3) < horizon {
        k += 1;
    }
    while k > 1 && (k - 1).pow(3) >= horizon {
        k -= 1;
    }
    k
}

/// `ln C(2k, k)`, the log of the number of paths on the `1/k` grid.
pub fn log_path_count(k: usize) -> f64 {
    (1..=k).map(|i| ((k + i) as f64 / i as f64).ln()).sum()
}

/// Learning rate `sqrt(ln N / T) / 2`, balancing the two terms of the Hedge
/// bound for per-round rewards in `[0, 2]`.
pub fn tuned_rate(k: usize, horizon: usize) -> f64 {
    0.5 * (log_path_count(k).max(f64::MIN_POSITIVE) / horizon.max(1) as f64).sqrt().min(1.0)
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Exponential weights over all lattice paths of the `1/k` grid from `(0, 1)`
/// to `(1, 0)`, stored per edge.
///
/// Each edge keeps the number of past valuations it priced; its log-weight is
/// `eta * price * count`. A path's weight is the product of its edge weights,
/// which equals `exp(eta * cumulative revenue)` of the path mechanism. Node
/// weights sum suffix-path weights and drive exact sampling one edge at a time.
#[derive(Debug, Clone)]
pub struct PathHedge {
    k: usize,
    eta: f64,
    lines: Vec<f64>,
    /// Right edge leaving `(i, j)`, indexed `i * (k + 1) + j`.
    right_counts: Vec<u64>,
    /// Down edge from `(i, j + 1)` to `(i, j)`, indexed `i * k + j`.
    down_counts: Vec<u64>,
    /// Log node weights, indexed `i * (k + 1) + j`.
    node_log: Vec<f64>,
    stale: bool,
}

impl PathHedge {
    pub fn new(k: usize, eta: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::BadGridStep("1/0".into()));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Config(format!("learning rate must be positive, got {eta}")));
        }
        let lines = (0..=k).map(|i| i as f64 / k as f64).collect();
        let mut h = PathHedge {
            k,
            eta,
            lines,
            right_counts: vec![0; k * (k + 1)],
            down_counts: vec![0; (k + 1) * k],
            node_log: vec![0.0; (k + 1) * (k + 1)],
            stale: true,
        };
        h.refresh();
        Ok(h)
    }

    /// Grid `1/k` with `k^3 >= T` and rate `T^(-1/2)`.
    pub fn for_horizon(horizon: usize) -> Self {
        let k = cells_for_horizon(horizon);
        PathHedge::new(k, (horizon.max(1) as f64).powf(-0.5)).expect("valid defaults")
    }

    /// Grid `1/k` with `k^3 >= T` and rate `sqrt(ln N / T)`, where `N` is the
    /// number of grid paths.
    pub fn tuned_for_horizon(horizon: usize) -> Self {
        let k = cells_for_horizon(horizon);
        PathHedge::new(k, tuned_rate(k, horizon)).expect("valid defaults")
    }

    pub fn cells(&self) -> usize {
        self.k
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    fn node(&self, i: usize, j: usize) -> usize {
        i * (self.k + 1) + j
    }

    /// Band index `b` with `lines[b] <= v < lines[b + 1]`; `k` when `v = 1`.
    fn band(&self, v: f64) -> usize {
        self.lines.partition_point(|&l| l <= v).saturating_sub(1)
    }

    pub fn right_log_weight(&self, i: usize, j: usize) -> f64 {
        self.eta * self.lines[j] * self.right_counts[i * (self.k + 1) + j] as f64
    }

    pub fn down_log_weight(&self, i: usize, j: usize) -> f64 {
        self.eta * self.lines[i] * self.down_counts[i * self.k + j] as f64
    }

    /// Counts the observation on every positively priced edge whose
    /// influence rectangle contains it.
    pub fn update(&mut self, v: &Valuation) {
        let k = self.k;
        let (bx, by) = (self.band(v.x), self.band(v.y));
        if bx < k {
            // Right edges in column band bx at heights j <= v2.
            for j in 1..=by.min(k) {
                self.right_counts[bx * (k + 1) + j] += 1;
            }
        }
        if by < k {
            // Down edges in row band by at columns i <= v1.
            for i in 1..=bx.min(k) {
                self.down_counts[i * k + by] += 1;
            }
        }
        self.stale = true;
    }

    /// Recomputes node weights from the sink backwards in log space.
    pub fn refresh(&mut self) {
        if !self.stale {
            return;
        }
        let k = self.k;
        for i in (0..=k).rev() {
            for j in 0..=k {
                let mut acc = f64::NEG_INFINITY;
                if i == k && j == 0 {
                    acc = 0.0;
                }
                if i < k {
                    acc = log_add(acc, self.right_log_weight(i, j) + self.node_log[self.node(i + 1, j)]);
                }
                if j > 0 {
                    acc = log_add(acc, self.down_log_weight(i, j - 1) + self.node_log[self.node(i, j - 1)]);
                }
                let idx = self.node(i, j);
                self.node_log[idx] = acc;
            }
        }
        self.stale = false;
    }

    /// Log weight of node `(i, j)`: log of the summed weights of all paths
    /// from it to the sink.
    pub fn node_log_weight(&mut self, i: usize, j: usize) -> f64 {
        self.refresh();
        self.node_log[self.node(i, j)]
    }

    /// Probability of stepping down at `(i, j)`.
    pub fn down_probability(&mut self, i: usize, j: usize) -> f64 {
        self.refresh();
        if i == self.k {
            return 1.0;
        }
        if j == 0 {
            return 0.0;
        }
        let here = self.node_log[self.node(i, j)];
        let down = self.down_log_weight(i, j - 1) + self.node_log[self.node(i, j - 1)];
        let right = self.right_log_weight(i, j) + self.node_log[self.node(i + 1, j)];
        let q_down = (down - here).exp();
        let q_right = (right - here).exp();
        debug_assert!((0.0..=1.0 + 1e-12).contains(&q_down));
        debug_assert!((q_down + q_right - 1.0).abs() < 1e-9);
        q_down.min(1.0)
    }

    /// Draws a path edge by edge; `true` marks a step down.
    pub fn sample_moves(&mut self, rng: &mut impl Rng) -> Vec<bool> {
        self.refresh();
        let (mut i, mut j) = (0, self.k);
        let mut moves = Vec::with_capacity(2 * self.k);
        while i < self.k || j > 0 {
            let down = rng.gen::<f64>() < self.down_probability(i, j);
            if down {
                j -= 1;
            } else {
                i += 1;
            }
            moves.push(down);
        }
        moves
    }

    pub fn sample_path(&mut self, rng: &mut impl Rng) -> Mechanism {
        let moves = self.sample_moves(rng);
        path_from_moves(self.k, &moves)
    }

    /// Sum of edge log-weights along a path.
    pub fn path_log_weight(&self, moves: &[bool]) -> f64 {
        let (mut i, mut j) = (0, self.k);
        let mut total = 0.0;
        for &down in moves {
            if down {
                total += self.down_log_weight(i, j - 1);
                j -= 1;
            } else {
                total += self.right_log_weight(i, j);
                i += 1;
            }
        }
        total
    }

    /// Probability that [`PathHedge::sample_moves`] returns `moves`, as the
    /// product of the per-node step probabilities.
    pub fn path_probability(&mut self, moves: &[bool]) -> f64 {
        let (mut i, mut j) = (0, self.k);
        let mut prob = 1.0;
        for &down in moves {
            let q = self.down_probability(i, j);
            if down {
                prob *= q;
                j -= 1;
            } else {
                prob *= 1.0 - q;
                i += 1;
            }
        }
        prob
    }
}

/// Hedge over a grid of paths, posting a sampled path each round.
#[derive(Debug, Clone)]
pub struct PathLearning {
    hedge: PathHedge,
}

impl PathLearning {
    pub fn new(hedge: PathHedge) -> Self {
        PathLearning { hedge }
    }

    pub fn hedge(&self) -> &PathHedge {
        &self.hedge
    }

    pub fn hedge_mut(&mut self) -> &mut PathHedge {
        &mut self.hedge
    }
}

impl Learner for PathLearning {
    fn name(&self) -> String {
        "path-hedge".into()
    }

    fn post(&mut self, _round: usize, rng: &mut SimRng) -> Mechanism {
        self.hedge.sample_path(rng)
    }

    fn observe(&mut self, v: &Valuation) {
        self.hedge.update(v);
    }
}

/// Largest grid accepted by [`explicit_hedge`].
pub const EXPLICIT_HEDGE_CAP: usize = 5;

/// Hedge probabilities computed path by path from realized revenues.
pub fn explicit_hedge(k: usize, eta: f64, history: &[Valuation]) -> Result<Vec<(Vec<bool>, f64)>> {
    if k > EXPLICIT_HEDGE_CAP {
        return Err(Error::GridTooFine { got: k, cap: EXPLICIT_HEDGE_CAP });
    }
    let paths = lattice_paths(k);
    let logs: Vec<f64> = paths
        .iter()
        .map(|moves| {
            let m: Mechanism = path_from_moves(k, moves);
            eta * history.iter().map(|v| m.revenue(v)).sum::<f64>()
        })
        .collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = logs.iter().map(|l| (l - top).exp()).sum();
    Ok(paths
        .into_iter()
        .zip(logs)
        .map(|(p, l)| (p, (l - top).exp() / total))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn schedule_arithmetic() {
        // ln T = 1 and t = 14^4 give a raw step of exactly 1.
        let t = 14usize.pow(4);
        let raw = 14.0 * (1.0f64 / t as f64).powf(0.25);
        assert!((raw - 1.0).abs() < 1e-12);
        assert_eq!(precision_cells(14.0, 3, 2), 1);
        assert_eq!(precision_cells(1.0, 1000, 1000), 4);
        assert_eq!(cells_for_horizon(1000), 10);
        assert_eq!(cells_for_horizon(1001), 11);
        assert_eq!(cells_for_horizon(100_000), 47);
        assert_eq!(cells_for_horizon(1), 1);
    }

    #[test]
    fn fresh_hedge_counts_paths() {
        let mut h = PathHedge::new(2, 0.1).unwrap();
        assert!((h.node_log_weight(0, 2).exp() - 6.0).abs() < 1e-12);
        assert!((h.node_log_weight(0, 1).exp() - 3.0).abs() < 1e-12);
        assert!((h.down_probability(0, 2) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn update_touches_pricing_edges_only() {
        let mut h = PathHedge::new(2, 0.1).unwrap();
        h.update(&Valuation::xy(0.7, 0.2));
        // The only right edge below the point sits at height 0 and is unpriced.
        assert_eq!(h.right_counts.iter().sum::<u64>(), 0);
        // Down edges in row band 0 at x = 1/2 and x = 0; the latter is unpriced.
        assert_eq!(h.down_counts[k_idx(2, 1, 0)], 1);
        assert_eq!(h.down_counts.iter().sum::<u64>(), 1);
    }

    fn k_idx(k: usize, i: usize, j: usize) -> usize {
        i * k + j
    }

    #[test]
    fn explicit_hedge_sizes() {
        assert_eq!(explicit_hedge(2, 0.1, &[]).unwrap().len(), 6);
        assert_eq!(explicit_hedge(3, 0.1, &[]).unwrap().len(), 20);
        assert_eq!(explicit_hedge(5, 0.1, &[]).unwrap().len(), 252);
        assert!(explicit_hedge(6, 0.1, &[]).is_err());
        for (_, p) in explicit_hedge(2, 0.1, &[]).unwrap() {
            assert!((p - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn atbm_first_round_and_point_mass() {
        let mut rng = SimRng::seed_from_u64(1);
        let mut a = Atbm::new(1000).with_constant(1.0);
        assert_eq!(a.post(1, &mut rng), Mechanism::full_square());
        for t in 1..200 {
            a.observe(&Valuation::xy(0.5, 0.5));
            let m = a.post(t + 1, &mut rng);
            if t > 100 {
                assert_eq!(m.revenue(&Valuation::xy(0.5, 0.5)), 1.0);
            }
        }
    }

    #[test]
    fn atbm_is_deterministic() {
        let history = [Valuation::xy(0.3, 0.8), Valuation::xy(0.6, 0.4), Valuation::xy(0.9, 0.1)];
        let run = || {
            let mut rng = SimRng::seed_from_u64(9);
            let mut a = Atbm::new(50).with_constant(1.0);
            for v in &history {
                a.observe(v);
            }
            a.post(4, &mut rng)
        };
        assert_eq!(run(), run());
    }
}
