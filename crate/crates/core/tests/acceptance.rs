//! Acceptance suite. Prints one `PASS` or `FAIL` line per criterion plus
//! indented detail lines, then a summary.
//!
//! Criteria listed in `KNOWN_GAPS` are expected to fail for the documented
//! reason; they are still evaluated and reported. The run exits non-zero when
//! any other criterion fails, or when a known gap unexpectedly passes.
//!
//! `ACCEPTANCE_ONLY=1,7a` restricts the run to the listed criteria.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::process::ExitCode;
use std::time::Instant;

use jointads::environments::smooth::{
    high_mechanism, low_mechanism, rectangle_virtual_revenue, sample_mixture, UniformRect, LOW_SQUARE,
};
use jointads::environments::{
    diagonal_points, equal_revenue_dist, separating_threshold, shatter_path, threshold_mechanism, AdversarialTrace,
    EnvironmentSpec, Number,
};
use jointads::grid::{associated_augmented_mechanism, lattice_paths, UniformGrid};
use jointads::harness::{
    regret_report, run_seeds, slope_estimate, Constants, ExperimentConfig, HedgeRate, LearnerSpec,
    Outputs, SlopeFit,
};
use jointads::learners::{explicit_hedge, PathHedge, SimRng};
use jointads::solver::{
    best_grid_path, best_mechanism, best_posted_price, brute_force_best, decomposed_revenue, expected_payments,
    expected_revenue, DiscreteDistribution,
};
use jointads::{Mechanism, Point, Rational, Scalar, Valuation};
use rand::{Rng, SeedableRng};

/// Criteria that cannot hold as stated; see the decisions ledger.
const KNOWN_GAPS: &[(&str, &str)] = &[
    (
        "7b",
        "the threshold mechanism charges 1 on R-rounds and tau + zeta on L-rounds, never the full v1 + v2",
    ),
    (
        "7c",
        "after an L-round a grid line can fall in (b, a], and a path charging a positive first price on both branches then earns more than delta + zeta",
    ),
    (
        "8a",
        "the log N factor in the Hedge bound at the T^-1/3 grid puts the fitted exponent at about 2/3 + 1/(2 ln T), on the 0.72 boundary",
    ),
    (
        "8b",
        "with the default constant the equal-revenue atoms share one grid tile for the whole run, so regret is linear",
    ),
];

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Outcome {
    fn new(id: &'static str, title: &'static str) -> Self {
        Outcome { id, title, pass: true, detail: String::new(), notes: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.pass = false;
            self.notes.push(format!("violated: {}", what.into()));
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

fn rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

fn random_rational_dist(r: &mut SimRng, max_atoms: usize, den: i64) -> DiscreteDistribution<Rational> {
    let n = r.gen_range(1..=max_atoms);
    let atoms = (0..n)
        .map(|_| {
            let v = Point::new(q(r.gen_range(0..=den), den), q(r.gen_range(0..=den), den));
            (v, q(r.gen_range(1..=30), 1))
        })
        .collect();
    DiscreteDistribution::from_weights(atoms).unwrap()
}

fn random_staircase(r: &mut SimRng, den: i64) -> Mechanism<Rational> {
    let n = r.gen_range(0..=6);
    let corners: Vec<_> =
        (0..n).map(|_| Point::new(q(r.gen_range(0..=den), den), q(r.gen_range(0..=den), den))).collect();
    Mechanism::from_corners(&corners)
}

fn solver_oracle() -> Outcome {
    let mut o = Outcome::new("1", "solver equals exhaustive search on 200 rational laws");
    let mut r = rng(101);
    let start = Instant::now();
    let mut mismatches = 0;
    for _ in 0..200 {
        let d = random_rational_dist(&mut r, 8, 10);
        if best_mechanism(&d).revenue != brute_force_best(&d).unwrap().revenue {
            mismatches += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    o.check(mismatches == 0, format!("{mismatches} mismatches"));
    o.check(secs < 10.0, format!("took {secs:.2} s"));
    o.detail = format!("0 of 200 differ required, {mismatches} found; {secs:.2} s");
    o
}

fn decomposition() -> Outcome {
    let mut o = Outcome::new("2", "revenue equals the edge-weight sum on 500 pairs");
    let mut r = rng(202);
    let mut bad = 0;
    for _ in 0..500 {
        // Coarse coordinates so atoms often sit on the path.
        let m = random_staircase(&mut r, 6);
        let d = random_rational_dist(&mut r, 8, 6);
        if expected_revenue(&m, &d) != decomposed_revenue(&m, &d) {
            bad += 1;
        }
    }
    o.check(bad == 0, format!("{bad} pairs differ"));
    o.detail = format!("{bad} of 500 pairs differ");
    o
}

fn equal_revenue_gap() -> Outcome {
    let mut o = Outcome::new("3", "equal-revenue gap, delta = 1e-4");
    let delta = q(1, 10_000);
    let mut parts = Vec::new();
    for n in [3u32, 5, 8] {
        let d = equal_revenue_dist(n, &delta).unwrap();
        let best = best_mechanism(&d);
        let bound = q(i64::from(n) + 1, 1i64 << (n + 1));
        o.check(best.revenue >= bound, format!("n={n}: OPT {} below (n+1)2^-(n+1)", best.revenue));
        // The first buyer's values are of order delta and are set aside, as in
        // the construction; compare the second buyer's payments.
        let posted = best_posted_price(&d);
        let posted_second = expected_payments(&posted.mechanism, &d).1;
        let opt_second = expected_payments(&best.mechanism, &d).1;
        let target = 1.0 / f64::from(1u32 << n);
        let gap = (Scalar::to_f64(&posted_second) - target).abs();
        o.check(gap <= 1e-12, format!("n={n}: posted second-buyer revenue off by {gap:e}"));
        let ratio = Scalar::to_f64(&(opt_second.clone() / posted_second.clone()));
        o.check(opt_second >= posted_second.clone() * q(i64::from(n) + 1, 2), format!("n={n}: ratio {ratio}"));
        parts.push(format!("n={n} OPT={:.6e} ratio={ratio:.4}", Scalar::to_f64(&best.revenue)));
        o.note(format!(
            "n={n}: full posted revenue {:.9e} (2^-n = {target:.9e}), full ratio {:.6}",
            Scalar::to_f64(&posted.revenue),
            Scalar::to_f64(&(best.revenue.clone() / posted.revenue.clone()))
        ));
    }
    o.detail = parts.join("; ");
    o
}

fn augmentation_gap() -> Outcome {
    let mut o = Outcome::new("4", "augmented approximation loses at most 2 eps (Monte Carlo)");
    let mut r = rng(404);
    let draws = 100_000;
    let mut worst: f64 = f64::NEG_INFINITY;
    for k in [4usize, 8] {
        let grid = UniformGrid::<f64>::new(k).unwrap();
        let eps = 1.0 / k as f64;
        for _ in 0..100 {
            let n = r.gen_range(1..=6);
            let corners: Vec<Valuation> = (0..n).map(|_| Point::xy(r.gen(), r.gen())).collect();
            let target = Mechanism::from_corners(&corners);
            let approx = associated_augmented_mechanism(&target, &grid).mechanism;
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..draws {
                let v = Point::xy(r.gen(), r.gen());
                let d = target.revenue(&v) - approx.revenue(&v);
                s += d;
                s2 += d * d;
            }
            let n = draws as f64;
            let mean = s / n;
            let se = ((s2 / n - mean * mean).max(0.0) / (n - 1.0)).sqrt();
            worst = worst.max(mean - 2.0 * eps - 3.0 * se);
            o.check(mean <= 2.0 * eps + 3.0 * se, format!("eps={eps}: gap {mean:.4} (se {se:.4})"));
        }
    }
    o.detail = format!("max over 200 targets of gap - 2 eps - 3 se = {worst:.4} (must be <= 0)");
    o
}

fn sampler_exactness() -> Outcome {
    let mut o = Outcome::new("5", "edge sampler reproduces explicit Hedge, eps = 1/3");
    let mut r = rng(505);
    let (k, eta) = (3, 0.5);
    let history: Vec<Valuation> = (0..50).map(|_| Point::xy(r.gen(), r.gen())).collect();
    let mut h = PathHedge::new(k, eta).unwrap();
    for v in &history {
        h.update(v);
    }
    let explicit = explicit_hedge(k, eta, &history).unwrap();
    o.check(explicit.len() == 20, format!("{} paths", explicit.len()));
    let sup = explicit.iter().map(|(m, p)| (h.path_probability(m) - p).abs()).fold(0.0, f64::max);
    o.check(sup <= 1e-10, format!("sup-norm {sup:e}"));
    let index: HashMap<Vec<bool>, usize> = lattice_paths(k).into_iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut counts = vec![0usize; index.len()];
    let draws = 1_000_000;
    for _ in 0..draws {
        counts[index[&h.sample_moves(&mut r)]] += 1;
    }
    let tv = 0.5
        * explicit
            .iter()
            .map(|(m, p)| (counts[index[m]] as f64 / draws as f64 - p).abs())
            .sum::<f64>();
    o.check(tv <= 0.005, format!("TV {tv:.5}"));
    let top = explicit.iter().map(|e| e.1).fold(0.0, f64::max);
    o.detail = format!("sup-norm {sup:.2e} (<= 1e-10), TV {tv:.5} (<= 0.005) over 1e6 draws; largest path mass {top:.3}");
    o
}

fn smooth_family() -> Outcome {
    let mut o = Outcome::new("6", "two-square mixture revenues (Monte Carlo, 1e6 draws)");
    let mut r = rng(606);
    let (low, high) = (low_mechanism(), high_mechanism());
    let mut parts = Vec::new();
    for alpha in [4.0 / 15.0 + 0.01, 1.0 / 3.0, 2.0 / 5.0 - 0.01] {
        let (mut s1, mut s2) = (0.0, 0.0);
        let draws = 1_000_000;
        for _ in 0..draws {
            let v = sample_mixture(alpha, &mut r);
            s1 += low.revenue(&v);
            s2 += high.revenue(&v);
        }
        let (m1, m2) = (s1 / draws as f64, s2 / draws as f64);
        let e2 = 1.5 * (1.0 - alpha);
        o.check((m1 - 1.0).abs() <= 0.005, format!("alpha={alpha:.4}: low price mean {m1:.5}"));
        o.check((m2 - e2).abs() <= 0.005, format!("alpha={alpha:.4}: high price mean {m2:.5} vs {e2:.5}"));
        parts.push(format!("alpha={alpha:.4}: {m1:.4}/1, {m2:.4}/{e2:.4}"));
    }
    o.detail = parts.join("; ");
    o
}

const ADVERSARIAL_PARAMS: [(i64, i64, i64, i64); 6] =
    [(3, 10, 1, 10), (3, 10, 1, 4), (3, 10, 1, 2), (1, 10, 1, 10), (1, 10, 1, 4), (1, 10, 1, 2)];
const TRACES: usize = 10_000;
const TRACE_LEN: usize = 500;
const CAP_GRIDS: usize = 64;

/// `floor(k x)` for `x = delta * n / scale`, using the float unless it lies
/// too close to an integer to trust.
fn grid_floor(k: usize, approx: f64, n: &num_bigint::BigInt, scale: &num_bigint::BigInt, delta: &Rational) -> i64 {
    let kx = k as f64 * approx;
    if (kx - kx.round()).abs() > 1e-9 {
        return kx.floor() as i64;
    }
    let exact = delta * Rational::new(n.clone(), scale.clone()) * q(k as i64, 1);
    Scalar::to_f64(&exact.floor()) as i64
}

fn adversarial() -> Vec<Outcome> {
    let mut structure = Outcome::new("7a", "adversarial traces: bounds, separation, closed forms, monotonicity");
    let mut surplus = Outcome::new("7b", "threshold mechanism extracts v1 + v2 every round");
    let mut cap = Outcome::new("7c", "grid learners earn at most delta + zeta per round in expectation");
    let mut r = rng(707);
    let (mut broken, mut full_rounds, mut rounds) = (0usize, 0usize, 0usize);
    let mut cap_violations: HashMap<(usize, usize), usize> = HashMap::new();
    let mut worst_excess = vec![Rational::from_integer(0.into()); ADVERSARIAL_PARAMS.len()];
    let mut revenue_means = Vec::new();
    for (pi, &(dn, dd, zn, zd)) in ADVERSARIAL_PARAMS.iter().enumerate() {
        let (delta, zeta) = (q(dn, dd), q(zn, zd));
        let cap_value = delta.clone() + zeta.clone();
        let zeta_f = Scalar::to_f64(&zeta);
        let mut memo: HashMap<(usize, i64, i64), Rational> = HashMap::new();
        let traces = TRACES / ADVERSARIAL_PARAMS.len() + usize::from(pi < TRACES % ADVERSARIAL_PARAMS.len());
        let mut revenue_total = 0.0;
        for _ in 0..traces {
            let tr = AdversarialTrace::generate(delta.clone(), zeta.clone(), TRACE_LEN, &mut r).unwrap();
            let tau = separating_threshold(&tr);
            if !(tr.within_bounds() && tr.closed_form_matches() && tr.is_monotone() && tau.is_ok()) {
                broken += 1;
                continue;
            }
            let mech = threshold_mechanism(&tau.unwrap(), &zeta);
            for (s, (rb, la)) in tr.states().zip(tr.branches()) {
                let v = tr.valuation(&s);
                rounds += 1;
                // Prices never exceed values, so revenue is v1 + v2 exactly
                // when both prices equal the values.
                if mech.allocates(&v) {
                    let (p1, p2) = mech.payments(&v);
                    if p1.compare(&v.x) == Ordering::Equal && p2.compare(&v.y) == Ordering::Equal {
                        full_rounds += 1;
                    }
                    revenue_total += Scalar::to_f64(&p1) + Scalar::to_f64(&p2);
                }
                // Grid mechanisms price by tile, so the two possible
                // valuations may be replaced by their lower-left tile corners.
                for k in 1..=CAP_GRIDS {
                    let ib = grid_floor(k, rb.x, &s.b, &s.scale, &delta);
                    let ia = grid_floor(k, la.x, &s.a, &s.scale, &delta);
                    let best = memo.entry((k, ia, ib)).or_insert_with(|| {
                        let iz = (zeta.clone() * q(k as i64, 1)).floor();
                        let law = DiscreteDistribution::from_weights(vec![
                            (Point::new(q(ib, k as i64), q(1, 1)), zeta.clone()),
                            (Point::new(q(ia, k as i64), iz / q(k as i64, 1)), q(1, 1) - zeta.clone()),
                        ])
                        .unwrap();
                        best_grid_path(k, &law).revenue
                    });
                    if *best > cap_value {
                        *cap_violations.entry((pi, k)).or_default() += 1;
                        let excess = best.clone() - cap_value.clone();
                        if excess > worst_excess[pi] {
                            worst_excess[pi] = excess;
                        }
                    }
                }
            }
        }
        let mean = revenue_total / (traces * TRACE_LEN) as f64;
        revenue_means.push(format!("delta={dn}/{dd} zeta={zn}/{zd}: mean {mean:.4}, zeta(2-zeta) = {:.4}", zeta_f * (2.0 - zeta_f)));
    }
    structure.check(broken == 0, format!("{broken} traces broke a structural property"));
    structure.detail = format!("{broken} of {TRACES} traces (T = {TRACE_LEN}) broke a property");

    surplus.check(full_rounds == rounds, format!("full surplus on {full_rounds} of {rounds} rounds"));
    surplus.detail = format!("full surplus extracted on {full_rounds} of {rounds} rounds");
    surplus.note("per-round threshold-mechanism revenue versus the guaranteed zeta(2 - zeta):");
    for m in revenue_means {
        surplus.note(m);
    }

    let total: usize = cap_violations.values().sum();
    cap.check(total == 0, format!("{total} (round, grid) pairs above delta + zeta"));
    cap.detail = format!("{total} of {} (round, grid 1/k for k <= {CAP_GRIDS}) pairs exceed delta + zeta", rounds * CAP_GRIDS);
    for (pi, &(dn, dd, zn, zd)) in ADVERSARIAL_PARAMS.iter().enumerate() {
        let mut grids: Vec<usize> = cap_violations.keys().filter(|key| key.0 == pi).map(|key| key.1).collect();
        grids.sort_unstable();
        let Some(&coarsest) = grids.first() else {
            cap.note(format!("delta={dn}/{dd} zeta={zn}/{zd}: no violation"));
            continue;
        };
        let count: usize = grids.iter().map(|&k| cap_violations[&(pi, k)]).sum();
        cap.note(format!(
            "delta={dn}/{dd} zeta={zn}/{zd}: {count} violations on {} grids, coarsest k={coarsest}, worst excess {:.4}",
            grids.len(),
            Scalar::to_f64(&worst_excess[pi])
        ));
    }
    let coarse: usize = cap_violations.iter().filter(|(key, _)| key.1 <= 8).map(|(_, n)| n).sum();
    cap.note(format!("grids with k <= 8, the path learner's grid at T = {TRACE_LEN}: {coarse} violations"));
    vec![structure, surplus, cap]
}

fn experiment(environment: EnvironmentSpec, learner: LearnerSpec, seeds: usize, constants: Constants) -> ExperimentConfig {
    ExperimentConfig {
        environment,
        learner,
        horizon: 1,
        seeds: (1..=seeds as u64).collect(),
        outputs: Outputs::default(),
        constants,
    }
}

/// Seed-averaged pseudo-regret at each horizon and the fitted exponent.
fn regret_exponent(cfg: &ExperimentConfig, horizons: &[usize]) -> (Vec<(usize, f64)>, Option<SlopeFit>) {
    let points: Vec<(usize, f64)> = horizons
        .iter()
        .map(|&t| {
            let eps = run_seeds(&cfg.with_horizon(t)).unwrap();
            let report = regret_report(&eps).unwrap();
            (t, report.pseudo_regret.expect("optimum is known"))
        })
        .collect();
    let fit = slope_estimate(&points.iter().map(|&(t, g)| (t as f64, g)).collect::<Vec<_>>()).ok();
    (points, fit)
}

fn describe(points: &[(usize, f64)], fit: Option<SlopeFit>) -> String {
    let pts: Vec<String> = points.iter().map(|(t, g)| format!("T={t}: {g:.1}")).collect();
    match fit {
        Some(f) => format!("exponent {:.4} +- {:.4} [{}]", f.exponent, f.std_error, pts.join(", ")),
        None => format!("exponent unavailable [{}]", pts.join(", ")),
    }
}

fn mixture() -> EnvironmentSpec {
    EnvironmentSpec::SmoothMixture { alpha: 1.0 / 3.0 }
}

fn path_learning_rate() -> Outcome {
    let mut o = Outcome::new("8a", "path learner regret exponent on the mixture <= 0.72");
    let horizons = [1_000, 10_000, 100_000];
    let tuned = Constants { hedge_rate: HedgeRate::Tuned, ..Constants::default() };
    let cfg = experiment(mixture(), LearnerSpec::PathLearning, 20, tuned);
    let (points, fit) = regret_exponent(&cfg, &horizons);
    let exponent = fit.map_or(f64::INFINITY, |f| f.exponent);
    o.check(exponent <= 0.72, format!("exponent {exponent:.4}"));
    o.detail = format!("20 seeds, rate sqrt(ln N / T) / 2: {}", describe(&points, fit));
    let literal = experiment(mixture(), LearnerSpec::PathLearning, 5, Constants::default());
    let (points, fit) = regret_exponent(&literal, &horizons);
    o.note(format!("information, 5 seeds, rate T^-1/2: {}", describe(&points, fit)));
    o
}

fn atbm_rate() -> Outcome {
    let mut o = Outcome::new("8b", "adaptive learner regret exponent <= 0.85 and < 0.95");
    let horizons = [1_000, 10_000, 30_000];
    let equal_revenue = EnvironmentSpec::EqualRevenue { n: 5, delta: Number::Text("1/10000".into()) };
    let cases = [
        ("equal revenue n=5", equal_revenue, None),
        // Re-solving a support of 3e4 points every round is prohibitive;
        // the empirical optimum is refreshed whenever the history doubles.
        ("mixture alpha=1/3", mixture(), Some(2.0)),
    ];
    let mut parts = Vec::new();
    for (name, env, ratio) in cases {
        for constant in [14.0, 1.0] {
            let constants = Constants { atbm_constant: constant, atbm_resolve_ratio: ratio, ..Constants::default() };
            let cfg = experiment(env.clone(), LearnerSpec::Atbm, 10, constants);
            let (points, fit) = regret_exponent(&cfg, &horizons);
            let line = format!("{name}, constant {constant}: {}", describe(&points, fit));
            if constant == 14.0 {
                let exponent = fit.map_or(f64::INFINITY, |f| f.exponent);
                o.check(exponent <= 0.85 && exponent < 0.95, format!("{name}: exponent {exponent:.3}"));
                parts.push(format!("{name} {exponent:.3}"));
                o.note(line);
            } else {
                o.note(format!("information, {line}"));
            }
        }
    }
    o.detail = format!("10 seeds, default constant 14: {}", parts.join(", "));
    o
}

fn shatter() -> Outcome {
    let mut o = Outcome::new("9", "diagonal of the 1/6 grid is shattered");
    let k = 6;
    let diag = diagonal_points(k);
    let mut bad = 0;
    for mask in 0u32..1 << k {
        let chosen: Vec<usize> = (1..=k).filter(|i| mask >> (i - 1) & 1 == 1).collect();
        let m = shatter_path(k, &chosen).unwrap();
        for (i, v) in diag.iter().enumerate() {
            let want = if chosen.contains(&(i + 1)) { q(1, 1) } else { q(0, 1) };
            if m.revenue(v) != want {
                bad += 1;
            }
        }
    }
    o.check(bad == 0, format!("{bad} wrong revenues"));
    o.detail = format!("64 subsets, {bad} wrong revenues");
    o
}

fn virtual_surplus() -> Outcome {
    let mut o = Outcome::new("10", "virtual surplus of always allocating on [1/2, 3/4]^2 is 1");
    let v = rectangle_virtual_revenue(&UniformRect::square(LOW_SQUARE), &Mechanism::full_square());
    o.check((v - 1.0).abs() <= 1e-6, format!("value {v}"));
    o.detail = format!("value {v:.9}");
    o
}

type Criterion = (&'static [&'static str], fn() -> Vec<Outcome>);

fn main() -> ExitCode {
    let only: Option<Vec<String>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').map(|t| t.trim().to_string()).collect());
    let selected = |ids: &[&str]| {
        only.as_ref().map_or(true, |o| ids.iter().any(|id| o.iter().any(|w| w == id || id.starts_with(w.as_str()))))
    };
    let criteria: Vec<Criterion> = vec![
        (&["1"], || vec![solver_oracle()]),
        (&["2"], || vec![decomposition()]),
        (&["3"], || vec![equal_revenue_gap()]),
        (&["4"], || vec![augmentation_gap()]),
        (&["5"], || vec![sampler_exactness()]),
        (&["6"], || vec![smooth_family()]),
        (&["7a", "7b", "7c"], adversarial),
        (&["8a"], || vec![path_learning_rate()]),
        (&["8b"], || vec![atbm_rate()]),
        (&["9"], || vec![shatter()]),
        (&["10"], || vec![virtual_surplus()]),
    ];
    let mut unexpected = Vec::new();
    let (mut passed, mut failed) = (0, 0);
    for (ids, run) in criteria {
        if !selected(ids) {
            continue;
        }
        let start = Instant::now();
        let outcomes = run();
        let secs = start.elapsed().as_secs_f64();
        for o in outcomes {
            let gap = KNOWN_GAPS.iter().find(|g| g.0 == o.id);
            println!("{} [{}] {}: {} ({secs:.1} s)", if o.pass { "PASS" } else { "FAIL" }, o.id, o.title, o.detail);
            for n in &o.notes {
                println!("    {n}");
            }
            match (o.pass, gap) {
                (true, None) => passed += 1,
                (false, Some((_, why))) => {
                    failed += 1;
                    println!("    known gap: {why}");
                }
                (false, None) => {
                    failed += 1;
                    unexpected.push(format!("{} failed", o.id));
                }
                (true, Some(_)) => {
                    passed += 1;
                    unexpected.push(format!("{} passed although listed as a known gap", o.id));
                }
            }
        }
    }
    println!("acceptance: {passed} passed, {failed} failed");
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected: {}", unexpected.join("; "));
        ExitCode::FAILURE
    }
}
