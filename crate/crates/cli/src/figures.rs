//! Polyline data for the reconstructed figures. Each section starts with a
//! `# label` line; segments are runs of `x y` lines separated by blank lines.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use jointads::environments::{
    diagonal_points, equal_revenue_dist, shatter_path, smooth::{high_mechanism, low_mechanism, HIGH_SQUARE, LOW_SQUARE},
};
use jointads::grid::{associated_augmented_mechanism, augment, inner_hull, PredicateRegion, UniformGrid};
use jointads::solver::{best_mechanism, best_posted_price, DiscreteDistribution};
use jointads::{Mechanism, Point, Rational, Scalar};

pub const NAMES: [&str; 8] =
    ["product", "equal-revenue", "grid", "influence", "augment", "inner-hull", "smooth-family", "shatter"];

#[derive(Default)]
struct Figure {
    body: String,
    /// A segment has been written since the last header.
    open: bool,
}

impl Figure {
    fn section(&mut self, label: &str) {
        if !self.body.is_empty() {
            self.body.push('\n');
        }
        let _ = writeln!(self.body, "# {label}");
        self.open = false;
    }

    fn segment(&mut self, pts: &[(f64, f64)]) {
        if self.open {
            self.body.push('\n');
        }
        for (x, y) in pts {
            let _ = writeln!(self.body, "{x} {y}");
        }
        self.open = true;
    }

    fn mechanism(&mut self, m: &Mechanism) {
        let pts: Vec<_> = m.nodes().iter().map(|p| (p.x, p.y)).collect();
        self.segment(&pts);
    }

    fn points(&mut self, pts: &[(f64, f64)]) {
        for p in pts {
            self.segment(std::slice::from_ref(p));
        }
    }

    fn rect(&mut self, x0: f64, x1: f64, y0: f64, y1: f64) {
        self.segment(&[(x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0)]);
    }

    fn grid(&mut self, k: usize) {
        let grid = UniformGrid::<f64>::new(k).expect("k >= 1");
        let g = grid.graph();
        for &(a, b) in &g.edges {
            self.segment(&[(g.nodes[a].x, g.nodes[a].y), (g.nodes[b].x, g.nodes[b].y)]);
        }
    }
}

pub fn render(which: &str, cells: usize) -> Result<Vec<(String, String)>> {
    if cells == 0 {
        bail!("--cells must be positive");
    }
    let names: Vec<&str> = if which == "all" {
        NAMES.to_vec()
    } else if NAMES.contains(&which) {
        vec![which]
    } else {
        bail!("unknown figure {which}; expected one of {} or all", NAMES.join(", "));
    };
    names.into_iter().map(|n| Ok((n.to_string(), draw(n, cells)?))).collect()
}

fn draw(name: &str, k: usize) -> Result<String> {
    let mut f = Figure::default();
    let kf = k as f64;
    match name {
        "product" => {
            // Independent buyers with F(x) = x^2, discretized on a fine grid.
            let n = 60;
            let cdf = |x: f64| x * x;
            let mut atoms = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let (x0, x1) = (i as f64 / n as f64, (i + 1) as f64 / n as f64);
                    let (y0, y1) = (j as f64 / n as f64, (j + 1) as f64 / n as f64);
                    let p = (cdf(x1) - cdf(x0)) * (cdf(y1) - cdf(y0));
                    atoms.push((Point::xy(0.5 * (x0 + x1), 0.5 * (y0 + y1)), p));
                }
            }
            let best = best_mechanism(&DiscreteDistribution::from_weights(atoms)?);
            f.section(&format!("optimal boundary, F(x) = x^2 on a {n}x{n} discretization, revenue {:.4}", best.revenue));
            f.mechanism(&best.mechanism);
        }
        "equal-revenue" => {
            let delta = Rational::from_ratio(1, 6);
            let dist = equal_revenue_dist(3, &delta)?;
            f.section("support segment");
            f.segment(&[(0.0, 1.0), (1.0 / 6.0, 0.0)]);
            f.section("atoms");
            let pts: Vec<_> = dist.atoms().iter().map(|(v, _)| (Scalar::to_f64(&v.x), Scalar::to_f64(&v.y))).collect();
            f.points(&pts);
            f.section(&format!("grid 1/{k}"));
            f.grid(k);
            let best = best_mechanism(&dist);
            f.section(&format!("optimal mechanism, revenue {}", best.revenue));
            f.mechanism(&best.mechanism.to_f64());
            let posted = best_posted_price(&dist);
            f.section(&format!("best posted price, revenue {}", posted.revenue));
            f.mechanism(&posted.mechanism.to_f64());
        }
        "grid" => {
            f.section(&format!("lattice graph 1/{k}"));
            f.grid(k);
        }
        "influence" => {
            f.section(&format!("lattice graph 1/{k}"));
            f.grid(k);
            let (a, b) = ((k / 3).max(1) as f64 / kf, (2 * k / 3).max(1) as f64 / kf);
            let step = 1.0 / kf;
            f.section("vertical edge and its influence rectangle");
            f.segment(&[(a, b), (a, b - step)]);
            f.rect(a, 1.0, b - step, b);
            f.section("horizontal edge and its influence rectangle");
            f.segment(&[(b - step, a), (b, a)]);
            f.rect(b - step, b, a, 1.0);
        }
        "augment" => {
            let grid = UniformGrid::<f64>::new(2)?;
            let pts = [Point::xy(0.3, 0.8), Point::xy(0.75, 0.25), Point::xy(0.5, 0.3)];
            let aug = augment(&grid, &pts)?;
            f.section("augmented graph 1/2");
            for &(a, b) in &aug.graph.edges {
                let (p, q) = (&aug.graph.nodes[a], &aug.graph.nodes[b]);
                f.segment(&[(p.x, p.y), (q.x, q.y)]);
            }
            f.section("added points");
            f.points(&pts.iter().map(|p| (p.x, p.y)).collect::<Vec<_>>());
        }
        "inner-hull" => {
            let grid = UniformGrid::<f64>::new(k)?;
            let region = PredicateRegion { inside: |x: f64, y: f64| x * y >= 0.2 };
            f.section(&format!("grid 1/{k}"));
            f.grid(k);
            f.section("target boundary x y = 0.2");
            let curve: Vec<_> = (0..=100).map(|i| 0.2 + 0.8 * i as f64 / 100.0).map(|x| (x, 0.2 / x)).collect();
            f.segment(&curve);
            f.section("inner hull");
            f.mechanism(&inner_hull(&region, &grid));
            f.section("associated augmented mechanism");
            f.mechanism(&associated_augmented_mechanism(&region, &grid).mechanism);
        }
        "smooth-family" => {
            f.section("lower square");
            f.rect(LOW_SQUARE.lo, LOW_SQUARE.hi, LOW_SQUARE.lo, LOW_SQUARE.hi);
            f.section("upper square");
            f.rect(HIGH_SQUARE.lo, HIGH_SQUARE.hi, HIGH_SQUARE.lo, HIGH_SQUARE.hi);
            f.section("posted price (1/2, 1/2)");
            f.mechanism(&low_mechanism());
            f.section("posted price (3/4, 3/4)");
            f.mechanism(&high_mechanism());
        }
        "shatter" => {
            let chosen: Vec<usize> = (1..=k).filter(|i| i % 3 != 2).collect();
            let diag = diagonal_points(k);
            let to_f = |p: &Point<Rational>| (Scalar::to_f64(&p.x), Scalar::to_f64(&p.y));
            f.section(&format!("chosen diagonal points {chosen:?}"));
            f.points(&chosen.iter().map(|&i| to_f(&diag[i - 1])).collect::<Vec<_>>());
            f.section("other diagonal points");
            let rest: Vec<_> = (1..=k).filter(|i| !chosen.contains(i)).map(|i| to_f(&diag[i - 1])).collect();
            f.points(&rest);
            f.section("shattering path");
            f.mechanism(&shatter_path(k, &chosen)?.to_f64());
        }
        _ => bail!("unknown figure {name}"),
    }
    Ok(f.body)
}
