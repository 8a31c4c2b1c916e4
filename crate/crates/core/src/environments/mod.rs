//! Valuation processes: fixed distributions, smooth densities, phase
//! sequences of smooth densities, and the adaptive two-sequence adversary.

pub mod adversarial;
mod shatter;
pub mod smooth;

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Valuation};
use crate::learners::SimRng;
use crate::mechanism::Mechanism;
use crate::scalar::{parse_rational, Rational, Scalar};
use crate::solver::{best_revenue, expected_revenue, DiscreteDistribution};

pub use adversarial::{separating_threshold, threshold_mechanism, AdversarialTrace, Coin, RoundState};
pub use shatter::{diagonal_points, shatter_path};
pub use smooth::{
    domination_check, mixture_revenue, rectangle_virtual_revenue, smooth_family_revenues, uniform_rect_revenue,
    Domination, UniformRect,
};

/// A number written either as a float or as an exact string such as `"1/6"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            // Shortest decimal form, so 0.3 reads as 3/10.
            Number::Float(f) if f.is_finite() => parse_rational(&f.to_string()),
            Number::Float(f) => Err(Error::Parse(format!("not a finite number: {f}"))),
            Number::Text(s) => parse_rational(s),
        }
    }

    pub fn to_f64(&self) -> Result<f64> {
        Ok(Scalar::to_f64(&self.to_rational()?))
    }
}

impl From<f64> for Number {
    fn from(f: f64) -> Self {
        Number::Float(f)
    }
}

/// Marginal law of one buyer's value on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CdfSpec {
    Uniform,
    /// `F(x) = x^exponent`.
    Power { exponent: f64 },
    /// Linear interpolation through `(x, F(x))` knots starting at `x = 0` and
    /// ending at `(1, 1)`.
    PiecewiseLinear { points: Vec<[f64; 2]> },
}

const INVERSION_TOL: f64 = 1e-12;

impl CdfSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            CdfSpec::Uniform => Ok(()),
            CdfSpec::Power { exponent } => {
                if *exponent > 0.0 && exponent.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidDistribution(format!("power exponent {exponent} must be positive")))
                }
            }
            CdfSpec::PiecewiseLinear { points } => {
                let bad = |m: &str| Err(Error::InvalidDistribution(format!("piecewise-linear cdf: {m}")));
                if points.len() < 2 {
                    return bad("needs at least two knots");
                }
                if points[0][0] != 0.0 || points[points.len() - 1] != [1.0, 1.0] {
                    return bad("knots must start at x = 0 and end at (1, 1)");
                }
                for w in points.windows(2) {
                    if !(w[0][0] < w[1][0]) || !(w[0][1] <= w[1][1]) {
                        return bad("x must increase and F must not decrease");
                    }
                }
                if !(points[0][1] >= 0.0) {
                    return bad("F must be nonnegative");
                }
                Ok(())
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match self {
            CdfSpec::Uniform => x,
            CdfSpec::Power { exponent } => x.powf(*exponent),
            CdfSpec::PiecewiseLinear { points } => {
                let i = points.partition_point(|p| p[0] <= x);
                if i >= points.len() {
                    return 1.0;
                }
                let (a, b) = (points[i - 1], points[i]);
                a[1] + (b[1] - a[1]) * (x - a[0]) / (b[0] - a[0])
            }
        }
    }

    /// Smallest `x` with `F(x) >= u`.
    pub fn inverse(&self, u: f64) -> f64 {
        match self {
            CdfSpec::Uniform => u,
            CdfSpec::Power { exponent } => u.powf(1.0 / exponent),
            CdfSpec::PiecewiseLinear { .. } => {
                if self.cdf(0.0) >= u {
                    return 0.0;
                }
                let (mut lo, mut hi) = (0.0, 1.0);
                while hi - lo > INVERSION_TOL {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) >= u {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            }
        }
    }

    /// Supremum of the density, `None` when unbounded or with an atom.
    pub fn sup_density(&self) -> Option<f64> {
        match self {
            CdfSpec::Uniform => Some(1.0),
            CdfSpec::Power { exponent } => (*exponent >= 1.0).then_some(*exponent),
            CdfSpec::PiecewiseLinear { points } => {
                if points[0][1] > 0.0 {
                    return None;
                }
                points
                    .windows(2)
                    .map(|w| (w[1][1] - w[0][1]) / (w[1][0] - w[0][0]))
                    .fold(Some(0.0), |acc, s| acc.map(|a: f64| a.max(s)))
            }
        }
    }
}

/// Declarative description of a valuation process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvironmentSpec {
    /// Finitely many atoms `[v1, v2, probability]`.
    Discrete { atoms: Vec<[Number; 3]> },
    /// The segment-supported instance on which every posted price earns `2^-n`.
    EqualRevenue { n: u32, delta: Number },
    /// Independent buyers with the given marginals.
    ProductCdf { first: CdfSpec, second: CdfSpec },
    /// Uniform on the unit square.
    Uniform,
    /// Two-square mixture with weight `alpha` on the lower square.
    SmoothMixture { alpha: f64 },
    /// Smooth phases, each lasting `phase_length` rounds; after the last phase
    /// either start over or stay in the last one.
    SmoothSequence {
        phases: Vec<EnvironmentSpec>,
        phase_length: usize,
        #[serde(default)]
        cycling: bool,
    },
    /// The adaptive two-sequence adversary.
    Adversarial { delta: Number, zeta: Number },
}

impl EnvironmentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let env_spec: EnvironmentSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        env_spec.validate()?;
        Ok(env_spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EnvironmentSpec::Discrete { .. } | EnvironmentSpec::EqualRevenue { .. } => {
                self.exact_distribution()?;
                Ok(())
            }
            EnvironmentSpec::ProductCdf { first, second } => {
                first.validate()?;
                second.validate()
            }
            EnvironmentSpec::Uniform => Ok(()),
            EnvironmentSpec::SmoothMixture { alpha } => smooth::check_alpha(*alpha),
            EnvironmentSpec::SmoothSequence { phases, phase_length, .. } => {
                if phases.is_empty() || *phase_length == 0 {
                    return Err(Error::Config("smooth sequence needs phases of positive length".into()));
                }
                for p in phases {
                    p.validate()?;
                    smoothness_bound(p)?;
                }
                Ok(())
            }
            EnvironmentSpec::Adversarial { delta, zeta } => {
                AdversarialTrace::from_coins(delta.to_rational()?, zeta.to_rational()?, Vec::new()).map(|_| ())
            }
        }
    }

    /// The exact law of a finite-support variant.
    pub fn exact_distribution(&self) -> Result<DiscreteDistribution<Rational>> {
        match self {
            EnvironmentSpec::Discrete { atoms } => {
                let atoms = atoms
                    .iter()
                    .map(|[x, y, p]| {
                        let v = Point::in_square(x.to_rational()?, y.to_rational()?)?;
                        Ok((v, p.to_rational()?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                DiscreteDistribution::new(atoms)
            }
            EnvironmentSpec::EqualRevenue { n, delta } => equal_revenue_dist(*n, &delta.to_rational()?),
            _ => Err(Error::Config("environment has no finite support".into())),
        }
    }
}

/// Atoms `(delta (1 - 2^-i), 2^-i)` for `i = 1..=n`, with mass `2^(1-n)` on the
/// first and `2^(i-n-1)` on the others.
pub fn equal_revenue_dist<S: Scalar>(n: u32, delta: &S) -> Result<DiscreteDistribution<S>> {
    if n == 0 || n > 60 {
        return Err(Error::Config(format!("equal-revenue size {n} outside 1..=60")));
    }
    if !(*delta > S::zero() && *delta < S::one()) {
        return Err(Error::Config(format!("equal-revenue delta {delta} outside (0, 1)")));
    }
    let atoms = (1..=n)
        .map(|i| {
            let y = S::from_ratio(1, 1i64 << i);
            let x = delta.clone() * (S::one() - y.clone());
            let p = if i == 1 { S::from_ratio(2, 1i64 << n) } else { S::from_ratio(1i64 << (i - 1), 1i64 << n) };
            (Point::new(x, y), p)
        })
        .collect();
    DiscreteDistribution::new(atoms)
}

/// `sigma` such that the law's density is at most `1 / sigma`.
pub fn smoothness_bound(env_spec: &EnvironmentSpec) -> Result<f64> {
    match env_spec {
        EnvironmentSpec::Uniform => Ok(1.0),
        EnvironmentSpec::SmoothMixture { alpha } => {
            smooth::check_alpha(*alpha)?;
            Ok(1.0 / (16.0 * alpha.max(1.0 - alpha)))
        }
        EnvironmentSpec::ProductCdf { first, second } => {
            first.validate()?;
            second.validate()?;
            match (first.sup_density(), second.sup_density()) {
                (Some(a), Some(b)) if a * b > 0.0 => Ok(1.0 / (a * b)),
                _ => Err(Error::NotSmooth),
            }
        }
        EnvironmentSpec::SmoothSequence { phases, .. } => {
            phases.iter().map(smoothness_bound).try_fold(f64::INFINITY, |acc, s| s.map(|s| acc.min(s)))
        }
        EnvironmentSpec::Discrete { .. } | EnvironmentSpec::EqualRevenue { .. } | EnvironmentSpec::Adversarial { .. } => {
            Err(Error::NotSmooth)
        }
    }
}

/// Expected revenue of `mech` when the buyers are independent with the given
/// continuous marginal cdfs.
pub fn product_revenue(mech: &Mechanism, first: &dyn Fn(f64) -> f64, second: &dyn Fn(f64) -> f64) -> f64 {
    let nodes = mech.nodes();
    let mut total = 0.0;
    // Buyer 2 pays lower_y(v1) on the band of v1 where it is constant.
    let mut i = 0;
    while i < nodes.len() {
        let x = nodes[i].x;
        let mut j = i;
        while j + 1 < nodes.len() && nodes[j + 1].x == x {
            j += 1;
        }
        let next = nodes.get(j + 1).map_or(1.0, |n| n.x);
        let hi = if j + 1 < nodes.len() { first(next) } else { 1.0 };
        let y = nodes[j].y;
        total += y * (1.0 - second(y)) * (hi - first(x));
        i = j + 1;
    }
    // Buyer 1 pays left_x(v2) on the band of v2 where it is constant.
    let mut i = 0;
    while i < nodes.len() {
        let y = nodes[i].y;
        let mut j = i;
        while j + 1 < nodes.len() && nodes[j + 1].y == y {
            j += 1;
        }
        let hi = if i == 0 { 1.0 } else { second(nodes[i - 1].y) };
        let x = nodes[i].x;
        total += x * (1.0 - first(x)) * (hi - second(y));
        i = j + 1;
    }
    total
}

/// Draws valuations for one episode.
#[derive(Clone)]
pub struct Environment {
    kind: Kind,
}

type Sampler = Arc<dyn Fn(usize, &mut SimRng) -> Valuation + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Discrete { dist: DiscreteDistribution, cumulative: Vec<f64>, optimum: f64 },
    Product { first: CdfSpec, second: CdfSpec },
    Mixture { alpha: f64 },
    Sequence { phases: Vec<Environment>, phase_length: usize, cycling: bool },
    Adversarial { trace: AdversarialTrace, branches: Vec<(Valuation, Valuation)>, zeta: f64 },
    Custom { name: String, sampler: Sampler },
}

impl fmt::Debug for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Environment {
    /// Builds the process for a `horizon`-round episode. Only the adversary
    /// draws from `rng` here.
    pub fn new(env_spec: &EnvironmentSpec, horizon: usize, rng: &mut SimRng) -> Result<Self> {
        env_spec.validate()?;
        let kind = match env_spec {
            EnvironmentSpec::Discrete { .. } | EnvironmentSpec::EqualRevenue { .. } => {
                let exact = env_spec.exact_distribution()?;
                let optimum = Scalar::to_f64(&best_revenue(&exact));
                let dist = DiscreteDistribution::new(
                    exact.atoms().iter().map(|(v, p)| (v.to_f64(), Scalar::to_f64(p))).collect(),
                )?;
                let mut acc = 0.0;
                let cumulative = dist
                    .atoms()
                    .iter()
                    .map(|(_, p)| {
                        acc += p;
                        acc
                    })
                    .collect();
                Kind::Discrete { dist, cumulative, optimum }
            }
            EnvironmentSpec::ProductCdf { first, second } => {
                Kind::Product { first: first.clone(), second: second.clone() }
            }
            EnvironmentSpec::Uniform => Kind::Product { first: CdfSpec::Uniform, second: CdfSpec::Uniform },
            EnvironmentSpec::SmoothMixture { alpha } => Kind::Mixture { alpha: *alpha },
            EnvironmentSpec::SmoothSequence { phases, phase_length, cycling } => Kind::Sequence {
                phases: phases.iter().map(|p| Environment::new(p, horizon, rng)).collect::<Result<_>>()?,
                phase_length: *phase_length,
                cycling: *cycling,
            },
            EnvironmentSpec::Adversarial { delta, zeta } => {
                let trace = AdversarialTrace::generate(delta.to_rational()?, zeta.to_rational()?, horizon, rng)?;
                let branches = trace.branches();
                Kind::Adversarial { zeta: Scalar::to_f64(&trace.zeta), trace, branches }
            }
        };
        Ok(Environment { kind })
    }

    pub fn custom(
        name: impl Into<String>,
        sampler: impl Fn(usize, &mut SimRng) -> Valuation + Send + Sync + 'static,
    ) -> Self {
        Environment { kind: Kind::Custom { name: name.into(), sampler: Arc::new(sampler) } }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            Kind::Discrete { dist, .. } => format!("discrete({} atoms)", dist.len()),
            Kind::Product { .. } => "product".into(),
            Kind::Mixture { alpha } => format!("smooth_mixture({alpha})"),
            Kind::Sequence { phases, .. } => format!("smooth_sequence({} phases)", phases.len()),
            Kind::Adversarial { trace, .. } => format!("adversarial({}, {})", trace.delta, trace.zeta),
            Kind::Custom { name, .. } => name.clone(),
        }
    }

    fn phase(&self, t: usize) -> Option<&Environment> {
        match &self.kind {
            Kind::Sequence { phases, phase_length, cycling } => {
                let idx = (t - 1) / phase_length;
                Some(if *cycling { &phases[idx % phases.len()] } else { &phases[idx.min(phases.len() - 1)] })
            }
            _ => None,
        }
    }

    /// Valuation for round `t` (1-based).
    pub fn sample(&self, t: usize, rng: &mut SimRng) -> Valuation {
        match &self.kind {
            Kind::Discrete { dist, cumulative, .. } => {
                let u: f64 = rng.gen();
                let i = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
                dist.atoms()[i].0.clone()
            }
            Kind::Product { first, second } => {
                Point::xy(first.inverse(rng.gen()), second.inverse(rng.gen()))
            }
            Kind::Mixture { alpha } => smooth::sample_mixture(*alpha, rng),
            Kind::Sequence { .. } => self.phase(t).unwrap().sample(t, rng),
            Kind::Adversarial { trace, branches, .. } => {
                let (r, l) = &branches[t - 1];
                if trace.coins[t - 1] == Coin::R {
                    r.clone()
                } else {
                    l.clone()
                }
            }
            Kind::Custom { sampler, .. } => sampler(t, rng),
        }
    }

    /// Expected revenue of `mech` in round `t` given the past, when known.
    pub fn expected_revenue(&self, t: usize, mech: &Mechanism) -> Option<f64> {
        match &self.kind {
            Kind::Discrete { dist, .. } => Some(expected_revenue(mech, dist)),
            Kind::Product { first, second } => {
                Some(product_revenue(mech, &|x| first.cdf(x), &|y| second.cdf(y)))
            }
            Kind::Mixture { alpha } => Some(mixture_revenue(*alpha, mech)),
            Kind::Sequence { .. } => self.phase(t).unwrap().expected_revenue(t, mech),
            Kind::Adversarial { branches, zeta, .. } => {
                let (r, l) = &branches[t - 1];
                Some(zeta * mech.revenue(r) + (1.0 - zeta) * mech.revenue(l))
            }
            Kind::Custom { .. } => None,
        }
    }

    /// Per-round revenue of the best fixed mechanism for an i.i.d. process,
    /// when it is known in closed form.
    pub fn optimal_revenue(&self) -> Option<f64> {
        match &self.kind {
            Kind::Discrete { optimum, .. } => Some(*optimum),
            Kind::Mixture { alpha } => Some(1.0f64.max(1.5 * (1.0 - alpha))),
            _ => None,
        }
    }

    pub fn trace(&self) -> Option<&AdversarialTrace> {
        match &self.kind {
            Kind::Adversarial { trace, .. } => Some(trace),
            _ => None,
        }
    }
}

/// Exact check that a finite distribution's masses sum to one.
pub fn total_mass(dist: &DiscreteDistribution<Rational>) -> bool {
    dist.atoms().iter().fold(Rational::zero(), |acc, (_, p)| acc + p) == Rational::one()
}
