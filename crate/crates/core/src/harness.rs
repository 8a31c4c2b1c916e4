//! Learner-versus-environment episodes, regret accounting and slope fits.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::thread;

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::environments::{Environment, EnvironmentSpec};
use crate::error::{Error, Result};
use crate::geometry::{Point, Valuation};
use crate::learners::{
    cells_for_horizon, tuned_rate, Atbm, Fixed, Learner, PathHedge, PathLearning, ResolveSchedule, SimRng,
    DEFAULT_ATBM_CONSTANT,
};
use crate::mechanism::Mechanism;
use crate::solver::{best_mechanism, DiscreteDistribution};

/// Version tag written in the first line of every CSV file.
pub const CSV_VERSION: &str = "jointads-csv v1";

/// Largest realized support the hindsight benchmark will solve exactly.
pub const HINDSIGHT_SUPPORT_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerSpec {
    Atbm,
    PathLearning,
    PostedPrice { p1: f64, p2: f64 },
    /// A fixed staircase given by its corner points.
    Fixed { corners: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constants {
    pub atbm_constant: f64,
    /// Re-solve the empirical problem only when the history has grown by
    /// this factor; every round when absent.
    pub atbm_resolve_ratio: Option<f64>,
    pub hedge_eta: Option<f64>,
    /// Default learning rate of the path learner when `hedge_eta` is absent.
    pub hedge_rate: HedgeRate,
    /// Grid step for the path learner; rounded down to the next `1/k`.
    pub epsilon: Option<f64>,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            atbm_constant: DEFAULT_ATBM_CONSTANT,
            atbm_resolve_ratio: None,
            hedge_eta: None,
            hedge_rate: HedgeRate::Horizon,
            epsilon: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HedgeRate {
    /// `T^(-1/2)`.
    Horizon,
    /// `sqrt(ln N / T) / 2` with `N` the number of grid paths.
    Tuned,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub rounds_csv: Option<PathBuf>,
    pub report_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvironmentSpec,
    pub learner: LearnerSpec,
    pub horizon: usize,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub constants: Constants,
}

fn unit_override(name: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x > 0.0 && x <= 1.0) => Err(Error::Config(format!("{name} = {x} must lie in (0, 1]"))),
        _ => Ok(()),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        unit_override("hedge_eta", self.constants.hedge_eta)?;
        unit_override("epsilon", self.constants.epsilon)?;
        if !(self.constants.atbm_constant > 0.0 && self.constants.atbm_constant.is_finite()) {
            return Err(Error::Config("atbm_constant must be positive".into()));
        }
        if let Some(r) = self.constants.atbm_resolve_ratio {
            if !(r >= 1.0 && r.is_finite()) {
                return Err(Error::Config(format!("atbm_resolve_ratio = {r} must be at least 1")));
            }
        }
        match &self.learner {
            LearnerSpec::PostedPrice { p1, p2 } => {
                Point::in_square(*p1, *p2)?;
            }
            LearnerSpec::Fixed { corners } => {
                for c in corners {
                    Point::in_square(c[0], c[1])?;
                }
            }
            LearnerSpec::Atbm | LearnerSpec::PathLearning => {}
        }
        self.environment.validate()
    }

    pub fn with_horizon(&self, horizon: usize) -> Self {
        ExperimentConfig { horizon, ..self.clone() }
    }
}

pub fn build_learner(learner: &LearnerSpec, constants: &Constants, horizon: usize) -> Result<Box<dyn Learner>> {
    Ok(match learner {
        LearnerSpec::Atbm => {
            let schedule = match constants.atbm_resolve_ratio {
                Some(ratio) => ResolveSchedule::Geometric { ratio },
                None => ResolveSchedule::EveryRound,
            };
            Box::new(Atbm::new(horizon).with_constant(constants.atbm_constant).with_schedule(schedule))
        }
        LearnerSpec::PathLearning => {
            let k = match constants.epsilon {
                Some(eps) => (1.0 / eps - 1e-9).ceil().max(1.0) as usize,
                None => cells_for_horizon(horizon),
            };
            let eta = constants.hedge_eta.unwrap_or_else(|| match constants.hedge_rate {
                HedgeRate::Horizon => (horizon as f64).powf(-0.5),
                HedgeRate::Tuned => tuned_rate(k, horizon),
            });
            Box::new(PathLearning::new(PathHedge::new(k, eta)?))
        }
        LearnerSpec::PostedPrice { p1, p2 } => Box::new(Fixed::posted_price(*p1, *p2)),
        LearnerSpec::Fixed { corners } => {
            let pts: Vec<Valuation> = corners.iter().map(|c| Point::xy(c[0], c[1])).collect();
            Box::new(Fixed::new("fixed", Mechanism::from_corners(&pts)))
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub t: usize,
    /// Fingerprint of the posted mechanism.
    pub mechanism: u64,
    pub valuation: Valuation,
    pub revenue: f64,
    pub cumulative: f64,
    /// Expected revenue of the posted mechanism given the past, when known.
    pub expected: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Episode {
    pub seed: u64,
    pub records: Vec<RoundRecord>,
    /// Per-round optimum of a stationary environment, when known.
    pub optimal_rate: Option<f64>,
}

/// Independent generators for the environment and the learner.
pub fn episode_rngs(seed: u64) -> (SimRng, SimRng) {
    let mut env = SimRng::seed_from_u64(seed);
    env.set_stream(1);
    let mut learner = SimRng::seed_from_u64(seed);
    learner.set_stream(2);
    (env, learner)
}

/// Plays `learner` against `env` for `horizon` rounds. The learner sees each
/// valuation only after posting for that round.
pub fn play(
    learner: &mut dyn Learner,
    env: &Environment,
    horizon: usize,
    env_rng: &mut SimRng,
    learner_rng: &mut SimRng,
) -> Vec<RoundRecord> {
    let mut records = Vec::with_capacity(horizon);
    let mut cumulative = 0.0;
    for t in 1..=horizon {
        let mech = learner.post(t, learner_rng);
        let v = env.sample(t, env_rng);
        let revenue = mech.revenue(&v);
        cumulative += revenue;
        records.push(RoundRecord {
            t,
            mechanism: mech.fingerprint(),
            expected: env.expected_revenue(t, &mech),
            valuation: v.clone(),
            revenue,
            cumulative,
        });
        learner.observe(&v);
    }
    records
}

pub fn run_episode(config: &ExperimentConfig, seed: u64) -> Result<Episode> {
    config.validate()?;
    let (mut env_rng, mut learner_rng) = episode_rngs(seed);
    let env = Environment::new(&config.environment, config.horizon, &mut env_rng)?;
    let mut learner = build_learner(&config.learner, &config.constants, config.horizon)?;
    let records = play(learner.as_mut(), &env, config.horizon, &mut env_rng, &mut learner_rng);
    Ok(Episode { seed, records, optimal_rate: env.optimal_revenue() })
}

/// Runs every seed, spreading them over the available cores. Results come
/// back in seed order.
pub fn run_seeds(config: &ExperimentConfig) -> Result<Vec<Episode>> {
    config.validate()?;
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(config.seeds.len());
    if workers <= 1 {
        return config.seeds.iter().map(|&s| run_episode(config, s)).collect();
    }
    let chunk = config.seeds.len().div_ceil(workers);
    thread::scope(|scope| {
        let handles: Vec<_> = config
            .seeds
            .chunks(chunk)
            .map(|seeds| scope.spawn(move || seeds.iter().map(|&s| run_episode(config, s)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("episode thread panicked")).collect()
    })
}

/// Best fixed mechanism on the realized valuations and its total revenue,
/// or `None` when the realized support is too large to solve.
pub fn hindsight_opt(records: &[RoundRecord]) -> Result<Option<(Mechanism, f64)>> {
    if records.is_empty() {
        return Err(Error::Config("no rounds to benchmark".into()));
    }
    let vals: Vec<Valuation> = records.iter().map(|r| r.valuation.clone()).collect();
    let dist = DiscreteDistribution::empirical(&vals)?;
    if dist.len() > HINDSIGHT_SUPPORT_CAP {
        return Ok(None);
    }
    let best = best_mechanism(&dist).mechanism;
    let total = vals.iter().map(|v| best.revenue(v)).sum();
    Ok(Some((best, total)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedReport {
    pub seed: u64,
    pub learner_total: f64,
    pub hindsight_total: Option<f64>,
    pub hindsight_mechanism: Option<String>,
    /// Realized regret against the hindsight benchmark.
    pub regret: Option<f64>,
    /// `T * OPT - sum of expected per-round revenue`.
    pub pseudo_regret: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretReport {
    pub horizon: usize,
    pub learner_total: f64,
    pub hindsight_total: Option<f64>,
    pub regret: Option<f64>,
    pub pseudo_regret: Option<f64>,
    pub per_seed: Vec<SeedReport>,
}

fn mean(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Option<Vec<f64>> = xs.collect();
    v.filter(|v| !v.is_empty()).map(|v| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn seed_report(ep: &Episode) -> Result<SeedReport> {
    let learner_total = ep.records.last().map_or(0.0, |r| r.cumulative);
    let hindsight = hindsight_opt(&ep.records)?;
    let pseudo_regret = ep.optimal_rate.and_then(|opt| {
        let expected: Option<f64> = ep.records.iter().map(|r| r.expected).sum();
        expected.map(|e| opt * ep.records.len() as f64 - e)
    });
    Ok(SeedReport {
        seed: ep.seed,
        learner_total,
        hindsight_total: hindsight.as_ref().map(|h| h.1),
        hindsight_mechanism: hindsight.as_ref().map(|h| h.0.to_polyline().replace('\n', ";")),
        regret: hindsight.map(|h| h.1 - learner_total),
        pseudo_regret,
    })
}

/// Seed-averaged report.
pub fn regret_report(episodes: &[Episode]) -> Result<RegretReport> {
    if episodes.is_empty() {
        return Err(Error::Config("no episodes".into()));
    }
    let per_seed = episodes.iter().map(seed_report).collect::<Result<Vec<_>>>()?;
    Ok(RegretReport {
        horizon: episodes[0].records.len(),
        learner_total: mean(per_seed.iter().map(|s| Some(s.learner_total))).unwrap_or(0.0),
        hindsight_total: mean(per_seed.iter().map(|s| s.hindsight_total)),
        regret: mean(per_seed.iter().map(|s| s.regret)),
        pseudo_regret: mean(per_seed.iter().map(|s| s.pseudo_regret)),
        per_seed,
    })
}

impl RegretReport {
    /// Pseudo-regret when the environment's optimum is known, realized regret
    /// otherwise.
    pub fn headline_regret(&self) -> Option<f64> {
        self.pseudo_regret.or(self.regret)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub exponent: f64,
    pub intercept: f64,
    pub std_error: f64,
}

/// Least-squares fit of `log regret = intercept + exponent * log T`.
pub fn slope_estimate(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!("{} points, need at least 3", points.len())));
    }
    if let Some(&(t, r)) = points.iter().find(|(t, r)| !(*t > 0.0 && *r > 0.0)) {
        return Err(Error::DegenerateFit(format!("non-positive point ({t}, {r})")));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx < 1e-12 {
        return Err(Error::DegenerateFit("all horizons are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - exponent * x).powi(2)).sum();
    let std_error = if points.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    Ok(SlopeFit { exponent, intercept, std_error })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub reports: Vec<RegretReport>,
    pub fit: Result<SlopeFit>,
}

pub fn sweep(config: &ExperimentConfig, horizons: &[usize]) -> Result<SweepReport> {
    let reports = horizons
        .iter()
        .map(|&h| regret_report(&run_seeds(&config.with_horizon(h))?))
        .collect::<Result<Vec<_>>>()?;
    let points: Option<Vec<(f64, f64)>> =
        reports.iter().map(|r| r.headline_regret().map(|g| (r.horizon as f64, g))).collect();
    let fit = match points {
        Some(p) => slope_estimate(&p),
        None => Err(Error::DegenerateFit("regret unavailable at some horizon".into())),
    };
    Ok(SweepReport { reports, fit })
}

fn opt_cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn rounds_csv(episodes: &[Episode]) -> String {
    let mut out = format!("# {CSV_VERSION} rounds\nseed,t,mechanism,v1,v2,revenue,cumulative,expected\n");
    for ep in episodes {
        for r in &ep.records {
            let _ = writeln!(
                out,
                "{},{},{:016x},{},{},{},{},{}",
                ep.seed,
                r.t,
                r.mechanism,
                r.valuation.x,
                r.valuation.y,
                r.revenue,
                r.cumulative,
                opt_cell(r.expected)
            );
        }
    }
    out
}

pub fn report_csv(reports: &[RegretReport]) -> String {
    let mut out = format!(
        "# {CSV_VERSION} regret\nhorizon,seed,learner_total,hindsight_total,regret,pseudo_regret,hindsight_mechanism\n"
    );
    for rep in reports {
        for s in &rep.per_seed {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                rep.horizon,
                s.seed,
                s.learner_total,
                opt_cell(s.hindsight_total),
                opt_cell(s.regret),
                opt_cell(s.pseudo_regret),
                s.hindsight_mechanism.as_deref().unwrap_or("")
            );
        }
    }
    out
}
