mod figures;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use jointads::environments::{separating_threshold, AdversarialTrace, Coin, EnvironmentSpec};
use jointads::harness::{self, ExperimentConfig};
use jointads::scalar::{format_rational, parse_rational, Scalar};
use jointads::solver::{best_mechanism, brute_force_best, DiscreteDistribution};
use jointads::{Point, Rational};

#[derive(Parser)]
#[command(name = "jointads", version, about = "Optimal and learned mechanisms for a shared ad slot")]
struct Cli {
    /// Overrides the seeds of a config with this single seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory receiving every output file.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal mechanism for a finite distribution, given either as `v1 v2 prob`
    /// lines or as a TOML environment.
    Solve {
        input: PathBuf,
        /// Cross-check the value by exhaustive search (small supports only).
        #[arg(long)]
        oracle: bool,
    },
    /// Run a config and write per-round and per-seed CSV files.
    Simulate { config: PathBuf },
    /// Run a config at several horizons and fit the regret exponent.
    Sweep {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        horizons: Vec<usize>,
    },
    /// Dump one realization of the adversarial instance.
    LbAdversarial {
        #[arg(long, default_value = "3/10")]
        delta: String,
        #[arg(long, default_value = "1/4")]
        zeta: String,
        #[arg(long, default_value_t = 1000)]
        horizon: usize,
    },
    /// Write polyline data for the reconstructed figures.
    Figures {
        /// One of the figure names, or `all`.
        #[arg(long, default_value = "all")]
        figure: String,
        /// Grid cells per side where a figure uses a grid.
        #[arg(long, default_value_t = 6)]
        cells: usize,
    },
}

/// Failures mapped to exit codes: bad input is 1, a broken invariant is 2.
enum Failure {
    Config(anyhow::Error),
    Invariant(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Config(e)
    }
}

impl From<jointads::Error> for Failure {
    fn from(e: jointads::Error) -> Self {
        match e {
            jointads::Error::SeparationViolated { .. } => Failure::Invariant(e.into()),
            other => Failure::Config(other.into()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Invariant(e)) => {
            eprintln!("invariant violated: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn write_out(dir: &Path, name: &Path, contents: &str) -> Result<PathBuf, Failure> {
    let path = if name.is_absolute() { name.to_path_buf() } else { dir.join(name) };
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn read(path: &Path) -> Result<String, Failure> {
    Ok(fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)
}

fn load_config(cli: &Cli, path: &Path) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::from_toml(&read(path)?)?;
    if let Some(seed) = cli.seed {
        cfg.seeds = vec![seed];
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Solve { input, oracle } => solve(cli, input, *oracle),
        Command::Simulate { config } => simulate(cli, config),
        Command::Sweep { config, horizons } => sweep(cli, config, horizons),
        Command::LbAdversarial { delta, zeta, horizon } => adversarial(cli, delta, zeta, *horizon),
        Command::Figures { figure, cells } => {
            for (name, body) in figures::render(figure, *cells)? {
                let path = write_out(&cli.out_dir, Path::new(&format!("fig-{name}.txt")), &body)?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

fn solve(cli: &Cli, input: &Path, oracle: bool) -> Result<(), Failure> {
    let text = read(input)?;
    let dist = match parse_records(&text) {
        Some(atoms) => DiscreteDistribution::new(atoms?)?,
        None => EnvironmentSpec::from_toml(&text)?.exact_distribution()?,
    };
    let best = best_mechanism(&dist);
    println!("revenue {} ({})", format_rational(&best.revenue), Scalar::to_f64(&best.revenue));
    println!("corners");
    for c in best.mechanism.corners() {
        println!("{} {}", format_rational(&c.x), format_rational(&c.y));
    }
    if oracle {
        let check = brute_force_best(&dist)?;
        if check.revenue != best.revenue {
            return Err(Failure::Invariant(anyhow!(
                "exhaustive search found {} but the solver returned {}",
                format_rational(&check.revenue),
                format_rational(&best.revenue)
            )));
        }
        println!("oracle agrees");
    }
    write_out(&cli.out_dir, Path::new("optimum.txt"), &best.mechanism.to_f64().to_polyline())?;
    Ok(())
}

/// Reads `v1 v2 prob` lines (`#` starts a comment). Returns `None` when the
/// text does not look like records at all, so it can be tried as TOML.
fn parse_records(text: &str) -> Option<jointads::Result<Vec<(Point<Rational>, Rational)>>> {
    let rows: Vec<Vec<&str>> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").split_whitespace().collect::<Vec<_>>())
        .filter(|r| !r.is_empty())
        .collect();
    if rows.is_empty() || rows.iter().any(|r| r.len() != 3 || r.iter().any(|t| t.contains('='))) {
        return None;
    }
    Some(
        rows.iter()
            .map(|r| Ok((Point::in_square(parse_rational(r[0])?, parse_rational(r[1])?)?, parse_rational(r[2])?)))
            .collect(),
    )
}

fn simulate(cli: &Cli, path: &Path) -> Result<(), Failure> {
    let cfg = load_config(cli, path)?;
    let episodes = harness::run_seeds(&cfg)?;
    let report = harness::regret_report(&episodes)?;
    let rounds = cfg.outputs.rounds_csv.clone().unwrap_or_else(|| "rounds.csv".into());
    let summary = cfg.outputs.report_csv.clone().unwrap_or_else(|| "report.csv".into());
    write_out(&cli.out_dir, &rounds, &harness::rounds_csv(&episodes))?;
    write_out(&cli.out_dir, &summary, &harness::report_csv(std::slice::from_ref(&report)))?;
    print_report(&report);
    Ok(())
}

fn print_report(r: &harness::RegretReport) {
    let show = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"));
    println!(
        "T={} seeds={} learner={:.4} hindsight={} regret={} pseudo_regret={}",
        r.horizon,
        r.per_seed.len(),
        r.learner_total,
        show(r.hindsight_total),
        show(r.regret),
        show(r.pseudo_regret)
    );
}

fn sweep(cli: &Cli, path: &Path, horizons: &[usize]) -> Result<(), Failure> {
    let cfg = load_config(cli, path)?;
    let out = harness::sweep(&cfg, horizons)?;
    for r in &out.reports {
        print_report(r);
    }
    write_out(&cli.out_dir, Path::new("sweep.csv"), &harness::report_csv(&out.reports))?;
    match out.fit {
        Ok(fit) => println!("exponent {:.4} +- {:.4}", fit.exponent, fit.std_error),
        Err(e) => println!("exponent unavailable: {e}"),
    }
    Ok(())
}

fn adversarial(cli: &Cli, delta: &str, zeta: &str, horizon: usize) -> Result<(), Failure> {
    let delta = parse_rational(delta)?;
    let zeta = parse_rational(zeta)?;
    let mut rng = harness::episode_rngs(cli.seed.unwrap_or(0)).0;
    let trace = AdversarialTrace::generate(delta, zeta, horizon, &mut rng)?;
    let tau = separating_threshold(&trace)?;
    let mut csv = format!("# {} adversarial\nt,coin,a,b,v1,v2\n", harness::CSV_VERSION);
    for (s, (r, l)) in trace.states().zip(trace.branches()) {
        let (coin, v) = if s.coin == Coin::R { ("R", r) } else { ("L", l) };
        let a = Scalar::to_f64(&s.a_value(&trace.delta));
        let b = Scalar::to_f64(&s.b_value(&trace.delta));
        csv.push_str(&format!("{},{coin},{a:e},{b:e},{:e},{}\n", s.t, v.x, v.y));
    }
    csv.push_str(&format!("# tau,{:e}\n", Scalar::to_f64(&tau)));
    let path = write_out(&cli.out_dir, Path::new("adversarial.csv"), &csv)?;
    println!("tau {:e}", Scalar::to_f64(&tau));
    println!("wrote {}", path.display());
    Ok(())
}
