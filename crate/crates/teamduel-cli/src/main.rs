use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use teamduel::detalg::{find_condorcet_additive, find_condorcet_general, CondorcetCertificate};
use teamduel::harness::{
    declared_duel_budget, load_instance, mix64, read_config, run_experiment, save_instance, trial_stream, verify_trial,
    write_csv, write_summary, Algorithm, ExperimentConfig, InstanceSource, TrialOutput,
};
use teamduel::model::{
    generate_instance, GeneratorSpec, Instance, Noise, OrderSpec, Player, PlayerSet, DEFAULT_COMPARISON_CAP,
};
use teamduel::oracle::{write_trace, AmplifiedOracle, DeterministicOracle, DuelOracle, StochasticOracle};
use teamduel::reduction::{identify_top_k, DEFAULT_SAMPLE_BUDGET};
use teamduel::witness::{deducible_by_witness, exact_expectations, find_witness, DEFAULT_CANDIDATE_CAP};

#[derive(Parser)]
#[command(name = "teamduel", version, about = "Duels between teams: instances, solvers and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderKind {
    Additive,
    Lexicographic,
    Explicit,
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    Additive,
    General,
}

#[derive(Subcommand)]
enum Command {
    /// Draw an instance and write it as JSON.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "additive")]
        order: OrderKind,
        /// Shuffle the ranking of a lexicographic order.
        #[arg(long)]
        shuffled: bool,
        /// `deterministic`, `uniform:P` or `logistic:BETA`.
        #[arg(long, default_value = "deterministic", value_parser = parse_noise)]
        noise: Noise,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find a Condorcet winning team.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "additive")]
        algo: Solver,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Confidence level for amplification on noisy instances.
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// Stream every duel as a JSON line before the result record.
        #[arg(long)]
        trace: bool,
    },
    /// Identify the top k players from simulated single-player duels.
    Topk {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SAMPLE_BUDGET)]
        budget: u64,
    },
    /// Witness search and pair expectations for players `a` and `b`.
    Witness {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        a: usize,
        #[arg(long)]
        b: usize,
        #[arg(long, default_value_t = DEFAULT_CANDIDATE_CAP)]
        cap: u64,
    },
    /// Check whether a team is Condorcet winning.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        /// Comma-separated player ids.
        #[arg(long, value_delimiter = ',')]
        team: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_COMPARISON_CAP)]
        cap: u64,
    },
    /// Run a batch of seeded trials.
    Bench {
        /// JSON experiment config; the remaining flags are ignored when given.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, value_enum, default_value = "additive")]
        order: OrderKind,
        #[arg(long, default_value = "deterministic", value_parser = parse_noise)]
        noise: Noise,
        #[arg(long, value_enum, default_value = "additive")]
        algo: BenchAlgo,
        #[arg(long, default_value_t = 10)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed_base: u64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchAlgo {
    Additive,
    General,
    Topk,
}

fn parse_noise(s: &str) -> Result<Noise, String> {
    let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
    let number = || arg.parse::<f64>().map_err(|e| format!("bad noise parameter {arg:?}: {e}"));
    match kind {
        "deterministic" => Ok(Noise::Deterministic),
        "uniform" => Ok(Noise::Uniform { p: number()? }),
        "logistic" => Ok(Noise::Logistic { beta: number()? }),
        _ => Err(format!("unknown noise {s:?}; use deterministic, uniform:P or logistic:BETA")),
    }
}

fn order_spec(kind: OrderKind, shuffled: bool) -> OrderSpec {
    match kind {
        OrderKind::Additive => OrderSpec::Additive { scale: 1.0 },
        OrderKind::Lexicographic => OrderSpec::Lexicographic { shuffled },
        OrderKind::Explicit => OrderSpec::Explicit,
    }
}

fn player(instance: &Instance, id: usize) -> Result<Player> {
    match Player::try_new(id) {
        Some(p) if id <= instance.n() => Ok(p),
        _ => bail!("player {id} is outside 1..={}", instance.n()),
    }
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn solve(instance: &Instance, algo: Solver, seed: u64, delta: f64, trace: bool) -> Result<ExitCode> {
    let stream = trial_stream(seed, 0);
    let (cert, raw_duels, repetitions) = if instance.is_deterministic() {
        let mut oracle = DeterministicOracle::new(instance.order());
        let cert = drive(algo, &mut oracle)?;
        (cert, oracle.duel_count(), 1)
    } else {
        let theta = instance.uniform_margin().context("noisy solving needs uniform noise")?;
        let inner = StochasticOracle::new(instance, stream);
        let m = declared_duel_budget(instance.n(), instance.k());
        let mut oracle = AmplifiedOracle::new(inner, theta, delta, m)?;
        let cert = drive(algo, &mut oracle)?;
        (cert, oracle.inner().duel_count(), oracle.repetitions())
    };
    if trace {
        write_trace(&cert.evidence, io::stdout().lock())?;
    }
    let verified = verify_trial(instance, TrialOutput::Condorcet(cert.team), DEFAULT_COMPARISON_CAP)?;
    print_json(&json!({
        "team": cert.team,
        "duels": cert.duels,
        "raw_duels": raw_duels,
        "repetitions": repetitions,
        "reduction_duels": cert.reduction_duels,
        "reduced_players": cert.reduced_players,
        "refinements": cert.refinements,
        "proof": cert.proof,
        "rounds": cert.rounds,
        "verified": verified,
    }))?;
    Ok(if verified { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn drive<O: DuelOracle>(algo: Solver, oracle: &mut O) -> Result<CondorcetCertificate> {
    Ok(match algo {
        Solver::Additive => find_condorcet_additive(oracle)?,
        Solver::General => find_condorcet_general(oracle)?,
    })
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen { n, k, order, shuffled, noise, seed, out } => {
            let spec = GeneratorSpec { n, k, order: order_spec(order, shuffled), noise };
            let instance = generate_instance(&spec, seed)?;
            match out {
                Some(path) => save_instance(&path, &instance)?,
                None => println!("{}", serde_json::to_string_pretty(&instance)?),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve { instance, algo, seed, delta, trace } => {
            let instance = load_instance(&instance)?;
            solve(&instance, algo, seed, delta, trace)
        }
        Command::Topk { instance, delta, seed, budget } => {
            let instance = load_instance(&instance)?;
            let stream = trial_stream(seed, 0);
            let mut rng = ChaCha8Rng::seed_from_u64(mix64(stream));
            let mut oracle = StochasticOracle::new(&instance, stream);
            let res = identify_top_k(&mut oracle, delta, &mut rng, budget)?;
            let verified = verify_trial(&instance, TrialOutput::TopK(res.team), DEFAULT_COMPARISON_CAP)?;
            print_json(&json!({
                "team": res.team,
                "samples": res.samples,
                "duels": res.duels,
                "verified": verified,
            }))?;
            Ok(if verified { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Witness { instance, a, b, cap } => {
            let instance = load_instance(&instance)?;
            let (pa, pb) = (player(&instance, a)?, player(&instance, b)?);
            let deduction = deducible_by_witness(&instance, pa, pb, cap)?;
            let witness = match find_witness(&instance, pa, pb, cap)? {
                Some(w) => Some(w),
                None => find_witness(&instance, pb, pa, cap)?,
            };
            let report = exact_expectations(&instance, pa, pb, cap).ok();
            print_json(&json!({
                "a": pa,
                "b": pb,
                "deduction": deduction,
                "witness": witness,
                "e_z": report.as_ref().map(|r| r.e_z.to_string()),
                "e_y": report.as_ref().map(|r| r.e_y.to_string()),
                "e_x": report.as_ref().map(|r| r.e_x.to_string()),
            }))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { instance, team, cap } => {
            let instance = load_instance(&instance)?;
            let members = team.iter().map(|&id| player(&instance, id)).collect::<Result<PlayerSet>>()?;
            let verified = verify_trial(&instance, TrialOutput::Condorcet(members), cap)?;
            print_json(&json!({ "team": members, "condorcet_winning": verified }))?;
            Ok(if verified { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Bench { config, n, k, order, noise, algo, trials, seed_base, delta, csv, summary } => {
            let config = match config {
                Some(path) => read_config(&path)?,
                None => {
                    let spec = GeneratorSpec { n, k, order: order_spec(order, false), noise };
                    let algorithm = match algo {
                        BenchAlgo::Additive => Algorithm::Additive,
                        BenchAlgo::General => Algorithm::General,
                        BenchAlgo::Topk => Algorithm::TopK,
                    };
                    let mut c = ExperimentConfig::new(InstanceSource::Generate(spec), algorithm, trials);
                    c.seed_base = seed_base;
                    c.delta = delta;
                    c.csv = csv;
                    c.summary = summary;
                    c
                }
            };
            let report = run_experiment(&config)?;
            if config.csv.is_none() {
                write_csv(&report.rows, io::stdout().lock())?;
            }
            write_summary(&report.summary, io::stderr().lock())?;
            for row in report.rows.iter().filter(|r| r.error.is_some()) {
                eprintln!("seed {}: {}", row.seed, row.error.as_deref().unwrap_or_default());
            }
            Ok(if report.all_verified() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}
