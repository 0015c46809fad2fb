mod io;
mod report;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mbk_core::bases::{
    default_verify_degree, dobra_basis, invariant_basis, is_markov_basis, minimal_basis, TreePolicy,
};
use mbk_core::chordal::{clique_tree, independence_graph, is_decomposable};
use mbk_core::fiber2::{enumerate_all_degree2_fibers, enumerate_representative_fibers, minimal_bases_nonunique, FiberKey};
use mbk_core::gf2::Flavor;
use mbk_core::groebner::{groebner_basis, is_groebner_empirically, TermOrder};
use mbk_core::sampler::{exact_test, ChainConfig};
use mbk_core::Limits;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Domain(#[from] mbk_core::Error),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {source}\nexpected {schema}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
        schema: &'static str,
    },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Read { .. } | CliError::Parse { .. } => 2,
            _ => 1,
        }
    }
}

/// Markov bases for hierarchical log-linear models.
///
/// Files are JSON with 0-based variables and levels; reports print
/// variables 1-based.
#[derive(Parser)]
#[command(name = "mbk", version, after_help = schemas())]
struct Cli {
    #[command(flatten)]
    limits: LimitArgs,
    #[command(subcommand)]
    command: Command,
}

fn schemas() -> String {
    format!(
        "File formats:\n  {}\n  {}\n  {}\n  {}\n  {}",
        io::MODEL_SCHEMA,
        io::TABLE_SCHEMA,
        io::MOVES_SCHEMA,
        io::TREE_SCHEMA,
        io::B_SCHEMA
    )
}

#[derive(Args)]
struct LimitArgs {
    /// Largest number of cells scanned by enumeration.
    #[arg(long, global = true, env = "MBK_MAX_CELLS", default_value_t = Limits::default().max_cells)]
    max_cells: usize,
    /// Largest sample size enumerated by brute force.
    #[arg(long, global = true, default_value_t = Limits::default().max_degree)]
    max_degree: u64,
    /// Largest number of tables enumerated at one degree.
    #[arg(long, global = true, default_value_t = Limits::default().max_tables)]
    max_tables: u64,
}

impl LimitArgs {
    fn limits(&self) -> Limits {
        Limits {
            max_cells: self.max_cells,
            max_degree: self.max_degree,
            max_tables: self.max_tables,
            ..Limits::default()
        }
    }
}

#[derive(Args)]
struct ModelArg {
    /// Model file.
    #[arg(long)]
    model: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlavorArg {
    Staircase,
    Standard,
}

impl From<FlavorArg> for Flavor {
    fn from(f: FlavorArg) -> Self {
        match f {
            FlavorArg::Staircase => Flavor::Staircase,
            FlavorArg::Standard => Flavor::Standard,
        }
    }
}

fn parse_policy(s: &str) -> Result<TreePolicy, String> {
    match s {
        "star" => Ok(TreePolicy::StarAtMin),
        "path" => Ok(TreePolicy::Path),
        _ => s
            .strip_prefix("random:")
            .and_then(|seed| seed.parse().ok())
            .map(TreePolicy::Random)
            .ok_or_else(|| format!("expected star, path or random:SEED, got {s:?}")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Independence graph, cliques, separators, boundary cliques, clique tree and elimination order.
    Analyze {
        #[command(flatten)]
        model: ModelArg,
        /// Print the clique tree in DOT format instead of the report.
        #[arg(long)]
        dot: bool,
    },
    /// Degree-two fibers with their components and members.
    Fibers {
        #[command(flatten)]
        model: ModelArg,
        /// Every fiber with a non-degenerate variable.
        #[arg(long, conflicts_with_all = ["representative", "b"])]
        all: bool,
        /// One representative fiber per non-degenerate variable set (default).
        #[arg(long, conflicts_with = "b")]
        representative: bool,
        /// A single fiber given by its marginals.
        #[arg(long)]
        b: Option<PathBuf>,
    },
    /// A minimal Markov basis.
    MinBasis {
        #[command(flatten)]
        model: ModelArg,
        /// Spanning tree of each fiber: star, path or random:SEED.
        #[arg(long, default_value = "star", value_parser = parse_policy)]
        policy: TreePolicy,
        /// Write the moves to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The Markov basis attached to a clique tree.
    Dobra {
        #[command(flatten)]
        model: ModelArg,
        /// Clique tree file; the canonical tree when absent.
        #[arg(long)]
        tree: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A minimal invariant Markov basis as orbits under level relabelling.
    InvariantBasis {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, value_enum, default_value = "staircase")]
        flavor: FlavorArg,
        /// Write every move of every orbit to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The reduced Gröbner basis of a decomposable model.
    Groebner {
        #[command(flatten)]
        model: ModelArg,
        /// Check reduction to fiber minima for every table up to this degree.
        #[arg(long)]
        verify_cap: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Whether minimal Markov bases are unique.
    CheckUnique {
        #[command(flatten)]
        model: ModelArg,
    },
    /// Checks that moves connect every fiber up to a degree.
    Verify {
        #[command(flatten)]
        model: ModelArg,
        /// Moves file.
        #[arg(long)]
        basis: PathBuf,
        /// Largest degree checked; 2 for decomposable models, 3 otherwise.
        #[arg(long)]
        degree: Option<u64>,
    },
    /// Monte Carlo exact goodness-of-fit test for a decomposable model.
    ExactTest {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        basis: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        #[arg(long, default_value_t = 1_000)]
        burnin: u64,
        #[arg(long, default_value_t = 1)]
        thin: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Serialize)]
struct ExactTestOutput {
    p_value: f64,
    se: f64,
    steps: u64,
    chi2_observed: f64,
}

fn run(cli: Cli, out: &mut String) -> Result<(), CliError> {
    let lim = cli.limits.limits();
    match cli.command {
        Command::Analyze { model, dot } => {
            let model = io::read_model(&model.model)?;
            if dot {
                let tree = clique_tree(&independence_graph(&model))?;
                report::dot(out, &tree);
            } else {
                report::analyze(out, &model)?;
            }
        }
        Command::Fibers { model, all, representative: _, b } => {
            let model = io::read_model(&model.model)?;
            let keys = match b {
                Some(path) => vec![FiberKey::analyze(io::read_marginals(&path, &model)?, &model)?],
                None if all => enumerate_all_degree2_fibers(&model, &lim)?,
                None => enumerate_representative_fibers(&model, &lim)?,
            };
            report::fibers(out, &keys);
        }
        Command::MinBasis { model, policy, out: file } => {
            let model = io::read_model(&model.model)?;
            let basis = minimal_basis(&model, policy, &lim)?;
            report::basis(out, "minimal Markov basis", &basis);
            if let Some(path) = file {
                io::write_moves(&path, basis.moves())?;
            }
        }
        Command::Dobra { model, tree, out: file } => {
            let model = io::read_model(&model.model)?;
            let tree = match tree {
                Some(path) => io::read_tree(&path)?,
                None => clique_tree(&independence_graph(&model))?,
            };
            let basis = dobra_basis(&model, &tree, &lim)?;
            report::tree_line(out, &tree);
            report::basis(out, "clique tree Markov basis", &basis);
            if let Some(path) = file {
                io::write_moves(&path, basis.moves())?;
            }
        }
        Command::InvariantBasis { model, flavor, out: file } => {
            let model = io::read_model(&model.model)?;
            let inv = invariant_basis(&model, flavor.into(), &lim)?;
            report::orbits(out, &inv);
            if let Some(path) = file {
                io::write_moves(&path, inv.to_basis(&model)?.moves())?;
            }
        }
        Command::Groebner { model, verify_cap, out: file } => {
            let model = io::read_model(&model.model)?;
            let basis = groebner_basis(&model, &lim)?;
            let ord = TermOrder::for_model(&model);
            report::term_order(out, &ord);
            report::basis(out, "reduced Gröbner basis", &basis);
            if let Some(path) = file {
                io::write_moves(&path, basis.moves())?;
            }
            if let Some(cap) = verify_cap {
                let rep = is_groebner_empirically(&basis.to_moves(), &model, &ord, cap, &lim)?;
                report::groebner_check(out, &rep);
                if !rep.passed() {
                    return Err(CliError::Failed("Gröbner check failed".into()));
                }
            }
        }
        Command::CheckUnique { model } => {
            let model = io::read_model(&model.model)?;
            report::uniqueness(out, &minimal_bases_nonunique(&model));
        }
        Command::Verify { model, basis, degree } => {
            let model = io::read_model(&model.model)?;
            let moves = io::read_moves(&basis, &model)?;
            let degree = degree.unwrap_or_else(|| default_verify_degree(&model));
            let v = is_markov_basis(&model, &moves, degree, &lim)?;
            report::verification(out, moves.len(), &v);
            if !v.passed() {
                return Err(CliError::Failed("not a Markov basis".into()));
            }
        }
        Command::ExactTest {
            model,
            table,
            basis,
            steps,
            burnin,
            thin,
            seed,
        } => {
            let model = io::read_model(&model.model)?;
            if !is_decomposable(&model) {
                return Err(mbk_core::Error::NotDecomposable.into());
            }
            let t = io::read_table(&table, &model)?;
            let moves = io::read_moves(&basis, &model)?;
            let tree = clique_tree(&independence_graph(&model))?;
            let cfg = ChainConfig::new(steps, burnin, thin, seed)?;
            let r = exact_test(&t, &model, &moves, &tree, &cfg)?;
            let json = serde_json::to_string(&ExactTestOutput {
                p_value: r.p_value,
                se: r.se,
                steps: r.steps,
                chi2_observed: r.chi2_observed,
            })
            .expect("serializable");
            out.push_str(&json);
            out.push('\n');
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    let result = run(cli, &mut out);
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.as_bytes());
    let _ = stdout.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
