use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use merlab::commands::{self as cmd, ScaleArgs, SwapArgs, Target};
use merlab::dsl::{load_workspace, Workspace};
use merlab::error::CliError;
use merlab::report::{render, Format};
use merlab_core::{Budget, DEFAULT_BUDGET};
use serde_json::Value;

#[derive(Parser)]
#[command(name = "merlab", version, about = "Finite-model workbench for model equivalence relations")]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Work ceiling in elementary steps.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct MerArgs {
    /// Workspace file declaring vocabularies, theories, structures and mers.
    file: Option<PathBuf>,
    #[arg(long)]
    mer: String,
    /// `N` or `S=n,...`.
    #[arg(long)]
    max: Option<String>,
    /// Bounds for the decoupled sorts only.
    #[arg(long)]
    decoupled_max: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Check reflexivity, symmetry and transitivity at a finite scale.
    CheckEr {
        #[command(flatten)]
        m: MerArgs,
        /// Re-check the counterexample stored in a previous report.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Check the groupoid laws, or list the morphisms between two structures.
    Groupoid {
        #[command(flatten)]
        m: MerArgs,
        #[arg(long, requires = "right")]
        left: Option<String>,
        #[arg(long, requires = "left")]
        right: Option<String>,
    },
    /// List the classes among models of exact sizes.
    Classes {
        #[command(flatten)]
        m: MerArgs,
        #[arg(long)]
        sizes: Option<String>,
    },
    /// Quantifier-prefix class of a sentence-defined mer.
    Classify {
        file: Option<PathBuf>,
        #[arg(long)]
        mer: String,
    },
    /// Evaluate a partitioned formula to its n-set.
    Nset {
        file: Option<PathBuf>,
        #[arg(long)]
        structure: String,
        #[arg(long)]
        formula: String,
        /// Vocabulary for a structure literal.
        #[arg(long)]
        vocab: Option<String>,
    },
    /// Expand a structure with the imaginaries of a family.
    Shelahize {
        file: Option<PathBuf>,
        #[arg(long)]
        structure: String,
        #[arg(long)]
        family: String,
        #[arg(long)]
        vocab: Option<String>,
    },
    /// Groupoid-type quotient and profiles.
    Invariants {
        #[command(flatten)]
        m: MerArgs,
        #[arg(long, default_value_t = 1)]
        tuple_len: usize,
    },
    /// Whether profiles determine the relation at this scale.
    YdleptTest {
        #[command(flatten)]
        m: MerArgs,
        #[arg(long, default_value_t = 1)]
        tuple_len: usize,
    },
    /// Compare orbits with profile classes on one structure.
    Density {
        #[command(flatten)]
        m: MerArgs,
        #[arg(long)]
        structure: String,
        #[arg(long, default_value_t = 1)]
        tuple_len: usize,
    },
    /// Generate an extension graph and search for swap witnesses.
    SwapDemo {
        #[arg(long, default_value = "P=6,Q=6")]
        sizes: String,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "G(x, y) & !G(x2, y)")]
        formula: String,
        /// Explicit swaps as `c-d,c-d`.
        #[arg(long)]
        pairs: Option<String>,
    },
    /// Expand a graph by its subsets of pairs and forget back.
    Interp {
        file: Option<PathBuf>,
        #[arg(long)]
        structure: String,
        #[arg(long)]
        mer: Option<String>,
    },
    /// Built-in mers.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
    Show { id: String },
}

fn workspace(file: &Option<PathBuf>) -> Result<Workspace, CliError> {
    match file {
        Some(p) => load_workspace(p),
        None => Ok(Workspace::default()),
    }
}

fn resolve(m: &MerArgs) -> Result<(Workspace, Target, merlab_core::Scale), CliError> {
    let ws = workspace(&m.file)?;
    let t = cmd::target(&ws, &m.mer)?;
    let scale = cmd::scale_for(
        &t,
        &ScaleArgs {
            max: m.max.clone(),
            decoupled_max: m.decoupled_max.clone(),
        },
    )?;
    Ok((ws, t, scale))
}

fn literal_vocab(
    ws: &Workspace,
    name: &Option<String>,
) -> Result<Option<std::sync::Arc<merlab_core::Vocabulary>>, CliError> {
    match name {
        Some(n) => cmd::vocab_named(ws, n).map(Some),
        None if ws.vocabs.len() == 1 => Ok(ws.vocabs.values().next().map(|(v, _)| v.clone())),
        None => Ok(None),
    }
}

fn run(cli: &Cli) -> Result<Value, CliError> {
    let budget = Budget::new(cli.budget);
    let b = &budget;
    match &cli.command {
        Command::CheckEr { m, replay } => {
            let (_, t, scale) = resolve(m)?;
            match replay {
                Some(p) => cmd::check_er_replay(&t, p),
                None => cmd::check_er(&t, &scale, b),
            }
        }
        Command::Groupoid { m, left, right } => {
            let (ws, t, scale) = resolve(m)?;
            let pair = match (left, right) {
                (Some(l), Some(r)) => Some((
                    cmd::structure(&ws, l, Some(t.vocab()))?,
                    cmd::structure(&ws, r, Some(t.vocab()))?,
                )),
                _ => None,
            };
            cmd::groupoid(&t, &scale, pair, b)
        }
        Command::Classes { m, sizes } => {
            let (_, t, scale) = resolve(m)?;
            cmd::classes(&t, sizes.as_deref(), &scale, b)
        }
        Command::Classify { file, mer } => {
            let ws = workspace(file)?;
            cmd::classify(&cmd::target(&ws, mer)?)
        }
        Command::Nset {
            file,
            structure,
            formula,
            vocab,
        } => {
            let ws = workspace(file)?;
            let v = literal_vocab(&ws, vocab)?;
            cmd::nset(&cmd::structure(&ws, structure, v.as_ref())?, formula)
        }
        Command::Shelahize {
            file,
            structure,
            family,
            vocab,
        } => {
            let ws = workspace(file)?;
            let v = literal_vocab(&ws, vocab)?;
            cmd::shelahize_cmd(&cmd::structure(&ws, structure, v.as_ref())?, family)
        }
        Command::Invariants { m, tuple_len } => {
            let (ws, t, scale) = resolve(m)?;
            cmd::invariants(&t, &ws, &scale, *tuple_len, b)
        }
        Command::YdleptTest { m, tuple_len } => {
            let (_, t, scale) = resolve(m)?;
            cmd::ydlept_test(&t, &scale, *tuple_len, b)
        }
        Command::Density {
            m,
            structure,
            tuple_len,
        } => {
            let (ws, t, scale) = resolve(m)?;
            let s = cmd::structure(&ws, structure, Some(t.vocab()))?;
            cmd::density(&t, &s, &scale, *tuple_len, b)
        }
        Command::SwapDemo {
            sizes,
            k,
            seed,
            formula,
            pairs,
        } => cmd::swap_demo(&SwapArgs {
            sizes: sizes.clone(),
            k: *k,
            seed: *seed,
            formula: formula.clone(),
            pairs: pairs.clone(),
        }),
        Command::Interp {
            file,
            structure,
            mer,
        } => {
            let ws = workspace(file)?;
            let t = mer.as_ref().map(|n| cmd::target(&ws, n)).transpose()?;
            let v = merlab_core::catalog::graph_vocab();
            let s = cmd::structure(&ws, structure, Some(&v))?;
            cmd::interp(&s, t.as_ref())
        }
        Command::Catalog { action } => match action {
            CatalogAction::List => cmd::catalog_list_cmd(),
            CatalogAction::Show { id } => cmd::catalog_show(id),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("merlab: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(report) => {
            print!("{}", render(&report, cli.format));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("merlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
