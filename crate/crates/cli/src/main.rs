mod io;
mod verify;

use std::fmt;
use std::io::{stdout, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use quolat::certlang::{
    builtin_quo6_certificate, builtin_zadori_certificate, check_certificate, eval_term, parse_certificate, parse_term,
    Certificate, Env, ValidationMode,
};
use quolat::constructions::FamilyId;
use quolat::genclose::{anchored_closure, closure, ClosureBudget, Target, DEFAULT_PROMOTE};
use quolat::lattice::{IndexedLattice, LatticeKind};
use quolat::search::{run_campaign, run_search_with, LatticeRef, Progress, RunOptions, SearchTask, Searcher, Shape};
use quolat::{GroundSet, Relation};
use serde_json::json;

use crate::io::{describe_parse_error, print_json, print_text, read_input, read_named_relations};
use crate::verify::Construction;

/// Bad flags or input; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

pub fn heartbeat(command: &str, message: &str) {
    eprintln!("[{command}] {message}");
}

#[derive(Parser)]
#[command(name = "quolat", version, about = "Finite quasiorder and equivalence lattice workbench")]
struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Json,
    Jsonl,
    Text,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClosureTarget {
    QAtoms,
    EAtoms,
    Saturate,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    BreadthFirst,
    Anchored,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate Quo n or Equ n.
    Enumerate {
        #[arg(long)]
        kind: LatticeKind,
        #[arg(long)]
        n: usize,
        /// Print only the number of elements.
        #[arg(long)]
        count_only: bool,
        /// jsonl (one relation per line, line number = id) or json.
        #[arg(long, value_enum, default_value = "jsonl")]
        emit: Emit,
    },
    /// Dump a generator family.
    Construct {
        #[arg(long)]
        family: FamilyId,
        #[arg(long, value_enum, default_value = "json")]
        emit: Emit,
    },
    /// Check a named construction: quo3, quo6, equ6, odd:N, even:N, kulin:N or table1.
    Verify {
        name: Option<String>,
        #[arg(long, conflicts_with = "name")]
        construction: Option<String>,
        /// Override the discharge mode of the Zadori citation.
        #[arg(long)]
        zadori_mode: Option<ValidationMode>,
    },
    /// Check a certificate file or print a built-in certificate.
    Cert {
        #[arg(long, required_unless_present = "builtin", conflicts_with = "builtin")]
        cert: Option<PathBuf>,
        /// quo6, odd:N, even:N or kulin:N.
        #[arg(long)]
        builtin: Option<String>,
        /// json checks the certificate; text prints its source.
        #[arg(long, value_enum, default_value = "json")]
        emit: Emit,
    },
    /// Close a set of relations under meet and join.
    Closure {
        #[arg(long, required_unless_present = "family", conflicts_with = "family")]
        generators: Option<PathBuf>,
        #[arg(long)]
        family: Option<FamilyId>,
        #[arg(long, default_value_t = 100_000)]
        max_elements: usize,
        #[arg(long)]
        max_depth: Option<usize>,
        #[arg(long, value_enum, default_value = "q-atoms")]
        target: ClosureTarget,
        #[arg(long, value_enum, default_value = "breadth-first")]
        strategy: StrategyArg,
    },
    /// Search k-subsets of a small lattice for generating sets.
    Search {
        /// quo:N or equ:N.
        #[arg(long)]
        lattice: LatticeRef,
        #[arg(long, default_value_t = 4)]
        size: usize,
        /// any, antichain or one-one-two.
        #[arg(long, default_value = "any")]
        shape: Shape,
        #[arg(long, default_value_t = 1)]
        shards: u64,
        #[arg(long, default_value_t = 0)]
        shard_index: u64,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        findings: Option<PathBuf>,
        /// Stop after this many candidates (per shard with --campaign-dir).
        #[arg(long)]
        max_candidates: Option<u64>,
        #[arg(long, default_value_t = 1_000_000)]
        checkpoint_every: u64,
        #[arg(long)]
        no_orbit: bool,
        #[arg(long)]
        no_prune: bool,
        /// Run every shard in turn, keeping checkpoints and findings in this directory.
        #[arg(long, conflicts_with_all = ["checkpoint", "findings", "shard_index"])]
        campaign_dir: Option<PathBuf>,
    },
    /// DOT rendering of the induced block order of a relation.
    Render {
        /// Relation JSON file, or - for standard input.
        file: PathBuf,
        #[arg(long, default_value = "rho")]
        name: String,
    },
    /// Evaluate a lattice term.
    Eval {
        term: String,
        /// Bind the relations of a built-in family.
        #[arg(long, required_unless_present = "bindings", conflicts_with = "bindings")]
        family: Option<FamilyId>,
        /// Named relations file.
        #[arg(long)]
        bindings: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

/// Runs one subcommand; `Ok(false)` is a failed verification.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Enumerate { kind, n, count_only, emit } => enumerate(kind, n, count_only, emit),
        Command::Construct { family, emit } => construct(family, emit),
        Command::Verify { name, construction, zadori_mode } => {
            let name = name.or(construction).ok_or_else(|| usage("verify needs a construction name"))?;
            let target: Construction = name.parse()?;
            let outcome = verify::run(target, zadori_mode)?;
            print_json(&outcome.report)?;
            Ok(outcome.ok)
        }
        Command::Cert { cert, builtin, emit } => {
            let certificate = match (cert, builtin) {
                (Some(path), _) => {
                    let text = read_input(&path)?;
                    parse_certificate(&text)
                        .map_err(|e| usage(format!("{}: {}", path.display(), describe_parse_error(&e))))?
                }
                (None, Some(name)) => builtin_certificate(&name)?,
                (None, None) => return Err(usage("pass --cert or --builtin")),
            };
            match emit {
                Emit::Text => {
                    print_text(&certificate.to_string())?;
                    Ok(true)
                }
                Emit::Json => {
                    let report = check_certificate(&certificate);
                    print_json(&report)?;
                    Ok(report.ok)
                }
                _ => Err(usage("cert supports --emit json or text")),
            }
        }
        Command::Closure { generators, family, max_elements, max_depth, target, strategy } => {
            let rels: Vec<Relation> = match (generators, family) {
                (Some(path), _) => read_named_relations(&path, true)
                    .map_err(|e| usage(format!("{e:#}")))?
                    .into_iter()
                    .map(|(_, r)| r)
                    .collect(),
                (None, Some(id)) => id.build().map_err(|e| usage(e.to_string()))?.relations(),
                (None, None) => return Err(usage("pass --generators or --family")),
            };
            let target = match target {
                ClosureTarget::QAtoms => Target::QAtoms,
                ClosureTarget::EAtoms => Target::EAtoms,
                ClosureTarget::Saturate => Target::Saturate,
            };
            let mut budget = ClosureBudget::new(max_elements, target);
            if let Some(d) = max_depth {
                budget = budget.with_max_depth(d);
            }
            let c = match strategy {
                StrategyArg::BreadthFirst => closure(&rels, &budget),
                StrategyArg::Anchored => anchored_closure(&rels, &budget, DEFAULT_PROMOTE),
            }
            .map_err(|e| usage(e.to_string()))?;
            print_json(&c.report)?;
            Ok(true)
        }
        Command::Search {
            lattice,
            size,
            shape,
            shards,
            shard_index,
            checkpoint,
            findings,
            max_candidates,
            checkpoint_every,
            no_orbit,
            no_prune,
            campaign_dir,
        } => {
            let mut task = SearchTask::new(lattice, size, shape);
            task.orbit_reduction = !no_orbit;
            task.prune = !no_prune;
            heartbeat("search", &format!("building {lattice}"));
            let lat = lattice.build().map_err(|e| usage(e.to_string()))?;
            let searcher = Searcher::new(&lat)?;
            let beat = |shard: u64, p: &Progress| {
                heartbeat(
                    "search",
                    &format!(
                        "shard {shard}: cursor {} of {}, examined {}, found {}",
                        p.cursor, p.end, p.examined, p.found
                    ),
                )
            };
            if let Some(dir) = campaign_dir {
                task.validate(lat.len()).map_err(|e| usage(e.to_string()))?;
                let report = run_campaign(&searcher, &task, shards, max_candidates, &dir, beat)?;
                print_json(&report)?;
            } else {
                let task = task.with_shard(shard_index, shards);
                task.validate(lat.len()).map_err(|e| usage(e.to_string()))?;
                let opts = RunOptions { checkpoint, findings, max_candidates, checkpoint_every };
                let report = run_search_with(&searcher, &task, &opts, |p| beat(shard_index, p))?;
                print_json(&report)?;
            }
            Ok(true)
        }
        Command::Render { file, name } => {
            let text = read_input(&file)?;
            let r = Relation::from_json_str(&text).map_err(|e| usage(format!("{}: {e}", file.display())))?;
            let poset = r.induced_order().map_err(|e| usage(e.to_string()))?;
            print_text(&poset.to_dot(&name))?;
            Ok(true)
        }
        Command::Eval { term, family, bindings } => eval(&term, family, bindings),
    }
}

fn enumerate(kind: LatticeKind, n: usize, count_only: bool, emit: Emit) -> Result<bool> {
    heartbeat("enumerate", &format!("enumerating {kind} {n}"));
    let lat = IndexedLattice::enumerate(kind, n).map_err(|e| usage(e.to_string()))?;
    if count_only {
        match emit {
            Emit::Json => print_json(&json!({"kind": kind, "n": n, "count": lat.len()}))?,
            _ => print_text(&format!("{}\n", lat.len()))?,
        }
        return Ok(true);
    }
    match emit {
        Emit::Jsonl => {
            let mut out = BufWriter::new(stdout().lock());
            lat.write_jsonl(&mut out)?;
            out.flush()?;
        }
        Emit::Json => {
            let rels: Vec<_> = lat.elements().iter().map(Relation::to_json).collect();
            print_json(&json!({"kind": kind, "n": n, "count": lat.len(), "elements": rels}))?;
        }
        Emit::Text => {
            let mut out = BufWriter::new(stdout().lock());
            for (i, r) in lat.elements().iter().enumerate() {
                writeln!(out, "{i}\t{}", r.pairs_display())?;
            }
            out.flush()?;
        }
        Emit::Dot => return Err(usage("enumerate supports --emit jsonl, json or text")),
    }
    Ok(true)
}

fn construct(id: FamilyId, emit: Emit) -> Result<bool> {
    let family = id.build().map_err(|e| usage(e.to_string()))?;
    match emit {
        Emit::Json => print_json(&family.to_json())?,
        Emit::Dot => print_text(&family.to_dot())?,
        _ => return Err(usage("construct supports --emit json or dot")),
    }
    Ok(true)
}

fn builtin_certificate(name: &str) -> Result<Certificate> {
    if let Some(n) = name.strip_prefix("kulin:") {
        let n = n.parse().map_err(|_| usage(format!("bad size in `{name}`")))?;
        return verify::kulin_certificate(n);
    }
    match name.parse::<FamilyId>().map_err(|e| usage(e.to_string()))? {
        FamilyId::Quo6 => Ok(builtin_quo6_certificate()),
        FamilyId::Odd(n) | FamilyId::Even(n) => builtin_zadori_certificate(n).map_err(|e| usage(e.to_string())),
        other => Err(usage(format!("no built-in certificate for {other}"))),
    }
}

fn eval(text: &str, family: Option<FamilyId>, bindings: Option<PathBuf>) -> Result<bool> {
    let named: Vec<(String, Relation)> = match (family, bindings) {
        (Some(id), _) => {
            let f = id.build().map_err(|e| usage(e.to_string()))?;
            f.bindings().map(|(n, r)| (n.to_string(), r.clone())).collect()
        }
        (None, Some(path)) => read_named_relations(&path, false).map_err(|e| usage(format!("{e:#}")))?,
        (None, None) => return Err(usage("pass --family or --bindings")),
    };
    let ground: std::sync::Arc<GroundSet> = named[0].1.ground().clone();
    let mut env = Env::new(&ground);
    for (name, r) in named {
        env.bind(name, r)?;
    }
    let term = parse_term(text).map_err(|e| usage(format!("term: {}", describe_parse_error(&e))))?;
    let r = eval_term(&term, &env).map_err(|e| usage(format!("term: {e}")))?;
    let poset = r.induced_order()?;
    print_json(&json!({
        "term": term.to_string(),
        "relation": r.to_json(),
        "pairs": r.pairs_display(),
        "blocks": r.theta()?.display_nontrivial(),
        "diagram_text": poset.diagram_text(),
    }))?;
    Ok(true)
}
