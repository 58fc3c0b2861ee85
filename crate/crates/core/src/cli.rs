//! Command-line front end. Exit status: 0 for a positive verdict, 1 for a
//! negative one, 2 for usage, input or resource errors.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::bisim::{self, PairRelation, RelationSpec};
use crate::error::{Error, Result};
use crate::interp;
use crate::model::{self, NModel};
use crate::proof::{self, ProofScript};
use crate::semantics::{self, SatOutcome};
use crate::syntax::{parse, Formula};
use crate::translate::{self, Role};
use crate::unravel;

pub const SCHEMA: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "waml", version, about = "Weakly aggregative modal logic workbench")]
pub struct Cli {
    /// Emit structured JSON instead of text
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for randomized commands
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Step budget for searches and unraveling
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Model-check a formula at a world
    Mc {
        model: PathBuf,
        world: String,
        formula: String,
    },
    /// Search for a small model satisfying a formula
    Sat {
        formula: String,
        #[arg(long)]
        arity: usize,
        #[arg(long)]
        max_worlds: usize,
    },
    /// Bisimulation checks and computations
    #[command(subcommand)]
    Bisim(BisimCommand),
    /// Bounded unraveling of a pointed model
    Unravel {
        model: PathBuf,
        world: String,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        emit_rmap: Option<PathBuf>,
    },
    /// Standard translation to first-order logic
    Translate {
        formula: String,
        #[arg(long)]
        arity: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Constant substituted for the free variable in TPTP output
        #[arg(long, default_value = "c")]
        ground: String,
        #[arg(long, default_value = "formula")]
        name: String,
        #[arg(long, value_enum, default_value_t = RoleArg::Axiom)]
        role: RoleArg,
    },
    /// Proof scripts
    #[command(subcommand)]
    Proof(ProofCommand),
    /// Interpolation counterexamples
    #[command(subcommand)]
    Interp(InterpCommand),
    /// Exploratory measurements; results are observations, not claims
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Print a seeded random model
    RandomModel {
        #[arg(long)]
        arity: usize,
        #[arg(long)]
        worlds: usize,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        #[arg(long, default_value = "p,q")]
        letters: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum BisimCommand {
    /// Verify a given relation
    Check {
        left: PathBuf,
        right: PathBuf,
        relation: PathBuf,
        #[command(flatten)]
        letters: Letters,
    },
    /// Greatest bisimulation, or the depth-k stage with --k
    Max {
        left: PathBuf,
        right: PathBuf,
        #[command(flatten)]
        letters: Letters,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Formula separating two worlds, if any
    Distinguish {
        left: PathBuf,
        w: String,
        right: PathBuf,
        v: String,
        #[command(flatten)]
        letters: Letters,
    },
}

#[derive(Args, Debug)]
pub struct Letters {
    /// Comma-separated alphabet; defaults to every letter of both models
    #[arg(long)]
    letters: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum ProofCommand {
    /// Validate a proof script
    Check { script: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum InterpCommand {
    /// Build and verify the counterexample for arity n
    Demo {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        sat_bound: Option<usize>,
        #[arg(long)]
        emit_bundle: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ExperimentCommand {
    /// Sweep unraveling depth and report when the root agrees with the point
    Locality {
        model: PathBuf,
        world: String,
        formula: String,
        #[arg(long, default_value_t = 4)]
        max_depth: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Text,
    Tptp,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RoleArg {
    Axiom,
    Conjecture,
}

/// Result of a command: exit status plus the text and JSON renderings.
struct Outcome {
    code: i32,
    text: String,
    json: Value,
}

impl Outcome {
    fn new(ok: bool, text: String, json: Value) -> Outcome {
        Outcome {
            code: if ok { 0 } else { 1 },
            text,
            json,
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    let json = cli.json;
    match dispatch(&cli) {
        Ok(outcome) => {
            let written = if json {
                let mut value = outcome.json;
                value["schema"] = json!(SCHEMA);
                writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("json"))
            } else {
                write!(out, "{}", outcome.text)
            };
            if written.is_err() {
                return 2;
            }
            outcome.code
        }
        Err(e) => {
            if json {
                let value = json!({"schema": SCHEMA, "error": e.to_string()});
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("json"));
            }
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<NModel> {
    model::load(&read(path)?)
}

fn alphabet(letters: &Letters, models: &[&NModel]) -> Result<BTreeSet<String>> {
    match &letters.letters {
        None => Ok(models.iter().flat_map(|m| m.alphabet()).collect()),
        Some(list) => {
            let set: BTreeSet<String> = list
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect();
            if let Some(bad) = set.iter().find(|s| !crate::syntax::is_letter_id(s)) {
                return Err(Error::InvalidArgument(format!("`{bad}` is not a letter")));
            }
            Ok(set)
        }
    }
}

fn spec_json(m: &NModel) -> Value {
    serde_json::to_value(m.to_spec()).expect("model spec serializes")
}

fn pairs_json(z: &PairRelation<'_>) -> Value {
    json!(z.named_pairs())
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Mc { model, world, formula } => {
            let m = load_model(model)?;
            let f = parse(formula)?;
            let holds = semantics::check(&m, world, &f)?;
            Ok(Outcome::new(
                holds,
                format!("{world} {} {f}\n", if holds { "|=" } else { "|/=" }),
                json!({"command": "mc", "world": world, "formula": f.to_string(), "holds": holds}),
            ))
        }
        Command::Sat {
            formula,
            arity,
            max_worlds,
        } => {
            let f = parse(formula)?;
            match semantics::bounded_sat(&f, *arity, *max_worlds, cli.budget)? {
                SatOutcome::Witness(pm) => Ok(Outcome::new(
                    true,
                    format!(
                        "satisfiable at {} of:\n{}",
                        pm.point,
                        String::from_utf8(model::save(&pm.model)).expect("utf8")
                    ),
                    json!({"command": "sat", "formula": f.to_string(), "result": "witness",
                           "point": pm.point, "model": spec_json(&pm.model)}),
                )),
                SatOutcome::UnsatUpToBound { max_worlds } => Ok(Outcome::new(
                    false,
                    format!("unsatisfiable on models with at most {max_worlds} worlds\n"),
                    json!({"command": "sat", "formula": f.to_string(),
                           "result": "unsat-up-to-bound", "max_worlds": max_worlds}),
                )),
            }
        }
        Command::Bisim(cmd) => bisim_command(cmd),
        Command::Unravel {
            model,
            world,
            depth,
            out,
            emit_rmap,
        } => {
            let m = load_model(model)?;
            let budget = cli.budget.unwrap_or(unravel::DEFAULT_NODE_BUDGET);
            let u = unravel::unravel_with_budget(&m, world, *depth, budget)?;
            let saved = model::save(&u.model);
            let rmap_text = serde_json::to_string_pretty(&u.rmap).expect("json") + "\n";
            if let Some(path) = out {
                write_file(path, &saved)?;
            }
            if let Some(path) = emit_rmap {
                write_file(path, rmap_text.as_bytes())?;
            }
            let mut text = format!(
                "unraveled {world} to depth {depth}: {} nodes, {} tuples, root {}\n",
                u.model.len(),
                u.model.relation().len(),
                u.root
            );
            if out.is_none() {
                text.push_str(&String::from_utf8(saved).expect("utf8"));
            }
            Ok(Outcome::new(
                true,
                text,
                json!({"command": "unravel", "root": u.root, "depth": depth,
                       "model": spec_json(&u.model), "rmap": u.rmap}),
            ))
        }
        Command::Translate {
            formula,
            arity,
            format,
            ground,
            name,
            role,
        } => {
            if *arity == 0 {
                return Err(Error::InvalidArgument("arity must be >= 1".into()));
            }
            let f = parse(formula)?;
            let g = translate::st(&f, *arity, "x");
            let role = match role {
                RoleArg::Axiom => Role::Axiom,
                RoleArg::Conjecture => Role::Conjecture,
            };
            let rendered = match format {
                Format::Text => g.to_string(),
                Format::Tptp => {
                    translate::tptp_export(&g, role, name, &BTreeMap::from([("x".to_string(), ground.clone())]))?
                }
            };
            Ok(Outcome::new(
                true,
                format!("{rendered}\n"),
                json!({"command": "translate", "formula": f.to_string(), "arity": arity,
                       "format": format!("{format:?}").to_lowercase(), "output": rendered}),
            ))
        }
        Command::Proof(ProofCommand::Check { script }) => {
            let s = ProofScript::from_json(&read(script)?)?;
            let report = proof::check_script(&s)?;
            let text = match &report {
                None => format!("{s}valid: {} lines\n", s.lines.len()),
                Some(bad) => format!("{s}invalid: {bad}\n"),
            };
            Ok(Outcome::new(
                report.is_none(),
                text,
                json!({"command": "proof check", "arity": s.arity, "lines": s.lines.len(),
                       "valid": report.is_none(),
                       "invalid_line": report.as_ref().map(|r| r.line),
                       "reason": report.as_ref().map(|r| r.reason.clone())}),
            ))
        }
        Command::Interp(InterpCommand::Demo {
            n,
            sat_bound,
            emit_bundle,
        }) => {
            let b = interp::build_counterexample(*n)?;
            let bound = sat_bound.unwrap_or_else(|| interp::default_sat_bound(*n));
            let report = interp::verify_lemma1(&b, bound, cli.budget)?;
            if let Some(dir) = emit_bundle {
                emit(&b, dir)?;
            }
            Ok(Outcome::new(
                report.pass,
                format!("{report}\n"),
                json!({"command": "interp demo", "report": report,
                       "phi": b.phi.to_string(), "psi": b.psi.to_string()}),
            ))
        }
        Command::Experiment(ExperimentCommand::Locality {
            model,
            world,
            formula,
            max_depth,
        }) => locality(cli, model, world, formula, *max_depth),
        Command::RandomModel {
            arity,
            worlds,
            density,
            letters,
        } => {
            if *arity == 0 || *worlds == 0 {
                return Err(Error::InvalidArgument("arity and worlds must be >= 1".into()));
            }
            let alpha = alphabet(
                &Letters {
                    letters: Some(letters.clone()),
                },
                &[],
            )?;
            let m = model::random_model(*arity, *worlds, *density, &alpha, cli.seed);
            Ok(Outcome::new(
                true,
                String::from_utf8(model::save(&m)).expect("utf8"),
                json!({"command": "random-model", "seed": cli.seed, "model": spec_json(&m)}),
            ))
        }
    }
}

fn bisim_command(cmd: &BisimCommand) -> Result<Outcome> {
    match cmd {
        BisimCommand::Check {
            left,
            right,
            relation,
            letters,
        } => {
            let (l, r) = (load_model(left)?, load_model(right)?);
            let alpha = alphabet(letters, &[&l, &r])?;
            let spec: RelationSpec = model::from_json_bytes(&read(relation)?)?;
            let z = PairRelation::from_names(&l, &r, &spec.pairs, alpha)?;
            let verdict = bisim::check_bisim(&z)?;
            let text = match &verdict {
                None => format!("ok: {} pairs form a bisimulation\n", z.len()),
                Some(cex) => format!("counterexample: {cex}\n"),
            };
            Ok(Outcome::new(
                verdict.is_none(),
                text,
                json!({"command": "bisim check", "ok": verdict.is_none(),
                "counterexample": verdict.as_ref().map(|c| json!({
                    "pair": [c.pair.0, c.pair.1],
                    "condition": c.clause.to_string(),
                    "tuple": c.tuple,
                }))}),
            ))
        }
        BisimCommand::Max {
            left,
            right,
            letters,
            k,
        } => {
            let (l, r) = (load_model(left)?, load_model(right)?);
            let alpha = alphabet(letters, &[&l, &r])?;
            let strat = bisim::Stratification::compute(&l, &r, &alpha)?;
            let z = match k {
                Some(k) => strat.stage(*k),
                None => strat.greatest(),
            };
            let mut text = String::new();
            for (a, b) in z.named_pairs() {
                text.push_str(&format!("{a} {b}\n"));
            }
            text.push_str(&format!(
                "{} pairs; refinement stable after stage {}\n",
                z.len(),
                strat.fixpoint_stage()
            ));
            Ok(Outcome::new(
                true,
                text,
                json!({"command": "bisim max", "k": k, "pairs": pairs_json(&z),
                       "stage_sizes": strat.sizes(), "fixpoint_stage": strat.fixpoint_stage()}),
            ))
        }
        BisimCommand::Distinguish {
            left,
            w,
            right,
            v,
            letters,
        } => {
            let (l, r) = (load_model(left)?, load_model(right)?);
            let alpha = alphabet(letters, &[&l, &r])?;
            let f = bisim::distinguishing_formula(&l, w, &r, v, &alpha)?;
            let text = match &f {
                Some(f) => format!("{f}\n"),
                None => format!("{w} and {v} are bisimilar; no formula distinguishes them\n"),
            };
            Ok(Outcome::new(
                f.is_some(),
                text,
                json!({"command": "bisim distinguish", "formula": f.as_ref().map(Formula::to_string),
                       "bisimilar": f.is_none()}),
            ))
        }
    }
}

fn emit(b: &interp::CounterexampleBundle, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::InvalidArgument(format!("cannot create {}: {e}", dir.display())))?;
    let n = b.n;
    write_file(&dir.join(format!("m{n}.json")), &model::save(&b.model_m.model))?;
    write_file(&dir.join(format!("n{n}.json")), &model::save(&b.model_n.model))?;
    let z = RelationSpec { pairs: b.z.clone() };
    write_file(
        &dir.join(format!("z{n}.json")),
        (serde_json::to_string_pretty(&z).expect("json") + "\n").as_bytes(),
    )?;
    write_file(&dir.join(format!("proof{n}.json")), b.refutation.to_json().as_bytes())?;
    let formulas = json!({"phi": b.phi.to_string(), "psi": b.psi.to_string(),
                          "w": b.model_m.point, "v": b.model_n.point});
    write_file(
        &dir.join(format!("formulas{n}.json")),
        (serde_json::to_string_pretty(&formulas).expect("json") + "\n").as_bytes(),
    )
}

fn locality(cli: &Cli, model: &Path, world: &str, formula: &str, max_depth: usize) -> Result<Outcome> {
    let m = load_model(model)?;
    let f = parse(formula)?;
    let expected = semantics::check(&m, world, &f)?;
    let alpha = f.letters();
    let budget = cli.budget.unwrap_or(unravel::DEFAULT_NODE_BUDGET);
    let mut rows = Vec::new();
    let mut text = format!(
        "EXPERIMENT: unraveling depth sweep for {f} at {world} (modal depth {})\n",
        f.modal_depth()
    );
    let mut agrees = Vec::new();
    for l in 0..=max_depth {
        let u = unravel::unravel_with_budget(&m, world, l, budget)?;
        let at_root = semantics::check(&u.model, &u.root, &f)?;
        let stage = bisim::k_bisim(&u.model, &m, &alpha, l)?;
        let linked = stage.contains(&u.root, world);
        agrees.push(at_root == expected);
        text.push_str(&format!(
            "  l = {l}: {} nodes, formula at root {at_root} (point {expected}), {l}-bisimilar {linked}\n",
            u.model.len()
        ));
        rows.push(json!({"l": l, "nodes": u.model.len(), "root_value": at_root,
                         "k_bisimilar": linked}));
    }
    // least l from which every deeper unraveling in the sweep agrees
    let least = (0..=max_depth).find(|&l| agrees[l..].iter().all(|&a| a));
    match least {
        Some(l) => text.push_str(&format!("  least agreeing l: {l}\n")),
        None => text.push_str(&format!("  no agreement up to l = {max_depth}\n")),
    }
    text.push_str("  (observation only; no bound is asserted)\n");
    Ok(Outcome::new(
        true,
        text,
        json!({"command": "experiment locality", "label": "EXPERIMENT",
               "formula": f.to_string(), "world": world, "modal_depth": f.modal_depth(),
               "point_value": expected, "rows": rows, "least_agreeing_l": least}),
    ))
}
