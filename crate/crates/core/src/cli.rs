//! Command dispatch for the `aecw` binary.
//!
//! Every command produces one JSON document with `schema: 1`, an echo of the
//! command, the seed and the result. Nothing time- or machine-dependent goes
//! into it unless `--timings` is passed, so reruns diff clean.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::axioms::{
    check_ap, check_cip, check_cip_all, check_gap_config, check_grp, check_jep, check_lrp, check_trp,
    config_arrows, config_gluing, robinson_diagram, AxiomVerdict, GlobalConfig,
};
use crate::construct::{diagram_expansion, DEFAULT_BUDGET};
use crate::dsl::{self, DslError, FragmentDecl, Workspace};
use crate::error::Error;
use crate::fragment::AecFragment;
use crate::generate::Profile;
use crate::harness::{run_law, Law};
use crate::theory::{all_closed_theories, connection_partition, max_theories, ClosedTheory, TheoryPartition};
use crate::types::{canonical_map, g_types, type_space};

pub const SCHEMA: u32 = 1;

/// Spans examined by `check --axiom gap` and arrows examined by `glue-check`.
const GLUE_CAP: usize = 2_000;

#[derive(Debug, Parser, Serialize)]
#[command(name = "aecw", version, about = "Workbench for finite presentations of abstract elementary classes")]
pub struct Cli {
    /// Workspace file in the aecw format.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Structure budget for pullbacks and other enumerations.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
    /// Load fragments that fail validation.
    #[arg(long, global = true)]
    pub allow_invalid: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 1)]
    pub lambda: usize,
    /// Add wall-clock timings to the report.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub timings: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axiom {
    Ap,
    Jep,
    Lrp,
    Robinson,
    Gap,
    Trp,
    Grp,
    Cip,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProfileArgs {
    #[arg(long, default_value_t = Profile::default().max_structures)]
    pub max_structures: usize,
    #[arg(long, default_value_t = Profile::default().max_size)]
    pub max_size: usize,
    #[arg(long, default_value_t = Profile::default().max_symbols)]
    pub max_symbols: usize,
    #[arg(long, default_value_t = Profile::default().arity_cap)]
    pub arity_cap: usize,
}

impl ProfileArgs {
    fn profile(&self) -> Profile {
        Profile {
            max_structures: self.max_structures,
            max_size: self.max_size,
            max_symbols: self.max_symbols,
            arity_cap: self.arity_cap,
        }
    }
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Check the AEC axioms on fragments.
    Validate {
        #[arg(long)]
        fragment: Option<String>,
    },
    /// The connection partition and closed theories of a fragment.
    Theories {
        #[arg(long)]
        fragment: Option<String>,
    },
    /// Arrows of cat(K) between two members, or counts for every pair.
    Embeddings {
        #[arg(long)]
        fragment: Option<String>,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
    },
    /// The pullback of a config.
    Pullback {
        #[arg(long)]
        config: Option<String>,
    },
    /// The diagram expansion by new constants.
    Expand {
        #[arg(long)]
        fragment: Option<String>,
        #[arg(long, value_delimiter = ',')]
        constants: Vec<String>,
    },
    /// Galois types over a structure.
    Types {
        #[arg(long)]
        fragment: Option<String>,
        #[arg(long)]
        point: String,
        #[arg(long, value_delimiter = ',')]
        index: Vec<String>,
    },
    /// The λ-topology on the types and the canonical map into the limit.
    Topology {
        #[arg(long)]
        fragment: Option<String>,
        #[arg(long)]
        point: String,
        #[arg(long, value_delimiter = ',')]
        index: Vec<String>,
    },
    /// Decide one axiom.
    Check {
        #[arg(long, value_enum)]
        axiom: Axiom,
        #[arg(long)]
        fragment: Option<String>,
        #[arg(long)]
        config: Option<String>,
        /// Two theory names for `cip`; all pairs when omitted.
        #[arg(long, value_delimiter = ',')]
        theories: Vec<String>,
        /// Members for `robinson`.
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
    },
    /// Run an implication law over generated spans.
    Harness {
        #[arg(long, value_enum)]
        law: Law,
        #[arg(long, default_value_t = 50)]
        seeds: usize,
        #[command(flatten)]
        profile: ProfileArgs,
    },
    /// Category laws of the gluing over a config's fragments.
    GlueCheck {
        #[arg(long)]
        config: Option<String>,
    },
    /// Print a generated workspace.
    Generate {
        #[command(flatten)]
        profile: ProfileArgs,
    },
}

/// A failure with its exit code: 2 for bad input, 3 for an exhausted budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    #[serde(skip)]
    pub code: i32,
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::SizeBoundExceeded { .. }) { 3 } else { 2 };
        let kind = format!("{e:?}").split(['(', ' ', '{']).next().unwrap_or("Error").to_string();
        Failure { code, kind, message: e.to_string(), detail: None }
    }
}

impl From<DslError> for Failure {
    fn from(e: DslError) -> Self {
        let detail = serde_json::to_value(&e).ok();
        let kind = detail.as_ref().and_then(|d| d["kind"].as_str()).unwrap_or("dsl").to_string();
        Failure { code: 2, kind, message: e.to_string(), detail }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: 2, kind: "input".into(), message: message.into(), detail: None }
}

type Outcome = Result<(Value, bool), Failure>;

/// What a command printed and the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub text: String,
    pub code: i32,
}

pub fn run(cli: &Cli) -> Output {
    let start = Instant::now();
    let outcome = dispatch(cli);
    let mut doc = json!({ "schema": SCHEMA, "command": &cli.command, "seed": cli.seed });
    if let Some(input) = &cli.input {
        doc["input"] = json!(input.display().to_string());
    }
    let code = match outcome {
        Ok((result, holds)) => {
            doc["result"] = result;
            if holds {
                0
            } else {
                1
            }
        }
        Err(f) => {
            doc["error"] = serde_json::to_value(&f).expect("failures serialize");
            f.code
        }
    };
    if cli.timings {
        doc["timings"] = json!({ "total_ms": start.elapsed().as_secs_f64() * 1e3 });
    }
    let text = match cli.format {
        Format::Json => serde_json::to_string_pretty(&doc).expect("reports serialize") + "\n",
        // a generated workspace in text form is the workspace file itself
        Format::Text if matches!(cli.command, Command::Generate { .. }) && code == 0 => {
            doc["result"]["dsl"].as_str().unwrap_or_default().to_string()
        }
        Format::Text => render_text(&doc),
    };
    Output { text, code }
}

fn workspace(cli: &Cli) -> Result<Workspace, Failure> {
    let path = cli.input.as_ref().ok_or_else(|| input_error("this command needs --input FILE"))?;
    let text = std::fs::read_to_string(path).map_err(|e| input_error(format!("cannot read {}: {e}", path.display())))?;
    Ok(dsl::load(&text, cli.allow_invalid)?)
}

/// The named entry, or the only one when no name is given.
fn pick<'a, T>(map: &'a BTreeMap<String, T>, name: &Option<String>, what: &str) -> Result<(&'a String, &'a T), Failure> {
    match name {
        Some(n) => map.get_key_value(n).ok_or_else(|| input_error(format!("no {what} named `{n}`"))),
        None if map.len() == 1 => Ok(map.iter().next().unwrap()),
        None => Err(input_error(format!("the workspace has {} {what}s; name one with --{what}", map.len()))),
    }
}

fn member(f: &AecFragment, name: &str) -> Result<usize, Failure> {
    f.index_of(name).ok_or_else(|| input_error(format!("the fragment has no member `{name}`")))
}

fn verdict(v: AxiomVerdict) -> Outcome {
    let holds = v.holds;
    Ok((serde_json::to_value(v).expect("verdicts serialize"), holds))
}

fn named_partition(f: &AecFragment, p: &TheoryPartition) -> Vec<Vec<String>> {
    p.components.iter().map(|c| c.iter().map(|&i| f.name(i).to_string()).collect()).collect()
}

fn theory_members(f: &AecFragment, p: &TheoryPartition, t: &ClosedTheory) -> Vec<String> {
    t.members(p).into_iter().map(|i| f.name(i).to_string()).collect()
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Harness { law, seeds, profile } => {
            let r = run_law(*law, cli.seed, *seeds, &profile.profile(), cli.budget)?;
            let holds = r.violations.is_empty();
            Ok((serde_json::to_value(r).expect("reports serialize"), holds))
        }
        Command::Generate { profile } => {
            let ws = dsl::generate(cli.seed, &profile.profile())?;
            Ok((json!({ "dsl": dsl::print(&ws) }), true))
        }
        command => {
            let ws = workspace(cli)?;
            with_workspace(cli, &ws, command)
        }
    }
}

fn with_workspace(cli: &Cli, ws: &Workspace, command: &Command) -> Outcome {
    match command {
        Command::Validate { fragment } => {
            let names: Vec<&String> = match fragment {
                Some(_) => vec![pick(&ws.fragments, fragment, "fragment")?.0],
                None => ws.fragments.keys().collect(),
            };
            let reports: BTreeMap<&String, _> =
                names.into_iter().map(|n| (n, ws.fragments[n].fragment.validate())).collect();
            Ok((serde_json::to_value(reports).expect("reports serialize"), true))
        }
        Command::Theories { fragment } => {
            let (_, d) = pick(&ws.fragments, fragment, "fragment")?;
            let f = &d.fragment;
            let p = connection_partition(f);
            let maximal: Vec<Vec<String>> = max_theories(&p).iter().map(|t| theory_members(f, &p, t)).collect();
            Ok((
                json!({
                    "components": named_partition(f, &p),
                    "max_theories": maximal,
                    "closed_theories": all_closed_theories(&p).len(),
                }),
                true,
            ))
        }
        Command::Embeddings { fragment, from, to } => {
            let (_, d) = pick(&ws.fragments, fragment, "fragment")?;
            let f = &d.fragment;
            match (from, to) {
                (Some(a), Some(b)) => {
                    let arrows: Vec<Vec<usize>> =
                        f.k_arrows(member(f, a)?, member(f, b)?).into_iter().map(|k| k.map.map).collect();
                    Ok((json!({ "from": a, "to": b, "arrows": arrows }), true))
                }
                (None, None) => {
                    let counts: Vec<Vec<usize>> =
                        (0..f.len()).map(|a| (0..f.len()).map(|b| f.k_arrows(a, b).len()).collect()).collect();
                    Ok((json!({ "members": f.names(), "arrow_counts": counts }), true))
                }
                _ => Err(input_error("give both --from and --to, or neither")),
            }
        }
        Command::Pullback { config } => {
            let (name, _) = pick(&ws.configs, config, "config")?;
            let g = GlobalConfig::new(ws.config(name)?, cli.budget)?;
            let f = &g.pullback.fragment;
            let report = f.validate();
            let mut out = Workspace::default();
            let lang = format!("{name}_apex");
            out.languages.insert(lang.clone(), f.lang().clone());
            out.fragments.insert(format!("{name}_pullback"), FragmentDecl { lang, fragment: f.clone() });
            let projections: Vec<(usize, usize)> = (0..f.len())
                .map(|q| (g.pullback.proj_left.image_index(q), g.pullback.proj_right.image_index(q)))
                .collect();
            Ok((
                json!({
                    "structures": f.len(),
                    "ls_number": report.ls_number,
                    "validation": report,
                    "projections": projections,
                    "dsl": dsl::print(&out),
                }),
                true,
            ))
        }
        Command::Expand { fragment, constants } => {
            let (name, d) = pick(&ws.fragments, fragment, "fragment")?;
            let e = diagram_expansion(&d.fragment, constants)?;
            let report = e.fragment.validate();
            let mut out = Workspace::default();
            let lang = format!("{}_{}", d.lang, constants.join("_"));
            out.languages.insert(lang.clone(), e.fragment.lang().clone());
            out.fragments.insert(format!("{name}_expanded"), FragmentDecl { lang, fragment: e.fragment.clone() });
            Ok((
                json!({
                    "structures": e.fragment.len(),
                    "ls_number": report.ls_number,
                    "validation": report,
                    "entries": e.entries,
                    "dsl": dsl::print(&out),
                }),
                true,
            ))
        }
        Command::Types { fragment, point, index } => {
            let (_, d) = pick(&ws.fragments, fragment, "fragment")?;
            let m = ws.structure(point)?;
            let t = g_types(&d.fragment, m, index)?;
            Ok((json!({ "triples": t.class.len(), "count": t.len(), "types": t.types }), true))
        }
        Command::Topology { fragment, point, index } => {
            let (_, d) = pick(&ws.fragments, fragment, "fragment")?;
            let m = ws.structure(point)?;
            let space = type_space(g_types(&d.fragment, m, index)?, cli.lambda)?;
            let initial = space.initial_neighbourhoods() == space.neighbourhoods;
            let can = canonical_map(&space, cli.budget)?;
            Ok((
                json!({
                    "lambda": cli.lambda,
                    "points": space.len(),
                    "discrete": space.is_discrete(),
                    "indiscrete": space.is_indiscrete(),
                    "basis": space.basis,
                    "neighbourhoods": space.neighbourhoods,
                    "open_count": space.open_count(),
                    "equals_initial_topology": initial,
                    "canonical_map": can,
                }),
                true,
            ))
        }
        Command::Check { axiom, fragment, config, theories, from, to } => {
            check(cli, ws, *axiom, fragment, config, theories, from.as_deref().zip(to.as_deref()))
        }
        Command::GlueCheck { config } => {
            let (name, _) = pick(&ws.configs, config, "config")?;
            let g = GlobalConfig::new(ws.config(name)?, cli.budget)?;
            glue_laws(&g)
        }
        Command::Harness { .. } | Command::Generate { .. } => unreachable!("handled without a workspace"),
    }
}

fn check(
    cli: &Cli,
    ws: &Workspace,
    axiom: Axiom,
    fragment: &Option<String>,
    config: &Option<String>,
    theories: &[String],
    ends: Option<(&str, &str)>,
) -> Outcome {
    let frag = || pick(&ws.fragments, fragment, "fragment").map(|(_, d)| d.fragment.clone());
    let global = || -> Result<GlobalConfig, Failure> {
        let (name, _) = pick(&ws.configs, config, "config")?;
        Ok(GlobalConfig::new(ws.config(name)?, cli.budget)?)
    };
    match axiom {
        Axiom::Ap => verdict(check_ap(frag()?.as_ref())),
        Axiom::Jep => verdict(check_jep(frag()?.as_ref())),
        Axiom::Lrp => verdict(check_lrp(frag()?.as_ref())),
        Axiom::Robinson => {
            let f = frag()?;
            let (a, b) = ends.ok_or_else(|| input_error("robinson needs --from and --to"))?;
            let r = robinson_diagram(&f, member(&f, a)?, member(&f, b)?)?;
            let found = r.arrow.is_some();
            Ok((serde_json::to_value(r).expect("results serialize"), found))
        }
        Axiom::Gap => verdict(check_gap_config(&global()?, GLUE_CAP)?),
        Axiom::Trp => verdict(check_trp(&global()?)),
        Axiom::Grp => verdict(check_grp(&global()?)),
        Axiom::Cip => {
            let g = global()?;
            match theories {
                [] => verdict(check_cip_all(&g, cli.seed)),
                [t0, t1] => {
                    let (f0, a) = ws.theory(t0)?;
                    let (f1, b) = ws.theory(t1)?;
                    let (c, _) = pick(&ws.configs, config, "config")?;
                    let cfg = &ws.configs[c];
                    if f0 != cfg.left || f1 != cfg.right {
                        return Err(input_error(format!(
                            "the theories must be over `{}` and `{}`, in that order",
                            cfg.left, cfg.right
                        )));
                    }
                    verdict(check_cip(&g, &a, &b))
                }
                _ => Err(input_error("--theories takes exactly two names")),
            }
        }
    }
}

/// Identity and associativity in the gluing over `[K, K0, K1, K']`.
fn glue_laws(g: &GlobalConfig) -> Outcome {
    let arrows = config_arrows(g, GLUE_CAP)?;
    let r = config_gluing(g).check_laws(&arrows, GLUE_CAP * 10)?;
    let holds = r.holds();
    let mut v = serde_json::to_value(r).expect("reports serialize");
    v["fragments"] = json!(["base", "left", "right", "pullback"]);
    Ok((v, holds))
}

/// Indented `key: value` rendering of a report. Multi-line strings (DSL
/// output) are printed verbatim.
pub fn render_text(v: &Value) -> String {
    fn go(out: &mut String, v: &Value, indent: usize) {
        let pad = "  ".repeat(indent);
        match v {
            Value::Object(map) => {
                for (k, x) in map {
                    match x {
                        Value::Object(_) => {
                            out.push_str(&format!("{pad}{k}:\n"));
                            go(out, x, indent + 1);
                        }
                        Value::Array(items) if items.iter().any(|i| i.is_object()) => {
                            out.push_str(&format!("{pad}{k}:\n"));
                            go(out, x, indent + 1);
                        }
                        Value::String(s) if s.contains('\n') => {
                            out.push_str(&format!("{pad}{k}:\n"));
                            for line in s.lines() {
                                out.push_str(&format!("{pad}  {line}\n"));
                            }
                        }
                        _ => out.push_str(&format!("{pad}{k}: {}\n", scalar(x))),
                    }
                }
            }
            Value::Array(items) => {
                for (i, x) in items.iter().enumerate() {
                    out.push_str(&format!("{pad}- [{i}]\n"));
                    go(out, x, indent + 1);
                }
            }
            other => out.push_str(&format!("{pad}{}\n", scalar(other))),
        }
    }
    fn scalar(v: &Value) -> String {
        match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        }
    }
    let mut out = String::new();
    go(&mut out, v, 0);
    out
}

/// Parses arguments, runs and prints; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let out = run(&cli);
    print!("{}", out.text);
    out.code
}
