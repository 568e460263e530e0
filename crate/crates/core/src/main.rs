use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use dstl::checker::{check_spec, CheckOptions};
use dstl::computation::{causal_closure, concurrent, Computation, DEFAULT_CAP};
use dstl::lab::{fuzz, rule_names, GenParams, Rule, RuleReport};
use dstl::parse::parse_spec;
use dstl::proof::{check_proof, parse_scripts, LemmaLibrary, ProofScript};

/// Prints a line; a closed stdout (as under `| head`) ends the process.
macro_rules! out {
    ($($arg:tt)*) => {
        if writeln!(std::io::stdout(), $($arg)*).is_err() {
            std::process::exit(0);
        }
    };
}

/// Version of the `--json` output layout.
const SCHEMA_VERSION: u32 = 1;

const EXIT_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_CAP: u8 = 3;

#[derive(Parser)]
#[command(
    name = "dstl",
    version,
    about = "Model checker and proof checker for distributed state temporal logic"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a model and print its causal structure.
    Validate { model: PathBuf },
    /// Check every formula of a spec file against a model.
    Check {
        model: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        /// Refuse models with more states than this.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Check proof scripts. The bundled lemma library is preloaded unless
    /// the inputs define lemmas of the same names.
    Prove {
        #[arg(required = true)]
        scripts: Vec<PathBuf>,
        /// Extra lemma file, checked and loaded before the scripts.
        #[arg(long)]
        lib: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Fuzz one rule, or `all`, on random models.
    Fuzz {
        rule: String,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn read(path: &Path) -> Result<String, ExitCode> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_INPUT)
    })
}

fn load_model(path: &Path) -> Result<Computation, ExitCode> {
    Computation::from_text(&read(path)?).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_INPUT)
    })
}

fn init_pool(jobs: usize) {
    // Only fails when a pool already exists, which is harmless.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build_global();
}

fn validate(path: &Path) -> Result<ExitCode, ExitCode> {
    let c = load_model(path)?;
    out!(
        "valid: components={} states={} messages={}",
        c.components().len(),
        c.num_states(),
        c.messages().len()
    );
    for (k, name) in c.components().iter().enumerate() {
        out!("  {name}: states={}", c.len(k));
    }
    let rel = causal_closure(&c);
    let states: Vec<_> = c.states().collect();
    let mut conc = 0;
    for (i, &s) in states.iter().enumerate() {
        conc += states[i + 1..]
            .iter()
            .filter(|&&t| concurrent(&c, s, t))
            .count();
    }
    out!(
        "R*: pairs={} (reflexive included) concurrent_pairs={conc}",
        rel.pair_count()
    );
    Ok(ExitCode::SUCCESS)
}

fn check_cmd(
    model: &Path,
    spec: &Path,
    cap: usize,
    as_json: bool,
    jobs: usize,
) -> Result<ExitCode, ExitCode> {
    let c = load_model(model)?;
    let doc = parse_spec(&read(spec)?, Some(c.components())).map_err(|(line, e)| {
        eprintln!("error: {}:{line}: {e}", spec.display());
        ExitCode::from(EXIT_INPUT)
    })?;
    init_pool(jobs);
    let report = check_spec(&c, &doc, CheckOptions { cap, jobs }).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_CAP)
    })?;
    let ds = |d: Option<dstl::computation::DistributedState>| d.map(|d| d.display(&c));
    if as_json {
        let results: Vec<_> = report
            .entries
            .iter()
            .map(|(f, v)| {
                json!({
                    "formula": f.to_string(),
                    "operator": v.operator.keyword(),
                    "holds": v.holds,
                    "failing_ds": ds(v.failing_ds),
                    "witness_ds": ds(v.witness_ds),
                })
            })
            .collect();
        let out = json!({ "schema_version": SCHEMA_VERSION, "model": model.display().to_string(), "results": results });
        out!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        for (f, v) in &report.entries {
            match (v.holds, ds(v.failing_ds)) {
                (true, _) => out!("M satisfies {f}"),
                (false, Some(d)) => out!("M does not satisfy {f}: fails at {{{d}}}"),
                (false, None) => out!("M does not satisfy {f}"),
            }
        }
    }
    Ok(if report.all_hold() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    })
}

fn parse_file(path: &Path) -> Result<Vec<ProofScript>, ExitCode> {
    parse_scripts(&read(path)?).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_INPUT)
    })
}

fn prove(paths: &[PathBuf], lib_path: Option<&Path>, as_json: bool) -> Result<ExitCode, ExitCode> {
    let mut files = Vec::new();
    for p in paths {
        files.push((p, parse_file(p)?));
    }
    let input_names: BTreeSet<&str> = files
        .iter()
        .flat_map(|(_, s)| s.iter().map(|s| s.name.as_str()))
        .collect();
    let bundled = LemmaLibrary::bundled();
    let mut lib = if bundled.names().iter().any(|n| input_names.contains(n)) {
        LemmaLibrary::new()
    } else {
        bundled
    };
    if let Some(p) = lib_path {
        for s in parse_file(p)? {
            if let Err(e) = lib.register(s) {
                eprintln!("error: {}: {e}", p.display());
                return Err(ExitCode::from(EXIT_FAILED));
            }
        }
    }
    let mut results = Vec::new();
    let mut ok = true;
    for (path, scripts) in files {
        for s in scripts {
            let outcome = check_proof(&s, &lib);
            let entry = match &outcome {
                Ok(t) => {
                    if !as_json {
                        out!(
                            "{}: {} checks: {}",
                            path.display(),
                            s.name,
                            t.conclusion.render_with_stable_sugar()
                        );
                    }
                    json!({ "file": path.display().to_string(), "lemma": s.name, "ok": true,
                            "level": t.level, "conclusion": t.conclusion.to_string() })
                }
                Err(e) => {
                    ok = false;
                    if !as_json {
                        out!("{}: {e}", path.display());
                    }
                    json!({ "file": path.display().to_string(), "lemma": s.name, "ok": false,
                            "line": e.line_number(), "error": e.to_string() })
                }
            };
            if as_json {
                results.push(entry);
            }
            if outcome.is_ok() {
                if let Err(e) = lib.register(s) {
                    ok = false;
                    eprintln!("{}: {e}", path.display());
                }
            }
        }
    }
    if as_json {
        let out = json!({ "schema_version": SCHEMA_VERSION, "scripts": results });
        out!("{}", serde_json::to_string_pretty(&out).unwrap());
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    })
}

fn fuzz_cmd(
    rule: &str,
    trials: usize,
    seed: u64,
    as_json: bool,
    jobs: usize,
) -> Result<ExitCode, ExitCode> {
    let names = if rule == "all" {
        rule_names()
    } else {
        vec![rule.to_string()]
    };
    let mut rules = Vec::new();
    for n in &names {
        rules.push(Rule::resolve(n).map_err(|e| {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        })?);
    }
    init_pool(jobs);
    let params = GenParams {
        seed,
        ..GenParams::default()
    };
    let mut reports: Vec<RuleReport> = Vec::new();
    for r in &rules {
        let rep = fuzz(r, trials, &params);
        if !as_json {
            let pct = 100.0 * rep.non_vacuous as f64 / rep.trials.max(1) as f64;
            let mut line = format!(
                "{}: {} trials, {} non-vacuous ({pct:.1}%), {} violations",
                rep.rule, rep.trials, rep.non_vacuous, rep.violations
            );
            if rep.expected_invalid() {
                line.push_str(" [expected invalid]");
            }
            if !rep.corpus_hits.is_empty() {
                line.push_str(&format!(", corpus hits: {}", rep.corpus_hits.join(" ")));
            }
            if !rep.coverage_ok() {
                line.push_str(" [insufficient coverage]");
            }
            out!("{line}");
            if let Some(cx) = &rep.counterexample {
                out!(
                    "  counterexample (trial {}): {} => {}",
                    cx.trial,
                    cx.premises.join(", "),
                    cx.conclusion
                );
                for l in cx.model.lines() {
                    out!("    {l}");
                }
            }
        }
        reports.push(rep);
    }
    let ok = reports.iter().all(RuleReport::as_expected);
    if as_json {
        let out = json!({ "schema_version": SCHEMA_VERSION, "params": params, "rules": reports, "ok": ok });
        out!("{}", serde_json::to_string_pretty(&out).unwrap());
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { model } => validate(model),
        Command::Check {
            model,
            spec,
            cap,
            json,
            jobs,
        } => check_cmd(model, spec, *cap, *json, *jobs),
        Command::Prove { scripts, lib, json } => prove(scripts, lib.as_deref(), *json),
        Command::Fuzz {
            rule,
            trials,
            seed,
            json,
            jobs,
        } => fuzz_cmd(rule, *trials, *seed, *json, *jobs),
    };
    result.unwrap_or_else(|code| code)
}
