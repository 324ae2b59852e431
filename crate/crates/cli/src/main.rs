use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use constructions::{cfg_to_mlpg, explang_grammar, reconstruct, tm_to_mlpg, CfgGnf};
use lang_l::{drive, parse_program, parse_term, BranchKind, Configuration, StackTracker, Term};
use mlpg::prefix_grammar::{parse_pg, run_ordered, turchin_pair_plain};
use mlpg::{enumerate_language, mlpg_to_text, parse_mlpg, run, EnumBudget, Mlpg, Policy, RunOutcome, Sym};
use supercompiler::{render_dot, render_tree, residualize, unfold, ResidualError};
use whistles::{find_first_pair, turchin_pair_mlpg, Relation, StackTrace};

#[derive(Parser)]
#[command(name = "mlpg-tool", about = "Prefix grammars, stack whistles and supercompilation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Ordered,
    Random,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum RelationArg {
    Turchin,
    Hve,
    Composite,
}

impl From<RelationArg> for Relation {
    fn from(r: RelationArg) -> Self {
        match r {
            RelationArg::Turchin => Relation::Turchin,
            RelationArg::Hve => Relation::Hve,
            RelationArg::Composite => Relation::Composite,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Residual,
    Tree,
    Dot,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a plain prefix grammar, applying the first applicable rule.
    PgRun {
        file: PathBuf,
        /// Number of words in the printed trace.
        #[arg(long, default_value_t = 10)]
        steps: usize,
    },
    /// Run a multi-layer prefix grammar.
    MlpgRun {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "ordered")]
        policy: PolicyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
    /// Enumerate the language of a multi-layer prefix grammar.
    MlpgLang {
        file: PathBuf,
        #[arg(long, default_value_t = 16)]
        max_len: usize,
        #[arg(long, default_value_t = 100_000)]
        max_steps: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Drop states with more letters than this. Only sound when no rule
        /// can shrink a word below the bound before it halts.
        #[arg(long)]
        max_total: Option<usize>,
    },
    /// Find the first related pair on a trace: of a driving path (`.l`), a
    /// prefix grammar (`.pg`) or a multi-layer grammar (anything else).
    Whistle {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "turchin")]
        relation: RelationArg,
        /// Entry configuration for `.l` programs.
        #[arg(long)]
        entry: Option<String>,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, value_enum, default_value = "ordered")]
        policy: PolicyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Supercompile a program from an entry configuration.
    Scp {
        file: PathBuf,
        #[arg(long)]
        entry: String,
        #[arg(long, value_enum, default_value = "composite")]
        whistle: RelationArg,
        #[arg(long, value_enum, default_value = "residual")]
        emit: Emit,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        max_nodes: usize,
    },
    /// Build a grammar from a Turing machine, a GNF grammar or the
    /// exponential-language example.
    Construct {
        #[command(subcommand)]
        what: Construct,
    },
}

#[derive(Subcommand)]
enum Construct {
    Tm {
        file: PathBuf,
        /// Overrides the `input:` line of the machine file.
        #[arg(long)]
        input: Option<String>,
        /// Also run the grammar and print the machine configurations.
        #[arg(long)]
        steps: Option<usize>,
    },
    Cfg {
        file: PathBuf,
        /// Also print the language up to this length.
        #[arg(long)]
        max_len: Option<usize>,
    },
    Explang {
        #[arg(long)]
        max_len: Option<usize>,
    },
}

/// Successful runs that stopped on a budget.
struct Budget;

type Outcome = Result<Option<Budget>>;

fn read(p: &Path) -> Result<String> {
    fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))
}

fn load_mlpg(p: &Path) -> Result<Mlpg> {
    Ok(parse_mlpg(&read(p)?)?)
}

fn policy(p: PolicyArg, seed: u64) -> Policy {
    match p {
        PolicyArg::Ordered => Policy::Ordered,
        PolicyArg::Random => Policy::Random(seed),
        PolicyArg::All => Policy::All,
    }
}

/// Long words are written with exponents for runs, `b^16`.
fn show_word(w: &[Sym]) -> String {
    if w.is_empty() {
        return "Λ".into();
    }
    if w.len() <= 8 {
        return w.concat();
    }
    let mut out = String::new();
    let mut k = 0;
    while k < w.len() {
        let run = w[k..].iter().take_while(|s| **s == w[k]).count();
        out.push_str(&w[k]);
        if run > 1 {
            out.push_str(&format!("^{run}"));
        }
        k += run;
    }
    out
}

fn pg_run(file: &Path, steps: usize) -> Outcome {
    let g = parse_pg(&read(file)?)?;
    println!("{}", run_ordered(&g, steps).render());
    Ok(None)
}

fn mlpg_run(file: &Path, p: PolicyArg, seed: u64, steps: usize) -> Outcome {
    let g = load_mlpg(file)?;
    match run(&g, policy(p, seed), steps) {
        RunOutcome::Trace(s) => {
            let reg = &s.state.reg;
            println!("0: {}", s.words[0].render_grouped(reg));
            for (k, (w, l)) in s.words[1..].iter().zip(&s.log).enumerate() {
                println!("{}: {} ({})", k + 1, w.render_grouped(reg), g.rules[l.rule].name);
            }
            if let Some(out) = &s.halt_output {
                println!("halted: {}", show_word(&out.plain()));
            } else if s.exhausted {
                println!("budget of {steps} steps exhausted");
                return Ok(Some(Budget));
            } else {
                println!("no rule applies");
            }
        }
        RunOutcome::Tree(t) => {
            for (n, r) in t.nodes.iter().zip(&t.rendered) {
                let rule = n.rule.map_or(String::new(), |ri| format!(" ({})", g.rules[ri].name));
                let halt = if n.halted { " halt" } else { "" };
                println!("{}{}{rule}{halt}", "  ".repeat(n.depth), r);
            }
            let outs: Vec<String> = t.halting_outputs().iter().map(|w| show_word(&w.plain())).collect();
            println!("outputs: {}", outs.join(" "));
            if t.exhausted {
                return Ok(Some(Budget));
            }
        }
    }
    Ok(None)
}

fn mlpg_lang(file: &Path, max_len: usize, max_steps: usize, jobs: usize, max_total: Option<usize>) -> Outcome {
    let g = load_mlpg(file)?;
    let mut b = EnumBudget::new(max_len, max_steps);
    b.jobs = jobs.max(1);
    b.max_total = max_total;
    let res = enumerate_language(&g, &b);
    let mut words: Vec<&Vec<Sym>> = res.words.iter().collect();
    words.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    println!("{}", words.iter().map(|w| show_word(w)).collect::<Vec<_>>().join(" "));
    if res.exhausted {
        eprintln!("budget of {max_steps} steps exhausted");
        return Ok(Some(Budget));
    }
    Ok(None)
}

fn whistle(file: &Path, rel: Relation, entry: Option<&str>, steps: usize, p: PolicyArg, seed: u64) -> Outcome {
    let ext = file.extension().and_then(|e| e.to_str()).unwrap_or_default();
    let (lines, hit): (Vec<String>, Option<(usize, String)>) = match ext {
        "l" => {
            let prog = parse_program(&read(file)?)?;
            let entry = entry.ok_or_else(|| anyhow!("--entry is required for programs"))?;
            let mut cfg = Configuration::new(parse_term(&prog, entry)?);
            let mut tr = StackTracker::new();
            let mut words = vec![tr.extract(&prog, &cfg.term, None)];
            let mut terms = vec![cfg.term.clone()];
            while terms.len() <= steps && cfg.term.has_calls() {
                let b = drive(&prog, &cfg)?.pop().expect("at least one branch");
                let BranchKind::Rewrite { step, .. } = &b.kind else { break };
                words.push(tr.extract(&prog, &b.config.term, Some(step)));
                terms.push(b.config.term.clone());
                cfg = b.config;
            }
            let trace = StackTrace::from_words(words, 1);
            let lines = trace.words.iter().zip(&terms).enumerate();
            let lines = lines.map(|(k, (w, t))| format!("{k}: {t}  [{}]", w.render_grouped(&tr.reg))).collect();
            (lines, verdict(&trace, rel, Some(&terms)))
        }
        "pg" => {
            if rel != Relation::Turchin {
                bail!("prefix grammar traces only support the turchin relation");
            }
            let g = parse_pg(&read(file)?)?;
            let t = run_ordered(&g, steps + 1);
            let lines = t.words.iter().enumerate().map(|(k, w)| format!("{k}: {}", show_letters(w))).collect();
            let hit = (1..t.words.len()).find_map(|j| (0..j).find_map(|i| turchin_pair_plain(&t, i, j)));
            let hit = hit.map(|v| {
                let s = |w: &[Sym]| if w.is_empty() { "Λ".to_string() } else { w.concat() };
                (v.j, format!("TURCHIN i={} j={} top={} mid={} ctx={}", v.i, v.j, s(&v.phi), s(&v.psi), s(&v.theta)))
            });
            (lines, hit)
        }
        _ => {
            if rel != Relation::Turchin {
                bail!("grammar traces carry no terms; only the turchin relation applies");
            }
            let g = load_mlpg(file)?;
            let RunOutcome::Trace(s) = run(&g, policy(p, seed), steps) else {
                bail!("the whistle needs a single trace; use --policy ordered or random");
            };
            let lines = s.words.iter().enumerate().map(|(k, w)| format!("{k}: {}", w.render_grouped(&s.state.reg))).collect();
            (lines, verdict(&StackTrace::from_session(&s, &g), rel, None))
        }
    };
    let shown = hit.as_ref().map_or(lines.len(), |(j, _)| j + 1);
    for l in &lines[..shown] {
        println!("{l}");
    }
    match hit {
        Some((_, v)) => {
            println!("{v}");
            Ok(None)
        }
        None => {
            println!("no related pair within {steps} steps");
            Ok(Some(Budget))
        }
    }
}

fn show_letters(w: &[mlpg::prefix_grammar::PlainLetter]) -> String {
    if w.is_empty() {
        "Λ".into()
    } else {
        mlpg::prefix_grammar::plain_string(w)
    }
}

fn verdict(trace: &StackTrace, rel: Relation, terms: Option<&[Term]>) -> Option<(usize, String)> {
    let (i, j) = find_first_pair(trace, rel, terms)?;
    let v = turchin_pair_mlpg(trace, i, j);
    let text = match (rel, v, terms) {
        (Relation::Turchin, Some(v), _) => v.to_string(),
        (Relation::Composite, Some(v), Some(t)) => {
            let s = v.to_string();
            let rest = s.strip_prefix(&format!("TURCHIN i={i} j={j} ")).unwrap_or(&s);
            format!("COMPOSITE i={i} j={j} {} <| {} {rest}", t[i], t[j])
        }
        (_, _, Some(t)) => format!("HVE i={i} j={j} {} <| {}", t[i], t[j]),
        _ => format!("PAIR i={i} j={j}"),
    };
    Some((j, text))
}

fn scp(file: &Path, entry: &str, w: Relation, emit: Emit, out: Option<&Path>, max_nodes: usize) -> Outcome {
    let prog = parse_program(&read(file)?)?;
    let e = parse_term(&prog, entry)?;
    let g = unfold(&prog, &e, w, max_nodes);
    let (text, budget) = match emit {
        Emit::Tree => (render_tree(&g), g.open),
        Emit::Dot => (render_dot(&g), g.open),
        Emit::Residual => match residualize(&g) {
            Ok(r) => {
                let params: Vec<Term> = r.params.iter().map(|p| Term::var(p)).collect();
                (format!("# entry: {}\n{}", r.entry_call(params), r.program), false)
            }
            Err(ResidualError::Open(n)) => {
                eprintln!("node budget of {max_nodes} exhausted; node #{n} is not developed");
                return Ok(Some(Budget));
            }
            Err(e) => return Err(e.into()),
        },
    };
    match out {
        Some(p) => fs::write(p, &text).with_context(|| format!("cannot write {}", p.display()))?,
        None => print!("{text}"),
    }
    if budget {
        eprintln!("node budget of {max_nodes} exhausted");
        return Ok(Some(Budget));
    }
    Ok(None)
}

/// `max_total` must be sound for `g`: no trace may shrink below it before
/// halting with an output of at most `max_len` letters.
fn print_language(g: &Mlpg, max_len: usize, max_total: usize) -> Outcome {
    let mut b = EnumBudget::new(max_len, 5_000_000);
    b.max_total = Some(max_total);
    let res = enumerate_language(g, &b);
    let mut words: Vec<&Vec<Sym>> = res.words.iter().collect();
    words.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    println!("# language: {}", words.iter().map(|w| show_word(w)).collect::<Vec<_>>().join(" "));
    Ok(res.exhausted.then_some(Budget))
}

fn construct(what: &Construct) -> Outcome {
    match what {
        Construct::Tm { file, input, steps } => {
            let (tm, file_input) = constructions::tm::parse_tm(&read(file)?)?;
            let input = match input {
                Some(s) => tm.split_input(s)?,
                None => file_input,
            };
            let g = tm_to_mlpg(&tm, &input)?;
            print!("{}", mlpg_to_text(&g));
            if let Some(n) = steps {
                let RunOutcome::Trace(s) = run(&g, Policy::Ordered, *n) else { unreachable!("ordered runs give a trace") };
                for (k, w) in s.words.iter().enumerate() {
                    let snap = reconstruct(&tm, &s.state.reg, w).ok_or_else(|| anyhow!("word {k} is not a machine configuration"))?;
                    println!("# {k}: {snap}");
                }
                if s.halted {
                    println!("# halted");
                } else if s.exhausted {
                    return Ok(Some(Budget));
                } else {
                    println!("# no transition applies");
                }
            }
            Ok(None)
        }
        Construct::Cfg { file, max_len } => {
            let cfg = CfgGnf::parse(&read(file)?)?;
            let g = cfg_to_mlpg(&cfg)?;
            print!("{}", mlpg_to_text(&g));
            match max_len {
                Some(l) => print_language(&g, *l, 2 * l + 2),
                None => Ok(None),
            }
        }
        Construct::Explang { max_len } => {
            let g = explang_grammar();
            print!("{}", mlpg_to_text(&g));
            match max_len {
                Some(l) => print_language(&g, *l, l + 1),
                None => Ok(None),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::PgRun { file, steps } => pg_run(file, *steps),
        Cmd::MlpgRun { file, policy, seed, steps } => mlpg_run(file, *policy, *seed, *steps),
        Cmd::MlpgLang { file, max_len, max_steps, jobs, max_total } => mlpg_lang(file, *max_len, *max_steps, *jobs, *max_total),
        Cmd::Whistle { file, relation, entry, steps, policy, seed } => {
            whistle(file, (*relation).into(), entry.as_deref(), *steps, *policy, *seed)
        }
        Cmd::Scp { file, entry, whistle, emit, out, max_nodes } => {
            scp(file, entry, (*whistle).into(), *emit, out.as_deref(), *max_nodes)
        }
        Cmd::Construct { what } => construct(what),
    };
    match res {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(Budget)) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
