//! Text format of grammar files.
//!
//! ```text
//! alphabet: a b
//! bounds: 1 2
//! init: [a@0] $ [b@0.1][b@0.1]
//! rule R1 pop(oldest): head a@h => pop ++ [a@h] layer: id
//! rule R2 halt pop(oldest): head a@h $ => pop layer: id
//! rule R3: head b@h => layer: app(h.child#1, "bb")
//! ```
//!
//! Head letters not in the alphabet are letter variables. A trailing `$` in
//! the head requires the head to cover the whole visible layer.

use crate::grammar::{ChainStep, HeadItem, LabelRole, LetterPat, Mlpg, MlpgError, MlpgRule, PopSelector, ReplItem, RuleKind};
use crate::labels::LabelRegistry;
use crate::layer_functions::{ChildSel, LayerFn};
use crate::layered_words::{parse_gword, sym, Sym, UidGen};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SyntaxError {
    #[error("line {line}: {msg}")]
    At { line: usize, msg: String },
    #[error(transparent)]
    Grammar(#[from] MlpgError),
}

fn at(line: usize, msg: impl Into<String>) -> SyntaxError {
    SyntaxError::At { line, msg: msg.into() }
}

pub fn parse_mlpg(text: &str) -> Result<Mlpg, SyntaxError> {
    let mut alphabet: Option<Vec<Sym>> = None;
    let mut bounds = None;
    let mut init_text: Option<(usize, String)> = None;
    let mut rule_lines: Vec<(usize, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        let ln = n + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("alphabet:") {
            alphabet = Some(rest.split_whitespace().map(sym).collect());
        } else if let Some(rest) = line.strip_prefix("bounds:") {
            let v: Result<Vec<usize>, _> = rest.split_whitespace().map(|t| t.parse()).collect();
            match v.as_deref() {
                Ok([a, b]) => bounds = Some((*a, *b)),
                _ => return Err(at(ln, "bounds expects two integers")),
            }
        } else if let Some(rest) = line.strip_prefix("init:") {
            init_text = Some((ln, rest.to_string()));
        } else if line.starts_with("rule ") {
            rule_lines.push((ln, line.to_string()));
        } else {
            return Err(at(ln, format!("unrecognised line: {line}")));
        }
    }
    let alphabet = alphabet.ok_or_else(|| at(0, "missing 'alphabet:' line"))?;
    let (iln, itext) = init_text.ok_or_else(|| at(0, "missing 'init:' line"))?;
    let mut reg = LabelRegistry::new();
    let mut uids = UidGen::new();
    let init = parse_gword(&itext, &mut reg, &mut uids).map_err(|e| at(iln, e.to_string()))?;
    let mut rules = Vec::new();
    for (ln, l) in rule_lines {
        rules.push(parse_rule(&l, &alphabet).map_err(|m| at(ln, m))?);
    }
    Ok(Mlpg::new(alphabet, rules, reg, init, bounds)?)
}

/// `#` starts a comment at the beginning of a line or after whitespace, so
/// selectors like `child#1` survive.
fn strip_comment(raw: &str) -> &str {
    let t = raw.trim();
    if t.starts_with('#') {
        return "";
    }
    match t.find(" #").or_else(|| t.find("\t#")) {
        Some(p) => t[..p].trim(),
        None => t,
    }
}

fn letter_pat(t: &str, alphabet: &[Sym]) -> LetterPat {
    if alphabet.iter().any(|a| &**a == t) {
        LetterPat::Lit(sym(t))
    } else {
        LetterPat::Var(t.to_string())
    }
}

fn parse_rule(line: &str, alphabet: &[Sym]) -> Result<MlpgRule, String> {
    let rest = line.strip_prefix("rule ").expect("checked");
    let (header, body) = rest.split_once(':').ok_or("expected ':' after the rule header")?;
    let mut words = header.split_whitespace();
    let name = words.next().ok_or("missing rule name")?.to_string();
    let mut halt = false;
    let mut kind = RuleKind::Simple;
    let mut pop_anchor = None;
    for w in words {
        if w == "halt" {
            halt = true;
        } else if let Some(p) = w.strip_prefix("pop") {
            let (sel, anchor) = match p.split_once('@') {
                Some((s, a)) => (s, Some(a.to_string())),
                None => (p, None),
            };
            kind = RuleKind::Pop(match sel {
                "" | "(oldest)" => PopSelector::Oldest,
                "(all)" => PopSelector::All,
                _ => return Err(format!("unknown pop selector {sel}")),
            });
            pop_anchor = anchor;
        } else {
            return Err(format!("unknown rule flag {w}"));
        }
    }
    let body = body.trim();
    let body = body.strip_prefix("head").ok_or("expected 'head'")?;
    let (head_txt, rhs) = body.split_once("=>").ok_or("expected '=>'")?;
    let (repl_txt, chain_txt) = match rhs.split_once("layer:") {
        Some((a, b)) => (a, b.trim()),
        None => (rhs, "id"),
    };
    let mut head = Vec::new();
    let mut exact = false;
    for t in head_txt.split_whitespace() {
        if t == "$" {
            exact = true;
            continue;
        }
        let (l, v) = t.split_once('@').ok_or_else(|| format!("head item {t} must be letter@var"))?;
        head.push(HeadItem { letter: letter_pat(l, alphabet), label_var: v.to_string() });
    }
    let (has_pop, replacement) = parse_replacement(repl_txt, alphabet)?;
    if has_pop != matches!(kind, RuleKind::Pop(_)) {
        return Err("'pop' in the replacement must match the pop flag of the rule".into());
    }
    let chain = parse_chain(chain_txt, alphabet)?;
    Ok(MlpgRule { name, head, exact, halt, kind, pop_anchor, replacement, chain })
}

fn parse_replacement(txt: &str, alphabet: &[Sym]) -> Result<(bool, Vec<ReplItem>), String> {
    let mut t = txt.trim();
    let mut has_pop = false;
    if let Some(r) = t.strip_prefix("pop") {
        has_pop = true;
        t = r.trim_start();
        if let Some(r) = t.strip_prefix("++") {
            t = r.trim_start();
        }
    }
    let mut items = Vec::new();
    while !t.is_empty() {
        if t.starts_with("++") {
            t = t[2..].trim_start();
            continue;
        }
        let rest = t.strip_prefix('[').ok_or_else(|| format!("expected '[' at {t}"))?;
        let close = rest.find(']').ok_or("unterminated '['")?;
        for piece in rest[..close].split_whitespace() {
            let (l, role) = piece.split_once('@').ok_or_else(|| format!("replacement item {piece} must be letter@role"))?;
            let mut parts = role.split('.');
            let base = parts.next().unwrap_or_default().to_string();
            let names: Vec<String> = parts.map(|s| s.to_string()).collect();
            let role = if names.is_empty() { LabelRole::Head(base) } else { LabelRole::Fresh { base, names } };
            items.push(ReplItem { letter: letter_pat(l, alphabet), role });
        }
        t = rest[close + 1..].trim_start();
    }
    Ok((has_pop, items))
}

fn parse_payload(p: &str, alphabet: &[Sym]) -> Vec<Sym> {
    if p.contains(char::is_whitespace) {
        p.split_whitespace().map(sym).collect()
    } else if alphabet.iter().any(|a| &**a == p) {
        vec![sym(p)]
    } else {
        p.chars().map(|c| sym(&c.to_string())).collect()
    }
}

fn parse_target(t: &str) -> Result<(Option<String>, ChildSel), String> {
    let t = t.trim();
    let (anchor, sel) = match t.rsplit_once('.') {
        Some((a, s)) if s.starts_with("child") => (Some(a.to_string()), s),
        _ => (None, t),
    };
    let sel = match sel {
        "child_new" => ChildSel::New,
        "child" => ChildSel::Only,
        s => match s.strip_prefix("child#") {
            Some(k) => ChildSel::Nth(k.parse().map_err(|_| format!("bad child index in {t}"))?),
            None => return Err(format!("bad target {t}")),
        },
    };
    Ok((anchor, sel))
}

fn parse_chain(txt: &str, alphabet: &[Sym]) -> Result<Vec<ChainStep>, String> {
    let txt = txt.trim();
    if txt == "id" || txt.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for step in txt.split(';') {
        let step = step.trim();
        if step.is_empty() {
            continue;
        }
        let open = step.find('(').ok_or_else(|| format!("bad layer function {step}"))?;
        let inner = step[open + 1..].strip_suffix(')').ok_or_else(|| format!("bad layer function {step}"))?;
        let op = &step[..open];
        let (target_txt, payload) = if let Some(p) = inner.strip_prefix("child:") {
            ("child_new", Some(p))
        } else {
            match inner.split_once(',') {
                Some((a, b)) => (a, Some(b)),
                None => (inner, None),
            }
        };
        let payload = payload
            .map(|p| {
                let p = p.trim();
                p.strip_prefix('"').and_then(|q| q.strip_suffix('"')).ok_or_else(|| format!("payload {p} must be quoted"))
            })
            .transpose()?
            .map(|p| parse_payload(p, alphabet));
        let (anchor, target) = parse_target(target_txt)?;
        let f = match (op, payload) {
            ("app", Some(payload)) => LayerFn::App { target, payload },
            ("ins", Some(payload)) => LayerFn::Ins { target, payload },
            ("del", None) => LayerFn::Del { target },
            ("copy", None) => LayerFn::Copy { target },
            _ => return Err(format!("bad layer function {step}")),
        };
        out.push(ChainStep { anchor, f });
    }
    Ok(out)
}

fn payload_text(p: &[Sym]) -> String {
    if p.iter().all(|s| s.chars().count() == 1) {
        p.iter().map(|s| &**s).collect()
    } else {
        p.iter().map(|s| &**s).collect::<Vec<_>>().join(" ")
    }
}

fn target_text(anchor: &Option<String>, sel: &ChildSel) -> String {
    match anchor {
        Some(a) => format!("{a}.{sel}"),
        None => sel.to_string(),
    }
}

pub fn rule_to_text(r: &MlpgRule) -> String {
    let mut s = format!("rule {}", r.name);
    if r.halt {
        s.push_str(" halt");
    }
    if let RuleKind::Pop(sel) = r.kind {
        s.push_str(match sel {
            PopSelector::Oldest => " pop(oldest)",
            PopSelector::All => " pop(all)",
        });
        if let Some(a) = &r.pop_anchor {
            s.push_str(&format!("@{a}"));
        }
    }
    s.push_str(": head");
    for h in &r.head {
        s.push_str(&format!(" {}@{}", h.letter, h.label_var));
    }
    if r.exact {
        s.push_str(" $");
    }
    s.push_str(" =>");
    if matches!(r.kind, RuleKind::Pop(_)) {
        s.push_str(" pop");
        if !r.replacement.is_empty() {
            s.push_str(" ++");
        }
    }
    if !r.replacement.is_empty() {
        s.push(' ');
        for it in &r.replacement {
            s.push_str(&format!("[{}@{}]", it.letter, it.role));
        }
    }
    s.push_str(" layer: ");
    if r.chain.is_empty() {
        s.push_str("id");
    } else {
        let steps: Vec<String> = r
            .chain
            .iter()
            .map(|c| match &c.f {
                LayerFn::App { target, payload } => format!("app({}, \"{}\")", target_text(&c.anchor, target), payload_text(payload)),
                LayerFn::Ins { target, payload } => format!("ins({}, \"{}\")", target_text(&c.anchor, target), payload_text(payload)),
                LayerFn::Del { target } => format!("del({})", target_text(&c.anchor, target)),
                LayerFn::Copy { target } => format!("copy({})", target_text(&c.anchor, target)),
            })
            .collect();
        s.push_str(&steps.join("; "));
    }
    s
}

pub fn mlpg_to_text(g: &Mlpg) -> String {
    let mut s = String::new();
    let alpha: Vec<&str> = g.alphabet.iter().map(|a| &**a).collect();
    s.push_str(&format!("alphabet: {}\n", alpha.join(" ")));
    s.push_str(&format!("bounds: {} {}\n", g.k1, g.k2));
    s.push_str(&format!("init: {}\n", g.init.render(&g.registry)));
    for r in &g.rules {
        s.push_str(&rule_to_text(r));
        s.push('\n');
    }
    s
}
