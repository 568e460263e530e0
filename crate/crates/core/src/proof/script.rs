//! Proof script text format.
//!
//! ```text
//! lemma A4
//! 1. [m]([m]F <-> F)  ; DSL1 m
//! 2. ...              ; MP 1 2
//! qed
//! ```

use crate::parse::parse_temporal;

use super::{Justification, ProofError, ProofLine, ProofScript};

fn parse_justification(text: &str, line: usize) -> Result<Justification, ProofError> {
    let mut toks = text.split_whitespace().peekable();
    let err = |msg: &str| ProofError::Parse {
        line,
        msg: msg.to_string(),
    };
    let mut head = toks.next().ok_or_else(|| err("missing justification"))?;
    if head == "axiom" || head == "lemma" || head == "rule" {
        head = toks
            .next()
            .ok_or_else(|| err("missing name after keyword"))?;
    }
    match head {
        "hyp" | "taut" if toks.peek().is_some() => {
            Err(err(&format!("`{head}` takes no arguments")))
        }
        "hyp" => Ok(Justification::Hyp),
        "taut" => Ok(Justification::Taut),
        name => {
            let mut premises = Vec::new();
            let mut inst = Vec::new();
            for t in toks {
                match t.parse::<usize>() {
                    Ok(n) if inst.is_empty() => premises.push(n),
                    Ok(_) => return Err(err("premise numbers must precede instantiation tokens")),
                    Err(_) => inst.push(t.to_string()),
                }
            }
            Ok(Justification::Cite {
                name: name.to_string(),
                premises,
                inst,
            })
        }
    }
}

/// Parses every `lemma ... qed` block of a file, in order.
pub fn parse_scripts(text: &str) -> Result<Vec<ProofScript>, ProofError> {
    let mut out = Vec::new();
    let mut current: Option<ProofScript> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        let err = |msg: String| ProofError::Parse { line, msg };
        if let Some(name) = content.strip_prefix("lemma ") {
            if current.is_some() {
                return Err(err("`lemma` before `qed`".into()));
            }
            current = Some(ProofScript {
                name: name.trim().to_string(),
                lines: Vec::new(),
            });
            continue;
        }
        let Some(script) = current.as_mut() else {
            return Err(err(format!("expected `lemma <name>`, found `{content}`")));
        };
        if content == "qed" {
            out.push(current.take().unwrap());
            continue;
        }
        let (num, rest) = content
            .split_once('.')
            .ok_or_else(|| err("expected `<n>. <formula> ; <justification>`".into()))?;
        let number: usize = num
            .trim()
            .parse()
            .map_err(|_| err(format!("bad line number `{num}`")))?;
        if number != script.lines.len() + 1 {
            return Err(err(format!("line number {number} out of sequence")));
        }
        let (formula, just) = rest
            .rsplit_once(';')
            .ok_or_else(|| err("missing `;` before justification".into()))?;
        let formula = parse_temporal(formula.trim()).map_err(|e| err(e.to_string()))?;
        let justification = parse_justification(just, line)?;
        script.lines.push(ProofLine {
            number,
            formula,
            justification,
            source_line: line,
        });
    }
    if let Some(s) = current {
        return Err(ProofError::Parse {
            line: text.lines().count(),
            msg: format!("lemma {} lacks `qed`", s.name),
        });
    }
    Ok(out)
}

pub fn render_script(s: &ProofScript) -> String {
    let mut out = format!("lemma {}\n", s.name);
    for l in &s.lines {
        out.push_str(&format!(
            "{}. {} ; {}\n",
            l.number,
            l.formula.render_with_stable_sugar(),
            l.justification
        ));
    }
    out.push_str("qed\n");
    out
}
