//! Recursive-descent checker for the DOT subset the exporter emits:
//! `digraph ID { stmt* }` with node, edge and attribute statements.

use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Id(String),
    Arrow,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Eq,
    Comma,
    Semi,
}

fn lex(src: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '{' => {
                out.push(Tok::LBrace);
                i += 1
            }
            '}' => {
                out.push(Tok::RBrace);
                i += 1
            }
            '[' => {
                out.push(Tok::LBracket);
                i += 1
            }
            ']' => {
                out.push(Tok::RBracket);
                i += 1
            }
            '=' => {
                out.push(Tok::Eq);
                i += 1
            }
            ',' => {
                out.push(Tok::Comma);
                i += 1
            }
            ';' => {
                out.push(Tok::Semi);
                i += 1
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push(Tok::Arrow);
                i += 2
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err("unterminated string".into()),
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some('\\') => {
                            let n = chars.get(i + 1).ok_or("dangling escape")?;
                            s.push(*n);
                            i += 2;
                        }
                        Some(ch) => {
                            s.push(*ch);
                            i += 1
                        }
                    }
                }
                out.push(Tok::Id(s));
            }
            c if c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || matches!(chars[i], '_' | '.' | '-'))
                {
                    if chars[i] == '-' && chars.get(i + 1) == Some(&'>') {
                        break;
                    }
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let numeric =
                    word.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '.');
                if numeric && word.parse::<f64>().is_err() {
                    return Err(format!("bad numeral `{word}`"));
                }
                out.push(Tok::Id(word));
            }
            other => return Err(format!("unexpected `{other}`")),
        }
    }
    Ok(out)
}

pub type Attrs = Vec<(String, String)>;
pub type Edge = (String, String, Attrs);

#[derive(Debug, Default)]
pub struct DotSummary {
    pub name: String,
    pub nodes: BTreeSet<String>,
    pub edges: Vec<Edge>,
    pub node_attrs: Vec<(String, Attrs)>,
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Result<Tok, String> {
        let t = self.toks.get(self.pos).cloned().ok_or("unexpected end")?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, t: Tok) -> Result<(), String> {
        let got = self.next()?;
        if got == t {
            Ok(())
        } else {
            Err(format!("expected {t:?}, got {got:?}"))
        }
    }

    fn id(&mut self) -> Result<String, String> {
        match self.next()? {
            Tok::Id(s) => Ok(s),
            t => Err(format!("expected identifier, got {t:?}")),
        }
    }

    fn attrs(&mut self) -> Result<Vec<(String, String)>, String> {
        let mut out = Vec::new();
        if self.peek() != Some(&Tok::LBracket) {
            return Ok(out);
        }
        self.next()?;
        while self.peek() != Some(&Tok::RBracket) {
            let k = self.id()?;
            self.expect(Tok::Eq)?;
            let v = self.id()?;
            out.push((k, v));
            if self.peek() == Some(&Tok::Comma) || self.peek() == Some(&Tok::Semi) {
                self.next()?;
            }
        }
        self.expect(Tok::RBracket)?;
        Ok(out)
    }
}

/// Parses `src`, requiring every edge endpoint to be a declared node.
pub fn check(src: &str) -> Result<DotSummary, String> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    if p.id()? != "digraph" {
        return Err("not a digraph".into());
    }
    let mut s = DotSummary {
        name: p.id()?,
        ..Default::default()
    };
    p.expect(Tok::LBrace)?;
    loop {
        match p.peek() {
            Some(Tok::RBrace) => {
                p.next()?;
                break;
            }
            None => return Err("missing closing brace".into()),
            _ => {}
        }
        let head = p.id()?;
        if p.peek() == Some(&Tok::Arrow) {
            p.next()?;
            let dst = p.id()?;
            let attrs = p.attrs()?;
            for end in [&head, &dst] {
                if !s.nodes.contains(end) {
                    return Err(format!("edge endpoint `{end}` not declared"));
                }
            }
            s.edges.push((head, dst, attrs));
        } else if matches!(head.as_str(), "graph" | "node" | "edge") {
            p.attrs()?;
        } else {
            let attrs = p.attrs()?;
            if !s.nodes.insert(head.clone()) {
                return Err(format!("node `{head}` declared twice"));
            }
            s.node_attrs.push((head, attrs));
        }
        if p.peek() == Some(&Tok::Semi) {
            p.next()?;
        }
    }
    if p.pos != p.toks.len() {
        return Err("trailing tokens".into());
    }
    Ok(s)
}
