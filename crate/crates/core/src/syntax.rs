//! Formulas of the weakly aggregative modal language: abstract syntax,
//! the ASCII concrete grammar, minimal-parenthesis printing, structural
//! metrics and a canonical enumerator used by the test oracles.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! iff     := implies ( "<->" iff )?
//! implies := or ( "->" implies )?
//! or      := and ( "|" and )*
//! and     := unary ( "&" unary )*
//! unary   := "~" unary | "box" unary | "dia" unary | atom
//! atom    := letter | "true" | "false" | "(" iff ")"
//! letter  := [a-z][a-z0-9_]*
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Letter(String),
    Top,
    Bottom,
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    /// Diagonal box: every successor tuple contains a world satisfying the argument.
    Box(Box<Formula>),
    /// Dual diagonal diamond: some successor tuple consists only of worlds
    /// satisfying the argument. Primitive, not sugar for `~box~`.
    Diamond(Box<Formula>),
}

impl Formula {
    pub fn letter(name: impl Into<String>) -> Formula {
        Formula::Letter(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn boxed(f: Formula) -> Formula {
        Formula::Box(Box::new(f))
    }

    pub fn diamond(f: Formula) -> Formula {
        Formula::Diamond(Box::new(f))
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().reduce(Formula::and).unwrap_or(Formula::Top)
    }

    /// Left-nested disjunction; `false` when empty.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().reduce(Formula::or).unwrap_or(Formula::Bottom)
    }

    /// Maximum nesting of `box`/`dia`.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Letter(_) | Formula::Top | Formula::Bottom => 0,
            Formula::Not(a) => a.modal_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.modal_depth().max(b.modal_depth())
            }
            Formula::Box(a) | Formula::Diamond(a) => a.modal_depth() + 1,
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Letter(_) | Formula::Top | Formula::Bottom => 1,
            Formula::Not(a) | Formula::Box(a) | Formula::Diamond(a) => 1 + a.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    pub fn letters(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_letters(&mut out);
        out
    }

    fn collect_letters(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Letter(p) => {
                out.insert(p.clone());
            }
            Formula::Top | Formula::Bottom => {}
            Formula::Not(a) | Formula::Box(a) | Formula::Diamond(a) => a.collect_letters(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_letters(out);
                b.collect_letters(out);
            }
        }
    }

    /// Replaces letters by formulas; letters outside the map are kept.
    pub fn substitute(&self, map: &std::collections::BTreeMap<String, Formula>) -> Formula {
        match self {
            Formula::Letter(p) => map.get(p).cloned().unwrap_or_else(|| self.clone()),
            Formula::Top | Formula::Bottom => self.clone(),
            Formula::Not(a) => Formula::not(a.substitute(map)),
            Formula::Box(a) => Formula::boxed(a.substitute(map)),
            Formula::Diamond(a) => Formula::diamond(a.substitute(map)),
            Formula::And(a, b) => Formula::and(a.substitute(map), b.substitute(map)),
            Formula::Or(a, b) => Formula::or(a.substitute(map), b.substitute(map)),
            Formula::Implies(a, b) => Formula::implies(a.substitute(map), b.substitute(map)),
            Formula::Iff(a, b) => Formula::iff(a.substitute(map), b.substitute(map)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            _ => 5,
        }
    }
}

pub fn parse(text: &str) -> Result<Formula> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let f = parser.iff()?;
    match parser.peek() {
        None => Ok(f),
        Some((tok, at)) => Err(Error::Syntax {
            position: at,
            message: format!("unexpected {tok}"),
        }),
    }
}

pub fn print(f: &Formula) -> String {
    f.to_string()
}

pub fn is_letter_id(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| matches!(c, 'a'..='z' | '0'..='9' | '_'))
        && !matches!(s, "box" | "dia" | "true" | "false")
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Left-associative operators need a strictly tighter right operand,
        // right-associative ones a strictly tighter left operand.
        fn child(f: &mut fmt::Formatter<'_>, c: &Formula, min: u8) -> fmt::Result {
            if c.precedence() < min {
                write!(f, "({c})")
            } else {
                write!(f, "{c}")
            }
        }
        let p = self.precedence();
        match self {
            Formula::Letter(name) => write!(f, "{name}"),
            Formula::Top => write!(f, "true"),
            Formula::Bottom => write!(f, "false"),
            Formula::Not(a) => {
                write!(f, "~")?;
                child(f, a, 5)
            }
            Formula::Box(a) => {
                write!(f, "box ")?;
                child(f, a, 5)
            }
            Formula::Diamond(a) => {
                write!(f, "dia ")?;
                child(f, a, 5)
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                let op = if matches!(self, Formula::And(..)) { "&" } else { "|" };
                child(f, a, p)?;
                write!(f, " {op} ")?;
                child(f, b, p + 1)
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                let op = if matches!(self, Formula::Implies(..)) {
                    "->"
                } else {
                    "<->"
                };
                child(f, a, p + 1)?;
                write!(f, " {op} ")?;
                child(f, b, p)
            }
        }
    }
}

impl FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Formula> {
        parse(s)
    }
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Ident(String),
    Not,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "`{s}`"),
            Token::Not => write!(f, "`~`"),
            Token::And => write!(f, "`&`"),
            Token::Or => write!(f, "`|`"),
            Token::Implies => write!(f, "`->`"),
            Token::Iff => write!(f, "`<->`"),
            Token::LParen => write!(f, "`(`"),
            Token::RParen => write!(f, "`)`"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'~' => Token::Not,
            b'&' => Token::And,
            b'|' => Token::Or,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Token::Implies
            }
            b'<' if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') => {
                i += 2;
                Token::Iff
            }
            b'a'..=b'z' => {
                while i + 1 < bytes.len() && matches!(bytes[i + 1], b'a'..=b'z' | b'0'..=b'9' | b'_') {
                    i += 1;
                }
                Token::Ident(text[start..=i].to_string())
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(Error::Syntax {
                    position: i,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        i += 1;
        out.push((tok, start));
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<(&Token, usize)> {
        self.tokens.get(self.pos).map(|(t, at)| (t, *at))
    }

    fn eat(&mut self, tok: &Token) -> bool {
        if self.peek().map(|(t, _)| t) == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn iff(&mut self) -> Result<Formula> {
        let lhs = self.implies()?;
        if self.eat(&Token::Iff) {
            Ok(Formula::iff(lhs, self.iff()?))
        } else {
            Ok(lhs)
        }
    }

    fn implies(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        if self.eat(&Token::Implies) {
            Ok(Formula::implies(lhs, self.implies()?))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula> {
        let mut lhs = self.and()?;
        while self.eat(&Token::Or) {
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while self.eat(&Token::And) {
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        let Some((tok, at)) = self.peek() else {
            return Err(Error::Syntax {
                position: self.end,
                message: "unexpected end of input".into(),
            });
        };
        let tok = tok.clone();
        self.pos += 1;
        match tok {
            Token::Not => Ok(Formula::not(self.unary()?)),
            Token::Ident(id) if id == "box" => Ok(Formula::boxed(self.unary()?)),
            Token::Ident(id) if id == "dia" => Ok(Formula::diamond(self.unary()?)),
            Token::Ident(id) if id == "true" => Ok(Formula::Top),
            Token::Ident(id) if id == "false" => Ok(Formula::Bottom),
            Token::Ident(id) => Ok(Formula::Letter(id)),
            Token::LParen => {
                let inner = self.iff()?;
                match self.peek() {
                    Some((Token::RParen, _)) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    Some((t, at)) => Err(Error::Syntax {
                        position: at,
                        message: format!("expected `)`, found {t}"),
                    }),
                    None => Err(Error::Syntax {
                        position: self.end,
                        message: "expected `)`, found end of input".into(),
                    }),
                }
            }
            other => Err(Error::Syntax {
                position: at,
                message: format!("unexpected {other}"),
            }),
        }
    }
}

/// Canonical enumeration of formulas over a finite alphabet.
///
/// Constructor policy: `true`, the letters, `~`, `&`, `|`, `box`, `dia`.
/// `false`, `->` and `<->` are omitted (definable), `~` is never applied to
/// a negation, and a binary node `a op b` requires `a` to precede `b` in the
/// enumeration order. Order: by AST size, then by printed form.
pub fn enumerate_formulas(alphabet: &BTreeSet<String>, depth: usize, size_budget: usize) -> FormulaEnumerator {
    FormulaEnumerator {
        alphabet: alphabet.iter().cloned().collect(),
        depth,
        size_budget,
        by_size: vec![Vec::new()],
        next_size: 1,
        cursor: 0,
    }
}

/// Lazily yields formulas size by size; see [`enumerate_formulas`].
pub struct FormulaEnumerator {
    alphabet: Vec<String>,
    depth: usize,
    size_budget: usize,
    // by_size[s] holds (formula, printed form) for size s, sorted by printed form.
    by_size: Vec<Vec<(Formula, String)>>,
    next_size: usize,
    cursor: usize,
}

impl FormulaEnumerator {
    fn build_size(&self, s: usize) -> Vec<(Formula, String)> {
        let mut out: Vec<Formula> = Vec::new();
        if s == 1 {
            out.push(Formula::Top);
            out.extend(self.alphabet.iter().map(|p| Formula::letter(p.as_str())));
        } else {
            for (a, _) in &self.by_size[s - 1] {
                if !matches!(a, Formula::Not(_)) {
                    out.push(Formula::not(a.clone()));
                }
                if a.modal_depth() < self.depth {
                    out.push(Formula::boxed(a.clone()));
                    out.push(Formula::diamond(a.clone()));
                }
            }
            for sa in 1..s - 1 {
                let sb = s - 1 - sa;
                if sa > sb {
                    break;
                }
                for (ia, (a, _)) in self.by_size[sa].iter().enumerate() {
                    for (ib, (b, _)) in self.by_size[sb].iter().enumerate() {
                        if sa == sb && ib <= ia {
                            continue;
                        }
                        out.push(Formula::and(a.clone(), b.clone()));
                        out.push(Formula::or(a.clone(), b.clone()));
                    }
                }
            }
        }
        let mut keyed: Vec<(Formula, String)> = out
            .into_iter()
            .map(|f| {
                let key = f.to_string();
                (f, key)
            })
            .collect();
        keyed.sort_by(|x, y| x.1.cmp(&y.1));
        keyed
    }
}

impl Iterator for FormulaEnumerator {
    type Item = Formula;

    fn next(&mut self) -> Option<Formula> {
        loop {
            let current = self.next_size - 1;
            if current >= 1 && self.cursor < self.by_size[current].len() {
                self.cursor += 1;
                return Some(self.by_size[current][self.cursor - 1].0.clone());
            }
            if self.next_size > self.size_budget {
                return None;
            }
            let level = self.build_size(self.next_size);
            self.by_size.push(level);
            self.next_size += 1;
            self.cursor = 0;
        }
    }
}
