//! Boolean update-rule expressions.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! iff     := implies (("<->" | "IFF") implies)*
//! implies := xor (("->" | "IMPLIES") implies)?      right-associative
//! xor     := or (("^" | "XOR") or)*
//! or      := and (("|" | "OR") and)*
//! and     := unary (("&" | "AND") unary)*
//! unary   := ("!" | "~" | "NOT") unary | atom
//! atom    := "(" iff ")" | "0" | "1" | "true" | "false" | x<k> | u<k> | d<k> | f<k>
//! ```

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    State,
    Input,
    Disturbance,
    Fault,
}

impl VarKind {
    fn prefix(self) -> char {
        match self {
            VarKind::State => 'x',
            VarKind::Input => 'u',
            VarKind::Disturbance => 'd',
            VarKind::Fault => 'f',
        }
    }
}

/// A variable reference, `index` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub kind: VarKind,
    pub index: usize,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.prefix(), self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(bool),
    Var(Var),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Xor(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Iff(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, env: &impl Fn(Var) -> bool) -> bool {
        match self {
            Expr::Const(b) => *b,
            Expr::Var(v) => env(*v),
            Expr::Not(a) => !a.eval(env),
            Expr::And(a, b) => a.eval(env) && b.eval(env),
            Expr::Or(a, b) => a.eval(env) || b.eval(env),
            Expr::Xor(a, b) => a.eval(env) != b.eval(env),
            Expr::Implies(a, b) => !a.eval(env) || b.eval(env),
            Expr::Iff(a, b) => a.eval(env) == b.eval(env),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Not(a) => a.collect_vars(out),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Xor(a, b) | Expr::Implies(a, b) | Expr::Iff(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Applies `f` to every variable.
    pub fn rename(&self, f: &impl Fn(Var) -> Var) -> Expr {
        let bx = |e: &Expr| Box::new(e.rename(f));
        match self {
            Expr::Const(b) => Expr::Const(*b),
            Expr::Var(v) => Expr::Var(f(*v)),
            Expr::Not(a) => Expr::Not(bx(a)),
            Expr::And(a, b) => Expr::And(bx(a), bx(b)),
            Expr::Or(a, b) => Expr::Or(bx(a), bx(b)),
            Expr::Xor(a, b) => Expr::Xor(bx(a), bx(b)),
            Expr::Implies(a, b) => Expr::Implies(bx(a), bx(b)),
            Expr::Iff(a, b) => Expr::Iff(bx(a), bx(b)),
        }
    }
}

/// Fully parenthesised rendering; re-parses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(true) => write!(f, "1"),
            Expr::Const(false) => write!(f, "0"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Not(a) => write!(f, "!{a}"),
            Expr::And(a, b) => write!(f, "({a} & {b})"),
            Expr::Or(a, b) => write!(f, "({a} | {b})"),
            Expr::Xor(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Implies(a, b) => write!(f, "({a} -> {b})"),
            Expr::Iff(a, b) => write!(f, "({a} <-> {b})"),
        }
    }
}

/// Declared identifier counts per variable kind.
#[derive(Debug, Clone, Copy, Default)]
pub struct Scope {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub t: usize,
}

impl Scope {
    fn bound(&self, kind: VarKind) -> usize {
        match kind {
            VarKind::State => self.n,
            VarKind::Input => self.m,
            VarKind::Disturbance => self.d,
            VarKind::Fault => self.t,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Not,
    And,
    Or,
    Xor,
    Implies,
    Iff,
    Const(bool),
    Ident(String),
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let syntax = |line, column, message: String| Error::Syntax { line, column, message };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let (tok, len) = if rest.starts_with("<->") {
            (Tok::Iff, 3)
        } else if rest.starts_with("->") {
            (Tok::Implies, 2)
        } else {
            match c {
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                '!' | '~' => (Tok::Not, 1),
                '&' => (Tok::And, 1),
                '|' => (Tok::Or, 1),
                '^' => (Tok::Xor, 1),
                c if c.is_ascii_alphanumeric() || c == '_' => {
                    let start = i;
                    let mut j = i;
                    while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                        j += 1;
                    }
                    let word: String = chars[start..j].iter().collect();
                    let tok = match word.to_ascii_uppercase().as_str() {
                        "NOT" => Tok::Not,
                        "AND" => Tok::And,
                        "OR" => Tok::Or,
                        "XOR" => Tok::Xor,
                        "IMPLIES" => Tok::Implies,
                        "IFF" => Tok::Iff,
                        "TRUE" | "1" => Tok::Const(true),
                        "FALSE" | "0" => Tok::Const(false),
                        _ => Tok::Ident(word.clone()),
                    };
                    (tok, j - start)
                }
                other => return Err(syntax(tl, tc, format!("unexpected character `{other}`"))),
            }
        };
        out.push(Token { tok, line: tl, column: tc });
        i += len;
        col += len;
    }
    out.push(Token { tok: Tok::End, line, column: col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    scope: Option<Scope>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let t = self.peek();
        Error::Syntax { line: t.line, column: t.column, message: message.into() }
    }

    fn iff(&mut self) -> Result<Expr> {
        let mut lhs = self.implies()?;
        while self.peek().tok == Tok::Iff {
            self.bump();
            lhs = Expr::Iff(Box::new(lhs), Box::new(self.implies()?));
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Expr> {
        let lhs = self.xor()?;
        if self.peek().tok == Tok::Implies {
            self.bump();
            return Ok(Expr::Implies(Box::new(lhs), Box::new(self.implies()?)));
        }
        Ok(lhs)
    }

    fn xor(&mut self) -> Result<Expr> {
        let mut lhs = self.or()?;
        while self.peek().tok == Tok::Xor {
            self.bump();
            lhs = Expr::Xor(Box::new(lhs), Box::new(self.or()?));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Expr> {
        let mut lhs = self.and()?;
        while self.peek().tok == Tok::Or {
            self.bump();
            lhs = Expr::Or(Box::new(lhs), Box::new(self.and()?));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while self.peek().tok == Tok::And {
            self.bump();
            lhs = Expr::And(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek().tok == Tok::Not {
            self.bump();
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        let t = self.peek().clone();
        match t.tok {
            Tok::LParen => {
                self.bump();
                let e = self.iff()?;
                if self.peek().tok != Tok::RParen {
                    return Err(self.error("expected `)`"));
                }
                self.bump();
                Ok(e)
            }
            Tok::Const(b) => {
                self.bump();
                Ok(Expr::Const(b))
            }
            Tok::Ident(ref name) => {
                let var = self.identifier(name, t.line, t.column)?;
                self.bump();
                Ok(Expr::Var(var))
            }
            Tok::End => Err(self.error("unexpected end of expression")),
            _ => Err(self.error("expected an operand")),
        }
    }

    fn identifier(&self, name: &str, line: usize, column: usize) -> Result<Var> {
        let unknown = || Error::UnknownIdentifier { name: name.to_string(), line, column };
        let mut chars = name.chars();
        let kind = match chars.next() {
            Some('x') => VarKind::State,
            Some('u') => VarKind::Input,
            Some('d') => VarKind::Disturbance,
            Some('f') => VarKind::Fault,
            _ => return Err(unknown()),
        };
        let digits = chars.as_str();
        if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(unknown());
        }
        let index: usize = digits.parse().map_err(|_| unknown())?;
        if let Some(scope) = self.scope {
            if index > scope.bound(kind) {
                return Err(unknown());
            }
        }
        Ok(Var { kind, index })
    }
}

fn parse(text: &str, scope: Option<Scope>) -> Result<Expr> {
    let mut p = Parser { toks: lex(text)?, pos: 0, scope };
    let e = p.iff()?;
    if p.peek().tok != Tok::End {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

/// Parses without checking identifier ranges.
pub fn parse_expression(text: &str) -> Result<Expr> {
    parse(text, None)
}

/// Parses and rejects identifiers outside the declared dimensions.
pub fn parse_expression_in(text: &str, scope: Scope) -> Result<Expr> {
    parse(text, Some(scope))
}
