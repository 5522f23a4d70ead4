//! Recursive-descent parser for the concrete formula syntax.
//!
//! ```text
//! formula  := release
//! release  := until ( "R" until )*        right-associative
//! until    := disj ( "U" disj )*          right-associative
//! disj     := conj ( "|" conj )*
//! conj     := unary ( "&" unary )*
//! unary    := "G" unary | "F" unary | "(" formula ")" | atom
//! atom     := [ "!" ] ( "p[" real "](" linexpr cmp real ")" | ident )
//! linexpr  := term ( ("+"|"-") term )*     term := real "*" var | var
//! cmp      := "<=" | ">="
//! var      := "x" integer                  1-based state index
//! ```

use std::collections::HashMap;

use nalgebra::DVector;

use super::formula::Formula;
use super::predicate::Predicate;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(usize),
    Num(f64),
    PredOpen, // "p["
    RBracket,
    LParen,
    RParen,
    Bang,
    And,
    Or,
    Plus,
    Minus,
    Star,
    Le,
    Ge,
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| Error::Parse {
        line,
        column: col,
        message: msg,
    };
    while i < chars.len() {
        let ch = chars[i];
        let (tok, len) = match ch {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            ']' => (Tok::RBracket, 1),
            '!' => (Tok::Bang, 1),
            '&' => (Tok::And, 1),
            '|' => (Tok::Or, 1),
            '+' => (Tok::Plus, 1),
            '*' => (Tok::Star, 1),
            '<' | '>' => {
                if chars.get(i + 1) != Some(&'=') {
                    return Err(err(line, col, format!("expected `{ch}=`")));
                }
                (if ch == '<' { Tok::Le } else { Tok::Ge }, 2)
            }
            '-' => {
                // A minus followed by a digit is part of the number unless
                // the previous token ends an operand.
                let prev_operand = matches!(
                    out.last().map(|s: &Spanned| &s.tok),
                    Some(Tok::Num(_)) | Some(Tok::Var(_)) | Some(Tok::RParen) | Some(Tok::Ident(_))
                );
                let next_digit = chars.get(i + 1).is_some_and(|c| c.is_ascii_digit() || *c == '.');
                if next_digit && !prev_operand {
                    let (num, len) = lex_number(&chars, i).ok_or_else(|| err(line, col, "bad number".into()))?;
                    (Tok::Num(num), len)
                } else {
                    (Tok::Minus, 1)
                }
            }
            c if c.is_ascii_digit() || c == '.' => {
                let (num, len) = lex_number(&chars, i).ok_or_else(|| err(line, col, "bad number".into()))?;
                (Tok::Num(num), len)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                if word == "p" && chars.get(j) == Some(&'[') {
                    (Tok::PredOpen, 2)
                } else if let Some(idx) = word
                    .strip_prefix('x')
                    .filter(|d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()))
                {
                    let idx: usize = idx.parse().map_err(|_| err(line, col, "bad index".into()))?;
                    if idx == 0 {
                        return Err(err(line, col, "state indices are 1-based".into()));
                    }
                    (Tok::Var(idx), j - i)
                } else {
                    (Tok::Ident(word), j - i)
                }
            }
            other => return Err(err(line, col, format!("unexpected character `{other}`"))),
        };
        out.push(Spanned { tok, line, col });
        i += len;
        col += len;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

fn lex_number(chars: &[char], start: usize) -> Option<(f64, usize)> {
    let mut j = start;
    if chars[j] == '-' || chars[j] == '+' {
        j += 1;
    }
    while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
        j += 1;
    }
    if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
        let mut k = j + 1;
        if k < chars.len() && (chars[k] == '-' || chars[k] == '+') {
            k += 1;
        }
        if k < chars.len() && chars[k].is_ascii_digit() {
            while k < chars.len() && chars[k].is_ascii_digit() {
                k += 1;
            }
            j = k;
        }
    }
    let s: String = chars[start..j].iter().collect();
    s.parse::<f64>().ok().map(|v| (v, j - start))
}

/// Parser configuration: state dimension and named atoms.
pub struct FormulaParser<'a, T: Scalar> {
    dim: Option<usize>,
    atoms: Option<&'a HashMap<String, Predicate<T>>>,
}

impl<'a, T: Scalar> FormulaParser<'a, T> {
    /// `dim = None` sizes each coefficient vector by its largest index.
    pub fn new(dim: Option<usize>) -> Self {
        FormulaParser { dim, atoms: None }
    }

    pub fn with_atoms(mut self, atoms: &'a HashMap<String, Predicate<T>>) -> Self {
        self.atoms = Some(atoms);
        self
    }

    pub fn parse(&self, text: &str) -> Result<Formula<T>> {
        let toks = lex(text)?;
        let mut st = State {
            toks,
            pos: 0,
            cfg: self,
        };
        let f = st.release()?;
        st.expect(Tok::Eof, "end of input")?;
        Ok(f)
    }

    /// Parses a bare predicate `p[eps](expr cmp b)` or `expr cmp b` (the
    /// latter with the supplied default tolerance).
    pub fn parse_predicate(&self, text: &str, default_eps: Option<T>) -> Result<Predicate<T>> {
        let toks = lex(text)?;
        let mut st = State {
            toks,
            pos: 0,
            cfg: self,
        };
        let pred = if st.peek() == &Tok::PredOpen {
            st.predicate(false)?
        } else {
            let eps = default_eps.ok_or_else(|| st.error("expected `p[`"))?;
            st.predicate_body(eps, false)?
        };
        st.expect(Tok::Eof, "end of input")?;
        Ok(pred)
    }
}

/// Parses with the dimension inferred and no named atoms.
pub fn parse_formula<T: Scalar>(text: &str) -> Result<Formula<T>> {
    FormulaParser::new(None).parse(text)
}

struct State<'p, 'a, T: Scalar> {
    toks: Vec<Spanned>,
    pos: usize,
    cfg: &'p FormulaParser<'a, T>,
}

impl<T: Scalar> State<'_, '_, T> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let s = &self.toks[self.pos];
        Error::Parse {
            line: s.line,
            column: s.col,
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {what}, found {:?}", self.peek())))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn release(&mut self) -> Result<Formula<T>> {
        let lhs = self.until()?;
        if self.is_kw("R") {
            self.bump();
            let rhs = self.release()?;
            return Ok(Formula::release(lhs, rhs));
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula<T>> {
        let lhs = self.disj()?;
        if self.is_kw("U") {
            self.bump();
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disj(&mut self) -> Result<Formula<T>> {
        let mut f = self.conj()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.conj()?;
            f = Formula::or(f, rhs);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Formula<T>> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.unary()?;
            f = Formula::and(f, rhs);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula<T>> {
        if self.is_kw("G") {
            self.bump();
            return Ok(Formula::always(self.unary()?));
        }
        if self.is_kw("F") {
            self.bump();
            return Ok(Formula::eventually(self.unary()?));
        }
        if *self.peek() == Tok::LParen {
            self.bump();
            let f = self.release()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(f);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula<T>> {
        let negated = if *self.peek() == Tok::Bang {
            self.bump();
            if *self.peek() == Tok::LParen {
                return Err(self.error("negation is only allowed directly on atoms"));
            }
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::PredOpen => Ok(Formula::atom(self.predicate(negated)?)),
            Tok::Ident(name) => {
                if ["G", "F", "U", "R"].contains(&name.as_str()) {
                    return Err(self.error(format!("unexpected operator `{name}`")));
                }
                if !negated && (name == "true" || name == "false") {
                    self.bump();
                    return Ok(if name == "true" { Formula::True } else { Formula::False });
                }
                let pred = self
                    .cfg
                    .atoms
                    .and_then(|m| m.get(&name))
                    .ok_or_else(|| self.error(format!("undeclared atom `{name}`")))?;
                self.bump();
                let pred = if negated { pred.negate() } else { pred.clone() };
                Ok(Formula::named(&name, pred))
            }
            other => Err(self.error(format!("expected an atom, found {other:?}"))),
        }
    }

    fn predicate(&mut self, negated: bool) -> Result<Predicate<T>> {
        self.expect(Tok::PredOpen, "`p[`")?;
        let eps = match self.bump() {
            Tok::Num(v) => v,
            _ => return Err(self.error("expected tolerance")),
        };
        self.expect(Tok::RBracket, "`]`")?;
        self.expect(Tok::LParen, "`(`")?;
        let pred = self.predicate_body(T::of(eps), negated)?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(pred)
    }

    fn predicate_body(&mut self, eps: T, negated: bool) -> Result<Predicate<T>> {
        let start = self.pos;
        let mut terms: Vec<(usize, f64)> = Vec::new();
        let mut sign = 1.0;
        loop {
            let (idx, coef) = self.term()?;
            terms.push((idx, sign * coef));
            match self.peek() {
                Tok::Plus => sign = 1.0,
                Tok::Minus => sign = -1.0,
                _ => break,
            }
            self.bump();
        }
        let flip = match self.bump() {
            Tok::Le => false,
            Tok::Ge => true,
            _ => return Err(self.error("expected `<=` or `>=`")),
        };
        let b = match self.bump() {
            Tok::Num(v) => v,
            _ => return Err(self.error("expected a number")),
        };
        let max_idx = terms.iter().map(|t| t.0).max().unwrap_or(1);
        let dim = self.cfg.dim.unwrap_or(max_idx);
        if max_idx > dim {
            return Err(self.error(format!("x{max_idx} exceeds state dimension {dim}")));
        }
        let mut c = DVector::<T>::zeros(dim);
        for (idx, coef) in terms {
            c[idx - 1] += T::of(coef);
        }
        let (c, b) = if flip { (-c, -b) } else { (c, b) };
        Predicate::new(c, T::of(b), eps, negated).map_err(|e| {
            let s = &self.toks[start];
            Error::Parse {
                line: s.line,
                column: s.col,
                message: e.to_string(),
            }
        })
    }

    fn term(&mut self) -> Result<(usize, f64)> {
        match self.bump() {
            Tok::Var(i) => Ok((i, 1.0)),
            Tok::Num(v) => {
                self.expect(Tok::Star, "`*`")?;
                match self.bump() {
                    Tok::Var(i) => Ok((i, v)),
                    _ => Err(self.error("expected a state variable")),
                }
            }
            _ => Err(self.error("expected a term")),
        }
    }
}
