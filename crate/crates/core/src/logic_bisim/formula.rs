use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed};

use crate::arith::{parse_rational, Q};
use crate::error::{Error, Result};

/// φ ::= ⊤ | φ ∧ φ | ◇_q φ with rational thresholds q ∈ [0, 1].
///
/// Text syntax: `T`, `(φ & φ)`, `dia>=p/q φ`. Whitespace is ignored, `&`
/// associates to the left and `dia` binds tighter than `&`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Top,
    And(Box<Formula>, Box<Formula>),
    Dia(Q, Box<Formula>),
}

impl Formula {
    pub fn and(left: Formula, right: Formula) -> Formula {
        Formula::And(Box::new(left), Box::new(right))
    }

    pub fn dia(threshold: Q, inner: Formula) -> Result<Formula> {
        if threshold.is_negative() || threshold > Q::one() {
            return Err(Error::InvalidThreshold(threshold.to_string()));
        }
        Ok(Formula::Dia(threshold, Box::new(inner)))
    }

    /// Nesting depth of ◇.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Top => 0,
            Formula::And(a, b) => a.modal_depth().max(b.modal_depth()),
            Formula::Dia(_, f) => 1 + f.modal_depth(),
        }
    }

    pub fn parse(text: &str) -> Result<Formula> {
        let mut p = Parser { src: text, pos: 0 };
        let f = p.conjunction()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(f)
    }
}

impl FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Formula::parse(s)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Top => write!(f, "T"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Dia(q, inner) => write!(f, "dia>={q} {inner}"),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::FormulaParse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut acc = self.unary()?;
        while self.eat("&") {
            let rhs = self.unary()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula> {
        self.skip_ws();
        if self.eat("(") {
            let f = self.conjunction()?;
            if !self.eat(")") {
                return Err(self.error("expected `)`"));
            }
            Ok(f)
        } else if self.eat("dia") {
            if !self.eat(">=") {
                return Err(self.error("expected `>=` after `dia`"));
            }
            let start = self.pos;
            let q = self.rational()?;
            let inner = self.unary()?;
            Formula::dia(q, inner).map_err(|e| Error::FormulaParse {
                pos: start,
                msg: e.to_string(),
            })
        } else if self.eat("T") {
            Ok(Formula::Top)
        } else {
            Err(self.error("expected `T`, `(` or `dia`"))
        }
    }

    fn digits(&mut self) -> &str {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let len = rest
            .find(|c: char| !(c.is_ascii_digit() || c == '.'))
            .unwrap_or(rest.len());
        self.pos += len;
        &self.src[start..start + len]
    }

    fn rational(&mut self) -> Result<Q> {
        let numer = self.digits().to_string();
        if numer.is_empty() {
            return Err(self.error("expected a threshold"));
        }
        let text = if self.eat("/") {
            let denom = self.digits().to_string();
            if denom.is_empty() {
                return Err(self.error("expected a denominator"));
            }
            format!("{numer}/{denom}")
        } else {
            numer
        };
        parse_rational(&text).map_err(|m| self.error(&m))
    }
}
