//! Linear expressions over named classes, e.g. `8H1 - 3E1 - 4F` or `(1 + lambda)E1`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::picard::{Basis, DivisorClass};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let bad = |m: String| Error::Expression {
        expr: src.to_string(),
        message: m,
    };
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let lit: String = chars[start..i].iter().collect();
            let n = lit.parse::<Rational>().map_err(|_| bad(format!("bad number {lit:?}")))?;
            out.push(Tok::Num(n));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(bad(format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum Val {
    Scalar(Rational),
    Class(Vec<Rational>),
}

/// Symbols visible to an expression.
pub struct Scope<'a> {
    pub basis: &'a Basis,
    pub classes: &'a BTreeMap<String, DivisorClass>,
    pub params: &'a BTreeMap<String, Rational>,
    pub context: &'a str,
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    src: &'a str,
    scope: &'a Scope<'a>,
}

impl Parser<'_> {
    fn err(&self, m: impl Into<String>) -> Error {
        Error::Expression {
            expr: self.src.to_string(),
            message: m.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn expr(&mut self) -> Result<Val> {
        let mut acc = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = self.add(acc, rhs, c == '-')?;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Val> {
        let mut acc = self.unary()?;
        loop {
            match self.peek().cloned() {
                Some(Tok::Op('*')) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = self.mul(acc, rhs)?;
                }
                Some(Tok::Op('/')) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = self.div(acc, rhs)?;
                }
                Some(Tok::Ident(_)) | Some(Tok::Op('(')) => {
                    let rhs = self.primary()?;
                    acc = self.mul(acc, rhs)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Val> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                let v = self.unary()?;
                self.mul(Val::Scalar(-Rational::ONE), v)
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Val> {
        let tok = self.peek().cloned().ok_or_else(|| self.err("unexpected end"))?;
        self.pos += 1;
        match tok {
            Tok::Num(n) => Ok(Val::Scalar(n)),
            Tok::Ident(name) => self.lookup(&name),
            Tok::Op('(') => {
                let v = self.expr()?;
                match self.peek() {
                    Some(Tok::Op(')')) => {
                        self.pos += 1;
                        Ok(v)
                    }
                    _ => Err(self.err("missing ')'")),
                }
            }
            Tok::Op(c) => Err(self.err(format!("unexpected {c:?}"))),
        }
    }

    fn lookup(&self, name: &str) -> Result<Val> {
        let s = self.scope;
        if let Some(i) = s.basis.index_of(name) {
            let mut v = vec![Rational::ZERO; s.basis.len()];
            v[i] = Rational::ONE;
            return Ok(Val::Class(v));
        }
        if let Some(c) = s.classes.get(name) {
            s.basis.ensure_same(c.basis())?;
            return Ok(Val::Class(c.coeffs().to_vec()));
        }
        if let Some(p) = s.params.get(name) {
            return Ok(Val::Scalar(p.clone()));
        }
        Err(Error::UnresolvedSymbol {
            symbol: name.to_string(),
            context: s.context.to_string(),
        })
    }

    fn add(&self, a: Val, b: Val, sub: bool) -> Result<Val> {
        let b = if sub {
            self.mul(Val::Scalar(-Rational::ONE), b)?
        } else {
            b
        };
        match (a, b) {
            (Val::Scalar(x), Val::Scalar(y)) => Ok(Val::Scalar(x + y)),
            (Val::Class(x), Val::Class(y)) => Ok(Val::Class(x.iter().zip(&y).map(|(p, q)| p + q).collect())),
            (Val::Scalar(x), c @ Val::Class(_)) | (c @ Val::Class(_), Val::Scalar(x)) if x.is_zero() => Ok(c),
            _ => Err(self.err("cannot add a number to a class")),
        }
    }

    fn mul(&self, a: Val, b: Val) -> Result<Val> {
        match (a, b) {
            (Val::Scalar(x), Val::Scalar(y)) => Ok(Val::Scalar(x * y)),
            (Val::Scalar(k), Val::Class(c)) | (Val::Class(c), Val::Scalar(k)) => {
                Ok(Val::Class(c.iter().map(|x| x * &k).collect()))
            }
            _ => Err(self.err("product of two classes")),
        }
    }

    fn div(&self, a: Val, b: Val) -> Result<Val> {
        let k = match b {
            Val::Scalar(k) if !k.is_zero() => k.recip(),
            Val::Scalar(_) => return Err(self.err("division by zero")),
            Val::Class(_) => return Err(self.err("division by a class")),
        };
        self.mul(a, Val::Scalar(k))
    }
}

fn parse(src: &str, scope: &Scope<'_>) -> Result<Val> {
    let toks = tokenize(src)?;
    if toks.is_empty() {
        return Err(Error::Expression {
            expr: src.to_string(),
            message: "empty expression".into(),
        });
    }
    let mut p = Parser {
        toks,
        pos: 0,
        src,
        scope,
    };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err(format!("trailing input at token {}", p.pos + 1)));
    }
    Ok(v)
}

/// Evaluates a class expression on `scope.basis`. A bare `0` is the zero class.
pub fn eval_class(src: &str, scope: &Scope<'_>) -> Result<DivisorClass> {
    match parse(src, scope)? {
        Val::Class(c) => DivisorClass::new(scope.basis, c),
        Val::Scalar(s) if s.is_zero() => Ok(DivisorClass::zero(scope.basis)),
        Val::Scalar(_) => Err(Error::Expression {
            expr: src.to_string(),
            message: "expected a class, found a number".into(),
        }),
    }
}

pub fn eval_scalar(src: &str, scope: &Scope<'_>) -> Result<Rational> {
    match parse(src, scope)? {
        Val::Scalar(s) => Ok(s),
        Val::Class(_) => Err(Error::Expression {
            expr: src.to_string(),
            message: "expected a number, found a class".into(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q;

    fn with_scope<T>(f: impl FnOnce(&Scope<'_>) -> T) -> T {
        let basis = Basis::new(["H1", "E1", "F"]).unwrap();
        let mut classes = BTreeMap::new();
        classes.insert("H".to_string(), DivisorClass::from_ints(&basis, &[4, -1, 0]).unwrap());
        let mut params = BTreeMap::new();
        params.insert("lambda".to_string(), q(3, 2));
        let scope = Scope {
            basis: &basis,
            classes: &classes,
            params: &params,
            context: "test",
        };
        f(&scope)
    }

    #[test]
    fn evaluates_linear_combinations() {
        with_scope(|s| {
            assert_eq!(eval_class("8H1 - 3E1 - 4F", s).unwrap().to_string(), "8H1 - 3E1 - 4F");
            assert_eq!(eval_class("4H1 - (1 + lambda)E1", s).unwrap().to_string(), "4H1 - (5/2)E1");
            assert_eq!(eval_class("3/4E1", s).unwrap().to_string(), "(3/4)E1");
            assert_eq!(eval_class("2*(H - H1)/3", s).unwrap().to_string(), "2H1 - (2/3)E1");
            assert_eq!(eval_class("-H", s).unwrap().to_string(), "-4H1 + E1");
            assert!(eval_class("0", s).unwrap().is_zero());
            assert_eq!(eval_scalar("2 - lambda", s).unwrap(), q(1, 2));
        })
    }

    #[test]
    fn reports_errors() {
        with_scope(|s| {
            assert_eq!(eval_class("H1 + X", s).unwrap_err().code(), "unresolved-symbol");
            assert_eq!(eval_class("H1 * E1", s).unwrap_err().code(), "expression");
            assert_eq!(eval_class("H1 + 1", s).unwrap_err().code(), "expression");
            assert_eq!(eval_class("(H1", s).unwrap_err().code(), "expression");
            assert_eq!(eval_class("H1 / E1", s).unwrap_err().code(), "expression");
            assert_eq!(eval_class("", s).unwrap_err().code(), "expression");
            assert_eq!(eval_class("2", s).unwrap_err().code(), "expression");
            assert_eq!(eval_class("H1 $", s).unwrap_err().code(), "expression");
        })
    }
}
