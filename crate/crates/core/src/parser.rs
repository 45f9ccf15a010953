//! Textual expression language for mixed polynomials.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary ('*' unary)*
//! unary    := ('-' | '+') unary | power
//! power    := atom ('^' uint)?
//! atom     := number | number 'i' | 'i' | var | 'conj' '(' expr ')' | '(' expr ')'
//! var      := 'z' index | 'zb' index          (index ≥ 1)
//! number   := digits ('.' digits?)? (('e' | 'E') ('+' | '-')? digits)?
//! ```
//!
//! Multiplication is always explicit: `2z1` and `2 z1` are errors.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mixed_poly::{MixedPolynomial, Monomial};

/// Source text plus an optional ambient dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceExpr<'a> {
    pub text: &'a str,
    pub declared_n: Option<usize>,
}

impl<'a> SourceExpr<'a> {
    pub fn new(text: &'a str) -> Self {
        Self { text, declared_n: None }
    }

    pub fn with_n(text: &'a str, n: usize) -> Self {
        Self {
            text,
            declared_n: Some(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl ParseError {
    fn new(offset: usize, message: impl Into<String>, expected: &[&str]) -> Self {
        Self {
            offset,
            message: message.into(),
            expected: expected.iter().map(|s| (*s).to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Var { index: usize, conj: bool },
    Conj,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> &'static str {
        match self {
            Tok::Num(_) => "number",
            Tok::Imag(_) => "imaginary literal",
            Tok::Var { .. } => "variable",
            Tok::Conj => "`conj`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Caret => "`^`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::End => "end of input",
        }
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((start, Tok::Plus)),
            b'-' => out.push((start, Tok::Minus)),
            b'*' => out.push((start, Tok::Star)),
            b'^' => out.push((start, Tok::Caret)),
            b'(' => out.push((start, Tok::LParen)),
            b')' => out.push((start, Tok::RParen)),
            b'0'..=b'9' | b'.' => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j < bytes.len() && bytes[j] == b'.' {
                    j += 1;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let text = &src[i..j];
                let v: f64 = text
                    .parse()
                    .map_err(|_| ParseError::new(start, format!("malformed number `{text}`"), &["number"]))?;
                if !v.is_finite() {
                    return Err(ParseError::new(
                        start,
                        format!("number `{text}` is not finite"),
                        &["number"],
                    ));
                }
                // `2i` is an imaginary literal only when `i` is not the start of a longer word.
                let imag = j < bytes.len()
                    && bytes[j] == b'i'
                    && !bytes
                        .get(j + 1)
                        .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_');
                if imag {
                    out.push((start, Tok::Imag(v)));
                    i = j + 1;
                } else {
                    out.push((start, Tok::Num(v)));
                    i = j;
                }
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                let word = &src[i..j];
                out.push((start, word_token(word, start)?));
                i = j;
                continue;
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(ParseError::new(
                    start,
                    format!("unexpected character `{ch}`"),
                    &["number", "variable", "`(`", "operator"],
                ));
            }
        }
        i += 1;
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

fn word_token(word: &str, at: usize) -> Result<Tok, ParseError> {
    match word {
        "i" => return Ok(Tok::Imag(1.0)),
        "conj" => return Ok(Tok::Conj),
        _ => {}
    }
    let (conj, digits) = if let Some(d) = word.strip_prefix("zb") {
        (true, d)
    } else if let Some(d) = word.strip_prefix('z') {
        (false, d)
    } else {
        return Err(ParseError::new(
            at,
            format!("unknown identifier `{word}`"),
            &["z<k>", "zb<k>", "conj", "i"],
        ));
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseError::new(
            at,
            format!("malformed variable `{word}`"),
            &["z<k>", "zb<k>"],
        ));
    }
    let index: usize = digits
        .parse()
        .map_err(|_| ParseError::new(at, format!("variable index too large in `{word}`"), &["z<k>"]))?;
    if index == 0 {
        return Err(ParseError::new(at, "variable indices start at 1", &["z<k> with k ≥ 1"]));
    }
    Ok(Tok::Var { index, conj })
}

#[derive(Clone, Debug)]
enum Ast {
    Const(Complex64),
    Var { index: usize, conj: bool },
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, u32),
    Conj(Box<Ast>),
}

impl Ast {
    fn max_index(&self) -> usize {
        match self {
            Ast::Const(_) => 0,
            Ast::Var { index, .. } => *index,
            Ast::Neg(a) | Ast::Pow(a, _) | Ast::Conj(a) => a.max_index(),
            Ast::Add(a, b) | Ast::Sub(a, b) | Ast::Mul(a, b) => a.max_index().max(b.max_index()),
        }
    }

    fn build(&self, n: usize) -> MixedPolynomial {
        match self {
            Ast::Const(c) => MixedPolynomial::constant(n, *c),
            Ast::Var { index, conj: false } => MixedPolynomial::var(n, index - 1),
            Ast::Var { index, conj: true } => MixedPolynomial::conj_var(n, index - 1),
            Ast::Neg(a) => -&a.build(n),
            Ast::Add(a, b) => &a.build(n) + &b.build(n),
            Ast::Sub(a, b) => &a.build(n) - &b.build(n),
            Ast::Mul(a, b) => &a.build(n) * &b.build(n),
            Ast::Pow(a, e) => a.build(n).pow(*e),
            Ast::Conj(a) => a.build(n).conjugate(),
        }
    }
}

/// Largest accepted exponent; keeps expansion of `(…)^k` at desk scale.
const MAX_EXPONENT: u32 = 64;

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> (usize, Tok) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, expected: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::new(
                self.offset(),
                format!("expected {expected}, found {}", self.peek().describe()),
                &[expected],
            ))
        }
    }

    fn expr(&mut self) -> Result<Ast, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = Ast::Add(Box::new(acc), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    acc = Ast::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Ast, ParseError> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::Star {
            self.bump();
            acc = Ast::Mul(Box::new(acc), Box::new(self.unary()?));
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Ast, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(Ast::Neg(Box::new(self.unary()?)))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Ast, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        match self.bump().1 {
            Tok::Num(v) if v.fract() == 0.0 => {
                if v > f64::from(MAX_EXPONENT) {
                    return Err(ParseError::new(
                        at,
                        format!("exponent {v} exceeds the maximum {MAX_EXPONENT}"),
                        &["small non-negative integer"],
                    ));
                }
                Ok(Ast::Pow(Box::new(base), v as u32))
            }
            Tok::Minus => Err(ParseError::new(at, "negative exponent", &["non-negative integer"])),
            other => Err(ParseError::new(
                at,
                format!("exponent must be a non-negative integer, found {}", other.describe()),
                &["non-negative integer"],
            )),
        }
    }

    fn atom(&mut self) -> Result<Ast, ParseError> {
        let (at, tok) = self.bump();
        let node = match tok {
            Tok::Num(v) => Ast::Const(Complex64::new(v, 0.0)),
            Tok::Imag(v) => Ast::Const(Complex64::new(0.0, v)),
            Tok::Var { index, conj } => Ast::Var { index, conj },
            Tok::Conj => {
                self.expect(Tok::LParen, "`(` after `conj`")?;
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ast::Conj(Box::new(inner))
            }
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                inner
            }
            other => {
                return Err(ParseError::new(
                    at,
                    format!("expected a number, variable or `(`, found {}", other.describe()),
                    &["number", "variable", "`(`", "`conj`"],
                ))
            }
        };
        // Juxtaposition such as `2z1` or `z1 z2` is rejected explicitly.
        if matches!(
            self.peek(),
            Tok::Num(_) | Tok::Imag(_) | Tok::Var { .. } | Tok::Conj | Tok::LParen
        ) {
            return Err(ParseError::new(
                self.offset(),
                "implicit multiplication is not allowed; insert `*`",
                &["`*`", "`+`", "`-`", "`^`", "`)`", "end of input"],
            ));
        }
        Ok(node)
    }
}

/// Parses and fully expands an expression into its term map.
pub fn parse(src: &SourceExpr<'_>) -> Result<MixedPolynomial, ParseError> {
    if src.text.trim().is_empty() {
        return Err(ParseError::new(0, "empty expression", &["expression"]));
    }
    let toks = lex(src.text)?;
    let mut p = Parser { toks, pos: 0 };
    let ast = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(ParseError::new(
            p.offset(),
            format!("unexpected {}", p.peek().describe()),
            &["`+`", "`-`", "`*`", "end of input"],
        ));
    }
    let used = ast.max_index();
    let n = match src.declared_n {
        Some(0) => return Err(ParseError::new(0, "declared dimension must be at least 1", &[])),
        Some(d) if used > d => {
            let at = find_index_offset(src.text, used);
            return Err(ParseError::new(
                at,
                format!("variable index {used} exceeds declared n = {d}"),
                &[],
            ));
        }
        Some(d) => d,
        None => used.max(1),
    };
    Ok(ast.build(n))
}

fn find_index_offset(text: &str, index: usize) -> usize {
    let toks = lex(text).unwrap_or_default();
    toks.iter()
        .find(|(_, t)| matches!(t, Tok::Var { index: k, .. } if *k == index))
        .map_or(0, |(at, _)| *at)
}

/// Canonical text: terms by ascending total degree, then `(ν, μ)` lexicographically
/// descending; `parse(format(f)) == f` exactly.
pub fn format(f: &MixedPolynomial) -> String {
    let mut terms: Vec<(&Monomial, &Complex64)> = f.terms().collect();
    if terms.is_empty() {
        return "0".to_string();
    }
    terms.sort_by(|(a, _), (b, _)| a.degree().cmp(&b.degree()).then_with(|| b.cmp(a)));
    let mut out = String::new();
    for (k, (m, c)) in terms.iter().enumerate() {
        let mono = monomial_text(m);
        let (negative, coef) = coefficient_text(**c, mono.is_empty());
        match (k, negative) {
            (0, false) => {}
            (0, true) => out.push('-'),
            (_, false) => out.push_str(" + "),
            (_, true) => out.push_str(" - "),
        }
        out.push_str(&coef);
        if !coef.is_empty() && !mono.is_empty() {
            out.push('*');
        }
        out.push_str(&mono);
    }
    out
}

/// Returns (leading minus?, coefficient text without that minus). An empty coefficient
/// text means the unit coefficient of a non-constant monomial.
fn coefficient_text(c: Complex64, constant: bool) -> (bool, String) {
    if c.im == 0.0 {
        let neg = c.re < 0.0;
        let a = c.re.abs();
        if a == 1.0 && !constant {
            return (neg, String::new());
        }
        return (neg, format!("{a}"));
    }
    if c.re == 0.0 {
        return (c.im < 0.0, format!("{}i", c.im.abs()));
    }
    let sign = if c.im < 0.0 { '-' } else { '+' };
    (false, format!("({}{}{}i)", c.re, sign, c.im.abs()))
}

fn monomial_text(m: &Monomial) -> String {
    let mut parts = Vec::new();
    for (prefix, e) in [("z", &m.z), ("zb", &m.zb)] {
        for (i, &k) in e.entries().iter().enumerate() {
            match k {
                0 => {}
                1 => parts.push(format!("{prefix}{}", i + 1)),
                _ => parts.push(format!("{prefix}{}^{k}", i + 1)),
            }
        }
    }
    parts.join("*")
}

impl fmt::Display for SourceExpr<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.text)
    }
}

/// Convenience: parse with inferred dimension.
pub fn parse_str(text: &str) -> Result<MixedPolynomial, ParseError> {
    parse(&SourceExpr::new(text))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mono(z: &[u32], zb: &[u32]) -> Monomial {
        Monomial::new(z.to_vec(), zb.to_vec())
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn mixed_product_terms() {
        let f = parse_str("z1*z2 + zb1^2*zb2^2").unwrap();
        let expect = MixedPolynomial::from_terms(2, [(mono(&[1, 1], &[0, 0]), one()), (mono(&[0, 0], &[2, 2]), one())]);
        assert_eq!(f, expect);
        assert_eq!(format(&f), "z1*z2 + zb1^2*zb2^2");
    }

    #[test]
    fn convenient_sum_terms() {
        let f = parse_str("z1 + z2 + zb1^2 + zb2^2").unwrap();
        assert_eq!(f.num_terms(), 4);
        assert_eq!(f.coeff(&mono(&[0, 0], &[0, 2])), one());
        assert_eq!(format(&f), "z1 + z2 + zb1^2 + zb2^2");
    }

    #[test]
    fn zero_and_constants() {
        let f = parse_str("0").unwrap();
        assert!(f.is_zero());
        assert_eq!(format(&f), "0");
        assert_eq!(parse_str("2i").unwrap().constant_term(), Complex64::new(0.0, 2.0));
        assert_eq!(parse_str("(3+2i)").unwrap().constant_term(), Complex64::new(3.0, 2.0));
        assert_eq!(parse_str("i*i").unwrap().constant_term(), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn conjugate_of_compound() {
        let f = parse_str("conj(i*z1*zb2 + z2^2)").unwrap();
        let g = parse_str("-i*zb1*z2 + zb2^2").unwrap();
        assert_eq!(f, g);
        assert_eq!(parse_str("conj(z1)").unwrap(), parse_str("zb1").unwrap());
    }

    #[test]
    fn expansion_of_powers() {
        let f = parse_str("(z1 + zb1)^2").unwrap();
        assert_eq!(f, parse_str("z1^2 + 2*z1*zb1 + zb1^2").unwrap());
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse_str("-z1^2").unwrap(), parse_str("-1*z1^2").unwrap());
        assert_eq!(parse_str("z1 - z2 - z1").unwrap(), parse_str("-z2").unwrap());
        assert_eq!(parse_str("2*z1^2*3").unwrap(), parse_str("6*z1^2").unwrap());
    }

    #[test]
    fn declared_dimension() {
        let f = parse(&SourceExpr::with_n("z1", 3)).unwrap();
        assert_eq!(f.n(), 3);
        let e = parse(&SourceExpr::with_n("z1 + z4", 3)).unwrap_err();
        assert_eq!(e.offset, 5);
    }

    #[test]
    fn errors_are_positioned() {
        let cases: &[(&str, usize)] = &[
            ("(", 1),
            ("2z1", 1),
            ("z1 z2", 3),
            ("z1^-1", 3),
            ("z1^1.5", 3),
            ("z0", 0),
            ("w1", 0),
            ("z1 + ", 5),
            ("z1 )", 3),
            ("", 0),
            ("z1 # 2", 3),
        ];
        for &(src, at) in cases {
            let e = parse_str(src).unwrap_err();
            assert_eq!(e.offset, at, "{src:?}: {e}");
            assert!(e.offset <= src.len());
        }
        assert!(parse_str("z1^-1").unwrap_err().message.contains("negative exponent"));
    }

    #[test]
    fn canonical_signs() {
        let f = parse_str("3 - 2*z1 - i*zb1 + (1-2i)*z1*zb1").unwrap();
        let s = format(&f);
        assert_eq!(s, "3 - 2*z1 - 1i*zb1 + (1-2i)*z1*zb1");
        assert_eq!(parse_str(&s).unwrap(), f);
        assert_eq!(format(&parse_str("-z1").unwrap()), "-z1");
    }

    fn arb_poly() -> impl Strategy<Value = MixedPolynomial> {
        let coef = (-1e3f64..1e3, -1e3f64..1e3, 0u8..4).prop_map(|(a, b, kind)| match kind {
            0 => Complex64::new(a, 0.0),
            1 => Complex64::new(0.0, b),
            2 => Complex64::new(a.round(), 0.0),
            _ => Complex64::new(a, b),
        });
        let term = (
            proptest::collection::vec(0u32..3, 3),
            proptest::collection::vec(0u32..3, 3),
            coef,
        );
        proptest::collection::vec(term, 0..8)
            .prop_map(|ts| MixedPolynomial::from_terms(3, ts.into_iter().map(|(z, zb, c)| (Monomial::new(z, zb), c))))
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(f in arb_poly()) {
            let text = format(&f);
            let g = parse(&SourceExpr::with_n(&text, 3)).unwrap();
            prop_assert_eq!(g, f);
        }

        #[test]
        fn garbage_never_panics(s in "[z b0-9i+*^() .-]{0,24}") {
            match parse_str(&s) {
                Ok(_) => {}
                Err(e) => prop_assert!(e.offset <= s.len()),
            }
        }
    }
}
