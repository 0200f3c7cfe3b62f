//! Text front end for `c2·y'' + c1·y' + c0·y = 0`.
//!
//! Grammar (whitespace is ignored between tokens):
//!
//! ```text
//! equation := [sign] term (('+'|'-') [sign] term)* '=' [sign] number
//! term     := number ['*'] func | func
//! func     := "y''" | "y'" | "y"
//! number   := digits ['.' digits] [('e'|'E') ['+'|'-'] digits]
//! ```
//!
//! Terms may appear in any order and repeated terms accumulate. The
//! right-hand side must be a literal equal to zero.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Coefficients of `c2·y'' + c1·y' + c0·y = 0` exactly as written.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawEquation {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

/// Monic coefficients of `y'' + a·y' + b·y = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub a: f64,
    pub b: f64,
}

impl Coefficients {
    pub fn new(a: f64, b: f64) -> Result<Self, ParseError> {
        if !a.is_finite() || !b.is_finite() {
            return Err(ParseError::NonFinite);
        }
        Ok(Coefficients { a, b })
    }
}

impl fmt::Display for Coefficients {
    /// Renders the equation in a form [`parse_ode`] accepts.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y''")?;
        for (coef, func) in [(self.a, "y'"), (self.b, "y")] {
            let sign = if coef.is_sign_negative() { '-' } else { '+' };
            write!(f, " {} {}*{}", sign, coef.abs(), func)?;
        }
        write!(f, " = 0")
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at column {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("derivative of order {order} at column {pos}; only y, y' and y'' are supported")]
    Order { pos: usize, order: usize },
    #[error("right-hand side must be 0, found {0}")]
    NonzeroRhs(String),
    #[error("coefficient of y'' is zero; the equation is not second order")]
    DegenerateOrder,
    #[error("coefficients must be finite")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64, String),
    /// `y` followed by this many primes.
    Func(usize),
    Plus,
    Minus,
    Star,
    Equals,
}

#[derive(Debug, Clone, PartialEq)]
struct Spanned {
    tok: Token,
    pos: usize,
}

fn syntax(pos: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { pos, msg: msg.into() }
}

fn tokenize(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let pos = i + 1;
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'+' => out.push(Spanned { tok: Token::Plus, pos }),
            b'-' => out.push(Spanned { tok: Token::Minus, pos }),
            b'*' => out.push(Spanned { tok: Token::Star, pos }),
            b'=' => out.push(Spanned { tok: Token::Equals, pos }),
            b'y' => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j] == b'\'' {
                    j += 1;
                }
                let order = j - i - 1;
                if order > 2 {
                    return Err(ParseError::Order { pos, order });
                }
                if j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'(') {
                    return Err(syntax(j + 1, "the unknown function must be written as plain `y`"));
                }
                out.push(Spanned { tok: Token::Func(order), pos });
                i = j;
                continue;
            }
            b'0'..=b'9' => {
                let end = scan_number(bytes, i);
                let lit = &text[i..end];
                let value: f64 = lit.parse().map_err(|_| syntax(pos, format!("malformed number `{lit}`")))?;
                if !value.is_finite() {
                    return Err(syntax(pos, format!("number `{lit}` is out of range")));
                }
                out.push(Spanned { tok: Token::Number(value, lit.to_string()), pos });
                i = end;
                continue;
            }
            b'/' => return Err(syntax(pos, "fractions are not accepted; write a decimal such as 0.5")),
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(syntax(pos, format!("unexpected character `{ch}`")));
            }
        }
        i += 1;
    }
    Ok(out)
}

/// End index of the decimal literal starting at `start`.
fn scan_number(bytes: &[u8], start: usize) -> usize {
    let digits = |mut k: usize| {
        while k < bytes.len() && bytes[k].is_ascii_digit() {
            k += 1;
        }
        k
    };
    let mut end = digits(start);
    if end + 1 < bytes.len() && bytes[end] == b'.' && bytes[end + 1].is_ascii_digit() {
        end = digits(end + 1);
    }
    if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
        let mut k = end + 1;
        if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
            k += 1;
        }
        if k < bytes.len() && bytes[k].is_ascii_digit() {
            end = digits(k);
        }
    }
    end
}

struct Parser {
    toks: Vec<Spanned>,
    idx: usize,
    end_pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.idx).map(|s| &s.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map_or(self.end_pos, |s| s.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.toks.get(self.idx).map(|s| s.tok.clone());
        self.idx += 1;
        t
    }

    /// Optional unary sign; returns -1.0 or 1.0.
    fn sign(&mut self) -> f64 {
        match self.peek() {
            Some(Token::Minus) => {
                self.idx += 1;
                -1.0
            }
            Some(Token::Plus) => {
                self.idx += 1;
                1.0
            }
            _ => 1.0,
        }
    }

    /// One term: returns (derivative order, coefficient).
    fn term(&mut self) -> Result<(usize, f64), ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Token::Func(order)) => Ok((order, 1.0)),
            Some(Token::Number(value, lit)) => {
                if self.peek() == Some(&Token::Star) {
                    self.idx += 1;
                }
                let fpos = self.pos();
                match self.bump() {
                    Some(Token::Func(order)) => Ok((order, value)),
                    _ => Err(syntax(fpos, format!("number `{lit}` must multiply y, y' or y''"))),
                }
            }
            Some(_) => Err(syntax(pos, "expected a term")),
            None => Err(syntax(pos, "unexpected end of input, expected a term")),
        }
    }
}

/// Parses `text` into the summed coefficients of y'', y' and y.
pub fn parse_ode(text: &str) -> Result<RawEquation, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, idx: 0, end_pos: text.len() + 1 };
    let mut acc = [0.0f64; 3];

    let mut sign = p.sign();
    loop {
        let (order, coef) = p.term()?;
        acc[order] += sign * coef;
        let pos = p.pos();
        match p.bump() {
            Some(Token::Plus) => sign = p.sign(),
            Some(Token::Minus) => sign = -p.sign(),
            Some(Token::Equals) => break,
            Some(_) => return Err(syntax(pos, "expected `+`, `-` or `=`")),
            None => return Err(syntax(pos, "missing `= 0`")),
        }
    }

    let rhs_start = p.idx;
    let rhs_sign = p.sign();
    let pos = p.pos();
    match p.bump() {
        Some(Token::Number(value, lit)) => {
            if p.idx < p.toks.len() {
                return Err(ParseError::NonzeroRhs(rhs_text(&p.toks[rhs_start..])));
            }
            if value != 0.0 {
                let shown = if rhs_sign < 0.0 { format!("-{lit}") } else { lit };
                return Err(ParseError::NonzeroRhs(shown));
            }
        }
        Some(Token::Func(_)) => {
            return Err(ParseError::NonzeroRhs(rhs_text(&p.toks[rhs_start..])));
        }
        Some(_) => return Err(syntax(pos, "expected 0 on the right-hand side")),
        None => return Err(syntax(pos, "missing right-hand side, expected 0")),
    }

    if acc.iter().any(|c| !c.is_finite()) {
        return Err(ParseError::NonFinite);
    }
    Ok(RawEquation { c2: acc[2], c1: acc[1], c0: acc[0] })
}

fn rhs_text(toks: &[Spanned]) -> String {
    toks.iter()
        .map(|s| match &s.tok {
            Token::Number(_, lit) => lit.clone(),
            Token::Func(order) => format!("y{}", "'".repeat(*order)),
            Token::Plus => "+".into(),
            Token::Minus => "-".into(),
            Token::Star => "*".into(),
            Token::Equals => "=".into(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Divides through by the leading coefficient.
pub fn normalize(eq: RawEquation) -> Result<Coefficients, ParseError> {
    if eq.c2 == 0.0 {
        return Err(ParseError::DegenerateOrder);
    }
    Coefficients::new(eq.c1 / eq.c2, eq.c0 / eq.c2)
}

/// `parse_ode` followed by `normalize`.
pub fn parse_coefficients(text: &str) -> Result<Coefficients, ParseError> {
    normalize(parse_ode(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(c2: f64, c1: f64, c0: f64) -> RawEquation {
        RawEquation { c2, c1, c0 }
    }

    #[test]
    fn reads_terms() {
        assert_eq!(parse_ode("y'' + 3y' + 2y = 0").unwrap(), raw(1.0, 3.0, 2.0));
        assert_eq!(parse_ode("y'' = 0").unwrap(), raw(1.0, 0.0, 0.0));
        assert_eq!(parse_ode("2y'' - y' + 0.5y = 0").unwrap(), raw(2.0, -1.0, 0.5));
    }

    #[test]
    fn nonzero_rhs() {
        assert_eq!(parse_ode("y'' + y = 1"), Err(ParseError::NonzeroRhs("1".into())));
        assert!(matches!(parse_ode("y'' = -y"), Err(ParseError::NonzeroRhs(_))));
        assert!(matches!(parse_ode("y'' + y = 0 + 1"), Err(ParseError::NonzeroRhs(_))));
    }

    #[test]
    fn zero_rhs_spellings() {
        for text in ["y''=0", "y'' = 0.0", "y'' = -0", "y'' = 0e3"] {
            assert_eq!(parse_ode(text).unwrap(), raw(1.0, 0.0, 0.0), "{text}");
        }
    }

    #[test]
    fn third_derivative_is_order_error() {
        assert_eq!(parse_ode("y''' + y = 0"), Err(ParseError::Order { pos: 1, order: 3 }));
    }

    #[test]
    fn syntax_errors() {
        for text in [
            "y'' + 3 = 0",
            "y'' + y",
            "y'' + + + y = 0",
            "y'' 3y = 0",
            "1/2y'' + y = 0",
            "u'' + u = 0",
            "y(x)'' = 0",
            "y'' + k*y = 0",
            "y'' + 2 * = 0",
            "= 0",
            "y'' + y = ",
            "y'' + y == 0",
            "y'' & y = 0",
        ] {
            assert!(matches!(parse_ode(text), Err(ParseError::Syntax { .. })), "{text}");
        }
    }

    #[test]
    fn signs_and_literals() {
        assert_eq!(parse_ode("-y'' + -3.25e-1*y = 0").unwrap(), raw(-1.0, 0.0, -0.325));
        assert_eq!(parse_ode("y'' - -2y' = 0").unwrap(), raw(1.0, 2.0, 0.0));
        assert_eq!(parse_ode("1E2 * y'' + 4 y = 0").unwrap(), raw(100.0, 0.0, 4.0));
    }

    #[test]
    fn duplicates_accumulate() {
        assert_eq!(parse_ode("y' + y'' + y' - y'' + y'' = 0").unwrap(), raw(1.0, 2.0, 0.0));
    }

    #[test]
    fn out_of_range_literal() {
        assert!(matches!(parse_ode("1e400y'' = 0"), Err(ParseError::Syntax { .. })));
        assert_eq!(parse_ode("1e308y'' + 1e308y'' = 0"), Err(ParseError::NonFinite));
    }

    #[test]
    fn normalizes() {
        assert_eq!(normalize(raw(2.0, 6.0, 4.0)).unwrap(), Coefficients { a: 3.0, b: 2.0 });
        assert_eq!(normalize(raw(1.0, 0.0, 1.0)).unwrap(), Coefficients { a: 0.0, b: 1.0 });
        assert_eq!(normalize(raw(0.0, 1.0, 1.0)), Err(ParseError::DegenerateOrder));
        assert_eq!(normalize(raw(1e-300, 1e300, 0.0)), Err(ParseError::NonFinite));
    }

    #[test]
    fn display_reparses() {
        let c = Coefficients { a: -0.125, b: 3e-7 };
        assert_eq!(c.to_string(), "y'' - 0.125*y' + 0.0000003*y = 0");
        assert_eq!(parse_coefficients(&c.to_string()).unwrap(), c);
    }
}
