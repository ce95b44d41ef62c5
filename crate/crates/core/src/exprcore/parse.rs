//! Recursive-descent parser for the ODE expression language.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | atom ('^' factor)?
//! atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
//! ```
//!
//! Unary minus binds looser than `^`, so `-p^2` is `-(p^2)`.

use num_bigint::BigInt;
use num_traits::Zero;

use super::expr::{Expr, Rational};
use super::ExprError;

const VARIABLES: &[&str] = &["x", "y", "p", "c", "lambda", "a1", "a2", "a3"];
const FUNCTIONS: &[&str] = &["exp", "ln", "sqrt"];

/// Parse with the default identifier set.
pub fn parse(input: &str) -> Result<Expr, ExprError> {
    parse_with_symbols(input, &[])
}

/// Parse, additionally accepting the given variable names.
pub fn parse_with_symbols(input: &str, extra: &[&str]) -> Result<Expr, ExprError> {
    let mut p = Parser {
        src: input.as_bytes(),
        pos: 0,
        extra,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    extra: &'a [&'a str],
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> ExprError {
        ExprError::Parse {
            position: self.pos,
            message: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(b'+') {
                terms.push(self.term()?);
            } else if self.eat(b'-') {
                terms.push(-self.term()?);
            } else {
                break;
            }
        }
        Ok(Expr::add(terms))
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                acc = acc * self.factor()?;
            } else if self.eat(b'/') {
                acc = acc / self.factor()?;
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        if self.eat(b'-') {
            return Ok(-self.factor()?);
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            let exponent = self.factor()?;
            return Ok(Expr::pow(base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn digits(&mut self) -> Option<BigInt> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()?
            .parse()
            .ok()
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let num = self.digits().ok_or_else(|| self.error("expected number"))?;
        // `a/b` with no whitespace is a single rational literal.
        if self.src.get(self.pos) == Some(&b'/')
            && self.src.get(self.pos + 1).is_some_and(u8::is_ascii_digit)
        {
            let save = self.pos;
            self.pos += 1;
            let den = self.digits().ok_or_else(|| self.error("expected denominator"))?;
            if den.is_zero() {
                self.pos = save;
                return Err(self.error("zero denominator in rational literal"));
            }
            return Ok(Expr::constant(Rational::new(num, den)));
        }
        Ok(Expr::constant(Rational::from_integer(num)))
    }

    fn ident(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        if FUNCTIONS.contains(&name) {
            if !self.eat(b'(') {
                return Err(self.error("expected '(' after function name"));
            }
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.error("expected ')'"));
            }
            return Ok(match name {
                "exp" => Expr::exp(arg),
                "ln" => Expr::ln(arg),
                _ => Expr::sqrt(arg),
            });
        }
        if VARIABLES.contains(&name) || self.extra.contains(&name) {
            return Ok(Expr::var(name));
        }
        Err(ExprError::UnknownIdentifier {
            position: start,
            name: name.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = parse("-p^2").unwrap();
        assert_eq!(e, -Expr::pow(Expr::var("p"), Expr::int(2)));
    }

    #[test]
    fn rational_literals() {
        assert_eq!(parse("3/4").unwrap(), Expr::frac(3, 4));
        assert_eq!(parse("3 / 4").unwrap(), Expr::frac(3, 4));
        assert_eq!(
            parse("1/2*x").unwrap(),
            Expr::frac(1, 2) * Expr::var("x")
        );
    }

    #[test]
    fn power_is_right_associative() {
        let e = parse("x^2^3").unwrap();
        assert_eq!(e, Expr::pow(Expr::var("x"), Expr::int(8)));
    }

    #[test]
    fn reports_positions() {
        match parse("x + * y") {
            Err(ExprError::Parse { position, .. }) => assert_eq!(position, 4),
            other => panic!("unexpected {other:?}"),
        }
        match parse("x + z") {
            Err(ExprError::UnknownIdentifier { position, name }) => {
                assert_eq!(position, 4);
                assert_eq!(name, "z");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("(x").is_err());
        assert!(parse("exp x").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn extra_symbols() {
        assert!(parse("b1").is_err());
        assert_eq!(parse_with_symbols("b1", &["b1"]).unwrap(), Expr::var("b1"));
    }
}
