//! Recursive descent parser for polynomial text.
//!
//! ```text
//! expr   := ['-'] term (('+'|'-') term)*
//! term   := coeff ['*' factor ('*' factor)*] | factor ('*' factor)*
//! factor := atom ('^' posint)*
//! atom   := var | '[' expr ',' expr ']' | '(' expr ')'
//! var    := 'x' posint
//! coeff  := integer ['/' posint]
//! ```

use num_bigint::BigInt;
use thiserror::Error;

use super::{FreePoly, PolyError};
use crate::field::FieldSpec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at position {position}")]
pub struct ParseError {
    /// Byte offset into the input.
    pub position: usize,
    pub message: String,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nvars: usize,
    field: FieldSpec,
}

impl FreePoly {
    pub fn parse(text: &str, nvars: usize, field: FieldSpec) -> Result<FreePoly, ParseError> {
        let mut p = Parser { src: text.as_bytes(), pos: 0, nvars, field };
        let out = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(out)
    }
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError { position: self.pos, message: message.into() }
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

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{}`", c as char)))
        }
    }

    fn lift(&self, r: Result<FreePoly, PolyError>) -> Result<FreePoly, ParseError> {
        r.map_err(|e| self.error(e.to_string()))
    }

    fn expr(&mut self) -> Result<FreePoly, ParseError> {
        let negate = self.eat(b'-');
        let mut acc = self.term()?;
        if negate {
            acc = acc.neg();
        }
        loop {
            if self.eat(b'+') {
                let t = self.term()?;
                acc = self.lift(acc.checked_add(&t))?;
            } else if self.eat(b'-') {
                let t = self.term()?;
                acc = self.lift(acc.sub(&t))?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<FreePoly, ParseError> {
        let mut acc = if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            let c = self.coeff()?;
            let c = FreePoly::constant(self.nvars, c);
            if !self.eat(b'*') {
                return Ok(c);
            }
            let f = self.factor()?;
            self.lift(c.checked_mul(&f))?
        } else {
            self.factor()?
        };
        while self.eat(b'*') {
            let f = self.factor()?;
            acc = self.lift(acc.checked_mul(&f))?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<FreePoly, ParseError> {
        let mut base = self.atom()?;
        while self.eat(b'^') {
            let start = self.pos;
            let k = self.integer()?;
            if k <= BigInt::from(0) {
                self.pos = start;
                return Err(self.error("exponent must be a positive integer"));
            }
            let k: u32 = k.try_into().map_err(|_| self.error("exponent too large"))?;
            base = base.pow(k);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<FreePoly, ParseError> {
        match self.peek() {
            Some(b'x') => {
                let start = self.pos;
                self.pos += 1;
                if !self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                    return Err(self.error("expected variable index"));
                }
                let i = self.integer()?;
                let i: usize = i.try_into().map_err(|_| self.error("variable index too large"))?;
                if i == 0 || i > self.nvars {
                    self.pos = start;
                    return Err(self.error(format!("undeclared variable x{i} (declared x1..x{})", self.nvars)));
                }
                Ok(FreePoly::var(self.nvars, self.field, i))
            }
            Some(b'[') => {
                self.pos += 1;
                let a = self.expr()?;
                self.expect(b',')?;
                let b = self.expr()?;
                self.expect(b']')?;
                self.lift(a.commutator(&b))
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) => Err(self.error(format!("unexpected `{}`", c as char))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn integer(&mut self) -> Result<BigInt, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected integer"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(digits.parse().expect("digits"))
    }

    fn coeff(&mut self) -> Result<crate::field::Scalar, ParseError> {
        let start = self.pos;
        let num = self.integer()?;
        let den = if self.eat(b'/') {
            let d = self.integer()?;
            if d == BigInt::from(0) {
                return Err(self.error("zero denominator"));
            }
            d
        } else {
            BigInt::from(1)
        };
        self.field.from_ratio(&num, &den).map_err(|e| ParseError { position: start, message: e.to_string() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freealg::Word;

    fn q() -> FieldSpec {
        FieldSpec::rationals()
    }

    #[test]
    fn commutator_sugar() {
        let f = FreePoly::parse("[x1,x2]", 2, q()).unwrap();
        assert_eq!(f.num_terms(), 2);
        assert_eq!(f.coefficient(&Word::new(vec![1, 2])), Some(&q().one()));
        assert_eq!(f.coefficient(&Word::new(vec![2, 1])), Some(&q().from_i64(-1)));
    }

    #[test]
    fn coefficient_and_power() {
        let f = FreePoly::parse("3/2*x1^2*x2", 2, q()).unwrap();
        assert_eq!(f.num_terms(), 1);
        let half3 = q().from_ratio(&3.into(), &2.into()).unwrap();
        assert_eq!(f.coefficient(&Word::new(vec![1, 1, 2])), Some(&half3));
    }

    #[test]
    fn squared_commutator_expands_to_four_words() {
        let f = FreePoly::parse("[x1,x2]^2", 2, q()).unwrap();
        let expect = FreePoly::parse("x1*x2*x1*x2 - x1*x2*x2*x1 - x2*x1*x1*x2 + x2*x1*x2*x1", 2, q()).unwrap();
        assert_eq!(f, expect);
        assert!(f.terms().all(|(w, _)| w.len() == 4));
    }

    #[test]
    fn errors_carry_positions() {
        let e = FreePoly::parse("x1 + x3", 2, q()).unwrap_err();
        assert_eq!(e.position, 5);
        assert!(e.message.contains("undeclared"));
        let e = FreePoly::parse("x1^0", 1, q()).unwrap_err();
        assert_eq!(e.position, 3);
        let e = FreePoly::parse("[x1 x2]", 2, q()).unwrap_err();
        assert_eq!(e.position, 4);
        assert!(FreePoly::parse("x1 +", 1, q()).is_err());
        assert!(FreePoly::parse("x1)", 1, q()).is_err());
        assert!(FreePoly::parse("y1", 1, q()).is_err());
        let e = FreePoly::parse("1/5*x1", 1, FieldSpec::prime(5).unwrap()).unwrap_err();
        assert_eq!(e.position, 0);
    }

    #[test]
    fn constants_and_signs() {
        let f = FreePoly::parse("-x1 + 2 - 3*x1", 1, q()).unwrap();
        assert_eq!(f.constant_term(), Some(&q().from_i64(2)));
        assert_eq!(f.coefficient(&Word::new(vec![1])), Some(&q().from_i64(-4)));
        assert!(FreePoly::parse("0", 2, q()).unwrap().is_zero());
    }

    #[test]
    fn prime_field_coefficients() {
        let f5 = FieldSpec::prime(5).unwrap();
        let f = FreePoly::parse("3/2*x1 - x1", 1, f5).unwrap();
        assert_eq!(f.coefficient(&Word::new(vec![1])), Some(&f5.from_i64(3)));
        assert_eq!(FreePoly::parse(&f.to_string(), 1, f5).unwrap(), f);
    }
}
