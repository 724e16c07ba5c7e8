//! Text grammar for polynomials and potentials.
//!
//! ```text
//! poly   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := number | 'i' | x<k>['^'<p>] | name | '(' poly ')'
//! number := decimal | decimal 'e' exponent | integer '/' integer
//! ```
//! Factors multiply left to right (noncommutatively). A `name` other than
//! `i` or `x<k>` is a coupling; a term may carry at most one.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scalar::{Coeff, GaussRational, Scalar};

use super::{Monomial, NcError, Polynomial, Potential, MAX_COLORS};

/// One term of a parsed expression: `coeff · coupling · word`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedTerm {
    pub coeff: GaussRational,
    pub coupling: Option<String>,
    pub word: Monomial,
}

/// A parsed expression with like terms collected.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ParsedPolynomial {
    pub terms: Vec<ParsedTerm>,
}

impl ParsedPolynomial {
    fn constant(c: GaussRational) -> Self {
        ParsedPolynomial {
            terms: vec![ParsedTerm {
                coeff: c,
                coupling: None,
                word: Monomial::unit(),
            }],
        }
    }

    fn collect(terms: Vec<ParsedTerm>) -> Self {
        let mut map: BTreeMap<(Option<String>, Monomial), GaussRational> = BTreeMap::new();
        let mut order = Vec::new();
        for t in terms {
            let key = (t.coupling, t.word);
            match map.get_mut(&key) {
                Some(c) => c.add_assign_ref(&t.coeff),
                None => {
                    order.push(key.clone());
                    map.insert(key, t.coeff);
                }
            }
        }
        let terms = order
            .into_iter()
            .filter_map(|key| {
                let c = map.remove(&key)?;
                (!c.is_zero()).then(|| ParsedTerm {
                    coeff: c,
                    coupling: key.0,
                    word: key.1,
                })
            })
            .collect();
        ParsedPolynomial { terms }
    }

    fn product(&self, other: &Self, pos: usize) -> Result<Self, NcError> {
        let mut out = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                let coupling = match (&a.coupling, &b.coupling) {
                    (Some(_), Some(_)) => {
                        return Err(NcError::Parse {
                            pos,
                            msg: "a term may carry at most one coupling".into(),
                        })
                    }
                    (Some(n), None) | (None, Some(n)) => Some(n.clone()),
                    (None, None) => None,
                };
                out.push(ParsedTerm {
                    coeff: a.coeff.mul_ref(&b.coeff),
                    coupling,
                    word: a.word.concat(&b.word),
                });
            }
        }
        Ok(Self::collect(out))
    }

    pub fn colors_used(&self) -> usize {
        self.terms.iter().map(|t| t.word.colors_used()).max().unwrap_or(0)
    }

    /// Converts to a plain polynomial; couplings are not allowed here.
    pub fn to_polynomial<S: Scalar>(&self) -> Result<Polynomial<S>, NcError> {
        let mut p = Polynomial::zero();
        for t in &self.terms {
            if let Some(name) = &t.coupling {
                return Err(NcError::Parse {
                    pos: 0,
                    msg: format!("unexpected coupling `{name}` in a polynomial"),
                });
            }
            p.add_term(t.word.clone(), S::from_parts(&t.coeff.re, &t.coeff.im));
        }
        Ok(p)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, NcError> {
        Err(NcError::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
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

    fn poly(&mut self) -> Result<ParsedPolynomial, NcError> {
        let mut terms = Vec::new();
        let mut negate = false;
        if self.eat(b'-') {
            negate = true;
        } else {
            self.eat(b'+');
        }
        loop {
            let t = self.term()?;
            for mut pt in t.terms {
                if negate {
                    pt.coeff = -pt.coeff;
                }
                terms.push(pt);
            }
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    negate = false;
                }
                Some(b'-') => {
                    self.pos += 1;
                    negate = true;
                }
                _ => break,
            }
        }
        Ok(ParsedPolynomial::collect(terms))
    }

    fn term(&mut self) -> Result<ParsedPolynomial, NcError> {
        let start = self.pos;
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            let f = self.factor()?;
            acc = acc.product(&f, start)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<ParsedPolynomial, NcError> {
        match self.peek() {
            None => self.err("unexpected end of input"),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.poly()?;
                if !self.eat(b')') {
                    return self.err("expected `)`");
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let q = self.number()?;
                // `2i` is accepted as shorthand for `2*i`.
                if self.src.get(self.pos) == Some(&b'i')
                    && !self
                        .src
                        .get(self.pos + 1)
                        .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
                {
                    self.pos += 1;
                    return Ok(ParsedPolynomial::constant(GaussRational::new(BigRational::zero(), q)));
                }
                Ok(ParsedPolynomial::constant(GaussRational::real(q)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                if ident == "i" {
                    return Ok(ParsedPolynomial::constant(GaussRational::new(
                        BigRational::zero(),
                        BigRational::one(),
                    )));
                }
                let bytes = ident.as_bytes();
                if (bytes[0] == b'x' || bytes[0] == b'X')
                    && bytes.len() > 1
                    && bytes[1..].iter().all(u8::is_ascii_digit)
                {
                    let k: usize = ident[1..].parse().map_err(|_| NcError::Parse {
                        pos: start,
                        msg: "bad variable index".into(),
                    })?;
                    if k == 0 || k > MAX_COLORS {
                        return Err(NcError::Parse {
                            pos: start,
                            msg: format!("variable index must lie in 1..={MAX_COLORS}"),
                        });
                    }
                    let mut power = 1;
                    if self.eat(b'^') {
                        self.skip_ws();
                        let ps = self.pos;
                        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                            self.pos += 1;
                        }
                        if ps == self.pos {
                            return self.err("expected an exponent");
                        }
                        power = std::str::from_utf8(&self.src[ps..self.pos])
                            .unwrap()
                            .parse()
                            .map_err(|_| NcError::Parse {
                                pos: ps,
                                msg: "exponent too large".into(),
                            })?;
                    }
                    let word = Monomial::from_indices(&vec![(k - 1) as u8; power]);
                    return Ok(ParsedPolynomial {
                        terms: vec![ParsedTerm {
                            coeff: GaussRational::one(),
                            coupling: None,
                            word,
                        }],
                    });
                }
                Ok(ParsedPolynomial {
                    terms: vec![ParsedTerm {
                        coeff: GaussRational::one(),
                        coupling: Some(ident.to_string()),
                        word: Monomial::unit(),
                    }],
                })
            }
            Some(c) => self.err(format!("unexpected character `{}`", c as char)),
        }
    }

    fn digits(&mut self) -> &'a [u8] {
        let s = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        &self.src[s..self.pos]
    }

    fn number(&mut self) -> Result<BigRational, NcError> {
        self.skip_ws();
        let start = self.pos;
        let int_part = self.digits();
        let mut frac: &[u8] = &[];
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            frac = self.digits();
        }
        if int_part.is_empty() && frac.is_empty() {
            return self.err("expected a number");
        }
        let mut mantissa = String::new();
        mantissa.push_str(std::str::from_utf8(int_part).unwrap());
        mantissa.push_str(std::str::from_utf8(frac).unwrap());
        let mut value = BigRational::new(
            mantissa.parse::<BigInt>().unwrap_or_default(),
            BigInt::from(10).pow(frac.len() as u32),
        );
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E'))
            && self
                .src
                .get(self.pos + 1)
                .is_some_and(|c| c.is_ascii_digit() || *c == b'-' || *c == b'+')
        {
            self.pos += 1;
            let neg = match self.src.get(self.pos) {
                Some(b'-') => {
                    self.pos += 1;
                    true
                }
                Some(b'+') => {
                    self.pos += 1;
                    false
                }
                _ => false,
            };
            let e = self.digits();
            let e: u32 = std::str::from_utf8(e).unwrap().parse().map_err(|_| NcError::Parse {
                pos: start,
                msg: "bad exponent".into(),
            })?;
            let scale = BigRational::from_integer(BigInt::from(10).pow(e));
            value = if neg { value / scale } else { value * scale };
        }
        if frac.is_empty() && self.src.get(self.pos) == Some(&b'/') {
            self.pos += 1;
            let den = self.digits();
            if den.is_empty() {
                return self.err("expected a denominator");
            }
            let den: BigInt = std::str::from_utf8(den).unwrap().parse().unwrap();
            if den.is_zero() {
                return self.err("zero denominator");
            }
            value /= BigRational::from_integer(den);
        }
        Ok(value)
    }
}

/// Parses an expression, possibly containing couplings.
pub fn parse_expression(text: &str) -> Result<ParsedPolynomial, NcError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    if p.peek().is_none() {
        return p.err("empty expression");
    }
    let out = p.poly()?;
    if p.peek().is_some() {
        return p.err("unexpected trailing input");
    }
    Ok(out)
}

pub fn parse_polynomial<S: Scalar>(text: &str) -> Result<Polynomial<S>, NcError> {
    parse_expression(text)?.to_polynomial()
}

/// Parses a single word with unit coefficient, such as `x1^2*x2`.
pub fn parse_monomial(text: &str) -> Result<Monomial, NcError> {
    let parsed = parse_expression(text)?;
    match parsed.terms.as_slice() {
        [t] if t.coupling.is_none() && t.coeff.is_one() => Ok(t.word.clone()),
        _ => Err(NcError::Parse {
            pos: 0,
            msg: format!("`{text}` is not a single monomial"),
        }),
    }
}

/// Parses and validates a potential. `colors` is a lower bound on `m`.
pub fn parse_potential<S: Scalar>(text: &str, colors: usize) -> Result<Potential<S>, NcError> {
    let parsed = parse_expression(text)?;
    Potential::from_parsed(&parsed, colors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> GaussRational {
        GaussRational::from_ratio(n, d)
    }

    #[test]
    fn decimal_and_rational_coefficients() {
        let p = parse_expression("0.5*x1^4 + x1*x2").unwrap();
        assert_eq!(p.terms.len(), 2);
        assert_eq!(p.terms[0].coeff, q(1, 2));
        assert_eq!(p.terms[0].word, Monomial::from_indices(&[0, 0, 0, 0]));
        assert_eq!(p.terms[1].word, Monomial::from_indices(&[0, 1]));
        let p = parse_expression("-3/4 x1").err();
        assert!(p.is_some(), "juxtaposition without `*` is rejected");
        let p = parse_expression("-3/4*x1 - 1e-2*x2").unwrap();
        assert_eq!(p.terms[0].coeff, q(-3, 4));
        assert_eq!(p.terms[1].coeff, q(-1, 100));
    }

    #[test]
    fn noncommutative_order_is_kept() {
        let p: Polynomial<GaussRational> = parse_polynomial("x2*x1 - x1*x2").unwrap();
        assert_eq!(p.coeff(&Monomial::from_indices(&[1, 0])), q(1, 1));
        assert_eq!(p.coeff(&Monomial::from_indices(&[0, 1])), q(-1, 1));
    }

    #[test]
    fn complex_and_grouped_factors() {
        let p = parse_expression("(1+i)*x1*x2 + 2i*x2").unwrap();
        assert_eq!(p.terms[0].coeff.to_string(), "1+1i");
        assert_eq!(p.terms[1].coeff.to_string(), "2i");
        let p = parse_expression("t*(x1^4 + x2^4) + b*x1*x2").unwrap();
        assert_eq!(p.terms.len(), 3);
        assert_eq!(p.terms[0].coupling.as_deref(), Some("t"));
        assert_eq!(p.terms[2].coupling.as_deref(), Some("b"));
    }

    #[test]
    fn like_terms_collect() {
        let p = parse_expression("x1 + x1 - 2*x1 + x2").unwrap();
        assert_eq!(p.terms.len(), 1);
    }

    #[test]
    fn errors_carry_positions() {
        match parse_expression("x1 + * x2") {
            Err(NcError::Parse { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_expression("").is_err());
        assert!(parse_expression("x1^").is_err());
        assert!(parse_expression("t*b*x1").is_err());
        assert!(parse_expression("x0").is_err());
        assert!(parse_expression("(x1").is_err());
    }

    #[test]
    fn monomial_parser() {
        assert_eq!(parse_monomial("x1^2*x2").unwrap(), Monomial::from_indices(&[0, 0, 1]));
        assert_eq!(parse_monomial("1").unwrap(), Monomial::unit());
        assert!(parse_monomial("2*x1").is_err());
    }
}
