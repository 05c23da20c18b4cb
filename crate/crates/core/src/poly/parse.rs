//! Text form of bivariate polynomials, e.g. `w^3 - 3*w + 2*z^4`.
//!
//! Terms are sums of `c * w^a * z^b` with integer or decimal `c`; the `*`
//! between factors is optional and factors may come in any order. No
//! parentheses and no imaginary unit.

use super::{BivariatePolynomial, UnivariatePolynomial};
use crate::error::{Error, Result};

pub fn parse_polynomial(text: &str) -> Result<BivariatePolynomial> {
    let raw: Vec<char> = text.chars().collect();
    for win in raw.windows(3) {
        let numeric = |c: char| c.is_ascii_digit() || c == '.';
        if numeric(win[0]) && win[1].is_whitespace() && numeric(win[2]) {
            return Err(Error::InvalidInput("polynomial parse error: whitespace inside a number".into()));
        }
    }
    let mut table: Vec<Vec<f64>> = Vec::new();
    let mut p = Parser {
        chars: text.chars().filter(|c| !c.is_whitespace()).collect(),
        pos: 0,
    };
    if p.chars.is_empty() {
        return Err(Error::InvalidInput("empty polynomial".into()));
    }
    let mut first = true;
    while !p.at_end() {
        let sign = match p.peek() {
            Some('+') => {
                p.pos += 1;
                1.0
            }
            Some('-') => {
                p.pos += 1;
                -1.0
            }
            _ if first => 1.0,
            Some(c) => return Err(p.error(&format!("expected `+` or `-`, found `{c}`"))),
            None => unreachable!(),
        };
        first = false;
        let (coeff, wdeg, zdeg) = p.term()?;
        if table.len() <= wdeg {
            table.resize(wdeg + 1, Vec::new());
        }
        let row = &mut table[wdeg];
        if row.len() <= zdeg {
            row.resize(zdeg + 1, 0.0);
        }
        row[zdeg] += sign * coeff;
    }
    let w_coeffs = table.iter().map(|row| UnivariatePolynomial::from_real(row)).collect();
    BivariatePolynomial::new(w_coeffs)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn error(&self, msg: &str) -> Error {
        Error::InvalidInput(format!("polynomial parse error at offset {}: {msg}", self.pos))
    }

    fn term(&mut self) -> Result<(f64, usize, usize)> {
        let mut coeff = 1.0;
        let mut wdeg = 0;
        let mut zdeg = 0;
        let mut factors = 0;
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_digit() || c == '.' => coeff *= self.number()?,
                Some(v @ ('w' | 'z')) => {
                    self.pos += 1;
                    let e = if self.peek() == Some('^') {
                        self.pos += 1;
                        let e = self.number()?;
                        if e.fract() != 0.0 || e < 0.0 {
                            return Err(self.error("exponents must be non-negative integers"));
                        }
                        e as usize
                    } else {
                        1
                    };
                    if v == 'w' {
                        wdeg += e;
                    } else {
                        zdeg += e;
                    }
                }
                Some(c) => return Err(self.error(&format!("unexpected `{c}`"))),
                None => return Err(self.error("dangling operator")),
            }
            factors += 1;
            match self.peek() {
                Some('*') => self.pos += 1,
                Some('w' | 'z') => {}
                Some(c) if (c.is_ascii_digit() || c == '.') && factors > 0 => {
                    return Err(self.error("use `*` between numeric factors"))
                }
                _ => break,
            }
        }
        Ok((coeff, wdeg, zdeg))
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse::<f64>().map_err(|_| self.error(&format!("bad number `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_cubic_family() {
        let f = parse_polynomial("w^3 - 3*w + 2*z^4").unwrap();
        let g = BivariatePolynomial::from_table(&[vec![0.0, 0.0, 0.0, 0.0, 2.0], vec![-3.0], vec![], vec![1.0]]).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn implicit_products_and_decimals() {
        let f = parse_polynomial("w^2 - 0.5 z w + z^2 w^0 - 1").unwrap();
        let g = BivariatePolynomial::from_table(&[vec![-1.0, 0.0, 1.0], vec![0.0, -0.5], vec![1.0]]).unwrap();
        assert_eq!(f, g);
        assert_eq!(parse_polynomial("-z + w^2").unwrap(), parse_polynomial("w^2 - z").unwrap());
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "w^2 +", "w^2 - x", "w^-2", "w^2 (z)", "w^2 z^1.5", "2 3 w^2"] {
            assert!(parse_polynomial(bad).is_err(), "{bad}");
        }
        // leading coefficient depends on z
        assert!(parse_polynomial("z w^2 - 1").is_err());
    }
}
