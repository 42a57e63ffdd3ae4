//! Named diagram shapes and the small expression language that composes them.
//!
//! ```text
//! expr  := term ("+" term)*
//! term  := ("8+" | "8-") "(" num ")"
//!        | "C(" sign "," sign "," sign ";" num "," num "," num ")"
//!        | "nest(" expr "," expr ")"
//!        | "merge(" num "," num "," num ")"
//! sign  := "+" | "-"
//! ```

mod realize;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use realize::realize_catalog;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum CatalogSpec {
    /// Figure-eight with a positive crossing and two lobes of area `A`.
    EightPlus { area: f64 },
    /// Figure-eight with a negative crossing.
    EightMinus { area: f64 },
    /// Caterpillar: three crossings, lobes `A1, A2, A3` and `A1 - A2 + A3`.
    Cat { signs: [Sign; 3], areas: [f64; 3] },
    Sum { parts: Vec<CatalogSpec> },
    /// `inner` placed inside the largest region of `outer`.
    Nest { inner: Box<CatalogSpec>, outer: Box<CatalogSpec> },
    /// A negative figure-eight with lobes `A1, A2` joined by a twisted band to the
    /// right lobe of a positive figure-eight whose left lobe has area `A3`.
    Merge { areas: [f64; 3] },
}

impl CatalogSpec {
    /// Checks the area constraints of every node.
    pub fn validate(&self) -> Result<()> {
        let positive = |a: f64| {
            if a.is_finite() && a > 0.0 {
                Ok(())
            } else {
                Err(Error::Constraint(format!("areas must be positive, got {a}")))
            }
        };
        match self {
            CatalogSpec::EightPlus { area } | CatalogSpec::EightMinus { area } => positive(*area),
            CatalogSpec::Cat { areas, .. } => {
                areas.iter().try_for_each(|&a| positive(a))?;
                let a4 = areas[0] - areas[1] + areas[2];
                if a4 <= 0.0 {
                    return Err(Error::Constraint(format!(
                        "caterpillar needs A1 - A2 + A3 > 0, got {a4}"
                    )));
                }
                Ok(())
            }
            CatalogSpec::Sum { parts } => parts.iter().try_for_each(|p| p.validate()),
            CatalogSpec::Nest { inner, outer } => {
                inner.validate()?;
                outer.validate()
            }
            CatalogSpec::Merge { areas } => {
                areas.iter().try_for_each(|&a| positive(a))?;
                if areas[2] <= 2.0 * areas[1] {
                    return Err(Error::Constraint(format!(
                        "merge needs A3 > 2 A2, got A2 = {}, A3 = {}",
                        areas[1], areas[2]
                    )));
                }
                Ok(())
            }
        }
    }

    /// Number of components of the realized diagram.
    pub fn component_count(&self) -> usize {
        match self {
            CatalogSpec::Sum { parts } => parts.iter().map(|p| p.component_count()).sum(),
            CatalogSpec::Nest { inner, outer } => inner.component_count() + outer.component_count(),
            _ => 1,
        }
    }
}

impl fmt::Display for CatalogSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogSpec::EightPlus { area } => write!(f, "8+({area})"),
            CatalogSpec::EightMinus { area } => write!(f, "8-({area})"),
            CatalogSpec::Cat { signs, areas } => write!(
                f,
                "C({},{},{};{},{},{})",
                signs[0].symbol(),
                signs[1].symbol(),
                signs[2].symbol(),
                areas[0],
                areas[1],
                areas[2]
            ),
            CatalogSpec::Sum { parts } => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str("+")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
            CatalogSpec::Nest { inner, outer } => write!(f, "nest({inner},{outer})"),
            CatalogSpec::Merge { areas } => write!(f, "merge({},{},{})", areas[0], areas[1], areas[2]),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { position: self.pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
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

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            self.err(format!("expected {token:?}"))
        }
    }

    fn expr(&mut self) -> Result<CatalogSpec> {
        let mut parts = vec![self.term()?];
        while self.eat("+") {
            parts.push(self.term()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { CatalogSpec::Sum { parts } })
    }

    fn term(&mut self) -> Result<CatalogSpec> {
        match self.peek() {
            Some('8') => {
                self.pos += 1;
                let plus = match self.src[self.pos..].chars().next() {
                    Some('+') => true,
                    Some('-') => false,
                    _ => return self.err("expected '+' or '-' after '8'"),
                };
                self.pos += 1;
                self.expect("(")?;
                let area = self.num()?;
                self.expect(")")?;
                Ok(if plus { CatalogSpec::EightPlus { area } } else { CatalogSpec::EightMinus { area } })
            }
            Some('C') => {
                self.pos += 1;
                self.expect("(")?;
                let s0 = self.sign()?;
                self.expect(",")?;
                let s1 = self.sign()?;
                self.expect(",")?;
                let s2 = self.sign()?;
                self.expect(";")?;
                let areas = self.three_nums()?;
                Ok(CatalogSpec::Cat { signs: [s0, s1, s2], areas })
            }
            Some('n') => {
                self.expect("nest")?;
                self.expect("(")?;
                let inner = self.expr()?;
                self.expect(",")?;
                let outer = self.expr()?;
                self.expect(")")?;
                Ok(CatalogSpec::Nest { inner: Box::new(inner), outer: Box::new(outer) })
            }
            Some('m') => {
                self.expect("merge")?;
                self.expect("(")?;
                let areas = self.three_nums()?;
                Ok(CatalogSpec::Merge { areas })
            }
            Some(c) => self.err(format!("unexpected {c:?}")),
            None => self.err("unexpected end of input"),
        }
    }

    fn three_nums(&mut self) -> Result<[f64; 3]> {
        let a = self.num()?;
        self.expect(",")?;
        let b = self.num()?;
        self.expect(",")?;
        let c = self.num()?;
        self.expect(")")?;
        Ok([a, b, c])
    }

    fn sign(&mut self) -> Result<Sign> {
        if self.eat("+") {
            Ok(Sign::Plus)
        } else if self.eat("-") {
            Ok(Sign::Minus)
        } else {
            self.err("expected sign '+' or '-'")
        }
    }

    fn num(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let len = rest
            .char_indices()
            .take_while(|&(i, c)| {
                c.is_ascii_digit()
                    || c == '.'
                    || ((c == '-' || c == '+') && (i == 0 || matches!(rest.as_bytes()[i - 1], b'e' | b'E')))
                    || ((c == 'e' || c == 'E') && i > 0)
            })
            .last()
            .map_or(0, |(i, c)| i + c.len_utf8());
        match rest[..len].parse::<f64>() {
            Ok(v) if v.is_finite() => {
                self.pos += len;
                Ok(v)
            }
            _ => self.err("expected a number"),
        }
    }
}

pub fn parse_catalog(text: &str) -> Result<CatalogSpec> {
    let mut p = Parser { src: text, pos: 0 };
    let spec = p.expr()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eights() {
        assert_eq!(parse_catalog("8+(1)").unwrap(), CatalogSpec::EightPlus { area: 1.0 });
        assert_eq!(parse_catalog(" 8-( 2.5 ) ").unwrap(), CatalogSpec::EightMinus { area: 2.5 });
    }

    #[test]
    fn caterpillar() {
        assert_eq!(
            parse_catalog("C(-,+,-;3,1,2)").unwrap(),
            CatalogSpec::Cat { signs: [Sign::Minus, Sign::Plus, Sign::Minus], areas: [3.0, 1.0, 2.0] }
        );
    }

    #[test]
    fn caterpillar_constraint() {
        assert!(matches!(parse_catalog("C(+,-,+;1,3,1)"), Err(Error::Constraint(_))));
        assert!(parse_catalog("C(+,-,+;1,3,2.5)").is_ok());
    }

    #[test]
    fn nonpositive_area() {
        assert!(matches!(parse_catalog("8+(0)"), Err(Error::Constraint(_))));
        assert!(matches!(parse_catalog("8+(-1)"), Err(Error::Constraint(_))));
    }

    #[test]
    fn sums_and_nesting() {
        let s = parse_catalog("8+(1)+8+(2)+8-(3)").unwrap();
        assert_eq!(s.component_count(), 3);
        let n = parse_catalog("nest(8-(1),8+(5))").unwrap();
        assert!(matches!(n, CatalogSpec::Nest { .. }));
        let m = parse_catalog("merge(1,1,5)").unwrap();
        assert_eq!(m, CatalogSpec::Merge { areas: [1.0, 1.0, 5.0] });
        assert!(parse_catalog("merge(1,2,3)").is_err());
    }

    #[test]
    fn syntax_positions() {
        match parse_catalog("8+(1)+x") {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 6),
            other => panic!("{other:?}"),
        }
        match parse_catalog("C(+,+;1,2,3)") {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_catalog("8+(1) 8+(2)"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_catalog(""), Err(Error::Syntax { .. })));
    }

    #[test]
    fn display_round_trips() {
        for text in ["8+(1)", "C(-,+,-;3,1,2)", "nest(8-(1),8+(6))", "8+(1)+8+(2)", "merge(0.5,1,4)"] {
            let spec = parse_catalog(text).unwrap();
            assert_eq!(parse_catalog(&spec.to_string()).unwrap(), spec);
        }
    }
}
