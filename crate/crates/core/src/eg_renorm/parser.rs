//! Term-list expressions for one-dimensional distributions.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := [coeff '*'] atom
//! coeff    := number | '(' linear ')'
//! atom     := delta(k) | mono(m) | heaviside(m)
//!           | xpi0(exp[, p]) | xmi0(exp[, p]) | xplus(exp[, p]) | xminus(exp[, p])
//! exp      := linear form in the unit 'i' and the regulator 'z'
//! ```
//!
//! Example: `2*xplus(-1+z) - (0.5+1i)*delta(1) + xpi0(-2,1)`.

use super::distribution::{Exponent, Side, SymbolicDistribution1D, Term, TermKind};
use super::EgError;
use num_complex::Complex64;

pub const MAX_INPUT_LEN: usize = 4096;
pub const MAX_TERMS: usize = 64;
pub const MAX_LOG_POWER: usize = 8;
pub const MAX_ORDER: usize = 16;

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

/// `constant + slope·z`.
#[derive(Clone, Copy, Default)]
struct Linear {
    c: Complex64,
    z: Complex64,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, EgError> {
        Err(EgError::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), EgError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn number(&mut self) -> Result<Option<f64>, EgError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < self.s.len() && self.pos > start && matches!(self.s[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.s.len() && matches!(self.s[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            let ds = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == ds {
                self.pos = save;
            }
        }
        if self.pos == start {
            return Ok(None);
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            _ => {
                self.pos = start;
                self.err(format!("bad number '{text}'"))
            }
        }
    }

    fn ident(&mut self) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).expect("ascii")
    }

    /// One signed item of a linear form.
    fn linear_item(&mut self, depth: usize) -> Result<Linear, EgError> {
        if depth > 4 {
            return self.err("nesting too deep");
        }
        self.skip_ws();
        let start = self.pos;
        let mut acc = if self.eat(b'(') {
            let inner = self.linear(depth + 1)?;
            self.expect(b')')?;
            inner
        } else {
            let n = self.number()?;
            Linear { c: Complex64::new(n.unwrap_or(1.0), 0.0), z: Complex64::default() }
        };
        loop {
            match self.s.get(self.pos) {
                Some(b'i') => {
                    self.pos += 1;
                    acc.c *= Complex64::i();
                    acc.z *= Complex64::i();
                }
                Some(b'z') => {
                    if acc.z != Complex64::default() {
                        return self.err("nonlinear in z");
                    }
                    self.pos += 1;
                    acc = Linear { c: Complex64::default(), z: acc.c };
                }
                _ => break,
            }
        }
        if self.pos == start {
            return self.err("expected a number");
        }
        Ok(acc)
    }

    fn linear(&mut self, depth: usize) -> Result<Linear, EgError> {
        let mut sign = 1.0;
        if self.eat(b'-') {
            sign = -1.0;
        } else {
            self.eat(b'+');
        }
        let first = self.linear_item(depth)?;
        let mut acc = Linear { c: first.c * sign, z: first.z * sign };
        loop {
            let s = match self.peek() {
                Some(b'+') => 1.0,
                Some(b'-') => -1.0,
                _ => break,
            };
            self.pos += 1;
            let it = self.linear_item(depth)?;
            acc.c += it.c * s;
            acc.z += it.z * s;
        }
        Ok(acc)
    }

    fn small_int(&mut self, cap: usize) -> Result<usize, EgError> {
        match self.number()? {
            Some(v) if v.fract() == 0.0 && v >= 0.0 && v <= cap as f64 => Ok(v as usize),
            _ => self.err(format!("expected an integer in 0..={cap}")),
        }
    }

    fn atom(&mut self) -> Result<TermKind, EgError> {
        let name = self.ident();
        self.expect(b'(')?;
        let kind = match name {
            "delta" => TermKind::Delta(self.small_int(MAX_ORDER)?),
            "mono" => TermKind::Monomial(self.small_int(MAX_ORDER)?),
            "heaviside" => TermKind::HeavisideMonomial(self.small_int(MAX_ORDER)?),
            "xpi0" | "xmi0" | "xplus" | "xminus" => {
                let e = self.linear(0)?;
                let p = if self.eat(b',') { self.small_int(MAX_LOG_POWER)? } else { 0 };
                let a = Exponent { base: e.c, slope: e.z };
                match name {
                    "xpi0" => TermKind::PowerPlusI0(a, p),
                    "xmi0" => TermKind::PowerMinusI0(a, p),
                    "xplus" => TermKind::HalfLinePower(Side::Plus, a, p),
                    _ => TermKind::HalfLinePower(Side::Minus, a, p),
                }
            }
            "" => return self.err("expected an atom"),
            other => return self.err(format!("unknown atom '{other}'")),
        };
        self.expect(b')')?;
        Ok(kind)
    }

    fn term(&mut self, sign: f64) -> Result<Term, EgError> {
        let coeff = match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let l = self.linear(0)?;
                if l.z != Complex64::default() {
                    return self.err("coefficients cannot depend on z");
                }
                self.expect(b')')?;
                self.expect(b'*')?;
                l.c
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let v = self.number()?.expect("digit present");
                self.expect(b'*')?;
                Complex64::new(v, 0.0)
            }
            _ => Complex64::new(1.0, 0.0),
        };
        Ok(Term::new(coeff * sign, self.atom()?))
    }
}

pub fn parse_distribution(input: &str) -> Result<SymbolicDistribution1D, EgError> {
    if input.len() > MAX_INPUT_LEN {
        return Err(EgError::Parse { pos: MAX_INPUT_LEN, msg: "input too long".into() });
    }
    if !input.is_ascii() {
        let pos = input.char_indices().find(|(_, c)| !c.is_ascii()).map(|p| p.0).unwrap_or(0);
        return Err(EgError::Parse { pos, msg: "non-ASCII input".into() });
    }
    let mut cur = Cursor { s: input.as_bytes(), pos: 0 };
    let mut terms = Vec::new();
    let mut sign = if cur.eat(b'-') {
        -1.0
    } else {
        cur.eat(b'+');
        1.0
    };
    loop {
        if terms.len() == MAX_TERMS {
            return cur.err(format!("more than {MAX_TERMS} terms"));
        }
        terms.push(cur.term(sign)?);
        sign = match cur.peek() {
            Some(b'+') => 1.0,
            Some(b'-') => -1.0,
            None => break,
            Some(c) => return cur.err(format!("unexpected '{}'", c as char)),
        };
        cur.pos += 1;
    }
    Ok(SymbolicDistribution1D::new(terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_grammar_example() {
        let d = parse_distribution("2*xplus(-1+z) - (0.5+1i)*delta(1) + xpi0(-2,1)").unwrap();
        assert_eq!(d.terms.len(), 3);
        assert_eq!(d.terms[0].kind, TermKind::HalfLinePower(Side::Plus, Exponent::family(-1.0, 1.0), 0));
        assert_eq!(d.terms[1].coeff, Complex64::new(-0.5, -1.0));
        assert_eq!(d.terms[2].kind, TermKind::PowerPlusI0(Exponent::constant(-2.0), 1));
        assert!(d.is_family());
    }

    #[test]
    fn rejects_bad_input() {
        for s in ["", "delta(17)", "xplus(-1,9)", "foo(1)", "xplus(z*z)", "2*", "xplus(zz)", "mono(1)) "] {
            assert!(parse_distribution(s).is_err(), "{s}");
        }
    }

    fn term_strategy() -> impl Strategy<Value = Term> {
        let c = (-10.0f64..10.0, -10.0f64..10.0).prop_map(|(a, b)| Complex64::new(a, b));
        let e = (-3.0f64..3.0, -2.0f64..2.0, prop::bool::ANY).prop_map(|(a, s, fam)| {
            if fam {
                Exponent::family(a, s)
            } else {
                Exponent::constant(a)
            }
        });
        let kind = prop_oneof![
            (0usize..=16).prop_map(TermKind::Delta),
            (0usize..=16).prop_map(TermKind::Monomial),
            (0usize..=16).prop_map(TermKind::HeavisideMonomial),
            (e.clone(), 0usize..=8).prop_map(|(a, p)| TermKind::PowerPlusI0(a, p)),
            (e.clone(), 0usize..=8).prop_map(|(a, p)| TermKind::PowerMinusI0(a, p)),
            (e, 0usize..=8, prop::bool::ANY).prop_map(|(a, p, s)| TermKind::HalfLinePower(
                if s { Side::Plus } else { Side::Minus },
                a,
                p
            )),
        ];
        (c, kind).prop_map(|(c, k)| Term::new(c, k))
    }

    proptest! {
        #[test]
        fn display_round_trips(terms in prop::collection::vec(term_strategy(), 1..6)) {
            let d = SymbolicDistribution1D::new(terms);
            let back = parse_distribution(&d.to_string()).unwrap();
            prop_assert_eq!(back, d);
        }

        #[test]
        fn never_panics(s in "[ -~]{0,80}") {
            let _ = parse_distribution(&s);
        }
    }
}
