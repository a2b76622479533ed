//! Truncated bivariate formal power series in ħ and the coupling λ.
//!
//! Coefficients are exact rational-complex numbers. Every value carries its
//! own truncation orders; binary operations take the minimum of the two.

use crate::scalar::{self, Scalar};
use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("exponential of a series with nonzero constant term has no exact rational value")]
    ExpOfNonNilpotentConstant,
    #[error("series with vanishing constant term is not invertible")]
    NonInvertibleLeadingTerm,
    #[error("malformed series record: {0}")]
    Parse(String),
}

/// Key is `(ħ power, λ power)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalSeries {
    coeffs: BTreeMap<(u32, u32), Scalar>,
    trunc_h: u32,
    trunc_l: u32,
}

impl FormalSeries {
    pub fn zero(trunc_h: u32, trunc_l: u32) -> Self {
        Self { coeffs: BTreeMap::new(), trunc_h, trunc_l }
    }

    pub fn one(trunc_h: u32, trunc_l: u32) -> Self {
        Self::constant(scalar::sc_one(), trunc_h, trunc_l)
    }

    pub fn constant(c: Scalar, trunc_h: u32, trunc_l: u32) -> Self {
        Self::monomial(0, 0, c, trunc_h, trunc_l)
    }

    /// `c · ħ^h λ^l`, or zero if the monomial lies beyond truncation.
    pub fn monomial(h: u32, l: u32, c: Scalar, trunc_h: u32, trunc_l: u32) -> Self {
        let mut s = Self::zero(trunc_h, trunc_l);
        if h <= trunc_h && l <= trunc_l && !scalar::is_zero(&c) {
            s.coeffs.insert((h, l), c);
        }
        s
    }

    pub fn hbar(trunc_h: u32, trunc_l: u32) -> Self {
        Self::monomial(1, 0, scalar::sc_one(), trunc_h, trunc_l)
    }

    pub fn lambda(trunc_h: u32, trunc_l: u32) -> Self {
        Self::monomial(0, 1, scalar::sc_one(), trunc_h, trunc_l)
    }

    pub fn trunc_h(&self) -> u32 {
        self.trunc_h
    }

    pub fn trunc_l(&self) -> u32 {
        self.trunc_l
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, h: u32, l: u32) -> Scalar {
        self.coeffs.get(&(h, l)).cloned().unwrap_or_else(scalar::sc_zero)
    }

    pub fn constant_term(&self) -> Scalar {
        self.coeff(0, 0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Scalar)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest λ power carrying a nonzero coefficient.
    pub fn min_lambda_order(&self) -> Option<u32> {
        self.coeffs.keys().map(|k| k.1).min()
    }

    pub fn min_hbar_order(&self) -> Option<u32> {
        self.coeffs.keys().map(|k| k.0).min()
    }

    fn insert_add(&mut self, key: (u32, u32), c: Scalar) {
        if key.0 > self.trunc_h || key.1 > self.trunc_l || scalar::is_zero(&c) {
            return;
        }
        match self.coeffs.get_mut(&key) {
            Some(v) => {
                *v += c;
                if scalar::is_zero(v) {
                    self.coeffs.remove(&key);
                }
            }
            None => {
                self.coeffs.insert(key, c);
            }
        }
    }

    /// Re-truncate at (possibly) lower orders.
    pub fn truncated(&self, trunc_h: u32, trunc_l: u32) -> Self {
        let th = trunc_h.min(self.trunc_h);
        let tl = trunc_l.min(self.trunc_l);
        Self {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| k.0 <= th && k.1 <= tl)
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
            trunc_h: th,
            trunc_l: tl,
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if scalar::is_zero(c) {
            return Self::zero(self.trunc_h, self.trunc_l);
        }
        Self {
            coeffs: self.coeffs.iter().map(|(k, v)| (*k, v * c)).collect(),
            trunc_h: self.trunc_h,
            trunc_l: self.trunc_l,
        }
    }

    /// Multiply by `ħ^n`.
    pub fn shift_h(&self, n: u32) -> Self {
        let mut out = Self::zero(self.trunc_h, self.trunc_l);
        for (k, v) in &self.coeffs {
            out.insert_add((k.0 + n, k.1), v.clone());
        }
        out
    }

    /// Multiply by `λ^n`.
    pub fn shift_l(&self, n: u32) -> Self {
        let mut out = Self::zero(self.trunc_h, self.trunc_l);
        for (k, v) in &self.coeffs {
            out.insert_add((k.0, k.1 + n), v.clone());
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(k, v)| (*k, v.conj())).collect(),
            trunc_h: self.trunc_h,
            trunc_l: self.trunc_l,
        }
    }

    pub fn add_series(&self, other: &Self) -> Self {
        let mut out = self.truncated(other.trunc_h, other.trunc_l);
        for (k, v) in &other.coeffs {
            out.insert_add(*k, v.clone());
        }
        out
    }

    pub fn sub_series(&self, other: &Self) -> Self {
        let mut out = self.truncated(other.trunc_h, other.trunc_l);
        for (k, v) in &other.coeffs {
            out.insert_add(*k, -v.clone());
        }
        out
    }

    /// Cauchy product truncated at the smaller orders.
    pub fn mul_series(&self, other: &Self) -> Self {
        let th = self.trunc_h.min(other.trunc_h);
        let tl = self.trunc_l.min(other.trunc_l);
        let mut out = Self::zero(th, tl);
        for (ka, va) in &self.coeffs {
            if ka.0 > th || ka.1 > tl {
                continue;
            }
            for (kb, vb) in &other.coeffs {
                let key = (ka.0 + kb.0, ka.1 + kb.1);
                if key.0 <= th && key.1 <= tl {
                    out.insert_add(key, va * vb);
                }
            }
        }
        out
    }

    fn max_total_order(&self) -> u32 {
        self.trunc_h + self.trunc_l
    }

    /// `Σ aⁿ/n!`; requires a vanishing constant term.
    pub fn exp(&self) -> Result<Self, SeriesError> {
        if !scalar::is_zero(&self.constant_term()) {
            return Err(SeriesError::ExpOfNonNilpotentConstant);
        }
        let mut acc = Self::one(self.trunc_h, self.trunc_l);
        let mut power = Self::one(self.trunc_h, self.trunc_l);
        for n in 1..=self.max_total_order() {
            power = power.mul_series(self);
            if power.is_zero() {
                break;
            }
            let inv_fact = scalar::real(scalar::factorial(n).recip());
            acc = acc.add_series(&power.scale(&inv_fact));
        }
        Ok(acc)
    }

    /// Multiplicative inverse by the geometric series around the constant term.
    pub fn inv(&self) -> Result<Self, SeriesError> {
        let c0 = self.constant_term();
        if scalar::is_zero(&c0) {
            return Err(SeriesError::NonInvertibleLeadingTerm);
        }
        let c0_inv = scalar::sc_one() / c0;
        // self = c0 (1 + n)
        let n = self.scale(&c0_inv).sub_series(&Self::one(self.trunc_h, self.trunc_l));
        let minus_n = n.scale(&(-scalar::sc_one()));
        let mut acc = Self::one(self.trunc_h, self.trunc_l);
        let mut power = Self::one(self.trunc_h, self.trunc_l);
        for _ in 1..=self.max_total_order() {
            power = power.mul_series(&minus_n);
            if power.is_zero() {
                break;
            }
            acc = acc.add_series(&power);
        }
        Ok(acc.scale(&c0_inv))
    }

    /// Floating-point view of the coefficients.
    pub fn to_c64_map(&self) -> BTreeMap<(u32, u32), Complex64> {
        self.coeffs.iter().map(|(k, v)| (*k, scalar::to_c64(v))).collect()
    }

    /// Largest coefficient magnitude (real or imaginary part).
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(scalar::magnitude).fold(0.0, f64::max)
    }

    pub fn to_record(&self) -> SeriesRecord {
        SeriesRecord {
            trunc_h: self.trunc_h,
            trunc_l: self.trunc_l,
            terms: self
                .coeffs
                .iter()
                .map(|(k, v)| TermRecord {
                    h: k.0,
                    l: k.1,
                    re: scalar::format_rational(&v.re),
                    im: scalar::format_rational(&v.im),
                })
                .collect(),
        }
    }

    pub fn from_record(rec: &SeriesRecord) -> Result<Self, SeriesError> {
        let mut s = Self::zero(rec.trunc_h, rec.trunc_l);
        for t in &rec.terms {
            if t.h > rec.trunc_h || t.l > rec.trunc_l {
                return Err(SeriesError::Parse(format!(
                    "term (h={}, l={}) exceeds truncation ({}, {})",
                    t.h, t.l, rec.trunc_h, rec.trunc_l
                )));
            }
            let re = scalar::parse_rational(&t.re)
                .ok_or_else(|| SeriesError::Parse(format!("bad rational '{}'", t.re)))?;
            let im = scalar::parse_rational(&t.im)
                .ok_or_else(|| SeriesError::Parse(format!("bad rational '{}'", t.im)))?;
            s.insert_add((t.h, t.l), Scalar::new(re, im));
        }
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("series record serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SeriesError> {
        let rec: SeriesRecord =
            serde_json::from_str(text).map_err(|e| SeriesError::Parse(e.to_string()))?;
        Self::from_record(&rec)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub h: u32,
    pub l: u32,
    pub re: String,
    pub im: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub trunc_h: u32,
    pub trunc_l: u32,
    pub terms: Vec<TermRecord>,
}

impl fmt::Display for FormalSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((h, l), v) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let re = scalar::format_rational(&v.re);
            let im = scalar::format_rational(&v.im);
            if v.im.is_zero() {
                write!(f, "({re})")?;
            } else {
                write!(f, "({re} + {im}i)")?;
            }
            if *h > 0 {
                write!(f, "·ħ^{h}")?;
            }
            if *l > 0 {
                write!(f, "·λ^{l}")?;
            }
        }
        Ok(())
    }
}

impl Add for &FormalSeries {
    type Output = FormalSeries;
    fn add(self, rhs: Self) -> FormalSeries {
        self.add_series(rhs)
    }
}

impl Sub for &FormalSeries {
    type Output = FormalSeries;
    fn sub(self, rhs: Self) -> FormalSeries {
        self.sub_series(rhs)
    }
}

impl Mul for &FormalSeries {
    type Output = FormalSeries;
    fn mul(self, rhs: Self) -> FormalSeries {
        self.mul_series(rhs)
    }
}

impl Neg for &FormalSeries {
    type Output = FormalSeries;
    fn neg(self) -> FormalSeries {
        self.scale(&(-scalar::sc_one()))
    }
}
