//! Line-based text format for algebras and states.
//!
//! ```text
//! # comment
//! dim 4
//! unit 0
//! c i j k re [im]     structure constant c_{ij}^k
//! s i j re [im]       involution entry, b_i* = Σ_j s_ij b_j
//! state k re [im]     ω(b_k)
//! ```
//!
//! Omitted entries are zero.

use super::algebra::{AlgebraState, FiniteStarAlgebra};
use super::AlgebraError;
use num_complex::Complex64;
use std::collections::HashSet;
use std::fmt::Write;

pub const MAX_DIM: usize = 16;
pub const MAX_LINES: usize = 20_000;

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraFile {
    pub algebra: FiniteStarAlgebra,
    pub state: Option<AlgebraState>,
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T, AlgebraError> {
    Err(AlgebraError::Parse { line, msg: msg.into() })
}

pub fn parse_algebra_text(input: &str) -> Result<AlgebraFile, AlgebraError> {
    let mut dim: Option<usize> = None;
    let mut unit: Option<usize> = None;
    let mut c: Vec<Complex64> = Vec::new();
    let mut s: Vec<Complex64> = Vec::new();
    let mut state: Option<Vec<Complex64>> = None;
    let mut seen: HashSet<(char, usize, usize, usize)> = HashSet::new();
    for (n, raw) in input.lines().enumerate() {
        let ln = n + 1;
        if ln > MAX_LINES {
            return perr(ln, "too many lines");
        }
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let mut parts = text.split_whitespace();
        let key = parts.next().unwrap_or("");
        let args: Vec<&str> = parts.collect();
        let index = |a: &str, d: usize| -> Result<usize, AlgebraError> {
            match a.parse::<usize>() {
                Ok(i) if i < d => Ok(i),
                _ => perr(ln, format!("bad index '{a}'")),
            }
        };
        let value = |re: &str, im: Option<&&str>| -> Result<Complex64, AlgebraError> {
            let p = |t: &str| match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => perr(ln, format!("bad number '{t}'")),
            };
            Ok(Complex64::new(p(re)?, im.map(|t| p(t)).transpose()?.unwrap_or(0.0)))
        };
        let need_dim = || dim.ok_or(AlgebraError::Parse { line: ln, msg: "'dim' must come first".into() });
        match key {
            "dim" => {
                if dim.is_some() {
                    return perr(ln, "duplicate 'dim'");
                }
                let d = match args.as_slice() {
                    [a] => a.parse::<usize>().ok().filter(|d| (1..=MAX_DIM).contains(d)),
                    _ => None,
                };
                let Some(d) = d else { return perr(ln, format!("'dim' takes one integer in 1..={MAX_DIM}")) };
                dim = Some(d);
                c = vec![Complex64::default(); d * d * d];
                s = vec![Complex64::default(); d * d];
            }
            "unit" => {
                let d = need_dim()?;
                if unit.is_some() || args.len() != 1 {
                    return perr(ln, "'unit' takes one index and appears once");
                }
                unit = Some(index(args[0], d)?);
            }
            "c" => {
                let d = need_dim()?;
                if !(4..=5).contains(&args.len()) {
                    return perr(ln, "'c' takes i j k re [im]");
                }
                let (i, j, k) = (index(args[0], d)?, index(args[1], d)?, index(args[2], d)?);
                if !seen.insert(('c', i, j, k)) {
                    return perr(ln, "duplicate entry");
                }
                c[(i * d + j) * d + k] = value(args[3], args.get(4))?;
            }
            "s" => {
                let d = need_dim()?;
                if !(3..=4).contains(&args.len()) {
                    return perr(ln, "'s' takes i j re [im]");
                }
                let (i, j) = (index(args[0], d)?, index(args[1], d)?);
                if !seen.insert(('s', i, j, 0)) {
                    return perr(ln, "duplicate entry");
                }
                s[i * d + j] = value(args[2], args.get(3))?;
            }
            "state" => {
                let d = need_dim()?;
                if !(2..=3).contains(&args.len()) {
                    return perr(ln, "'state' takes k re [im]");
                }
                let k = index(args[0], d)?;
                if !seen.insert(('w', k, 0, 0)) {
                    return perr(ln, "duplicate entry");
                }
                state.get_or_insert_with(|| vec![Complex64::default(); d])[k] = value(args[1], args.get(2))?;
            }
            other => return perr(ln, format!("unknown keyword '{other}'")),
        }
    }
    let last = input.lines().count();
    let Some(d) = dim else { return perr(last, "missing 'dim'") };
    let Some(u) = unit else { return perr(last, "missing 'unit'") };
    let algebra = FiniteStarAlgebra::new(d, c, s, u)?;
    let state = state.map(|w| AlgebraState::new(&algebra, w)).transpose()?;
    Ok(AlgebraFile { algebra, state })
}

fn push_value(out: &mut String, z: Complex64) {
    if z.im == 0.0 {
        let _ = write!(out, " {:?}", z.re);
    } else {
        let _ = write!(out, " {:?} {:?}", z.re, z.im);
    }
}

pub fn algebra_to_text(alg: &FiniteStarAlgebra, state: Option<&AlgebraState>) -> String {
    let d = alg.dim();
    let mut out = format!("dim {d}\nunit {}\n", alg.unit_index());
    let zero = Complex64::default();
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let v = alg.c(i, j, k);
                if v != zero {
                    let _ = write!(out, "c {i} {j} {k}");
                    push_value(&mut out, v);
                    out.push('\n');
                }
            }
        }
    }
    for i in 0..d {
        for j in 0..d {
            let v = alg.s(i, j);
            if v != zero {
                let _ = write!(out, "s {i} {j}");
                push_value(&mut out, v);
                out.push('\n');
            }
        }
    }
    if let Some(st) = state {
        for (k, v) in st.omega.iter().enumerate() {
            let _ = write!(out, "state {k}");
            push_value(&mut out, *v);
            out.push('\n');
        }
    }
    out
}
