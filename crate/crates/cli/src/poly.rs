//! Text form of polynomials in `t_0..t_l`.
//!
//! A polynomial is a sum of terms; a term is a `*`-product of factors:
//! `t_i` or `t_i^k`, `pi` (or `π`) with an optional rational power, a
//! nonnegative value literal such as `1/3` or `2^(1/2)`, or a parenthesised
//! sum of constants. A leading `-` negates a term. Exponents of `t_1..t_m`
//! may be negative; `t_0` is eliminated through `t_0 = π t_1^{-1}⋯t_m^{-1}`.

use ss_skeleton::monomial_algebra::{Coefficient, ModelAlgebra, SpecialPoly};
use ss_skeleton::rational::{int, parse_rational};
use ss_skeleton::{Error, Result, Value};

/// Exponents over `t_0..t_l` together with a coefficient.
type RawTerm = (Vec<i64>, Coefficient);

pub fn parse_poly(text: &str, model: &ModelAlgebra) -> Result<SpecialPoly> {
    let raw = parse_sum(text, model)?;
    let m = model.m();
    let mut terms = Vec::with_capacity(raw.len());
    for (exps, coeff) in raw {
        let n0 = exps[0];
        if n0 < 0 {
            return Err(Error::invariant(
                "t_0 exponent in N",
                format!("t_0 has exponent {n0}"),
            ));
        }
        let mut n = exps[1..].to_vec();
        for e in &mut n[..m] {
            *e -= n0;
        }
        terms.push((n, coeff.scale(&model.pi().powi(n0)?)));
    }
    SpecialPoly::from_terms(model, terms)
}

fn parse_sum(text: &str, model: &ModelAlgebra) -> Result<Vec<RawTerm>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    let mut out = Vec::new();
    for (negative, term) in split_terms(text)? {
        let (exps, coeff) = parse_term(term, model)?;
        let coeff = if negative { -&coeff } else { coeff };
        out.push((exps, coeff));
    }
    Ok(out)
}

/// Splits on top-level `+` and `-`, keeping the sign of each term. A `-`
/// right after `^` belongs to an exponent.
fn split_terms(text: &str) -> Result<Vec<(bool, &str)>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let mut negative = false;
    let mut prev = None;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::Parse(format!("unbalanced ')' at byte {i} of {text:?}")));
                }
            }
            '+' | '-' if depth == 0 && !(c == '-' && prev == Some('^')) => {
                let piece = text[start..i].trim();
                if piece.is_empty() {
                    // "-t_1" or "a + -b"
                    if c == '+' {
                        return Err(Error::Parse(format!("missing term before '+' at byte {i} of {text:?}")));
                    }
                    negative = !negative;
                } else {
                    out.push((negative, piece));
                    negative = c == '-';
                }
                start = i + 1;
            }
            _ => {}
        }
        if !c.is_whitespace() {
            prev = Some(c);
        }
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced '(' in {text:?}")));
    }
    let last = text[start..].trim();
    if last.is_empty() {
        return Err(Error::Parse(format!("trailing sign in {text:?}")));
    }
    out.push((negative, last));
    Ok(out)
}

fn split_factors(term: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in term.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '*' if depth == 0 => {
                out.push(term[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(term[start..].trim());
    out
}

fn parse_term(term: &str, model: &ModelAlgebra) -> Result<RawTerm> {
    let mut exps = vec![0i64; model.l() + 1];
    let mut coeff = Coefficient::one();
    for factor in split_factors(term) {
        if factor.is_empty() {
            return Err(Error::Parse(format!("empty factor in {term:?}")));
        }
        if let Some(rest) = factor.strip_prefix("t_") {
            let (index, power) = match rest.split_once('^') {
                Some((i, k)) => (i.trim(), parse_int(k)?),
                None => (rest.trim(), 1),
            };
            let i: usize = index
                .parse()
                .map_err(|_| Error::Parse(format!("bad variable {factor:?}")))?;
            if i > model.l() {
                return Err(Error::invariant(
                    "variable index <= l",
                    format!("t_{i} with l = {}", model.l()),
                ));
            }
            exps[i] += power;
        } else if let Some(rest) = factor.strip_prefix("pi").or_else(|| factor.strip_prefix('π')) {
            let power = match rest.trim().strip_prefix('^') {
                Some(k) => parse_rational(k)?,
                None if rest.trim().is_empty() => int(1),
                None => return Err(Error::Parse(format!("bad factor {factor:?}"))),
            };
            coeff = coeff.scale(&model.pi().pow(&power)?);
        } else if is_parenthesised_sum(factor) {
            let inner = &factor[1..factor.len() - 1];
            let mut sum = Coefficient::zero();
            for (exps_inner, c) in parse_sum(inner, model)? {
                if exps_inner.iter().any(|&e| e != 0) {
                    return Err(Error::Parse(format!(
                        "parenthesised sums must be constants: {factor:?}"
                    )));
                }
                sum = &sum + &c;
            }
            coeff = &coeff * &sum;
        } else {
            let v: Value = factor.parse()?;
            if v.is_zero() {
                coeff = Coefficient::zero();
            } else {
                coeff = coeff.scale(&v);
            }
        }
    }
    Ok((exps, coeff))
}

fn is_parenthesised_sum(factor: &str) -> bool {
    if !(factor.starts_with('(') && factor.ends_with(')')) {
        return false;
    }
    let inner = &factor[1..factor.len() - 1];
    let mut depth = 0i32;
    let mut prev = None;
    for c in inner.chars() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                // "(a)*(b)" is not one parenthesised group
                if depth < 0 {
                    return false;
                }
            }
            '+' if depth == 0 => return true,
            '-' if depth == 0 && prev != Some('^') && prev.is_some() => return true,
            _ => {}
        }
        if !c.is_whitespace() {
            prev = Some(c);
        }
    }
    false
}

fn parse_int(text: &str) -> Result<i64> {
    let t = text.trim();
    let t = t
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .unwrap_or(t)
        .trim();
    t.parse()
        .map_err(|_| Error::Parse(format!("variable exponents are integers: {text:?}")))
}
