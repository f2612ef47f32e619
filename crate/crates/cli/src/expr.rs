//! Positive reals given as products of powers, evaluated in log space so
//! that values like `2^-160*3^-8` or `10^-5000` survive.
//!
//! Grammar: `factor (('*' | '/') factor)*`, `factor = number ('^' exponent)?`,
//! where `exponent` is a signed number, optionally in parentheses.

use anyhow::{anyhow, bail, ensure, Result};

fn parse_number(token: &str) -> Result<f64> {
    let value: f64 = token
        .trim()
        .parse()
        .map_err(|_| anyhow!("cannot parse `{}` as a number", token.trim()))?;
    ensure!(value.is_finite(), "`{}` is not finite", token.trim());
    Ok(value)
}

fn ln_factor(factor: &str) -> Result<f64> {
    let (base, exponent) = match factor.split_once('^') {
        Some((b, e)) => {
            let e = e.trim();
            let e = e.strip_prefix('(').and_then(|e| e.strip_suffix(')')).unwrap_or(e);
            (parse_number(b)?, parse_number(e)?)
        }
        None => (parse_number(factor)?, 1.0),
    };
    ensure!(base > 0.0, "base {base} must be positive");
    Ok(exponent * base.ln())
}

/// The natural logarithm of the value of `expr`.
pub fn parse_ln(expr: &str) -> Result<f64> {
    let normalized = expr.replace('·', "*").replace('×', "*");
    let trimmed = normalized.trim();
    if trimmed.is_empty() {
        bail!("empty expression");
    }
    let mut total = 0.0;
    let mut sign = 1.0;
    let mut start = 0;
    let bytes = trimmed.as_bytes();
    for k in 0..=bytes.len() {
        let at_end = k == bytes.len();
        if at_end || bytes[k] == b'*' || bytes[k] == b'/' {
            let factor = &trimmed[start..k];
            if factor.trim().is_empty() {
                bail!("missing factor in `{expr}`");
            }
            total += sign * ln_factor(factor)?;
            if !at_end {
                sign = if bytes[k] == b'/' { -1.0 } else { 1.0 };
            }
            start = k + 1;
        }
    }
    ensure!(total.is_finite(), "`{expr}` does not evaluate to a finite positive number");
    Ok(total)
}

/// The value of `expr`; fails when it underflows or overflows an `f64`.
pub fn parse_value(expr: &str) -> Result<f64> {
    let value = parse_ln(expr)?.exp();
    ensure!(
        value > 0.0 && value.is_finite(),
        "`{expr}` is outside the range of double precision"
    );
    Ok(value)
}
