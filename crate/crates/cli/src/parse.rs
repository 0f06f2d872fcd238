//! Value grammars accepted on the command line.
//!
//! Complex numbers: `a`, `bi`, `a+bi`, `a-bi`, with an optional leading sign
//! and `i` alone standing for a unit coefficient (`1-i`, `-i`). Ranges:
//! `a:b:steps`, meaning steps + 1 equally spaced points from a to b.

use diracspec::{Cplx, Real};

fn real(s: &str) -> Result<Real, String> {
    let v: Real = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not a finite number: {s:?}"))
    }
}

fn unit_coefficient(s: &str) -> Result<Real, String> {
    match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => real(s),
    }
}

pub fn complex(s: &str) -> Result<Cplx, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty complex number".into());
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return Ok(Cplx::new(real(&t)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Ok(Cplx::new(real(&body[..k])?, unit_coefficient(&body[k..])?)),
        None => Ok(Cplx::new(0.0, unit_coefficient(body)?)),
    }
}

pub fn reals(s: &str) -> Result<Vec<Real>, String> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(real).collect()
}

pub fn range(s: &str) -> Result<Vec<Real>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, steps] = parts[..] else {
        return Err(format!("expected a:b:steps, got {s:?}"));
    };
    let (a, b) = (real(a)?, real(b)?);
    let steps: usize = steps.trim().parse().map_err(|_| format!("bad step count in {s:?}"))?;
    if steps == 0 || !(b > a) {
        return Err(format!("range {s:?} needs b > a and steps >= 1"));
    }
    Ok((0..=steps).map(|k| a + (b - a) * k as Real / steps as Real).collect())
}
