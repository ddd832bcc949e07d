//! Radius rules of the form `c·x^a`, where `x` is the height `n` or the
//! height bound `T`.
//!
//! Accepted spellings: `n^-0.4`, `0.5*n^-0.25`, `0.5 n^(-1/4)`, `2*T^-0.5`,
//! `n`, `0.1`.

use serde::Serialize;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RRule {
    pub rule: String,
    pub c: f64,
    pub a: f64,
}

impl RRule {
    pub fn eval(&self, x: u64) -> f64 {
        self.c * (x as f64).powf(self.a)
    }
}

impl fmt::Display for RRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.rule)
    }
}

fn number(s: &str) -> Result<f64, String> {
    let s = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(s);
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.parse().map_err(|_| format!("bad numerator {p:?}"))?;
            let q: f64 = q.parse().map_err(|_| format!("bad denominator {q:?}"))?;
            p / q
        }
        None => s.parse().map_err(|_| format!("bad number {s:?}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

impl FromStr for RRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err("empty R-rule".into());
        }
        let (c, a) = match t.find(['n', 'T']) {
            None => (number(&t)?, 0.0),
            Some(pos) => {
                let prefix = &t[..pos];
                let prefix = prefix.strip_suffix('*').unwrap_or(prefix);
                let c = if prefix.is_empty() { 1.0 } else { number(prefix)? };
                let a = match &t[pos + 1..] {
                    "" => 1.0,
                    rest => number(rest.strip_prefix('^').ok_or_else(|| format!("expected '^' in {s:?}"))?)?,
                };
                (c, a)
            }
        };
        if c <= 0.0 {
            return Err(format!("coefficient in {s:?} must be positive"));
        }
        Ok(RRule { rule: s.trim().to_string(), c, a })
    }
}
