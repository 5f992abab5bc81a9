//! Sweep ranges: `7`, `2..8` (inclusive), `4..64 x2` (geometric) and comma
//! lists such as `3,5,9`.

use crate::error::{FlatError, Result};

fn parse_err(flag: &str, pos: usize, message: impl Into<String>) -> FlatError {
    FlatError::Parse {
        position: format!("{flag} column {}", pos + 1),
        message: message.into(),
    }
}

fn parse_u64(flag: &str, text: &str, offset: usize) -> Result<u64> {
    let trimmed = text.trim();
    let lead = text.len() - text.trim_start().len();
    if trimmed.is_empty() {
        return Err(parse_err(flag, offset, "missing number"));
    }
    trimmed
        .parse::<u64>()
        .map_err(|_| parse_err(flag, offset + lead, format!("expected an unsigned integer, found `{trimmed}`")))
}

/// Expands a range expression for the flag named `flag` (used in errors).
pub fn parse_range(flag: &str, spec: &str) -> Result<Vec<u64>> {
    if spec.trim().is_empty() {
        return Err(parse_err(flag, 0, "empty range"));
    }
    if spec.contains(',') {
        let mut out = Vec::new();
        let mut offset = 0;
        for part in spec.split(',') {
            out.push(parse_u64(flag, part, offset)?);
            offset += part.len() + 1;
        }
        return Ok(out);
    }
    let Some(dots) = spec.find("..") else {
        return Ok(vec![parse_u64(flag, spec, 0)?]);
    };
    let lo = parse_u64(flag, &spec[..dots], 0)?;
    let rest = &spec[dots + 2..];
    let rest_at = dots + 2;
    let (hi_text, factor) = match rest.find('x') {
        Some(x) => {
            let f = parse_u64(flag, &rest[x + 1..], rest_at + x + 1)?;
            if f < 2 {
                return Err(parse_err(flag, rest_at + x + 1, "geometric factor must be at least 2"));
            }
            if lo == 0 {
                return Err(parse_err(flag, 0, "geometric range must start above 0"));
            }
            (&rest[..x], Some(f))
        }
        None => (rest, None),
    };
    let hi = parse_u64(flag, hi_text, rest_at)?;
    Ok(match factor {
        None => (lo..=hi).collect(),
        Some(f) => {
            let mut out = Vec::new();
            let mut v = lo;
            while v <= hi {
                out.push(v);
                match v.checked_mul(f) {
                    Some(n) => v = n,
                    None => break,
                }
            }
            out
        }
    })
}

pub fn parse_f64_list(flag: &str, spec: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for part in spec.split(',') {
        let t = part.trim();
        let v: f64 = t
            .parse()
            .map_err(|_| parse_err(flag, offset, format!("expected a number, found `{t}`")))?;
        out.push(v);
        offset += part.len() + 1;
    }
    Ok(out)
}
