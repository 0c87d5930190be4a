//! Flag value grammars shared by the subcommands.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use specmult::phase::parse_rational;

/// `1,3,5`: a nonempty set of positive integers.
pub fn positive_set(text: &str) -> Result<BTreeSet<u64>, String> {
    let set = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s.parse::<u64>() {
            Ok(0) | Err(_) => Err(format!("`{s}` is not a positive integer")),
            Ok(v) => Ok(v),
        })
        .collect::<Result<BTreeSet<u64>, String>>()?;
    if set.is_empty() {
        return Err("the set must have at least one element".into());
    }
    Ok(set)
}

/// `2=1,3=2`: prime to multiplicity.
pub fn prime_map(text: &str) -> Result<BTreeMap<u64, u64>, String> {
    let mut out = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (p, m) = item.split_once('=').ok_or_else(|| format!("`{item}` is not of the form p=m"))?;
        let p: u64 = p.trim().parse().map_err(|_| format!("`{p}` is not an integer"))?;
        let m: u64 = m.trim().parse().map_err(|_| format!("`{m}` is not an integer"))?;
        if out.insert(p, m).is_some() {
            return Err(format!("prime {p} listed twice"));
        }
    }
    if out.is_empty() {
        return Err("at least one p=m pair is required".into());
    }
    Ok(out)
}

/// A positive rational such as `3`, `3/2` or `1.5`.
pub fn rational(text: &str) -> Result<BigRational, String> {
    parse_rational(text.trim()).map_err(|e| e.to_string())
}

/// Comma-separated times; `a..b` expands to the integers `a..=b`.
pub fn times(text: &str) -> Result<Vec<BigRational>, String> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let a: i64 = a.trim().parse().map_err(|_| format!("`{a}` is not an integer"))?;
            let b: i64 = b.trim().parse().map_err(|_| format!("`{b}` is not an integer"))?;
            if b < a {
                return Err(format!("empty range {item}"));
            }
            out.extend((a..=b).map(|n| BigRational::from_integer(BigInt::from(n))));
        } else {
            out.push(rational(item)?);
        }
    }
    if out.is_empty() {
        return Err("no times given".into());
    }
    Ok(out)
}

/// `lo,hi`.
pub fn interval(text: &str) -> Result<(BigRational, BigRational), String> {
    let (lo, hi) = text.split_once(',').ok_or_else(|| format!("`{text}` is not of the form lo,hi"))?;
    Ok((rational(lo)?, rational(hi)?))
}

/// `a..b` (inclusive) or a single stage.
pub fn stage_range(text: &str) -> Result<Vec<u32>, String> {
    let (a, b) = text.split_once("..").unwrap_or((text, text));
    let a: u32 = a.trim().parse().map_err(|_| format!("`{a}` is not a stage"))?;
    let b: u32 = b.trim().parse().map_err(|_| format!("`{b}` is not a stage"))?;
    if b < a {
        return Err(format!("empty stage range {text}"));
    }
    Ok((a..=b).collect())
}
