//! Closed-form lower and upper bounds for `Δ(m; k)`, `Δ(m; l/k)` and `Δ⊥(m; l/k)`.
//!
//! Everything is integer arithmetic; ceilings use exact division.

use std::fmt;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::repbuild::binomial;

/// The unique `(q, t)` with `m = 2^(q+1) - t`, `q >= 0`, `1 <= t <= 2^q`.
pub fn decompose(m: u64) -> Result<(u32, u64)> {
    if m == 0 {
        return domain("m must be at least 1");
    }
    let q = 63 - m.leading_zeros();
    Ok((q, (1u64 << (q + 1)) - m))
}

/// Degrees-of-freedom lower bound `ceil(m (2^k - 1) / k)` for full equipartitions.
pub fn ramos_lower(m: u64, k: u32) -> u64 {
    assert!(k >= 1, "k must be at least 1");
    (m * ((1u64 << k) - 1)).div_ceil(k as u64)
}

/// `2^q (2^(k-1) + 1) - t` for `m = 2^(q+1) - t`.
pub fn mlz_upper(m: u64, k: u32) -> Result<u64> {
    if k == 0 {
        return domain("k must be at least 1");
    }
    let (q, t) = decompose(m)?;
    Ok((1u64 << q) * ((1u64 << (k - 1)) + 1) - t)
}

/// `ceil((m (2^l - 1)(k - l + 1) + [orth] C(k,2)) / k)`, defined for `2 <= l <= k`.
pub fn makeev_lower(m: u64, l: u32, k: u32, orthogonal: bool) -> Result<u64> {
    if l < 2 || l > k {
        return domain(format!("lower bound needs 2 <= l <= k, got l = {l}, k = {k}"));
    }
    let mut total = m * ((1u64 << l) - 1) * (k - l + 1) as u64;
    if orthogonal {
        total += binomial(k as u64, 2);
    }
    Ok(total.div_ceil(k as u64))
}

/// `m * sum_{j=0}^{l} C(k-1, j)`.
pub fn bk_upper(m: u64, l: u32, k: u32) -> Result<u64> {
    if l == 0 || l > k {
        return domain(format!("need 1 <= l <= k, got l = {l}, k = {k}"));
    }
    Ok(m * (0..=l as u64).map(|j| binomial(k as u64 - 1, j)).sum::<u64>())
}

/// Upper bound from the `l = 2` and `(l, k) = (3, 4)` theorems, if one applies.
///
/// The orthogonal versions need `t >= 2` (so `q >= 1`).
pub fn theorem_upper(m: u64, l: u32, k: u32, orthogonal: bool) -> Option<u64> {
    let (q, t) = decompose(m).ok()?;
    if orthogonal && t < 2 {
        return None;
    }
    let p = 1u64 << q;
    match (l, k) {
        (2, k) if k >= 2 => Some(p * (k as u64 + 1) - t),
        (3, 4) => Some(7 * p - 2 * t),
        _ => None,
    }
}

/// Single-mass orthogonal bounds certified by dedicated representations.
pub fn appendix_upper(m: u64, l: u32, k: u32) -> Option<u64> {
    match (m, l, k) {
        (1, 3, 4) => Some(7),
        (1, 3, 5) => Some(9),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpperSource {
    Ramos,
    Mlz,
    Bk,
    TheoremPreset,
}

impl fmt::Display for UpperSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UpperSource::Ramos => "ramos",
            UpperSource::Mlz => "mlz",
            UpperSource::Bk => "bk",
            UpperSource::TheoremPreset => "theorem-preset",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub m: u64,
    pub l: u32,
    pub k: u32,
    pub orthogonal: bool,
    pub lower: u64,
    pub upper: Option<u64>,
    pub upper_source: Option<UpperSource>,
}

/// Best known bracket. Orthogonal upper bounds also bound the plain problem;
/// `bk` and `mlz` only bound the plain problem.
pub fn bound_report(m: u64, l: u32, k: u32, orthogonal: bool) -> Result<BoundReport> {
    let lower = makeev_lower(m, l, k, orthogonal)?;
    let mut candidates: Vec<(u64, UpperSource)> = Vec::new();
    let mut push = |v: Option<u64>, s| {
        if let Some(v) = v {
            candidates.push((v, s));
        }
    };
    push(theorem_upper(m, l, k, orthogonal), UpperSource::TheoremPreset);
    push(appendix_upper(m, l, k), UpperSource::TheoremPreset);
    if !orthogonal {
        push(theorem_upper(m, l, k, true), UpperSource::TheoremPreset);
        push(bk_upper(m, l, k).ok(), UpperSource::Bk);
        push(mlz_upper(m, k).ok(), UpperSource::Mlz);
    }
    // First minimum wins, so theorem presets take precedence on ties.
    let best = candidates.iter().copied().min_by_key(|(v, _)| *v);
    Ok(BoundReport {
        m,
        l,
        k,
        orthogonal,
        lower,
        upper: best.map(|(v, _)| v),
        upper_source: best.map(|(_, s)| s),
    })
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let delta = if self.orthogonal { "Δ⊥" } else { "Δ" };
        let name = format!("{delta}({};{}/{})", self.m, self.l, self.k);
        match (self.upper, self.upper_source) {
            (Some(u), Some(s)) => write!(f, "{} ≤ {name} ≤ {} [upper: {s}]", self.lower, u),
            _ => write!(f, "{} ≤ {name} [no known upper bound]", self.lower),
        }
    }
}
