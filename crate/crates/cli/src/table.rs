//! The reproduction table: every bound family with its golden numbers and a
//! live certificate.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use makeev_core::bounds::{appendix_upper, makeev_lower, theorem_upper};
use makeev_core::certify::{CertificateStatus, Engine, TheoremPreset};
use makeev_core::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Row {
    pub quantity: String,
    pub m: u64,
    pub l: u32,
    pub k: u32,
    pub orthogonal: bool,
    pub preset: TheoremPreset,
    /// Golden lower bound, when the statement gives one.
    pub expected_lower: Option<u64>,
    pub expected_upper: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RowStatus {
    Certified { d: usize },
    NotCertified { d: usize, support: Option<usize> },
    DimensionMismatch { d: usize, dim_u: u64 },
    #[serde(rename = "skipped(resource)")]
    SkippedResource { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RowResult {
    #[serde(flatten)]
    pub row: Row,
    pub lower: u64,
    pub upper: Option<u64>,
    pub certificate: RowStatus,
    pub pass: bool,
}

fn delta(orthogonal: bool) -> &'static str {
    if orthogonal {
        "Δ⊥"
    } else {
        "Δ"
    }
}

fn row(m: u64, l: u32, k: u32, orthogonal: bool, preset: TheoremPreset, lower: Option<u64>, upper: u64) -> Row {
    Row {
        quantity: format!("{}({m};{l}/{k})", delta(orthogonal)),
        m,
        l,
        k,
        orthogonal,
        preset,
        expected_lower: lower,
        expected_upper: upper,
    }
}

/// All rows in their fixed order.
pub fn rows() -> Vec<Row> {
    let mut out = Vec::new();
    // Two of k hyperplanes, and the (3,4) family, plain and orthogonal.
    for k in 2..=5u32 {
        for q in 0..=2u32 {
            for t in 1..=(1u64 << q) {
                let m = (1u64 << (q + 1)) - t;
                let upper = (1u64 << q) * (k as u64 + 1) - t;
                let ku = k as usize;
                out.push(row(m, 2, k, false, TheoremPreset::Thm31 { k: ku, q, t }, None, upper));
                if q >= 1 && t >= 2 {
                    out.push(row(m, 2, k, true, TheoremPreset::Thm32 { k: ku, q, t }, None, upper));
                }
            }
        }
    }
    for q in 0..=3u32 {
        for t in 1..=(1u64 << q) {
            let m = (1u64 << (q + 1)) - t;
            let upper = 7 * (1u64 << q) - 2 * t;
            out.push(row(m, 3, 4, false, TheoremPreset::Thm41 { q, t }, None, upper));
            if q >= 1 && t >= 2 {
                out.push(row(m, 3, 4, true, TheoremPreset::Thm42 { q, t }, None, upper));
            }
        }
    }
    // Nearly tight brackets.
    for q in 0..=3u32 {
        let p = 1u64 << q;
        let m = 2 * p - 1;
        out.push(row(m, 2, 3, false, TheoremPreset::Thm31 { k: 3, q, t: 1 }, Some(4 * p - 2), 4 * p - 1));
        out.push(row(m, 3, 4, false, TheoremPreset::Thm41 { q, t: 1 }, Some(7 * p - 3), 7 * p - 2));
    }
    for q in 1..=3u32 {
        let p = 1u64 << q;
        let m = 2 * p - 2;
        out.push(row(m, 2, 3, true, TheoremPreset::Thm32 { k: 3, q, t: 2 }, Some(4 * p - 3), 4 * p - 2));
        out.push(row(m, 3, 4, true, TheoremPreset::Thm42 { q, t: 2 }, Some(7 * p - 5), 7 * p - 4));
    }
    // Single-mass orthogonal estimates.
    out.push(row(1, 3, 4, true, TheoremPreset::Prop61a, Some(5), 7));
    out.push(row(1, 3, 5, true, TheoremPreset::Prop61b, Some(7), 9));
    out
}

fn evaluate(engine: &Engine, row: Row) -> Result<RowResult> {
    let lower = makeev_lower(row.m, row.l, row.k, row.orthogonal)?;
    let upper = theorem_upper(row.m, row.l, row.k, row.orthogonal)
        .or_else(|| appendix_upper(row.m, row.l, row.k));
    let certificate = match engine.certify_preset(&row.preset) {
        Ok(r) => match r.status {
            CertificateStatus::Certified => RowStatus::Certified { d: r.d },
            CertificateStatus::NotCertified => RowStatus::NotCertified {
                d: r.d,
                support: r.residual_support,
            },
            CertificateStatus::DimensionMismatch => RowStatus::DimensionMismatch { d: r.d, dim_u: r.dim_u },
        },
        Err(e @ Error::CellLimit { .. }) => RowStatus::SkippedResource { reason: e.to_string() },
        Err(e) => return Err(e),
    };
    let certified_at_upper = certificate
        == RowStatus::Certified {
            d: row.expected_upper as usize,
        };
    let pass = certified_at_upper
        && upper == Some(row.expected_upper)
        && row.expected_lower.is_none_or(|l| l == lower)
        && lower <= row.expected_upper;
    Ok(RowResult {
        row,
        lower,
        upper,
        certificate,
        pass,
    })
}

/// Evaluate every row in parallel; results keep the order of [`rows`].
pub fn run(engine: &Engine) -> Result<Vec<RowResult>> {
    rows().into_par_iter().map(|r| evaluate(engine, r)).collect()
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowStatus::Certified { d } => write!(f, "Certified at d={d}"),
            RowStatus::NotCertified { d, support } => match support {
                Some(s) => write!(f, "NotCertified at d={d} ({s} terms)"),
                None => write!(f, "NotCertified at d={d}"),
            },
            RowStatus::DimensionMismatch { d, dim_u } => {
                write!(f, "DimensionMismatch at d={d} (dim U = {dim_u})")
            }
            RowStatus::SkippedResource { .. } => f.write_str("skipped(resource)"),
        }
    }
}

impl fmt::Display for RowResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let upper = self.upper.map_or("?".to_string(), |u| u.to_string());
        write!(
            f,
            "{:<14} {:>3} ≤ · ≤ {:<3}  {:<22} {:<28} {}",
            self.row.quantity,
            self.lower,
            upper,
            self.row.preset.to_string(),
            self.certificate.to_string(),
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}
