//! The two polynomial Borsuk–Ulam criteria, theorem presets, and the
//! minimal-dimension search.
//!
//! The full-monomial test: if `p_U = t_1^d ... t_k^d` in
//! `Z2[t]/(t_1^{d+1}, ..., t_k^{d+1})` then every continuous
//! `Z2^k`-equivariant map `(S^d)^k -> U` has a zero. It only makes sense when
//! `dim U = k d`; other dimensions get [`CertificateStatus::DimensionMismatch`].

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{decompose, makeev_lower};
use crate::error::{domain, Result};
use crate::gf2poly::{DegreeCaps, TruncatedPolynomial, DEFAULT_CELL_LIMIT};
use crate::repbuild::{all_pairs, binomial, build_u, equip_poly, Block, RepresentationSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CertificateStatus {
    Certified,
    NotCertified,
    DimensionMismatch,
}

impl fmt::Display for CertificateStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertificateStatus::Certified => "Certified",
            CertificateStatus::NotCertified => "NotCertified",
            CertificateStatus::DimensionMismatch => "DimensionMismatch",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateResult {
    pub k: usize,
    pub d: usize,
    pub spec: RepresentationSpec,
    pub dim_u: u64,
    pub status: CertificateStatus,
    /// Support size of `p_U`; `None` when the test was not run.
    pub residual_support: Option<usize>,
    /// Largest exponent of each variable in `p_U` (`None` for an absent variable
    /// or when the test was not run).
    pub max_degrees: Vec<Option<usize>>,
}

impl CertificateResult {
    pub fn is_certified(&self) -> bool {
        self.status == CertificateStatus::Certified
    }
}

/// Named representations from the `l = 2`, `(3,4)`, transversal and
/// single-mass orthogonal constructions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "id")]
pub enum TheoremPreset {
    /// `l = 2`, `m = 2^(q+1) - t` masses plus `t - 1` on `H_2..H_k`, partial orthogonality.
    #[serde(rename = "thm3.1")]
    Thm31 { k: usize, q: u32, t: u64 },
    /// Orthogonal `l = 2`, `q >= 1`, `2 <= t <= 2^q`.
    #[serde(rename = "thm3.2")]
    Thm32 { k: usize, q: u32, t: u64 },
    /// `l = 3`, `k = 4`.
    #[serde(rename = "thm4.1")]
    Thm41 { q: u32, t: u64 },
    /// Orthogonal `l = 3`, `k = 4`, `q >= 1`, `2 <= t <= 2^q`.
    #[serde(rename = "thm4.2")]
    Thm42 { q: u32, t: u64 },
    /// `2^(q+1) - 2` masses by any three of four, one more by `H_2, H_3, H_4`.
    #[serde(rename = "prop4.3")]
    Prop43 { q: u32 },
    /// Transversal version of the `l = 2` bound; the target exponent is `n = d + U + 1`.
    #[serde(rename = "prop5.4a")]
    Prop54a { k: usize, q: u32, t: u64, d: usize },
    /// Transversal version of the `(3,4)` bound.
    #[serde(rename = "prop5.4b")]
    Prop54b { q: u32, t: u64, d: usize },
    /// `Δ⊥(1; 3/4) <= 7`.
    #[serde(rename = "prop6.1a")]
    Prop61a,
    /// `Δ⊥(1; 3/5) <= 9`.
    #[serde(rename = "prop6.1b")]
    Prop61b,
}

pub const PRESET_IDS: [&str; 9] = [
    "thm3.1", "thm3.2", "thm4.1", "thm4.2", "prop4.3", "prop5.4a", "prop5.4b", "prop6.1a",
    "prop6.1b",
];

const MAX_Q: u32 = 20;

impl TheoremPreset {
    /// Build a preset from its identifier and whichever parameters it takes.
    pub fn from_id(
        id: &str,
        k: Option<usize>,
        q: Option<u32>,
        t: Option<u64>,
        d: Option<usize>,
    ) -> Result<Self> {
        let need = |name: &str, v: Option<u64>| -> Result<u64> {
            v.ok_or_else(|| crate::Error::Domain(format!("preset {id} needs --{name}")))
        };
        let k_ = || need("k", k.map(|v| v as u64)).map(|v| v as usize);
        let q_ = || need("q", q.map(u64::from)).map(|v| v as u32);
        let t_ = || need("t", t);
        let d_ = || need("d", d.map(|v| v as u64)).map(|v| v as usize);
        let preset = match id {
            "thm3.1" => Self::Thm31 { k: k_()?, q: q_()?, t: t_()? },
            "thm3.2" => Self::Thm32 { k: k_()?, q: q_()?, t: t_()? },
            "thm4.1" => Self::Thm41 { q: q_()?, t: t_()? },
            "thm4.2" => Self::Thm42 { q: q_()?, t: t_()? },
            "prop4.3" => Self::Prop43 { q: q_()? },
            "prop5.4a" => Self::Prop54a { k: k_()?, q: q_()?, t: t_()?, d: d_()? },
            "prop5.4b" => Self::Prop54b { q: q_()?, t: t_()?, d: d_()? },
            "prop6.1a" => Self::Prop61a,
            "prop6.1b" => Self::Prop61b,
            other => {
                return domain(format!(
                    "unknown preset {other}; expected one of {}",
                    PRESET_IDS.join(", ")
                ))
            }
        };
        preset.validate()?;
        Ok(preset)
    }

    pub fn id(&self) -> &'static str {
        match self {
            Self::Thm31 { .. } => "thm3.1",
            Self::Thm32 { .. } => "thm3.2",
            Self::Thm41 { .. } => "thm4.1",
            Self::Thm42 { .. } => "thm4.2",
            Self::Prop43 { .. } => "prop4.3",
            Self::Prop54a { .. } => "prop5.4a",
            Self::Prop54b { .. } => "prop5.4b",
            Self::Prop61a => "prop6.1a",
            Self::Prop61b => "prop6.1b",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let qt = |q: u32, t: u64, t_min: u64, q_min: u32| -> Result<()> {
            if q > MAX_Q {
                return domain(format!("q = {q} exceeds the supported maximum {MAX_Q}"));
            }
            if q < q_min {
                return domain(format!("{} needs q >= {q_min}", self.id()));
            }
            if t < t_min || t > 1u64 << q {
                return domain(format!("{} needs {t_min} <= t <= 2^q = {}", self.id(), 1u64 << q));
            }
            Ok(())
        };
        let k_at_least_2 = |k: usize| {
            if k < 2 {
                domain(format!("{} needs k >= 2", self.id()))
            } else {
                Ok(())
            }
        };
        match *self {
            Self::Thm31 { k, q, t } => {
                k_at_least_2(k)?;
                qt(q, t, 1, 0)
            }
            Self::Thm32 { k, q, t } => {
                k_at_least_2(k)?;
                qt(q, t, 2, 1)
            }
            Self::Thm41 { q, t } => qt(q, t, 1, 0),
            Self::Thm42 { q, t } => qt(q, t, 2, 1),
            Self::Prop43 { q } => qt(q, 2.min(1 << q), 1, 0),
            Self::Prop54a { k, q, t, d } => {
                k_at_least_2(k)?;
                if d == 0 {
                    return domain("prop5.4a needs d >= 1");
                }
                qt(q, t, 1, 0)
            }
            Self::Prop54b { q, t, d } => {
                if d == 0 {
                    return domain("prop5.4b needs d >= 1");
                }
                qt(q, t, 1, 0)
            }
            Self::Prop61a | Self::Prop61b => Ok(()),
        }
    }
}

impl fmt::Display for TheoremPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Thm31 { k, q, t } | Self::Thm32 { k, q, t } => {
                write!(f, "{} k={k} q={q} t={t}", self.id())
            }
            Self::Thm41 { q, t } | Self::Thm42 { q, t } => write!(f, "{} q={q} t={t}", self.id()),
            Self::Prop43 { q } => write!(f, "{} q={q}", self.id()),
            Self::Prop54a { k, q, t, d } => write!(f, "{} k={k} q={q} t={t} d={d}", self.id()),
            Self::Prop54b { q, t, d } => write!(f, "{} q={q} t={t} d={d}", self.id()),
            Self::Prop61a | Self::Prop61b => f.write_str(self.id()),
        }
    }
}

fn range(from: usize, to: usize) -> Vec<usize> {
    (from..to).collect()
}

/// `U_{l,j}` on a set of `j < l` variables is `U_{j,j}`.
fn equip(level: usize, vars: Vec<usize>, mult: u64) -> Block {
    Block::equip(level.min(vars.len()), vars, mult)
}

/// Push a block unless its multiplicity (or content) is empty.
fn push(blocks: &mut Vec<Block>, block: Block) {
    let empty = match &block.kind {
        crate::repbuild::BlockKind::Ortho { pairs } => pairs.is_empty(),
        crate::repbuild::BlockKind::Equip { vars, .. } => vars.is_empty(),
    };
    if block.mult > 0 && !empty {
        blocks.push(block);
    }
}

/// Bisections of one mass by each of `H_{k-j+1}, ..., H_k` for `j = k-1` down to 1.
fn cascade(blocks: &mut Vec<Block>, k: usize, mult: u64) {
    for start in 1..k {
        push(blocks, Block::bisect(range(start, k), mult));
    }
}

/// The representation of a preset together with its target exponent `d`.
pub fn preset_spec(preset: &TheoremPreset) -> Result<(RepresentationSpec, usize)> {
    preset.validate()?;
    let mut blocks = Vec::new();
    let (k, d) = match *preset {
        TheoremPreset::Thm31 { k, q, t } => {
            let m = (1u64 << (q + 1)) - t;
            let d = (1usize << q) * (k + 1) - t as usize;
            push(&mut blocks, equip(2, range(0, k), m));
            push(&mut blocks, equip(2, range(1, k), t - 1));
            // Non-adjacent pairs, the factors (t_1+t_3)...(t_{k-2}+t_k).
            let pairs: Vec<_> = all_pairs(k).into_iter().filter(|&(i, j)| j >= i + 2).collect();
            push(&mut blocks, Block::ortho(pairs, 1));
            push(&mut blocks, Block::bisect(range(1, k), 1));
            (k, d)
        }
        TheoremPreset::Thm32 { k, q, t } => {
            let m = (1u64 << (q + 1)) - t;
            let d = (1usize << q) * (k + 1) - t as usize;
            push(&mut blocks, equip(2, range(0, k), m));
            push(&mut blocks, equip(2, range(1, k), t - 2));
            push(&mut blocks, Block::ortho(all_pairs(k), 1));
            cascade(&mut blocks, k, 1);
            (k, d)
        }
        TheoremPreset::Thm41 { q, t } => {
            let m = (1u64 << (q + 1)) - t;
            let d = 7 * (1usize << q) - 2 * t as usize;
            push(&mut blocks, equip(3, range(0, 4), m));
            push(&mut blocks, equip(2, range(1, 4), t - 1));
            push(&mut blocks, Block::ortho(vec![(0, 2), (0, 3), (1, 3)], 1));
            push(&mut blocks, Block::bisect(range(1, 4), 1));
            (4, d)
        }
        TheoremPreset::Thm42 { q, t } => {
            let m = (1u64 << (q + 1)) - t;
            let d = 7 * (1usize << q) - 2 * t as usize;
            push(&mut blocks, equip(3, range(0, 4), m));
            push(&mut blocks, equip(2, range(1, 4), t - 2));
            push(&mut blocks, Block::ortho(all_pairs(4), 1));
            cascade(&mut blocks, 4, 1);
            (4, d)
        }
        TheoremPreset::Prop43 { q } => {
            let m = (1u64 << (q + 1)) - 2;
            let d = 7 * (1usize << q) - 4;
            push(&mut blocks, equip(3, range(0, 4), m));
            push(&mut blocks, equip(3, range(1, 4), 1));
            push(&mut blocks, Block::bisect(range(2, 4), 2));
            push(&mut blocks, Block::bisect(range(3, 4), 1));
            (4, d)
        }
        TheoremPreset::Prop54a { k, q, t, d } => {
            let m = (1u64 << (q + 1)) - t;
            let u = (1usize << q) * (k + 1) - t as usize;
            push(&mut blocks, equip(2, range(0, k), m));
            push(&mut blocks, Block::bisect(range(0, k), d as u64 + 1));
            cascade(&mut blocks, k, t);
            (k, d + u + 1)
        }
        TheoremPreset::Prop54b { q, t, d } => {
            let m = (1u64 << (q + 1)) - t;
            let u = 7 * (1usize << q) - 2 * t as usize;
            push(&mut blocks, equip(3, range(0, 4), m));
            push(&mut blocks, Block::bisect(range(0, 4), d as u64 + 1));
            cascade(&mut blocks, 4, t);
            (4, d + u + 1)
        }
        TheoremPreset::Prop61a => {
            push(&mut blocks, equip(3, range(0, 4), 1));
            push(&mut blocks, Block::ortho(all_pairs(4), 1));
            push(&mut blocks, Block::bisect(range(1, 4), 1));
            push(&mut blocks, Block::bisect(range(2, 4), 2));
            push(&mut blocks, Block::bisect(range(3, 4), 1));
            (4, 7)
        }
        TheoremPreset::Prop61b => {
            push(&mut blocks, equip(3, range(0, 5), 1));
            push(&mut blocks, Block::ortho(all_pairs(5), 1));
            cascade(&mut blocks, 5, 1);
            (5, 9)
        }
    };
    Ok((RepresentationSpec::new(k, blocks)?, d))
}

/// How `minimal_certified_d` turns `(m, l, k, d)` into a candidate representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchPolicy {
    /// The matching theorem preset, which exists only at its own `d`.
    Paper,
    /// `m` equipartition blocks padded with bisections on suffix sets.
    BisectionPad,
    /// Full orthogonality, then bisection padding.
    OrthoThenPad,
}

impl SearchPolicy {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Self::Paper),
            "bisection-pad" => Ok(Self::BisectionPad),
            "ortho-then-pad" => Ok(Self::OrthoThenPad),
            other => domain(format!(
                "unknown policy {other}; expected paper, bisection-pad or ortho-then-pad"
            )),
        }
    }
}

impl fmt::Display for SearchPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Paper => "paper",
            Self::BisectionPad => "bisection-pad",
            Self::OrthoThenPad => "ortho-then-pad",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchStep {
    Skipped { d: usize, reason: String },
    Tried(CertificateResult),
}

impl SearchStep {
    pub fn d(&self) -> usize {
        match self {
            SearchStep::Skipped { d, .. } => *d,
            SearchStep::Tried(r) => r.d,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    pub m: u64,
    pub l: usize,
    pub k: usize,
    pub policy: SearchPolicy,
    pub d_min: usize,
    pub d_max: usize,
    /// The smallest certified `d`, if any.
    pub found: Option<CertificateResult>,
    /// One entry per `d` from `d_min` up to the certified one (or `d_max`), in order.
    pub steps: Vec<SearchStep>,
}

/// Runs certificates under a cell guard.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Engine {
    pub cell_limit: u64,
}

impl Default for Engine {
    fn default() -> Self {
        Self {
            cell_limit: DEFAULT_CELL_LIMIT,
        }
    }
}

impl Engine {
    pub fn new(cell_limit: u64) -> Self {
        Self { cell_limit }
    }

    /// The full-monomial test at uniform caps `d + 1`.
    pub fn certify_full_monomial(&self, spec: &RepresentationSpec, d: usize) -> Result<CertificateResult> {
        spec.validate()?;
        if d == 0 {
            return domain("d must be at least 1");
        }
        let dim_u = spec.dimension();
        let mut result = CertificateResult {
            k: spec.k,
            d,
            spec: spec.clone(),
            dim_u,
            status: CertificateStatus::DimensionMismatch,
            residual_support: None,
            max_degrees: Vec::new(),
        };
        if dim_u != (spec.k * d) as u64 {
            return Ok(result);
        }
        let caps = DegreeCaps::uniform(spec.k, d + 1, self.cell_limit)?;
        let p = build_u(spec, &caps)?;
        result.status = if p.is_target_monomial(&vec![d; spec.k])? {
            CertificateStatus::Certified
        } else {
            CertificateStatus::NotCertified
        };
        result.residual_support = Some(p.support_size());
        result.max_degrees = p.max_degrees();
        Ok(result)
    }

    /// Whether `p_{l,k}^m` survives in `Z2[t]/(t_i^{e_i})` with `e_i = d + 1`
    /// (or `e_i = d + i` when `staircase`). A polynomial lies in a monomial
    /// ideal iff every one of its monomials does, so surviving truncation is
    /// exactly non-membership.
    pub fn bk_nonmembership(&self, m: u64, l: usize, k: usize, d: usize, staircase: bool) -> Result<bool> {
        if l == 0 || l > k {
            return domain(format!("need 1 <= l <= k, got l = {l}, k = {k}"));
        }
        if m == 0 {
            return domain("m must be at least 1");
        }
        let caps = if staircase {
            DegreeCaps::staircase(k, d, self.cell_limit)?
        } else {
            DegreeCaps::uniform(k, d + 1, self.cell_limit)?
        };
        let p = equip_poly(l, &range(0, k), &caps)?;
        Ok(!p.pow(m).is_zero())
    }

    pub fn certify_preset(&self, preset: &TheoremPreset) -> Result<CertificateResult> {
        let (spec, d) = preset_spec(preset)?;
        self.certify_full_monomial(&spec, d)
    }

    /// The smallest `d` in `[lower, d_max]` whose policy-generated representation certifies.
    pub fn minimal_certified_d(
        &self,
        m: u64,
        l: usize,
        k: usize,
        policy: SearchPolicy,
        d_max: usize,
    ) -> Result<SearchOutcome> {
        if m == 0 || l == 0 || l > k {
            return domain(format!("need m >= 1 and 1 <= l <= k, got m = {m}, l = {l}, k = {k}"));
        }
        let orthogonal = policy == SearchPolicy::OrthoThenPad;
        let d_min = search_lower(m, l, k, orthogonal)?.max(1);
        let evaluate = |d: usize| match policy_spec(m, l, k, d, policy) {
            Err(reason) => Ok(SearchStep::Skipped { d, reason }),
            Ok(spec) => match self.certify_full_monomial(&spec, d) {
                Ok(r) => Ok(SearchStep::Tried(r)),
                Err(e @ crate::Error::CellLimit { .. }) => Ok(SearchStep::Skipped {
                    d,
                    reason: format!("skipped(resource): {e}"),
                }),
                Err(e) => Err(e),
            },
        };
        // Batches of one candidate per worker; stop after the first batch that certifies.
        let batch = rayon::current_num_threads().max(1);
        let mut steps: Vec<SearchStep> = Vec::new();
        let mut found = None;
        let mut next = d_min;
        while found.is_none() && next <= d_max {
            let end = (next + batch - 1).min(d_max);
            let chunk = (next..=end)
                .into_par_iter()
                .map(evaluate)
                .collect::<Result<Vec<_>>>()?;
            for step in chunk {
                if found.is_none() {
                    if let SearchStep::Tried(r) = &step {
                        if r.is_certified() {
                            found = Some(r.clone());
                        }
                    }
                    steps.push(step);
                }
            }
            next = end + 1;
        }
        Ok(SearchOutcome {
            m,
            l,
            k,
            policy,
            d_min,
            d_max,
            found,
            steps,
        })
    }
}

/// Lower end of the search range: the counting bound (for `l = 1` it is `m`).
fn search_lower(m: u64, l: usize, k: usize, orthogonal: bool) -> Result<usize> {
    if l >= 2 {
        return Ok(makeev_lower(m, l as u32, k as u32, orthogonal)? as usize);
    }
    let mut total = m * k as u64;
    if orthogonal {
        total += binomial(k as u64, 2);
    }
    Ok(total.div_ceil(k as u64) as usize)
}

fn policy_spec(
    m: u64,
    l: usize,
    k: usize,
    d: usize,
    policy: SearchPolicy,
) -> std::result::Result<RepresentationSpec, String> {
    let build = |blocks| RepresentationSpec::new(k, blocks).map_err(|e| e.to_string());
    match policy {
        SearchPolicy::Paper => {
            let (q, t) = decompose(m).map_err(|e| e.to_string())?;
            let preset = match (l, k) {
                (2, k) if k >= 2 => TheoremPreset::Thm31 { k, q, t },
                (3, 4) => TheoremPreset::Thm41 { q, t },
                _ => return Err(format!("no preset construction for l = {l}, k = {k}")),
            };
            let (spec, preset_d) = preset_spec(&preset).map_err(|e| e.to_string())?;
            if preset_d != d {
                return Err(format!("{preset} only targets d = {preset_d}"));
            }
            Ok(spec)
        }
        SearchPolicy::BisectionPad | SearchPolicy::OrthoThenPad => {
            let mut blocks = vec![Block::equip(l, range(0, k), m)];
            if policy == SearchPolicy::OrthoThenPad && k >= 2 {
                blocks.push(Block::ortho(all_pairs(k), 1));
            }
            let base: u64 = blocks.iter().map(|b| b.mult * b.block_dim()).sum();
            let target = (k * d) as u64;
            if base > target {
                return Err(format!("base dimension {base} exceeds k*d = {target}"));
            }
            bisection_pad(&mut blocks, k, target - base);
            build(blocks)
        }
    }
}

/// Fill `deficit` dimensions with bisection blocks on suffix sets `{k-j+1..k}`,
/// longest suffixes first.
fn bisection_pad(blocks: &mut Vec<Block>, k: usize, mut deficit: u64) {
    for len in (1..=k).rev() {
        let copies = deficit / len as u64;
        if copies > 0 {
            blocks.push(Block::bisect(range(k - len, k), copies));
            deficit -= copies * len as u64;
        }
    }
}

/// The `l = 2` closed form `p_{2,k}` on all variables, used by several callers.
pub fn p2k(caps: &DegreeCaps) -> Result<TruncatedPolynomial> {
    equip_poly(2, &range(0, caps.k()), caps)
}
