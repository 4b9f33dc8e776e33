//! Representation polynomials of constraint blocks and of whole representations.
//!
//! Every constraint on the hyperplanes contributes one-dimensional
//! `Z2^k`-representations `V_h`, and each `V_h` contributes the linear form
//! `h_1 t_1 + ... + h_k t_k`. A [`RepresentationSpec`] lists blocks of such
//! constraints with multiplicities; [`build_u`] multiplies everything out.

use std::fmt;

use itertools::Itertools;

use crate::error::{domain, Result};
use crate::gf2poly::{DegreeCaps, TruncatedPolynomial};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockKind {
    /// One mass equipartitioned by any `level` of the hyperplanes named in `vars`.
    /// `level = 1` is a bisection of one mass by each hyperplane in `vars`.
    Equip { level: usize, vars: Vec<usize> },
    /// Pairwise orthogonality of the listed hyperplane pairs `(i, j)`, `i < j`.
    Ortho { pairs: Vec<(usize, usize)> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub kind: BlockKind,
    pub mult: u64,
}

impl Block {
    pub fn equip(level: usize, vars: impl Into<Vec<usize>>, mult: u64) -> Self {
        Self {
            kind: BlockKind::Equip {
                level,
                vars: vars.into(),
            },
            mult,
        }
    }

    pub fn bisect(vars: impl Into<Vec<usize>>, mult: u64) -> Self {
        Self::equip(1, vars, mult)
    }

    pub fn ortho(pairs: impl Into<Vec<(usize, usize)>>, mult: u64) -> Self {
        Self {
            kind: BlockKind::Ortho {
                pairs: pairs.into(),
            },
            mult,
        }
    }

    /// Dimension of one copy of the block.
    pub fn block_dim(&self) -> u64 {
        match &self.kind {
            BlockKind::Equip { level, vars } => {
                (1..=*level).map(|j| binomial(vars.len() as u64, j as u64)).sum()
            }
            BlockKind::Ortho { pairs } => pairs.len() as u64,
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if self.mult == 0 {
            return domain("block multiplicity must be positive");
        }
        match &self.kind {
            BlockKind::Equip { level, vars } => {
                if vars.is_empty() {
                    return domain("equipartition block needs at least one hyperplane");
                }
                if !vars.windows(2).all(|w| w[0] < w[1]) {
                    return domain(format!("block variables {vars:?} are not strictly increasing"));
                }
                if vars.iter().any(|&v| v >= k) {
                    return domain(format!("block variables {vars:?} exceed k = {k}"));
                }
                if *level == 0 || *level > vars.len() {
                    return domain(format!(
                        "level {level} is outside 1..={} for this block",
                        vars.len()
                    ));
                }
            }
            BlockKind::Ortho { pairs } => {
                for &(i, j) in pairs {
                    if i >= j || j >= k {
                        return domain(format!("orthogonality pair ({}, {}) is invalid", i + 1, j + 1));
                    }
                }
                if pairs.iter().duplicates().next().is_some() {
                    return domain("orthogonality pairs repeat");
                }
            }
        }
        Ok(())
    }
}

/// Renders with 1-based hyperplane indices, e.g. `Equip(2,{1,2,3})x2`.
impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            BlockKind::Equip { level, vars } => write!(
                f,
                "Equip({},{{{}}})",
                level,
                vars.iter().map(|v| v + 1).join(",")
            )?,
            BlockKind::Ortho { pairs } => write!(
                f,
                "Ortho({{{}}})",
                pairs.iter().map(|(i, j)| format!("({},{})", i + 1, j + 1)).join(",")
            )?,
        }
        write!(f, "x{}", self.mult)
    }
}

/// A `Z2^k`-representation assembled from constraint blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepresentationSpec {
    pub k: usize,
    pub blocks: Vec<Block>,
}

impl RepresentationSpec {
    pub fn new(k: usize, blocks: Vec<Block>) -> Result<Self> {
        let spec = Self { k, blocks };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return domain("k must be at least 1");
        }
        self.blocks.iter().try_for_each(|b| b.validate(self.k))
    }

    /// Total dimension `sum mult * block_dim`.
    pub fn dimension(&self) -> u64 {
        self.blocks.iter().map(|b| b.mult * b.block_dim()).sum()
    }
}

impl fmt::Display for RepresentationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={} [{}]", self.k, self.blocks.iter().join(", "))
    }
}

pub fn binomial(n: u64, r: u64) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn form(caps: &DegreeCaps, vars: &[usize]) -> TruncatedPolynomial {
    vars.iter()
        .map(|&v| TruncatedPolynomial::variable(caps, v))
        .fold(TruncatedPolynomial::zero(caps), |acc, t| acc.add(&t).expect("same caps"))
}

fn check_vars(caps: &DegreeCaps, vars: &[usize]) -> Result<()> {
    if vars.is_empty() || vars.iter().any(|&v| v >= caps.k()) {
        return domain(format!("variables {vars:?} do not fit k = {}", caps.k()));
    }
    Ok(())
}

/// `r_j`: the product of every linear form summing exactly `j` of the named variables.
pub fn r_poly(j: usize, vars: &[usize], caps: &DegreeCaps) -> Result<TruncatedPolynomial> {
    check_vars(caps, vars)?;
    if j == 0 || j > vars.len() {
        return domain(format!("weight {j} is outside 1..={}", vars.len()));
    }
    let mut acc = TruncatedPolynomial::one(caps);
    for subset in vars.iter().copied().combinations(j) {
        acc = acc.mul(&form(caps, &subset))?;
        if acc.is_zero() {
            break;
        }
    }
    Ok(acc)
}

/// `p_{level}` on the named variables: `r_1 * r_2 * ... * r_level`.
pub fn equip_poly(level: usize, vars: &[usize], caps: &DegreeCaps) -> Result<TruncatedPolynomial> {
    check_vars(caps, vars)?;
    if level == 0 || level > vars.len() {
        return domain(format!("level {level} is outside 1..={}", vars.len()));
    }
    let mut acc = TruncatedPolynomial::one(caps);
    for j in 1..=level {
        acc = acc.mul(&r_poly(j, vars, caps)?)?;
    }
    Ok(acc)
}

/// `prod_{(i,j)} (t_i + t_j)`; the empty product is one.
pub fn ortho_poly(pairs: &[(usize, usize)], caps: &DegreeCaps) -> Result<TruncatedPolynomial> {
    let mut acc = TruncatedPolynomial::one(caps);
    for &(i, j) in pairs {
        if i >= j || j >= caps.k() {
            return domain(format!("orthogonality pair ({}, {}) is invalid", i + 1, j + 1));
        }
        acc = acc.mul(&form(caps, &[i, j]))?;
    }
    Ok(acc)
}

/// All pairs `(i, j)` with `i < j < k`.
pub fn all_pairs(k: usize) -> Vec<(usize, usize)> {
    (0..k).tuple_combinations().collect()
}

fn orbit_sum(caps: &DegreeCaps, pattern: &[usize]) -> Result<TruncatedPolynomial> {
    let k = caps.k();
    if pattern.len() != k {
        return domain(format!("pattern {pattern:?} needs {k} variables"));
    }
    for (i, &e) in caps.caps().iter().enumerate() {
        let top = *pattern.iter().max().unwrap_or(&0);
        if top >= e {
            return domain(format!("cap {e} of t{} cannot hold exponent {top}", i + 1));
        }
    }
    let terms = (0..k).permutations(k).map(|sigma| {
        let mut exps = vec![0; k];
        for (pos, &var) in sigma.iter().enumerate() {
            exps[var] = pattern[pos];
        }
        exps
    });
    TruncatedPolynomial::from_terms(caps, terms)
}

/// `sum_sigma t_sigma(1)^k t_sigma(2)^(k-1) ... t_sigma(k)`, written out term by term.
pub fn closed_p2k(k: usize, caps: &DegreeCaps) -> Result<TruncatedPolynomial> {
    if caps.k() != k {
        return domain(format!("closed form for k = {k} needs {k} variables"));
    }
    orbit_sum(caps, &(1..=k).rev().collect::<Vec<_>>())
}

/// The four symmetric orbit sums making up `p_{3,4}`.
pub fn closed_p34(caps: &DegreeCaps) -> Result<TruncatedPolynomial> {
    let mut acc = TruncatedPolynomial::zero(caps);
    for pattern in [[5, 4, 3, 2], [7, 4, 2, 1], [6, 5, 2, 1], [6, 4, 3, 1]] {
        acc = acc.add(&orbit_sum(caps, &pattern)?)?;
    }
    Ok(acc)
}

/// `p_{3,3} = sum_sigma t_sigma(1)^4 t_sigma(2)^2 t_sigma(3)`.
pub fn closed_p33(caps: &DegreeCaps) -> Result<TruncatedPolynomial> {
    orbit_sum(caps, &[4, 2, 1])
}

/// The polynomial of one copy of a block.
pub fn block_poly(block: &Block, caps: &DegreeCaps) -> Result<TruncatedPolynomial> {
    match &block.kind {
        BlockKind::Equip { level, vars } => equip_poly(*level, vars, caps),
        BlockKind::Ortho { pairs } => ortho_poly(pairs, caps),
    }
}

/// `p_U`: each block raised to its multiplicity, then multiplied together
/// smallest support first.
pub fn build_u(spec: &RepresentationSpec, caps: &DegreeCaps) -> Result<TruncatedPolynomial> {
    spec.validate()?;
    if caps.k() != spec.k {
        return domain(format!(
            "spec has k = {} but caps have {} variables",
            spec.k,
            caps.k()
        ));
    }
    let mut factors = Vec::with_capacity(spec.blocks.len());
    for block in &spec.blocks {
        let p = block_poly(block, caps)?.pow(block.mult);
        if p.is_zero() {
            return Ok(p);
        }
        factors.push((p.support_size(), p));
    }
    factors.sort_by_key(|(n, _)| *n);
    let mut acc = TruncatedPolynomial::one(caps);
    for (_, p) in factors {
        acc = acc.mul(&p)?;
        if acc.is_zero() {
            break;
        }
    }
    Ok(acc)
}
