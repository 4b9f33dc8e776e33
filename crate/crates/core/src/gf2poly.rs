//! Exact arithmetic in the truncated ring `Z2[t_1, ..., t_k] / (t_1^e_1, ..., t_k^e_k)`.
//!
//! A [`TruncatedPolynomial`] is a dense bit array with one cell per exponent
//! vector `(a_1, ..., a_k)`, `0 <= a_i < e_i`. The logical (mixed-radix) index
//! of a cell is `a_1 + e_1 * (a_2 + e_2 * (a_3 + ...))`. In storage every run
//! along `t_1` (a "row") is padded to whole `u64` words, so multiplying by a
//! power of `t_1` is a word shift and multiplying by a monomial is a row copy.
//!
//! Variables are 0-based in this API; renderings use `t1, ..., tk`.

use std::fmt;

use crate::error::{domain, Error, Result};

/// Default cell guard: `2^27` cells (16 MiB of coefficient bits).
pub const DEFAULT_CELL_LIMIT: u64 = 1 << 27;

/// Per-variable truncation exponents `e_1, ..., e_k`: `t_i^{e_i} = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DegreeCaps {
    caps: Vec<usize>,
}

impl DegreeCaps {
    pub fn new(caps: Vec<usize>) -> Result<Self> {
        Self::with_limit(caps, DEFAULT_CELL_LIMIT)
    }

    pub fn with_limit(caps: Vec<usize>, limit: u64) -> Result<Self> {
        if caps.is_empty() {
            return domain("degree caps need at least one variable");
        }
        if let Some(i) = caps.iter().position(|&e| e == 0) {
            return domain(format!("cap of t{} must be at least 1", i + 1));
        }
        let cells = caps
            .iter()
            .fold(1u128, |acc, &e| acc.saturating_mul(e as u128));
        if cells > limit as u128 {
            return Err(Error::CellLimit { cells, limit });
        }
        Ok(Self { caps })
    }

    /// `e_i = e` for all `k` variables.
    pub fn uniform(k: usize, e: usize, limit: u64) -> Result<Self> {
        Self::with_limit(vec![e; k], limit)
    }

    /// `e_i = d + i` for `i = 1..=k`, the ideal `<t_1^{d+1}, ..., t_k^{d+k}>`.
    pub fn staircase(k: usize, d: usize, limit: u64) -> Result<Self> {
        Self::with_limit((1..=k).map(|i| d + i).collect(), limit)
    }

    pub fn k(&self) -> usize {
        self.caps.len()
    }

    pub fn caps(&self) -> &[usize] {
        &self.caps
    }

    pub fn cap(&self, i: usize) -> usize {
        self.caps[i]
    }

    pub fn cell_count(&self) -> u64 {
        self.caps.iter().map(|&e| e as u64).product()
    }

    fn row_words(&self) -> usize {
        self.caps[0].div_ceil(64)
    }

    fn rows(&self) -> usize {
        self.caps[1..].iter().product()
    }

    /// Row stride of each variable; entry 0 is unused (t_1 lives inside a row).
    fn row_strides(&self) -> Vec<usize> {
        let mut strides = vec![0; self.k()];
        let mut s = 1;
        for (stride, &cap) in strides.iter_mut().zip(&self.caps).skip(1) {
            *stride = s;
            s *= cap;
        }
        strides
    }

    fn in_range(&self, exps: &[usize]) -> bool {
        exps.len() == self.k() && exps.iter().zip(&self.caps).all(|(&a, &e)| a < e)
    }

    fn check_exponents(&self, exps: &[usize]) -> Result<()> {
        if exps.len() != self.k() {
            return domain(format!(
                "exponent vector has {} entries, ring has {} variables",
                exps.len(),
                self.k()
            ));
        }
        if let Some(i) = exps.iter().zip(&self.caps).position(|(&a, &e)| a >= e) {
            return domain(format!(
                "exponent {} of t{} is outside the cap {}",
                exps[i],
                i + 1,
                self.caps[i]
            ));
        }
        Ok(())
    }
}

/// An element of the truncated ring, stored densely.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruncatedPolynomial {
    caps: DegreeCaps,
    row_words: usize,
    words: Vec<u64>,
}

impl TruncatedPolynomial {
    pub fn zero(caps: &DegreeCaps) -> Self {
        let row_words = caps.row_words();
        Self {
            caps: caps.clone(),
            row_words,
            words: vec![0; row_words * caps.rows()],
        }
    }

    pub fn one(caps: &DegreeCaps) -> Self {
        let mut p = Self::zero(caps);
        p.words[0] = 1;
        p
    }

    /// The monomial with the given exponents; errors if any exponent reaches its cap.
    pub fn monomial(caps: &DegreeCaps, exps: &[usize]) -> Result<Self> {
        caps.check_exponents(exps)?;
        let mut p = Self::zero(caps);
        p.flip(exps);
        Ok(p)
    }

    /// The image of `t_i` in the quotient ring (zero when `e_i = 1`).
    pub fn variable(caps: &DegreeCaps, i: usize) -> Self {
        let mut p = Self::zero(caps);
        if caps.cap(i) >= 2 {
            let mut exps = vec![0; caps.k()];
            exps[i] = 1;
            p.flip(&exps);
        }
        p
    }

    /// `sum_i coeffs[i] * t_i`. Every variable that appears must have cap at least 2.
    pub fn linear_form(caps: &DegreeCaps, coeffs: &[bool]) -> Result<Self> {
        if coeffs.len() != caps.k() {
            return domain(format!(
                "linear form has {} coefficients, ring has {} variables",
                coeffs.len(),
                caps.k()
            ));
        }
        let mut p = Self::zero(caps);
        for (i, _) in coeffs.iter().enumerate().filter(|(_, &c)| c) {
            if caps.cap(i) < 2 {
                return domain(format!("t{} is truncated away by cap 1", i + 1));
            }
            let mut exps = vec![0; caps.k()];
            exps[i] = 1;
            p.flip(&exps);
        }
        Ok(p)
    }

    /// Sum of the listed monomials (repeated monomials cancel in pairs).
    pub fn from_terms<I, E>(caps: &DegreeCaps, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = E>,
        E: AsRef<[usize]>,
    {
        let mut p = Self::zero(caps);
        for t in terms {
            caps.check_exponents(t.as_ref())?;
            p.flip(t.as_ref());
        }
        Ok(p)
    }

    pub fn caps(&self) -> &DegreeCaps {
        &self.caps
    }

    pub fn k(&self) -> usize {
        self.caps.k()
    }

    fn position(&self, exps: &[usize]) -> (usize, u64) {
        let strides = self.caps.row_strides();
        let row: usize = (1..self.k()).map(|i| exps[i] * strides[i]).sum();
        let word = row * self.row_words + exps[0] / 64;
        (word, 1u64 << (exps[0] % 64))
    }

    fn flip(&mut self, exps: &[usize]) {
        let (w, bit) = self.position(exps);
        self.words[w] ^= bit;
    }

    /// Coefficient of the given monomial; out-of-range exponents read as zero.
    pub fn coefficient(&self, exps: &[usize]) -> bool {
        if !self.caps.in_range(exps) {
            return false;
        }
        let (w, bit) = self.position(exps);
        self.words[w] & bit != 0
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn support_size(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Visit every monomial in ascending logical index order.
    pub fn for_each_term(&self, mut f: impl FnMut(&[usize])) {
        let k = self.k();
        let mut exps = vec![0usize; k];
        for (row, chunk) in self.words.chunks(self.row_words).enumerate() {
            if chunk.iter().all(|&w| w == 0) {
                continue;
            }
            let mut r = row;
            for (e, &cap) in exps.iter_mut().zip(self.caps.caps()).skip(1) {
                *e = r % cap;
                r /= cap;
            }
            for (wi, &w) in chunk.iter().enumerate() {
                let mut w = w;
                while w != 0 {
                    exps[0] = wi * 64 + w.trailing_zeros() as usize;
                    f(&exps);
                    w &= w - 1;
                }
            }
        }
    }

    /// All monomials as exponent vectors, in ascending logical index order.
    pub fn terms(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        self.for_each_term(|e| out.push(e.to_vec()));
        out
    }

    /// Largest exponent of `t_i` over the support, `None` for the zero polynomial.
    pub fn max_degree(&self, i: usize) -> Option<usize> {
        let mut best: Option<usize> = None;
        self.for_each_term(|e| best = Some(best.map_or(e[i], |b| b.max(e[i]))));
        best
    }

    pub fn max_degrees(&self) -> Vec<Option<usize>> {
        let mut best = vec![None; self.k()];
        self.for_each_term(|e| {
            for (b, &a) in best.iter_mut().zip(e) {
                *b = Some(b.map_or(a, |v: usize| v.max(a)));
            }
        });
        best
    }

    fn check_same_caps(&self, other: &Self) -> Result<()> {
        if self.caps != other.caps {
            return Err(Error::CapsMismatch {
                left: self.caps.caps().to_vec(),
                right: other.caps.caps().to_vec(),
            });
        }
        Ok(())
    }

    pub fn equals(&self, other: &Self) -> Result<bool> {
        self.check_same_caps(other)?;
        Ok(self.words == other.words)
    }

    /// True iff `self` is exactly the monomial with the given exponents.
    pub fn is_target_monomial(&self, exps: &[usize]) -> Result<bool> {
        self.caps.check_exponents(exps)?;
        Ok(self.support_size() == 1 && self.coefficient(exps))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_caps(other)?;
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(out)
    }

    /// Truncated product.
    ///
    /// Iterates the support of the sparser operand. Each of its monomials
    /// either meets every monomial of the other operand one by one, or shifts
    /// whole rows of the other operand at once, whichever touches fewer words.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_caps(other)?;
        let (na, nb) = (self.support_size(), other.support_size());
        if na == 0 || nb == 0 {
            return Ok(Self::zero(&self.caps));
        }
        let (sparse, dense, n_dense) = if na <= nb {
            (self, other, nb)
        } else {
            (other, self, na)
        };
        let sparse_terms = sparse.terms();
        let pairwise_cost = n_dense;
        let rowwise_cost = self.words.len();
        let mut out = Self::zero(&self.caps);
        if pairwise_cost <= rowwise_cost {
            let dense_terms = dense.terms();
            let strides = self.caps.row_strides();
            let caps = self.caps.caps();
            for s in &sparse_terms {
                'pair: for t in &dense_terms {
                    let mut row = 0;
                    for i in 1..caps.len() {
                        let a = s[i] + t[i];
                        if a >= caps[i] {
                            continue 'pair;
                        }
                        row += a * strides[i];
                    }
                    let a0 = s[0] + t[0];
                    if a0 >= caps[0] {
                        continue;
                    }
                    out.words[row * self.row_words + a0 / 64] ^= 1u64 << (a0 % 64);
                }
            }
        } else {
            for s in &sparse_terms {
                out.xor_shifted(dense, s);
            }
        }
        Ok(out)
    }

    /// `self += src * t^shift`, truncated, processing whole rows.
    fn xor_shifted(&mut self, src: &Self, shift: &[usize]) {
        let caps = self.caps.caps();
        let k = caps.len();
        if shift.iter().zip(caps).any(|(&s, &e)| s >= e) {
            return;
        }
        let strides = self.caps.row_strides();
        let rw = self.row_words;
        let row_bits = caps[0];
        let offset: usize = (1..k).map(|i| shift[i] * strides[i]).sum();
        // Source rows that stay inside the box after shifting.
        let limits: Vec<usize> = (1..k).map(|i| caps[i] - shift[i]).collect();
        let run = limits.first().copied().unwrap_or(1);
        let mut coord = vec![0usize; limits.len()];
        let mut base = 0usize;
        let shift_words = shift[0] / 64;
        let shift_bits = shift[0] % 64;
        let last_mask = if row_bits.is_multiple_of(64) {
            u64::MAX
        } else {
            (1u64 << (row_bits % 64)) - 1
        };
        loop {
            if rw == 1 {
                let src_rows = &src.words[base..base + run];
                let dst_rows = &mut self.words[base + offset..base + offset + run];
                for (d, &s) in dst_rows.iter_mut().zip(src_rows) {
                    *d ^= (s << shift_bits) & last_mask;
                }
            } else {
                for r in base..base + run {
                    let s_row = &src.words[r * rw..(r + 1) * rw];
                    let d0 = (r + offset) * rw;
                    for j in shift_words..rw {
                        let lo = j - shift_words;
                        let mut w = s_row[lo] << shift_bits;
                        if shift_bits > 0 && lo > 0 {
                            w |= s_row[lo - 1] >> (64 - shift_bits);
                        }
                        if j == rw - 1 {
                            w &= last_mask;
                        }
                        self.words[d0 + j] ^= w;
                    }
                }
            }
            // Advance the odometer over the outer coordinates (index 0 is the run).
            let mut d = 1;
            loop {
                if d >= limits.len() {
                    return;
                }
                coord[d] += 1;
                base += strides[d + 1];
                if coord[d] < limits[d] {
                    break;
                }
                base -= coord[d] * strides[d + 1];
                coord[d] = 0;
                d += 1;
            }
        }
    }

    /// Reference product: the plain double loop over every pair of cells.
    pub fn mul_naive(&self, other: &Self) -> Result<Self> {
        self.check_same_caps(other)?;
        let caps = self.caps.caps();
        let cells = self.caps.cell_count() as usize;
        let decode = |mut idx: usize| -> Vec<usize> {
            caps.iter()
                .map(|&e| {
                    let a = idx % e;
                    idx /= e;
                    a
                })
                .collect()
        };
        let mut out = Self::zero(&self.caps);
        for i in 0..cells {
            let ei = decode(i);
            if !self.coefficient(&ei) {
                continue;
            }
            for j in 0..cells {
                let ej = decode(j);
                if !other.coefficient(&ej) {
                    continue;
                }
                let sum: Vec<usize> = ei.iter().zip(&ej).map(|(a, b)| a + b).collect();
                if self.caps.in_range(&sum) {
                    out.flip(&sum);
                }
            }
        }
        Ok(out)
    }

    /// Frobenius square: over GF(2), `p^2` doubles every exponent vector.
    pub fn square(&self) -> Self {
        let mut out = Self::zero(&self.caps);
        let mut doubled = vec![0; self.k()];
        self.for_each_term(|e| {
            for (d, &a) in doubled.iter_mut().zip(e) {
                *d = 2 * a;
            }
            if self.caps.in_range(&doubled) {
                out.flip(&doubled);
            }
        });
        out
    }

    /// `p^e` by square-and-multiply with Frobenius squaring.
    pub fn pow(&self, mut e: u64) -> Self {
        let mut result = Self::one(&self.caps);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base).expect("same caps");
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
                if base.is_zero() {
                    return Self::zero(&self.caps);
                }
            }
        }
        result
    }

    /// Image under the projection onto smaller caps (each new cap at most the old one).
    pub fn truncate(&self, caps: &DegreeCaps) -> Result<Self> {
        if caps.k() != self.k() || caps.caps().iter().zip(self.caps.caps()).any(|(a, b)| a > b) {
            return domain(format!(
                "cannot truncate caps {:?} to {:?}",
                self.caps.caps(),
                caps.caps()
            ));
        }
        let mut out = Self::zero(caps);
        self.for_each_term(|e| {
            if caps.in_range(e) {
                out.flip(e);
            }
        });
        Ok(out)
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, exps: &[usize]) -> fmt::Result {
    let mut first = true;
    for (i, &a) in exps.iter().enumerate().filter(|(_, &a)| a > 0) {
        if !first {
            f.write_str("*")?;
        }
        first = false;
        if a == 1 {
            write!(f, "t{}", i + 1)?;
        } else {
            write!(f, "t{}^{}", i + 1, a)?;
        }
    }
    if first {
        f.write_str("1")?;
    }
    Ok(())
}

/// Renders like `t1^3*t2 + t1*t2^2`, terms in ascending index order.
impl fmt::Display for TruncatedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut res = Ok(());
        self.for_each_term(|e| {
            if res.is_err() {
                return;
            }
            if !first {
                res = f.write_str(" + ");
            }
            first = false;
            if res.is_ok() {
                res = write_monomial(f, e);
            }
        });
        res?;
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for TruncatedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruncatedPolynomial({:?}: {})", self.caps.caps(), self)
    }
}
