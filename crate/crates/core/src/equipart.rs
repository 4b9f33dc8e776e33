//! Concrete side: region masses, Fourier coefficients over `Z2^k`, the
//! `l`-of-`k` equipartition verdict, and a numerical arrangement finder.
//!
//! Regions are indexed by bitmasks `g` with bit `i` set when the point lies on
//! the negative side `<a_i, x> < b_i` of hyperplane `i`. Characters use the same
//! bitmask convention, so `chi_h(g) = (-1)^popcount(h & g)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};

/// Largest supported number of hyperplanes (the region table has `2^k` cells).
pub const MAX_HYPERPLANES: usize = 16;

const UNIT_TOL: f64 = 1e-12;

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn all_finite(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

/// `{x : <a, x> = b}` with `(a, b)` on the unit sphere `S^d`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hyperplane {
    a: Vec<f64>,
    b: f64,
}

impl Hyperplane {
    /// Strict constructor: `|a|^2 + b^2` must be 1 within `1e-12`.
    pub fn new(a: Vec<f64>, b: f64) -> Result<Self> {
        Self::check(&a, b)?;
        let norm2 = dot(&a, &a) + b * b;
        if (norm2 - 1.0).abs() > UNIT_TOL {
            return domain(format!("|a|^2 + b^2 = {norm2}, expected 1"));
        }
        Ok(Self { a, b })
    }

    /// Rescales `(a, b)` onto the unit sphere. Already-unit input is kept bit for bit.
    pub fn normalized(a: Vec<f64>, b: f64) -> Result<Self> {
        Self::check(&a, b)?;
        let norm2 = dot(&a, &a) + b * b;
        if (norm2 - 1.0).abs() <= UNIT_TOL {
            return Ok(Self { a, b });
        }
        let n = norm2.sqrt();
        Ok(Self {
            a: a.iter().map(|x| x / n).collect(),
            b: b / n,
        })
    }

    /// The hyperplane with the given normal through `point`.
    pub fn through(normal: &[f64], point: &[f64]) -> Result<Self> {
        if normal.len() != point.len() {
            return domain("normal and point have different dimensions");
        }
        Self::normalized(normal.to_vec(), dot(normal, point))
    }

    fn check(a: &[f64], b: f64) -> Result<()> {
        if a.is_empty() {
            return domain("hyperplane needs dimension at least 1");
        }
        if !all_finite(a) || !b.is_finite() {
            return domain("hyperplane coordinates must be finite");
        }
        if a.iter().all(|&x| x == 0.0) {
            return domain("normal vector is zero (hyperplane at infinity)");
        }
        Ok(())
    }

    pub fn normal(&self) -> &[f64] {
        &self.a
    }

    pub fn offset(&self) -> f64 {
        self.b
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// `<a, x> - b`; nonnegative on `H^+`.
    pub fn signed_value(&self, x: &[f64]) -> f64 {
        dot(&self.a, x) - self.b
    }

    /// The antipodal point `(-a, -b)`: same hyperplane, sides swapped.
    pub fn flipped(&self) -> Self {
        Self {
            a: self.a.iter().map(|x| -x).collect(),
            b: -self.b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HyperplaneArrangement {
    d: usize,
    hyperplanes: Vec<Hyperplane>,
}

impl HyperplaneArrangement {
    pub fn new(hyperplanes: Vec<Hyperplane>) -> Result<Self> {
        let Some(first) = hyperplanes.first() else {
            return domain("an arrangement needs at least one hyperplane");
        };
        if hyperplanes.len() > MAX_HYPERPLANES {
            return domain(format!(
                "{} hyperplanes requested, at most {MAX_HYPERPLANES} supported",
                hyperplanes.len()
            ));
        }
        let d = first.dim();
        if let Some(i) = hyperplanes.iter().position(|h| h.dim() != d) {
            return domain(format!(
                "hyperplane {} has dimension {}, expected {d}",
                i + 1,
                hyperplanes[i].dim()
            ));
        }
        Ok(Self { d, hyperplanes })
    }

    pub fn k(&self) -> usize {
        self.hyperplanes.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn hyperplanes(&self) -> &[Hyperplane] {
        &self.hyperplanes
    }

    /// Replace hyperplane `i` by its antipode.
    pub fn flip(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.hyperplanes[i] = self.hyperplanes[i].flipped();
        out
    }
}

/// A discrete mass: points with positive weights.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedPointCloud {
    d: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl WeightedPointCloud {
    pub fn new(d: usize, points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return domain("point clouds need dimension at least 1");
        }
        if points.is_empty() {
            return domain("a mass needs at least one point");
        }
        if points.len() != weights.len() {
            return domain(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            ));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != d {
                return domain(format!("point {} has dimension {}, expected {d}", i + 1, p.len()));
            }
            if !all_finite(p) {
                return domain(format!("point {} has a non-finite coordinate", i + 1));
            }
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return domain(format!("weight {} is {}, weights must be positive", i + 1, weights[i]));
        }
        Ok(Self { d, points, weights })
    }

    pub fn unweighted(d: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        Self::new(d, points, vec![1.0; n])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Twice the largest distance from the pooled centroid; a rigid-motion
/// invariant stand-in for the diameter of all points.
pub fn spread(masses: &[WeightedPointCloud]) -> f64 {
    let Some(d) = masses.first().map(|m| m.d) else {
        return 0.0;
    };
    let n: usize = masses.iter().map(|m| m.len()).sum();
    let mut centroid = vec![0.0; d];
    for p in masses.iter().flat_map(|m| &m.points) {
        for (c, x) in centroid.iter_mut().zip(p) {
            *c += x / n as f64;
        }
    }
    let max_dist2 = masses
        .iter()
        .flat_map(|m| &m.points)
        .map(|p| p.iter().zip(&centroid).map(|(x, c)| (x - c) * (x - c)).sum::<f64>())
        .fold(0.0, f64::max);
    2.0 * max_dist2.sqrt()
}

/// Default half-width of the boundary band: `1e-9` times [`spread`].
pub fn default_boundary_eps(masses: &[WeightedPointCloud]) -> f64 {
    1e-9 * spread(masses)
}

/// `chi_h(g) = (-1)^{<h, g>}` for bitmask-encoded `h, g`.
pub fn character(h: usize, g: usize) -> i32 {
    if (h & g).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Nonzero `h` of Hamming weight at most `l`, ascending.
pub fn equipartition_characters(l: usize, k: usize) -> Vec<usize> {
    (1..1usize << k)
        .filter(|h| h.count_ones() as usize <= l)
        .collect()
}

/// Mass of every region `R_g`. A point within `eps` of hyperplane `i`
/// contributes half its weight to each side of that hyperplane, so the
/// table always sums to the total weight.
pub fn region_masses(
    arrangement: &HyperplaneArrangement,
    mass: &WeightedPointCloud,
    eps: f64,
) -> Result<Vec<f64>> {
    if arrangement.d != mass.d {
        return domain(format!(
            "arrangement lives in dimension {} but the mass in dimension {}",
            arrangement.d, mass.d
        ));
    }
    let mut table = vec![0.0; 1 << arrangement.k()];
    for (p, &w) in mass.points.iter().zip(&mass.weights) {
        let mut base = 0usize;
        let mut split = 0usize;
        for (i, h) in arrangement.hyperplanes.iter().enumerate() {
            let z = h.signed_value(p);
            if z.abs() <= eps {
                split |= 1 << i;
            } else if z < 0.0 {
                base |= 1 << i;
            }
        }
        let share = w / (1u64 << split.count_ones()) as f64;
        let mut sub = split;
        loop {
            table[base | sub] += share;
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & split;
        }
    }
    Ok(table)
}

/// `c_h = 2^{-k} sum_g f(g) chi_h(g)` for every `h`, by a fast Walsh-Hadamard transform.
pub fn fourier_coefficients(table: &[f64]) -> Result<Vec<f64>> {
    let n = table.len();
    if n < 2 || !n.is_power_of_two() {
        return domain(format!("region table has {n} cells, expected 2^k with k >= 1"));
    }
    let mut c = table.to_vec();
    let mut len = 1;
    while len < n {
        for start in (0..n).step_by(2 * len) {
            for j in start..start + len {
                let (x, y) = (c[j], c[j + len]);
                c[j] = x + y;
                c[j + len] = x - y;
            }
        }
        len *= 2;
    }
    let scale = 1.0 / n as f64;
    c.iter_mut().for_each(|x| *x *= scale);
    Ok(c)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MassVerdict {
    pub total_weight: f64,
    pub region_masses: Vec<f64>,
    pub coefficients: Vec<f64>,
    /// `max |c_h|` over the constraint characters.
    pub max_coefficient: f64,
    /// `max_coefficient` divided by `total / 2^k`.
    pub relative_residual: f64,
    pub equipartitioned: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FourierReport {
    pub k: usize,
    pub l: usize,
    pub rel_tol: f64,
    pub boundary_eps: f64,
    /// The constraint characters `h` (nonzero, weight at most `l`).
    pub characters: Vec<usize>,
    pub masses: Vec<MassVerdict>,
}

impl FourierReport {
    pub fn all_pass(&self) -> bool {
        self.masses.iter().all(|m| m.equipartitioned)
    }

    pub fn max_relative_residual(&self) -> f64 {
        self.masses
            .iter()
            .map(|m| m.relative_residual)
            .fold(0.0, f64::max)
    }
}

/// Every `l` of the hyperplanes equipartition each mass iff `c_h` vanishes on
/// the constraint characters; decided at `max |c_h| <= rel_tol * total / 2^k`.
pub fn check_equipartition(
    arrangement: &HyperplaneArrangement,
    masses: &[WeightedPointCloud],
    l: usize,
    rel_tol: f64,
) -> Result<FourierReport> {
    check_equipartition_with_eps(arrangement, masses, l, rel_tol, default_boundary_eps(masses))
}

pub fn check_equipartition_with_eps(
    arrangement: &HyperplaneArrangement,
    masses: &[WeightedPointCloud],
    l: usize,
    rel_tol: f64,
    eps: f64,
) -> Result<FourierReport> {
    let k = arrangement.k();
    if l == 0 || l > k {
        return domain(format!("need 1 <= l <= k, got l = {l}, k = {k}"));
    }
    if masses.is_empty() {
        return domain("no masses given");
    }
    let characters = equipartition_characters(l, k);
    let cell = (1u64 << k) as f64;
    let verdicts = masses
        .iter()
        .map(|mass| {
            let table = region_masses(arrangement, mass, eps)?;
            let coefficients = fourier_coefficients(&table)?;
            let total = mass.total_weight();
            let max_coefficient = characters
                .iter()
                .map(|&h| coefficients[h].abs())
                .fold(0.0, f64::max);
            let relative_residual = max_coefficient * cell / total;
            Ok(MassVerdict {
                total_weight: total,
                region_masses: table,
                coefficients,
                max_coefficient,
                relative_residual,
                equipartitioned: relative_residual <= rel_tol,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FourierReport {
        k,
        l,
        rel_tol,
        boundary_eps: eps,
        characters,
        masses: verdicts,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairCheck {
    /// 0-based hyperplane indices, `r < s`.
    pub r: usize,
    pub s: usize,
    pub dot: f64,
    pub orthogonal: bool,
}

/// `|<a_r, a_s>| <= tol` for every pair `r < s`.
pub fn check_orthogonality(arrangement: &HyperplaneArrangement, tol: f64) -> Result<Vec<PairCheck>> {
    let k = arrangement.k();
    if k < 2 {
        return domain("orthogonality needs at least two hyperplanes");
    }
    let hs = &arrangement.hyperplanes;
    let mut out = Vec::with_capacity(k * (k - 1) / 2);
    for r in 0..k {
        for s in r + 1..k {
            let dot = dot(&hs[r].a, &hs[s].a);
            out.push(PairCheck {
                r,
                s,
                dot,
                orthogonal: dot.abs() <= tol,
            });
        }
    }
    Ok(out)
}

/// Temperatures `initial * factor^stage` for `stages` stages.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnnealSchedule {
    pub stages: usize,
    pub factor: f64,
    /// In units of the RMS radius of the pooled points.
    pub initial_temperature: f64,
    pub steps_per_stage: usize,
    pub learning_rate: f64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            stages: 5,
            factor: 0.2,
            initial_temperature: 0.25,
            steps_per_stage: 300,
            learning_rate: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverOptions {
    pub restarts: usize,
    pub seed: u64,
    pub schedule: AnnealSchedule,
    /// Random perturbation steps on the exact objective after annealing.
    pub polish_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            seed: 0,
            schedule: AnnealSchedule::default(),
            polish_iterations: 3000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Solution {
    pub arrangement: HyperplaneArrangement,
    /// Largest relative residual over all masses, exact boundary rule.
    pub residual: f64,
    /// `max |<a_r, a_s>|`, present for orthogonal problems.
    pub orthogonality_residual: Option<f64>,
    /// Index of the winning restart.
    pub restart: usize,
}

impl Solution {
    /// The score restarts are ranked by.
    fn score(&self) -> f64 {
        self.residual.max(self.orthogonality_residual.unwrap_or(0.0))
    }
}

/// The problem in centred, rescaled coordinates with weights summing to 1 per mass.
struct Scaled {
    d: usize,
    k: usize,
    orthogonal: bool,
    characters: Vec<usize>,
    masses: Vec<(Vec<Vec<f64>>, Vec<f64>)>,
    eps: f64,
    centroid: Vec<f64>,
    scale: f64,
}

/// Exact objective value and its parts.
#[derive(Clone, Copy, Debug)]
struct Exact {
    phi: f64,
}

impl Scaled {
    fn new(masses: &[WeightedPointCloud], k: usize, l: usize, orthogonal: bool) -> Self {
        let d = masses[0].d;
        let n: usize = masses.iter().map(|m| m.len()).sum();
        let mut centroid = vec![0.0; d];
        for p in masses.iter().flat_map(|m| &m.points) {
            for (c, x) in centroid.iter_mut().zip(p) {
                *c += x / n as f64;
            }
        }
        let mean_dist2 = masses
            .iter()
            .flat_map(|m| &m.points)
            .map(|p| p.iter().zip(&centroid).map(|(x, c)| (x - c) * (x - c)).sum::<f64>())
            .sum::<f64>()
            / n as f64;
        let scale = if mean_dist2 > 0.0 { mean_dist2.sqrt() } else { 1.0 };
        let scaled = masses
            .iter()
            .map(|m| {
                let total = m.total_weight();
                let pts = m
                    .points
                    .iter()
                    .map(|p| p.iter().zip(&centroid).map(|(x, c)| (x - c) / scale).collect())
                    .collect();
                let ws = m.weights.iter().map(|w| w / total).collect();
                (pts, ws)
            })
            .collect();
        Self {
            d,
            k,
            orthogonal,
            characters: equipartition_characters(l, k),
            masses: scaled,
            eps: default_boundary_eps(masses) / scale,
            centroid,
            scale,
        }
    }

    /// Smoothed objective; writes its gradient with respect to each `(a, b)` into `grad`.
    fn smoothed(&self, x: &[Vec<f64>], tau: f64, grad: &mut [Vec<f64>]) -> f64 {
        let k = self.k;
        let d = self.d;
        grad.iter_mut().for_each(|g| g.iter_mut().for_each(|v| *v = 0.0));
        let norms: Vec<f64> = x.iter().map(|xi| dot(&xi[..d], &xi[..d]).sqrt().max(1e-9)).collect();
        let mut phi = 0.0;
        let mut u = vec![0.0; k];
        let mut sd = vec![0.0; k];
        for (points, weights) in &self.masses {
            let n = points.len();
            let mut us = vec![0.0; n * k];
            let mut sds = vec![0.0; n * k];
            let mut coeffs = vec![0.0; self.characters.len()];
            for (p, pt) in points.iter().enumerate() {
                for i in 0..k {
                    let s = (dot(&x[i][..d], pt) - x[i][d]) / norms[i];
                    sds[p * k + i] = s;
                    us[p * k + i] = (s / (2.0 * tau)).tanh();
                }
                let row = &us[p * k..(p + 1) * k];
                for (c, &h) in coeffs.iter_mut().zip(&self.characters) {
                    *c += weights[p] * product(row, h, usize::MAX);
                }
            }
            phi += coeffs.iter().map(|c| c * c).sum::<f64>();
            for (p, pt) in points.iter().enumerate() {
                u.copy_from_slice(&us[p * k..(p + 1) * k]);
                sd.copy_from_slice(&sds[p * k..(p + 1) * k]);
                for i in 0..k {
                    let mut g = 0.0;
                    for (c, &h) in coeffs.iter().zip(&self.characters) {
                        if h >> i & 1 == 1 {
                            g += 2.0 * c * product(&u, h, i);
                        }
                    }
                    if g == 0.0 {
                        continue;
                    }
                    let dv = weights[p] * g * (1.0 - u[i] * u[i]) / (2.0 * tau);
                    let inv = 1.0 / norms[i];
                    for j in 0..d {
                        grad[i][j] += dv * (pt[j] * inv - sd[i] * x[i][j] * inv * inv);
                    }
                    grad[i][d] -= dv * inv;
                }
            }
        }
        if self.orthogonal {
            for r in 0..k {
                for s in r + 1..k {
                    let nr = norms[r];
                    let ns = norms[s];
                    let cos = dot(&x[r][..d], &x[s][..d]) / (nr * ns);
                    phi += cos * cos;
                    for j in 0..d {
                        grad[r][j] += 2.0 * cos * (x[s][j] / (nr * ns) - cos * x[r][j] / (nr * nr));
                        grad[s][j] += 2.0 * cos * (x[r][j] / (nr * ns) - cos * x[s][j] / (ns * ns));
                    }
                }
            }
        }
        phi
    }

    /// Exact objective with the boundary split rule, in scaled coordinates.
    fn exact(&self, x: &[Vec<f64>]) -> Exact {
        let d = self.d;
        let cell = (1u64 << self.k) as f64;
        let mut phi = 0.0;
        let mut table = vec![0.0; 1 << self.k];
        for (points, weights) in &self.masses {
            table.iter_mut().for_each(|v| *v = 0.0);
            for (pt, &w) in points.iter().zip(weights) {
                let mut base = 0usize;
                let mut split = 0usize;
                for (i, xi) in x.iter().enumerate() {
                    let norm = dot(&xi[..d], &xi[..d]).sqrt();
                    let z = dot(&xi[..d], pt) - xi[d];
                    if z.abs() <= self.eps * norm {
                        split |= 1 << i;
                    } else if z < 0.0 {
                        base |= 1 << i;
                    }
                }
                let share = w / (1u64 << split.count_ones()) as f64;
                let mut sub = split;
                loop {
                    table[base | sub] += share;
                    if sub == 0 {
                        break;
                    }
                    sub = (sub - 1) & split;
                }
            }
            let coeffs = fourier_coefficients(&table).expect("table length is 2^k");
            for &h in &self.characters {
                let rel = coeffs[h] * cell;
                phi += rel * rel;
            }
        }
        if self.orthogonal {
            for r in 0..self.k {
                for s in r + 1..self.k {
                    let cos = dot(&x[r][..d], &x[s][..d])
                        / (dot(&x[r][..d], &x[r][..d]) * dot(&x[s][..d], &x[s][..d])).sqrt();
                    phi += cos * cos;
                }
            }
        }
        Exact { phi }
    }

    fn random_start(&self, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        (0..self.k)
            .map(|_| {
                let normal: Vec<f64> = (0..self.d).map(|_| rng.sample(StandardNormal)).collect();
                let (points, _) = &self.masses[rng.gen_range(0..self.masses.len())];
                let pt = &points[rng.gen_range(0..points.len())];
                let mut xi = normal.clone();
                xi.push(dot(&normal, pt));
                normalize(&mut xi);
                xi
            })
            .collect()
    }

    fn unscale(&self, x: &[Vec<f64>]) -> Result<HyperplaneArrangement> {
        let d = self.d;
        let hs = x
            .iter()
            .map(|xi| {
                let a = xi[..d].to_vec();
                let b = xi[d] * self.scale + dot(&a, &self.centroid);
                Hyperplane::normalized(a, b)
            })
            .collect::<Result<Vec<_>>>()?;
        HyperplaneArrangement::new(hs)
    }
}

/// Product of `u_j` over the bits `j` of `h`, skipping `skip`.
fn product(u: &[f64], h: usize, skip: usize) -> f64 {
    let mut prod = 1.0;
    let mut bits = h;
    while bits != 0 {
        let j = bits.trailing_zeros() as usize;
        if j != skip {
            prod *= u[j];
        }
        bits &= bits - 1;
    }
    prod
}

fn normalize(x: &mut [f64]) {
    let n = dot(x, x).sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

fn run_restart(problem: &Scaled, options: &SolverOptions, restart: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    rng.set_stream(restart as u64);
    let mut x = problem.random_start(&mut rng);
    let k = problem.k;
    let dim = problem.d + 1;
    let schedule = &options.schedule;

    let (beta1, beta2, adam_eps) = (0.9f64, 0.999f64, 1e-12);
    let mut grad = vec![vec![0.0; dim]; k];
    let mut best = x.clone();
    let mut best_exact = problem.exact(&x);
    for stage in 0..schedule.stages {
        let tau = schedule.initial_temperature * schedule.factor.powi(stage as i32);
        let lr = schedule.learning_rate * 0.6f64.powi(stage as i32);
        let mut m = vec![vec![0.0; dim]; k];
        let mut v = vec![vec![0.0; dim]; k];
        for step in 1..=schedule.steps_per_stage {
            problem.smoothed(&x, tau, &mut grad);
            let c1 = 1.0 - beta1.powi(step as i32);
            let c2 = 1.0 - beta2.powi(step as i32);
            for i in 0..k {
                for j in 0..dim {
                    let g = grad[i][j];
                    m[i][j] = beta1 * m[i][j] + (1.0 - beta1) * g;
                    v[i][j] = beta2 * v[i][j] + (1.0 - beta2) * g * g;
                    x[i][j] -= lr * (m[i][j] / c1) / ((v[i][j] / c2).sqrt() + adam_eps);
                }
                normalize(&mut x[i]);
            }
        }
        let e = problem.exact(&x);
        if e.phi <= best_exact.phi {
            best_exact = e;
            best = x.clone();
        }
    }

    let iters = options.polish_iterations;
    let (sigma0, sigma1) = (0.05f64, 1e-4f64);
    let mut x = best;
    let mut current = best_exact;
    for it in 0..iters {
        if current.phi == 0.0 {
            break;
        }
        let sigma = sigma0 * (sigma1 / sigma0).powf(it as f64 / iters as f64);
        let i = rng.gen_range(0..k);
        let mut candidate = x.clone();
        for v in candidate[i].iter_mut() {
            *v += sigma * rng.sample::<f64, _>(StandardNormal);
        }
        normalize(&mut candidate[i]);
        if candidate[i][..problem.d].iter().all(|&v| v == 0.0) {
            continue;
        }
        let e = problem.exact(&candidate);
        if e.phi <= current.phi {
            current = e;
            x = candidate;
        }
    }
    x
}

/// Best-of-restarts local minimiser of the squared test map. Deterministic
/// given `options.seed`; ties go to the lowest restart index.
pub fn solve_arrangement(
    masses: &[WeightedPointCloud],
    k: usize,
    l: usize,
    orthogonal: bool,
    options: &SolverOptions,
) -> Result<Solution> {
    if masses.is_empty() {
        return domain("no masses given");
    }
    if k == 0 || k > MAX_HYPERPLANES {
        return domain(format!("k must be in 1..={MAX_HYPERPLANES}"));
    }
    if l == 0 || l > k {
        return domain(format!("need 1 <= l <= k, got l = {l}, k = {k}"));
    }
    if orthogonal && k < 2 {
        return domain("orthogonality needs at least two hyperplanes");
    }
    let d = masses[0].d;
    if masses.iter().any(|m| m.d != d) {
        return domain("masses live in different dimensions");
    }
    if options.restarts == 0 {
        return domain("at least one restart is needed");
    }
    let problem = Scaled::new(masses, k, l, orthogonal);
    let solutions = (0..options.restarts)
        .into_par_iter()
        .map(|restart| {
            let x = run_restart(&problem, options, restart);
            let arrangement = problem.unscale(&x)?;
            let report = check_equipartition(&arrangement, masses, l, 0.0)?;
            let orthogonality_residual = if orthogonal {
                Some(
                    check_orthogonality(&arrangement, 0.0)?
                        .iter()
                        .map(|p| p.dot.abs())
                        .fold(0.0, f64::max),
                )
            } else {
                None
            };
            Ok(Solution {
                residual: report.max_relative_residual(),
                arrangement,
                orthogonality_residual,
                restart,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = solutions
        .into_iter()
        .reduce(|best, s| if s.score() < best.score() { s } else { best })
        .expect("at least one restart");
    Ok(best)
}
