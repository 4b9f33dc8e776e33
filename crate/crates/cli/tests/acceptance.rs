//! One line per acceptance criterion, each at its stated tolerance and time
//! budget. Exits 0 after reporting; set `MAKEEV_ACCEPTANCE_STRICT=1` to exit 1
//! when any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use makeev_core::bounds::{appendix_upper, makeev_lower, mlz_upper, ramos_lower, theorem_upper};
use makeev_core::certify::{CertificateStatus, Engine, SearchPolicy, TheoremPreset};
use makeev_core::equipart::{
    character, check_equipartition, equipartition_characters, fourier_coefficients, region_masses,
    solve_arrangement, Hyperplane, HyperplaneArrangement, SolverOptions, WeightedPointCloud,
};
use makeev_core::gf2poly::{DegreeCaps, TruncatedPolynomial};
use makeev_core::repbuild::{
    all_pairs, closed_p2k, closed_p33, closed_p34, equip_poly, ortho_poly, r_poly, Block, RepresentationSpec,
};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn vars(k: usize) -> Vec<usize> {
    (0..k).collect()
}

fn caps(k: usize, e: usize) -> DegreeCaps {
    DegreeCaps::new(vec![e; k]).unwrap()
}

fn identities() -> Check {
    let c = caps(4, 8);
    ensure(equip_poly(3, &vars(4), &c).map_err(err)? == closed_p34(&c).map_err(err)?, || {
        "p_{3,4} differs from its closed form".into()
    })?;
    let mut terms = vec![vec![1, 1, 1, 1]];
    for (i, j) in (0..4).cartesian_product(0..4).filter(|(i, j)| i != j) {
        let mut e = vec![0; 4];
        e[i] = 3;
        e[j] = 1;
        terms.push(e);
    }
    let r3 = TruncatedPolynomial::from_terms(&c, terms).map_err(err)?;
    ensure(r_poly(3, &vars(4), &c).map_err(err)? == r3, || "r_{3,4} closed form".into())?;
    for k in 2..=6 {
        let c = caps(k, k + 1);
        ensure(equip_poly(2, &vars(k), &c).map_err(err)? == closed_p2k(k, &c).map_err(err)?, || {
            format!("p_{{2,{k}}} closed form")
        })?;
        let c = caps(k, k);
        ensure(
            ortho_poly(&all_pairs(k), &c).map_err(err)? == r_poly(2, &vars(k), &c).map_err(err)?,
            || format!("orthogonality polynomial for k={k}"),
        )?;
    }
    let c = caps(3, 5);
    ensure(equip_poly(3, &vars(3), &c).map_err(err)? == closed_p33(&c).map_err(err)?, || {
        "p_{3,3} closed form".into()
    })?;
    Ok("all closed forms agree".into())
}

fn certify_all(engine: &Engine, presets: &[(TheoremPreset, usize)], per_item: Option<Duration>) -> Check {
    let mut slowest = Duration::ZERO;
    for (preset, d) in presets {
        let start = Instant::now();
        let r = engine.certify_preset(preset).map_err(err)?;
        let took = start.elapsed();
        slowest = slowest.max(took);
        ensure(r.status == CertificateStatus::Certified && r.d == *d, || {
            format!("{preset}: {} at d={} (expected Certified at d={d})", r.status, r.d)
        })?;
        if let Some(limit) = per_item {
            ensure(took <= limit, || format!("{preset} took {took:?} > {limit:?}"))?;
        }
    }
    Ok(format!("{} certificates, slowest {slowest:.2?}", presets.len()))
}

fn grid_l2(engine: &Engine) -> Check {
    let mut presets = Vec::new();
    for k in 2..=5usize {
        for q in 0..=2u32 {
            for t in 1..=(1u64 << q) {
                let d = (1usize << q) * (k + 1) - t as usize;
                presets.push((TheoremPreset::Thm31 { k, q, t }, d));
                if q >= 1 && t >= 2 {
                    presets.push((TheoremPreset::Thm32 { k, q, t }, d));
                }
            }
        }
    }
    certify_all(engine, &presets, Some(Duration::from_secs(30)))
}

fn grid_l3(engine: &Engine) -> Check {
    let mut presets = Vec::new();
    for q in 0..=3u32 {
        for t in 1..=(1u64 << q) {
            let d = 7 * (1usize << q) - 2 * t as usize;
            presets.push((TheoremPreset::Thm41 { q, t }, d));
            if q >= 1 && t >= 2 {
                presets.push((TheoremPreset::Thm42 { q, t }, d));
            }
        }
    }
    let mut failures = Vec::new();
    let main = certify_all(engine, &presets, None);
    if let Err(e) = &main {
        failures.push(e.clone());
    }
    for q in 0..=3u32 {
        let d = 7 * (1usize << q) - 4;
        if let Err(e) = certify_all(engine, &[(TheoremPreset::Prop43 { q }, d)], None) {
            failures.push(e);
        }
    }
    if failures.is_empty() {
        Ok(format!("{} + 4 certificates", presets.len()))
    } else {
        Err(failures.join("; "))
    }
}

fn appendix(engine: &Engine) -> Check {
    certify_all(engine, &[(TheoremPreset::Prop61a, 7), (TheoremPreset::Prop61b, 9)], None)
}

fn transversal(engine: &Engine) -> Check {
    let mut n = 0;
    let a_cases = [(2usize, 0u32, 1u64, 3usize), (3, 0, 1, 3), (3, 1, 1, 2), (3, 1, 2, 2)];
    let b_cases = [(0u32, 1u64, 2usize), (1, 2, 1)];
    let mut presets: Vec<TheoremPreset> = Vec::new();
    for (k, q, t, dmax) in a_cases {
        presets.extend((1..=dmax).map(|d| TheoremPreset::Prop54a { k, q, t, d }));
    }
    for (q, t, dmax) in b_cases {
        presets.extend((1..=dmax).map(|d| TheoremPreset::Prop54b { q, t, d }));
    }
    for p in presets {
        let r = engine.certify_preset(&p).map_err(err)?;
        ensure(r.is_certified(), || format!("{p}: {}", r.status))?;
        n += 1;
    }
    Ok(format!("{n} certificates"))
}

fn negative_controls(engine: &Engine) -> Check {
    let spec = RepresentationSpec::new(3, vec![Block::equip(2, vars(3), 1)]).map_err(err)?;
    let r = engine.certify_full_monomial(&spec, 2).map_err(err)?;
    ensure(r.status == CertificateStatus::NotCertified, || {
        format!("Equip(2,{{1,2,3}}) at d=2 gave {}", r.status)
    })?;
    ensure(!engine.bk_nonmembership(1, 2, 3, 2, false).map_err(err)?, || {
        "bk_nonmembership(1,2,3,2) is true".into()
    })?;
    let out = Command::new(env!("CARGO_BIN_EXE_makeev"))
        .args(["search", "--m", "1", "--l", "2", "--k", "3", "--dmax", "2"])
        .env_remove("MAKEEV_CELL_LIMIT")
        .output()
        .map_err(err)?;
    ensure(out.status.code() == Some(1), || format!("search below the bound exited {:?}", out.status))?;
    let outcome = engine
        .minimal_certified_d(1, 3, 4, SearchPolicy::Paper, 4)
        .map_err(err)?;
    ensure(outcome.found.is_none(), || "search found a certificate below 5".into())?;
    let mismatches = [
        (RepresentationSpec::new(3, vec![Block::equip(2, vars(3), 1)]).map_err(err)?, 3),
        (RepresentationSpec::new(4, vec![Block::equip(3, vars(4), 1)]).map_err(err)?, 4),
        (RepresentationSpec::new(2, vec![Block::ortho(vec![(0, 1)], 3)]).map_err(err)?, 1),
    ];
    for (spec, d) in mismatches {
        let r = engine.certify_full_monomial(&spec, d).map_err(err)?;
        ensure(r.status == CertificateStatus::DimensionMismatch, || {
            format!("{spec} at d={d} gave {}", r.status)
        })?;
    }
    Ok("all controls rejected".into())
}

fn bounds_table() -> Check {
    let eq = |what: &str, got: Option<u64>, want: u64| {
        ensure(got == Some(want), || format!("{what} = {got:?}, expected {want}"))
    };
    eq("ramos(3,4)", Some(ramos_lower(3, 4)), 12)?;
    eq("mlz(3,4)", mlz_upper(3, 4).ok(), 17)?;
    eq("mlz(3,3)", mlz_upper(3, 3).ok(), 9)?;
    eq("lower(3;3/4)", makeev_lower(3, 3, 4, false).ok(), 11)?;
    eq("upper(3;3/4)", theorem_upper(3, 3, 4, false), 12)?;
    for q in 0..=3u32 {
        let p = 1u64 << q;
        for (l, k, lo, hi) in [(2, 3, 4 * p - 2, 4 * p - 1), (3, 4, 7 * p - 3, 7 * p - 2)] {
            let m = 2 * p - 1;
            eq(&format!("lower({m};{l}/{k})"), makeev_lower(m, l, k, false).ok(), lo)?;
            eq(&format!("upper({m};{l}/{k})"), theorem_upper(m, l, k, false), hi)?;
        }
        if q >= 1 {
            for (l, k, lo, hi) in [(2, 3, 4 * p - 3, 4 * p - 2), (3, 4, 7 * p - 5, 7 * p - 4)] {
                let m = 2 * p - 2;
                eq(&format!("lower⊥({m};{l}/{k})"), makeev_lower(m, l, k, true).ok(), lo)?;
                eq(&format!("upper⊥({m};{l}/{k})"), theorem_upper(m, l, k, true), hi)?;
            }
        }
    }
    for (k, lo, hi) in [(4, 5, 7), (5, 7, 9)] {
        eq(&format!("lower⊥(1;3/{k})"), makeev_lower(1, 3, k, true).ok(), lo)?;
        eq(&format!("appendix(1;3/{k})"), appendix_upper(1, 3, k), hi)?;
    }
    // The lower bound is defined for l >= 2, so the comparison starts at k = 2.
    for m in 1..=8u64 {
        for k in 2..=6u32 {
            eq(&format!("lower({m};{k}/{k})"), makeev_lower(m, k, k, false).ok(), ramos_lower(m, k))?;
        }
    }
    Ok("all quoted numbers match".into())
}

fn random_poly(rng: &mut ChaCha8Rng, c: &DegreeCaps) -> TruncatedPolynomial {
    let density = rng.gen_range(0.05..0.7);
    let terms: Vec<Vec<usize>> = c
        .caps()
        .iter()
        .map(|&e| 0..e)
        .multi_cartesian_product()
        .filter(|_| rng.gen_bool(density))
        .collect();
    TruncatedPolynomial::from_terms(c, terms).unwrap()
}

fn random_caps(rng: &mut ChaCha8Rng) -> DegreeCaps {
    let k = rng.gen_range(1..=3);
    DegreeCaps::new((0..k).map(|_| rng.gen_range(1..=6)).collect()).unwrap()
}

fn ring_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..200 {
        let c = random_caps(&mut rng);
        let (p, q) = (random_poly(&mut rng, &c), random_poly(&mut rng, &c));
        ensure(p.mul(&q).map_err(err)? == p.mul_naive(&q).map_err(err)?, || format!("mul pair {i}"))?;
    }
    for i in 0..100 {
        let c = random_caps(&mut rng);
        let p = random_poly(&mut rng, &c);
        let mut acc = TruncatedPolynomial::one(&c);
        for e in 0..=8u64 {
            ensure(p.pow(e) == acc, || format!("pow case {i}, exponent {e}"))?;
            acc = acc.mul_naive(&p).map_err(err)?;
        }
    }
    for i in 0..1000 {
        let c = random_caps(&mut rng);
        let [p, q, r] = [0; 3].map(|_| random_poly(&mut rng, &c));
        let one = TruncatedPolynomial::one(&c);
        let ok = p.mul(&q).map_err(err)? == q.mul(&p).map_err(err)?
            && p.mul(&q).map_err(err)?.mul(&r).map_err(err)? == p.mul(&q.mul(&r).map_err(err)?).map_err(err)?
            && p.mul(&q.add(&r).map_err(err)?).map_err(err)?
                == p.mul(&q).map_err(err)?.add(&p.mul(&r).map_err(err)?).map_err(err)?
            && p.mul(&one).map_err(err)? == p
            && p.add(&p).map_err(err)?.is_zero()
            && p.square() == p.mul(&p).map_err(err)?;
        ensure(ok, || format!("ring law case {i}"))?;
    }
    Ok("200 products, 900 powers, 1000 ring-law cases".into())
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn point_in_region(arr: &HyperplaneArrangement, g: usize) -> Vec<f64> {
    let (k, d) = (arr.k(), arr.d());
    let a = DMatrix::from_fn(k, d, |i, j| arr.hyperplanes()[i].normal()[j]);
    let rhs = DVector::from_fn(k, |i, _| {
        arr.hyperplanes()[i].offset() + if g >> i & 1 == 1 { -1.0 } else { 1.0 }
    });
    let y = (&a * a.transpose()).lu().solve(&rhs).expect("general position");
    (a.transpose() * y).iter().copied().collect()
}

fn subset_brute_force(arr: &HyperplaneArrangement, mass: &WeightedPointCloud, l: usize, tol: f64) -> bool {
    let total = mass.total_weight();
    (0..arr.k()).combinations(l).all(|subset| {
        let mut parts = vec![0.0; 1 << l];
        for (p, &w) in mass.points().iter().zip(mass.weights()) {
            let cell = subset
                .iter()
                .enumerate()
                .filter(|&(_, &i)| arr.hyperplanes()[i].signed_value(p) < 0.0)
                .fold(0usize, |acc, (bit, _)| acc | 1 << bit);
            parts[cell] += w;
        }
        let target = total / (1 << l) as f64;
        parts.iter().all(|&x| (x - target).abs() <= tol * target)
    })
}

fn fourier_side() -> Check {
    const TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..100 {
        let k = rng.gen_range(1..=4usize);
        let l = rng.gen_range(1..=k);
        let d = k + rng.gen_range(0..2);
        let arr = HyperplaneArrangement::new(
            (0..k)
                .map(|_| Hyperplane::normalized(gaussian(&mut rng, d), rng.gen_range(-0.5..0.5)).unwrap())
                .collect(),
        )
        .map_err(err)?;
        let n = 1usize << k;
        let mut c = vec![0.0; n];
        c[0] = 1.0;
        for (h, ch) in c.iter_mut().enumerate().skip(1) {
            if h.count_ones() as usize > l {
                *ch = rng.gen_range(-2i32..=2) as f64 / 64.0;
            }
        }
        let chars = equipartition_characters(l, k);
        if trial % 2 == 1 {
            c[chars[rng.gen_range(0..chars.len())]] += 1.0 / 16.0;
        }
        let weights: Vec<f64> = (0..n)
            .map(|g| (0..n).map(|h| c[h] * character(h, g) as f64).sum())
            .collect();
        let points = (0..n).map(|g| point_in_region(&arr, g)).collect();
        let mass = WeightedPointCloud::new(d, points, weights).map_err(err)?;
        let report = check_equipartition(&arr, std::slice::from_ref(&mass), l, TOL).map_err(err)?;
        let brute = subset_brute_force(&arr, &mass, l, TOL);
        ensure(report.all_pass() == brute && brute == (trial % 2 == 0), || {
            format!("instance {trial}: Fourier {} vs subsets {brute}", report.all_pass())
        })?;

        let table = &report.masses[0].region_masses;
        ensure(table.iter().sum::<f64>() == mass.total_weight(), || {
            format!("instance {trial}: mass not conserved")
        })?;
        let i = rng.gen_range(0..k);
        let flipped = region_masses(&arr.flip(i), &mass, report.boundary_eps).map_err(err)?;
        let fc = fourier_coefficients(&flipped).map_err(err)?;
        for g in 0..n {
            let sign = if g >> i & 1 == 1 { -1.0 } else { 1.0 };
            ensure(
                flipped[g] == table[g ^ (1 << i)]
                    && (fc[g] - sign * report.masses[0].coefficients[g]).abs() <= 1e-12,
                || format!("instance {trial}: flip equivariance"),
            )?;
        }

        let q = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal)).qr().q();
        let v: Vec<f64> = gaussian(&mut rng, d).iter().map(|x| 10.0 * x).collect();
        let moved_arr = HyperplaneArrangement::new(
            arr.hyperplanes()
                .iter()
                .map(|h| {
                    let a: Vec<f64> = (&q * DVector::from_column_slice(h.normal())).iter().copied().collect();
                    let b = h.offset() + a.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>();
                    Hyperplane::normalized(a, b).unwrap()
                })
                .collect(),
        )
        .map_err(err)?;
        let moved_points = mass
            .points()
            .iter()
            .map(|p| {
                (&q * DVector::from_column_slice(p))
                    .iter()
                    .zip(&v)
                    .map(|(x, y)| x + y)
                    .collect()
            })
            .collect();
        let moved = WeightedPointCloud::new(d, moved_points, mass.weights().to_vec()).map_err(err)?;
        let after = check_equipartition(&moved_arr, &[moved], l, TOL).map_err(err)?;
        ensure(
            after.all_pass() == report.all_pass()
                && after.masses[0]
                    .region_masses
                    .iter()
                    .zip(table)
                    .all(|(x, y)| (x - y).abs() <= 1e-12),
            || format!("instance {trial}: rigid motion changed the verdict"),
        )?;
    }
    Ok("100 instances agree; equivariance, invariance, conservation hold".into())
}

fn gaussian_cloud(rng: &mut ChaCha8Rng, n: usize, d: usize, shift: &[f64]) -> WeightedPointCloud {
    let pts = (0..n)
        .map(|_| (0..d).map(|j| rng.sample::<f64, _>(StandardNormal) + shift[j]).collect())
        .collect();
    WeightedPointCloud::unweighted(d, pts).unwrap()
}

fn solver() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let options = SolverOptions {
        restarts: 20,
        seed: 42,
        ..SolverOptions::default()
    };
    let mut notes = Vec::new();
    let a = gaussian_cloud(&mut rng, 50, 2, &[-1.0, 0.5]);
    let b = gaussian_cloud(&mut rng, 50, 2, &[1.5, -0.5]);
    let one2 = gaussian_cloud(&mut rng, 200, 2, &[0.0, 0.0]);
    let one3 = gaussian_cloud(&mut rng, 200, 3, &[0.0, 0.0, 0.0]);
    let cases = [
        ("ham sandwich", vec![a, b], 1, 1, 0.01, 60),
        ("(2,2,2)", vec![one2], 2, 2, 0.02, 300),
        ("(3,2,3)", vec![one3], 3, 2, 0.05, 300),
    ];
    for (name, masses, k, l, tol, secs) in cases {
        let start = Instant::now();
        let sol = solve_arrangement(&masses, k, l, false, &options).map_err(err)?;
        let took = start.elapsed();
        let report = check_equipartition(&sol.arrangement, &masses, l, tol).map_err(err)?;
        ensure(sol.residual <= tol && report.all_pass(), || {
            format!("{name}: residual {:.3e} > {tol}", sol.residual)
        })?;
        ensure(took <= Duration::from_secs(secs), || format!("{name}: {took:?} > {secs} s"))?;
        notes.push(format!("{name} {:.1e} in {took:.1?}", sol.residual));
    }
    Ok(notes.join(", "))
}

fn main() -> ExitCode {
    let engine = Engine::default();
    type Criterion<'a> = (&'a str, u64, Box<dyn Fn() -> Check + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("closed-form identities", 1, Box::new(identities)),
        ("l=2 certificate grid", 600, Box::new(|| grid_l2(&engine))),
        ("l=3, k=4 certificate grid", 300, Box::new(|| grid_l3(&engine))),
        ("orthogonal single-mass certificates", 10, Box::new(|| appendix(&engine))),
        ("transversal certificates", 60, Box::new(|| transversal(&engine))),
        ("negative controls", 60, Box::new(|| negative_controls(&engine))),
        ("bounds table", 1, Box::new(bounds_table)),
        ("ring oracles and laws", 120, Box::new(ring_oracles)),
        ("Fourier verdicts", 60, Box::new(fourier_side)),
        ("numerical solver", 660, Box::new(solver)),
    ];
    let mut passed = 0;
    for (n, (name, secs, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if took <= Duration::from_secs(*secs) {
                Ok(detail)
            } else {
                Err(format!("took {took:.2?}, budget {secs} s"))
            }
        });
        match outcome {
            Ok(detail) => {
                passed += 1;
                println!("PASS  {:>2}  {name} [{took:.2?}]: {detail}", n + 1);
            }
            Err(why) => println!("FAIL  {:>2}  {name} [{took:.2?}]: {why}", n + 1),
        }
    }
    println!("{passed}/{} criteria pass", criteria.len());
    let strict = std::env::var("MAKEEV_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && passed < criteria.len() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
