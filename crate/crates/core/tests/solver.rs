use std::time::Instant;

use makeev_core::equipart::{
    check_equipartition, check_orthogonality, solve_arrangement, SolverOptions, WeightedPointCloud,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian_cloud(rng: &mut ChaCha8Rng, n: usize, d: usize, shift: &[f64]) -> WeightedPointCloud {
    let pts = (0..n)
        .map(|_| (0..d).map(|j| rng.sample::<f64, _>(StandardNormal) + shift[j]).collect())
        .collect();
    WeightedPointCloud::unweighted(d, pts).unwrap()
}

/// Whether some line bisects both clouds with no point on it: for each
/// direction the open gap between the two middle projections of each cloud
/// must overlap.
fn ham_sandwich_line_exists(a: &WeightedPointCloud, b: &WeightedPointCloud) -> bool {
    let gap = |c: &WeightedPointCloud, theta: f64| {
        let mut proj: Vec<f64> = c
            .points()
            .iter()
            .map(|p| p[0] * theta.cos() + p[1] * theta.sin())
            .collect();
        proj.sort_by(f64::total_cmp);
        let h = proj.len() / 2;
        (proj[h - 1], proj[h])
    };
    (0..20000).any(|i| {
        let theta = std::f64::consts::PI * i as f64 / 20000.0;
        let (a0, a1) = gap(a, theta);
        let (b0, b1) = gap(b, theta);
        a0.max(b0) < a1.min(b1)
    })
}

#[test]
fn ham_sandwich_two_clouds() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let a = gaussian_cloud(&mut rng, 50, 2, &[-1.0, 0.5]);
    let b = gaussian_cloud(&mut rng, 50, 2, &[1.5, -0.5]);
    assert!(ham_sandwich_line_exists(&a, &b));
    let start = Instant::now();
    let options = SolverOptions { restarts: 20, seed: 42, ..SolverOptions::default() };
    let sol = solve_arrangement(&[a.clone(), b.clone()], 1, 1, false, &options).unwrap();
    eprintln!("ham sandwich residual {} in {:?}", sol.residual, start.elapsed());
    assert!(sol.residual <= 0.01);
    let report = check_equipartition(&sol.arrangement, &[a, b], 1, 0.01).unwrap();
    assert!(report.all_pass());
}

#[test]
fn one_mass_four_quadrants_in_the_plane() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mass = gaussian_cloud(&mut rng, 200, 2, &[0.0, 0.0]);
    let start = Instant::now();
    let options = SolverOptions { restarts: 20, seed: 42, ..SolverOptions::default() };
    let sol = solve_arrangement(&[mass], 2, 2, false, &options).unwrap();
    eprintln!("(2,2,2) residual {} in {:?}", sol.residual, start.elapsed());
    assert!(sol.residual <= 0.02);
}

#[test]
fn one_mass_any_two_of_three_in_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mass = gaussian_cloud(&mut rng, 200, 3, &[0.0, 0.0, 0.0]);
    let start = Instant::now();
    let options = SolverOptions { restarts: 20, seed: 42, ..SolverOptions::default() };
    let sol = solve_arrangement(&[mass], 3, 2, false, &options).unwrap();
    eprintln!("(3,2,3) residual {} in {:?}", sol.residual, start.elapsed());
    assert!(sol.residual <= 0.05);
}

#[test]
fn orthogonal_pair_in_the_plane() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mass = gaussian_cloud(&mut rng, 120, 2, &[0.0, 0.0]);
    let options = SolverOptions { restarts: 8, seed: 3, ..SolverOptions::default() };
    let sol = solve_arrangement(&[mass], 2, 1, true, &options).unwrap();
    eprintln!("orthogonal residual {} / {:?}", sol.residual, sol.orthogonality_residual);
    assert!(sol.residual <= 0.02);
    let pairs = check_orthogonality(&sol.arrangement, 1e-3).unwrap();
    assert!(pairs.iter().all(|p| p.orthogonal));
}
