use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use proxsup::driver::{parse_history_csv, run_unperturbed, write_history_csv};
use proxsup::feasibility::art_sweep;
use proxsup::phantoms::shepp_logan;
use proxsup::projector::{build_system, forward_project, ParallelGeometry};
use proxsup::{superiorize, BoxBounds, Grid, Image, Perturber, ProjectionSystem, SparseRow, SuperConfig, Termination};

fn random_system(seed: u64, m: usize, rows: usize, cols: usize) -> ProjectionSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = Grid::new(rows, cols).unwrap();
    let sparse: Vec<SparseRow> = (0..m)
        .map(|_| {
            let idx: Vec<usize> = (0..grid.len()).filter(|_| rng.random_bool(0.5)).collect();
            let w = idx.iter().map(|_| rng.random_range(0.2..1.5)).collect();
            SparseRow::new(idx, w).unwrap()
        })
        .collect();
    let b = (0..m).map(|_| rng.random_range(0.0..2.0)).collect();
    ProjectionSystem::new(grid, sparse, b, BoxBounds::default()).unwrap()
}

fn shepp_logan_system(size: usize, views: usize, rays: usize) -> (ProjectionSystem, Image) {
    let truth = shepp_logan(size, size).unwrap();
    let rays = ParallelGeometry::half_turn(views, rays).rays().unwrap();
    let system = build_system(&rays, truth.grid(), BoxBounds::default()).unwrap();
    let b = forward_project(&system, &truth).unwrap();
    (system.with_measurements(b).unwrap(), truth)
}

#[test]
fn tiny_beta_tracks_plain_art() {
    let system = random_system(3, 10, 2, 3);
    let x0 = Image::zeros(system.grid());
    let mut config = SuperConfig::new(Perturber::ProxL2, 0.0, 5);
    config.beta0 = 1e-15;
    let run = superiorize(&system, &x0, &config, None).unwrap();

    let mut art = x0.clone();
    for _ in 0..run.iterations {
        art = art_sweep(&art, &system).unwrap();
    }
    assert!(run.iterations >= 1);
    assert!(run.image.distance(&art) <= 1e-9, "{}", run.image.distance(&art));
}

#[test]
fn tv_prox_run_reaches_threshold() {
    let (system, truth) = shepp_logan_system(32, 20, 65);
    let config = SuperConfig::new(Perturber::prox_tv_default(), 1e-3, 2000);
    let run = superiorize(&system, &Image::zeros(system.grid()), &config, Some(&truth)).unwrap();
    assert_eq!(run.termination, Termination::ResThreshold);
    assert!(run.final_res < 1e-3);
    let mut previous = run.initial_res;
    for r in &run.records {
        assert!(r.res < previous, "k={}: {} !< {}", r.k, r.res, previous);
        previous = r.res;
    }
}

#[test]
fn run_invariants() {
    let (system, truth) = shepp_logan_system(24, 12, 41);
    let bounds = system.bounds();
    for perturber in [
        Perturber::prox_tv_default(),
        Perturber::classic_default(),
        Perturber::ProxL1,
        Perturber::ProxL2,
        Perturber::ProxL0,
    ] {
        let config = SuperConfig::new(perturber, 1e-4, 60);
        let run = superiorize(&system, &Image::zeros(system.grid()), &config, Some(&truth)).unwrap();
        assert!(!run.records.is_empty());
        let perturbed: Vec<_> = run.records.iter().filter(|r| !r.is_fallback()).collect();
        for pair in perturbed.windows(2) {
            assert!(pair[1].beta_used <= pair[0].beta_used);
        }
        for r in &run.records {
            assert!(r.mse.is_some());
            assert!(r.res < r.res_before);
            if !r.is_fallback() {
                assert!(r.objective_y <= r.objective_x);
            }
        }
        let bound = run.subgradient_bound() * config.beta0 / (1.0 - config.gamma) + 1e-9;
        assert!(run.total_perturbation() <= bound, "{perturber}");
        assert!(run.image.as_slice().iter().all(|&v| bounds.contains(v)));
        assert!(run.iterations <= 60);
    }
}

#[test]
fn unperturbed_run_and_history_round_trip() {
    let (system, truth) = shepp_logan_system(16, 8, 23);
    let run = run_unperturbed(&system, &Image::zeros(system.grid()), 0.0, 7, Some(&truth)).unwrap();
    assert!(run.records.iter().all(|r| r.beta_used == 0.0 && r.perturb_norm == 0.0));
    let mut csv = Vec::new();
    write_history_csv(&run.records, &mut csv).unwrap();
    let rows = parse_history_csv(std::str::from_utf8(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), run.records.len());
    for (row, rec) in rows.iter().zip(&run.records) {
        assert_eq!(row.res, rec.res);
        assert_eq!(row.mse, rec.mse);
    }
}
