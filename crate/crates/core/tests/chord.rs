use proxsup::phantoms::disk;
use proxsup::projector::{build_system, forward_project, Ray};
use proxsup::{BoxBounds, Grid};

#[test]
fn disk_projection_matches_chord_lengths() {
    let grid = Grid::new(512, 512).unwrap();
    let r = 0.8;
    let image = disk(grid, r);
    let mut rays = Vec::new();
    for angle in [0.0, 17.0, 45.0, 90.0, 133.0] {
        for k in -18..=18 {
            rays.push(Ray::from_degrees(angle, 0.9 * r * k as f64 / 18.0));
        }
    }
    let system = build_system(&rays, grid, BoxBounds::default()).unwrap();
    let b = forward_project(&system, &image).unwrap();
    for (ray, value) in rays.iter().zip(b) {
        let exact = 2.0 * (r * r - ray.offset * ray.offset).sqrt();
        assert!(
            (value - exact).abs() <= 0.02 * exact,
            "angle {} offset {}: {value} vs {exact}",
            ray.angle,
            ray.offset
        );
    }
}
