//! Descriptor field of the noisy saddle for one noise realization.
//!
//! The singular minima curves of the field trace the stable and unstable
//! manifolds; their intersection marks the stationary orbit, which is also
//! computed independently by quadrature. Writes `out/saddle.sldf` and
//! `out/saddle.ppm`.
//!
//! Run with: `cargo run --release --example saddle_field`

use sld::analysis::{locate_cross, stationary_orbit_estimate};
use sld::descriptor::{msp_field, DescriptorParams, Direction, GridSpec, DEFAULT_ESCAPE_RADIUS};
use sld::gridio::{render_image, save_field, Colormap, Normalization};
use sld::systems::SaddleParams;
use sld::wiener::generate_path;

fn main() -> sld::Result<()> {
    let params = SaddleParams::new(1.0, 1.0, -1.0, 1.0)?;
    let system = params.system();
    let grid = GridSpec { xmin: -2.0, xmax: 2.0, ymin: -2.0, ymax: 2.0, nx: 300, ny: 300 };
    let descriptor = DescriptorParams {
        t0: 0.0,
        tau: 15.0,
        p: 0.1,
        direction: Direction::Both,
        escape_radius: DEFAULT_ESCAPE_RADIUS,
    };
    let dt = 0.05;
    let path = generate_path(7, 0, system.m(), 300, dt)?;

    let field = msp_field(&system, &grid, &descriptor, &path)?;
    let orbit = stationary_orbit_estimate(params, &path)?;
    let (x_star, y_star) = locate_cross(&field)?;

    std::fs::create_dir_all("out")?;
    save_field(&field, "out/saddle.sldf")?;
    render_image(
        &field,
        "out/saddle.ppm",
        Normalization::Percentile(2.0, 98.0),
        Colormap::Viridis,
        [128, 128, 128],
    )?;

    println!("stationary orbit (quadrature): ({:+.4}, {:+.4})", orbit.x_tilde, orbit.y_tilde);
    println!("cross of field minima:         ({x_star:+.4}, {y_star:+.4})");
    println!("cell size: {:.4} x {:.4}", grid.cell_dx(), grid.cell_dy());
    println!("escaped cells: {}", field.escaped_count());
    println!("wrote out/saddle.sldf and out/saddle.ppm");
    Ok(())
}
