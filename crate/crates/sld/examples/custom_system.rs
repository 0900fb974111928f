//! Descriptor field for a user-defined SDE.
//!
//! Any drift/diffusion pair can be wrapped in an `SdeSystem`; here a
//! noisy pendulum with weak damping, `d theta = v dt`,
//! `dv = (-sin theta - 0.1 v) dt + 0.2 dW`. The separatrix structure of
//! the pendulum shows up as singular curves of the field. Writes
//! `out/pendulum.{sldf,ppm}`.
//!
//! Run with: `cargo run --release --example custom_system`

use sld::descriptor::{msp_field, DescriptorParams, Direction, GridSpec, DEFAULT_ESCAPE_RADIUS};
use sld::gridio::{export_csv, render_image, save_field, Colormap, Normalization};
use sld::systems::SdeSystem;
use sld::wiener::generate_path;

fn main() -> sld::Result<()> {
    let damping = 0.1;
    let noise = 0.2;
    let system = SdeSystem::new(
        "noisy_pendulum",
        2,
        1,
        vec![("damping".into(), damping), ("noise".into(), noise)],
        move |x, _t, out| {
            out[0] = x[1];
            out[1] = -x[0].sin() - damping * x[1];
        },
        move |_x, _t, out| {
            out[0] = 0.0;
            out[1] = noise;
        },
    );

    let grid = GridSpec {
        xmin: -std::f64::consts::PI,
        xmax: std::f64::consts::PI,
        ymin: -2.5,
        ymax: 2.5,
        nx: 220,
        ny: 220,
    };
    let descriptor = DescriptorParams {
        t0: 0.0,
        tau: 12.0,
        p: 0.5,
        direction: Direction::Both,
        escape_radius: DEFAULT_ESCAPE_RADIUS,
    };
    let path = generate_path(5, 0, system.m(), 240, 0.05)?;
    let field = msp_field(&system, &grid, &descriptor, &path)?;

    std::fs::create_dir_all("out")?;
    save_field(&field, "out/pendulum.sldf")?;
    export_csv(&field, "out/pendulum.csv")?;
    render_image(
        &field,
        "out/pendulum.ppm",
        Normalization::Percentile(2.0, 98.0),
        Colormap::Viridis,
        [128, 128, 128],
    )?;
    let (lo, hi) = field.value_range();
    println!("field range [{lo:.2}, {hi:.2}], escaped {}", field.escaped_count());
    println!("wrote out/pendulum.sldf, out/pendulum.csv, out/pendulum.ppm");
    Ok(())
}
