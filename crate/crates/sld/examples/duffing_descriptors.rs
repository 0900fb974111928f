//! Stochastically forced Duffing oscillator: three descriptor fields under
//! distinct noise realizations, next to the deterministic descriptor of
//! the periodically forced oscillator. Writes `out/duffing_w{1,2,3}.ppm`
//! and `out/duffing_deterministic.ppm`.
//!
//! Run with: `cargo run --release --example duffing_descriptors`

use sld::descriptor::{
    mp_deterministic_field, msp_field, DescriptorParams, Direction, GridSpec,
    DEFAULT_ESCAPE_RADIUS,
};
use sld::gridio::{render_image, save_field, Colormap, Normalization};
use sld::systems::{duffing_deterministic, duffing_stochastic};
use sld::wiener::generate_path;

fn main() -> sld::Result<()> {
    let system = duffing_stochastic(1.0, 1.0, -1.0, 0.25);
    let grid = GridSpec { xmin: -2.0, xmax: 2.0, ymin: -2.0, ymax: 2.0, nx: 250, ny: 250 };
    let descriptor = DescriptorParams {
        t0: 0.0,
        tau: 15.0,
        p: 0.5,
        direction: Direction::Both,
        escape_radius: DEFAULT_ESCAPE_RADIUS,
    };
    let dt = 0.05;
    std::fs::create_dir_all("out")?;

    for experiment in 1..=3u64 {
        let path = generate_path(100, experiment, system.m(), 300, dt)?;
        let field = msp_field(&system, &grid, &descriptor, &path)?;
        let stem = format!("out/duffing_w{experiment}");
        save_field(&field, format!("{stem}.sldf"))?;
        render_image(
            &field,
            format!("{stem}.ppm"),
            Normalization::Percentile(2.0, 98.0),
            Colormap::Viridis,
            [128, 128, 128],
        )?;
        let (lo, hi) = field.value_range();
        println!(
            "experiment {experiment}: range [{lo:.2}, {hi:.2}], escaped {}",
            field.escaped_count()
        );
    }

    // deterministic counterpart with periodic forcing, p = 0.75
    let deterministic = duffing_deterministic(1.0, 1.0, -1.0, 0.25);
    let field = mp_deterministic_field(&deterministic, &grid, 0.0, 15.0, 0.75, dt)?;
    save_field(&field, "out/duffing_deterministic.sldf")?;
    render_image(
        &field,
        "out/duffing_deterministic.ppm",
        Normalization::Percentile(2.0, 98.0),
        Colormap::Viridis,
        [128, 128, 128],
    )?;
    let (lo, hi) = field.value_range();
    println!(
        "deterministic: range [{lo:.2}, {hi:.2}], escaped {}",
        field.escaped_count()
    );
    println!("wrote out/duffing_w{{1,2,3}}.ppm and out/duffing_deterministic.ppm");
    Ok(())
}
