//! Trajectory clouds in the stochastic double gyre.
//!
//! A point inside a gyre stays trapped for moderate windows and spreads
//! only slowly (snapshots at several times), while a point on the gyre
//! boundary shoots along the unstable manifold forward in time and along
//! the stable manifold backward in time. Writes `out/cloud_center.csv` and
//! `out/cloud_boundary_{fwd,bwd}.csv`.
//!
//! Run with: `cargo run --release --example trajectory_clouds`

use std::f64::consts::PI;

use sld::analysis::trajectory_cloud;
use sld::descriptor::{Direction, DEFAULT_ESCAPE_RADIUS};
use sld::gridio::write_cloud_csv;
use sld::systems::double_gyre_stochastic;

fn main() -> sld::Result<()> {
    let system = double_gyre_stochastic(0.25, 2.0 * PI, 0.0, 0.0, 1.0, 0.1, 0.25)?;
    let dt = 0.05;
    let n_paths = 5000;
    std::fs::create_dir_all("out")?;

    // gyre-interior point, snapshots at +-5, +-10, +-15 time units
    let snapshots: Vec<i64> = [-15.0f64, -10.0, -5.0, 5.0, 10.0, 15.0]
        .iter()
        .map(|t| (t / dt).round() as i64)
        .collect();
    let center = trajectory_cloud(
        &system,
        &[0.5, 0.425],
        0.0,
        15.0,
        dt,
        n_paths,
        2024,
        Direction::Both,
        DEFAULT_ESCAPE_RADIUS,
        Some(&snapshots),
    )?;
    write_cloud_csv(&center, "out/cloud_center.csv")?;
    println!("gyre-interior cloud: {} samples -> out/cloud_center.csv", center.len());

    // gyre-boundary point, terminal states forward and backward
    for (label, direction) in [("fwd", Direction::Forward), ("bwd", Direction::Backward)] {
        let cloud = trajectory_cloud(
            &system,
            &[1.0, 0.5],
            0.0,
            15.0,
            dt,
            n_paths,
            2024,
            direction,
            DEFAULT_ESCAPE_RADIUS,
            None,
        )?;
        let spread_x: f64 = {
            let xs: Vec<f64> = cloud.iter().map(|s| s.state[0]).collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64).sqrt()
        };
        write_cloud_csv(&cloud, format!("out/cloud_boundary_{label}.csv"))?;
        println!(
            "boundary cloud {label}: {} terminals, x-spread {spread_x:.3} -> out/cloud_boundary_{label}.csv",
            cloud.len()
        );
    }
    Ok(())
}
