//! Stationary orbit of the noisy saddle: one realization's estimate, the
//! invariance check under path shifts, and ensemble statistics against the
//! analytic mean 0 and variance 1/2.
//!
//! Run with: `cargo run --release --example stationary_orbit`

use sld::analysis::{stationary_orbit_estimate, stationary_statistics};
use sld::integrator::closed_form_noisy_saddle;
use sld::systems::SaddleParams;
use sld::wiener::generate_path;

fn main() -> sld::Result<()> {
    let params = SaddleParams::new(1.0, 1.0, -1.0, 1.0)?;

    let path = generate_path(7, 0, 2, 600, 0.05)?;
    let orbit = stationary_orbit_estimate(params, &path)?;
    println!(
        "single realization: orbit ({:+.4}, {:+.4}), horizon {}, dt {}",
        orbit.x_tilde, orbit.y_tilde, orbit.truncation_horizon, orbit.quadrature_dt
    );

    // the orbit is a random fixed point: evolving it and re-estimating on
    // the shifted realization agree to quadrature accuracy
    let shift = 40i64;
    let evolved = closed_form_noisy_saddle(params, [orbit.x_tilde, orbit.y_tilde], &path, shift)?;
    let re_estimated = stationary_orbit_estimate(params, &path.shift(shift)?)?;
    println!(
        "invariance under a {shift}-node shift: evolved ({:+.6}, {:+.6}) vs re-estimated ({:+.6}, {:+.6})",
        evolved[0], evolved[1], re_estimated.x_tilde, re_estimated.y_tilde
    );

    let stats = stationary_statistics(params, 1000, 2718)?;
    println!("over 1000 realizations (analytic: mean 0, variance 1/2):");
    println!("  mean     ({:+.4}, {:+.4})", stats.mean[0], stats.mean[1]);
    println!("  variance ({:.4}, {:.4})", stats.variance[0], stats.variance[1]);
    Ok(())
}
