//! Strong convergence of the stepping scheme on the noisy saddle, against
//! the closed-form solution consuming the same Brownian increments.
//!
//! With additive noise the pathwise terminal error contracts linearly in
//! the step size, so the fitted slope comes out near 1; dropping the noise
//! reproduces the classical Euler order as well.
//!
//! Run with: `cargo run --release --example convergence_study`

use sld::integrator::{closed_form_noisy_saddle, convergence_order};
use sld::systems::SaddleParams;
use sld::wiener::WienerPath;

fn study(label: &str, params: SaddleParams) -> sld::Result<()> {
    let system = params.system();
    let dts: Vec<f64> = (4..10).map(|k| 2.0f64.powi(-k)).collect();
    let oracle = move |path: &WienerPath, x0: &[f64], node: i64| {
        closed_form_noisy_saddle(params, [x0[0], x0[1]], path, node).map(|v| v.to_vec())
    };
    let result = convergence_order(&system, &oracle, &[0.3, -0.2], &dts, 200, 1.0, 11)?;
    println!("{label}:");
    for (dt, err) in result.dts.iter().zip(&result.mean_errors) {
        println!("  dt = {dt:<9.6} mean terminal error = {err:.3e}");
    }
    match result.slope {
        Some(slope) => println!("  fitted log-log slope: {slope:.3}"),
        None => println!("  slope undefined"),
    }
    Ok(())
}

fn main() -> sld::Result<()> {
    study("noisy saddle, additive noise", SaddleParams::new(1.0, 1.0, -1.0, 1.0)?)?;
    study("noise-free saddle (classical Euler)", SaddleParams::new(1.0, 1.0, 0.0, 0.0)?)?;
    Ok(())
}
