//! Lyapunov spectrum of the diagonal linear cocycle diag(e^{a1 t}, e^{-a2 t}),
//! the linearization of the noisy saddle about its stationary orbit.
//!
//! Run with: `cargo run --example lyapunov_diagonal`

use sld::analysis::lyapunov_spectrum_diagonal;

fn main() {
    for (a1, a2) in [(1.0, 1.0), (2.0, 3.0), (0.5, 1.25)] {
        let spectrum = lyapunov_spectrum_diagonal(a1, a2);
        let rendered: Vec<String> = spectrum
            .exponents
            .iter()
            .map(|(l, d)| format!("{l:+.12} (multiplicity {d})"))
            .collect();
        println!(
            "a1 = {a1}, a2 = {a2}: exponents [{}], hyperbolic: {}",
            rendered.join(", "),
            spectrum.is_hyperbolic()
        );
    }
}
