//! Two-sided Wiener paths: seeded generation, shifting, Ito quadrature,
//! and the binary dump format. Writes `out/path.sldw` and reloads it.
//!
//! Run with: `cargo run --example wiener_paths`

use std::fs::File;

use sld::wiener::{generate_path, WienerPath};

fn main() -> sld::Result<()> {
    let path = generate_path(42, 0, 2, 400, 0.05)?;
    println!(
        "path: {} components, {} nodes per side, dt {}",
        path.n_components(),
        path.n_steps(),
        path.dt()
    );
    println!("W(0)  = {:+.6} (always zero at the anchor)", path.value_at(0, 0)?);
    println!("W(5)  = {:+.6}", path.value_at(0, 100)?);
    println!("W(-5) = {:+.6}", path.value_at(0, -100)?);

    // left-endpoint Ito integral of e^{-s} against the path
    let q = path.ito_quadrature(0, |s| (-s).exp(), 0, 400)?;
    println!("int_0^20 e^-s dW = {q:+.6}");

    // re-anchoring: node 0 of the shifted view sits at node 100
    let shifted = path.shift(100)?;
    println!(
        "shifted view: {} usable nodes per side, W'(0) = {}",
        shifted.n_steps(),
        shifted.value_at(0, 0)?
    );

    std::fs::create_dir_all("out")?;
    path.dump(File::create("out/path.sldw")?)?;
    let reloaded = WienerPath::load(File::open("out/path.sldw")?)?;
    assert_eq!(reloaded.value_at(0, 100)?, path.value_at(0, 100)?);
    println!("dumped and reloaded out/path.sldw bit-exactly");
    Ok(())
}
