//! Field persistence and rendering: the `SLDF` binary grid format, CSV
//! export, and PPM heatmap images.
//!
//! PPM (P6) was picked over PNG so rendered goldens stay byte-exact without
//! a codec dependency; `magick out.ppm out.png` converts when needed.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::analysis::CloudSample;
use crate::descriptor::{Direction, FieldMeta, GridSpec, ScalarField};
use crate::error::{Error, Result};
use crate::stats;
use crate::wiener::{read_f64, read_u32, read_u64};

const FIELD_MAGIC: &[u8; 4] = b"SLDF";
const FIELD_VERSION: u32 = 1;

/// Serialize a field: header, row-major little-endian f64 values, then the
/// escape mask as packed bits (LSB first).
pub fn write_field(field: &ScalarField, mut w: impl Write) -> Result<()> {
    let grid = field.grid();
    let meta = &field.meta;
    w.write_all(FIELD_MAGIC)?;
    w.write_all(&FIELD_VERSION.to_le_bytes())?;
    w.write_all(&grid.nx.to_le_bytes())?;
    w.write_all(&grid.ny.to_le_bytes())?;
    for v in [grid.xmin, grid.xmax, grid.ymin, grid.ymax, meta.p, meta.tau, meta.dt, meta.t0] {
        w.write_all(&v.to_le_bytes())?;
    }
    write_string(&mut w, &meta.system)?;
    w.write_all(&(meta.params.len() as u32).to_le_bytes())?;
    for (name, value) in &meta.params {
        write_string(&mut w, name)?;
        w.write_all(&value.to_le_bytes())?;
    }
    w.write_all(&meta.seed.to_le_bytes())?;
    w.write_all(&meta.path_id.to_le_bytes())?;
    w.write_all(&meta.ensemble_m.to_le_bytes())?;
    w.write_all(&[meta.direction.code()])?;
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    for chunk in field.escape_mask().chunks(8) {
        let mut byte = 0u8;
        for (bit, &set) in chunk.iter().enumerate() {
            if set {
                byte |= 1 << bit;
            }
        }
        w.write_all(&[byte])?;
    }
    Ok(())
}

pub fn read_field(mut r: impl Read) -> Result<ScalarField> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Format("truncated file: missing magic".into()))?;
    if &magic != FIELD_MAGIC {
        return Err(Error::Format("bad magic: not an SLDF field file".into()));
    }
    let version = read_u32(&mut r, "version")?;
    if version != FIELD_VERSION {
        return Err(Error::Format(format!(
            "unsupported field file version {version} (expected {FIELD_VERSION})"
        )));
    }
    let nx = read_u32(&mut r, "header")?;
    let ny = read_u32(&mut r, "header")?;
    let xmin = read_f64(&mut r, "header")?;
    let xmax = read_f64(&mut r, "header")?;
    let ymin = read_f64(&mut r, "header")?;
    let ymax = read_f64(&mut r, "header")?;
    let p = read_f64(&mut r, "header")?;
    let tau = read_f64(&mut r, "header")?;
    let dt = read_f64(&mut r, "header")?;
    let t0 = read_f64(&mut r, "header")?;
    let system = read_string(&mut r, "system name")?;
    let n_params = read_u32(&mut r, "params")?;
    let mut params = Vec::with_capacity(n_params as usize);
    for _ in 0..n_params {
        let name = read_string(&mut r, "params")?;
        let value = read_f64(&mut r, "params")?;
        params.push((name, value));
    }
    let seed = read_u64(&mut r, "header")?;
    let path_id = read_u64(&mut r, "header")?;
    let ensemble_m = read_u32(&mut r, "header")?;
    let mut dir = [0u8; 1];
    r.read_exact(&mut dir)
        .map_err(|_| Error::Format("truncated file: missing direction".into()))?;
    let direction = Direction::from_code(dir[0])?;

    let grid = GridSpec { xmin, xmax, ymin, ymax, nx, ny };
    let count = grid.len();
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        values.push(read_f64(&mut r, "values")?);
    }
    let mut escaped = Vec::with_capacity(count);
    let mut byte = [0u8; 1];
    for start in (0..count).step_by(8) {
        r.read_exact(&mut byte)
            .map_err(|_| Error::Format("truncated file: missing escape mask".into()))?;
        for bit in 0..8.min(count - start) {
            escaped.push(byte[0] & (1 << bit) != 0);
        }
    }
    let meta =
        FieldMeta { p, tau, dt, t0, system, params, seed, path_id, ensemble_m, direction };
    ScalarField::from_parts(grid, meta, values, escaped)
}

pub fn save_field(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field(field, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_field(path: impl AsRef<Path>) -> Result<ScalarField> {
    read_field(File::open(path)?)
}

fn write_string(w: &mut impl Write, s: &str) -> Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn read_string(r: &mut impl Read, section: &str) -> Result<String> {
    let len = read_u32(r, section)? as usize;
    if len > 1 << 20 {
        return Err(Error::Format(format!("unreasonable {section} length {len}")));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)
        .map_err(|_| Error::Format(format!("truncated file: missing {section}")))?;
    String::from_utf8(buf).map_err(|_| Error::Format(format!("{section} is not valid UTF-8")))
}

/// How raw values map onto the unit interval before the colormap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    MinMax,
    /// Clip at the given lower/upper percentiles of the non-escaped values.
    /// Saddle-type fields have heavy upper tails that wash out min/max
    /// scaling, so `Percentile(2, 98)` is the usual choice.
    Percentile(f64, f64),
}

impl Default for Normalization {
    fn default() -> Self {
        Normalization::Percentile(2.0, 98.0)
    }
}

impl FromStr for Normalization {
    type Err = Error;

    /// `minmax` or `percentile:LO,HI`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "minmax" {
            return Ok(Normalization::MinMax);
        }
        if let Some(rest) = s.strip_prefix("percentile:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() == 2 {
                let lo: f64 = parts[0]
                    .trim()
                    .parse()
                    .map_err(|_| Error::config(format!("bad percentile {}", parts[0])))?;
                let hi: f64 = parts[1]
                    .trim()
                    .parse()
                    .map_err(|_| Error::config(format!("bad percentile {}", parts[1])))?;
                if !(0.0..=100.0).contains(&lo) || !(0.0..=100.0).contains(&hi) || lo >= hi {
                    return Err(Error::config(format!(
                        "percentiles must satisfy 0 <= lo < hi <= 100 (got {lo}, {hi})"
                    )));
                }
                return Ok(Normalization::Percentile(lo, hi));
            }
        }
        Err(Error::config(format!(
            "normalization must be \"minmax\" or \"percentile:LO,HI\" (got \"{s}\")"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Colormap {
    Gray,
    #[default]
    Viridis,
}

impl FromStr for Colormap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gray" | "grey" => Ok(Colormap::Gray),
            "viridis" => Ok(Colormap::Viridis),
            other => Err(Error::config(format!(
                "colormap must be \"gray\" or \"viridis\" (got \"{other}\")"
            ))),
        }
    }
}

/// Anchor points of a viridis-style gradient, interpolated to 256 entries.
const VIRIDIS_ANCHORS: [[u8; 3]; 9] = [
    [68, 1, 84],
    [72, 33, 115],
    [59, 82, 139],
    [44, 113, 142],
    [33, 145, 140],
    [39, 173, 129],
    [92, 200, 99],
    [170, 220, 50],
    [253, 231, 37],
];

impl Colormap {
    pub fn table(self) -> [[u8; 3]; 256] {
        let mut table = [[0u8; 3]; 256];
        match self {
            Colormap::Gray => {
                for (k, entry) in table.iter_mut().enumerate() {
                    *entry = [k as u8; 3];
                }
            }
            Colormap::Viridis => {
                let segments = VIRIDIS_ANCHORS.len() - 1;
                for (k, entry) in table.iter_mut().enumerate() {
                    let pos = k as f64 / 255.0 * segments as f64;
                    let seg = (pos.floor() as usize).min(segments - 1);
                    let frac = pos - seg as f64;
                    for c in 0..3 {
                        let a = VIRIDIS_ANCHORS[seg][c] as f64;
                        let b = VIRIDIS_ANCHORS[seg + 1][c] as f64;
                        entry[c] = (a + frac * (b - a)).round() as u8;
                    }
                }
            }
        }
        table
    }
}

/// Render a field as a binary PPM (P6), one pixel per cell, image row 0 at
/// `ymax`. Escaped cells are painted `escaped_color`; a degenerate value
/// range falls back to uniform mid-scale.
pub fn render_image(
    field: &ScalarField,
    out: impl AsRef<Path>,
    normalization: Normalization,
    colormap: Colormap,
    escaped_color: [u8; 3],
) -> Result<()> {
    let grid = field.grid();
    let table = colormap.table();

    let kept: Vec<f64> = field
        .values()
        .iter()
        .zip(field.escape_mask())
        .filter(|&(_, &esc)| !esc)
        .map(|(v, _)| *v)
        .collect();
    let bounds = if kept.is_empty() {
        None
    } else {
        let (lo, hi) = match normalization {
            Normalization::MinMax => {
                let sorted = stats::sorted(&kept);
                (sorted[0], sorted[sorted.len() - 1])
            }
            Normalization::Percentile(lo_q, hi_q) => {
                let sorted = stats::sorted(&kept);
                (
                    stats::percentile_sorted(&sorted, lo_q),
                    stats::percentile_sorted(&sorted, hi_q),
                )
            }
        };
        (hi > lo).then_some((lo, hi))
    };

    let mut w = BufWriter::new(File::create(out)?);
    write!(w, "P6\n{} {}\n255\n", grid.nx, grid.ny)?;
    for i in (0..grid.ny).rev() {
        for j in 0..grid.nx {
            let pixel = if field.is_escaped(i, j) {
                escaped_color
            } else {
                let u = match bounds {
                    Some((lo, hi)) => ((field.value(i, j) - lo) / (hi - lo)).clamp(0.0, 1.0),
                    None => 0.5,
                };
                table[(u * 255.0).round() as usize]
            };
            w.write_all(&pixel)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `x,y,value,escaped` rows in row-major order (row 0 at `ymin`), full
/// double precision.
pub fn export_csv(field: &ScalarField, out: impl AsRef<Path>) -> Result<()> {
    let grid = field.grid();
    let mut w = BufWriter::new(File::create(out)?);
    writeln!(w, "x,y,value,escaped")?;
    for i in 0..grid.ny {
        let y = grid.y_coord(i);
        for j in 0..grid.nx {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{}",
                grid.x_coord(j),
                y,
                field.value(i, j),
                u8::from(field.is_escaped(i, j))
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `path_id,t,x,y,escaped` rows; cloud states must be two-dimensional.
pub fn write_cloud_csv(samples: &[CloudSample], out: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(out)?);
    writeln!(w, "path_id,t,x,y,escaped")?;
    for s in samples {
        if s.state.len() != 2 {
            return Err(Error::Dimension(format!(
                "cloud CSV expects 2-dimensional states (got {})",
                s.state.len()
            )));
        }
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.16e},{}",
            s.path_id,
            s.t,
            s.state[0],
            s.state[1],
            u8::from(s.escaped)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Square matrix as CSV, full precision, no header.
pub fn write_matrix_csv(matrix: &[Vec<f64>], out: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(out)?);
    for row in matrix {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// `path_id,x_tilde,y_tilde` rows for overlaying orbit estimates on
/// rendered fields.
pub fn write_orbit_csv(
    estimates: &[crate::analysis::StationaryOrbitEstimate],
    out: impl AsRef<Path>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(out)?);
    writeln!(w, "path_id,x_tilde,y_tilde")?;
    for e in estimates {
        writeln!(w, "{},{:.16e},{:.16e}", e.path_id, e.x_tilde, e.y_tilde)?;
    }
    w.flush()?;
    Ok(())
}
