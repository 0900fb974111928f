//! Run configurations and the command layer driven by the `sld` binary.
//!
//! A run is described by a single JSON document (reproducible, checked into
//! experiment folders); command-line flags override individual knobs.
//! Summaries go to standard output as `key=value` pairs, progress to
//! standard error, and the thread count never changes numerical output.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::analysis;
use crate::descriptor::{
    ensemble_mean, frobenius_distance, msp_field_with_progress, steps_for, DescriptorParams,
    Direction, GridSpec, ScalarField,
};
use crate::error::{Error, Result};
use crate::gridio;
use crate::integrator::{closed_form_noisy_saddle, convergence_order};
use crate::systems;
use crate::wiener::generate_path;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

fn default_m() -> u32 {
    1
}

fn default_escape() -> f64 {
    crate::descriptor::DEFAULT_ESCAPE_RADIUS
}

/// Full experiment description. Optional fields are only required by the
/// commands that consume them.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub t0: f64,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Ensemble size M.
    #[serde(default = "default_m")]
    pub m: u32,
    #[serde(default)]
    pub direction: Direction,
    #[serde(default = "default_escape")]
    pub escape_radius: f64,
    /// Worker threads; 0 resolves to the machine default. Never affects
    /// numerical output.
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub out_prefix: Option<String>,
    /// Cloud / convergence initial condition.
    #[serde(default)]
    pub x0: Option<[f64; 2]>,
    /// Cloud snapshot times (multiples of dt, sign picks the direction).
    #[serde(default)]
    pub snapshots: Option<Vec<f64>>,
    /// Convergence timesteps, descending.
    #[serde(default)]
    pub dts: Option<Vec<f64>>,
    /// Convergence horizon.
    #[serde(default)]
    pub horizon: Option<f64>,
    /// Cloud / convergence / stationary sample count.
    #[serde(default)]
    pub n_paths: Option<u64>,
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
    let cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    /// Field-by-field constraint checks; every violation names the field.
    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::config("m must be at least 1"));
        }
        if !(self.escape_radius > 0.0) {
            return Err(Error::config(format!(
                "escape_radius must be positive (got {})",
                self.escape_radius
            )));
        }
        if !self.t0.is_finite() {
            return Err(Error::config(format!("t0 must be finite (got {})", self.t0)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::config(format!("dt must be positive and finite (got {dt})")));
            }
        }
        if let Some(p) = self.p {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::config(format!("p must lie in (0, 1] (got {p})")));
            }
        }
        if let (Some(tau), Some(dt)) = (self.tau, self.dt) {
            steps_for(tau, dt)?;
        }
        if let Some(grid) = &self.grid {
            grid.validate()?;
        }
        if let Some(x0) = &self.x0 {
            if x0.iter().any(|v| !v.is_finite()) {
                return Err(Error::config(format!("x0 must be finite (got {x0:?})")));
            }
        }
        if let Some(h) = self.horizon {
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::config(format!("horizon must be positive (got {h})")));
            }
        }
        Ok(())
    }

    fn grid(&self) -> Result<GridSpec> {
        self.grid.ok_or_else(|| Error::config("grid is required for this command"))
    }

    fn tau(&self) -> Result<f64> {
        self.tau.ok_or_else(|| Error::config("tau is required for this command"))
    }

    fn dt(&self) -> Result<f64> {
        self.dt.ok_or_else(|| Error::config("dt is required for this command"))
    }

    fn p(&self) -> Result<f64> {
        self.p.ok_or_else(|| Error::config("p is required for this command"))
    }

    fn x0(&self) -> Result<[f64; 2]> {
        self.x0.ok_or_else(|| Error::config("x0 is required for this command"))
    }

    fn descriptor_params(&self) -> Result<DescriptorParams> {
        Ok(DescriptorParams {
            t0: self.t0,
            tau: self.tau()?,
            p: self.p()?,
            direction: self.direction,
            escape_radius: self.escape_radius,
        })
    }

    fn prefix(&self, fallback: &str) -> String {
        self.out_prefix.clone().unwrap_or_else(|| fallback.to_string())
    }
}

/// Process exit code for an error: 2 config, 3 numeric fault, 4 IO/format.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::Dimension(_)
        | Error::NodeRange { .. }
        | Error::InsufficientPath(_)
        | Error::Degenerate(_) => 2,
        Error::NonFinite { .. } => 3,
        Error::Format(_) | Error::Io(_) => 4,
    }
}

/// Run `f` on a pool of `threads` workers (0 = library default).
pub fn run_with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        Ok(f())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::config(format!("threads: {e}")))?;
        Ok(pool.install(f))
    }
}

fn row_progress(total: u32) -> impl Fn(u32, u32) + Sync {
    let step = (total / 20).max(1);
    move |done, all| {
        if done % step == 0 || done == all {
            eprintln!("rows {done}/{all}");
        }
    }
}

fn ensure_out_dir(out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    Ok(())
}

fn render_default(field: &ScalarField, image: &Path) -> Result<()> {
    gridio::render_image(
        field,
        image,
        gridio::Normalization::default(),
        gridio::Colormap::default(),
        [128, 128, 128],
    )
}

/// Compute and persist a single-realization descriptor field plus its
/// default rendering.
pub fn cmd_field(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    cfg.validate()?;
    let system = systems::from_config(&cfg.system.name, &cfg.system.params)?;
    let grid = cfg.grid()?;
    let params = cfg.descriptor_params()?;
    let dt = cfg.dt()?;
    let n_steps = steps_for(params.tau, dt)?;
    let path = generate_path(cfg.seed, 0, system.m(), n_steps, dt)?;

    let field = run_with_threads(cfg.threads, || {
        msp_field_with_progress(&system, &grid, &params, &path, Some(&row_progress(grid.ny)))
    })??;

    ensure_out_dir(out_dir)?;
    let prefix = cfg.prefix("field");
    let file = out_dir.join(format!("{prefix}.sldf"));
    let image = out_dir.join(format!("{prefix}.ppm"));
    gridio::save_field(&field, &file)?;
    render_default(&field, &image)?;
    let (lo, hi) = field.value_range();
    println!(
        "min={lo} max={hi} escaped={} file={} image={}",
        field.escaped_count(),
        file.display(),
        image.display()
    );
    Ok(())
}

/// Compute an ensemble of fields (path ids `0..m`), persist the pointwise
/// mean, optionally each member and the pairwise Frobenius distances.
pub fn cmd_ensemble(
    cfg: &RunConfig,
    out_dir: &Path,
    keep_members: bool,
    distances: bool,
) -> Result<()> {
    cfg.validate()?;
    let system = systems::from_config(&cfg.system.name, &cfg.system.params)?;
    let grid = cfg.grid()?;
    let params = cfg.descriptor_params()?;
    let dt = cfg.dt()?;
    let n_steps = steps_for(params.tau, dt)?;

    let fields = run_with_threads(cfg.threads, || -> Result<Vec<ScalarField>> {
        let mut fields = Vec::with_capacity(cfg.m as usize);
        for pid in 0..cfg.m as u64 {
            let path = generate_path(cfg.seed, pid, system.m(), n_steps, dt)?;
            fields.push(msp_field_with_progress(&system, &grid, &params, &path, None)?);
            eprintln!("member {}/{}", pid + 1, cfg.m);
        }
        Ok(fields)
    })??;
    let mean = ensemble_mean(&fields)?;

    ensure_out_dir(out_dir)?;
    let prefix = cfg.prefix("ensemble");
    let file = out_dir.join(format!("{prefix}.sldf"));
    let image = out_dir.join(format!("{prefix}.ppm"));
    gridio::save_field(&mean, &file)?;
    render_default(&mean, &image)?;

    if keep_members {
        for (pid, f) in fields.iter().enumerate() {
            gridio::save_field(f, out_dir.join(format!("{prefix}_member_{pid:03}.sldf")))?;
        }
    }
    let mut extra = String::new();
    if distances {
        let mut matrix = Vec::new();
        if fields.len() >= 2 {
            for a in &fields {
                let row: Vec<f64> =
                    fields.iter().map(|b| frobenius_distance(a, b)).collect::<Result<_>>()?;
                matrix.push(row);
            }
        }
        let dist_file = out_dir.join(format!("{prefix}_distances.csv"));
        gridio::write_matrix_csv(&matrix, &dist_file)?;
        extra = format!(" distances={}", dist_file.display());
    }
    let (lo, hi) = mean.value_range();
    println!(
        "min={lo} max={hi} escaped={} m={} file={} image={}{extra}",
        mean.escaped_count(),
        cfg.m,
        file.display(),
        image.display()
    );
    Ok(())
}

/// Evolve one initial condition under many realizations and dump the
/// snapshot states as CSV.
pub fn cmd_cloud(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    cfg.validate()?;
    let system = systems::from_config(&cfg.system.name, &cfg.system.params)?;
    let x0 = cfg.x0()?;
    let tau = cfg.tau()?;
    let dt = cfg.dt()?;
    let n_paths = cfg.n_paths.unwrap_or(5000);

    let nodes: Option<Vec<i64>> = match &cfg.snapshots {
        None => None,
        Some(times) => {
            let mut nodes = Vec::with_capacity(times.len());
            for &t in times {
                let node = (t / dt).round();
                if (node * dt - t).abs() > 1e-9 * t.abs().max(dt) {
                    return Err(Error::config(format!(
                        "snapshots entry {t} is not an integer multiple of dt {dt}"
                    )));
                }
                nodes.push(node as i64);
            }
            Some(nodes)
        }
    };

    let samples = run_with_threads(cfg.threads, || {
        analysis::trajectory_cloud(
            &system,
            &x0,
            cfg.t0,
            tau,
            dt,
            n_paths,
            cfg.seed,
            cfg.direction,
            cfg.escape_radius,
            nodes.as_deref(),
        )
    })??;

    ensure_out_dir(out_dir)?;
    let file = out_dir.join(format!("{}.csv", cfg.prefix("cloud")));
    gridio::write_cloud_csv(&samples, &file)?;
    println!("paths={n_paths} samples={} file={}", samples.len(), file.display());
    Ok(())
}

fn saddle_params_from(cfg: &RunConfig) -> Result<systems::SaddleParams> {
    if cfg.system.name != "noisy_saddle" {
        return Err(Error::config(format!(
            "system.name must be \"noisy_saddle\" for this command (got \"{}\")",
            cfg.system.name
        )));
    }
    // reuse the constructor's defaulting and unknown-key validation
    let sys = systems::from_config(&cfg.system.name, &cfg.system.params)?;
    let get = |key: &str| {
        sys.params()
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
            .expect("noisy saddle always carries its four parameters")
    };
    systems::SaddleParams::new(get("a1"), get("a2"), get("b1"), get("b2"))
}

/// Strong-error study of the stepping scheme against the closed-form
/// reference on shared increments. Writes `(dt, mean_error)` rows and
/// reports the fitted log-log slope.
pub fn cmd_convergence(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    cfg.validate()?;
    let params = saddle_params_from(cfg)?;
    let system = params.system();
    let default_dts: Vec<f64> = (4..10).map(|k| 2.0f64.powi(-k)).collect();
    let dts = cfg.dts.clone().unwrap_or(default_dts);
    let horizon = cfg.horizon.unwrap_or(1.0);
    let n_paths = cfg.n_paths.unwrap_or(200);
    let x0 = cfg.x0.unwrap_or([0.3, -0.2]);

    let oracle = move |path: &crate::wiener::WienerPath, x0: &[f64], node: i64| {
        closed_form_noisy_saddle(params, [x0[0], x0[1]], path, node).map(|v| v.to_vec())
    };
    let study = run_with_threads(cfg.threads, || {
        convergence_order(&system, &oracle, &x0, &dts, n_paths, horizon, cfg.seed)
    })??;

    ensure_out_dir(out_dir)?;
    let file = out_dir.join(format!("{}.csv", cfg.prefix("convergence")));
    let rows: Vec<Vec<f64>> = study
        .dts
        .iter()
        .zip(&study.mean_errors)
        .map(|(&dt, &err)| vec![dt, err])
        .collect();
    gridio::write_matrix_csv(&rows, &file)?;
    match study.slope {
        Some(slope) => println!("slope={slope} levels={} file={}", study.dts.len(), file.display()),
        None => println!("slope=undefined levels={} file={}", study.dts.len(), file.display()),
    }
    Ok(())
}

/// Stationary-orbit statistics over independent realizations, with the
/// per-path estimates written as CSV for overlays.
pub fn cmd_stationary(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    cfg.validate()?;
    let params = saddle_params_from(cfg)?;
    let n_paths = cfg.n_paths.unwrap_or(1000);
    let stats = run_with_threads(cfg.threads, || {
        analysis::stationary_statistics(params, n_paths, cfg.seed)
    })??;

    ensure_out_dir(out_dir)?;
    let file = out_dir.join(format!("{}.csv", cfg.prefix("stationary")));
    gridio::write_orbit_csv(&stats.estimates, &file)?;
    println!(
        "mean_x={} mean_y={} var_x={} var_y={} n_paths={n_paths} file={}",
        stats.mean[0],
        stats.mean[1],
        stats.variance[0],
        stats.variance[1],
        file.display()
    );
    Ok(())
}

/// Re-image an existing field file.
pub fn cmd_render(
    input: &Path,
    out: Option<PathBuf>,
    normalization: gridio::Normalization,
    colormap: gridio::Colormap,
    escaped_color: [u8; 3],
) -> Result<()> {
    let field = gridio::load_field(input)?;
    let out = out.unwrap_or_else(|| input.with_extension("ppm"));
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    gridio::render_image(&field, &out, normalization, colormap, escaped_color)?;
    println!("image={}", out.display());
    Ok(())
}

/// Parse `R,G,B` byte triples for the escaped-cell color flag.
pub fn parse_color(s: &str) -> Result<[u8; 3]> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::config(format!("escaped-color must be R,G,B (got \"{s}\")")));
    }
    let mut out = [0u8; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| Error::config(format!("bad color byte \"{part}\"")))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> serde_json::Value {
        serde_json::json!({
            "system": {"name": "noisy_saddle"},
            "grid": {"xmin": -2.0, "xmax": 2.0, "ymin": -2.0, "ymax": 2.0, "nx": 8, "ny": 8},
            "tau": 1.0,
            "dt": 0.05,
            "p": 0.5,
            "seed": 7
        })
    }

    fn config_from(v: serde_json::Value) -> Result<RunConfig> {
        let cfg: RunConfig =
            serde_json::from_value(v).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[test]
    fn config_defaults_apply() {
        let cfg = config_from(base_config()).unwrap();
        assert_eq!(cfg.m, 1);
        assert_eq!(cfg.direction, Direction::Both);
        assert_eq!(cfg.escape_radius, 1e6);
        assert_eq!(cfg.threads, 0);
        assert_eq!(cfg.t0, 0.0);
    }

    #[test]
    fn validation_names_the_offending_field() {
        let mut v = base_config();
        v["p"] = serde_json::json!(1.5);
        let err = config_from(v).unwrap_err().to_string();
        assert!(err.contains('p') && err.contains("(0, 1]"), "{err}");

        let mut v = base_config();
        v["tau"] = serde_json::json!(0.0);
        let err = config_from(v).unwrap_err().to_string();
        assert!(err.contains("tau"), "{err}");

        let mut v = base_config();
        v["tau"] = serde_json::json!(0.13);
        let err = config_from(v).unwrap_err().to_string();
        assert!(err.contains("tau") && err.contains("dt"), "{err}");

        let mut v = base_config();
        v["escape_radius"] = serde_json::json!(-1.0);
        let err = config_from(v).unwrap_err().to_string();
        assert!(err.contains("escape_radius"), "{err}");

        let mut v = base_config();
        v["grid"]["nx"] = serde_json::json!(1);
        let err = config_from(v).unwrap_err().to_string();
        assert!(err.contains("nx"), "{err}");

        let mut v = base_config();
        v["m"] = serde_json::json!(0);
        let err = config_from(v).unwrap_err().to_string();
        assert!(err.contains('m'), "{err}");

        // unknown keys are rejected by the deserializer
        let mut v = base_config();
        v["grdi"] = serde_json::json!(0);
        assert!(config_from(v).is_err());
    }

    #[test]
    fn exit_codes_map_by_error_class() {
        assert_eq!(exit_code(&Error::config("x")), 2);
        assert_eq!(exit_code(&Error::Dimension("x".into())), 2);
        assert_eq!(exit_code(&Error::NonFinite { node: 3 }), 3);
        assert_eq!(exit_code(&Error::Format("x".into())), 4);
        assert_eq!(
            exit_code(&Error::Io(std::io::Error::new(std::io::ErrorKind::Other, "x"))),
            4
        );
    }

    #[test]
    fn color_parsing() {
        assert_eq!(parse_color("1,2,3").unwrap(), [1, 2, 3]);
        assert_eq!(parse_color("255, 0, 128").unwrap(), [255, 0, 128]);
        assert!(parse_color("1,2").is_err());
        assert!(parse_color("256,0,0").is_err());
    }

    #[test]
    fn field_command_writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config_from(base_config()).unwrap();
        cmd_field(&cfg, dir.path()).unwrap();
        assert!(dir.path().join("field.sldf").exists());
        assert!(dir.path().join("field.ppm").exists());
        let field = gridio::load_field(dir.path().join("field.sldf")).unwrap();
        assert_eq!(field.nx(), 8);
        assert_eq!(field.meta.seed, 7);
    }

    #[test]
    fn ensemble_command_with_members_and_distances() {
        let dir = tempfile::tempdir().unwrap();
        let mut v = base_config();
        v["m"] = serde_json::json!(3);
        v["out_prefix"] = serde_json::json!("mean");
        let cfg = config_from(v).unwrap();
        cmd_ensemble(&cfg, dir.path(), true, true).unwrap();
        assert!(dir.path().join("mean.sldf").exists());
        assert!(dir.path().join("mean_member_002.sldf").exists());
        let text = fs::read_to_string(dir.path().join("mean_distances.csv")).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows.len(), 3);
        // diagonal must be zero
        let first: Vec<f64> =
            rows[0].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(first[0], 0.0);
        assert!(first[1] > 0.0);
    }

    #[test]
    fn cloud_command_requires_x0() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config_from(base_config()).unwrap();
        let err = cmd_cloud(&cfg, dir.path()).unwrap_err().to_string();
        assert!(err.contains("x0"), "{err}");
    }

    #[test]
    fn stationary_rejects_other_systems() {
        let dir = tempfile::tempdir().unwrap();
        let mut v = base_config();
        v["system"]["name"] = serde_json::json!("duffing");
        let cfg = config_from(v).unwrap();
        let err = cmd_stationary(&cfg, dir.path()).unwrap_err().to_string();
        assert!(err.contains("noisy_saddle"), "{err}");
    }
}
