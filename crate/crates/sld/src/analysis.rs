//! Structure extraction and verification: stationary-orbit estimates and
//! statistics, manifold-cross localization, singularity masks, trajectory
//! clouds, and the Lyapunov spectrum of the diagonal linear cocycle.

use rayon::prelude::*;

use crate::descriptor::{steps_for, Direction, ScalarField};
use crate::error::{Error, Result};
use crate::integrator::integrate_directed;
use crate::stats;
use crate::systems::{SaddleParams, SdeSystem};
use crate::wiener::{generate_path, WienerPath};

/// Truncated quadrature estimate of the noisy saddle's random fixed point
/// for one realization.
#[derive(Debug, Clone, Copy)]
pub struct StationaryOrbitEstimate {
    pub x_tilde: f64,
    pub y_tilde: f64,
    pub truncation_horizon: f64,
    pub quadrature_dt: f64,
    pub path_id: u64,
}

/// `x_tilde = -int_0^T e^{-a1 s} b1 dW1`, `y_tilde = int_{-T}^0 e^{a2 s} b2 dW2`,
/// both as left-endpoint sums over the path's full usable range. The path
/// must be long enough that the dropped tail `e^{-min(a1,a2) T}` is below
/// 1e-6.
pub fn stationary_orbit_estimate(
    params: SaddleParams,
    path: &WienerPath,
) -> Result<StationaryOrbitEstimate> {
    if path.n_components() < 2 {
        return Err(Error::Dimension(format!(
            "stationary orbit estimate needs 2 noise components, path has {}",
            path.n_components()
        )));
    }
    let n = path.n_steps() as i64;
    let horizon = n as f64 * path.dt();
    let a_min = params.a1.min(params.a2);
    if (-a_min * horizon).exp() >= 1e-6 {
        return Err(Error::InsufficientPath(format!(
            "truncation tail e^(-{a_min} * {horizon}) is not below 1e-6; extend the path"
        )));
    }
    let SaddleParams { a1, a2, b1, b2 } = params;
    let x_tilde = -path.ito_quadrature(0, |s| (-a1 * s).exp() * b1, 0, n)?;
    let y_tilde = path.ito_quadrature(1, |s| (a2 * s).exp() * b2, -n, 0)?;
    Ok(StationaryOrbitEstimate {
        x_tilde,
        y_tilde,
        truncation_horizon: horizon,
        quadrature_dt: path.dt(),
        path_id: path.path_id(),
    })
}

/// Per-component sample mean and unbiased sample variance of the orbit
/// estimate over independent realizations.
#[derive(Debug, Clone)]
pub struct StationaryStatistics {
    pub mean: [f64; 2],
    pub variance: [f64; 2],
    pub estimates: Vec<StationaryOrbitEstimate>,
}

/// Draw `n_paths` independent realizations and reduce the per-path orbit
/// estimates. Quadrature runs on an internal grid with `dt = 0.01` and a
/// horizon sized so the truncation tail is below 1e-7.
pub fn stationary_statistics(
    params: SaddleParams,
    n_paths: u64,
    seed: u64,
) -> Result<StationaryStatistics> {
    if n_paths < 2 {
        return Err(Error::config("stationary_statistics needs n_paths >= 2"));
    }
    let dt = 0.01;
    let a_min = params.a1.min(params.a2);
    let horizon = (1e7f64).ln() / a_min;
    let n_steps = (horizon / dt).ceil() as usize;

    let estimates: Vec<StationaryOrbitEstimate> = (0..n_paths)
        .into_par_iter()
        .map(|pid| {
            let path = generate_path(seed, pid, 2, n_steps, dt)?;
            stationary_orbit_estimate(params, &path)
        })
        .collect::<Result<_>>()?;

    let xs: Vec<f64> = estimates.iter().map(|e| e.x_tilde).collect();
    let ys: Vec<f64> = estimates.iter().map(|e| e.y_tilde).collect();
    Ok(StationaryStatistics {
        mean: [stats::mean(&xs), stats::mean(&ys)],
        variance: [stats::sample_variance(&xs), stats::sample_variance(&ys)],
        estimates,
    })
}

/// Estimated intersection of the two singular minima curves of a
/// saddle-type descriptor field: the median over rows of each row's
/// argmin-column coordinate, and the median over columns of each column's
/// argmin-row coordinate. Medians keep speckle from the p < 1 roughness
/// from dragging the estimate.
pub fn locate_cross(field: &ScalarField) -> Result<(f64, f64)> {
    let (lo, hi) = field.value_range();
    if !(hi > lo) {
        return Err(Error::Degenerate("locate_cross needs a non-constant field".into()));
    }
    let grid = field.grid();
    let mut row_mins = Vec::with_capacity(grid.ny as usize);
    for i in 0..grid.ny {
        let mut best = 0u32;
        for j in 1..grid.nx {
            if field.value(i, j) < field.value(i, best) {
                best = j;
            }
        }
        row_mins.push(grid.x_coord(best));
    }
    let mut col_mins = Vec::with_capacity(grid.nx as usize);
    for j in 0..grid.nx {
        let mut best = 0u32;
        for i in 1..grid.ny {
            if field.value(i, j) < field.value(best, j) {
                best = i;
            }
        }
        col_mins.push(grid.y_coord(best));
    }
    Ok((stats::median(&row_mins), stats::median(&col_mins)))
}

/// Boolean cell mask aligned with a field's grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMask {
    ny: u32,
    nx: u32,
    cells: Vec<bool>,
}

impl GridMask {
    pub fn new(ny: u32, nx: u32, cells: Vec<bool>) -> Result<Self> {
        if cells.len() != ny as usize * nx as usize {
            return Err(Error::Dimension(format!(
                "mask length {} does not match {ny}x{nx}",
                cells.len()
            )));
        }
        Ok(GridMask { ny, nx, cells })
    }

    pub fn shape(&self) -> (u32, u32) {
        (self.ny, self.nx)
    }

    pub fn get(&self, i: u32, j: u32) -> bool {
        self.cells[i as usize * self.nx as usize + j as usize]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }

    /// Set cells as `(row, col)` pairs, row-major order.
    pub fn set_cells(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for i in 0..self.ny {
            for j in 0..self.nx {
                if self.get(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Cells whose central-difference gradient magnitude exceeds the given
/// percentile of all interior magnitudes. Border cells are never set.
pub fn singularity_map(field: &ScalarField, percentile: f64) -> Result<GridMask> {
    if !(percentile > 0.0 && percentile < 100.0) {
        return Err(Error::config(format!(
            "percentile must lie in (0, 100) (got {percentile})"
        )));
    }
    let grid = field.grid();
    if grid.nx < 3 || grid.ny < 3 {
        return Err(Error::Degenerate(format!(
            "singularity_map needs at least a 3x3 field (got {}x{})",
            grid.ny, grid.nx
        )));
    }
    let inv2dx = 1.0 / (2.0 * grid.cell_dx());
    let inv2dy = 1.0 / (2.0 * grid.cell_dy());
    let mut magnitudes = Vec::with_capacity((grid.ny as usize - 2) * (grid.nx as usize - 2));
    for i in 1..grid.ny - 1 {
        for j in 1..grid.nx - 1 {
            let gx = (field.value(i, j + 1) - field.value(i, j - 1)) * inv2dx;
            let gy = (field.value(i + 1, j) - field.value(i - 1, j)) * inv2dy;
            magnitudes.push((gx * gx + gy * gy).sqrt());
        }
    }
    let threshold = stats::percentile_sorted(&stats::sorted(&magnitudes), percentile);
    let mut cells = vec![false; grid.len()];
    let mut k = 0;
    for i in 1..grid.ny - 1 {
        for j in 1..grid.nx - 1 {
            if magnitudes[k] > threshold {
                cells[i as usize * grid.nx as usize + j as usize] = true;
            }
            k += 1;
        }
    }
    Ok(GridMask { ny: grid.ny, nx: grid.nx, cells })
}

/// 8-connected components of a mask, each a list of `(row, col)` cells.
pub fn connected_components(mask: &GridMask) -> Vec<Vec<(u32, u32)>> {
    let (ny, nx) = (mask.ny as i64, mask.nx as i64);
    let mut visited = vec![false; mask.cells.len()];
    let mut components = Vec::new();
    for start in 0..mask.cells.len() {
        if !mask.cells[start] || visited[start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut queue = vec![start];
        visited[start] = true;
        while let Some(idx) = queue.pop() {
            let i = (idx / nx as usize) as i64;
            let j = (idx % nx as usize) as i64;
            comp.push((i as u32, j as u32));
            for di in -1..=1i64 {
                for dj in -1..=1i64 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ni, nj) = (i + di, j + dj);
                    if ni < 0 || nj < 0 || ni >= ny || nj >= nx {
                        continue;
                    }
                    let nidx = (ni * nx + nj) as usize;
                    if mask.cells[nidx] && !visited[nidx] {
                        visited[nidx] = true;
                        queue.push(nidx);
                    }
                }
            }
        }
        components.push(comp);
    }
    components
}

/// Box-filter smoothing with a clamped window of half-width `radius`.
/// The escape mask is carried through unchanged.
pub fn smooth_box(field: &ScalarField, radius: u32) -> ScalarField {
    let grid = *field.grid();
    let r = radius as i64;
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.ny as i64 {
        for j in 0..grid.nx as i64 {
            let mut acc = 0.0;
            let mut count = 0.0;
            for wi in (i - r).max(0)..=(i + r).min(grid.ny as i64 - 1) {
                for wj in (j - r).max(0)..=(j + r).min(grid.nx as i64 - 1) {
                    acc += field.value(wi as u32, wj as u32);
                    count += 1.0;
                }
            }
            values.push(acc / count);
        }
    }
    ScalarField::from_parts(grid, field.meta.clone(), values, field.escape_mask().to_vec())
        .expect("smoothing preserves the shape")
}

/// Interior strict local minima (8-neighborhood) at least `margin` cells
/// from the border, sorted ascending by value.
pub fn local_minima(field: &ScalarField, margin: u32) -> Vec<(u32, u32, f64)> {
    let grid = field.grid();
    let m = margin.max(1);
    let mut out = Vec::new();
    if grid.ny < 2 * m + 1 || grid.nx < 2 * m + 1 {
        return out;
    }
    for i in m..grid.ny - m {
        for j in m..grid.nx - m {
            let v = field.value(i, j);
            let mut is_min = true;
            'scan: for di in -1..=1i64 {
                for dj in -1..=1i64 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let ni = (i as i64 + di) as u32;
                    let nj = (j as i64 + dj) as u32;
                    if field.value(ni, nj) <= v {
                        is_min = false;
                        break 'scan;
                    }
                }
            }
            if is_min {
                out.push((i, j, v));
            }
        }
    }
    out.sort_by(|a, b| a.2.total_cmp(&b.2));
    out
}

/// One recorded cloud state: where path `path_id` sits at time `t`.
#[derive(Debug, Clone)]
pub struct CloudSample {
    pub path_id: u64,
    pub t: f64,
    pub state: Vec<f64>,
    pub escaped: bool,
}

/// Evolve one initial condition under `n_paths` independent realizations
/// and record the states at the requested snapshot nodes (defaulting to
/// the window endpoints of the chosen direction). States frozen at the
/// escape radius are reported with their flag set.
#[allow(clippy::too_many_arguments)]
pub fn trajectory_cloud(
    system: &SdeSystem,
    x0: &[f64],
    t0: f64,
    tau: f64,
    dt: f64,
    n_paths: u64,
    seed: u64,
    direction: Direction,
    escape_radius: f64,
    snapshot_nodes: Option<&[i64]>,
) -> Result<Vec<CloudSample>> {
    if n_paths == 0 {
        return Err(Error::config("n_paths must be at least 1"));
    }
    let n = steps_for(tau, dt)? as i64;
    let default_nodes = match direction {
        Direction::Forward => vec![n],
        Direction::Backward => vec![-n],
        Direction::Both => vec![-n, n],
    };
    let nodes: Vec<i64> = snapshot_nodes.map(|s| s.to_vec()).unwrap_or(default_nodes);
    for &node in &nodes {
        if node.abs() > n {
            return Err(Error::NodeRange { node, max: n });
        }
        if node < 0 && !direction.includes_backward() {
            return Err(Error::config(format!(
                "snapshot node {node} needs backward integration but direction is forward"
            )));
        }
        if node > 0 && !direction.includes_forward() {
            return Err(Error::config(format!(
                "snapshot node {node} needs forward integration but direction is backward"
            )));
        }
    }
    let n_back = if direction.includes_backward() { n as usize } else { 0 };
    let n_fwd = if direction.includes_forward() { n as usize } else { 0 };

    let per_path: Vec<Vec<CloudSample>> = (0..n_paths)
        .into_par_iter()
        .map(|pid| -> Result<Vec<CloudSample>> {
            let path = generate_path(seed, pid, system.m(), n as usize, dt)?;
            let traj = integrate_directed(system, x0, t0, &path, n_back, n_fwd, escape_radius)?;
            Ok(nodes
                .iter()
                .map(|&node| CloudSample {
                    path_id: pid,
                    t: traj.time(node),
                    state: traj.state(node).to_vec(),
                    escaped: traj.escaped_by(node),
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    Ok(per_path.into_iter().flatten().collect())
}

/// Lyapunov exponents with multiplicities, sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovSpectrum {
    pub exponents: Vec<(f64, u32)>,
}

impl LyapunovSpectrum {
    /// Hyperbolic means no vanishing exponent.
    pub fn is_hyperbolic(&self) -> bool {
        self.exponents.iter().all(|&(l, _)| l != 0.0)
    }

    pub fn dimension(&self) -> u32 {
        self.exponents.iter().map(|&(_, d)| d).sum()
    }
}

/// Spectrum of the diagonal linear cocycle `Phi(t) = diag(e^{a1 t}, e^{-a2 t})`
/// (the noisy saddle's linearization), computed numerically as
/// `(1 / 2t) ln eig(Phi(t)^T Phi(t))` at `t = 50`. Exponents closer than
/// 1e-12 merge into one entry with summed multiplicity.
pub fn lyapunov_spectrum_diagonal(a1: f64, a2: f64) -> LyapunovSpectrum {
    let t = 50.0;
    // Phi^T Phi is diagonal, so its eigenvalues are the squared entries.
    let eig1 = (a1 * t).exp().powi(2);
    let eig2 = (-a2 * t).exp().powi(2);
    let mut lams = [eig1.ln() / (2.0 * t), eig2.ln() / (2.0 * t)];
    lams.sort_by(|a, b| b.total_cmp(a));
    let mut exponents: Vec<(f64, u32)> = Vec::new();
    for l in lams {
        match exponents.last_mut() {
            Some((prev, mult)) if (*prev - l).abs() <= 1e-12 => *mult += 1,
            _ => exponents.push((l, 1)),
        }
    }
    LyapunovSpectrum { exponents }
}
