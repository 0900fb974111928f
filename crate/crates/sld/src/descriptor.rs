//! The stochastic Lagrangian descriptor: p-power increment sums of
//! discretized trajectories, evaluated at points and over grids of initial
//! conditions, together with ensemble means and the Frobenius similarity
//! metric.
//!
//! The `p`-"norm" here is the power sum without the outer root,
//! `sum_c |dx_c|^p` with `p` in `(0, 1]`, which is what makes stable and
//! unstable manifolds show up as singular minima curves.

use std::sync::atomic::{AtomicU32, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::integrate_directed;
use crate::systems::{DeterministicField, SdeSystem};
use crate::wiener::{generate_path, WienerPath};

/// Default freeze threshold for runaway trajectories.
pub const DEFAULT_ESCAPE_RADIUS: f64 = 1e6;

/// Which half of the window `[t0 - tau, t0 + tau]` contributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
    #[default]
    Both,
}

impl Direction {
    pub fn includes_forward(self) -> bool {
        matches!(self, Direction::Forward | Direction::Both)
    }

    pub fn includes_backward(self) -> bool {
        matches!(self, Direction::Backward | Direction::Both)
    }

    pub fn code(self) -> u8 {
        match self {
            Direction::Forward => 0,
            Direction::Backward => 1,
            Direction::Both => 2,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Direction::Forward),
            1 => Ok(Direction::Backward),
            2 => Ok(Direction::Both),
            other => Err(Error::Format(format!("unknown direction code {other}"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
            Direction::Both => "both",
        }
    }
}

/// Rectangular grid of initial conditions. Row `i` maps to
/// `y = ymin + i (ymax - ymin) / (ny - 1)`, column `j` likewise in `x`;
/// corner nodes carry the bounds exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub nx: u32,
    pub ny: u32,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("grid.xmin", self.xmin),
            ("grid.xmax", self.xmax),
            ("grid.ymin", self.ymin),
            ("grid.ymax", self.ymax),
        ] {
            if !v.is_finite() {
                return Err(Error::config(format!("{name} must be finite (got {v})")));
            }
        }
        if self.xmax <= self.xmin {
            return Err(Error::config("grid.xmax must exceed grid.xmin"));
        }
        if self.ymax <= self.ymin {
            return Err(Error::config("grid.ymax must exceed grid.ymin"));
        }
        if self.nx < 2 {
            return Err(Error::config(format!("grid.nx must be at least 2 (got {})", self.nx)));
        }
        if self.ny < 2 {
            return Err(Error::config(format!("grid.ny must be at least 2 (got {})", self.ny)));
        }
        Ok(())
    }

    pub fn x_coord(&self, j: u32) -> f64 {
        if j + 1 == self.nx {
            self.xmax
        } else {
            self.xmin + j as f64 * (self.xmax - self.xmin) / (self.nx - 1) as f64
        }
    }

    pub fn y_coord(&self, i: u32) -> f64 {
        if i + 1 == self.ny {
            self.ymax
        } else {
            self.ymin + i as f64 * (self.ymax - self.ymin) / (self.ny - 1) as f64
        }
    }

    pub fn cell_dx(&self) -> f64 {
        (self.xmax - self.xmin) / (self.nx - 1) as f64
    }

    pub fn cell_dy(&self) -> f64 {
        (self.ymax - self.ymin) / (self.ny - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nx as usize * self.ny as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Everything needed to reproduce a field besides the grid itself.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMeta {
    pub p: f64,
    pub tau: f64,
    pub dt: f64,
    pub t0: f64,
    pub system: String,
    pub params: Vec<(String, f64)>,
    pub seed: u64,
    pub path_id: u64,
    pub ensemble_m: u32,
    pub direction: Direction,
}

/// A descriptor field over a grid of initial conditions, with an escape
/// mask marking cells whose trajectory was frozen at the escape radius.
/// Escaped cells keep their accumulated partial sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    pub meta: FieldMeta,
    values: Vec<f64>,
    escaped: Vec<bool>,
}

impl ScalarField {
    pub fn from_parts(
        grid: GridSpec,
        meta: FieldMeta,
        values: Vec<f64>,
        escaped: Vec<bool>,
    ) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() || escaped.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "field data length {} / mask length {} do not match grid {}x{}",
                values.len(),
                escaped.len(),
                grid.ny,
                grid.nx
            )));
        }
        Ok(ScalarField { grid, meta, values, escaped })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn nx(&self) -> u32 {
        self.grid.nx
    }

    pub fn ny(&self) -> u32 {
        self.grid.ny
    }

    #[inline]
    fn idx(&self, i: u32, j: u32) -> usize {
        i as usize * self.grid.nx as usize + j as usize
    }

    pub fn value(&self, i: u32, j: u32) -> f64 {
        self.values[self.idx(i, j)]
    }

    pub fn is_escaped(&self, i: u32, j: u32) -> bool {
        self.escaped[self.idx(i, j)]
    }

    /// Row-major values, row 0 at `ymin`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn escape_mask(&self) -> &[bool] {
        &self.escaped
    }

    pub fn escaped_count(&self) -> usize {
        self.escaped.iter().filter(|&&e| e).count()
    }

    /// Min/max over non-escaped cells, falling back to all cells when the
    /// whole field escaped.
    pub fn value_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (v, &e) in self.values.iter().zip(&self.escaped) {
            if !e {
                lo = lo.min(*v);
                hi = hi.max(*v);
            }
        }
        if lo > hi {
            for v in &self.values {
                lo = lo.min(*v);
                hi = hi.max(*v);
            }
        }
        (lo, hi)
    }
}

/// Descriptor evaluation parameters shared by point and field runs.
#[derive(Debug, Clone, Copy)]
pub struct DescriptorParams {
    pub t0: f64,
    pub tau: f64,
    pub p: f64,
    pub direction: Direction,
    pub escape_radius: f64,
}

impl DescriptorParams {
    pub fn validate(&self, dt: f64) -> Result<usize> {
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::config(format!(
                "p must lie in (0, 1] (got {})",
                self.p
            )));
        }
        steps_for(self.tau, dt)
    }
}

/// Number of nodes per side; `tau` must be an exact multiple of `dt`.
pub fn steps_for(tau: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::config(format!("dt must be positive and finite (got {dt})")));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::config(format!("tau must be positive and finite (got {tau})")));
    }
    let steps = (tau / dt).round();
    if steps < 1.0 || (steps * dt - tau).abs() > 1e-9 * tau.max(dt) {
        return Err(Error::config(format!(
            "tau must be a positive integer multiple of dt (tau={tau}, dt={dt})"
        )));
    }
    Ok(steps as usize)
}

/// Descriptor value of one initial condition under one noise realization:
/// the p-power sum of state increments over the requested window halves.
/// Returns the value and whether the trajectory escaped.
pub fn msp_point(
    system: &SdeSystem,
    x0: &[f64],
    params: &DescriptorParams,
    path: &WienerPath,
) -> Result<(f64, bool)> {
    let n_steps = params.validate(path.dt())?;
    point_value(system, x0, params, path, n_steps)
}

fn point_value(
    system: &SdeSystem,
    x0: &[f64],
    params: &DescriptorParams,
    path: &WienerPath,
    n_steps: usize,
) -> Result<(f64, bool)> {
    let n_back = if params.direction.includes_backward() { n_steps } else { 0 };
    let n_fwd = if params.direction.includes_forward() { n_steps } else { 0 };
    let traj =
        integrate_directed(system, x0, params.t0, path, n_back, n_fwd, params.escape_radius)?;
    let n = system.n();
    let p = params.p;

    // Backward and forward halves are accumulated separately and combined
    // with a single final addition, so value(both) = value(bwd) + value(fwd)
    // holds bit for bit.
    let mut bwd = 0.0;
    for i in -(n_back as i64)..0 {
        let a = traj.state(i);
        let b = traj.state(i + 1);
        for c in 0..n {
            bwd += (b[c] - a[c]).abs().powf(p);
        }
    }
    let mut fwd = 0.0;
    for i in 0..n_fwd as i64 {
        let a = traj.state(i);
        let b = traj.state(i + 1);
        for c in 0..n {
            fwd += (b[c] - a[c]).abs().powf(p);
        }
    }
    let value = match params.direction {
        Direction::Forward => fwd,
        Direction::Backward => bwd,
        Direction::Both => bwd + fwd,
    };
    Ok((value, traj.escaped()))
}

/// Descriptor field over a grid of initial conditions, one shared noise
/// realization for the entire grid. Rows are evaluated in parallel; the
/// result is independent of the schedule.
pub fn msp_field(
    system: &SdeSystem,
    grid: &GridSpec,
    params: &DescriptorParams,
    path: &WienerPath,
) -> Result<ScalarField> {
    msp_field_with_progress(system, grid, params, path, None)
}

/// `msp_field` with an optional `(rows_done, rows_total)` callback.
pub fn msp_field_with_progress(
    system: &SdeSystem,
    grid: &GridSpec,
    params: &DescriptorParams,
    path: &WienerPath,
    progress: Option<&(dyn Fn(u32, u32) + Sync)>,
) -> Result<ScalarField> {
    grid.validate()?;
    if system.n() != 2 {
        return Err(Error::Dimension(format!(
            "descriptor fields need a 2-dimensional system (got n={})",
            system.n()
        )));
    }
    let n_steps = params.validate(path.dt())?;
    let done = AtomicU32::new(0);

    let rows: Vec<Vec<(f64, bool)>> = (0..grid.ny)
        .into_par_iter()
        .map(|i| -> Result<Vec<(f64, bool)>> {
            let y = grid.y_coord(i);
            let mut row = Vec::with_capacity(grid.nx as usize);
            for j in 0..grid.nx {
                let x0 = [grid.x_coord(j), y];
                row.push(point_value(system, &x0, params, path, n_steps)?);
            }
            if let Some(cb) = progress {
                cb(done.fetch_add(1, Ordering::Relaxed) + 1, grid.ny);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let mut values = Vec::with_capacity(grid.len());
    let mut escaped = Vec::with_capacity(grid.len());
    for row in rows {
        for (v, e) in row {
            values.push(v);
            escaped.push(e);
        }
    }
    let meta = FieldMeta {
        p: params.p,
        tau: params.tau,
        dt: path.dt(),
        t0: params.t0,
        system: system.name().to_string(),
        params: system.params().to_vec(),
        seed: path.seed(),
        path_id: path.path_id(),
        ensemble_m: 1,
        direction: params.direction,
    };
    ScalarField::from_parts(*grid, meta, values, escaped)
}

/// Pointwise arithmetic mean of descriptor fields computed under distinct
/// realizations. Escaped members keep their frozen partial value in the
/// mean; the cell's flag records that some member escaped there.
pub fn ensemble_mean(fields: &[ScalarField]) -> Result<ScalarField> {
    let first = fields
        .first()
        .ok_or_else(|| Error::config("ensemble_mean needs at least one field"))?;
    for f in &fields[1..] {
        if f.grid != first.grid {
            return Err(Error::Dimension("ensemble members use different grids".into()));
        }
        let a = &f.meta;
        let b = &first.meta;
        if a.p != b.p
            || a.tau != b.tau
            || a.dt != b.dt
            || a.t0 != b.t0
            || a.system != b.system
            || a.params != b.params
            || a.direction != b.direction
        {
            return Err(Error::config(
                "ensemble members disagree on (p, tau, dt, t0, system, direction)",
            ));
        }
    }
    let inv = 1.0 / fields.len() as f64;
    let mut values = vec![0.0; first.values.len()];
    let mut escaped = vec![false; first.escaped.len()];
    // accumulate in member order so the result never depends on scheduling
    for f in fields {
        for (acc, v) in values.iter_mut().zip(&f.values) {
            *acc += *v;
        }
        for (acc, e) in escaped.iter_mut().zip(&f.escaped) {
            *acc |= *e;
        }
    }
    for v in &mut values {
        *v *= inv;
    }
    let mut meta = first.meta.clone();
    meta.path_id = 0;
    meta.ensemble_m = fields.len() as u32;
    ScalarField::from_parts(first.grid, meta, values, escaped)
}

/// Frobenius distance `sqrt(sum_ij (A_ij - B_ij)^2)` between two fields of
/// identical shape.
pub fn frobenius_distance(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    if a.nx() != b.nx() || a.ny() != b.ny() {
        return Err(Error::Dimension(format!(
            "field shapes differ: {}x{} vs {}x{}",
            a.ny(),
            a.nx(),
            b.ny(),
            b.nx()
        )));
    }
    let mut acc = 0.0;
    for (x, y) in a.values.iter().zip(&b.values) {
        let d = x - y;
        acc += d * d;
    }
    Ok(acc.sqrt())
}

/// Discrete deterministic descriptor of a velocity field: the same
/// increment sum as `msp_field` applied to the Euler orbit of
/// `dx/dt = v(x, t)` (diffusion identically zero).
pub fn mp_deterministic_field(
    field: &DeterministicField,
    grid: &GridSpec,
    t0: f64,
    tau: f64,
    p: f64,
    dt: f64,
) -> Result<ScalarField> {
    if field.n() != 2 {
        return Err(Error::Dimension(format!(
            "descriptor fields need a 2-dimensional field (got n={})",
            field.n()
        )));
    }
    let velocity = field.velocity_fn();
    let system = SdeSystem::new(
        field.name(),
        2,
        1,
        vec![],
        move |x, t, out| velocity(x, t, out),
        |_, _, out| out.fill(0.0),
    );
    let n_steps = steps_for(tau, dt)?;
    let path = generate_path(0, 0, 1, n_steps, dt)?;
    let params = DescriptorParams {
        t0,
        tau,
        p,
        direction: Direction::Both,
        escape_radius: DEFAULT_ESCAPE_RADIUS,
    };
    msp_field(&system, grid, &params, &path)
}
