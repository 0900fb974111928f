//! Euler-Maruyama stepping on the shared temporal grid, forward and
//! backward from the anchor, plus the closed-form noisy-saddle map and an
//! empirical convergence-order study.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::systems::{SaddleParams, SdeSystem};
use crate::wiener::{generate_path, WienerPath};

/// Node time `t_0 + i dt`, always computed from the integer index so the
/// grid accumulates no drift.
#[inline]
pub fn node_time(t0: f64, node: i64, dt: f64) -> f64 {
    (node as f64).mul_add(dt, t0)
}

/// States on the nodes `t_0 + i dt`, `i` in `[-n_back, n_fwd]`.
///
/// Once a component magnitude exceeds the escape radius the trajectory is
/// frozen in that time direction and the node is recorded; frozen nodes all
/// carry the escape-time state.
#[derive(Debug, Clone)]
pub struct Trajectory {
    n: usize,
    n_back: usize,
    n_fwd: usize,
    t0: f64,
    dt: f64,
    states: Vec<f64>,
    escape_radius: f64,
    escaped_fwd: Option<i64>,
    escaped_bwd: Option<i64>,
}

impl Trajectory {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn escape_radius(&self) -> f64 {
        self.escape_radius
    }

    /// Inclusive node range `(-n_back, n_fwd)`.
    pub fn node_range(&self) -> (i64, i64) {
        (-(self.n_back as i64), self.n_fwd as i64)
    }

    pub fn time(&self, node: i64) -> f64 {
        node_time(self.t0, node, self.dt)
    }

    pub fn state(&self, node: i64) -> &[f64] {
        let (lo, hi) = self.node_range();
        assert!(node >= lo && node <= hi, "node {node} outside [{lo}, {hi}]");
        let idx = (node + self.n_back as i64) as usize * self.n;
        &self.states[idx..idx + self.n]
    }

    /// First escape node in the direction that escaped, preferring the one
    /// closer to the anchor when both sides froze.
    pub fn escaped_at(&self) -> Option<i64> {
        match (self.escaped_fwd, self.escaped_bwd) {
            (Some(f), Some(b)) => Some(if f <= -b { f } else { b }),
            (Some(f), None) => Some(f),
            (None, Some(b)) => Some(b),
            (None, None) => None,
        }
    }

    pub fn escaped(&self) -> bool {
        self.escaped_fwd.is_some() || self.escaped_bwd.is_some()
    }

    pub fn escaped_fwd_node(&self) -> Option<i64> {
        self.escaped_fwd
    }

    pub fn escaped_bwd_node(&self) -> Option<i64> {
        self.escaped_bwd
    }

    /// Whether the state at `node` sits at or beyond an escape freeze.
    pub fn escaped_by(&self, node: i64) -> bool {
        if node >= 0 {
            if let Some(e) = self.escaped_fwd {
                return e <= node;
            }
        }
        if node <= 0 {
            if let Some(e) = self.escaped_bwd {
                return e >= node;
            }
        }
        false
    }

    fn store(&mut self, node: i64, value: &[f64]) {
        let idx = (node + self.n_back as i64) as usize * self.n;
        self.states[idx..idx + self.n].copy_from_slice(value);
    }
}

/// Euler-Maruyama over the symmetric window `[-n_steps, n_steps]`.
///
/// Forward step: `x_{i+1} = x_i + b(x_i, t_i) dt + sigma(x_i, t_i) dW_[i, i+1]`.
/// Backward step inverts it at the right node:
/// `x_{i-1} = x_i - b(x_i, t_i) dt - sigma(x_i, t_i) dW_[i-1, i]`.
pub fn integrate(
    system: &SdeSystem,
    x0: &[f64],
    t0: f64,
    path: &WienerPath,
    n_steps: usize,
    escape_radius: f64,
) -> Result<Trajectory> {
    integrate_directed(system, x0, t0, path, n_steps, n_steps, escape_radius)
}

/// Euler-Maruyama over `[-n_back, n_fwd]`; either side may be zero.
pub fn integrate_directed(
    system: &SdeSystem,
    x0: &[f64],
    t0: f64,
    path: &WienerPath,
    n_back: usize,
    n_fwd: usize,
    escape_radius: f64,
) -> Result<Trajectory> {
    let n = system.n();
    let m = system.m();
    if x0.len() != n {
        return Err(Error::Dimension(format!(
            "initial condition has {} components, system expects {n}",
            x0.len()
        )));
    }
    if path.n_components() != m {
        return Err(Error::Dimension(format!(
            "path has {} noise components, system expects {m}",
            path.n_components()
        )));
    }
    if n_back.max(n_fwd) > path.n_steps() {
        return Err(Error::InsufficientPath(format!(
            "requested {} steps but path holds {}",
            n_back.max(n_fwd),
            path.n_steps()
        )));
    }
    if !(escape_radius > 0.0) {
        return Err(Error::config(format!("escape_radius must be positive (got {escape_radius})")));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("initial condition must be finite"));
    }

    let dt = path.dt();
    let mut traj = Trajectory {
        n,
        n_back,
        n_fwd,
        t0,
        dt,
        states: vec![0.0; (n_back + n_fwd + 1) * n],
        escape_radius,
        escaped_fwd: None,
        escaped_bwd: None,
    };
    traj.store(0, x0);

    if x0.iter().any(|v| v.abs() > escape_radius) {
        // already outside: freeze everything at the initial state
        for i in 1..=n_fwd as i64 {
            traj.store(i, x0);
        }
        for i in 1..=n_back as i64 {
            traj.store(-i, x0);
        }
        traj.escaped_fwd = (n_fwd > 0).then_some(0);
        traj.escaped_bwd = (n_back > 0).then_some(0);
        if n_back == 0 && n_fwd == 0 {
            traj.escaped_fwd = Some(0);
        }
        return Ok(traj);
    }

    let mut drift = vec![0.0; n];
    let mut sigma = vec![0.0; n * m];

    // forward sweep
    let mut cur = x0.to_vec();
    let mut next = vec![0.0; n];
    for i in 0..n_fwd as i64 {
        if traj.escaped_fwd.is_some() {
            traj.store(i + 1, &cur);
            continue;
        }
        let t = node_time(t0, i, dt);
        system.drift(&cur, t, &mut drift);
        system.diffusion(&cur, t, &mut sigma);
        for j in 0..n {
            let mut acc = cur[j] + drift[j] * dt;
            for k in 0..m {
                acc += sigma[j * m + k] * path.increment_unchecked(k, i);
            }
            next[j] = acc;
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node: i + 1 });
        }
        if next.iter().any(|v| v.abs() > escape_radius) {
            traj.escaped_fwd = Some(i + 1);
        }
        cur.copy_from_slice(&next);
        traj.store(i + 1, &cur);
    }

    // backward sweep
    cur.copy_from_slice(x0);
    for i in 0..n_back as i64 {
        let node = -i;
        if traj.escaped_bwd.is_some() {
            traj.store(node - 1, &cur);
            continue;
        }
        let t = node_time(t0, node, dt);
        system.drift(&cur, t, &mut drift);
        system.diffusion(&cur, t, &mut sigma);
        for j in 0..n {
            let mut acc = cur[j] - drift[j] * dt;
            for k in 0..m {
                acc -= sigma[j * m + k] * path.increment_unchecked(k, node - 1);
            }
            next[j] = acc;
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node: node - 1 });
        }
        if next.iter().any(|v| v.abs() > escape_radius) {
            traj.escaped_bwd = Some(node - 1);
        }
        cur.copy_from_slice(&next);
        traj.store(node - 1, &cur);
    }

    Ok(traj)
}

/// Variation-of-constants solution of the noisy saddle evaluated at a node,
/// with the stochastic integrals taken as left-endpoint sums on the path's
/// own grid:
/// `X_t = e^{a1 t} (x0 + int_0^t e^{-a1 s} b1 dW1)`,
/// `Y_t = e^{-a2 t} (y0 + int_0^t e^{a2 s} b2 dW2)`.
pub fn closed_form_noisy_saddle(
    params: SaddleParams,
    x0: [f64; 2],
    path: &WienerPath,
    node: i64,
) -> Result<[f64; 2]> {
    if path.n_components() < 2 {
        return Err(Error::Dimension(format!(
            "noisy saddle needs 2 noise components, path has {}",
            path.n_components()
        )));
    }
    let max = path.n_steps() as i64;
    if node.abs() > max {
        return Err(Error::NodeRange { node, max });
    }
    let SaddleParams { a1, a2, b1, b2 } = params;
    let (qx, qy) = match node.cmp(&0) {
        std::cmp::Ordering::Greater => (
            path.ito_quadrature(0, |s| (-a1 * s).exp() * b1, 0, node)?,
            path.ito_quadrature(1, |s| (a2 * s).exp() * b2, 0, node)?,
        ),
        std::cmp::Ordering::Less => (
            -path.ito_quadrature(0, |s| (-a1 * s).exp() * b1, node, 0)?,
            -path.ito_quadrature(1, |s| (a2 * s).exp() * b2, node, 0)?,
        ),
        std::cmp::Ordering::Equal => (0.0, 0.0),
    };
    let t = node as f64 * path.dt();
    Ok([(a1 * t).exp() * (x0[0] + qx), (-a2 * t).exp() * (x0[1] + qy)])
}

/// A pathwise reference solution consuming the same increments as the
/// scheme under study: `(path, x0, node) -> state`.
pub type OracleMap = dyn Fn(&WienerPath, &[f64], i64) -> Result<Vec<f64>> + Sync;

/// Result of an empirical strong-convergence study.
#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub dts: Vec<f64>,
    /// Mean Euclidean terminal error per timestep, averaged over paths.
    pub mean_errors: Vec<f64>,
    /// Least-squares slope of `log error` vs `log dt`; `None` when fewer
    /// than two levels or a zero error make the fit undefined.
    pub slope: Option<f64>,
}

fn near_integer(x: f64) -> Option<u64> {
    let r = x.round();
    (r >= 1.0 && (x - r).abs() <= 1e-9 * r).then_some(r as u64)
}

/// Strong-error study: one fine Brownian path per experiment, coarser
/// levels consume the group-summed increments, and the oracle is evaluated
/// on the same coarse grid as the scheme.
pub fn convergence_order(
    system: &SdeSystem,
    oracle: &OracleMap,
    x0: &[f64],
    dts: &[f64],
    n_paths: u64,
    horizon: f64,
    seed: u64,
) -> Result<ConvergenceStudy> {
    if dts.is_empty() {
        return Err(Error::config("dts must not be empty"));
    }
    if dts.iter().any(|&dt| !(dt > 0.0)) {
        return Err(Error::config("dts must be positive"));
    }
    if dts.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::config("dts must be sorted strictly descending"));
    }
    if !(horizon > 0.0) {
        return Err(Error::config(format!("horizon must be positive (got {horizon})")));
    }
    if n_paths == 0 {
        return Err(Error::config("n_paths must be at least 1"));
    }
    let dt_fine = *dts.last().unwrap();
    let mut groups = Vec::with_capacity(dts.len());
    let mut level_steps = Vec::with_capacity(dts.len());
    for &dt in dts {
        let g = near_integer(dt / dt_fine).ok_or_else(|| {
            Error::config(format!("dt {dt} is not an integer multiple of the finest dt {dt_fine}"))
        })?;
        let steps = near_integer(horizon / dt).ok_or_else(|| {
            Error::config(format!("horizon {horizon} is not an integer multiple of dt {dt}"))
        })?;
        groups.push(g as usize);
        level_steps.push(steps as usize);
    }
    let n_fine = level_steps[dts.len() - 1];
    let m = system.m();

    let per_path: Vec<Vec<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|pid| -> Result<Vec<f64>> {
            let fine = generate_path(seed, pid, m, n_fine, dt_fine)?;
            let mut errs = Vec::with_capacity(dts.len());
            for (lvl, &dt) in dts.iter().enumerate() {
                let coarse = coarsen(&fine, groups[lvl], level_steps[lvl], dt, seed, pid)?;
                let em = integrate_directed(
                    system,
                    x0,
                    0.0,
                    &coarse,
                    0,
                    level_steps[lvl],
                    f64::INFINITY,
                )?;
                let reference = oracle(&coarse, x0, level_steps[lvl] as i64)?;
                let terminal = em.state(level_steps[lvl] as i64);
                let err: f64 = terminal
                    .iter()
                    .zip(reference.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                errs.push(err);
            }
            Ok(errs)
        })
        .collect::<Result<_>>()?;

    // fixed-order reduction over path ids
    let mut mean_errors = vec![0.0; dts.len()];
    for errs in &per_path {
        for (acc, e) in mean_errors.iter_mut().zip(errs) {
            *acc += e;
        }
    }
    for acc in &mut mean_errors {
        *acc /= n_paths as f64;
    }

    let slope = fit_loglog_slope(dts, &mean_errors);
    Ok(ConvergenceStudy { dts: dts.to_vec(), mean_errors, slope })
}

fn coarsen(
    fine: &WienerPath,
    group: usize,
    steps: usize,
    dt: f64,
    seed: u64,
    path_id: u64,
) -> Result<WienerPath> {
    let m = fine.n_components();
    let mut fwd = vec![Vec::with_capacity(steps); m];
    let mut bwd = vec![Vec::with_capacity(steps); m];
    for (c, (f, b)) in fwd.iter_mut().zip(bwd.iter_mut()).enumerate() {
        for j in 0..steps {
            let mut sf = 0.0;
            let mut sb = 0.0;
            for k in 0..group {
                sf += fine.increment(c, (j * group + k) as i64)?;
                sb += fine.increment(c, -((j * group + k) as i64) - 1)?;
            }
            f.push(sf);
            b.push(sb);
        }
    }
    WienerPath::from_increments(dt, fwd, bwd, seed, path_id)
}

fn fit_loglog_slope(dts: &[f64], errors: &[f64]) -> Option<f64> {
    if dts.len() < 2 || errors.iter().any(|&e| e <= 0.0) {
        return None;
    }
    let n = dts.len() as f64;
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems;

    fn zero_system() -> SdeSystem {
        SdeSystem::new("zero", 2, 1, vec![], |_, _, out| out.fill(0.0), |_, _, out| out.fill(0.0))
    }

    #[test]
    fn zero_system_stays_constant() {
        let path = generate_path(3, 0, 1, 50, 0.05).unwrap();
        let traj = integrate(&zero_system(), &[0.7, -0.3], 0.0, &path, 50, 1e6).unwrap();
        for i in -50..=50 {
            assert_eq!(traj.state(i), &[0.7, -0.3]);
        }
        assert!(!traj.escaped());
    }

    #[test]
    fn single_forward_step_arithmetic() {
        let sys = systems::noisy_saddle(1.0, 1.0, 0.0, 0.0).unwrap();
        let dt = 0.05;
        let path = generate_path(3, 0, 2, 4, dt).unwrap();
        let traj = integrate(&sys, &[1.0, 1.0], 0.0, &path, 1, 1e6).unwrap();
        assert_eq!(traj.state(1), &[1.0 + dt, 1.0 - dt]);
        assert_eq!(traj.state(0), &[1.0, 1.0]);
    }

    #[test]
    fn node_times_come_from_integers() {
        let path = generate_path(1, 0, 1, 10, 0.1).unwrap();
        let traj = integrate(&zero_system(), &[0.0, 0.0], 2.0, &path, 10, 1e6).unwrap();
        for i in -10..=10 {
            assert_eq!(traj.time(i), (i as f64).mul_add(0.1, 2.0));
        }
    }

    #[test]
    fn repeated_integration_is_bit_identical() {
        let sys = systems::duffing_stochastic(1.0, 1.0, -1.0, 0.25);
        let path = generate_path(21, 4, 1, 80, 0.05).unwrap();
        let a = integrate(&sys, &[0.1, 0.2], 0.0, &path, 80, 1e6).unwrap();
        let b = integrate(&sys, &[0.1, 0.2], 0.0, &path, 80, 1e6).unwrap();
        for i in -80..=80 {
            assert_eq!(a.state(i), b.state(i));
        }
    }

    #[test]
    fn dimension_and_length_validation() {
        let sys = systems::noisy_saddle(1.0, 1.0, -1.0, 1.0).unwrap();
        let path1 = generate_path(1, 0, 1, 10, 0.05).unwrap();
        assert!(matches!(
            integrate(&sys, &[1.0, 1.0], 0.0, &path1, 10, 1e6),
            Err(Error::Dimension(_))
        ));
        let path2 = generate_path(1, 0, 2, 10, 0.05).unwrap();
        assert!(matches!(
            integrate(&sys, &[1.0], 0.0, &path2, 10, 1e6),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            integrate(&sys, &[1.0, 1.0], 0.0, &path2, 20, 1e6),
            Err(Error::InsufficientPath(_))
        ));
        assert!(integrate(&sys, &[1.0, 1.0], 0.0, &path2, 10, 0.0).is_err());
    }

    #[test]
    fn escape_freezes_trajectory() {
        let sys = systems::noisy_saddle(1.0, 1.0, 0.0, 0.0).unwrap();
        let path = generate_path(5, 0, 2, 60, 0.05).unwrap();
        let traj = integrate(&sys, &[2.0, 0.0], 0.0, &path, 60, 5.0).unwrap();
        let at = traj.escaped_at().expect("must escape");
        assert!(at > 0);
        let frozen = traj.state(at).to_vec();
        assert!(frozen[0].abs() > 5.0);
        for i in at..=60 {
            assert_eq!(traj.state(i), frozen.as_slice());
        }
        // backward side contracts and never escapes
        let back = traj.state(-60)[0];
        let expect = 2.0 * (1.0f64 - 0.05).powi(60);
        assert!((back - expect).abs() <= 1e-12 * expect.abs());
        assert!(traj.escaped_fwd_node().is_some() && traj.escaped_bwd_node().is_none());
    }

    #[test]
    fn initial_condition_outside_radius_freezes_everything() {
        let sys = zero_system();
        let path = generate_path(5, 0, 1, 10, 0.05).unwrap();
        let traj = integrate(&sys, &[20.0, 0.0], 0.0, &path, 10, 5.0).unwrap();
        assert_eq!(traj.escaped_at(), Some(0));
        for i in -10..=10 {
            assert_eq!(traj.state(i), &[20.0, 0.0]);
        }
    }

    #[test]
    fn non_finite_state_is_a_fault() {
        let sys = SdeSystem::new(
            "nanbomb",
            1,
            1,
            vec![],
            |_, t, out| out[0] = if t > 0.2 { f64::NAN } else { 0.0 },
            |_, _, out| out.fill(0.0),
        );
        let path = generate_path(1, 0, 1, 20, 0.1).unwrap();
        match integrate(&sys, &[0.0], 0.0, &path, 20, f64::INFINITY) {
            Err(Error::NonFinite { node }) => assert!(node > 2),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn closed_form_reduces_to_deterministic_saddle() {
        let p = SaddleParams::new(1.3, 0.8, 0.0, 0.0).unwrap();
        let path = generate_path(9, 0, 2, 40, 0.05).unwrap();
        assert_eq!(closed_form_noisy_saddle(p, [0.4, -0.7], &path, 0).unwrap(), [0.4, -0.7]);
        for &node in &[-40i64, -7, 13, 40] {
            let t = node as f64 * 0.05;
            let got = closed_form_noisy_saddle(p, [0.4, -0.7], &path, node).unwrap();
            assert!((got[0] - 0.4 * (1.3 * t).exp()).abs() < 1e-13);
            assert!((got[1] - (-0.7) * (-0.8 * t).exp()).abs() < 1e-13);
        }
        assert!(closed_form_noisy_saddle(p, [0.0, 0.0], &path, 41).is_err());
    }

    /// Empirical strong-error bound of the scheme against the closed form
    /// on identical increments, tau = 3, dt = 0.05, 200 paths. The constant
    /// C = 8 was frozen from a measured mean error of about 1.43 = 6.4 sqrt(dt).
    #[test]
    fn em_tracks_closed_form_within_sqrt_dt() {
        let p = SaddleParams::new(1.0, 1.0, -1.0, 1.0).unwrap();
        let sys = p.system();
        let dt = 0.05;
        let n = 60;
        let mut total = 0.0;
        for pid in 0..200 {
            let path = generate_path(314, pid, 2, n, dt).unwrap();
            let em = integrate(&sys, &[0.3, -0.2], 0.0, &path, n, f64::INFINITY).unwrap();
            let cf = closed_form_noisy_saddle(p, [0.3, -0.2], &path, n as i64).unwrap();
            let e = em.state(n as i64);
            total += ((e[0] - cf[0]).powi(2) + (e[1] - cf[1]).powi(2)).sqrt();
        }
        let mean = total / 200.0;
        assert!(mean <= 8.0 * dt.sqrt(), "mean strong error {mean} above C sqrt(dt)");
    }

    #[test]
    fn cocycle_property_of_closed_form() {
        let p = SaddleParams::new(1.0, 1.0, -1.0, 1.0).unwrap();
        let path = generate_path(11, 0, 2, 200, 0.05).unwrap();
        let x0 = [0.6, -0.1];
        for &(j, k) in &[(10i64, 25i64), (-30, 12), (40, -15)] {
            let single = closed_form_noisy_saddle(p, x0, &path, j + k).unwrap();
            let mid = closed_form_noisy_saddle(p, x0, &path, j).unwrap();
            let shifted = path.shift(j).unwrap();
            let two = closed_form_noisy_saddle(p, mid, &shifted, k).unwrap();
            for c in 0..2 {
                let tol = 1e-10 * single[c].abs().max(1.0);
                assert!((single[c] - two[c]).abs() <= tol, "split ({j},{k}) comp {c}");
            }
        }
    }

    #[test]
    fn convergence_zero_noise_has_euler_order_one() {
        let p = SaddleParams::new(1.0, 1.0, 0.0, 0.0).unwrap();
        let sys = p.system();
        let dts: Vec<f64> = (2..7).map(|k| 2.0f64.powi(-k)).collect();
        let oracle = move |path: &WienerPath, x0: &[f64], node: i64| {
            closed_form_noisy_saddle(p, [x0[0], x0[1]], path, node).map(|v| v.to_vec())
        };
        let study =
            convergence_order(&sys, &oracle, &[0.5, 0.8], &dts, 8, 1.0, 99).unwrap();
        let slope = study.slope.unwrap();
        assert!((slope - 1.0).abs() <= 0.1, "deterministic Euler slope {slope}");
    }

    /// With additive noise the scheme follows the same-grid closed form at
    /// first order, so the measured slope sits near 1.
    #[test]
    fn convergence_additive_noise_measures_order_one() {
        let p = SaddleParams::new(1.0, 1.0, -1.0, 1.0).unwrap();
        let sys = p.system();
        let dts: Vec<f64> = (4..10).map(|k| 2.0f64.powi(-k)).collect();
        let oracle = move |path: &WienerPath, x0: &[f64], node: i64| {
            closed_form_noisy_saddle(p, [x0[0], x0[1]], path, node).map(|v| v.to_vec())
        };
        let study =
            convergence_order(&sys, &oracle, &[0.3, -0.2], &dts, 200, 1.0, 2024).unwrap();
        let slope = study.slope.unwrap();
        assert!((0.85..=1.1).contains(&slope), "additive-noise slope {slope}");
    }

    #[test]
    fn convergence_self_oracle_and_single_dt() {
        let sys = systems::noisy_saddle(1.0, 1.0, -1.0, 1.0).unwrap();
        let sys2 = sys.clone();
        let oracle = move |path: &WienerPath, x0: &[f64], node: i64| {
            integrate_directed(&sys2, x0, 0.0, path, 0, node as usize, f64::INFINITY)
                .map(|t| t.state(node).to_vec())
        };
        let study = convergence_order(&sys, &oracle, &[0.1, 0.1], &[0.05], 1, 1.0, 7).unwrap();
        assert_eq!(study.mean_errors, vec![0.0]);
        assert!(study.slope.is_none());
    }

    #[test]
    fn convergence_validates_dts() {
        let sys = systems::noisy_saddle(1.0, 1.0, -1.0, 1.0).unwrap();
        let oracle = |_: &WienerPath, x0: &[f64], _: i64| Ok(x0.to_vec());
        assert!(convergence_order(&sys, &oracle, &[0.0; 2], &[], 1, 1.0, 0).is_err());
        assert!(convergence_order(&sys, &oracle, &[0.0; 2], &[0.1, 0.2], 1, 1.0, 0).is_err());
        assert!(convergence_order(&sys, &oracle, &[0.0; 2], &[0.1, 0.03], 1, 1.0, 0).is_err());
    }
}
