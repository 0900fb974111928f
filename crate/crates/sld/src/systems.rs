//! SDE right-hand sides: a generic drift/diffusion container plus the
//! built-in benchmark systems and their deterministic counterparts.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Evaluator signature shared by drifts, diffusions and velocity fields:
/// `(state, time, out)`. Drift/velocity fill `n` values, diffusion fills an
/// `n x m` row-major matrix.
pub type EvalFn = Arc<dyn Fn(&[f64], f64, &mut [f64]) + Send + Sync>;

/// An SDE `dX = b(X,t) dt + sigma(X,t) dW` with `n` states and `m`
/// independent noise channels. Evaluators must be pure; systems are
/// immutable after construction and safe to share across threads.
#[derive(Clone)]
pub struct SdeSystem {
    name: String,
    n: usize,
    m: usize,
    params: Vec<(String, f64)>,
    drift: EvalFn,
    diffusion: EvalFn,
}

impl std::fmt::Debug for SdeSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SdeSystem")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("params", &self.params)
            .finish()
    }
}

impl SdeSystem {
    /// Assemble a custom system. Library users provide their own evaluators;
    /// parameter validation belongs here, not in the hot loop.
    pub fn new(
        name: impl Into<String>,
        n: usize,
        m: usize,
        params: Vec<(String, f64)>,
        drift: impl Fn(&[f64], f64, &mut [f64]) + Send + Sync + 'static,
        diffusion: impl Fn(&[f64], f64, &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        SdeSystem {
            name: name.into(),
            n,
            m,
            params,
            drift: Arc::new(drift),
            diffusion: Arc::new(diffusion),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    #[inline]
    pub fn drift(&self, state: &[f64], t: f64, out: &mut [f64]) {
        debug_assert_eq!(state.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        (self.drift)(state, t, out);
    }

    #[inline]
    pub fn diffusion(&self, state: &[f64], t: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n * self.m);
        (self.diffusion)(state, t, out);
    }

    /// The drift alone as a deterministic velocity field.
    pub fn drift_field(&self) -> DeterministicField {
        DeterministicField {
            name: self.name.clone(),
            n: self.n,
            velocity: Arc::clone(&self.drift),
        }
    }

    /// Same drift, identically zero diffusion.
    pub fn with_zero_diffusion(&self) -> SdeSystem {
        SdeSystem {
            name: self.name.clone(),
            n: self.n,
            m: self.m,
            params: self.params.clone(),
            drift: Arc::clone(&self.drift),
            diffusion: Arc::new(|_, _, out: &mut [f64]| out.fill(0.0)),
        }
    }
}

/// A deterministic velocity field `dx/dt = v(x, t)`.
#[derive(Clone)]
pub struct DeterministicField {
    name: String,
    n: usize,
    velocity: EvalFn,
}

impl DeterministicField {
    pub fn new(
        name: impl Into<String>,
        n: usize,
        velocity: impl Fn(&[f64], f64, &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        DeterministicField { name: name.into(), n, velocity: Arc::new(velocity) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn velocity(&self, state: &[f64], t: f64, out: &mut [f64]) {
        (self.velocity)(state, t, out);
    }

    pub(crate) fn velocity_fn(&self) -> EvalFn {
        Arc::clone(&self.velocity)
    }
}

/// Coefficients of the noisy saddle, kept together because the closed-form
/// map and the stationary-orbit quadratures all consume the same four
/// numbers. Expansion rates `a1, a2` must be positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleParams {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

impl SaddleParams {
    pub fn new(a1: f64, a2: f64, b1: f64, b2: f64) -> Result<Self> {
        if !(a1 > 0.0) {
            return Err(Error::config(format!("a1 must be positive (got {a1})")));
        }
        if !(a2 > 0.0) {
            return Err(Error::config(format!("a2 must be positive (got {a2})")));
        }
        Ok(SaddleParams { a1, a2, b1, b2 })
    }

    pub fn system(&self) -> SdeSystem {
        noisy_saddle(self.a1, self.a2, self.b1, self.b2)
            .expect("SaddleParams are validated at construction")
    }
}

/// Linear saddle with additive noise:
/// `dX = a1 X dt + b1 dW1`, `dY = -a2 Y dt + b2 dW2`.
pub fn noisy_saddle(a1: f64, a2: f64, b1: f64, b2: f64) -> Result<SdeSystem> {
    if !(a1 > 0.0) {
        return Err(Error::config(format!("a1 must be positive (got {a1})")));
    }
    if !(a2 > 0.0) {
        return Err(Error::config(format!("a2 must be positive (got {a2})")));
    }
    Ok(SdeSystem::new(
        "noisy_saddle",
        2,
        2,
        vec![("a1".into(), a1), ("a2".into(), a2), ("b1".into(), b1), ("b2".into(), b2)],
        move |x, _t, out| {
            out[0] = a1 * x[0];
            out[1] = -a2 * x[1];
        },
        move |_x, _t, out| {
            out[0] = b1;
            out[1] = 0.0;
            out[2] = 0.0;
            out[3] = b2;
        },
    ))
}

/// Stochastically forced Duffing oscillator:
/// `dX = alpha Y dt`, `dY = (beta X + gamma X^3) dt + eps dW`.
pub fn duffing_stochastic(alpha: f64, beta: f64, gamma: f64, eps: f64) -> SdeSystem {
    SdeSystem::new(
        "duffing",
        2,
        1,
        vec![
            ("alpha".into(), alpha),
            ("beta".into(), beta),
            ("gamma".into(), gamma),
            ("eps".into(), eps),
        ],
        move |x, _t, out| {
            out[0] = alpha * x[1];
            out[1] = beta * x[0] + gamma * x[0] * x[0] * x[0];
        },
        move |_x, _t, out| {
            out[0] = 0.0;
            out[1] = eps;
        },
    )
}

/// Periodically forced Duffing oscillator in first-order form:
/// `v(x, y, t) = (y, alpha y + beta x + gamma x^3 + eps cos t)`.
pub fn duffing_deterministic(alpha: f64, beta: f64, gamma: f64, eps: f64) -> DeterministicField {
    DeterministicField::new("duffing_deterministic", 2, move |x, t, out| {
        out[0] = x[1];
        out[1] = alpha * x[1] + beta * x[0] + gamma * x[0] * x[0] * x[0] + eps * t.cos();
    })
}

/// The double gyre's oscillating coordinate map and its spatial derivative:
/// `f = eps sin(phi t + psi) x^2 + (1 - 2 eps sin(phi t + psi)) x`.
pub fn double_gyre_f(x: f64, t: f64, eps: f64, phi: f64, psi: f64) -> (f64, f64) {
    let osc = eps * (phi * t + psi).sin();
    let f = osc * x * x + (1.0 - 2.0 * osc) * x;
    let df_dx = 2.0 * osc * x + (1.0 - 2.0 * osc);
    (f, df_dx)
}

/// Stochastically forced double gyre on the `[0, 2s] x [0, s]` rectangle,
/// with independent additive noise of amplitude `alpha` on each component
/// and linear dissipation `mu`.
#[allow(clippy::too_many_arguments)]
pub fn double_gyre_stochastic(
    amp: f64,
    phi: f64,
    psi: f64,
    mu: f64,
    s: f64,
    alpha: f64,
    eps: f64,
) -> Result<SdeSystem> {
    if s == 0.0 {
        return Err(Error::config("s must be nonzero"));
    }
    Ok(SdeSystem::new(
        "double_gyre",
        2,
        2,
        vec![
            ("A".into(), amp),
            ("phi".into(), phi),
            ("psi".into(), psi),
            ("mu".into(), mu),
            ("s".into(), s),
            ("alpha".into(), alpha),
            ("eps".into(), eps),
        ],
        move |x, t, out| {
            let (f, df_dx) = double_gyre_f(x[0], t, eps, phi, psi);
            let fx = PI * f / s;
            let fy = PI * x[1] / s;
            out[0] = -PI * amp * fx.sin() * fy.cos() - mu * x[0];
            out[1] = PI * amp * fx.cos() * fy.sin() * df_dx - mu * x[1];
        },
        move |_x, _t, out| {
            out[0] = alpha;
            out[1] = 0.0;
            out[2] = 0.0;
            out[3] = alpha;
        },
    ))
}

fn param(
    map: &BTreeMap<String, f64>,
    key: &str,
    default: f64,
    seen: &mut Vec<String>,
) -> f64 {
    seen.push(key.to_string());
    map.get(key).copied().unwrap_or(default)
}

/// Build a built-in system by name, with per-system parameter maps.
/// Missing parameters fall back to the benchmark defaults; unknown keys are
/// rejected so typos cannot silently vanish.
pub fn from_config(name: &str, params: &BTreeMap<String, f64>) -> Result<SdeSystem> {
    let mut seen = Vec::new();
    let system = match name {
        "noisy_saddle" => {
            let a1 = param(params, "a1", 1.0, &mut seen);
            let a2 = param(params, "a2", 1.0, &mut seen);
            let b1 = param(params, "b1", -1.0, &mut seen);
            let b2 = param(params, "b2", 1.0, &mut seen);
            noisy_saddle(a1, a2, b1, b2)?
        }
        "duffing" => {
            let alpha = param(params, "alpha", 1.0, &mut seen);
            let beta = param(params, "beta", 1.0, &mut seen);
            let gamma = param(params, "gamma", -1.0, &mut seen);
            let eps = param(params, "eps", 0.25, &mut seen);
            duffing_stochastic(alpha, beta, gamma, eps)
        }
        "double_gyre" => {
            let amp = param(params, "A", 0.25, &mut seen);
            let phi = param(params, "phi", 2.0 * PI, &mut seen);
            let psi = param(params, "psi", 0.0, &mut seen);
            let mu = param(params, "mu", 0.0, &mut seen);
            let s = param(params, "s", 1.0, &mut seen);
            let alpha = param(params, "alpha", 0.1, &mut seen);
            let eps = param(params, "eps", 0.25, &mut seen);
            double_gyre_stochastic(amp, phi, psi, mu, s, alpha, eps)?
        }
        "custom" => {
            return Err(Error::config(
                "system.name \"custom\" is reserved for library users; construct an SdeSystem directly",
            ));
        }
        other => {
            return Err(Error::config(format!(
                "system.name \"{other}\" unknown (expected noisy_saddle, duffing, or double_gyre)"
            )));
        }
    };
    for key in params.keys() {
        if !seen.contains(key) {
            return Err(Error::config(format!(
                "system.params key \"{key}\" unknown for system \"{name}\""
            )));
        }
    }
    Ok(system)
}
