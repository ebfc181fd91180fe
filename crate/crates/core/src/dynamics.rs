//! Time evolution of the Bloch 4-vector under `F₀ + λ²F₂(t)` with an
//! adaptive Dormand–Prince 5(4) integrator.

use serde::Serialize;

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::generators::{tcl0, SystemParams, Tcl2Cache};
use crate::spectral::SpectralDensity;
use crate::steadystate::BlochVector;

/// Tolerance on the initial state lying inside the Bloch ball.
const BALL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolveOptions {
    pub t_max: f64,
    pub dt_out: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl EvolveOptions {
    pub fn new(t_max: f64, dt_out: f64) -> Self {
        Self { t_max, dt_out, rel_tol: 1e-8, abs_tol: 1e-12 }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("dynamics.t_max", self.t_max)?;
        ensure_positive("dynamics.dt_out", self.dt_out)?;
        ensure_positive("numerics.rel_tol", self.rel_tol)?;
        ensure_positive("numerics.abs_tol", self.abs_tol)?;
        if self.dt_out > self.t_max {
            return Err(Error::validation("dynamics.dt_out", "must not exceed t_max"));
        }
        if self.t_max / self.dt_out > 1e8 {
            return Err(Error::validation("dynamics.dt_out", "too many output samples"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryDiagnostics {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub max_bloch_norm: f64,
    pub max_trace_error: f64,
    /// Time after which the generator is constant to working precision.
    pub generator_settling_time: f64,
    /// `max - min` of each of `v₁, v₂, v₃` over the last tenth of the run.
    pub tail_drift: [f64; 3],
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub params: SystemParams,
    pub options: EvolveOptions,
    pub times: Vec<f64>,
    /// `(v₀, v₁, v₂, v₃)` at each time.
    pub states: Vec<[f64; 4]>,
    pub diagnostics: TrajectoryDiagnostics,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn bloch(&self, i: usize) -> BlochVector {
        let s = self.states[i];
        BlochVector::new(s[1], s[2], s[3])
    }

    pub fn last(&self) -> BlochVector {
        self.bloch(self.len() - 1)
    }

    /// Largest per-component spread of `v₁..v₃` over samples with `t ≥ t_from`.
    pub fn drift_since(&self, t_from: f64) -> [f64; 3] {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for (t, s) in self.times.iter().zip(&self.states) {
            if *t >= t_from {
                for k in 0..3 {
                    lo[k] = lo[k].min(s[k + 1]);
                    hi[k] = hi[k].max(s[k + 1]);
                }
            }
        }
        std::array::from_fn(|k| if hi[k] >= lo[k] { hi[k] - lo[k] } else { 0.0 })
    }
}

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

type State = [f64; 4];

fn axpy(y: &State, h: f64, ks: &[State], coeffs: &[f64]) -> State {
    let mut out = *y;
    for (k, c) in ks.iter().zip(coeffs) {
        if *c != 0.0 {
            for i in 0..4 {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

/// A linear time-dependent right-hand side `v̇ = M(t)·v`.
trait LinearRhs {
    fn matrix(&self, t: f64) -> Result<[[f64; 4]; 4]>;

    fn eval(&self, t: f64, v: &State) -> Result<State> {
        let m = self.matrix(t)?;
        Ok(std::array::from_fn(|i| (0..4).map(|j| m[i][j] * v[j]).sum()))
    }
}

struct TclRhs<'a> {
    free: [[f64; 4]; 4],
    coupling_sq: f64,
    cache: Option<&'a Tcl2Cache>,
}

impl LinearRhs for TclRhs<'_> {
    fn matrix(&self, t: f64) -> Result<[[f64; 4]; 4]> {
        let mut m = self.free;
        if let Some(cache) = self.cache {
            let g = cache.generator_at(t)?;
            for i in 0..4 {
                for j in 0..4 {
                    m[i][j] += self.coupling_sq * g.entries[i][j];
                }
            }
        }
        Ok(m)
    }
}

struct StepStats {
    accepted: usize,
    rejected: usize,
}

/// Integrate from `t0` to each output time in turn, landing on them exactly.
fn integrate_dopri<R: LinearRhs>(
    rhs: &R,
    y0: State,
    outputs: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    h_max: f64,
    mut observe: impl FnMut(f64, &State),
) -> Result<StepStats> {
    const SAFETY: f64 = 0.9;
    const MAX_STEPS: usize = 50_000_000;
    let mut t = 0.0;
    let mut y = y0;
    let mut k1 = rhs.eval(t, &y)?;
    let mut h = (h_max * 0.1).min(0.01);
    let mut stats = StepStats { accepted: 0, rejected: 0 };
    observe(t, &y);
    for &target in outputs.iter().skip_while(|&&x| x <= 0.0) {
        while t < target {
            if stats.accepted + stats.rejected > MAX_STEPS {
                return Err(Error::Convergence {
                    what: "time integration (step budget exhausted)".into(),
                    estimate: t,
                    error: f64::NAN,
                });
            }
            let remaining = target - t;
            let last = h >= remaining * (1.0 - 1e-12);
            let step = if last { remaining } else { h };
            let mut ks: Vec<State> = Vec::with_capacity(7);
            ks.push(k1);
            for s in 1..7 {
                let ys = axpy(&y, step, &ks, &A[s][..s]);
                ks.push(rhs.eval(t + C[s] * step, &ys)?);
            }
            let y5 = axpy(&y, step, &ks, &B5);
            let y4 = axpy(&y, step, &ks, &B4);
            let mut err: f64 = 0.0;
            for i in 0..4 {
                let sc = abs_tol + rel_tol * y[i].abs().max(y5[i].abs());
                err = err.max(((y5[i] - y4[i]) / sc).abs());
            }
            if !err.is_finite() {
                return Err(Error::Numerical(format!("non-finite state at t = {t}")));
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y5;
                k1 = ks[6];
                stats.accepted += 1;
                let grow = if err == 0.0 { 5.0 } else { (SAFETY * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || grow < 1.0 {
                    h = (step * grow).min(h_max);
                }
            } else {
                stats.rejected += 1;
                h = step * (SAFETY * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::Convergence {
                        what: "time integration (step size underflow)".into(),
                        estimate: t,
                        error: err,
                    });
                }
            }
        }
        observe(t, &y);
    }
    Ok(stats)
}

fn output_grid(t_max: f64, dt_out: f64) -> Vec<f64> {
    let n = (t_max / dt_out * (1.0 + 1e-12)).floor() as usize;
    let mut v: Vec<f64> = (0..=n).map(|k| k as f64 * dt_out).collect();
    if t_max - v[n] > 1e-9 * dt_out {
        v.push(t_max);
    }
    v
}

pub fn check_physical(v: &BlochVector) -> Result<()> {
    for (name, x) in [("v_init.v1", v.v1), ("v_init.v2", v.v2), ("v_init.v3", v.v3)] {
        ensure_finite(name, x)?;
    }
    if v.norm() > 1.0 + BALL_SLACK {
        return Err(Error::validation("dynamics.v_init", format!("|v| = {} lies outside the Bloch ball", v.norm())));
    }
    Ok(())
}

/// Evolve `v_init` under the second-order generator.
pub fn evolve(
    p: &SystemParams,
    sd: &dyn SpectralDensity,
    v_init: &BlochVector,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let cache = if p.coupling_sq > 0.0 { Some(Tcl2Cache::build(p, sd, opts.t_max)?) } else { None };
    evolve_with_cache(p, cache.as_ref(), v_init, opts)
}

/// Evolve using a prebuilt generator table (`None` when uncoupled).
pub fn evolve_with_cache(
    p: &SystemParams,
    cache: Option<&Tcl2Cache>,
    v_init: &BlochVector,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    p.validate()?;
    opts.validate()?;
    check_physical(v_init)?;
    if p.coupling_sq > 0.0 && cache.is_none() {
        return Err(Error::Config("a generator table is required for nonzero coupling".into()));
    }
    if let Some(c) = cache {
        if c.horizon() < opts.t_max * (1.0 - 1e-12) {
            return Err(Error::Config(format!(
                "generator table horizon {} is shorter than t_max = {}",
                c.horizon(),
                opts.t_max
            )));
        }
    }
    let rhs = TclRhs {
        free: tcl0(p)?.entries,
        coupling_sq: p.coupling_sq,
        cache: if p.coupling_sq > 0.0 { cache } else { None },
    };
    let outputs = output_grid(opts.t_max, opts.dt_out);
    let h_max = (0.5 / p.omega).min(opts.dt_out.max(1e-3 / p.omega));
    let mut times = Vec::with_capacity(outputs.len());
    let mut states = Vec::with_capacity(outputs.len());
    let stats = integrate_dopri(&rhs, v_init.augmented(), &outputs, opts.rel_tol, opts.abs_tol, h_max, |t, y| {
        times.push(t);
        states.push(*y);
    })?;

    let mut max_norm: f64 = 0.0;
    let mut max_trace: f64 = 0.0;
    for s in &states {
        max_norm = max_norm.max((s[1] * s[1] + s[2] * s[2] + s[3] * s[3]).sqrt());
        max_trace = max_trace.max((s[0] - 1.0).abs());
    }
    let mut warnings = Vec::new();
    if max_norm > 1.0 + 1e-6 {
        warnings.push(format!("trajectory leaves the Bloch ball (max |v| = {max_norm:.9})"));
    }
    if let Some(w) = cache.and_then(|c| c.warning()) {
        warnings.push(w.to_string());
    }
    let mut traj = Trajectory {
        params: *p,
        options: *opts,
        times,
        states,
        diagnostics: TrajectoryDiagnostics {
            accepted_steps: stats.accepted,
            rejected_steps: stats.rejected,
            max_bloch_norm: max_norm,
            max_trace_error: max_trace,
            generator_settling_time: cache.map_or(0.0, |c| c.settling_time()),
            tail_drift: [0.0; 3],
            warnings,
        },
    };
    traj.diagnostics.tail_drift = traj.drift_since(0.9 * opts.t_max);
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SteadyStateDetection {
    Converged { state: BlochVector, drift: [f64; 3] },
    NotConverged { drift: [f64; 3] },
}

impl SteadyStateDetection {
    pub fn state(&self) -> Option<BlochVector> {
        match self {
            Self::Converged { state, .. } => Some(*state),
            Self::NotConverged { .. } => None,
        }
    }
}

/// Average the last `window` time units if every component varies by less
/// than `tol` there.
pub fn detect_steady_state(traj: &Trajectory, window: f64, tol: f64) -> SteadyStateDetection {
    let Some(&t_end) = traj.times.last() else {
        return SteadyStateDetection::NotConverged { drift: [f64::INFINITY; 3] };
    };
    let t_from = t_end - window;
    if !(window > 0.0) || t_from < traj.times[0] {
        return SteadyStateDetection::NotConverged { drift: [f64::INFINITY; 3] };
    }
    let drift = traj.drift_since(t_from);
    if drift.iter().any(|d| !(*d < tol)) {
        return SteadyStateDetection::NotConverged { drift };
    }
    let mut sum = [0.0; 3];
    let mut n = 0usize;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        if *t >= t_from {
            for k in 0..3 {
                sum[k] += s[k + 1];
            }
            n += 1;
        }
    }
    let m = n as f64;
    SteadyStateDetection::Converged { state: BlochVector::new(sum[0] / m, sum[1] / m, sum[2] / m), drift }
}
