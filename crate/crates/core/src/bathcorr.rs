//! Bath two-point correlation functions
//! `η(t) = -∫₀^∞ J(ω) sin(ωt) dω` and `ν(t) = ∫₀^∞ f(ω) cos(ωt) dω`,
//! and their time integrals against the free-evolution factors that build
//! the time-dependent second-order generator.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{ensure_positive, Error, Result};
use crate::numerics::{
    integrate, integrate_segments, quad::integrate_oscillatory_tail, sum_matsubara, Domain, Oscillator, QuadConfig,
};
use crate::spectral::{DrudeParams, Envelope, SpectralDensity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Matsubara,
    Quadrature,
    SpectralSum,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationSample {
    pub t: f64,
    pub eta: f64,
    pub nu: f64,
    pub method: Method,
    pub warning: Option<String>,
}

/// Relative distance from a Matsubara frequency to the Drude cutoff below
/// which the analytic resonance limit replaces the generic term.
const RESONANCE_GAP: f64 = 1e-7;

/// `e^{-12·ln 10}`: correlations below this fraction of their initial size are dropped.
const DECAY_LOG: f64 = 27.631021115928547;

/// Gaussian envelopes are cut at `width·GAUSS_CUT`, where `e^{-x²/2} ≈ 10⁻¹⁶`.
const GAUSS_CUT: f64 = 8.6;

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("correlation time must be finite and >= 0, got {t}")))
    }
}

/// `η(t)`, dispatching to the closed form when one exists.
pub fn eta(sd: &dyn SpectralDensity, t: f64, cfg: &QuadConfig) -> Result<f64> {
    check_time(t)?;
    match sd.as_drude() {
        Some(d) => Ok(drude_eta(&d, t)),
        None => eta_quadrature(sd, t, cfg),
    }
}

/// `ν(t)`; even in `t`. Drude densities use the Matsubara expansion.
pub fn nu(sd: &dyn SpectralDensity, t: f64, beta: f64, cfg: &QuadConfig) -> Result<f64> {
    Ok(nu_with_warning(sd, t, beta, cfg)?.0)
}

fn nu_with_warning(sd: &dyn SpectralDensity, t: f64, beta: f64, cfg: &QuadConfig) -> Result<(f64, Option<String>)> {
    ensure_positive("beta", beta)?;
    let t = t.abs();
    check_time(t)?;
    match sd.as_drude() {
        Some(d) => drude_nu(&d, t, beta),
        None => Ok((nu_quadrature(sd, t, beta, cfg)?, None)),
    }
}

/// Both correlations at one time.
pub fn sample(sd: &dyn SpectralDensity, t: f64, beta: f64, cfg: &QuadConfig) -> Result<CorrelationSample> {
    let e = eta(sd, t, cfg)?;
    let (n, warning) = nu_with_warning(sd, t, beta, cfg)?;
    let method = if sd.as_drude().is_some() {
        Method::Matsubara
    } else {
        Method::Quadrature
    };
    Ok(CorrelationSample { t, eta: e, nu: n, method, warning })
}

/// `-½πγΛ² e^{-Λt}`; at `t = 0` this is the `0⁺` limit.
pub fn drude_eta(d: &DrudeParams, t: f64) -> f64 {
    -0.5 * PI * d.gamma * d.lambda_cut * d.lambda_cut * (-d.lambda_cut * t).exp()
}

fn matsubara(n: i64, beta: f64) -> f64 {
    2.0 * PI * n.unsigned_abs() as f64 / beta
}

/// Sum over Matsubara terms of `(g(Λ) - g(ν_n)) / (Λ² - ν_n²)` for a family
/// `g(a) = a·X(a)`, using `g'(Λ)/(2Λ)` when `ν_n` hits the cutoff.
fn drude_matsubara_sum<G, D>(d: &DrudeParams, beta: f64, g: G, g_prime: D, scale: f64) -> Result<(f64, bool)>
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let lam = d.lambda_cut;
    let g_lam = g(lam);
    let resonant = std::cell::Cell::new(false);
    let term = |n: i64| {
        let vn = matsubara(n, beta);
        if ((vn - lam) / lam).abs() < RESONANCE_GAP {
            resonant.set(true);
            g_prime(lam) / (2.0 * lam)
        } else {
            (g_lam - g(vn)) / (lam * lam - vn * vn)
        }
    };
    let s = sum_matsubara(term, 1, 1e-14 * scale.max(f64::MIN_POSITIVE))?;
    Ok((s, resonant.get()))
}

fn resonance_warning(d: &DrudeParams, beta: f64, hit: bool) -> Option<String> {
    hit.then(|| {
        format!(
            "beta*lambda_cut = {} is a multiple of 2*pi; the resonant Matsubara term was replaced by its limit",
            beta * d.lambda_cut
        )
    })
}

/// Matsubara expansion of `ν(t)` for the Drude density; diverges at `t = 0`.
pub fn drude_nu(d: &DrudeParams, t: f64, beta: f64) -> Result<(f64, Option<String>)> {
    ensure_positive("beta", beta)?;
    let t = t.abs();
    if t == 0.0 {
        return Err(Error::Domain(
            "nu(0) diverges logarithmically for the Drude density".into(),
        ));
    }
    let lam = d.lambda_cut;
    let c = PI * d.gamma * lam * lam / beta;
    // Term n is K_n = (Λe^{-Λt} - ν_n e^{-ν_n t})/(Λ² - ν_n²). Subtracting
    // e^{-ν_n t}/ν_n - Λe^{-Λt}/ν_n², whose sums are known, leaves
    // Λ²K_n/ν_n², which falls off at least as 1/n³ uniformly in t.
    let e_lam = (-lam * t).exp();
    let hit = std::cell::Cell::new(false);
    let term = |n: i64| {
        if n == 0 {
            return e_lam / lam;
        }
        let vn = matsubara(n, beta);
        let k = if ((vn - lam) / lam).abs() < RESONANCE_GAP {
            hit.set(true);
            (1.0 - lam * t) * e_lam / (2.0 * lam)
        } else {
            (lam * e_lam - vn * (-vn * t).exp()) / (lam * lam - vn * vn)
        };
        lam * lam * k / (vn * vn)
    };
    let remainder = sum_matsubara(term, 2, 1e-13 / lam)?;
    let x = 2.0 * PI * t / beta;
    // Σ_{n≠0} e^{-ν_n t}/ν_n and Σ_{n≠0} 1/ν_n²
    let log_part = -(beta / PI) * (-(-x).exp_m1()).ln();
    let inverse_square = beta * beta / 12.0;
    let total = remainder + log_part - lam * e_lam * inverse_square;
    Ok((c * total, resonance_warning(d, beta, hit.get())))
}

fn gaussian_cutoff(sd: &dyn SpectralDensity) -> Option<f64> {
    match sd.envelope() {
        Envelope::Gaussian { width } => Some(GAUSS_CUT * width),
        Envelope::Algebraic { .. } => None,
    }
}

/// Half-period breakpoints of `trig(tω)` on `[0, cut]`, plus the density's own scales.
fn oscillation_segments(sd: &dyn SpectralDensity, t: f64, cut: f64) -> Vec<(f64, f64)> {
    let mut pts = vec![0.0, sd.smoothness_scale().min(cut), cut];
    if t > 0.0 {
        let half = PI / t;
        let n = ((cut / half).ceil() as usize).min(200_000);
        pts.extend((1..n).map(|k| k as f64 * half));
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.windows(2).map(|w| (w[0], w[1])).filter(|(a, b)| b > a).collect()
}

/// `η(t)` by direct quadrature, for any density.
pub fn eta_quadrature(sd: &dyn SpectralDensity, t: f64, cfg: &QuadConfig) -> Result<f64> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(match sd.envelope() {
            Envelope::Algebraic { tail } => -0.5 * PI * tail,
            Envelope::Gaussian { .. } => 0.0,
        });
    }
    let h = |w: f64| sd.j(w) * (w * t).sin();
    let v = match gaussian_cutoff(sd) {
        Some(cut) => integrate_segments(h, &oscillation_segments(sd, t, cut), None, None, cfg)?.value,
        None => integrate_oscillatory_tail(|w| sd.j(w), 0.0, t, Oscillator::Sin, cfg)?,
    };
    Ok(-v)
}

/// `ν(t)` by direct quadrature, for any density.
pub fn nu_quadrature(sd: &dyn SpectralDensity, t: f64, beta: f64, cfg: &QuadConfig) -> Result<f64> {
    ensure_positive("beta", beta)?;
    let t = t.abs();
    check_time(t)?;
    let h = |w: f64| sd.f(w, beta) * (w * t).cos();
    match gaussian_cutoff(sd) {
        Some(cut) => Ok(integrate_segments(h, &oscillation_segments(sd, t, cut), None, None, cfg)?.value),
        None => {
            let tail = match sd.envelope() {
                Envelope::Algebraic { tail } => tail,
                Envelope::Gaussian { .. } => 0.0,
            };
            if t == 0.0 {
                if tail > 0.0 {
                    return Err(Error::Domain("nu(0) diverges for a density with a 1/omega tail".into()));
                }
                return Ok(integrate(|w: f64| sd.f(w, beta), Domain::From(0.0), cfg)?.value);
            }
            integrate_oscillatory_tail(|w| sd.f(w, beta), 0.0, t, Oscillator::Cos, cfg)
        }
    }
}

/// Time integrals `∫₀^t dτ` of the correlations against the free-evolution
/// factors at the system frequency `Ω`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct KernelIntegrals {
    /// `∫ η(τ) sin(Ωτ)`
    pub eta_sin: f64,
    /// `∫ η(τ) (cos(Ωτ) - 1)`
    pub eta_cos_minus_one: f64,
    /// `∫ ν(τ)`
    pub nu: f64,
    /// `∫ ν(τ) cos(Ωτ)`
    pub nu_cos: f64,
    /// `∫ ν(τ) sin(Ωτ)`
    pub nu_sin: f64,
}

impl KernelIntegrals {
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            self.eta_sin - other.eta_sin,
            self.eta_cos_minus_one - other.eta_cos_minus_one,
            self.nu - other.nu,
            self.nu_cos - other.nu_cos,
            self.nu_sin - other.nu_sin,
        ]
        .iter()
        .fold(0.0, |m, x| m.max(x.abs()))
    }

    fn lerp4(samples: [&Self; 4], w: [f64; 4]) -> Self {
        let mut out = Self::default();
        for (s, c) in samples.iter().zip(w) {
            out.eta_sin += c * s.eta_sin;
            out.eta_cos_minus_one += c * s.eta_cos_minus_one;
            out.nu += c * s.nu;
            out.nu_cos += c * s.nu_cos;
            out.nu_sin += c * s.nu_sin;
        }
        out
    }
}

/// How the kernel integrals are evaluated for a density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelRoute {
    /// Term-wise exact time integrals of the Drude Matsubara expansion.
    Matsubara,
    /// Trapezoid sum over frequency of the exact time integrals of each mode;
    /// spectrally accurate for Gaussian-bounded densities.
    SpectralSum,
}

pub fn kernel_route(sd: &dyn SpectralDensity) -> Result<KernelRoute> {
    if sd.as_drude().is_some() {
        Ok(KernelRoute::Matsubara)
    } else if matches!(sd.envelope(), Envelope::Gaussian { .. }) {
        Ok(KernelRoute::SpectralSum)
    } else {
        Err(Error::Config(format!(
            "time-dependent generators need a Drude or Gaussian-bounded density; '{}' has an algebraic tail",
            sd.tag()
        )))
    }
}

/// Time after which the correlations (and hence the kernel integrals) have
/// settled to about 10⁻¹² of their initial size.
pub fn decay_horizon(sd: &dyn SpectralDensity, beta: f64) -> f64 {
    let thermal = 2.0 * PI / beta;
    match sd.as_drude() {
        // the resonant case decays as τ e^{-Λτ}; pad by half
        Some(d) => 1.5 * DECAY_LOG / d.lambda_cut.min(thermal),
        None => 2.0 * (sd.correlation_time() + DECAY_LOG / thermal),
    }
}

/// Kernel integrals at time `t`, plus a warning if a resonant limit was used.
pub fn kernel_integrals(
    sd: &dyn SpectralDensity,
    omega: f64,
    beta: f64,
    t: f64,
) -> Result<(KernelIntegrals, Option<String>)> {
    ensure_positive("omega", omega)?;
    ensure_positive("beta", beta)?;
    check_time(t)?;
    if t == 0.0 {
        return Ok((KernelIntegrals::default(), None));
    }
    match kernel_route(sd)? {
        KernelRoute::Matsubara => {
            let d = sd.as_drude().expect("route checked");
            drude_kernels(&d, omega, beta, t)
        }
        KernelRoute::SpectralSum => {
            let width = match sd.envelope() {
                Envelope::Gaussian { width } => width,
                Envelope::Algebraic { .. } => unreachable!("route checked"),
            };
            let horizon = decay_horizon(sd, beta);
            let grid = SpectralGrid::new(sd, beta, width, t + horizon);
            Ok((grid.kernels(omega, t), None))
        }
    }
}

/// `∫₀^t e^{-zτ} dτ` for complex `z = a - iΩ` and its `a`-derivative.
fn exp_integral(z: Complex64, t: f64) -> (Complex64, Complex64) {
    let e = (-z * t).exp();
    if z.norm() * t < 1e-8 {
        let v = Complex64::new(t, 0.0) - z * (0.5 * t * t);
        let dv = Complex64::new(-0.5 * t * t, 0.0);
        return (v, dv);
    }
    let v = (1.0 - e) / z;
    let dv = (t * e * z - (1.0 - e)) / (z * z);
    (v, dv)
}

fn drude_kernels(d: &DrudeParams, omega: f64, beta: f64, t: f64) -> Result<(KernelIntegrals, Option<String>)> {
    let lam = d.lambda_cut;
    let eta_amp = -0.5 * PI * d.gamma * lam * lam;
    let rot = |a: f64| exp_integral(Complex64::new(a, -omega), t);
    let real_int = |a: f64| exp_integral(Complex64::new(a, 0.0), t).0.re;
    let (z_lam, _) = rot(lam);
    let eta_sin = eta_amp * z_lam.im;
    let eta_cos_minus_one = eta_amp * (z_lam.re - real_int(lam));

    let c = PI * d.gamma * lam * lam / beta;
    let scale = 1.0 / lam + t;
    let (nu, h1) = drude_matsubara_sum(
        d,
        beta,
        |a| a * real_int(a),
        |a| {
            let (v, dv) = exp_integral(Complex64::new(a, 0.0), t);
            v.re + a * dv.re
        },
        scale,
    )?;
    let (nu_cos, h2) = drude_matsubara_sum(
        d,
        beta,
        |a| a * rot(a).0.re,
        |a| {
            let (v, dv) = rot(a);
            v.re + a * dv.re
        },
        scale,
    )?;
    let (nu_sin, h3) = drude_matsubara_sum(
        d,
        beta,
        |a| a * rot(a).0.im,
        |a| {
            let (v, dv) = rot(a);
            v.im + a * dv.im
        },
        scale,
    )?;
    let k = KernelIntegrals {
        eta_sin,
        eta_cos_minus_one,
        nu: c * nu,
        nu_cos: c * nu_cos,
        nu_sin: c * nu_sin,
    };
    Ok((k, resonance_warning(d, beta, h1 || h2 || h3)))
}

/// `sin(xt)/x`
fn sinc_t(x: f64, t: f64) -> f64 {
    let y = x * t;
    if y.abs() < 1e-4 {
        t * (1.0 - y * y / 6.0)
    } else {
        y.sin() / x
    }
}

/// `(1 - cos(xt))/x`
fn versin_t(x: f64, t: f64) -> f64 {
    let y = 0.5 * x * t;
    if y.abs() < 1e-4 {
        0.5 * x * t * t * (1.0 - y * y / 3.0)
    } else {
        2.0 * y.sin() * y.sin() / x
    }
}

/// Trapezoid nodes on `[0, cut]` for even integrands; accurate for kernels
/// whose time content stays below `2π/Δω`.
#[derive(Debug, Clone)]
pub(crate) struct SpectralGrid {
    nodes: Vec<(f64, f64, f64, f64)>, // (ω, weight, J(ω), f(ω))
}

impl SpectralGrid {
    pub(crate) fn new(sd: &dyn SpectralDensity, beta: f64, width: f64, max_time: f64) -> Self {
        let cut = GAUSS_CUT * width;
        // aliasing images sit at multiples of 2π/Δω; keep them beyond twice the time span
        let mut dw = 2.0 * PI / (2.0 * max_time);
        dw = dw.min(0.05 * sd.smoothness_scale()).min(0.05 * width);
        let n = (cut / dw).ceil() as usize;
        let dw = cut / n as f64;
        let nodes = (0..=n)
            .map(|k| {
                let w = k as f64 * dw;
                let weight = if k == 0 || k == n { 0.5 * dw } else { dw };
                (w, weight, sd.j(w), sd.f(w, beta))
            })
            .collect();
        Self { nodes }
    }

    pub(crate) fn kernels(&self, omega: f64, t: f64) -> KernelIntegrals {
        let mut k = KernelIntegrals::default();
        for &(w, wt, j, f) in &self.nodes {
            let s_minus = sinc_t(w - omega, t);
            let s_plus = sinc_t(w + omega, t);
            let c_minus = versin_t(w - omega, t);
            let c_plus = versin_t(w + omega, t);
            k.eta_sin -= wt * j * 0.5 * (s_minus - s_plus);
            k.eta_cos_minus_one -= wt * j * (0.5 * (c_plus + c_minus) - versin_t(w, t));
            k.nu += wt * f * sinc_t(w, t);
            k.nu_cos += wt * f * 0.5 * (s_minus + s_plus);
            k.nu_sin += wt * f * 0.5 * (versin_t(omega + w, t) + versin_t(omega - w, t));
        }
        k
    }
}

/// Kernel integrals tabulated on a uniform time grid up to the decay
/// horizon, cubically interpolated in between and held constant after it.
#[derive(Debug, Clone)]
pub struct KernelCache {
    step: f64,
    values: Vec<KernelIntegrals>,
    horizon: f64,
    pub route: KernelRoute,
    pub warning: Option<String>,
}

impl KernelCache {
    pub fn build(sd: &dyn SpectralDensity, omega: f64, beta: f64, step: f64) -> Result<Self> {
        ensure_positive("omega", omega)?;
        ensure_positive("beta", beta)?;
        ensure_positive("cache step", step)?;
        let route = kernel_route(sd)?;
        let horizon = decay_horizon(sd, beta);
        let n = (horizon / step).ceil() as usize + 3;
        let times: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
        use rayon::prelude::*;
        let (values, warning) = match route {
            KernelRoute::Matsubara => {
                let d = sd.as_drude().expect("route checked");
                let out: Result<Vec<_>> = times
                    .par_iter()
                    .map(|&t| {
                        if t == 0.0 {
                            Ok((KernelIntegrals::default(), None))
                        } else {
                            drude_kernels(&d, omega, beta, t)
                        }
                    })
                    .collect();
                let out = out?;
                let warning = out.iter().find_map(|(_, w)| w.clone());
                (out.into_iter().map(|(k, _)| k).collect(), warning)
            }
            KernelRoute::SpectralSum => {
                let width = match sd.envelope() {
                    Envelope::Gaussian { width } => width,
                    Envelope::Algebraic { .. } => unreachable!("route checked"),
                };
                let grid = SpectralGrid::new(sd, beta, width, times[n] + horizon);
                let values: Vec<_> = times.par_iter().map(|&t| grid.kernels(omega, t)).collect();
                (values, None)
            }
        };
        Ok(Self { step, values, horizon, route, warning })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Interpolated kernel integrals; constant beyond the horizon.
    pub fn at(&self, t: f64) -> Result<KernelIntegrals> {
        check_time(t)?;
        let last = self.values.len() - 1;
        let x = t / self.step;
        if x >= (last - 1) as f64 {
            // correlations have decayed: the integrals no longer change
            return Ok(self.values[last]);
        }
        let i = (x.floor() as usize).clamp(1, last - 2);
        let base = i - 1;
        let u = x - base as f64; // nodes at 0, 1, 2, 3
        let w = [
            -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0,
            u * (u - 2.0) * (u - 3.0) / 2.0,
            -u * (u - 1.0) * (u - 3.0) / 2.0,
            u * (u - 1.0) * (u - 2.0) / 6.0,
        ];
        Ok(KernelIntegrals::lerp4(
            [&self.values[base], &self.values[base + 1], &self.values[base + 2], &self.values[base + 3]],
            w,
        ))
    }
}
