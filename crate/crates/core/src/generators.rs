//! Generator matrices acting on the Bloch 4-vector `(1, v₁, v₂, v₃)`:
//! the free part, the second-order generator at finite time and in the
//! long-time limit, and the two long-time fourth-order coefficients that
//! enter the steady-state population.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bathcorr::{kernel_integrals, KernelCache, KernelIntegrals};
use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::numerics::{
    digamma, laurent_fit, pv_integral_above_with_breaks, trigamma, Domain, PoleSpec, PvResult, QuadConfig,
};
use crate::spectral::SpectralDensity;

/// Qubit `H = Ωσ₃/2` coupled through `A = a₃σ₃ - a₁σ₁` to a thermal bath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega: f64,
    pub a1: f64,
    pub a3: f64,
    pub beta: f64,
    /// Overall coupling strength multiplying every second-order quantity.
    pub coupling_sq: f64,
}

impl SystemParams {
    pub fn new(omega: f64, a1: f64, a3: f64, beta: f64, coupling_sq: f64) -> Result<Self> {
        let p = Self { omega, a1, a3, beta, coupling_sq };
        p.validate()?;
        Ok(p)
    }

    /// Double quantum dot with detuning `ε` and tunnelling `t_c`:
    /// `Ω = √(ε² + 4t_c²)`, `a₁ = 2t_c/Ω`, `a₃ = ε/Ω`.
    pub fn from_dqd(epsilon: f64, t_c: f64, beta: f64, coupling_sq: f64) -> Result<Self> {
        ensure_finite("system.epsilon", epsilon)?;
        ensure_finite("system.t_c", t_c)?;
        let omega = epsilon.hypot(2.0 * t_c);
        if !(omega > 0.0) {
            return Err(Error::validation("system", "epsilon and t_c cannot both be zero"));
        }
        Self::new(omega, 2.0 * t_c / omega, epsilon / omega, beta, coupling_sq)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("system.omega", self.omega)?;
        ensure_finite("system.a1", self.a1)?;
        ensure_finite("system.a3", self.a3)?;
        if self.a1 == 0.0 && self.a3 == 0.0 {
            return Err(Error::validation("system.a1/a3", "coupling vector (a1, a3) must be nonzero"));
        }
        ensure_positive("bath.beta", self.beta)?;
        ensure_finite("coupling.coupling_sq", self.coupling_sq)?;
        if self.coupling_sq < 0.0 {
            return Err(Error::validation("coupling.coupling_sq", "must be >= 0"));
        }
        Ok(())
    }

    /// Window half-width used when fitting the local behaviour at real poles.
    pub(crate) fn pole_step(&self, sd: &dyn SpectralDensity) -> f64 {
        0.02 * self.omega.min(sd.smoothness_scale()).min(2.0 * PI / self.beta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMatrix {
    pub order: u8,
    pub entries: [[f64; 4]; 4],
    /// `None` for the long-time limit.
    pub time: Option<f64>,
}

impl GeneratorMatrix {
    pub fn zero(order: u8, time: Option<f64>) -> Self {
        Self { order, entries: [[0.0; 4]; 4], time }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row][col]
    }

    pub fn apply(&self, v: &[f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (i, row) in self.entries.iter().enumerate() {
            out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// `self + scale·other`
    pub fn add_scaled(&self, other: &Self, scale: f64) -> [[f64; 4]; 4] {
        let mut m = self.entries;
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] += scale * other.entries[i][j];
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                d = d.max((self.entries[i][j] - other.entries[i][j]).abs());
            }
        }
        d
    }
}

/// The free generator: precession at frequency `Ω`.
pub fn tcl0(p: &SystemParams) -> Result<GeneratorMatrix> {
    p.validate()?;
    let mut g = GeneratorMatrix::zero(0, None);
    g.entries[1][2] = -p.omega;
    g.entries[2][1] = p.omega;
    Ok(g)
}

fn integration_breaks(p: &SystemParams, sd: &dyn SpectralDensity) -> Vec<f64> {
    let s = sd.smoothness_scale();
    let w = sd.frequency_scale();
    let mut v = vec![0.5 * p.omega, 2.0 * p.omega, s, 2.0 * s, w, 4.0 * w, 20.0 * w.max(p.omega)];
    v.retain(|x| x.is_finite() && *x > 0.0 && (*x - p.omega).abs() > 0.2 * p.omega);
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Principal value of `∫₀^∞ g(ω)/(ω² - Ω²) dω`.
fn pv_half_line<G: Fn(f64) -> f64>(
    g: G,
    p: &SystemParams,
    sd: &dyn SpectralDensity,
    cfg: &QuadConfig,
) -> Result<f64> {
    let o2 = p.omega * p.omega;
    let r = pv_integral_above_with_breaks(
        |w| g(w) / (w * w - o2),
        Domain::From(0.0),
        &[PoleSpec::fit(p.omega).with_step(p.pole_step(sd))],
        &integration_breaks(p, sd),
        cfg,
    )?;
    Ok(r.principal)
}

/// Long-time limit of the second-order generator.
pub fn tcl2_asymptotic(p: &SystemParams, sd: &dyn SpectralDensity, cfg: &QuadConfig) -> Result<GeneratorMatrix> {
    p.validate()?;
    let (a1, a3, om, beta) = (p.a1, p.a3, p.omega, p.beta);
    let j_om = sd.j(om);
    let f_om = sd.f(om, beta);
    let f_0 = sd.f(0.0, beta);

    let mut g = GeneratorMatrix::zero(2, None);
    let e = &mut g.entries;
    e[1][0] = -2.0 * PI * a1 * a3 * j_om;
    e[1][1] = -2.0 * PI * a3 * a3 * f_0;
    e[1][3] = -2.0 * PI * a1 * a3 * f_om;
    e[3][0] = -2.0 * PI * a1 * a1 * j_om;
    e[3][1] = -2.0 * PI * a1 * a3 * f_0;
    e[3][3] = -2.0 * PI * a1 * a1 * f_om;
    e[2][2] = -2.0 * PI * a1 * a1 * f_om - 2.0 * PI * a3 * a3 * f_0;

    if a1 != 0.0 {
        let pv_f = pv_half_line(|w| sd.f(w, beta), p, sd, cfg).map_err(|err| err.context("F21/F23"))?;
        e[2][1] = -4.0 * a1 * a1 * om * pv_f;
        e[2][3] = 4.0 * a1 * a3 * om * pv_f;
        if a3 != 0.0 {
            let pv_j = pv_half_line(|w| sd.j_over_omega(w), p, sd, cfg).map_err(|err| err.context("F20"))?;
            e[2][0] = 4.0 * a1 * a3 * om * om * pv_j;
        }
    }
    Ok(g)
}

/// Second-order generator at time `t` assembled from the kernel integrals.
pub fn tcl2_from_kernels(p: &SystemParams, k: &KernelIntegrals, t: f64) -> GeneratorMatrix {
    let (a1, a3) = (p.a1, p.a3);
    let mut g = GeneratorMatrix::zero(2, Some(t));
    let e = &mut g.entries;
    e[1][0] = 4.0 * a1 * a3 * k.eta_sin;
    e[1][1] = -4.0 * a3 * a3 * k.nu;
    e[1][3] = -4.0 * a1 * a3 * k.nu_cos;
    e[2][0] = -4.0 * a1 * a3 * k.eta_cos_minus_one;
    e[2][1] = 4.0 * a1 * a1 * k.nu_sin;
    e[2][2] = -4.0 * (a1 * a1 * k.nu_cos + a3 * a3 * k.nu);
    e[2][3] = -4.0 * a1 * a3 * k.nu_sin;
    e[3][0] = 4.0 * a1 * a1 * k.eta_sin;
    e[3][1] = -4.0 * a1 * a3 * k.nu;
    e[3][3] = -4.0 * a1 * a1 * k.nu_cos;
    g
}

/// Second-order generator at time `t`, evaluated directly (no cache).
pub fn tcl2_at_time(p: &SystemParams, sd: &dyn SpectralDensity, t: f64) -> Result<GeneratorMatrix> {
    p.validate()?;
    let (k, _) = kernel_integrals(sd, p.omega, p.beta, t)?;
    Ok(tcl2_from_kernels(p, &k, t))
}

/// Tabulated second-order generator for time stepping.
#[derive(Debug, Clone)]
pub struct Tcl2Cache {
    params: SystemParams,
    kernels: KernelCache,
    horizon: f64,
}

impl Tcl2Cache {
    /// Tabulate up to `horizon`, on a grid no coarser than `0.02/max(Ω, ω_scale)`.
    pub fn build(p: &SystemParams, sd: &dyn SpectralDensity, horizon: f64) -> Result<Self> {
        p.validate()?;
        ensure_positive("dynamics.t_max", horizon)?;
        let step = 0.02 / p.omega.max(sd.frequency_scale());
        let kernels = KernelCache::build(sd, p.omega, p.beta, step)?;
        Ok(Self { params: *p, kernels, horizon })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Time after which the generator is constant to working precision.
    pub fn settling_time(&self) -> f64 {
        self.kernels.horizon()
    }

    pub fn step(&self) -> f64 {
        self.kernels.step()
    }

    pub fn warning(&self) -> Option<&str> {
        self.kernels.warning.as_deref()
    }

    pub fn generator_at(&self, t: f64) -> Result<GeneratorMatrix> {
        if t > self.horizon * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "generator requested at t = {t} beyond the cache horizon {}",
                self.horizon
            )));
        }
        Ok(tcl2_from_kernels(&self.params, &self.kernels.at(t)?, t))
    }
}

/// Constants of the fourth-order integrands.
struct Tcl4Inputs {
    om: f64,
    a1: f64,
    a3: f64,
    f_om: f64,
    f_0: f64,
    fp_om: f64,
    j_om: f64,
    jp_om: f64,
}

impl Tcl4Inputs {
    fn new(p: &SystemParams, sd: &dyn SpectralDensity) -> Self {
        Self {
            om: p.omega,
            a1: p.a1,
            a3: p.a3,
            f_om: sd.f(p.omega, p.beta),
            f_0: sd.f(0.0, p.beta),
            fp_om: sd.f_prime(p.omega, p.beta),
            j_om: sd.j(p.omega),
            jp_om: sd.j_prime(p.omega),
        }
    }
}

fn tcl4_integral<H: Fn(f64) -> f64>(
    h: H,
    p: &SystemParams,
    sd: &dyn SpectralDensity,
    cfg: &QuadConfig,
    what: &str,
) -> Result<PvResult> {
    let step = p.pole_step(sd);
    let poles = [
        PoleSpec::fit(-p.omega).with_step(step),
        PoleSpec::fit(0.0).with_step(step),
        PoleSpec::fit(p.omega).with_step(step),
    ];
    let half = integration_breaks(p, sd);
    let mut breaks: Vec<f64> = half.iter().map(|x| -x).collect();
    breaks.extend(half);
    let cfg = cfg.with_rel_tol(cfg.rel_tol.min(1e-10));
    pv_integral_above_with_breaks(h, Domain::Whole, &poles, &breaks, &cfg).map_err(|e| e.context(what))
}

/// Imaginary parts must cancel between the poles at `±Ω`.
const REALITY_TOL: f64 = 1e-8;

/// Detailed result of a fourth-order coefficient, kept for diagnostics.
pub fn tcl4_f33_detailed(p: &SystemParams, sd: &dyn SpectralDensity, cfg: &QuadConfig) -> Result<Option<PvResult>> {
    p.validate()?;
    if p.a1 == 0.0 {
        return Ok(None);
    }
    let c = Tcl4Inputs::new(p, sd);
    let beta = p.beta;
    let (om, a1, a3) = (c.om, c.a1, c.a3);
    let h = |w: f64| {
        let d = w * w - om * om;
        let fw = sd.f(w, beta);
        let first = 4.0 * PI * a1.powi(4) * om * fw / (d * d) * (d * c.fp_om + 2.0 * om * c.f_om);
        let second = if a3 == 0.0 {
            0.0
        } else {
            let q = w * d;
            let wp = w + om;
            let wm = w - om;
            let inner = fw
                * (4.0 * c.f_om * d * d - 2.0 * w * om * wp * wp * sd.f(wm, beta)
                    + w * wm * (2.0 * om * wm * sd.f(wp, beta) - 4.0 * c.f_0 * w * wp))
                - 2.0 * om * sd.j(w) * d * (wp * sd.j(wm) - wm * sd.j(wp));
            2.0 * PI * a1 * a1 * a3 * a3 / (q * q) * inner
        };
        0.5 * (first + second)
    };
    tcl4_integral(h, p, sd, cfg, "F33 (fourth order)").map(Some)
}

pub fn tcl4_f30_detailed(p: &SystemParams, sd: &dyn SpectralDensity, cfg: &QuadConfig) -> Result<Option<PvResult>> {
    p.validate()?;
    if p.a1 == 0.0 {
        return Ok(None);
    }
    let c = Tcl4Inputs::new(p, sd);
    let beta = p.beta;
    let (om, a1, a3) = (c.om, c.a1, c.a3);
    let h = |w: f64| {
        let d = w * w - om * om;
        let fw = sd.f(w, beta);
        let jw = sd.j(w);
        let first = 4.0 * PI * a1.powi(4) / (d * d)
            * (fw * (om * d * c.jp_om + c.j_om * (w * w + 3.0 * om * om)) - 2.0 * w * om * c.f_om * jw);
        let second = if a3 == 0.0 {
            0.0
        } else {
            let q = w * d;
            let wp = w + om;
            let wm = w - om;
            let inner = -2.0 * c.f_0 * w * om * jw * d
                + fw * (wm * wm * (2.0 * c.j_om * wp * wp - om * om * sd.j(wp)) + om * om * wp * wp * sd.j(wm));
            4.0 * PI * a1 * a1 * a3 * a3 / (q * q) * inner
        };
        0.5 * (first + second)
    };
    tcl4_integral(h, p, sd, cfg, "F30 (fourth order)").map(Some)
}

/// Long-time fourth-order coefficient `F₃₃`; zero when `a₁ = 0`.
pub fn tcl4_f33(p: &SystemParams, sd: &dyn SpectralDensity, cfg: &QuadConfig) -> Result<f64> {
    match tcl4_f33_detailed(p, sd, cfg)? {
        Some(r) => r.expect_real("F33 (fourth order)", REALITY_TOL),
        None => Ok(0.0),
    }
}

/// Long-time fourth-order coefficient `F₃₀`; zero when `a₁ = 0`.
pub fn tcl4_f30(p: &SystemParams, sd: &dyn SpectralDensity, cfg: &QuadConfig) -> Result<f64> {
    match tcl4_f30_detailed(p, sd, cfg)? {
        Some(r) => r.expect_real("F30 (fourth order)", REALITY_TOL),
        None => Ok(0.0),
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn expect_real(z: Complex64, what: &str) -> Result<f64> {
    if z.im.abs() <= 1e-9 * z.re.abs().max(1e-300) {
        Ok(z.re)
    } else {
        Err(Error::Numerical(format!("{what}: closed form is not real ({z})")))
    }
}

/// Closed forms of the fourth-order coefficients for the Drude density at
/// `a₃ = 0`, `a₁ = 1`, returned as `(F₃₀, F₃₃)`.
pub fn drude_tcl4_closed_form(gamma: f64, lambda_cut: f64, omega: f64, beta: f64) -> Result<(f64, f64)> {
    ensure_positive("gamma", gamma)?;
    ensure_positive("lambda_cut", lambda_cut)?;
    ensure_positive("omega", omega)?;
    ensure_positive("beta", beta)?;
    let (g, l, o, b) = (gamma, lambda_cut, omega, beta);
    let i = c(0.0, 1.0);
    let zp = c(0.0, b * o / (2.0 * PI));
    let zm = -zp;
    let one = c(1.0, 0.0);
    let l2 = l * l;
    let o2 = o * o;
    let s = l2 + o2;

    let psi_l1 = digamma(c(b * l / (2.0 * PI) + 1.0, 0.0))?;
    let psi_1m = digamma(one + zm)?;
    let psi_1p = digamma(one + zp)?;
    let tri_1m = trigamma(one + zm)?;
    let tri_1p = trigamma(one + zp)?;
    let bracket = 2.0 * PI * (l2 - i * l * o - 2.0 * o2) * psi_1m + 2.0 * PI * (l2 + i * l * o - 2.0 * o2) * psi_1p
        - i * b * o * s * (tri_1m - tri_1p);
    let f30 = 2.0 * g * g * l2 * l * o / (b * s * s * s)
        * (4.0 * PI * b * l * (l2 - 2.0 * o2) * psi_l1 + 8.0 * PI * PI * o2 - b * l * bracket);

    let psi_m = digamma(zm)?;
    let psi_p = digamma(zp)?;
    let tri_m = trigamma(zm)?;
    let tri_p = trigamma(zp)?;
    let psi_l = digamma(c(b * l / (2.0 * PI), 0.0))?;
    let csch = 1.0 / (0.5 * b * o).sinh();
    let lp = c(l, o);
    let lm = c(l, -o);
    let b2 = b * b;
    let body = -2.0 * i * PI * b2 * l * (l2 - 3.0 * o2) * psi_m * psi_m
        + 2.0 * i * PI * b2 * l * (l2 - 3.0 * o2) * psi_p * psi_p
        + 32.0 * PI.powi(3) * o
        + 2.0 * b * psi_m * (2.0 * i * PI * PI * lp * c(l, 3.0 * o) - b2 * l * o * s * tri_m)
        - 2.0 * i * PI * b2 * lm * lp * (lp * tri_m - lm * tri_p)
        + 2.0 * b * psi_p * (-l * b2 * o * s * tri_p - 2.0 * i * PI * PI * lm * c(l, -3.0 * o))
        - 2.0 * PI * PI * b2 * l * psi_l * csch * csch * (b * o * s - (l2 - 3.0 * o2) * (b * o).sinh());
    let f33 = g * g * l2 * l * o / (PI * b2 * s * s * s) * body;

    Ok((expect_real(f30, "Drude F30")?, expect_real(f33, "Drude F33")?))
}

/// Closed form of the second-order `F₂₁` for the Drude density at `a₁ = 1`.
pub fn drude_tcl2_f21(gamma: f64, lambda_cut: f64, omega: f64, beta: f64) -> Result<f64> {
    let (g, l, o, b) = (gamma, lambda_cut, omega, beta);
    let zp = c(1.0, b * o / (2.0 * PI));
    let zm = c(1.0, -b * o / (2.0 * PI));
    let sum = -2.0 * digamma(c(b * l / (2.0 * PI) + 1.0, 0.0))? + digamma(zm)? + digamma(zp)?;
    let v = 2.0 * g * l * o / (b * (l * l + o * o)) * (2.0 * PI + b * l * sum);
    expect_real(v, "Drude F21")
}

/// Value of the single divergent contribution that appears when the
/// fourth-order time and frequency integrals are taken term by term in the
/// wrong order, evaluated by residues at the double poles `ω = ±Ω` of the
/// two frequency integrands. It grows like `π² f(Ω)² t / 4`.
pub fn mixed_order_divergent_term(p: &SystemParams, sd: &dyn SpectralDensity, t: f64) -> Result<f64> {
    p.validate()?;
    ensure_finite("t", t)?;
    let (om, beta) = (p.omega, p.beta);
    let sq = |w: f64| {
        let d = om * om - w * w;
        4.0 * d * d
    };
    let p_fn = |w: f64| sd.f(w, beta).powi(2) / sq(w);
    let q_fn = |w: f64| w * sd.f(w, beta).powi(2) / sq(w);
    let step = p.pole_step(sd);
    let (ct, st) = ((t * om).cos(), (t * om).sin());
    let i = c(0.0, 1.0);
    let mut res_a = c(0.0, 0.0);
    let mut res_b = c(0.0, 0.0);
    for pole in [-om, om] {
        let lp = laurent_fit(&p_fn, pole, step)?;
        let lq = laurent_fit(&q_fn, pole, step)?;
        // Laurent coefficients of the non-exponential factors
        let a2 = i * om * om * ct * lp.double - om * st * lq.double;
        let a1 = i * om * om * ct * lp.simple - om * st * lq.simple;
        let b2 = om * st * lq.double + i * om * om * ct * lp.double;
        let b1 = om * st * lq.simple + i * om * om * ct * lp.simple;
        // Res[e^{∓itω} X, p] = e^{∓itp} (x₁ ∓ i t x₂)
        res_a += (-i * t * pole).exp() * (a1 - i * t * a2);
        res_b += (i * t * pole).exp() * (b1 + i * t * b2);
    }
    let extra = PI * PI * (res_a - res_b);
    if extra.im.abs() > 1e-8 * (1.0 + extra.re.abs()) {
        return Err(Error::Numerical(format!("mixed-order term is not real: {extra}")));
    }
    Ok(extra.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{DqdSincParams, DrudeParams};
    use approx::assert_relative_eq;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    fn drude() -> DrudeParams {
        DrudeParams::new(1.0, 5.0).unwrap()
    }

    #[test]
    fn free_generator() {
        let p = SystemParams::new(1.0, 0.5, 0.5, 1.0, 0.0).unwrap();
        let g = tcl0(&p).unwrap();
        assert_eq!(g.get(1, 2), -1.0);
        assert_eq!(g.get(2, 1), 1.0);
        assert_eq!(g.apply(&[1.0, 0.0, 0.0, -0.3]), [0.0; 4]);
    }

    #[test]
    fn zero_splitting_is_rejected() {
        assert!(matches!(SystemParams::new(0.0, 1.0, 0.0, 1.0, 0.0), Err(Error::Validation { .. })));
        assert!(SystemParams::new(1.0, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(SystemParams::new(1.0, 1.0, 0.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn dqd_mapping() {
        let p = SystemParams::from_dqd(1.0, 0.5, 1.0, 0.0144).unwrap();
        assert_relative_eq!(p.omega, 2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(p.a1, 1.0 / 2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(p.a3, 1.0 / 2f64.sqrt(), max_relative = 1e-15);
        let q = SystemParams::from_dqd(0.0, 0.5, 1.0, 0.0144).unwrap();
        assert_eq!((q.omega, q.a1, q.a3), (1.0, 1.0, 0.0));
    }

    #[test]
    fn drude_f10_value() {
        let p = SystemParams::new(1.0, 0.5, 0.5, 1.0, 1.0).unwrap();
        let g = tcl2_asymptotic(&p, &drude(), &cfg()).unwrap();
        // -2π·¼·(25/26)
        assert_relative_eq!(g.get(1, 0), -2.0 * PI * 0.25 * 25.0 / 26.0, max_relative = 1e-14);
        assert_relative_eq!(g.get(1, 0), -1.5103810834566, max_relative = 1e-12);
    }

    #[test]
    fn a1_zero_kills_a1_weighted_entries() {
        let p = SystemParams::new(1.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        let g = tcl2_asymptotic(&p, &drude(), &cfg()).unwrap();
        for (r, c) in [(1, 0), (1, 3), (2, 0), (2, 1), (2, 3), (3, 0), (3, 1), (3, 3)] {
            assert_eq!(g.get(r, c), 0.0, "F{r}{c}");
        }
        assert!(g.get(1, 1) < 0.0);
    }

    #[test]
    fn rows_are_proportional() {
        let p = SystemParams::new(1.3, 0.6, 0.8, 0.7, 1.0).unwrap();
        let g = tcl2_asymptotic(&p, &drude(), &cfg()).unwrap();
        for k in 0..4 {
            assert!((p.a3 * g.get(3, k) - p.a1 * g.get(1, k)).abs() <= 1e-14 * (1.0 + g.get(1, k).abs()));
            assert_eq!(g.get(0, k), 0.0);
        }
        let gt = tcl2_at_time(&p, &drude(), 0.9).unwrap();
        for k in 0..4 {
            assert!((p.a3 * gt.get(3, k) - p.a1 * gt.get(1, k)).abs() <= 1e-14 * (1.0 + gt.get(1, k).abs()));
        }
    }

    #[test]
    fn drude_f21_closed_form() {
        for (lam, beta) in [(5.0, 1.0), (2.0, 0.5), (10.0, 2.0)] {
            let d = DrudeParams::new(1.0, lam).unwrap();
            let p = SystemParams::new(1.0, 1.0, 0.0, beta, 1.0).unwrap();
            let g = tcl2_asymptotic(&p, &d, &cfg()).unwrap();
            let want = drude_tcl2_f21(1.0, lam, 1.0, beta).unwrap();
            assert_relative_eq!(g.get(2, 1), want, max_relative = 1e-8);
        }
        assert_relative_eq!(drude_tcl2_f21(1.0, 5.0, 1.0, 1.0).unwrap(), -0.772964735867, max_relative = 1e-10);
    }

    #[test]
    fn zero_time_generator_vanishes() {
        let p = SystemParams::new(1.0, 0.5, 0.5, 1.0, 1.0).unwrap();
        assert_eq!(tcl2_at_time(&p, &drude(), 0.0).unwrap().entries, [[0.0; 4]; 4]);
    }

    #[test]
    fn long_time_generator_approaches_limit() {
        let p = SystemParams::from_dqd(1.0, 0.5, 1.0, 0.0144).unwrap();
        let sd = DqdSincParams::new(1.0, 1.0, 8.0).unwrap();
        let inf = tcl2_asymptotic(&p, &sd, &cfg()).unwrap();
        let at = tcl2_at_time(&p, &sd, 50.0 / p.omega).unwrap();
        assert!(at.max_abs_diff(&inf) < 1e-4, "{:?}\n{:?}", at.entries, inf.entries);
        assert_eq!(at.get(1, 2), 0.0);
    }

    #[test]
    fn drude_deviation_from_limit_decays() {
        let d = DrudeParams::new(1.0, 2.0).unwrap();
        let p = SystemParams::new(1.0, 0.6, 0.8, 1.0, 1.0).unwrap();
        let inf = tcl2_asymptotic(&p, &d, &cfg()).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..6 {
            let t = 2.0 + 1.5 * k as f64;
            let dev = tcl2_at_time(&p, &d, t).unwrap().max_abs_diff(&inf);
            assert!(dev < prev, "t = {t}: {dev} !< {prev}");
            prev = dev;
        }
        assert!(prev < 1e-6);
    }

    #[test]
    fn tcl4_vanishes_without_transverse_coupling() {
        let p = SystemParams::new(1.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(tcl4_f33(&p, &drude(), &cfg()).unwrap(), 0.0);
        assert_eq!(tcl4_f30(&p, &drude(), &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn drude_tcl4_matches_closed_form() {
        let p = SystemParams::new(1.0, 1.0, 0.0, 1.0, 1.0).unwrap();
        let f33 = tcl4_f33(&p, &drude(), &cfg()).unwrap();
        let f30 = tcl4_f30(&p, &drude(), &cfg()).unwrap();
        let (c30, c33) = drude_tcl4_closed_form(1.0, 5.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(f33, c33, max_relative = 1e-6);
        assert_relative_eq!(f30, c30, max_relative = 1e-6);
        // high-precision contour oracle
        assert_relative_eq!(c33, -1.49059536649, max_relative = 1e-10);
        assert_relative_eq!(c30, 17.9649367683, max_relative = 1e-10);
    }

    #[test]
    fn closed_form_scales_as_gamma_squared() {
        let (a30, a33) = drude_tcl4_closed_form(1.0, 5.0, 1.0, 1.0).unwrap();
        let (b30, b33) = drude_tcl4_closed_form(0.1, 5.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(b30, 0.01 * a30, max_relative = 1e-13);
        assert_relative_eq!(b33, 0.01 * a33, max_relative = 1e-13);
    }

    #[test]
    fn tcl4_general_coupling_values() {
        // shifted-contour oracle computed at 30 digits
        let p = SystemParams::new(1.0, 0.5, 0.5, 1.0, 1.0).unwrap();
        assert_relative_eq!(tcl4_f33(&p, &drude(), &cfg()).unwrap(), -0.207756490609, max_relative = 1e-8);
        assert_relative_eq!(tcl4_f30(&p, &drude(), &cfg()).unwrap(), 2.29939742139, max_relative = 1e-8);
        let sd = DqdSincParams::new(1.0, 1.0, 8.0).unwrap();
        let q = SystemParams::from_dqd(1.0, 0.5, 1.0, 0.0144).unwrap();
        assert_relative_eq!(tcl4_f33(&q, &sd, &cfg()).unwrap(), 16.3425319736, max_relative = 1e-8);
        assert_relative_eq!(tcl4_f30(&q, &sd, &cfg()).unwrap(), 11.899796087, max_relative = 1e-8);
    }

    #[test]
    fn f33_has_double_poles_at_the_splitting() {
        let p = SystemParams::new(1.0, 1.0, 0.0, 1.0, 1.0).unwrap();
        let r = tcl4_f33_detailed(&p, &drude(), &cfg()).unwrap().unwrap();
        let at_omega = r.poles.iter().find(|q| q.location == 1.0).unwrap();
        assert_eq!(at_omega.kind, crate::numerics::PoleKind::Double);
    }

    #[test]
    fn mixed_order_term_matches_residue_formula() {
        let p = SystemParams::new(1.0, 1.0, 0.0, 1.0, 1.0).unwrap();
        let f = drude().f(1.0, 1.0);
        for t in [3.0, 10.7, 40.0] {
            let got = mixed_order_divergent_term(&p, &drude(), t).unwrap();
            let want = -PI * PI * f * f * ((2.0 * t).sin() - 2.0 * t) / 8.0;
            assert_relative_eq!(got, want, max_relative = 1e-7);
        }
    }
}
