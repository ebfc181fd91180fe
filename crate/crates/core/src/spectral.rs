//! Bath spectral densities and the thermally symmetrized function
//! `f(ω) = J(ω) coth(βω/2)`.
//!
//! Every density is described through the even function `J(ω)/ω`, so the
//! odd continuation `J(-ω) = -J(ω)` holds by construction and `J(0) = 0`.

use std::fmt;

use crate::error::{ensure_finite, ensure_positive, Error, Result};

/// High-frequency behaviour of a density, used to size quadrature domains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    /// `J(ω) ~ tail / ω` (or faster, with `tail = 0`) as `ω → ∞`.
    Algebraic { tail: f64 },
    /// `J(ω)` is bounded by a Gaussian of the given width.
    Gaussian { width: f64 },
}

pub trait SpectralDensity: Send + Sync + fmt::Debug {
    /// Short model name, e.g. `"drude"`.
    fn tag(&self) -> &str;

    fn parameters(&self) -> Vec<(String, f64)>;

    /// `J(ω)/ω`, an even function that is finite at the origin.
    fn j_over_omega(&self, omega: f64) -> f64;

    /// Analytic `J'(ω)` if the model has one.
    fn j_prime_analytic(&self, omega: f64) -> Option<f64>;

    /// Characteristic cutoff frequency (where the density starts to fall off).
    fn frequency_scale(&self) -> f64;

    /// Smallest frequency over which the density changes appreciably.
    fn smoothness_scale(&self) -> f64;

    fn envelope(&self) -> Envelope;

    /// Inverse decay rate of the model's own contribution to the bath correlations.
    fn correlation_time(&self) -> f64 {
        1.0 / self.frequency_scale()
    }

    fn as_drude(&self) -> Option<DrudeParams> {
        None
    }

    fn j(&self, omega: f64) -> f64 {
        omega * self.j_over_omega(omega)
    }

    fn j_prime(&self, omega: f64) -> f64 {
        self.j_prime_analytic(omega)
            .unwrap_or_else(|| richardson_derivative(|w| self.j(w), omega))
    }

    /// `f(ω) = J(ω) coth(βω/2)`, with the removable point at `ω = 0` taken as a limit.
    fn f(&self, omega: f64, beta: f64) -> f64 {
        self.j_over_omega(omega) * omega_coth(omega, beta)
    }

    fn f_prime(&self, omega: f64, beta: f64) -> f64 {
        match self.j_prime_analytic(omega) {
            Some(jp) => {
                let y = 0.5 * beta * omega;
                let csch = 1.0 / y.sinh();
                jp / y.tanh() - self.j(omega) * 0.5 * beta * csch * csch
            }
            None => richardson_derivative(|w| self.f(w, beta), omega),
        }
    }
}

/// `ω coth(βω/2)`, smooth through `ω = 0` where it equals `2/β`.
pub fn omega_coth(omega: f64, beta: f64) -> f64 {
    let y = 0.5 * beta * omega;
    if y.abs() < 1e-4 {
        let y2 = y * y;
        (2.0 / beta) * (1.0 + y2 / 3.0 - y2 * y2 / 45.0)
    } else {
        omega / y.tanh()
    }
}

/// Central difference with four levels of Richardson refinement.
pub(crate) fn richardson_derivative<F: Fn(f64) -> f64>(func: F, x: f64) -> f64 {
    const LEVELS: usize = 4;
    let mut h = 1e-3 * x.abs().max(1.0);
    let mut table = [[0.0; LEVELS]; LEVELS];
    for i in 0..LEVELS {
        table[i][0] = (func(x + h) - func(x - h)) / (2.0 * h);
        let mut factor = 4.0;
        for j in 1..=i {
            table[i][j] = table[i][j - 1] + (table[i][j - 1] - table[i - 1][j - 1]) / (factor - 1.0);
            factor *= 4.0;
        }
        h *= 0.5;
    }
    table[LEVELS - 1][LEVELS - 1]
}

/// Ohmic density with a Lorentzian (Drude) cutoff, `J(ω) = γΛ²ω / (Λ² + ω²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrudeParams {
    pub gamma: f64,
    pub lambda_cut: f64,
}

impl DrudeParams {
    pub fn new(gamma: f64, lambda_cut: f64) -> Result<Self> {
        ensure_positive("bath.gamma", gamma)?;
        ensure_positive("bath.lambda_cut", lambda_cut)?;
        Ok(Self { gamma, lambda_cut })
    }
}

impl SpectralDensity for DrudeParams {
    fn tag(&self) -> &str {
        "drude"
    }

    fn parameters(&self) -> Vec<(String, f64)> {
        vec![
            ("gamma".into(), self.gamma),
            ("lambda_cut".into(), self.lambda_cut),
        ]
    }

    fn j_over_omega(&self, omega: f64) -> f64 {
        let l2 = self.lambda_cut * self.lambda_cut;
        self.gamma * l2 / (l2 + omega * omega)
    }

    fn j_prime_analytic(&self, omega: f64) -> Option<f64> {
        let l2 = self.lambda_cut * self.lambda_cut;
        let d = l2 + omega * omega;
        Some(self.gamma * l2 * (l2 - omega * omega) / (d * d))
    }

    fn frequency_scale(&self) -> f64 {
        self.lambda_cut
    }

    fn smoothness_scale(&self) -> f64 {
        self.lambda_cut
    }

    fn envelope(&self) -> Envelope {
        Envelope::Algebraic {
            tail: self.gamma * self.lambda_cut * self.lambda_cut,
        }
    }

    fn as_drude(&self) -> Option<DrudeParams> {
        Some(*self)
    }
}

/// Acoustic-phonon density of a double quantum dot,
/// `J(ω) = γω [1 - sinc(ω/ω_c)] exp(-ω²/2ω_max²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DqdSincParams {
    pub gamma: f64,
    pub omega_c: f64,
    pub omega_max: f64,
}

impl DqdSincParams {
    pub fn new(gamma: f64, omega_c: f64, omega_max: f64) -> Result<Self> {
        ensure_positive("bath.gamma", gamma)?;
        ensure_positive("bath.omega_c", omega_c)?;
        ensure_positive("bath.omega_max", omega_max)?;
        Ok(Self {
            gamma,
            omega_c,
            omega_max,
        })
    }

    fn gaussian(&self, omega: f64) -> f64 {
        let r = omega / self.omega_max;
        (-0.5 * r * r).exp()
    }
}

/// `1 - sin(x)/x`
fn one_minus_sinc(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        x2 / 6.0 - x2 * x2 / 120.0 + x2 * x2 * x2 / 5040.0
    } else {
        1.0 - x.sin() / x
    }
}

/// `d/dx (1 - sin(x)/x) = (sin x - x cos x) / x²`
fn one_minus_sinc_prime(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        x / 3.0 - x * x2 / 30.0 + x * x2 * x2 / 840.0
    } else {
        (x.sin() - x * x.cos()) / (x * x)
    }
}

impl SpectralDensity for DqdSincParams {
    fn tag(&self) -> &str {
        "dqd_sinc"
    }

    fn parameters(&self) -> Vec<(String, f64)> {
        vec![
            ("gamma".into(), self.gamma),
            ("omega_c".into(), self.omega_c),
            ("omega_max".into(), self.omega_max),
        ]
    }

    fn j_over_omega(&self, omega: f64) -> f64 {
        self.gamma * one_minus_sinc(omega / self.omega_c) * self.gaussian(omega)
    }

    fn j_prime_analytic(&self, omega: f64) -> Option<f64> {
        let x = omega / self.omega_c;
        let s = one_minus_sinc(x);
        let ds = one_minus_sinc_prime(x) / self.omega_c;
        let g = self.gaussian(omega);
        let wm2 = self.omega_max * self.omega_max;
        Some(self.gamma * g * (s + omega * ds - omega * omega * s / wm2))
    }

    fn frequency_scale(&self) -> f64 {
        self.omega_max
    }

    fn smoothness_scale(&self) -> f64 {
        self.omega_c.min(self.omega_max)
    }

    fn envelope(&self) -> Envelope {
        Envelope::Gaussian {
            width: self.omega_max,
        }
    }

    fn correlation_time(&self) -> f64 {
        // the sinc factor produces an echo at t = 1/ω_c
        1.0 / self.omega_c + 6.0 / self.omega_max
    }
}

type RealFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied density given on `ω ≥ 0`; the library reflects it to
/// negative frequencies as an odd function.
pub struct CustomDensity {
    tag: String,
    j: RealFn,
    j_prime: Option<RealFn>,
    j_over_omega_at_zero: f64,
    scale: f64,
    envelope: Envelope,
    parameters: Vec<(String, f64)>,
}

impl CustomDensity {
    /// `j` is evaluated only for `ω ≥ 0`. `j_over_omega_at_zero` is `lim J(ω)/ω`
    /// as `ω → 0⁺`; `scale` is the characteristic cutoff frequency.
    pub fn new<J>(
        tag: impl Into<String>,
        j: J,
        j_over_omega_at_zero: f64,
        scale: f64,
        envelope: Envelope,
    ) -> Result<Self>
    where
        J: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ensure_finite("bath.j_over_omega_at_zero", j_over_omega_at_zero)?;
        ensure_positive("bath.scale", scale)?;
        Ok(Self {
            tag: tag.into(),
            j: Box::new(j),
            j_prime: None,
            j_over_omega_at_zero,
            scale,
            envelope,
            parameters: Vec::new(),
        })
    }

    pub fn with_derivative<D>(mut self, j_prime: D) -> Self
    where
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.j_prime = Some(Box::new(j_prime));
        self
    }

    pub fn with_parameters(mut self, parameters: Vec<(String, f64)>) -> Self {
        self.parameters = parameters;
        self
    }
}

impl fmt::Debug for CustomDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDensity")
            .field("tag", &self.tag)
            .field("scale", &self.scale)
            .field("envelope", &self.envelope)
            .finish_non_exhaustive()
    }
}

impl SpectralDensity for CustomDensity {
    fn tag(&self) -> &str {
        &self.tag
    }

    fn parameters(&self) -> Vec<(String, f64)> {
        self.parameters.clone()
    }

    fn j_over_omega(&self, omega: f64) -> f64 {
        let w = omega.abs();
        if w < 1e-9 * self.scale {
            self.j_over_omega_at_zero
        } else {
            (self.j)(w) / w
        }
    }

    fn j_prime_analytic(&self, omega: f64) -> Option<f64> {
        // J' is even when J is odd
        self.j_prime.as_ref().map(|d| d(omega.abs()))
    }

    fn frequency_scale(&self) -> f64 {
        self.scale
    }

    fn smoothness_scale(&self) -> f64 {
        self.scale
    }

    fn envelope(&self) -> Envelope {
        self.envelope
    }
}

pub fn eval_j(sd: &dyn SpectralDensity, omega: f64) -> Result<f64> {
    if !omega.is_finite() {
        return Err(Error::Domain(format!("J(ω) requested at non-finite ω = {omega}")));
    }
    Ok(sd.j(omega))
}

pub fn eval_f(sd: &dyn SpectralDensity, omega: f64, beta: f64) -> Result<f64> {
    ensure_positive("beta", beta)?;
    if !omega.is_finite() {
        return Err(Error::Domain(format!("f(ω) requested at non-finite ω = {omega}")));
    }
    Ok(sd.f(omega, beta))
}

pub fn eval_f_prime(sd: &dyn SpectralDensity, omega: f64, beta: f64) -> Result<f64> {
    ensure_positive("beta", beta)?;
    if omega == 0.0 || !omega.is_finite() {
        return Err(Error::Domain(format!("f'(ω) requires finite ω ≠ 0, got {omega}")));
    }
    Ok(sd.f_prime(omega, beta))
}
