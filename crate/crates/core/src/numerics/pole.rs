//! Principal-value integrals along a contour passing above real poles.
//!
//! Near each declared point `p` the integrand is modelled as
//! `c₂/(x-p)² + c₁/(x-p) + R(x)` from a degree-11 fit of `(x-p)² f(x)` on
//! twelve samples `p ± kδ`, `k = 1..6`. The window `|x-p| < δ` is then
//! integrated analytically (Hadamard finite part for `c₂`, principal value
//! for `c₁`, the fitted polynomial for `R`), and the rest of the domain with
//! the regular adaptive engine. Indenting above a simple pole adds `-iπc₁`;
//! the double-pole part contributes no imaginary term.

use num_complex::Complex64;

use super::quad::{integrate_segments, Domain, QuadConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PoleKind {
    Removable,
    Simple,
    Double,
}

/// How a point on the real axis should be treated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleSpec {
    pub location: f64,
    /// Known `c₁`; if absent it is fitted.
    pub residue: Option<f64>,
    /// Force the point to be treated as removable (fitted parts dropped).
    pub removable: bool,
    /// Half-width of the analytic window; defaults to a fraction of the
    /// distance to the nearest neighbour.
    pub fit_step: Option<f64>,
}

impl PoleSpec {
    pub fn fit(location: f64) -> Self {
        Self { location, residue: None, removable: false, fit_step: None }
    }

    pub fn simple(location: f64, residue: f64) -> Self {
        Self { location, residue: Some(residue), removable: false, fit_step: None }
    }

    pub fn removable(location: f64) -> Self {
        Self { location, residue: None, removable: true, fit_step: None }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.fit_step = Some(step);
        self
    }
}

/// Local model `c₂/u² + c₁/u + Σ_{j≥2} a_j u^{j-2}/δ^j` around a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaurentFit {
    pub location: f64,
    pub step: f64,
    pub double: f64,
    pub simple: f64,
    coeffs: [f64; 2 * PAIRS],
    /// Largest `|u² f(p+u)|` among the samples, the natural size of `c₂`.
    pub sample_scale: f64,
}

impl LaurentFit {
    /// Regular remainder `f(p+u) - c₂/u² - c₁/u`.
    pub fn remainder(&self, u: f64) -> f64 {
        let x = u / self.step;
        let mut acc = 0.0;
        for j in (2..2 * PAIRS).rev() {
            acc = acc * x + self.coeffs[j];
        }
        acc / (self.step * self.step)
    }

    /// `∫_{-δ}^{δ} R(u) du`
    pub fn remainder_integral(&self) -> f64 {
        let mut s = 0.0;
        for j in (2..2 * PAIRS).step_by(2) {
            s += 2.0 * self.coeffs[j] / (j as f64 - 1.0);
        }
        s / self.step
    }

    pub fn kind(&self) -> PoleKind {
        let s = self.sample_scale.max(f64::MIN_POSITIVE);
        if self.double.abs() > 1e-10 * s {
            PoleKind::Double
        } else if (self.simple * self.step).abs() > 1e-10 * s {
            PoleKind::Simple
        } else {
            PoleKind::Removable
        }
    }
}

/// Sample pairs `p ± kδ` used by the local fit.
const PAIRS: usize = 6;

/// Solve the Vandermonde system `Σ_i c_i x_k^i = y_k` for `x_k = k²`.
fn vandermonde_k2(y: [f64; PAIRS]) -> [f64; PAIRS] {
    let x: [f64; PAIRS] = std::array::from_fn(|k| ((k + 1) * (k + 1)) as f64);
    // Newton divided differences, then expand to monomial coefficients
    let mut d = y;
    for level in 1..PAIRS {
        for i in (level..PAIRS).rev() {
            d[i] = (d[i] - d[i - 1]) / (x[i] - x[i - level]);
        }
    }
    let mut c = [0.0; PAIRS];
    for i in (0..PAIRS).rev() {
        // c ← c·(X - x_i) + d_i
        let mut next = [0.0; PAIRS];
        for k in 0..PAIRS {
            if k + 1 < PAIRS {
                next[k + 1] += c[k];
            }
            next[k] -= c[k] * x[i];
        }
        next[0] += d[i];
        c = next;
    }
    c
}

/// Fit the Laurent model of `f` at `location` with window half-width `step`.
pub fn laurent_fit<F: Fn(f64) -> f64>(f: &F, location: f64, step: f64) -> Result<LaurentFit> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Domain(format!("fit step must be positive, got {step}")));
    }
    let mut even = [0.0; PAIRS];
    let mut odd = [0.0; PAIRS];
    let mut sample_scale: f64 = 0.0;
    for k in 1..=PAIRS {
        let u = k as f64 * step;
        let gp = u * u * f(location + u);
        let gm = u * u * f(location - u);
        if !(gp.is_finite() && gm.is_finite()) {
            return Err(Error::Numerical(format!("integrand not finite near x = {location}")));
        }
        sample_scale = sample_scale.max(gp.abs()).max(gm.abs());
        even[k - 1] = 0.5 * (gp + gm);
        odd[k - 1] = 0.5 * (gp - gm) / k as f64;
    }
    let e = vandermonde_k2(even);
    let o = vandermonde_k2(odd);
    let coeffs: [f64; 2 * PAIRS] = std::array::from_fn(|j| if j % 2 == 0 { e[j / 2] } else { o[j / 2] });
    Ok(LaurentFit {
        location,
        step,
        double: coeffs[0],
        simple: coeffs[1] / step,
        coeffs,
        sample_scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ResolvedPole {
    pub location: f64,
    pub kind: PoleKind,
    /// Coefficient of `1/(x-p)`.
    pub residue: f64,
    /// Coefficient of `1/(x-p)²`.
    pub double: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PvResult {
    /// Contour-above value: finite part minus `iπ Σ residues`.
    pub value: Complex64,
    /// Real (principal value / finite part) contribution.
    pub principal: f64,
    pub poles: Vec<ResolvedPole>,
    pub error: f64,
}

fn domain_bounds(domain: Domain) -> (f64, f64) {
    match domain {
        Domain::Finite(a, b) => (a, b),
        Domain::From(a) => (a, f64::INFINITY),
        Domain::UpTo(b) => (f64::NEG_INFINITY, b),
        Domain::Whole => (f64::NEG_INFINITY, f64::INFINITY),
    }
}

/// Contour-above integral with no extra breakpoints.
pub fn pv_integral_above<F>(f: F, domain: Domain, poles: &[PoleSpec], cfg: &QuadConfig) -> Result<PvResult>
where
    F: Fn(f64) -> f64,
{
    pv_integral_above_with_breaks(f, domain, poles, &[], cfg)
}

/// Contour-above integral; `breaks` are extra interior points where the
/// integrand changes character (cutoffs, kinks) to help the adaptive engine.
pub fn pv_integral_above_with_breaks<F>(
    f: F,
    domain: Domain,
    poles: &[PoleSpec],
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<PvResult>
where
    F: Fn(f64) -> f64,
{
    let (a, b) = domain_bounds(domain);
    if !(a < b) {
        return Err(Error::Domain(format!("empty integration domain [{a}, {b}]")));
    }
    let mut specs = poles.to_vec();
    specs.sort_by(|x, y| x.location.total_cmp(&y.location));
    for s in &specs {
        if !s.location.is_finite() || s.location <= a || s.location >= b {
            return Err(Error::Domain(format!(
                "pole at {} is not interior to [{a}, {b}]",
                s.location
            )));
        }
    }

    let mut resolved = Vec::with_capacity(specs.len());
    let mut windows = Vec::with_capacity(specs.len());
    let mut principal = 0.0;
    let mut residue_sum = 0.0;
    for (i, s) in specs.iter().enumerate() {
        let p = s.location;
        let mut gap = f64::INFINITY;
        if i > 0 {
            gap = gap.min(0.5 * (p - specs[i - 1].location));
        }
        if i + 1 < specs.len() {
            gap = gap.min(0.5 * (specs[i + 1].location - p));
        }
        gap = gap.min(p - a).min(b - p);
        let room = if gap.is_finite() { gap } else { p.abs().max(1.0) };
        let step = s.fit_step.unwrap_or(0.02 * room).min(room / 8.0);
        if !(step > 1e-12 * p.abs().max(1.0)) {
            return Err(Error::Domain(format!("pole at {p} is too close to a boundary or another pole")));
        }

        let fit = laurent_fit(&f, p, step)?;
        // a second fit on a wider stencil guards against noisy coefficients
        let check = laurent_fit(&f, p, 1.2 * step)?;
        let scale = fit.sample_scale.max(check.sample_scale) + fit.double.abs();
        let drift = (fit.double - check.double).abs() + (fit.simple - check.simple).abs() * step;
        if !s.removable && drift > 1e-6 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Numerical(format!(
                "residue fit at x = {p} is unstable (c1 {:e} vs {:e}, c2 {:e} vs {:e})",
                fit.simple, check.simple, fit.double, check.double
            )));
        }

        let (double, simple, kind) = if s.removable {
            (0.0, 0.0, PoleKind::Removable)
        } else {
            let simple = s.residue.unwrap_or(fit.simple);
            (fit.double, simple, fit.kind())
        };
        // window integral: finite part of c₂/u² is -2c₂/δ, PV of c₁/u vanishes
        principal += fit.remainder_integral() - 2.0 * fit.double / step;
        residue_sum += simple;
        resolved.push(ResolvedPole { location: p, kind, residue: simple, double, step });
        windows.push((p - step, p + step));
    }

    // regular part over the complement of the windows
    let mut segments = Vec::new();
    // cuts alternate: [a?] lo₁ hi₁ lo₂ hi₂ ... [b?]; the gaps between windows are integrated
    let mut points: Vec<(f64, bool)> = Vec::new(); // (x, starts_window)
    if a.is_finite() {
        points.push((a, false));
    }
    for &(lo, hi) in &windows {
        points.push((lo, true));
        points.push((hi, false));
    }
    if b.is_finite() {
        points.push((b, true));
    }
    for w in points.windows(2) {
        let (x0, starts0) = w[0];
        let (x1, _) = w[1];
        if !starts0 && x1 > x0 {
            segments.push((x0, x1));
        }
    }
    // optional extra breaks split the gaps further
    let mut refined = Vec::with_capacity(segments.len() + breaks.len());
    for (lo, hi) in segments {
        let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > lo && x < hi).collect();
        inner.sort_by(f64::total_cmp);
        let mut start = lo;
        for x in inner {
            refined.push((start, x));
            start = x;
        }
        refined.push((start, hi));
    }
    let first = points.first().map(|p| p.0).unwrap_or(0.0);
    let last = points.last().map(|p| p.0).unwrap_or(0.0);
    let (lower_tail, upper_tail) = if points.is_empty() {
        (Some(0.0), Some(0.0))
    } else {
        (
            (!a.is_finite()).then_some(first),
            (!b.is_finite()).then_some(last),
        )
    };
    // tails may also need to be split at breaks outside the windows' span
    let mut lower_tail = lower_tail;
    let mut upper_tail = upper_tail;
    if let Some(lt) = lower_tail {
        let mut extra: Vec<f64> = breaks.iter().copied().filter(|&x| x < lt).collect();
        extra.sort_by(f64::total_cmp);
        if let Some(&lowest) = extra.first() {
            let mut start = lowest;
            for &x in extra.iter().skip(1) {
                refined.push((start, x));
                start = x;
            }
            refined.push((start, lt));
            lower_tail = Some(lowest);
        }
    }
    if let Some(ut) = upper_tail {
        let mut extra: Vec<f64> = breaks.iter().copied().filter(|&x| x > ut).collect();
        extra.sort_by(f64::total_cmp);
        if let Some(&highest) = extra.last() {
            let mut start = ut;
            for &x in &extra {
                refined.push((start, x));
                start = x;
            }
            upper_tail = Some(highest);
        }
    }
    let regular = integrate_segments(&f, &refined, lower_tail, upper_tail, cfg)?;
    principal += regular.value;
    let value = Complex64::new(principal, -std::f64::consts::PI * residue_sum);
    Ok(PvResult {
        value,
        principal,
        poles: resolved,
        error: regular.error,
    })
}

impl PvResult {
    pub fn complex(&self) -> Complex64 {
        self.value
    }

    /// The real part, after checking that the imaginary part vanishes to
    /// `tol·(1 + |Re|)`.
    pub fn expect_real(&self, what: &str, tol: f64) -> Result<f64> {
        let z = self.complex();
        if z.im.abs() <= tol * (1.0 + z.re.abs()) {
            Ok(z.re)
        } else {
            let poles: Vec<String> = self
                .poles
                .iter()
                .map(|p| format!("x={} c1={:e} c2={:e}", p.location, p.residue, p.double))
                .collect();
            Err(Error::Numerical(format!(
                "{what}: contour integral has imaginary part {:e} (real {:e}); poles: {}",
                z.im,
                z.re,
                poles.join(", ")
            )))
        }
    }
}
