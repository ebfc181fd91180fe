//! Globally adaptive Gauss–Kronrod (21-point) quadrature over finite,
//! semi-infinite and infinite domains.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn magnitude(&self) -> f64;
    fn is_finite_value(&self) -> bool;
}

impl QuadValue for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Multiplier applied to the problem's frequency scale when a semi-infinite
    /// integral is split into a core interval and a transformed tail.
    pub tail_cutoff_factor: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 4000,
            tail_cutoff_factor: 20.0,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::validation(
                "numerics.tolerances",
                format!("rel_tol and abs_tol must be > 0 (got {}, {})", self.rel_tol, self.abs_tol),
            ));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::validation("numerics.max_subdivisions", "must be at least 1"));
        }
        if !(self.tail_cutoff_factor >= 1.0) {
            return Err(Error::validation("numerics.tail_cutoff_factor", "must be >= 1"));
        }
        Ok(())
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Finite(f64, f64),
    /// `[a, ∞)`
    From(f64),
    /// `(-∞, b]`
    UpTo(f64),
    Whole,
}

#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9]
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

#[derive(Debug, Clone, Copy)]
enum Mapping {
    Identity,
    /// x = a + (1 - t)/t
    Upper(f64),
    /// x = b - (1 - t)/t
    Lower(f64),
}

impl Mapping {
    #[inline]
    fn apply(self, t: f64) -> (f64, f64) {
        match self {
            Mapping::Identity => (t, 1.0),
            Mapping::Upper(a) => (a + (1.0 - t) / t, 1.0 / (t * t)),
            Mapping::Lower(b) => (b - (1.0 - t) / t, 1.0 / (t * t)),
        }
    }
}

struct Segment<T> {
    map: Mapping,
    lo: f64,
    hi: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 21-point Kronrod panel with the QUADPACK error heuristic.
fn kronrod<T, F>(f: &F, map: Mapping, lo: f64, hi: f64) -> Result<(T, f64)>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let eval = |t: f64| -> Result<T> {
        let (x, jac) = map.apply(t);
        let v = if jac == 0.0 { T::default() } else { f(x) * jac };
        if v.is_finite_value() {
            Ok(v)
        } else {
            Err(Error::Numerical(format!("integrand is not finite at x = {x:e}")))
        }
    };

    let fc = eval(center)?;
    let mut res_k = fc * WGK[10];
    let mut res_g = T::default();
    let mut res_abs = fc.magnitude() * WGK[10];
    let mut fv = [(T::default(), T::default()); 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv[j] = (f1, f2);
        res_k = res_k + (f1 + f2) * WGK[j];
        res_abs += WGK[j] * (f1.magnitude() + f2.magnitude());
        if j % 2 == 1 {
            res_g = res_g + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).magnitude();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv[j].0 - mean).magnitude() + (fv[j].1 - mean).magnitude());
    }
    let scale = half.abs();
    let value = res_k * half;
    res_abs *= scale;
    res_asc *= scale;
    let mut err = ((res_k - res_g) * half).magnitude();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err))
}

fn adaptive<T, F>(f: &F, pieces: &[(Mapping, f64, f64)], cfg: &QuadConfig) -> Result<Quadrature<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    cfg.validate()?;
    let mut heap = BinaryHeap::new();
    let mut total = T::default();
    let mut total_err = 0.0;
    let mut evaluations = 0;
    for &(map, lo, hi) in pieces {
        if lo == hi {
            continue;
        }
        let (value, error) = kronrod(f, map, lo, hi)?;
        evaluations += 21;
        total = total + value;
        total_err += error;
        heap.push(Segment { map, lo, hi, value, error });
    }
    let mut splits = 0;
    loop {
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.magnitude());
        if total_err <= tol {
            // the running sums can lose everything to cancellation after a
            // huge panel is replaced; confirm against a fresh sum
            total = heap.iter().fold(T::default(), |acc, s| acc + s.value);
            total_err = heap.iter().map(|s| s.error).sum();
            if total_err <= cfg.abs_tol.max(cfg.rel_tol * total.magnitude()) {
                break;
            }
        }
        if splits >= cfg.max_subdivisions {
            return Err(Error::Convergence {
                what: "adaptive quadrature".into(),
                estimate: total.magnitude(),
                error: total_err,
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi) {
            // interval exhausted at machine resolution; keep what we have
            heap.push(Segment { error: 0.0, ..worst });
            total_err = heap.iter().map(|s| s.error).sum();
            if heap.iter().all(|s| s.error == 0.0) {
                break;
            }
            continue;
        }
        let (v1, e1) = kronrod(f, worst.map, worst.lo, mid)?;
        let (v2, e2) = kronrod(f, worst.map, mid, worst.hi)?;
        evaluations += 42;
        splits += 1;
        total = total - worst.value + v1 + v2;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { map: worst.map, lo: worst.lo, hi: mid, value: v1, error: e1 });
        heap.push(Segment { map: worst.map, lo: mid, hi: worst.hi, value: v2, error: e2 });
        if splits % 64 == 0 {
            // resum to keep the running error free of cancellation drift
            total = heap.iter().fold(T::default(), |acc, s| acc + s.value);
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let value = heap.iter().fold(T::default(), |acc, s| acc + s.value);
    let error = heap.iter().map(|s| s.error).sum();
    Ok(Quadrature { value, error, evaluations })
}

fn check_finite_points(points: &[f64]) -> Result<()> {
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::Domain("integration limits must be finite here".into()));
    }
    Ok(())
}

/// Integrate `f` over `domain`. Infinite ranges are mapped onto `(0, 1]`
/// with `x = a + (1 - t)/t`, which requires the integrand to decay.
pub fn integrate<T, F>(f: F, domain: Domain, cfg: &QuadConfig) -> Result<Quadrature<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let pieces: Vec<(Mapping, f64, f64)> = match domain {
        Domain::Finite(a, b) => {
            check_finite_points(&[a, b])?;
            vec![(Mapping::Identity, a, b)]
        }
        Domain::From(a) => {
            check_finite_points(&[a])?;
            vec![(Mapping::Upper(a), 0.0, 1.0)]
        }
        Domain::UpTo(b) => {
            check_finite_points(&[b])?;
            // x = b - (1-t)/t runs from -∞ to b as t runs 0 → 1
            vec![(Mapping::Lower(b), 0.0, 1.0)]
        }
        Domain::Whole => vec![(Mapping::Lower(0.0), 0.0, 1.0), (Mapping::Upper(0.0), 0.0, 1.0)],
    };
    adaptive(&f, &pieces, cfg)
}

/// Integrate over `[points[0], points[last]]` treating every interior point
/// as a breakpoint; error control is global across the pieces.
pub fn integrate_with_breaks<T, F>(f: F, points: &[f64], cfg: &QuadConfig) -> Result<Quadrature<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    check_finite_points(points)?;
    if points.len() < 2 {
        return Err(Error::Domain("need at least two integration points".into()));
    }
    if points.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("breakpoints must be sorted".into()));
    }
    let pieces: Vec<_> = points
        .windows(2)
        .map(|w| (Mapping::Identity, w[0], w[1]))
        .collect();
    adaptive(&f, &pieces, cfg)
}

/// Integrate over a union of finite segments plus optional transformed
/// tails `(-∞, lower]` and `[upper, ∞)`, with global error control.
pub fn integrate_segments<T, F>(
    f: F,
    segments: &[(f64, f64)],
    lower_tail: Option<f64>,
    upper_tail: Option<f64>,
    cfg: &QuadConfig,
) -> Result<Quadrature<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let mut pieces = Vec::with_capacity(segments.len() + 2);
    for &(lo, hi) in segments {
        check_finite_points(&[lo, hi])?;
        if hi < lo {
            return Err(Error::Domain(format!("segment [{lo}, {hi}] is reversed")));
        }
        pieces.push((Mapping::Identity, lo, hi));
    }
    if let Some(b) = lower_tail {
        check_finite_points(&[b])?;
        pieces.push((Mapping::Lower(b), 0.0, 1.0));
    }
    if let Some(a) = upper_tail {
        check_finite_points(&[a])?;
        pieces.push((Mapping::Upper(a), 0.0, 1.0));
    }
    adaptive(&f, &pieces, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oscillator {
    Sin,
    Cos,
}

/// `∫_a^∞ g(ω) trig(tω) dω` for slowly decaying `g`, summing the integral
/// over consecutive half periods and extrapolating the resulting
/// alternating series with the Wynn epsilon algorithm.
pub fn integrate_oscillatory_tail<F>(g: F, a: f64, t: f64, kind: Oscillator, cfg: &QuadConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(t > 0.0) {
        return Err(Error::Domain(format!("oscillatory tail needs t > 0, got {t}")));
    }
    let trig = |w: f64| match kind {
        Oscillator::Sin => (t * w).sin(),
        Oscillator::Cos => (t * w).cos(),
    };
    let h = |w: f64| g(w) * trig(w);
    let half = std::f64::consts::PI / t;
    // first zero of the oscillator at or after a
    let phase0 = match kind {
        Oscillator::Sin => 0.0,
        Oscillator::Cos => 0.5 * std::f64::consts::PI,
    };
    let k0 = ((t * a - phase0) / std::f64::consts::PI).ceil();
    let first_zero = (k0 * std::f64::consts::PI + phase0) / t;
    let inner = if first_zero > a {
        integrate(h, Domain::Finite(a, first_zero), cfg)?.value
    } else {
        0.0
    };
    let mut partial = inner;
    let mut wynn = crate::numerics::series::WynnEpsilon::new();
    let mut last = f64::NAN;
    let mut stable = 0;
    for k in 0..5000 {
        let lo = first_zero + k as f64 * half;
        let piece = integrate(h, Domain::Finite(lo, lo + half), cfg)?.value;
        partial += piece;
        let est = wynn.push(partial);
        if k >= 6 {
            let tol = cfg.abs_tol.max(cfg.rel_tol * est.abs());
            if (est - last).abs() <= tol {
                stable += 1;
                if stable >= 3 {
                    return Ok(est);
                }
            } else {
                stable = 0;
            }
        }
        last = est;
    }
    Err(Error::Convergence {
        what: "oscillatory tail".into(),
        estimate: last,
        error: f64::NAN,
    })
}
