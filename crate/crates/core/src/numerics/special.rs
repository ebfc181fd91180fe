//! Complex digamma and trigamma functions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// B_2, B_4, ..., B_20
const BERNOULLI: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

const ASYMPTOTIC_RADIUS: f64 = 10.0;

fn check_pole(z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("polygamma argument {z} is not finite")));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::Domain(format!("polygamma pole at z = {}", z.re)));
    }
    Ok(())
}

fn digamma_asymptotic(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut pow = inv2;
    for (k, b) in BERNOULLI.iter().enumerate() {
        sum += pow * (b / (2.0 * (k + 1) as f64));
        pow *= inv2;
    }
    z.ln() - 0.5 * inv - sum
}

fn trigamma_asymptotic(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut pow = inv2 * inv;
    for b in BERNOULLI {
        sum += pow * b;
        pow *= inv2;
    }
    inv + 0.5 * inv2 + sum
}

/// ψ(z), the logarithmic derivative of Γ.
pub fn digamma(z: Complex64) -> Result<Complex64> {
    check_pole(z)?;
    if z.re < 0.5 {
        // ψ(z) = ψ(1 - z) - π cot(πz)
        let pz = PI * z;
        let cot = pz.cos() / pz.sin();
        return Ok(digamma(Complex64::new(1.0, 0.0) - z)? - PI * cot);
    }
    let mut z = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while z.norm() < ASYMPTOTIC_RADIUS {
        shift += z.inv();
        z += 1.0;
    }
    Ok(digamma_asymptotic(z) - shift)
}

/// ψ₁(z) = dψ/dz.
pub fn trigamma(z: Complex64) -> Result<Complex64> {
    check_pole(z)?;
    if z.re < 0.5 {
        // ψ₁(z) + ψ₁(1 - z) = π² / sin²(πz)
        let s = (PI * z).sin();
        return Ok(PI * PI / (s * s) - trigamma(Complex64::new(1.0, 0.0) - z)?);
    }
    let mut z = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while z.norm() < ASYMPTOTIC_RADIUS {
        shift += (z * z).inv();
        z += 1.0;
    }
    Ok(trigamma_asymptotic(z) + shift)
}

pub fn digamma_real(x: f64) -> Result<f64> {
    Ok(digamma(Complex64::new(x, 0.0))?.re)
}

pub fn trigamma_real(x: f64) -> Result<f64> {
    Ok(trigamma(Complex64::new(x, 0.0))?.re)
}
