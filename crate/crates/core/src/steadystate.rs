//! Weak-coupling steady state: the Gibbs state of the qubit plus the
//! second-order corrections, obtained both from the stationarity condition
//! of the time-convolutionless generator and from the mean-force Gibbs
//! state, which must agree.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::{tcl0, tcl2_asymptotic, tcl4_f30, tcl4_f33, GeneratorMatrix, SystemParams};
use crate::numerics::{pv_integral_above_with_breaks, Domain, PoleSpec, QuadConfig};
use crate::spectral::{omega_coth, SpectralDensity};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochVector {
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

impl BlochVector {
    pub fn new(v1: f64, v2: f64, v3: f64) -> Self {
        Self { v1, v2, v3 }
    }

    pub fn norm(&self) -> f64 {
        (self.v1 * self.v1 + self.v2 * self.v2 + self.v3 * self.v3).sqrt()
    }

    /// `(1, v₁, v₂, v₃)`
    pub fn augmented(&self) -> [f64; 4] {
        [1.0, self.v1, self.v2, self.v3]
    }

    /// `self + scale·other`
    pub fn add_scaled(&self, other: &Self, scale: f64) -> Self {
        Self::new(self.v1 + scale * other.v1, self.v2 + scale * other.v2, self.v3 + scale * other.v3)
    }
}

/// Thermal state of the bare qubit.
pub fn gibbs_state(p: &SystemParams) -> BlochVector {
    BlochVector::new(0.0, 0.0, -(0.5 * p.beta * p.omega).tanh())
}

fn half_line_breaks(p: &SystemParams, sd: &dyn SpectralDensity) -> Vec<f64> {
    let s = sd.frequency_scale();
    let mut v = vec![0.5 * p.omega, 2.0 * p.omega, sd.smoothness_scale(), s, 4.0 * s, 20.0 * s.max(p.omega)];
    v.retain(|x| x.is_finite() && *x > 0.0 && (*x - p.omega).abs() > 0.2 * p.omega);
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn removable_at_splitting<G: Fn(f64) -> f64>(
    g: G,
    p: &SystemParams,
    sd: &dyn SpectralDensity,
    cfg: &QuadConfig,
) -> Result<f64> {
    let r = pv_integral_above_with_breaks(
        g,
        Domain::From(0.0),
        &[PoleSpec::removable(p.omega).with_step(p.pole_step(sd))],
        &half_line_breaks(p, sd),
        cfg,
    )?;
    Ok(r.principal)
}

/// Second-order coherence `v₁` from the stationarity of the generator.
pub fn coherence_correction_tcl(p: &SystemParams, tcl2: &GeneratorMatrix) -> f64 {
    let v3 = gibbs_state(p).v3;
    -(tcl2.get(2, 0) + v3 * tcl2.get(2, 3)) / p.omega
}

/// Second-order coherence `v₂` from the stationarity of the generator; it
/// vanishes identically for a thermal bath.
pub fn v2_correction(p: &SystemParams, tcl2: &GeneratorMatrix) -> f64 {
    let v3 = gibbs_state(p).v3;
    (tcl2.get(1, 0) + v3 * tcl2.get(1, 3)) / p.omega
}

/// Second-order coherence `v₁` from the mean-force Gibbs state.
pub fn coherence_correction_mfgs(p: &SystemParams, sd: &dyn SpectralDensity, cfg: &QuadConfig) -> Result<f64> {
    p.validate()?;
    if p.a1 == 0.0 || p.a3 == 0.0 {
        return Ok(0.0);
    }
    let (om, beta) = (p.omega, p.beta);
    let th = (0.5 * beta * om).tanh();
    let integral = removable_at_splitting(
        |w| sd.j_over_omega(w) * (omega_coth(w, beta) * th - om) / (w * w - om * om),
        p,
        sd,
        cfg,
    )
    .map_err(|e| e.context("mean-force coherence"))?;
    Ok(4.0 * p.a1 * p.a3 * integral)
}

/// Second-order population `v₃` from the fourth-order stationarity
/// condition. Zero when `a₁ = 0`, where every term carries a factor `a₁²`.
pub fn population_correction_tcl(
    p: &SystemParams,
    tcl2: &GeneratorMatrix,
    f30_4: f64,
    f33_4: f64,
    v1_correction: f64,
) -> Result<f64> {
    if p.a1 == 0.0 {
        return Ok(0.0);
    }
    let v3 = gibbs_state(p).v3;
    let denom = tcl2.get(3, 3);
    let scale = tcl2.entries.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    if !(denom.abs() > 1e-12 * scale) {
        return Err(Error::Numerical(format!(
            "population equation is singular: F33 = {denom:e} (second order)"
        )));
    }
    Ok(-(f30_4 + v3 * f33_4 + v1_correction * tcl2.get(3, 1)) / denom)
}

/// Second-order population `v₃` from the mean-force Gibbs state.
pub fn population_correction_mfgs(p: &SystemParams, sd: &dyn SpectralDensity, cfg: &QuadConfig) -> Result<f64> {
    p.validate()?;
    if p.a1 == 0.0 {
        return Ok(0.0);
    }
    let (om, beta) = (p.omega, p.beta);
    let th = (0.5 * beta * om).tanh();
    let csch = 1.0 / (beta * om).sinh();
    let integral = removable_at_splitting(
        |w| {
            let d = w * w - om * om;
            (sd.j(w) * 2.0 * w * om / th - sd.f(w, beta) * (beta * om * d * csch + w * w + om * om)) / (d * d)
        },
        p,
        sd,
        cfg,
    )
    .map_err(|e| e.context("mean-force population"))?;
    Ok(-2.0 * p.a1 * p.a1 * th * integral)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RouteDiscrepancy {
    pub v1: f64,
    pub v3: f64,
}

/// Long-time fourth-order coefficients entering the population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourthOrder {
    pub f30: f64,
    pub f33: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SteadyStateReport {
    pub params: SystemParams,
    pub gibbs: BlochVector,
    /// Second-order correction from the generator (multiply by `coupling_sq`).
    pub tcl_correction: BlochVector,
    /// Second-order correction from the mean-force Gibbs state.
    pub mfgs_correction: BlochVector,
    /// `gibbs + coupling_sq · tcl_correction`
    pub assembled: BlochVector,
    /// `gibbs + coupling_sq · mfgs_correction`
    pub assembled_mfgs: BlochVector,
    pub route_discrepancy: RouteDiscrepancy,
    /// Null vector of the second-order generator alone (no fourth-order
    /// terms); absent when that generator conserves the populations.
    pub tcl2_only: Option<BlochVector>,
    pub tcl2: GeneratorMatrix,
    pub fourth_order: FourthOrder,
    pub warnings: Vec<String>,
}

/// Solve the 3×3 system `m·x = rhs` by partial pivoting.
fn solve3(mut m: [[f64; 3]; 3], mut rhs: [f64; 3]) -> Result<[f64; 3]> {
    let scale = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .expect("non-empty range");
        if !(m[piv][col].abs() > 1e-14 * scale) {
            return Err(Error::Numerical("stationarity system is singular".into()));
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..3 {
            let k = m[r][col] / m[col][col];
            for c in col..3 {
                m[r][c] -= k * m[col][c];
            }
            rhs[r] -= k * rhs[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| m[r][c] * x[c]).sum();
        x[r] = (rhs[r] - s) / m[r][r];
    }
    Ok(x)
}

/// Stationary point of `F₀ + coupling_sq·F₂`.
pub fn tcl2_only_steady_state(p: &SystemParams, tcl2: &GeneratorMatrix) -> Result<BlochVector> {
    let free = tcl0(p)?;
    let lam = p.coupling_sq;
    let mut m = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = free.get(i + 1, j + 1) + lam * tcl2.get(i + 1, j + 1);
        }
        rhs[i] = -(free.get(i + 1, 0) + lam * tcl2.get(i + 1, 0));
    }
    let x = solve3(m, rhs)?;
    Ok(BlochVector::new(x[0], x[1], x[2]))
}

/// Compute the full steady-state report.
pub fn assemble_report(p: &SystemParams, sd: &dyn SpectralDensity, cfg: &QuadConfig) -> Result<SteadyStateReport> {
    p.validate()?;
    cfg.validate()?;
    let gibbs = gibbs_state(p);
    let tcl2 = tcl2_asymptotic(p, sd, cfg)?;
    let (fourth, mfgs) = rayon::join(
        || -> Result<(f64, f64)> { Ok((tcl4_f30(p, sd, cfg)?, tcl4_f33(p, sd, cfg)?)) },
        || -> Result<(f64, f64)> {
            Ok((coherence_correction_mfgs(p, sd, cfg)?, population_correction_mfgs(p, sd, cfg)?))
        },
    );
    let (f30, f33) = fourth?;
    let (v1_mfgs, v3_mfgs) = mfgs?;

    let v1 = coherence_correction_tcl(p, &tcl2);
    let v2 = v2_correction(p, &tcl2);
    let v3 = population_correction_tcl(p, &tcl2, f30, f33, v1)?;
    let tcl_correction = BlochVector::new(v1, v2, v3);
    let mfgs_correction = BlochVector::new(v1_mfgs, 0.0, v3_mfgs);
    let assembled = gibbs.add_scaled(&tcl_correction, p.coupling_sq);
    let assembled_mfgs = gibbs.add_scaled(&mfgs_correction, p.coupling_sq);
    let mut warnings = Vec::new();
    let tcl2_only = match tcl2_only_steady_state(p, &tcl2) {
        Ok(v) => Some(v),
        Err(e) => {
            warnings.push(format!("second-order generator has no unique stationary state: {e}"));
            None
        }
    };
    if assembled.norm() > 1.0 {
        warnings.push(format!(
            "assembled state lies outside the Bloch ball (|v| = {:.6}); coupling is too strong for a second-order correction",
            assembled.norm()
        ));
    }
    let largest = v1.abs().max(v3.abs()) * p.coupling_sq;
    if largest > 0.1 * (1.0 - gibbs.v3.abs()).max(1e-3) && p.coupling_sq > 0.0 {
        warnings.push(format!("correction {largest:.3e} is not small compared to the thermal state"));
    }

    Ok(SteadyStateReport {
        params: *p,
        gibbs,
        tcl_correction,
        mfgs_correction,
        assembled,
        assembled_mfgs,
        route_discrepancy: RouteDiscrepancy { v1: v1 - v1_mfgs, v3: v3 - v3_mfgs },
        tcl2_only,
        tcl2,
        fourth_order: FourthOrder { f30, f33 },
        warnings,
    })
}
