//! Closed-form relaxation under the first-order average dissipator.
//!
//! Units are free: rates and times only need to be mutually inverse.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticParams {
    pub n_qubits: usize,
    pub gamma_cc: f64,
    pub nbar: f64,
    /// `⟨Jz(0)⟩`.
    pub jz0: f64,
    /// Detuning for the Lorentzian rate.
    pub delta: f64,
    pub g: f64,
    pub kappa: f64,
}

impl AnalyticParams {
    /// Parameters for a maximally mixed start (`⟨Jz(0)⟩ = 0`), no cavity data.
    pub fn new(n_qubits: usize, gamma_cc: f64, nbar: f64) -> Self {
        Self { n_qubits, gamma_cc, nbar, jz0: 0.0, delta: 0.0, g: 0.0, kappa: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_cc > 0.0) || !self.gamma_cc.is_finite() {
            return Err(Error::Parameter(format!("gamma must be positive, got {}", self.gamma_cc)));
        }
        if !(self.nbar >= 0.0) || !self.nbar.is_finite() {
            return Err(Error::Parameter(format!("nbar must be non-negative, got {}", self.nbar)));
        }
        if !self.jz0.is_finite() || !self.delta.is_finite() {
            return Err(Error::Parameter("jz0 and delta must be finite".into()));
        }
        Ok(())
    }
}

/// `T₁ = 1/(Γ(1+2n̄))`.
pub fn t1(gamma_cc: f64, nbar: f64) -> Result<f64> {
    if !(gamma_cc > 0.0) {
        return Err(Error::Parameter(format!("T1 needs a positive rate, got {gamma_cc}")));
    }
    if !(nbar >= 0.0) {
        return Err(Error::Parameter(format!("nbar must be non-negative, got {nbar}")));
    }
    Ok(1.0 / (gamma_cc * (1.0 + 2.0 * nbar)))
}

/// `⟨Jz⟩_eq = −N/(2+4n̄)`.
pub fn equilibrium_jz(n_qubits: usize, nbar: f64) -> f64 {
    -(n_qubits as f64) / (2.0 + 4.0 * nbar)
}

/// `⟨Jz(t)⟩ = e^{−t/T₁}⟨Jz(0)⟩ − N(1−e^{−t/T₁})/(2+4n̄)`.
pub fn jz_of_t(p: &AnalyticParams, t: f64) -> Result<f64> {
    p.validate()?;
    if !(t >= 0.0) {
        return Err(Error::Parameter(format!("t must be non-negative, got {t}")));
    }
    let decay = (-t / t1(p.gamma_cc, p.nbar)?).exp();
    Ok(decay * p.jz0 + (1.0 - decay) * equilibrium_jz(p.n_qubits, p.nbar))
}

pub fn jz_curve(p: &AnalyticParams, times: &[f64]) -> Result<Vec<f64>> {
    times.iter().map(|&t| jz_of_t(p, t)).collect()
}

/// `C = ΓN/γ`.
pub fn cooperativity(gamma_cc: f64, n_qubits: usize, gamma_t2: f64) -> Result<f64> {
    if gamma_t2 == 0.0 {
        return Err(Error::Parameter("cooperativity is undefined for zero dephasing rate".into()));
    }
    Ok(gamma_cc * n_qubits as f64 / gamma_t2)
}

/// `Γ = 4g²κ/(κ² + 4Δ²)`.
pub fn lorentzian_rate(g: f64, kappa: f64, delta: f64) -> Result<f64> {
    let den = kappa * kappa + 4.0 * delta * delta;
    if den == 0.0 {
        return Err(Error::Parameter("Lorentzian rate undefined for kappa = delta = 0".into()));
    }
    Ok(4.0 * g * g * kappa / den)
}

/// Least-squares rate `r` of `y(t) − a ≈ (y(0) − a) e^{−r t}` on samples with
/// `t ∈ (0, t_window]`, fitting `ln((y − a)/(y₀ − a))` by a line through the
/// origin. `times[0]` must be 0.
pub fn fit_exponential_rate(times: &[f64], values: &[f64], asymptote: f64, t_window: f64) -> Result<f64> {
    if times.len() != values.len() || times.is_empty() {
        return Err(Error::Parameter("times and values must have equal, nonzero length".into()));
    }
    if times[0] != 0.0 {
        return Err(Error::Parameter("rate fit needs the t = 0 sample first".into()));
    }
    let y0 = values[0] - asymptote;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&t, &y) in times.iter().zip(values).skip(1) {
        if t > t_window {
            break;
        }
        let ratio = (y - asymptote) / y0;
        if ratio <= 0.0 {
            continue;
        }
        num += t * ratio.ln();
        den += t * t;
    }
    if den == 0.0 {
        return Err(Error::Parameter("no usable samples in the fit window".into()));
    }
    Ok(-num / den)
}

/// Two-exponential model `c + a₁e^{−r₁t} + a₂e^{−r₂t}` with `r₁ ≥ r₂`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BiexponentialFit {
    pub offset: f64,
    pub amplitudes: [f64; 2],
    pub rates: [f64; 2],
    pub rms_residual: f64,
}

fn linear_part(times: &[f64], values: &[f64], r1: f64, r2: f64) -> Option<(DVector<f64>, f64)> {
    let a = DMatrix::from_fn(times.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => (-r1 * times[i]).exp(),
        _ => (-r2 * times[i]).exp(),
    });
    let y = DVector::from_column_slice(values);
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&y, 1e-12).ok()?;
    let res = (&a * &x - &y).norm();
    Some((x, res))
}

/// Variable-projection fit: a log-spaced scan over rate pairs in
/// `[r_min, r_max]` followed by local pattern-search refinement.
pub fn fit_biexponential(times: &[f64], values: &[f64], r_min: f64, r_max: f64) -> Result<BiexponentialFit> {
    if times.len() != values.len() || times.len() < 5 {
        return Err(Error::Parameter("biexponential fit needs at least 5 samples".into()));
    }
    if !(r_min > 0.0) || !(r_max > r_min) {
        return Err(Error::Parameter("rate bounds must satisfy 0 < r_min < r_max".into()));
    }
    let (lo, hi) = (r_min.ln(), r_max.ln());
    let cost = |u1: f64, u2: f64| -> f64 {
        if u1 <= u2 {
            return f64::INFINITY;
        }
        linear_part(times, values, u1.clamp(lo, hi).exp(), u2.clamp(lo, hi).exp()).map_or(f64::INFINITY, |(_, r)| r)
    };
    let steps = 40;
    let du = (hi - lo) / steps as f64;
    let mut best = (lo + du, lo, f64::INFINITY);
    for i in 0..=steps {
        for j in 0..i {
            let (u1, u2) = (lo + du * i as f64, lo + du * j as f64);
            let c = cost(u1, u2);
            if c < best.2 {
                best = (u1, u2, c);
            }
        }
    }
    let mut h = du;
    while h > 1e-10 {
        let mut improved = false;
        for (d1, d2) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            let c = cost(best.0 + d1, best.1 + d2);
            if c < best.2 {
                best = (best.0 + d1, best.1 + d2, c);
                improved = true;
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    let (r1, r2) = (best.0.clamp(lo, hi).exp(), best.1.clamp(lo, hi).exp());
    let (x, res) = linear_part(times, values, r1, r2).ok_or_else(|| Error::Convergence("biexponential least squares failed".into()))?;
    Ok(BiexponentialFit {
        offset: x[0],
        amplitudes: [x[1], x[2]],
        rates: [r1, r2],
        rms_residual: res / (times.len() as f64).sqrt(),
    })
}
