//! Time evolution of vectorized states under a constant generator.
//!
//! `evolve` first restricts the generator to the coordinates reachable from
//! the support of the initial state, then integrates in balanced coordinates
//! (see [`ObservableSet::balance`]) with one of three methods.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::SpinCavitySpace;
use crate::sparse::{norm2, pair, SparseSuperoperator};
use crate::symspace::{observable_covector_jz, trace_covector, OccupationBasis, SymState};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Reduced dimension up to which `evolve` picks dense exponentials when no
/// method is given.
pub const DENSE_AUTO_MAX_DIM: usize = 256;

/// Trace drift that triggers a warning.
pub const TRACE_WARN_TOL: f64 = 1e-8;

/// Default Krylov subspace dimension.
pub const DEFAULT_KRYLOV_DIM: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    DenseExpm,
    KrylovExpmAction,
    AdaptiveRk,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::DenseExpm => "dense-expm",
            Method::KrylovExpmAction => "krylov-expm-action",
            Method::AdaptiveRk => "adaptive-rk",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationSpec {
    pub t_grid: Vec<f64>,
    /// `None` chooses by reduced dimension.
    pub method: Option<Method>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub krylov_dim: usize,
    /// Restrict to the coordinates reachable from the initial support.
    pub reduce: bool,
}

impl PropagationSpec {
    pub fn new(t_grid: Vec<f64>) -> Self {
        Self { t_grid, method: None, rel_tol: 1e-9, abs_tol: 1e-12, krylov_dim: DEFAULT_KRYLOV_DIM, reduce: true }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = Some(method);
        self
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_grid.is_empty() {
            return Err(Error::Parameter("time grid is empty".into()));
        }
        if !(self.t_grid[0] >= 0.0) {
            return Err(Error::Parameter(format!("time grid must start at t >= 0, got {}", self.t_grid[0])));
        }
        if self.t_grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::Parameter("time grid has non-finite entries".into()));
        }
        if self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter("time grid must be strictly increasing".into()));
        }
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::Parameter("tolerances must be positive".into()));
        }
        if self.krylov_dim < 2 {
            return Err(Error::Parameter("Krylov dimension must be at least 2".into()));
        }
        Ok(())
    }
}

/// `n` uniformly spaced samples on `[0, t_max]`.
pub fn linear_grid(t_max: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![0.0];
    }
    (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
}

/// `t = 0` followed by `n − 1` log-spaced samples from `t_max·10⁻⁴` to `t_max`.
pub fn log_grid(t_max: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![0.0];
    }
    let lo = (t_max * 1e-4).ln();
    let hi = t_max.ln();
    let m = n - 1;
    let mut out = vec![0.0];
    out.extend((0..m).map(|k| if m == 1 { t_max } else { (lo + (hi - lo) * k as f64 / (m - 1) as f64).exp() }));
    if let Some(last) = out.last_mut() {
        *last = t_max;
    }
    out
}

/// Quantities sampled along a trajectory.
#[derive(Clone, Debug)]
pub struct ObservableSet {
    pub trace: Vec<C64>,
    pub jz: Vec<C64>,
    pub extra: Vec<(String, Vec<C64>)>,
    /// Named covectors whose magnitude raises a warning above the threshold.
    pub monitors: Vec<(String, Vec<C64>, f64)>,
    /// Positive weights `w` such that `w ∘ ρ` has O(1) entries. When present
    /// the integrators work on `w ∘ ρ`.
    pub balance: Option<Vec<f64>>,
}

impl ObservableSet {
    pub fn spin(basis: &OccupationBasis) -> Self {
        Self {
            trace: trace_covector(basis),
            jz: observable_covector_jz(basis),
            extra: Vec::new(),
            monitors: Vec::new(),
            balance: Some(basis.multinomial_weights()),
        }
    }

    pub fn spin_cavity(space: &SpinCavitySpace, truncation_threshold: f64) -> Self {
        let spin_w = space.basis().multinomial_weights();
        let cd = space.cavity_dim();
        let balance = spin_w.iter().flat_map(|&w| std::iter::repeat_n(w, cd)).collect();
        Self {
            trace: space.trace_covector(),
            jz: space.jz_covector(),
            extra: vec![("photons".into(), space.photon_number_covector())],
            monitors: vec![("top_level_population".into(), space.top_level_covector(), truncation_threshold)],
            balance: Some(balance),
        }
    }

    fn len(&self) -> usize {
        self.trace.len()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub jz: Vec<f64>,
    pub trace: Vec<f64>,
    pub purity: Vec<f64>,
    pub extra: Vec<(String, Vec<f64>)>,
    pub warnings: Vec<String>,
    pub method: Method,
    pub reduced_dim: usize,
    #[serde(skip)]
    pub final_state: Vec<C64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_trace_drift(&self) -> f64 {
        self.trace.iter().map(|t| (t - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Evolves a symmetric-subspace state with the standard observables.
pub fn evolve_state(l: &SparseSuperoperator, rho0: &SymState, spec: &PropagationSpec) -> Result<TimeSeries> {
    evolve(l, rho0.coeffs(), spec, &ObservableSet::spin(rho0.basis()))
}

/// Samples `obs` along `e^{tL} ρ₀` on `spec.t_grid`.
pub fn evolve(l: &SparseSuperoperator, rho0: &[C64], spec: &PropagationSpec, obs: &ObservableSet) -> Result<TimeSeries> {
    spec.validate()?;
    let dim = l.dim();
    if rho0.len() != dim {
        return Err(Error::Dimension { expected: dim, got: rho0.len() });
    }
    if obs.len() != dim || obs.jz.len() != dim {
        return Err(Error::Dimension { expected: dim, got: obs.len() });
    }

    let coords: Vec<usize> = if spec.reduce {
        let seeds: Vec<usize> = (0..dim).filter(|&i| rho0[i] != ZERO).collect();
        l.reachable_from(&seeds)
    } else {
        (0..dim).collect()
    };
    let take = |v: &[C64]| -> Vec<C64> { coords.iter().map(|&i| v[i]).collect() };
    let weights: Vec<f64> = match &obs.balance {
        Some(w) => {
            if w.len() != dim || w.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                return Err(Error::Parameter("balance weights must be positive and match the dimension".into()));
            }
            coords.iter().map(|&i| w[i]).collect()
        }
        None => vec![1.0; coords.len()],
    };
    let red = l.restrict(&coords).diagonal_similarity(&weights)?;
    let scale_state = |v: Vec<C64>| -> Vec<C64> { v.into_iter().zip(&weights).map(|(x, w)| x * *w).collect() };
    let scale_cov = |v: Vec<C64>| -> Vec<C64> { v.into_iter().zip(&weights).map(|(x, w)| x / *w).collect() };

    let mut state = scale_state(take(rho0));
    let tr = scale_cov(take(&obs.trace));
    let jz = scale_cov(take(&obs.jz));
    let extra: Vec<(String, Vec<C64>)> = obs.extra.iter().map(|(n, c)| (n.clone(), scale_cov(take(c)))).collect();
    let monitors: Vec<(String, Vec<C64>, f64)> =
        obs.monitors.iter().map(|(n, c, th)| (n.clone(), scale_cov(take(c)), *th)).collect();

    let rd = coords.len();
    let method = spec.method.unwrap_or(if rd <= DENSE_AUTO_MAX_DIM { Method::DenseExpm } else { Method::KrylovExpmAction });
    let mut stepper = Stepper::new(&red, method, spec)?;

    let n = spec.t_grid.len();
    let mut series = TimeSeries {
        times: spec.t_grid.clone(),
        jz: Vec::with_capacity(n),
        trace: Vec::with_capacity(n),
        purity: Vec::with_capacity(n),
        extra: extra.iter().map(|(name, _)| (name.clone(), Vec::with_capacity(n))).collect(),
        warnings: Vec::new(),
        method,
        reduced_dim: rd,
        final_state: Vec::new(),
    };
    let mut monitor_peak = vec![0.0f64; monitors.len()];
    let mut t_now = 0.0;
    for &t in &spec.t_grid {
        if t > t_now {
            state = stepper.advance(state, t - t_now)?;
            t_now = t;
        }
        if state.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Convergence(format!("state became non-finite at t = {t}")));
        }
        series.trace.push(pair(&tr, &state).re);
        series.jz.push(pair(&jz, &state).re);
        series.purity.push(state.iter().zip(&weights).map(|(x, w)| (x / *w).norm_sqr()).sum());
        for ((_, cov), (_, out)) in extra.iter().zip(series.extra.iter_mut()) {
            out.push(pair(cov, &state).re);
        }
        for (k, (_, cov, _)) in monitors.iter().enumerate() {
            monitor_peak[k] = monitor_peak[k].max(pair(cov, &state).norm());
        }
    }

    let drift = series.max_trace_drift();
    if drift > TRACE_WARN_TOL {
        series.warnings.push(format!("trace drift {drift:.3e} exceeds {TRACE_WARN_TOL:e}"));
    }
    for ((name, _, th), peak) in monitors.iter().zip(&monitor_peak) {
        if *peak > *th {
            series.warnings.push(format!("{name} reached {peak:.3e} (threshold {th:e}); truncation may be too small"));
        }
    }
    let mut full = vec![ZERO; dim];
    for (k, &i) in coords.iter().enumerate() {
        full[i] = state[k] / weights[k];
    }
    series.final_state = full;
    Ok(series)
}

/// Single-interval propagation `v ↦ e^{hL} v`.
pub fn propagate_vector(l: &SparseSuperoperator, v: &[C64], h: f64, method: Method, spec: &PropagationSpec) -> Result<Vec<C64>> {
    let mut s = Stepper::new(l, method, spec)?;
    s.advance(v.to_vec(), h)
}

enum Stepper<'a> {
    Dense { l: DMatrix<C64>, cache: HashMap<u64, DMatrix<C64>> },
    Krylov(Krylov<'a>),
    Rk(Dopri<'a>),
}

impl<'a> Stepper<'a> {
    fn new(l: &'a SparseSuperoperator, method: Method, spec: &PropagationSpec) -> Result<Self> {
        Ok(match method {
            Method::DenseExpm => Stepper::Dense { l: l.to_dense(), cache: HashMap::new() },
            Method::KrylovExpmAction => Stepper::Krylov(Krylov::new(l, spec)),
            Method::AdaptiveRk => Stepper::Rk(Dopri::new(l, spec)),
        })
    }

    fn advance(&mut self, v: Vec<C64>, h: f64) -> Result<Vec<C64>> {
        match self {
            Stepper::Dense { l, cache } => {
                let e = cache.entry(h.to_bits()).or_insert_with(|| (&*l * C64::new(h, 0.0)).exp());
                Ok((&*e * nalgebra::DVector::from_vec(v)).data.into())
            }
            Stepper::Krylov(k) => k.advance(v, h),
            Stepper::Rk(r) => r.advance(v, h),
        }
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn round_step(t: f64) -> f64 {
    let s = 10f64.powf(t.log10().floor() - 1.0);
    (t / s).ceil() * s
}

/// Adaptive Krylov approximation of `e^{tL}v` with local error control
/// (the scheme popularized by Expokit).
struct Krylov<'a> {
    l: &'a SparseSuperoperator,
    m: usize,
    rel_tol: f64,
    abs_tol: f64,
    anorm: f64,
    /// Step suggested by the previous interval.
    t_suggest: Option<f64>,
    horizon: f64,
}

const KRYLOV_MAX_REJECT: usize = 20;
const KRYLOV_MAX_STEPS: usize = 5_000_000;

impl<'a> Krylov<'a> {
    fn new(l: &'a SparseSuperoperator, spec: &PropagationSpec) -> Self {
        let m = spec.krylov_dim.min(l.dim().max(2));
        Self {
            l,
            m,
            rel_tol: spec.rel_tol,
            abs_tol: spec.abs_tol,
            anorm: l.one_norm().max(f64::MIN_POSITIVE),
            t_suggest: None,
            horizon: spec.t_grid.last().copied().unwrap_or(1.0).max(f64::MIN_POSITIVE),
        }
    }

    fn advance(&mut self, mut w: Vec<C64>, t_out: f64) -> Result<Vec<C64>> {
        let n = w.len();
        let m = self.m.min(n);
        let anorm = self.anorm;
        let btol = 1e-13 * anorm;
        let gamma = 0.9;
        let delta = 1.2;
        let mut beta = norm2(&w);
        if beta == 0.0 || self.l.nnz() == 0 {
            return Ok(w);
        }
        let tol_rate = |beta: f64| (self.rel_tol * beta + self.abs_tol) / self.horizon;
        let mut t_now = 0.0;
        let mut t_new = match self.t_suggest {
            Some(t) => t,
            None => {
                let mf = m as f64;
                let fact = ((mf + 1.0) / std::f64::consts::E).powf(mf + 1.0) * (2.0 * std::f64::consts::PI * (mf + 1.0)).sqrt();
                round_step((1.0 / anorm) * ((fact * tol_rate(beta)) / (4.0 * beta * anorm)).powf(1.0 / mf))
            }
        };
        let mut basis: Vec<Vec<C64>> = vec![vec![ZERO; n]; m + 1];
        let mut p = vec![ZERO; n];
        let mut steps = 0usize;
        while t_now < t_out {
            steps += 1;
            if steps > KRYLOV_MAX_STEPS {
                return Err(Error::Convergence(format!(
                    "Krylov propagation exceeded {KRYLOV_MAX_STEPS} steps (t = {t_now:.6e} of {t_out:.6e}, ‖L‖₁ = {anorm:.3e})"
                )));
            }
            let mut t_step = (t_out - t_now).min(t_new);
            let inv = 1.0 / beta;
            basis[0].iter_mut().zip(&w).for_each(|(b, x)| *b = x * inv);
            let mut h = DMatrix::<C64>::zeros(m + 2, m + 2);
            let mut mb = m;
            let mut happy = false;
            for j in 0..m {
                self.l.apply_into(&basis[j], &mut p)?;
                // Modified Gram-Schmidt with one reorthogonalization pass.
                for _pass in 0..2 {
                    for i in 0..=j {
                        let hij = dot(&basis[i], &p);
                        h[(i, j)] += hij;
                        axpy(-hij, &basis[i], &mut p);
                    }
                }
                let s = norm2(&p);
                if s < btol {
                    happy = true;
                    mb = j + 1;
                    t_step = t_out - t_now;
                    break;
                }
                h[(j + 1, j)] = C64::new(s, 0.0);
                let inv = 1.0 / s;
                basis[j + 1].iter_mut().zip(&p).for_each(|(b, x)| *b = x * inv);
            }
            let mut avnorm = 0.0;
            if !happy {
                h[(m + 1, m)] = C64::new(1.0, 0.0);
                self.l.apply_into(&basis[m], &mut p)?;
                avnorm = norm2(&p);
            }
            let mut rejects = 0;
            let (f, err_loc, xm) = loop {
                let mx = if happy { mb } else { m + 2 };
                let sub = h.view((0, 0), (mx, mx)).into_owned() * C64::new(t_step, 0.0);
                let f = sub.exp();
                if happy {
                    break (f, 0.0, 1.0 / m as f64);
                }
                let phi1 = (beta * f[(m, 0)]).norm();
                let phi2 = (beta * f[(m + 1, 0)] * avnorm).norm();
                let (err_loc, xm) = if phi1 > 10.0 * phi2 {
                    (phi2, 1.0 / m as f64)
                } else if phi1 > phi2 {
                    (phi1 * phi2 / (phi1 - phi2), 1.0 / m as f64)
                } else {
                    (phi1, 1.0 / (m as f64 - 1.0).max(1.0))
                };
                if err_loc <= delta * t_step * tol_rate(beta) {
                    break (f, err_loc, xm);
                }
                rejects += 1;
                if rejects > KRYLOV_MAX_REJECT {
                    return Err(Error::Convergence(format!(
                        "Krylov step rejected {KRYLOV_MAX_REJECT} times at t = {t_now:.6e} (step {t_step:.3e}, local error {err_loc:.3e}, ‖L‖₁ = {anorm:.3e})"
                    )));
                }
                t_step = round_step(gamma * t_step * (t_step * tol_rate(beta) / err_loc).powf(xm));
            };
            let mx = if happy { mb } else { m + 1 };
            w.iter_mut().for_each(|x| *x = ZERO);
            for (k, b) in basis.iter().enumerate().take(mx) {
                axpy(f[(k, 0)] * beta, b, &mut w);
            }
            beta = norm2(&w);
            if beta == 0.0 {
                return Ok(w);
            }
            if !beta.is_finite() {
                return Err(Error::Convergence(format!("Krylov state norm became non-finite at t = {t_now:.6e}")));
            }
            t_now += t_step;
            t_new = if happy || err_loc == 0.0 {
                (t_step * 10.0).max(t_new)
            } else {
                round_step(gamma * t_step * (t_step * tol_rate(beta) / err_loc).powf(xm))
            };
            if !t_new.is_finite() || t_new <= 0.0 {
                t_new = t_step;
            }
        }
        self.t_suggest = Some(t_new);
        Ok(w)
    }
}

/// Dormand–Prince 5(4) with FSAL and standard step control.
struct Dopri<'a> {
    l: &'a SparseSuperoperator,
    rel_tol: f64,
    abs_tol: f64,
    h_suggest: Option<f64>,
    anorm: f64,
}

const RK_MAX_STEPS: usize = 50_000_000;

impl<'a> Dopri<'a> {
    fn new(l: &'a SparseSuperoperator, spec: &PropagationSpec) -> Self {
        Self { l, rel_tol: spec.rel_tol, abs_tol: spec.abs_tol, h_suggest: None, anorm: l.one_norm() }
    }

    fn advance(&mut self, mut y: Vec<C64>, t_out: f64) -> Result<Vec<C64>> {
        const A: [[f64; 6]; 7] = [
            [0.0; 6],
            [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
            [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
            [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
            [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
            [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
        ];
        const E: [f64; 7] = [
            71.0 / 57600.0,
            0.0,
            -71.0 / 16695.0,
            71.0 / 1920.0,
            -17253.0 / 339200.0,
            22.0 / 525.0,
            -1.0 / 40.0,
        ];
        let n = y.len();
        if self.l.nnz() == 0 {
            return Ok(y);
        }
        let mut h = self.h_suggest.unwrap_or(1.0 / self.anorm.max(1e-300)).min(t_out);
        let mut k: Vec<Vec<C64>> = vec![vec![ZERO; n]; 7];
        let mut tmp = vec![ZERO; n];
        self.l.apply_into(&y, &mut k[0])?;
        let mut t = 0.0;
        let mut steps = 0usize;
        while t < t_out {
            steps += 1;
            if steps > RK_MAX_STEPS {
                return Err(Error::Convergence(format!("adaptive RK exceeded {RK_MAX_STEPS} steps at t = {t:.6e}")));
            }
            let last = t + h >= t_out;
            let hs = if last { t_out - t } else { h };
            for s in 1..7 {
                tmp.copy_from_slice(&y);
                for (j, a) in A[s].iter().enumerate().take(s) {
                    if *a != 0.0 {
                        axpy(C64::new(hs * a, 0.0), &k[j], &mut tmp);
                    }
                }
                self.l.apply_into(&tmp, &mut k[s])?;
            }
            // tmp now holds the 5th-order solution (stage 7 argument).
            let mut err = 0.0;
            for i in 0..n {
                let mut e = ZERO;
                for s in 0..7 {
                    e += k[s][i] * E[s];
                }
                let sc = self.abs_tol + self.rel_tol * y[i].norm().max(tmp[i].norm());
                err += (e * hs).norm_sqr() / (sc * sc);
            }
            let err = (err / n as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Convergence(format!("adaptive RK error estimate non-finite at t = {t:.6e}")));
            }
            if err <= 1.0 {
                t = if last { t_out } else { t + hs };
                y.copy_from_slice(&tmp);
                k.swap(0, 6);
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last {
                    h = hs * fac;
                } else {
                    h = h.max(hs * fac);
                }
            } else {
                h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                if h < 1e-300 {
                    return Err(Error::Convergence(format!("adaptive RK step underflow at t = {t:.6e}")));
                }
            }
        }
        self.h_suggest = Some(h);
        Ok(y)
    }
}

/// Options for [`stationary_state`].
#[derive(Clone, Debug)]
pub struct StationaryOptions {
    /// Largest dimension handled by a dense SVD.
    pub dense_max_dim: usize,
    /// Relative singular value threshold for kernel vectors.
    pub kernel_tol: f64,
    /// Relative residual `‖Lv‖ / (‖L‖₁ ‖v‖)` accepted by the propagation fallback.
    pub residual_tol: f64,
    pub max_doublings: usize,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        Self { dense_max_dim: 1500, kernel_tol: 1e-10, residual_tol: 1e-11, max_doublings: 80 }
    }
}

/// Trace-normalized element of `ker L`.
///
/// With a one-dimensional kernel the dense SVD answer is returned. With a
/// degenerate kernel, or above the dense size limit, `initial` is propagated
/// until it stops changing, which projects it onto the asymptotic subspace.
pub fn stationary_state(
    l: &SparseSuperoperator,
    obs: &ObservableSet,
    initial: Option<&[C64]>,
    opts: &StationaryOptions,
) -> Result<Vec<C64>> {
    let dim = l.dim();
    if obs.len() != dim {
        return Err(Error::Dimension { expected: dim, got: obs.len() });
    }
    if dim <= opts.dense_max_dim {
        let dense = l.to_dense();
        let svd = dense.clone().svd(false, true);
        let smax = svd.singular_values.max();
        let v_t = svd.v_t.as_ref().expect("requested");
        let kernel: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] <= opts.kernel_tol * smax.max(1.0))
            .collect();
        if kernel.is_empty() {
            return Err(Error::NoKernel(format!(
                "smallest singular value {:.3e} above threshold",
                svd.singular_values.min()
            )));
        }
        if kernel.len() == 1 {
            let v: Vec<C64> = v_t.row(kernel[0]).iter().map(|z| z.conj()).collect();
            let tr = pair(&obs.trace, &v);
            if tr.norm() < 1e-12 * norm2(&v) * norm2(&obs.trace) {
                return Err(Error::NoKernel("kernel vector is traceless".into()));
            }
            return Ok(v.into_iter().map(|z| z / tr).collect());
        }
    }
    let Some(init) = initial else {
        return Err(Error::NoKernel(
            "kernel is degenerate or too large for a dense solve; an initial state is required".into(),
        ));
    };
    if init.len() != dim {
        return Err(Error::Dimension { expected: dim, got: init.len() });
    }
    let anorm = l.one_norm();
    let residual = |v: &[C64]| -> Result<f64> {
        let lv = l.apply(v)?;
        Ok(norm2(&lv) / (anorm.max(1e-300) * norm2(v).max(1e-300)))
    };
    let mut v = init.to_vec();
    if anorm == 0.0 || residual(&v)? <= opts.residual_tol {
        return Ok(v);
    }
    let mut dt = 1.0 / anorm;
    let mut t_total = 0.0;
    for _ in 0..opts.max_doublings {
        let spec = PropagationSpec::new(vec![dt]).with_tolerances(1e-12, 1e-15);
        let series = evolve(l, &v, &spec, obs)?;
        v = series.final_state;
        t_total += dt;
        if residual(&v)? <= opts.residual_tol {
            let tr = pair(&obs.trace, &v);
            return Ok(v.into_iter().map(|z| z / tr).collect());
        }
        dt *= 2.0;
    }
    Err(Error::NoKernel(format!("no stationary state reached after propagating to t = {t_total:.3e}")))
}

/// [`stationary_state`] for symmetric-subspace states.
pub fn stationary_sym_state(l: &SparseSuperoperator, basis: &std::sync::Arc<OccupationBasis>, initial: Option<&SymState>) -> Result<SymState> {
    let obs = ObservableSet::spin(basis);
    let v = stationary_state(l, &obs, initial.map(|s| s.coeffs()), &StationaryOptions::default())?;
    SymState::new(basis.clone(), v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{dissipator_cavity_cooling, dissipator_local_dephasing, generator_spin_master_equation, ModelParams};
    use crate::su4::GeneratorCatalog;
    use std::sync::Arc;

    fn setup(n: usize) -> (Arc<OccupationBasis>, GeneratorCatalog) {
        let b = Arc::new(OccupationBasis::new(n).unwrap());
        (b.clone(), GeneratorCatalog::new(b))
    }

    #[test]
    fn grids() {
        let g = log_grid(10.0, 5);
        assert_eq!(g[0], 0.0);
        assert!((g[1] - 1e-3).abs() < 1e-15);
        assert_eq!(*g.last().unwrap(), 10.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(linear_grid(2.0, 3), vec![0.0, 1.0, 2.0]);
        assert!(PropagationSpec::new(vec![0.0, 0.0]).validate().is_err());
        assert!(PropagationSpec::new(vec![-1.0]).validate().is_err());
        assert!(PropagationSpec::new(vec![]).validate().is_err());
    }

    #[test]
    fn zero_generator_is_constant() {
        let (b, _) = setup(3);
        let l = SparseSuperoperator::zeros(b.len());
        let mm = SymState::maximally_mixed(b.clone());
        for m in [Method::DenseExpm, Method::KrylovExpmAction, Method::AdaptiveRk] {
            let s = evolve_state(&l, &mm, &PropagationSpec::new(linear_grid(1.0, 4)).with_method(m)).unwrap();
            assert!(s.jz.iter().all(|&j| j.abs() < 1e-15));
            assert!(s.trace.iter().all(|&t| (t - 1.0).abs() < 1e-15));
        }
    }

    #[test]
    fn methods_agree() {
        let (b, c) = setup(5);
        let p = ModelParams::with_lambda(5, 1.0, 1.0, 0.5).unwrap();
        let l = generator_spin_master_equation(&c, &p).unwrap();
        let up = SymState::all_up(b.clone());
        let grid = log_grid(5.0, 20);
        let runs: Vec<_> = [Method::DenseExpm, Method::KrylovExpmAction, Method::AdaptiveRk]
            .iter()
            .map(|&m| evolve_state(&l, &up, &PropagationSpec::new(grid.clone()).with_method(m)).unwrap())
            .collect();
        for r in &runs[1..] {
            for (a, b) in runs[0].jz.iter().zip(&r.jz) {
                assert!((a - b).abs() < 1e-8, "{} vs {} ({})", a, b, r.method);
            }
        }
    }

    #[test]
    fn semigroup() {
        let (b, c) = setup(4);
        let p = ModelParams::with_lambda(4, 1.0, 0.1, 0.0).unwrap();
        let l = generator_spin_master_equation(&c, &p).unwrap();
        let mm = SymState::maximally_mixed(b.clone());
        let spec = PropagationSpec::new(vec![0.7]).with_method(Method::KrylovExpmAction);
        let once = evolve_state(&l, &mm, &spec).unwrap().final_state;
        let half = evolve_state(&l, &mm, &PropagationSpec::new(vec![0.3]).with_method(Method::KrylovExpmAction)).unwrap();
        let s1 = SymState::new(b.clone(), half.final_state).unwrap();
        let twice = evolve_state(&l, &s1, &PropagationSpec::new(vec![0.4]).with_method(Method::KrylovExpmAction)).unwrap().final_state;
        let w = b.multinomial_weights();
        for i in 0..b.len() {
            assert!(((once[i] - twice[i]) * w[i]).norm() < 1e-9);
        }
    }

    #[test]
    fn stationary_examples() {
        let (b, c) = setup(3);
        let p = ModelParams::with_lambda(3, 1.0, 1.0, 0.0).unwrap();
        let l = generator_spin_master_equation(&c, &p).unwrap();
        let ss = stationary_sym_state(&l, &b, None).unwrap();
        assert!((ss.jz() + 1.5).abs() < 1e-10);

        let (b2, c2) = setup(2);
        let dcc = dissipator_cavity_cooling(&c2, 1.0, 0.0);
        let mm = SymState::maximally_mixed(b2.clone());
        assert!(stationary_sym_state(&dcc, &b2, None).is_err());
        let ss = stationary_sym_state(&dcc, &b2, Some(&mm)).unwrap();
        assert!((ss.jz() + 0.75).abs() < 1e-9, "{}", ss.jz());

        let dt2 = dissipator_local_dephasing(&c2, 2.0);
        let ss = stationary_sym_state(&dt2, &b2, Some(&mm)).unwrap();
        assert_eq!(ss.coeffs(), mm.coeffs());
    }

    #[test]
    fn no_kernel_is_reported() {
        let l = SparseSuperoperator::identity(4);
        let b = OccupationBasis::new(1).unwrap();
        let obs = ObservableSet::spin(&b);
        assert!(matches!(stationary_state(&l, &obs, None, &StationaryOptions::default()), Err(Error::NoKernel(_))));
    }
}
