//! Dissipative interaction frame of the local dephasing dissipator.
//!
//! In the frame `D̃(t) = e^{t𝒟_T2} D e^{−t𝒟_T2}` the collective dissipators split
//! into a frame-invariant part and eigenoperators `A±`, `B±` with real
//! exponents `e^{±γt}`. After `t → iτ` the frame generator `G(τ)` is periodic
//! with period `2π/γ` and its period average is the first-order dissipator
//! `D̄₁`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lindblad::{
    collective_dissipator, dissipator_cavity_cooling, dissipator_local_dephasing, CavityParams, ModelParams,
    SpinCavitySpace,
};
use crate::sparse::SparseSuperoperator;
use crate::su4::{Component, Family, GeneratorCatalog, IdentityCheck, ALGEBRA_TOL};
use crate::symspace::{observable_covector_jz, site, trace_covector, SiteDoubledOperator};

/// Default quadrature nodes per period. The integrands are trigonometric
/// polynomials of low degree, for which the uniform rule is exact.
pub const DEFAULT_QUADRATURE_NODES: usize = 16;

/// Default depth of the nested-commutator check.
pub const DEFAULT_BCH_DEPTH: usize = 4;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn sign_of(c: Component) -> f64 {
    match c {
        Component::Plus => 1.0,
        Component::Minus => -1.0,
        Component::Three => panic!("ladder sign required"),
    }
}

/// `(A±, B±)`.
pub fn build_ab(catalog: &GeneratorCatalog, sign: Component) -> (SparseSuperoperator, SparseSuperoperator) {
    use Family::*;
    let s = sign;
    let f = sign.flipped();
    let op = |fam, c| catalog.op(fam, c);
    let half = re(0.5);
    let a = SparseSuperoperator::linear_combination(&[
        (half, &(op(M, s) * op(U, s))),
        (half, &(op(U, s) * op(M, s))),
        (-half, &(op(V, f) * op(U, s))),
        (-half, &(op(N, f) * op(M, s))),
    ])
    .expect("same dimension");
    let b = SparseSuperoperator::linear_combination(&[
        (half, &(op(N, s) * op(V, s))),
        (half, &(op(V, s) * op(N, s))),
        (-half, &(op(U, f) * op(V, s))),
        (-half, &(op(M, f) * op(N, s))),
    ])
    .expect("same dimension");
    (a, b)
}

/// `Ḡ± = ½(𝒰±𝒩± + 𝒩±𝒰± + ℳ±𝒱± + 𝒱±ℳ±) − ½(𝒰∓𝒰± + 𝒱∓𝒱± + ℳ∓ℳ± + 𝒩∓𝒩±)`.
pub fn secular_generator_explicit(catalog: &GeneratorCatalog, sign: Component) -> SparseSuperoperator {
    use Family::*;
    let s = sign;
    let f = sign.flipped();
    let op = |fam, c| catalog.op(fam, c);
    let half = re(0.5);
    let prods = [
        (half, op(U, s) * op(N, s)),
        (half, op(N, s) * op(U, s)),
        (half, op(M, s) * op(V, s)),
        (half, op(V, s) * op(M, s)),
        (-half, op(U, f) * op(U, s)),
        (-half, op(V, f) * op(V, s)),
        (-half, op(M, f) * op(M, s)),
        (-half, op(N, f) * op(N, s)),
    ];
    let refs: Vec<_> = prods.iter().map(|(c, m)| (*c, m)).collect();
    SparseSuperoperator::linear_combination(&refs).expect("same dimension")
}

/// `Ḡ± = D[J±] − A± − B±`.
pub fn secular_generator(catalog: &GeneratorCatalog, sign: Component) -> SparseSuperoperator {
    let d = collective_dissipator(catalog, sign);
    let (a, b) = build_ab(catalog, sign);
    SparseSuperoperator::linear_combination(&[(re(1.0), &d), (re(-1.0), &a), (re(-1.0), &b)]).expect("same dimension")
}

/// `D̄₁ = Γ(1+n̄) Ḡ₋ + Γ n̄ Ḡ₊`.
pub fn average_dissipator_first_order(catalog: &GeneratorCatalog, params: &ModelParams) -> Result<SparseSuperoperator> {
    params.validate()?;
    if params.n_qubits != catalog.n_qubits() {
        return Err(Error::Dimension { expected: catalog.n_qubits(), got: params.n_qubits });
    }
    let down = secular_generator(catalog, Component::Minus).scaled_re(params.gamma_cc * (1.0 + params.nbar));
    if params.nbar == 0.0 {
        return Ok(down);
    }
    let up = secular_generator(catalog, Component::Plus);
    SparseSuperoperator::linear_combination(&[(re(1.0), &down), (re(params.gamma_cc * params.nbar), &up)])
}

/// Imaginary-time frame generator `G(τ) = Γ(1+n̄) G₋(τ) + Γn̄ G₊(τ)` with
/// `G±(τ) = D[J±] + (e^{±iγτ}−1) A± + (e^{∓iγτ}−1) B±`.
#[derive(Clone, Debug)]
pub struct FrameGenerator {
    d_minus: SparseSuperoperator,
    d_plus: SparseSuperoperator,
    ab_minus: (SparseSuperoperator, SparseSuperoperator),
    ab_plus: (SparseSuperoperator, SparseSuperoperator),
    /// Frame-invariant part `D̄₁`.
    base: SparseSuperoperator,
    /// Coefficient of `e^{iγτ}`: `Γn̄ A₊ + Γ(1+n̄) B₋`.
    plus: SparseSuperoperator,
    /// Coefficient of `e^{−iγτ}`: `Γ(1+n̄) A₋ + Γn̄ B₊`.
    minus: SparseSuperoperator,
    gamma_cc: f64,
    nbar: f64,
    gamma_t2: f64,
}

impl FrameGenerator {
    pub fn new(catalog: &GeneratorCatalog, params: &ModelParams) -> Result<Self> {
        params.validate()?;
        if params.gamma_t2 <= 0.0 {
            return Err(Error::FrameUndefined(params.gamma_t2));
        }
        let w_down = params.gamma_cc * (1.0 + params.nbar);
        let w_up = params.gamma_cc * params.nbar;
        let ab_plus = build_ab(catalog, Component::Plus);
        let ab_minus = build_ab(catalog, Component::Minus);
        let plus = SparseSuperoperator::linear_combination(&[(re(w_up), &ab_plus.0), (re(w_down), &ab_minus.1)])?.pruned(0.0);
        let minus = SparseSuperoperator::linear_combination(&[(re(w_down), &ab_minus.0), (re(w_up), &ab_plus.1)])?.pruned(0.0);
        Ok(Self {
            d_minus: collective_dissipator(catalog, Component::Minus),
            d_plus: collective_dissipator(catalog, Component::Plus),
            ab_minus,
            ab_plus,
            base: average_dissipator_first_order(catalog, params)?,
            plus,
            minus,
            gamma_cc: params.gamma_cc,
            nbar: params.nbar,
            gamma_t2: params.gamma_t2,
        })
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.gamma_t2
    }

    /// Frame-invariant part, equal to `D̄₁`.
    pub fn base(&self) -> &SparseSuperoperator {
        &self.base
    }

    /// Periodic parts as `(frequency multiplier, operator)`.
    pub fn periodic_parts(&self) -> [(i32, &SparseSuperoperator); 2] {
        [(1, &self.plus), (-1, &self.minus)]
    }

    pub fn rates(&self) -> (f64, f64, f64) {
        (self.gamma_cc, self.nbar, self.gamma_t2)
    }

    fn phases(&self, tau: f64) -> (C64, C64) {
        let p = C64::from_polar(1.0, self.gamma_t2 * tau);
        (p, p.conj())
    }

    /// `G(τ)` from the defining expression.
    pub fn evaluate(&self, tau: f64) -> SparseSuperoperator {
        let (ep, em) = self.phases(tau);
        let one = re(1.0);
        let w_down = re(self.gamma_cc * (1.0 + self.nbar));
        let w_up = re(self.gamma_cc * self.nbar);
        SparseSuperoperator::linear_combination(&[
            (w_down, &self.d_minus),
            (w_down * (em - one), &self.ab_minus.0),
            (w_down * (ep - one), &self.ab_minus.1),
            (w_up, &self.d_plus),
            (w_up * (ep - one), &self.ab_plus.0),
            (w_up * (em - one), &self.ab_plus.1),
        ])
        .expect("same dimension")
    }

    /// `(1/T) ∫₀ᵀ G(s) ds` by the uniform rule with `nodes` points.
    pub fn quadrature_average(&self, nodes: usize) -> SparseSuperoperator {
        let nodes = nodes.max(1);
        let h = self.period() / nodes as f64;
        let samples: Vec<SparseSuperoperator> = (0..nodes).map(|k| self.evaluate(k as f64 * h)).collect();
        let w = re(1.0 / nodes as f64);
        let terms: Vec<_> = samples.iter().map(|g| (w, g)).collect();
        SparseSuperoperator::linear_combination(&terms).expect("same dimension")
    }

    /// Second-order Magnus term averaged over one period,
    /// `(1/2T) ∫₀ᵀ ds₁ ∫₀^{s₁} ds₂ [G(s₁), G(s₂)]`, by nested trapezoid
    /// quadrature with `nodes` subintervals. Not used by any default pipeline.
    pub fn second_order_quadrature(&self, nodes: usize) -> Result<SparseSuperoperator> {
        let nodes = nodes.max(2);
        let t = self.period();
        let h = t / nodes as f64;
        // Coefficient functions of the three basis operators.
        let coeffs = |s: f64| -> [C64; 3] {
            let (ep, em) = self.phases(s);
            [re(1.0), ep, em]
        };
        let samples: Vec<[C64; 3]> = (0..=nodes).map(|k| coeffs(k as f64 * h)).collect();
        // Cumulative integrals I_b(s_k).
        let mut cumulative = vec![[C64::new(0.0, 0.0); 3]; nodes + 1];
        for k in 1..=nodes {
            for b in 0..3 {
                cumulative[k][b] = cumulative[k - 1][b] + (samples[k - 1][b] + samples[k][b]) * (0.5 * h);
            }
        }
        let mut k_ab = [[C64::new(0.0, 0.0); 3]; 3];
        for k in 0..=nodes {
            let w = if k == 0 || k == nodes { 0.5 * h } else { h };
            for a in 0..3 {
                for b in 0..3 {
                    k_ab[a][b] += samples[k][a] * cumulative[k][b] * w;
                }
            }
        }
        let ops = [&self.base, &self.plus, &self.minus];
        let mut terms = Vec::new();
        for a in 0..3 {
            for b in (a + 1)..3 {
                let coef = (k_ab[a][b] - k_ab[b][a]) * (0.5 / t);
                terms.push((coef, ops[a].commutator(ops[b])?));
            }
        }
        let refs: Vec<_> = terms.iter().map(|(c, m)| (*c, m)).collect();
        Ok(SparseSuperoperator::linear_combination(&refs)?.pruned(1e-300))
    }
}

/// Builds the frame generator for `params`; fails if `γ = 0`.
pub fn frame_generator(catalog: &GeneratorCatalog, params: &ModelParams) -> Result<FrameGenerator> {
    FrameGenerator::new(catalog, params)
}

/// Frame-invariant part of `x` with respect to a diagonal frame generator:
/// entries `x_ij` with `d_i = d_j`.
pub fn secular_part_diagonal_frame(x: &SparseSuperoperator, frame_diag: &[C64], tol: f64) -> SparseSuperoperator {
    let trips = x
        .triplets()
        .filter(|&(i, j, _)| (frame_diag[i] - frame_diag[j]).norm() <= tol)
        .collect();
    SparseSuperoperator::from_triplets(x.dim(), trips).expect("indices from a valid operator")
}

/// Uniform-rule average over `period` of `e^{iτ(d_i − d_j)} x_ij`.
pub fn frame_average_diagonal(x: &SparseSuperoperator, frame_diag: &[C64], period: f64, nodes: usize) -> SparseSuperoperator {
    let nodes = nodes.max(1);
    let h = period / nodes as f64;
    let trips = x
        .triplets()
        .map(|(i, j, v)| {
            let w = (frame_diag[i] - frame_diag[j]).re;
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..nodes {
                acc += C64::from_polar(1.0, k as f64 * h * w);
            }
            (i, j, v * acc / nodes as f64)
        })
        .collect();
    SparseSuperoperator::from_triplets(x.dim(), trips).expect("indices from a valid operator")
}

/// `𝒞₀ … 𝒞_depth` with `𝒞_k = [𝒟_T2, 𝒞_{k−1}]`, `𝒞₀ = D[J±]`.
pub fn bch_nested_commutators(
    catalog: &GeneratorCatalog,
    gamma_t2: f64,
    sign: Component,
    depth: usize,
) -> Result<Vec<SparseSuperoperator>> {
    if depth > DEFAULT_BCH_DEPTH {
        return Err(Error::Parameter(format!("nested commutator depth {depth} exceeds {DEFAULT_BCH_DEPTH}")));
    }
    let dt2 = dissipator_local_dephasing(catalog, gamma_t2);
    let mut out = vec![collective_dissipator(catalog, sign)];
    for _ in 0..depth {
        let next = dt2.commutator(out.last().unwrap())?;
        out.push(next);
    }
    Ok(out)
}

fn rel_dev(a: &SparseSuperoperator, b: &SparseSuperoperator) -> Result<f64> {
    let scale = a.max_abs().max(b.max_abs()).max(1.0);
    Ok(a.max_abs_diff(b)? / scale)
}

/// Frame and secular identities of the interaction-frame construction.
pub fn verify_frame_identities(catalog: &GeneratorCatalog, gamma_t2: f64) -> Result<Vec<IdentityCheck>> {
    verify_frame_identities_with(catalog, gamma_t2, build_ab)
}

/// [`verify_frame_identities`] with a substitute `(A±, B±)` builder, used for
/// mutation testing of the checks themselves.
pub fn verify_frame_identities_with(
    catalog: &GeneratorCatalog,
    gamma_t2: f64,
    ab: impl Fn(&GeneratorCatalog, Component) -> (SparseSuperoperator, SparseSuperoperator),
) -> Result<Vec<IdentityCheck>> {
    let n = catalog.n_qubits();
    let dt2 = dissipator_local_dephasing(catalog, gamma_t2);
    let mut checks = Vec::new();
    for sign in [Component::Plus, Component::Minus] {
        let s = sign_of(sign);
        let tag = if s > 0.0 { "+" } else { "-" };
        for (fam, eig) in [(Family::M, s), (Family::N, -s), (Family::U, s), (Family::V, -s)] {
            let x = catalog.op(fam, sign);
            let lhs = dt2.commutator(x)?;
            let rhs = x.scaled_re(eig * gamma_t2 / 2.0);
            checks.push(IdentityCheck::new(
                format!("[D_T2, {fam:?}{tag}] = {}γ/2 {fam:?}{tag}", if eig > 0.0 { "+" } else { "-" }),
                n,
                rel_dev(&lhs, &rhs)?,
                ALGEBRA_TOL,
            ));
        }
        let (a, b) = ab(catalog, sign);
        checks.push(IdentityCheck::new(
            format!("[D_T2, A{tag}] = {tag}γ A{tag}"),
            n,
            rel_dev(&dt2.commutator(&a)?, &a.scaled_re(s * gamma_t2))?,
            ALGEBRA_TOL,
        ));
        checks.push(IdentityCheck::new(
            format!("[D_T2, B{tag}] = {}γ B{tag}", if s > 0.0 { "-" } else { "+" }),
            n,
            rel_dev(&dt2.commutator(&b)?, &b.scaled_re(-s * gamma_t2))?,
            ALGEBRA_TOL,
        ));
        checks.push(IdentityCheck::new(
            format!("D[J{tag}] - A{tag} - B{tag} = explicit secular form"),
            n,
            rel_dev(&(&(&collective_dissipator(catalog, sign) - &a) - &b), &secular_generator_explicit(catalog, sign))?,
            ALGEBRA_TOL,
        ));
        let bch = bch_nested_commutators(catalog, gamma_t2, sign, DEFAULT_BCH_DEPTH)?;
        for (k, ck) in bch.iter().enumerate().skip(1) {
            let expect = SparseSuperoperator::linear_combination(&[
                (re((s * gamma_t2).powi(k as i32)), &a),
                (re((-s * gamma_t2).powi(k as i32)), &b),
            ])?;
            checks.push(IdentityCheck::new(
                format!("C_{k}[D[J{tag}]] = (±γ)^{k} A{tag} + (∓γ)^{k} B{tag}"),
                n,
                rel_dev(ck, &expect)?,
                ALGEBRA_TOL,
            ));
        }
        let diag = dt2.diagonal();
        let secular = secular_part_diagonal_frame(&collective_dissipator(catalog, sign), &diag, 1e-9 * gamma_t2.max(1.0));
        checks.push(IdentityCheck::new(
            format!("secular filter of D[J{tag}] = D[J{tag}] - A{tag} - B{tag}"),
            n,
            rel_dev(&secular, &(&(&collective_dissipator(catalog, sign) - &a) - &b))?,
            ALGEBRA_TOL,
        ));
    }
    Ok(checks)
}

/// Checks tied to a concrete parameter set: `G(0) = 𝒟_cc`, periodicity,
/// quadrature average, `[𝒟_T2, D̄₁] = 0`, and the adjoint action on `Jz`.
pub fn verify_average_dissipator(catalog: &GeneratorCatalog, params: &ModelParams) -> Result<Vec<IdentityCheck>> {
    let n = catalog.n_qubits();
    let frame = FrameGenerator::new(catalog, params)?;
    let dcc = dissipator_cavity_cooling(catalog, params.gamma_cc, params.nbar);
    let dbar = average_dissipator_first_order(catalog, params)?;
    let dt2 = dissipator_local_dephasing(catalog, params.gamma_t2);
    let tag = format!("n̄={}", params.nbar);
    let mut checks = vec![
        IdentityCheck::new(format!("G(0) = D_cc ({tag})"), n, rel_dev(&frame.evaluate(0.0), &dcc)?, ALGEBRA_TOL),
        IdentityCheck::new(
            format!("G(0.37T) = G(1.37T) ({tag})"),
            n,
            rel_dev(&frame.evaluate(0.37 * frame.period()), &frame.evaluate(1.37 * frame.period()))?,
            1e-10,
        ),
        IdentityCheck::new(
            format!("quadrature average of G = D̄₁ ({tag})"),
            n,
            rel_dev(&frame.quadrature_average(DEFAULT_QUADRATURE_NODES), &dbar)?,
            1e-10,
        ),
        IdentityCheck::new(
            format!("[D_T2, D̄₁] = 0 ({tag})"),
            n,
            dt2.commutator(&dbar)?.max_abs() / dbar.max_abs().max(1.0),
            ALGEBRA_TOL,
        ),
    ];
    checks.push(adjoint_jz_check(catalog, &dbar, params)?);
    Ok(checks)
}

/// `⟨⟨Jz| D̄₁ = −Γ(1+2n̄) [⟨⟨Jz| + N/(2+4n̄) ⟨⟨𝟙|]`.
pub fn adjoint_jz_check(catalog: &GeneratorCatalog, dbar: &SparseSuperoperator, params: &ModelParams) -> Result<IdentityCheck> {
    let basis = catalog.basis();
    let n = basis.n_qubits() as f64;
    let jz = observable_covector_jz(basis);
    let tr = trace_covector(basis);
    let lhs = dbar.apply_left(&jz)?;
    let rate = params.gamma_cc * (1.0 + 2.0 * params.nbar);
    let shift = n / (2.0 + 4.0 * params.nbar);
    let scale = jz.iter().chain(&tr).map(|z| z.norm()).fold(1.0, f64::max) * rate.max(1.0);
    let dev = lhs
        .iter()
        .zip(jz.iter().zip(&tr))
        .map(|(l, (j, t))| (l + (j + t * shift) * rate).norm())
        .fold(0.0, f64::max)
        / scale;
    Ok(IdentityCheck::new(format!("D̄₁ adjoint on Jz (n̄={})", params.nbar), basis.n_qubits(), dev, ALGEBRA_TOL))
}

/// Report of the interaction-frame averaging of the exchange interaction.
#[derive(Clone, Debug, Serialize)]
pub struct SuppressionReport {
    /// Distinct frame eigenvalues of `S±`, in units of γ.
    pub site_eigenvalues: Vec<f64>,
    /// Expected magnitude in units of γ under the `D[σ_z/2]` convention.
    pub expected_magnitude: f64,
    /// Max error of the eigen-decomposition `[𝒟, S_c] = c S_c`.
    pub eigen_defect: f64,
    /// Norm of the frame-invariant part of `S±` on the single site.
    pub site_secular_norm: f64,
    /// Max abs entry of the quadrature average of the frame-transformed TC
    /// superoperator on the spin ⊗ cavity space.
    pub average_norm: f64,
    /// Averaging period used (units of 1/γ).
    pub period: f64,
    pub passed: bool,
}

/// Suppression check on one spin coupled to a `d_c`-level
/// cavity, with dephasing rate `gamma_t2`.
pub fn check_tc_suppression(gamma_t2: f64, n_levels: usize, nodes: usize) -> Result<SuppressionReport> {
    if gamma_t2 <= 0.0 {
        return Err(Error::FrameUndefined(gamma_t2));
    }
    let d_site = SiteDoubledOperator::dissipator(&(site::sigma_z() * re(0.5))).0 * re(gamma_t2);
    let mut eigenvalues: Vec<f64> = Vec::new();
    let mut eigen_defect: f64 = 0.0;
    let mut site_secular: f64 = 0.0;
    for op in [site::sigma_plus(), site::sigma_minus()] {
        let s = (SiteDoubledOperator::left(&op).0 - SiteDoubledOperator::right(&op).0) * C64::new(0.0, -1.0);
        // d_site is diagonal; split S by frequency d_i − d_j.
        for i in 0..4 {
            for j in 0..4 {
                if s[(i, j)].norm() == 0.0 {
                    continue;
                }
                let w = (d_site[(i, i)] - d_site[(j, j)]).re;
                if w.abs() < 1e-12 * gamma_t2 {
                    site_secular = site_secular.max(s[(i, j)].norm());
                }
                let c = w / gamma_t2;
                if !eigenvalues.iter().any(|e| (e - c).abs() < 1e-12) {
                    eigenvalues.push(c);
                }
            }
        }
        // Verify each component is an eigenoperator of ad_𝒟.
        for &c in &eigenvalues {
            let mut comp = nalgebra::Matrix4::<C64>::zeros();
            for i in 0..4 {
                for j in 0..4 {
                    if ((d_site[(i, i)] - d_site[(j, j)]).re / gamma_t2 - c).abs() < 1e-12 {
                        comp[(i, j)] = s[(i, j)];
                    }
                }
            }
            let comm = d_site * comp - comp * d_site;
            eigen_defect = eigen_defect.max((comm - comp * re(c * gamma_t2)).camax());
        }
    }
    eigenvalues.sort_by(f64::total_cmp);

    let basis = std::sync::Arc::new(crate::symspace::OccupationBasis::new(1)?);
    let catalog = GeneratorCatalog::new(basis.clone());
    let space = SpinCavitySpace::new(basis, n_levels)?;
    let cav = CavityParams { g: 1.0, kappa: 0.0, n_levels, nbar: 0.0 };
    let s_tc = crate::lindblad::generator_spin_cavity(&catalog, &space, &cav, 0.0)?;
    let frame = dissipator_local_dephasing(&catalog, gamma_t2).kron_dense(&DMatrix::identity(n_levels * n_levels, n_levels * n_levels));
    // Smallest nonzero frame frequency is γ/2, so the common period is 4π/γ.
    let period = 4.0 * PI / gamma_t2;
    let avg = frame_average_diagonal(&s_tc, &frame.diagonal(), period, nodes);
    let average_norm = avg.max_abs();
    let expected_magnitude = 0.5;
    let passed = eigen_defect <= 1e-12 * gamma_t2.max(1.0)
        && site_secular == 0.0
        && average_norm <= 1e-10
        && eigenvalues.iter().all(|e| (e.abs() - expected_magnitude).abs() < 1e-12);
    Ok(SuppressionReport {
        site_eigenvalues: eigenvalues,
        expected_magnitude,
        eigen_defect,
        site_secular_norm: site_secular,
        average_norm,
        period: period * gamma_t2,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symspace::{OccupationBasis, SymState};
    use std::sync::Arc;

    fn catalog(n: usize) -> GeneratorCatalog {
        GeneratorCatalog::new(Arc::new(OccupationBasis::new(n).unwrap()))
    }

    #[test]
    fn frame_identities_hold() {
        for n in 1..=3 {
            for ch in verify_frame_identities(&catalog(n), 1.3).unwrap() {
                assert!(ch.passed, "{} N={} dev={:e}", ch.name, n, ch.deviation);
            }
        }
    }

    #[test]
    fn average_dissipator_checks() {
        let c = catalog(3);
        for nbar in [0.0, 0.5] {
            let p = ModelParams::with_lambda(3, 1.0, 2.0, nbar).unwrap();
            for ch in verify_average_dissipator(&c, &p).unwrap() {
                assert!(ch.passed, "{} dev={:e}", ch.name, ch.deviation);
            }
        }
    }

    #[test]
    fn frame_needs_dephasing() {
        let c = catalog(2);
        let p = ModelParams::new(2, 1.0, 0.0, 0.0).unwrap();
        assert!(matches!(FrameGenerator::new(&c, &p), Err(Error::FrameUndefined(_))));
    }

    #[test]
    fn ground_state_fixed_by_average() {
        let c = catalog(4);
        let p = ModelParams::new(4, 1.0, 3.0, 0.0).unwrap();
        let d = average_dissipator_first_order(&c, &p).unwrap();
        let g = SymState::ground(c.basis().clone());
        assert!(d.apply(g.coeffs()).unwrap().iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn bch_depth_limit() {
        assert!(bch_nested_commutators(&catalog(1), 1.0, Component::Plus, 5).is_err());
        let cs = bch_nested_commutators(&catalog(2), 1.0, Component::Minus, 0).unwrap();
        assert_eq!(cs.len(), 1);
    }

    #[test]
    fn suppression() {
        let r = check_tc_suppression(2.0, 2, DEFAULT_QUADRATURE_NODES).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.site_eigenvalues, vec![-0.5, 0.5]);
    }

    #[test]
    fn second_order_hook_is_finite() {
        let c = catalog(2);
        let p = ModelParams::new(2, 1.0, 5.0, 0.0).unwrap();
        let f = FrameGenerator::new(&c, &p).unwrap();
        let o2 = f.second_order_quadrature(64).unwrap();
        assert!(o2.max_abs().is_finite());
        // Trace annihilation survives commutators of trace-annihilating maps.
        let t = trace_covector(c.basis());
        let tl = o2.apply_left(&t).unwrap();
        assert!(tl.iter().all(|z| z.norm() < 1e-10));
    }
}
