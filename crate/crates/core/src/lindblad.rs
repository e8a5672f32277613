//! Liouvillians of the cooling problem on the symmetric subspace.
//!
//! The collective dissipators are assembled from products of one-body SU(4)
//! lifts, so they stay sparse for any ensemble size. The spin–cavity
//! generator lives on the composite space `spin ⊗ (doubled cavity)`, with the
//! cavity coordinate fastest.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseSuperoperator;
use crate::su4::{Component, Family, GeneratorCatalog};
use crate::symspace::{observable_covector_jz, trace_covector, OccupationBasis, SymState};

/// Rates of the spin-only master equation.
///
/// Rates are in inverse time units; λ sweeps set
/// `gamma_t2 = lambda · N · gamma_cc`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_qubits: usize,
    /// Collective cavity-cooling rate Γ.
    pub gamma_cc: f64,
    /// Single-spin dephasing rate γ.
    pub gamma_t2: f64,
    /// Mean thermal photon number n̄.
    pub nbar: f64,
    /// Sweep parameter λ with γ = λNΓ, when the rate was set that way.
    pub lambda_sweep: Option<f64>,
}

impl ModelParams {
    pub fn new(n_qubits: usize, gamma_cc: f64, gamma_t2: f64, nbar: f64) -> Result<Self> {
        let p = Self { n_qubits, gamma_cc, gamma_t2, nbar, lambda_sweep: None };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with dephasing rate `γ = λ·N·Γ`.
    pub fn with_lambda(n_qubits: usize, gamma_cc: f64, lambda: f64, nbar: f64) -> Result<Self> {
        let p = Self {
            n_qubits,
            gamma_cc,
            gamma_t2: lambda * n_qubits as f64 * gamma_cc,
            nbar,
            lambda_sweep: Some(lambda),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::Parameter("n_qubits must be positive".into()));
        }
        for (name, v) in [("gamma_cc", self.gamma_cc), ("gamma_t2", self.gamma_t2), ("nbar", self.nbar)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Parameter(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        if let Some(l) = self.lambda_sweep {
            if !l.is_finite() || l < 0.0 {
                return Err(Error::Parameter(format!("lambda must be finite and non-negative, got {l}")));
            }
            if self.gamma_t2 != l * self.n_qubits as f64 * self.gamma_cc {
                return Err(Error::Parameter("gamma_t2 must equal lambda * N * gamma_cc".into()));
            }
        }
        Ok(())
    }
}

/// Cavity mode parameters for the full spin–cavity model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    /// Spin–cavity coupling g.
    pub g: f64,
    /// Cavity decay rate κ.
    pub kappa: f64,
    /// Fock-space truncation d_c.
    pub n_levels: usize,
    /// Thermal occupancy of the cavity bath.
    pub nbar: f64,
}

/// Top-level population above which a truncation warning is raised.
pub const TRUNCATION_THRESHOLD: f64 = 1e-6;

impl CavityParams {
    pub fn new(g: f64, kappa: f64, n_levels: usize, nbar: f64) -> Result<Self> {
        let p = Self { g, kappa, n_levels, nbar };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_levels < 2 {
            return Err(Error::Parameter(format!("cavity truncation must be >= 2, got {}", self.n_levels)));
        }
        for (name, v) in [("g", self.g), ("kappa", self.kappa), ("nbar", self.nbar)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Parameter(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        Ok(())
    }

    /// Effective collective cooling rate Γ = 4g²/κ after adiabatic elimination.
    pub fn effective_gamma_cc(&self) -> f64 {
        4.0 * self.g * self.g / self.kappa
    }

    /// Advisory Markovian-regime check `κ ≥ 10 g √N`.
    pub fn is_markovian(&self, n_qubits: usize) -> bool {
        self.kappa >= 10.0 * self.g * (n_qubits as f64).sqrt()
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Collective `D[J±]` from the SU(4) product form
/// `L(J±)R(J∓) − ½ L(J∓J±) − ½ R(J∓J±)`.
pub fn collective_dissipator(catalog: &GeneratorCatalog, sign: Component) -> SparseSuperoperator {
    use Family::*;
    assert_ne!(sign, Component::Three, "D[J±] needs a ladder sign");
    let flip = sign.flipped();
    let uv = |c| catalog.op(U, c) + catalog.op(V, c);
    let mn = |c| catalog.op(M, c) + catalog.op(N, c);
    let jump = &uv(sign) * &mn(sign);
    let right = &uv(flip) * &uv(sign);
    let left = &mn(flip) * &mn(sign);
    SparseSuperoperator::linear_combination(&[(re(1.0), &jump), (re(-0.5), &right), (re(-0.5), &left)])
        .expect("catalog operators share one dimension")
}

/// `Γ(1+n̄) D[J₋] + Γ n̄ D[J₊]`.
pub fn dissipator_cavity_cooling(catalog: &GeneratorCatalog, gamma_cc: f64, nbar: f64) -> SparseSuperoperator {
    let down = collective_dissipator(catalog, Component::Minus);
    if nbar == 0.0 {
        return down.scaled_re(gamma_cc);
    }
    let up = collective_dissipator(catalog, Component::Plus);
    SparseSuperoperator::linear_combination(&[(re(gamma_cc * (1.0 + nbar)), &down), (re(gamma_cc * nbar), &up)])
        .expect("same dimension")
}

/// `Σ_j γ D[σ_z^(j)/2] = γ (M₃ − ½Q₃ − ½Σ₃ − (N/4) ℐ)`.
///
/// Diagonal, with eigenvalue `−γ (n2 + n3)/2` on occupation states.
pub fn dissipator_local_dephasing(catalog: &GeneratorCatalog, gamma: f64) -> SparseSuperoperator {
    use Component::Three;
    let n = catalog.n_qubits() as f64;
    SparseSuperoperator::linear_combination(&[
        (re(gamma), catalog.op(Family::M, Three)),
        (re(-0.5 * gamma), catalog.op(Family::Q, Three)),
        (re(-0.5 * gamma), catalog.op(Family::Sigma, Three)),
        (re(-0.25 * n * gamma), catalog.identity()),
    ])
    .expect("same dimension")
}

/// `Σ_j D[σ±^(j)] = Q± ± Q₃ − (N/2) ℐ`.
pub fn dissipator_local_t1(catalog: &GeneratorCatalog, sign: Component) -> SparseSuperoperator {
    let s = match sign {
        Component::Plus => 1.0,
        Component::Minus => -1.0,
        Component::Three => panic!("local T1 needs a ladder sign"),
    };
    let n = catalog.n_qubits() as f64;
    SparseSuperoperator::linear_combination(&[
        (re(1.0), catalog.op(Family::Q, sign)),
        (re(s), catalog.op(Family::Q, Component::Three)),
        (re(-0.5 * n), catalog.identity()),
    ])
    .expect("same dimension")
}

/// The combination `2Q± + 2Q₃ − N ℐ`. It does not equal `Σ_j D[σ±^(j)]`;
/// kept so that the verification report can show the discrepancy.
pub fn local_t1_doubled_form(catalog: &GeneratorCatalog, sign: Component) -> SparseSuperoperator {
    let n = catalog.n_qubits() as f64;
    SparseSuperoperator::linear_combination(&[
        (re(2.0), catalog.op(Family::Q, sign)),
        (re(2.0), catalog.op(Family::Q, Component::Three)),
        (re(-n), catalog.identity()),
    ])
    .expect("same dimension")
}

/// `D[J_z] = −2 Σ₃²`.
pub fn dissipator_collective_t2(catalog: &GeneratorCatalog) -> SparseSuperoperator {
    let s3 = catalog.op(Family::Sigma, Component::Three);
    (s3 * s3).scaled_re(-2.0)
}

/// `𝒟_cc + 𝒟_T2`.
pub fn generator_spin_master_equation(catalog: &GeneratorCatalog, params: &ModelParams) -> Result<SparseSuperoperator> {
    params.validate()?;
    if params.n_qubits != catalog.n_qubits() {
        return Err(Error::Dimension { expected: catalog.n_qubits(), got: params.n_qubits });
    }
    let cc = dissipator_cavity_cooling(catalog, params.gamma_cc, params.nbar);
    let t2 = dissipator_local_dephasing(catalog, params.gamma_t2);
    Ok(&cc + &t2)
}

/// Coordinates of the spin ⊗ doubled-cavity space.
///
/// Composite index is `spin · d_c² + (i + d_c j)` for the cavity matrix unit
/// `|i⟩⟨j|`, so the cavity coordinate runs fastest.
#[derive(Clone, Debug)]
pub struct SpinCavitySpace {
    basis: Arc<OccupationBasis>,
    n_levels: usize,
}

impl SpinCavitySpace {
    pub fn new(basis: Arc<OccupationBasis>, n_levels: usize) -> Result<Self> {
        if n_levels < 2 {
            return Err(Error::Parameter(format!("cavity truncation must be >= 2, got {n_levels}")));
        }
        Ok(Self { basis, n_levels })
    }

    pub fn basis(&self) -> &Arc<OccupationBasis> {
        &self.basis
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn cavity_dim(&self) -> usize {
        self.n_levels * self.n_levels
    }

    pub fn dim(&self) -> usize {
        self.basis.len() * self.cavity_dim()
    }

    pub fn index(&self, spin: usize, ket: usize, bra: usize) -> usize {
        spin * self.cavity_dim() + ket + self.n_levels * bra
    }

    fn with_cavity_diagonal(&self, spin_cov: &[C64], diag: impl Fn(usize) -> f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for (s, &v) in spin_cov.iter().enumerate() {
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            for n in 0..self.n_levels {
                out[self.index(s, n, n)] = v * diag(n);
            }
        }
        out
    }

    pub fn trace_covector(&self) -> Vec<C64> {
        self.with_cavity_diagonal(&trace_covector(&self.basis), |_| 1.0)
    }

    pub fn jz_covector(&self) -> Vec<C64> {
        self.with_cavity_diagonal(&observable_covector_jz(&self.basis), |_| 1.0)
    }

    /// Population of the highest retained Fock level.
    pub fn top_level_covector(&self) -> Vec<C64> {
        let top = self.n_levels - 1;
        self.with_cavity_diagonal(&trace_covector(&self.basis), |n| if n == top { 1.0 } else { 0.0 })
    }

    /// Mean photon number.
    pub fn photon_number_covector(&self) -> Vec<C64> {
        self.with_cavity_diagonal(&trace_covector(&self.basis), |n| n as f64)
    }

    /// Product state `ρ_spin ⊗ ρ_cav` with a diagonal cavity state.
    pub fn product_state(&self, spin: &SymState, cavity_populations: &[f64]) -> Result<Vec<C64>> {
        if cavity_populations.len() != self.n_levels {
            return Err(Error::Dimension { expected: self.n_levels, got: cavity_populations.len() });
        }
        if spin.coeffs().len() != self.basis.len() {
            return Err(Error::Dimension { expected: self.basis.len(), got: spin.coeffs().len() });
        }
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for (s, &v) in spin.coeffs().iter().enumerate() {
            for (n, &p) in cavity_populations.iter().enumerate() {
                out[self.index(s, n, n)] = v * p;
            }
        }
        Ok(out)
    }

    /// Cavity in its vacuum.
    pub fn with_cavity_ground(&self, spin: &SymState) -> Result<Vec<C64>> {
        let mut pops = vec![0.0; self.n_levels];
        pops[0] = 1.0;
        self.product_state(spin, &pops)
    }

    /// Truncated, renormalized thermal cavity state with mean occupancy n̄.
    pub fn with_cavity_thermal(&self, spin: &SymState, nbar: f64) -> Result<Vec<C64>> {
        let ratio = nbar / (1.0 + nbar);
        let mut pops: Vec<f64> = (0..self.n_levels).map(|n| ratio.powi(n as i32)).collect();
        let z: f64 = pops.iter().sum();
        pops.iter_mut().for_each(|p| *p /= z);
        self.product_state(spin, &pops)
    }
}

/// Dense cavity lowering operator on `d` Fock levels.
pub fn cavity_lowering(d: usize) -> DMatrix<C64> {
    let mut a = DMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = re((n as f64).sqrt());
    }
    a
}

fn cavity_left(a: &DMatrix<C64>) -> DMatrix<C64> {
    DMatrix::identity(a.nrows(), a.nrows()).kronecker(a)
}

fn cavity_right(b: &DMatrix<C64>) -> DMatrix<C64> {
    b.transpose().kronecker(&DMatrix::identity(b.nrows(), b.nrows()))
}

fn cavity_dissipator(c: &DMatrix<C64>) -> DMatrix<C64> {
    let cdc = c.adjoint() * c;
    c.conjugate().kronecker(c) - (cavity_left(&cdc) + cavity_right(&cdc)) * re(0.5)
}

/// Full generator `−i[H_TC, ρ] + (𝒟_c + 𝒟_T2) ρ` with `H_TC = g(J₊a + J₋a†)`
/// and `𝒟_c = κ(1+n̄) D[a] + κ n̄ D[a†]`.
pub fn generator_spin_cavity(
    catalog: &GeneratorCatalog,
    space: &SpinCavitySpace,
    cav: &CavityParams,
    gamma_t2: f64,
) -> Result<SparseSuperoperator> {
    cav.validate()?;
    if space.n_levels() != cav.n_levels {
        return Err(Error::Dimension { expected: space.n_levels(), got: cav.n_levels });
    }
    if !Arc::ptr_eq(space.basis(), catalog.basis()) && **space.basis() != **catalog.basis() {
        return Err(Error::Parameter("spin–cavity space and catalog use different bases".into()));
    }
    let d = cav.n_levels;
    let a = cavity_lowering(d);
    let ad = a.adjoint();
    let spin_id = catalog.identity();
    let cav_id = DMatrix::<C64>::identity(d * d, d * d);

    let mi_g = re(0.0) - C64::new(0.0, cav.g);
    let terms = [
        (mi_g, catalog.left_j(Component::Plus).kron_dense(&cavity_left(&a))),
        (mi_g, catalog.left_j(Component::Minus).kron_dense(&cavity_left(&ad))),
        (-mi_g, catalog.right_j(Component::Plus).kron_dense(&cavity_right(&a))),
        (-mi_g, catalog.right_j(Component::Minus).kron_dense(&cavity_right(&ad))),
    ];
    let mut pieces: Vec<(C64, SparseSuperoperator)> = terms.into_iter().collect();

    let mut dc = cavity_dissipator(&a) * re(cav.kappa * (1.0 + cav.nbar));
    if cav.nbar > 0.0 {
        dc += cavity_dissipator(&ad) * re(cav.kappa * cav.nbar);
    }
    pieces.push((re(1.0), spin_id.kron_dense(&dc)));
    pieces.push((re(1.0), dissipator_local_dephasing(catalog, gamma_t2).kron_dense(&cav_id)));

    let refs: Vec<(C64, &SparseSuperoperator)> = pieces.iter().map(|(c, op)| (*c, op)).collect();
    SparseSuperoperator::linear_combination(&refs)
}
