//! Aggregated verification suites behind the `verify` command.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::Result;
use crate::lindblad::{
    collective_dissipator, dissipator_collective_t2, dissipator_local_dephasing, dissipator_local_t1,
    generator_spin_cavity, generator_spin_master_equation, local_t1_doubled_form, CavityParams, ModelParams,
    SpinCavitySpace,
};
use crate::magnus::{
    build_ab, check_tc_suppression, verify_average_dissipator, verify_frame_identities_with, DEFAULT_QUADRATURE_NODES,
};
use crate::oracle;
use crate::propagate::{evolve_state, linear_grid, Method, PropagationSpec};
use crate::sparse::SparseSuperoperator;
use crate::su4::{verify_adjoints, verify_commutation_table, verify_subalgebras, Component, GeneratorCatalog, GeneratorId, IdentityCheck};
use crate::symspace::{hermiticity_defect, site, trace_covector, OccupationBasis, SymState};

/// Oracle agreement threshold for operator identities.
pub const ORACLE_TOL: f64 = 1e-12;
/// Oracle agreement threshold for propagated `⟨Jz⟩`.
pub const PROPAGATION_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Fast,
    Full,
}

/// Deliberate defects used to check that the suites can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    None,
    /// Flip the sign of the `𝒱₋𝒰₊` term in `A₊`.
    FlipAPlusSign,
}

#[derive(Clone, Debug, Serialize)]
pub struct Section {
    pub name: String,
    pub checks: Vec<IdentityCheck>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub level: Level,
    pub sections: Vec<Section>,
    /// Informational findings that do not affect pass/fail.
    pub notes: Vec<String>,
    pub elapsed_seconds: f64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.sections.iter().all(|s| s.checks.iter().all(|c| c.passed))
    }

    pub fn n_checks(&self) -> usize {
        self.sections.iter().map(|s| s.checks.len()).sum()
    }

    pub fn failures(&self) -> Vec<(&str, &IdentityCheck)> {
        self.sections
            .iter()
            .flat_map(|s| s.checks.iter().filter(|c| !c.passed).map(move |c| (s.name.as_str(), c)))
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.sections {
            let bad = s.checks.iter().filter(|c| !c.passed).count();
            out.push_str(&format!("[{}] {} checks, {} failed\n", s.name, s.checks.len(), bad));
            for c in s.checks.iter().filter(|c| !c.passed) {
                out.push_str(&format!("  FAIL {} (N={}): deviation {:.3e} > {:.1e}\n", c.name, c.n_qubits, c.deviation, c.tolerance));
                if let Some(r) = &c.resolved {
                    out.push_str(&format!("       consistent value: {r}\n"));
                }
            }
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out.push_str(&format!(
            "{}: {} checks in {:.2} s\n",
            if self.passed() { "PASS" } else { "FAIL" },
            self.n_checks(),
            self.elapsed_seconds
        ));
        out
    }
}

fn catalog(n: usize) -> Result<GeneratorCatalog> {
    Ok(GeneratorCatalog::new(Arc::new(OccupationBasis::new(n)?)))
}

/// Full-space version of a site-summed SU(4) generator.
fn full_generator(n: usize, id: GeneratorId) -> DMatrix<C64> {
    let seed = id.seed().0;
    let d = 1usize << n;
    let mut out = DMatrix::zeros(d * d, d * d);
    for j in 0..n {
        for p in 0..2 {
            for q in 0..2 {
                let block = Matrix2::from_fn(|k, l| seed[(2 * p + k, 2 * q + l)]);
                if block.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                    continue;
                }
                let mut unit = Matrix2::zeros();
                unit[(p, q)] = C64::new(1.0, 0.0);
                out += oracle::site_operator(n, j, &unit).kronecker(&oracle::site_operator(n, j, &block));
            }
        }
    }
    out
}

fn dense_dev(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).camax()
}

/// Deterministic Hermitian-symmetric test vector.
fn hermitian_probe(basis: &OccupationBasis) -> Vec<C64> {
    let raw: Vec<C64> = (0..basis.len()).map(|i| C64::new((1.3 * i as f64 + 0.4).sin(), (0.7 * i as f64 + 1.1).cos())).collect();
    (0..basis.len()).map(|i| (raw[i] + raw[basis.hermitian_partner(i)].conj()) * 0.5).collect()
}

fn su4_section(ns: &[usize]) -> Result<Section> {
    let mut checks = Vec::new();
    for &n in ns {
        let c = catalog(n)?;
        checks.extend(verify_commutation_table(&c)?);
        checks.extend(verify_subalgebras(&c)?);
        checks.extend(verify_adjoints(&c)?);
    }
    Ok(Section { name: "su4".into(), checks })
}

fn lindblad_section(ns: &[usize], spectral_max: usize, notes: &mut Vec<String>) -> Result<Section> {
    let mut checks = Vec::new();
    for &n in ns {
        let c = catalog(n)?;
        let v = oracle::embedding(c.basis())?;
        let cmp = |name: &str, sym: &SparseSuperoperator, full: DMatrix<C64>| {
            IdentityCheck::new(name, n, dense_dev(&oracle::project(&v, &full), &sym.to_dense()), ORACLE_TOL)
        };
        let sm = site::sigma_minus();
        let sp = site::sigma_plus();
        checks.push(cmp(
            "Σ D[σz/2] = M3 - Q3/2 - Σ3/2 - N/4",
            &dissipator_local_dephasing(&c, 1.0),
            oracle::full_liouvillian(n, &oracle::spin_master_terms(n, 0.0, 1.0, 0.0))?,
        ));
        let t1m = oracle::full_liouvillian(n, &oracle::local_t1_terms(n, &sm))?;
        let t1p = oracle::full_liouvillian(n, &oracle::local_t1_terms(n, &sp))?;
        checks.push(cmp("Σ D[σ-] = Q- - Q3 - N/2", &dissipator_local_t1(&c, Component::Minus), t1m.clone()));
        checks.push(cmp("Σ D[σ+] = Q+ + Q3 - N/2", &dissipator_local_t1(&c, Component::Plus), t1p));
        let doubled = dense_dev(&oracle::project(&v, &t1m), &local_t1_doubled_form(&c, Component::Minus).to_dense());
        notes.push(format!(
            "N={n}: the combination 2Q- + 2Q3 - N·I differs from Σ D[σ-] by {doubled:.3e}; Q± ± Q3 - (N/2)·I is used"
        ));
        checks.push(cmp("D[Jz] = -2 Σ3²", &dissipator_collective_t2(&c), oracle::dissipator(&oracle::jz_operator(n))));
        checks.push(cmp(
            "D[J-] product form",
            &collective_dissipator(&c, Component::Minus),
            oracle::dissipator(&oracle::collective_operator(n, &sm)),
        ));
        checks.push(cmp(
            "D[J+] product form",
            &collective_dissipator(&c, Component::Plus),
            oracle::dissipator(&oracle::collective_operator(n, &sp)),
        ));
        let p = ModelParams::new(n, 1.0, 0.9, 0.4)?;
        let l = generator_spin_master_equation(&c, &p)?;
        checks.push(cmp("D_cc + D_T2", &l, oracle::full_liouvillian(n, &oracle::spin_master_terms(n, 1.0, 0.9, 0.4))?));

        let t = trace_covector(c.basis());
        let tl = l.apply_left(&t)?;
        checks.push(IdentityCheck::new("T·L = 0", n, tl.iter().map(|z| z.norm()).fold(0.0, f64::max), ORACLE_TOL));
        let probe = hermitian_probe(c.basis());
        let lp = l.apply(&probe)?;
        checks.push(IdentityCheck::new("L preserves Hermiticity", n, hermiticity_defect(c.basis(), &lp), ORACLE_TOL));
        let g = SymState::ground(c.basis().clone());
        let lg = generator_spin_master_equation(&c, &ModelParams::new(n, 1.0, 0.9, 0.0)?)?.apply(g.coeffs())?;
        checks.push(IdentityCheck::new("ground state is fixed (n̄=0)", n, lg.iter().map(|z| z.norm()).fold(0.0, f64::max), 0.0));
    }
    for n in 1..=spectral_max {
        let c = catalog(n)?;
        let l = generator_spin_master_equation(&c, &ModelParams::with_lambda(n, 1.0, 1.0, 0.5)?)?;
        let dense = l.to_dense().map(|z| z.re);
        let top = dense.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        checks.push(IdentityCheck::new("max Re spectrum ≤ 0", n, top.max(0.0), 1e-10));
    }
    Ok(Section { name: "lindblad".into(), checks })
}

fn mutated_ab(c: &GeneratorCatalog, sign: Component) -> (SparseSuperoperator, SparseSuperoperator) {
    use crate::su4::Family::*;
    let (a, b) = build_ab(c, sign);
    if sign != Component::Plus {
        return (a, b);
    }
    // A₊ holds −½ 𝒱₋𝒰₊; adding 𝒱₋𝒰₊ once makes it +½.
    let term = c.op(V, Component::Minus) * c.op(U, Component::Plus);
    (SparseSuperoperator::linear_combination(&[(C64::new(1.0, 0.0), &a), (C64::new(1.0, 0.0), &term)]).unwrap(), b)
}

fn magnus_section(ns: &[usize], adjoint_max: usize, mutation: Mutation) -> Result<Section> {
    let mut checks = Vec::new();
    for &n in ns {
        let c = catalog(n)?;
        let list = match mutation {
            Mutation::None => verify_frame_identities_with(&c, 1.7, build_ab)?,
            Mutation::FlipAPlusSign => verify_frame_identities_with(&c, 1.7, mutated_ab)?,
        };
        checks.extend(list);
        for nbar in [0.0, 0.5] {
            checks.extend(verify_average_dissipator(&c, &ModelParams::with_lambda(n, 1.0, 1.0, nbar)?)?);
        }
    }
    for n in ns.iter().copied().max().unwrap_or(1) + 1..=adjoint_max {
        let c = catalog(n)?;
        for nbar in [0.0, 0.5] {
            let p = ModelParams::with_lambda(n, 1.0, 1.0, nbar)?;
            let d = crate::magnus::average_dissipator_first_order(&c, &p)?;
            checks.push(crate::magnus::adjoint_jz_check(&c, &d, &p)?);
        }
    }
    let r = check_tc_suppression(1.0, 2, DEFAULT_QUADRATURE_NODES)?;
    let mut ch = IdentityCheck::new("TC exchange averages to zero in the dephasing frame", 1, r.average_norm, 1e-10);
    ch.passed = r.passed;
    checks.push(ch);
    Ok(Section { name: "magnus".into(), checks })
}

fn oracle_section(ns: &[usize], propagate_ns: &[usize], cavity: bool) -> Result<Section> {
    let mut checks = Vec::new();
    for &n in ns {
        let c = catalog(n)?;
        let v = oracle::embedding(c.basis())?;
        let id = DMatrix::<C64>::identity(c.basis().len(), c.basis().len());
        checks.push(IdentityCheck::new("V†V = I", n, dense_dev(&(v.adjoint() * &v), &id), 1e-13));
        for g in GeneratorId::all() {
            let full = full_generator(n, g);
            checks.push(IdentityCheck::new(
                format!("V† {g}_full V = {g}"),
                n,
                dense_dev(&oracle::project(&v, &full), &c.get(g).to_dense()),
                ORACLE_TOL,
            ));
        }
    }
    for &n in propagate_ns {
        let c = catalog(n)?;
        let v = oracle::embedding(c.basis())?;
        let (gamma, nbar) = (1.0, 0.5);
        let p = ModelParams::with_lambda(n, gamma, 1.0, nbar)?;
        let l = generator_spin_master_equation(&c, &p)?;
        let lf = oracle::full_liouvillian(n, &oracle::spin_master_terms(n, gamma, p.gamma_t2, nbar))?;
        let mm = SymState::maximally_mixed(c.basis().clone());
        let steps = 50;
        let grid = linear_grid(5.0, steps + 1);
        let sym = evolve_state(&l, &mm, &PropagationSpec::new(grid).with_method(Method::KrylovExpmAction))?;
        let rho0 = &v * DVector::from_column_slice(mm.coeffs());
        let traj = oracle::propagate_uniform(&lf, &rho0, 5.0 / steps as f64, steps);
        let jz = oracle::full_observable_covector(&oracle::jz_operator(n));
        let dev = traj.iter().zip(&sym.jz).map(|(r, s)| ((jz.transpose() * r)[0].re - s).abs()).fold(0.0, f64::max);
        let leak = traj.iter().map(|r| oracle::leakage(&v, r)).fold(0.0, f64::max);
        checks.push(IdentityCheck::new("⟨Jz(t)⟩ symmetric vs full", n, dev, PROPAGATION_TOL));
        checks.push(IdentityCheck::new("full trajectory stays symmetric", n, leak, 1e-9));
    }
    if cavity {
        for n in 1..=oracle::ORACLE_CAVITY_MAX.0 {
            let c = catalog(n)?;
            for d in 2..=oracle::ORACLE_CAVITY_MAX.1 {
                let sp = SpinCavitySpace::new(c.basis().clone(), d)?;
                let cav = CavityParams::new(0.8, 1.7, d, 0.3)?;
                let l = generator_spin_cavity(&c, &sp, &cav, 0.6)?;
                let v = oracle::embedding_spin_cavity(c.basis(), d)?;
                let full = oracle::full_spin_cavity_liouvillian(n, d, 0.8, 1.7, 0.3, 0.6)?;
                checks.push(IdentityCheck::new(
                    format!("spin-cavity generator, d_c={d}"),
                    n,
                    dense_dev(&oracle::project(&v, &full), &l.to_dense()),
                    ORACLE_TOL,
                ));
            }
        }
    }
    Ok(Section { name: "oracle".into(), checks })
}

pub fn run(level: Level) -> Result<VerificationReport> {
    run_with_mutation(level, Mutation::None)
}

pub fn run_with_mutation(level: Level, mutation: Mutation) -> Result<VerificationReport> {
    let start = Instant::now();
    let mut notes = Vec::new();
    let sections = match level {
        Level::Fast => vec![
            su4_section(&[1, 2])?,
            lindblad_section(&[2], 3, &mut notes)?,
            magnus_section(&[1, 2], 2, mutation)?,
            oracle_section(&[2], &[2], false)?,
        ],
        Level::Full => vec![
            su4_section(&[1, 2, 3])?,
            lindblad_section(&[2, 3], 6, &mut notes)?,
            magnus_section(&[1, 2, 3], 4, mutation)?,
            oracle_section(&[2, 3, 4], &[2, 3, 4], true)?,
        ],
    };
    Ok(VerificationReport { level, sections, notes, elapsed_seconds: start.elapsed().as_secs_f64() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_level_passes() {
        let r = run(Level::Fast).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        assert!(!r.notes.is_empty());
    }

    #[test]
    fn mutation_is_caught() {
        let r = run_with_mutation(Level::Fast, Mutation::FlipAPlusSign).unwrap();
        assert!(!r.passed());
        assert!(r.failures().iter().any(|(s, c)| *s == "magnus" && c.name.contains("A+")));
    }
}
