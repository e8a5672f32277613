use std::sync::Arc;

use dickecool::lindblad::{dissipator_cavity_cooling, dissipator_local_dephasing, generator_spin_master_equation};
use dickecool::oracle;
use dickecool::propagate::{evolve_state, linear_grid, Method, PropagationSpec};
use dickecool::{GeneratorCatalog, ModelParams, OccupationBasis, SymState, C64};
use nalgebra::{DMatrix, DVector};

fn catalog(n: usize) -> GeneratorCatalog {
    GeneratorCatalog::new(Arc::new(OccupationBasis::new(n).unwrap()))
}

/// ⟨Jz⟩ of the full-space trajectory on a uniform grid.
fn oracle_jz(n: usize, lf: &DMatrix<C64>, rho0: &DVector<C64>, h: f64, steps: usize) -> Vec<f64> {
    let jz = oracle::full_observable_covector(&oracle::jz_operator(n));
    oracle::propagate_uniform(lf, rho0, h, steps).iter().map(|r| (jz.transpose() * r)[0].re).collect()
}

#[test]
fn dephasing_projection_n3() {
    let c = catalog(3);
    let v = oracle::embedding(c.basis()).unwrap();
    let lf = oracle::full_liouvillian(3, &oracle::spin_master_terms(3, 0.0, 1.0, 0.0)).unwrap();
    let dev = (oracle::project(&v, &lf) - dissipator_local_dephasing(&c, 1.0).to_dense()).camax();
    assert!(dev < 1e-12, "{dev:e}");
}

#[test]
fn embedding_n1_is_identity_map() {
    let b = OccupationBasis::new(1).unwrap();
    let v = oracle::embedding(&b).unwrap();
    let mut perm = vec![usize::MAX; 4];
    for col in 0..4 {
        for row in 0..4 {
            if v[(row, col)].norm() > 0.0 {
                assert_eq!(v[(row, col)], C64::new(1.0, 0.0));
                perm[col] = row;
            }
        }
    }
    let mut sorted = perm.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, vec![0, 1, 2, 3]);
}

#[test]
fn spin_master_n4_matches_full_space() {
    let n = 4;
    let c = catalog(n);
    let p = ModelParams::with_lambda(n, 1.0, 1.0, 0.0).unwrap();
    let l = generator_spin_master_equation(&c, &p).unwrap();
    let lf = oracle::full_liouvillian(n, &oracle::spin_master_terms(n, 1.0, p.gamma_t2, 0.0)).unwrap();
    let v = oracle::embedding(c.basis()).unwrap();
    let mm = SymState::maximally_mixed(c.basis().clone());
    let steps = 40;
    let expect = oracle_jz(n, &lf, &(&v * DVector::from_column_slice(mm.coeffs())), 0.125, steps);
    let got = evolve_state(&l, &mm, &PropagationSpec::new(linear_grid(5.0, steps + 1))).unwrap();
    for (a, b) in expect.iter().zip(&got.jz) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
}

#[test]
fn spin_master_n3_all_up_matches_full_space() {
    let n = 3;
    let c = catalog(n);
    let p = ModelParams::with_lambda(n, 1.0, 0.1, 0.5).unwrap();
    let l = generator_spin_master_equation(&c, &p).unwrap();
    let lf = oracle::full_liouvillian(n, &oracle::spin_master_terms(n, 1.0, p.gamma_t2, 0.5)).unwrap();
    let v = oracle::embedding(c.basis()).unwrap();
    let up = SymState::all_up(c.basis().clone());
    let steps = 25;
    let expect = oracle_jz(n, &lf, &(&v * DVector::from_column_slice(up.coeffs())), 0.2, steps);
    let got =
        evolve_state(&l, &up, &PropagationSpec::new(linear_grid(5.0, steps + 1)).with_method(Method::KrylovExpmAction)).unwrap();
    for (a, b) in expect.iter().zip(&got.jz) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
}

#[test]
fn trapped_plateaus_match_oracle() {
    // Pure collective cooling from the maximally mixed state.
    for (n, plateau) in [(2usize, -0.75), (3, -1.0)] {
        let c = catalog(n);
        let dcc = dissipator_cavity_cooling(&c, 1.0, 0.0);
        let mm = SymState::maximally_mixed(c.basis().clone());
        let sym = evolve_state(&dcc, &mm, &PropagationSpec::new(vec![60.0])).unwrap();
        let lf = oracle::full_liouvillian(n, &oracle::spin_master_terms(n, 1.0, 0.0, 0.0)).unwrap();
        let v = oracle::embedding(c.basis()).unwrap();
        let full = oracle_jz(n, &lf, &(&v * DVector::from_column_slice(mm.coeffs())), 60.0, 1);
        assert!((full[1] - plateau).abs() < 1e-9, "oracle N={n}: {}", full[1]);
        assert!((sym.jz[0] - plateau).abs() < 1e-9, "symmetric N={n}: {}", sym.jz[0]);
    }
}

#[test]
fn full_trajectories_stay_symmetric() {
    let n = 3;
    let c = catalog(n);
    let v = oracle::embedding(c.basis()).unwrap();
    let lf = oracle::full_liouvillian(n, &oracle::spin_master_terms(n, 1.0, 2.0, 0.3)).unwrap();
    let rho0 = &v * DVector::from_column_slice(SymState::all_up(c.basis().clone()).coeffs());
    for r in oracle::propagate_uniform(&lf, &rho0, 0.25, 20) {
        assert!(oracle::leakage(&v, &r) < 1e-9);
    }
}
