use std::sync::Arc;

use dickecool::analytic::{equilibrium_jz, jz_of_t, AnalyticParams};
use dickecool::lindblad::{dissipator_cavity_cooling, generator_spin_master_equation};
use dickecool::magnus::average_dissipator_first_order;
use dickecool::propagate::{evolve_state, linear_grid, Method, PropagationSpec};
use dickecool::symspace::{hermiticity_defect, lift_one_body, trace_covector, SiteDoubledOperator};
use dickecool::{GeneratorCatalog, GeneratorId, ModelParams, OccupationBasis, SymState, C64};
use nalgebra::Matrix4;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn catalog(n: usize) -> GeneratorCatalog {
    GeneratorCatalog::new(Arc::new(OccupationBasis::new(n).unwrap()))
}

fn hermitian_vector(basis: &OccupationBasis, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<C64> = (0..basis.len()).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    (0..basis.len()).map(|i| (raw[i] + raw[basis.hermitian_partner(i)].conj()) * 0.5).collect()
}

/// Random convex mixture of the maximally mixed, ground and all-up states.
fn random_state(basis: &Arc<OccupationBasis>, seed: u64) -> SymState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: [f64; 3] = [rng.random(), rng.random(), rng.random()];
    let s: f64 = w.iter().sum();
    let parts = [
        SymState::maximally_mixed(basis.clone()),
        SymState::ground(basis.clone()),
        SymState::all_up(basis.clone()),
    ];
    let mut c = vec![C64::new(0.0, 0.0); basis.len()];
    for (p, wk) in parts.iter().zip(w) {
        for (ci, pi) in c.iter_mut().zip(p.coeffs()) {
            *ci += pi * (wk / s);
        }
    }
    SymState::new(basis.clone(), c).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn basis_rank_roundtrip(n in 1usize..40, frac in 0.0f64..1.0) {
        let b = OccupationBasis::new(n).unwrap();
        prop_assert_eq!(b.len(), (n + 1) * (n + 2) * (n + 3) / 6);
        let i = ((b.len() - 1) as f64 * frac) as usize;
        prop_assert_eq!(b.index_of(&b.state(i)), Some(i));
        prop_assert_eq!(b.states()[i].iter().sum::<u32>() as usize, n);
        prop_assert_eq!(b.hermitian_partner(b.hermitian_partner(i)), i);
    }

    #[test]
    fn lift_is_linear(n in 1usize..6, seed in any::<u64>(), a in -2.0f64..2.0, bcoef in -2.0f64..2.0) {
        let basis = OccupationBasis::new(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rand4 = || SiteDoubledOperator::from_matrix(Matrix4::from_fn(|_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))));
        let x = rand4();
        let y = rand4();
        let combo = SiteDoubledOperator::from_matrix(x.0 * C64::new(a, 0.0) + y.0 * C64::new(bcoef, 0.0));
        let lhs = lift_one_body(&basis, &combo);
        let rhs = &lift_one_body(&basis, &x).scaled_re(a) + &lift_one_body(&basis, &y).scaled_re(bcoef);
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12 * n as f64);
    }

    #[test]
    fn generators_preserve_trace_and_hermiticity(
        n in 1usize..7,
        gamma in 0.0f64..3.0,
        gamma_t2 in 0.0f64..30.0,
        nbar in 0.0f64..2.0,
        seed in any::<u64>(),
    ) {
        let c = catalog(n);
        let p = ModelParams::new(n, gamma, gamma_t2, nbar).unwrap();
        let t = trace_covector(c.basis());
        let v = hermitian_vector(c.basis(), seed);
        let mut ops = vec![generator_spin_master_equation(&c, &p).unwrap(), dissipator_cavity_cooling(&c, gamma, nbar)];
        if gamma_t2 > 0.0 {
            ops.push(average_dissipator_first_order(&c, &p).unwrap());
        }
        let scale = (gamma * (1.0 + nbar) * (n * n) as f64 + gamma_t2 * n as f64).max(1.0);
        for l in &ops {
            let tl = l.apply_left(&t).unwrap();
            let tnorm = t.iter().map(|z| z.norm()).fold(1.0, f64::max);
            prop_assert!(tl.iter().all(|z| z.norm() <= 1e-12 * scale * tnorm));
            let lv = l.apply(&v).unwrap();
            prop_assert!(hermiticity_defect(c.basis(), &lv) <= 1e-12 * scale);
        }
    }

    #[test]
    fn generator_adjoints_pair_up(n in 1usize..5, k in 0usize..18) {
        let c = catalog(n);
        let id = GeneratorId::all().nth(k).unwrap();
        let op = c.get(id);
        let flipped = GeneratorId::new(id.family, id.component.flipped());
        prop_assert!(op.adjoint().max_abs_diff(c.get(flipped)).unwrap() < 1e-12);
    }

    #[test]
    fn closed_form_is_monotone(n in 1usize..200, nbar in 0.0f64..3.0, jz_frac in -1.0f64..1.0, t1 in 0.0f64..5.0, dt in 1e-3f64..5.0) {
        let mut p = AnalyticParams::new(n, 1.0, nbar);
        p.jz0 = jz_frac * n as f64 / 2.0;
        let eq = equilibrium_jz(n, nbar);
        let a = jz_of_t(&p, t1).unwrap();
        let b = jz_of_t(&p, t1 + dt).unwrap();
        if p.jz0 > eq {
            prop_assert!(b <= a);
        } else {
            prop_assert!(b >= a);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn propagation_conserves_trace_and_methods_agree(n in 2usize..7, lambda in 0.0f64..3.0, nbar in 0.0f64..1.0, seed in any::<u64>()) {
        let c = catalog(n);
        let p = ModelParams::with_lambda(n, 1.0, lambda, nbar).unwrap();
        let l = generator_spin_master_equation(&c, &p).unwrap();
        let st = random_state(c.basis(), seed);
        let grid = linear_grid(3.0, 7);
        let dense = evolve_state(&l, &st, &PropagationSpec::new(grid.clone()).with_method(Method::DenseExpm)).unwrap();
        let kry = evolve_state(&l, &st, &PropagationSpec::new(grid).with_method(Method::KrylovExpmAction)).unwrap();
        prop_assert!(dense.max_trace_drift() < 1e-8);
        prop_assert!(kry.max_trace_drift() < 1e-8);
        for (a, b) in dense.jz.iter().zip(&kry.jz) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }
}
