//! Dense brute-force reference on the full `4^N`-dimensional vectorized space.
//!
//! Nothing here uses the SU(4) machinery: operators are Kronecker products of
//! 2×2 matrices, superoperators follow `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)` on the
//! column-stacked `2^N × 2^N` density matrix.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::symspace::{site, OccupationBasis};

/// Largest ensemble handled by the oracle.
pub const ORACLE_MAX_QUBITS: usize = 4;

/// Largest spin–cavity oracle: spins and cavity levels.
pub const ORACLE_CAVITY_MAX: (usize, usize) = (2, 3);

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > ORACLE_MAX_QUBITS {
        return Err(Error::DimensionCap { dim: 1usize << (2 * n.min(31)), cap: 1 << (2 * ORACLE_MAX_QUBITS) });
    }
    Ok(())
}

fn to_dense2(m: &Matrix2<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |i, j| m[(i, j)])
}

/// `𝟙 ⊗ … ⊗ op ⊗ … ⊗ 𝟙` with `op` on qubit `j` (qubit 0 most significant).
pub fn site_operator(n: usize, j: usize, op: &Matrix2<C64>) -> DMatrix<C64> {
    let mut out = DMatrix::<C64>::identity(1, 1);
    for k in 0..n {
        let f = if k == j { to_dense2(op) } else { DMatrix::identity(2, 2) };
        out = out.kronecker(&f);
    }
    out
}

/// `Σ_j op^(j)`.
pub fn collective_operator(n: usize, op: &Matrix2<C64>) -> DMatrix<C64> {
    let d = 1usize << n;
    (0..n).fold(DMatrix::zeros(d, d), |acc, j| acc + site_operator(n, j, op))
}

/// `J_z = Σ_j σ_z^(j)/2`.
pub fn jz_operator(n: usize) -> DMatrix<C64> {
    collective_operator(n, &(site::sigma_z() * re(0.5)))
}

/// A term of a full-space Liouvillian.
#[derive(Clone, Debug)]
pub enum Term {
    /// `−i[H, ρ]`.
    Hamiltonian(DMatrix<C64>),
    /// `rate · D[c]`.
    Dissipator { rate: f64, op: DMatrix<C64> },
}

/// Left multiplication `ρ ↦ Aρ`.
pub fn left(a: &DMatrix<C64>) -> DMatrix<C64> {
    DMatrix::identity(a.nrows(), a.nrows()).kronecker(a)
}

/// Right multiplication `ρ ↦ ρB`.
pub fn right(b: &DMatrix<C64>) -> DMatrix<C64> {
    b.transpose().kronecker(&DMatrix::identity(b.nrows(), b.nrows()))
}

/// `D[c]ρ = cρc† − ½{c†c, ρ}` in Kronecker form.
pub fn dissipator(c: &DMatrix<C64>) -> DMatrix<C64> {
    let cdc = c.adjoint() * c;
    c.conjugate().kronecker(c) - (left(&cdc) + right(&cdc)) * re(0.5)
}

/// Superoperator of an arbitrary linear map, assembled column by column from
/// its action on matrix units.
pub fn superoperator_from_map(d: usize, f: impl Fn(&DMatrix<C64>) -> DMatrix<C64>) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(d * d, d * d);
    for col in 0..d * d {
        let mut e = DMatrix::zeros(d, d);
        e[(col % d, col / d)] = re(1.0);
        let img = f(&e);
        for row in 0..d * d {
            out[(row, col)] = img[(row % d, row / d)];
        }
    }
    out
}

/// `D[c]` assembled from its action on matrix units.
pub fn dissipator_by_action(c: &DMatrix<C64>) -> DMatrix<C64> {
    let cd = c.adjoint();
    let cdc = &cd * c;
    superoperator_from_map(c.nrows(), |rho| c * rho * &cd - (&cdc * rho + rho * &cdc) * re(0.5))
}

fn assemble(dim: usize, terms: &[Term]) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(dim * dim, dim * dim);
    for t in terms {
        match t {
            Term::Hamiltonian(h) => out += (left(h) - right(h)) * C64::new(0.0, -1.0),
            Term::Dissipator { rate, op } => out += dissipator(op) * re(*rate),
        }
    }
    out
}

/// Dense Liouvillian on `4^N` coordinates.
pub fn full_liouvillian(n: usize, terms: &[Term]) -> Result<DMatrix<C64>> {
    check_n(n)?;
    let d = 1usize << n;
    for t in terms {
        let op = match t {
            Term::Hamiltonian(h) => h,
            Term::Dissipator { op, .. } => op,
        };
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::Dimension { expected: d, got: op.nrows() });
        }
    }
    Ok(assemble(d, terms))
}

/// Terms of `Γ(1+n̄)D[J₋] + Γn̄ D[J₊] + γ Σ_j D[σ_z^(j)/2]`.
pub fn spin_master_terms(n: usize, gamma_cc: f64, gamma_t2: f64, nbar: f64) -> Vec<Term> {
    let jm = collective_operator(n, &site::sigma_minus());
    let jp = collective_operator(n, &site::sigma_plus());
    let mut terms = vec![
        Term::Dissipator { rate: gamma_cc * (1.0 + nbar), op: jm },
        Term::Dissipator { rate: gamma_cc * nbar, op: jp },
    ];
    let half_z = site::sigma_z() * re(0.5);
    for j in 0..n {
        terms.push(Term::Dissipator { rate: gamma_t2, op: site_operator(n, j, &half_z) });
    }
    terms
}

/// `Σ_j D[σ±^(j)]`.
pub fn local_t1_terms(n: usize, op: &Matrix2<C64>) -> Vec<Term> {
    (0..n).map(|j| Term::Dissipator { rate: 1.0, op: site_operator(n, j, op) }).collect()
}

/// Full-space coordinate of the site-mode tuple, modes `α = 2·bra + ket`.
fn full_index(modes: &[usize], d: usize) -> usize {
    let n = modes.len();
    let mut ket = 0;
    let mut bra = 0;
    for (j, &alpha) in modes.iter().enumerate() {
        let shift = n - 1 - j;
        ket |= (alpha & 1) << shift;
        bra |= (alpha >> 1) << shift;
    }
    ket + d * bra
}

fn for_each_tuple(n: usize, mut f: impl FnMut(&[usize])) {
    let mut modes = vec![0usize; n];
    loop {
        f(&modes);
        let mut k = n;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            modes[k] += 1;
            if modes[k] < 4 {
                break;
            }
            modes[k] = 0;
        }
    }
}

/// Isometry `V` from symmetric coordinates into the full vectorized space.
pub fn embedding(basis: &OccupationBasis) -> Result<DMatrix<C64>> {
    let n = basis.n_qubits();
    check_n(n)?;
    let d = 1usize << n;
    let mut v = DMatrix::zeros(d * d, basis.len());
    let mut counts = vec![0usize; basis.len()];
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); basis.len()];
    for_each_tuple(n, |modes| {
        let mut occ = [0u32; 4];
        modes.iter().for_each(|&a| occ[a] += 1);
        let col = basis.index_of(&occ).expect("occupation in basis");
        counts[col] += 1;
        members[col].push(full_index(modes, d));
    });
    for (col, rows) in members.iter().enumerate() {
        let w = re(1.0 / (counts[col] as f64).sqrt());
        for &r in rows {
            v[(r, col)] = w;
        }
    }
    Ok(v)
}

/// `V† L V`.
pub fn project(v: &DMatrix<C64>, l_full: &DMatrix<C64>) -> DMatrix<C64> {
    v.adjoint() * l_full * v
}

/// Full-space trace covector: ones on the diagonal entries of `ρ`.
pub fn full_trace_covector(hilbert_dim: usize) -> DVector<C64> {
    let mut c = DVector::zeros(hilbert_dim * hilbert_dim);
    for i in 0..hilbert_dim {
        c[i + hilbert_dim * i] = re(1.0);
    }
    c
}

/// Covector of `Tr(Oρ)`: entry `(i, j)` of `vec(ρ)` carries `O_ji`.
pub fn full_observable_covector(o: &DMatrix<C64>) -> DVector<C64> {
    let d = o.nrows();
    DVector::from_fn(d * d, |k, _| o[(k / d, k % d)])
}

/// Column-stacked `ρ`.
pub fn vectorize(rho: &DMatrix<C64>) -> DVector<C64> {
    DVector::from_column_slice(rho.as_slice())
}

/// Dense propagation on a uniform grid `t_k = k·h`, `k = 0..=steps`, using a
/// single exponential `e^{hL}`.
pub fn propagate_uniform(l_full: &DMatrix<C64>, rho0: &DVector<C64>, h: f64, steps: usize) -> Vec<DVector<C64>> {
    let step = (l_full * re(h)).exp();
    let mut out = Vec::with_capacity(steps + 1);
    let mut cur = rho0.clone();
    out.push(cur.clone());
    for _ in 0..steps {
        cur = &step * &cur;
        out.push(cur.clone());
    }
    out
}

/// `‖(I − VV†) x‖₂`.
pub fn leakage(v: &DMatrix<C64>, x: &DVector<C64>) -> f64 {
    (x - v * (v.adjoint() * x)).norm()
}

/// Spin–cavity Liouvillian on the full `(2^N d_c)²` space, Hilbert ordering
/// `spin ⊗ cavity`.
pub fn full_spin_cavity_liouvillian(n: usize, d_c: usize, g: f64, kappa: f64, nbar: f64, gamma_t2: f64) -> Result<DMatrix<C64>> {
    let (nmax, dmax) = ORACLE_CAVITY_MAX;
    if n == 0 || n > nmax || d_c < 2 || d_c > dmax {
        return Err(Error::DimensionCap { dim: (1usize << n.min(31)) * d_c, cap: (1 << nmax) * dmax });
    }
    let ds = 1usize << n;
    let ic = DMatrix::<C64>::identity(d_c, d_c);
    let is = DMatrix::<C64>::identity(ds, ds);
    let mut a = DMatrix::<C64>::zeros(d_c, d_c);
    for k in 1..d_c {
        a[(k - 1, k)] = re((k as f64).sqrt());
    }
    let jp = collective_operator(n, &site::sigma_plus()).kronecker(&ic);
    let jm = collective_operator(n, &site::sigma_minus()).kronecker(&ic);
    let a_full = is.kronecker(&a);
    let ad_full = a_full.adjoint();
    let h = (&jp * &a_full + &jm * &ad_full) * re(g);
    let half_z = site::sigma_z() * re(0.5);
    let mut terms = vec![
        Term::Hamiltonian(h),
        Term::Dissipator { rate: kappa * (1.0 + nbar), op: a_full },
        Term::Dissipator { rate: kappa * nbar, op: ad_full },
    ];
    for j in 0..n {
        terms.push(Term::Dissipator { rate: gamma_t2, op: site_operator(n, j, &half_z).kronecker(&ic) });
    }
    Ok(assemble(ds * d_c, &terms))
}

/// Embedding of spin-symmetric ⊗ doubled-cavity coordinates, matching
/// [`crate::lindblad::SpinCavitySpace`] ordering.
pub fn embedding_spin_cavity(basis: &OccupationBasis, d_c: usize) -> Result<DMatrix<C64>> {
    let n = basis.n_qubits();
    let (nmax, dmax) = ORACLE_CAVITY_MAX;
    if n > nmax || d_c < 2 || d_c > dmax {
        return Err(Error::DimensionCap { dim: (1usize << n.min(31)) * d_c, cap: (1 << nmax) * dmax });
    }
    let vs = embedding(basis)?;
    let ds = 1usize << n;
    let dh = ds * d_c;
    let cd = d_c * d_c;
    let mut v = DMatrix::zeros(dh * dh, basis.len() * cd);
    for s_col in 0..basis.len() {
        for s_row in 0..ds * ds {
            let w = vs[(s_row, s_col)];
            if w == re(0.0) {
                continue;
            }
            let (sk, sb) = (s_row % ds, s_row / ds);
            for ck in 0..d_c {
                for cb in 0..d_c {
                    let hk = sk * d_c + ck;
                    let hb = sb * d_c + cb;
                    v[(hk + dh * hb, s_col * cd + ck + d_c * cb)] = w;
                }
            }
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symspace::SiteDoubledOperator;

    #[test]
    fn single_qubit_damping() {
        let sm = to_dense2(&site::sigma_minus());
        let d = dissipator(&sm);
        let site_form = SiteDoubledOperator::dissipator(&site::sigma_minus()).0;
        // One qubit: full index = ket + 2·bra, the same as the site mode index.
        for i in 0..4 {
            for j in 0..4 {
                assert!((d[(i, j)] - site_form[(i, j)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn two_assembly_orders_agree() {
        let jm = collective_operator(2, &site::sigma_minus());
        assert!((dissipator(&jm) - dissipator_by_action(&jm)).camax() < 1e-14);
        let h = jz_operator(2) + collective_operator(2, &site::sigma_plus());
        let h = &h + h.adjoint();
        let kron = (left(&h) - right(&h)) * C64::new(0.0, -1.0);
        let act = superoperator_from_map(4, |r| (&h * r - r * &h) * C64::new(0.0, -1.0));
        assert!((kron - act).camax() < 1e-14);
    }

    #[test]
    fn trace_annihilation() {
        let l = full_liouvillian(3, &spin_master_terms(3, 1.0, 2.0, 0.4)).unwrap();
        let t = full_trace_covector(8);
        assert!((t.transpose() * l).camax() < 1e-13);
    }

    #[test]
    fn embedding_isometry() {
        for n in 1..=3 {
            let b = OccupationBasis::new(n).unwrap();
            let v = embedding(&b).unwrap();
            let id = DMatrix::<C64>::identity(b.len(), b.len());
            assert!((v.adjoint() * &v - id).camax() < 1e-13);
        }
        let b1 = OccupationBasis::new(1).unwrap();
        let v = embedding(&b1).unwrap();
        // N=1 is a permutation; the order matches the site mode index.
        for (col, occ) in b1.states().iter().enumerate() {
            let alpha = occ.iter().position(|&x| x == 1).unwrap();
            assert_eq!(v[(alpha, col)], re(1.0));
        }
    }

    #[test]
    fn refuses_large_n() {
        assert!(full_liouvillian(5, &[]).is_err());
        assert!(embedding(&OccupationBasis::new(5).unwrap()).is_err());
        assert!(full_spin_cavity_liouvillian(3, 2, 1.0, 1.0, 0.0, 0.0).is_err());
    }
}
