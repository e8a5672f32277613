//! The totally symmetric subspace of N doubled qubit sites.
//!
//! A vectorized N-qubit density matrix that is invariant under permutations of
//! the qubits is a symmetric tensor over the four-dimensional doubled site
//! space. Such tensors are labelled by occupation numbers `(n1, n2, n3, n4)`
//! of the four site modes, and one-body superoperators `Σ_j s^(j)` act on them
//! as bosonic bilinears `a†_α a_β`.
//!
//! Conventions:
//! * vectorization stacks columns, so `ρ ↦ AρB†` is `B* ⊗ A`;
//! * a qubit has basis `(|e⟩, |g⟩)`, so `σ_z = diag(1, −1)` and `σ₊ = |e⟩⟨g|`;
//! * site mode `α` is Kronecker index `α` of the doubled site space, ordered
//!   `(e⊗e, e⊗g, g⊗e, g⊗g)`; modes 1 and 4 are the populations, modes 2 and 3
//!   the two coherences;
//! * occupation states carry bosonic (Fock) normalization, which makes the
//!   basis orthonormal under the Hilbert–Schmidt inner product.

use std::sync::Arc;

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::sparse::{norm2, pair, SparseSuperoperator};

/// Largest ensemble size accepted by [`OccupationBasis::new`].
pub const DEFAULT_MAX_QUBITS: usize = 200;

/// Occupation numbers of the four doubled-site modes.
pub type Occupation = [u32; 4];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// `C(n, k)` in floating point.
///
/// Exact for results below 2^53; beyond that the product form keeps the
/// relative error at a few ulps without overflowing for `n <= 1000`.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * f64::from(n - i) / f64::from(i + 1);
    }
    if acc < 9.0e15 {
        acc.round()
    } else {
        acc
    }
}

/// Enumeration of the occupation multi-indices summing to N.
///
/// States are ordered lexicographically descending in `(n1, n2, n3)`, so the
/// first state is `(N, 0, 0, 0)` and the last is `(0, 0, 0, N)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OccupationBasis {
    n_qubits: usize,
    states: Vec<Occupation>,
}

impl OccupationBasis {
    pub fn new(n_qubits: usize) -> Result<Self> {
        Self::with_max(n_qubits, DEFAULT_MAX_QUBITS)
    }

    pub fn with_max(n_qubits: usize, max_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > max_qubits {
            return Err(Error::Parameter(format!(
                "number of qubits must lie in 1..={max_qubits}, got {n_qubits}"
            )));
        }
        let n = n_qubits as u32;
        let mut states = Vec::with_capacity(Self::count(n_qubits));
        for n1 in (0..=n).rev() {
            for n2 in (0..=n - n1).rev() {
                for n3 in (0..=n - n1 - n2).rev() {
                    states.push([n1, n2, n3, n - n1 - n2 - n3]);
                }
            }
        }
        debug_assert_eq!(states.len(), Self::count(n_qubits));
        Ok(Self { n_qubits, states })
    }

    /// `(N+1)(N+2)(N+3)/6`.
    pub fn count(n_qubits: usize) -> usize {
        (n_qubits + 1) * (n_qubits + 2) * (n_qubits + 3) / 6
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Occupation] {
        &self.states
    }

    pub fn state(&self, index: usize) -> Occupation {
        self.states[index]
    }

    /// Dense coordinate of a multi-index, or `None` if it does not sum to N.
    pub fn index_of(&self, occ: &Occupation) -> Option<usize> {
        let n = self.n_qubits as u64;
        let [n1, n2, n3, n4] = occ.map(u64::from);
        if n1 + n2 + n3 + n4 != n {
            return None;
        }
        // Count the states that precede `occ` in the ordering.
        let rest = n - n1;
        let after_n2 = rest - n2;
        let before_n1 = (rest + 2) * (rest + 1) * rest / 6;
        let before_n2 = (after_n2 + 1) * after_n2 / 2;
        Some((before_n1 + before_n2 + (after_n2 - n3)) as usize)
    }

    /// Coordinate of the Hermitian partner `(n1, n3, n2, n4)`.
    pub fn hermitian_partner(&self, index: usize) -> usize {
        let [a, b, c, d] = self.states[index];
        self.index_of(&[a, c, b, d]).expect("partner is in the basis")
    }

    /// Coordinate of the population state with `k` excited qubits.
    pub fn population_index(&self, k: usize) -> usize {
        let n = self.n_qubits as u32;
        let k = k as u32;
        self.index_of(&[k, 0, 0, n - k]).expect("k <= N")
    }

    /// `√(N! / (n1! n2! n3! n4!))` per coordinate.
    ///
    /// Multiplying coefficients by these weights gives the "summed matrix
    /// element" coordinates, in which the trace covector has unit entries on
    /// populations. Propagators use them to keep error control meaningful
    /// for large N.
    pub fn multinomial_weights(&self) -> Vec<f64> {
        let n = self.n_qubits as u32;
        self.states
            .iter()
            .map(|&[a, b, c, _]| (binomial(n, a) * binomial(n - a, b) * binomial(n - a - b, c)).sqrt())
            .collect()
    }
}

/// A 4×4 superoperator on one doubled site, in `B* ⊗ A` Kronecker form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SiteDoubledOperator(pub Matrix4<C64>);

impl SiteDoubledOperator {
    pub fn from_matrix(m: Matrix4<C64>) -> Self {
        Self(m)
    }

    /// Builds from a row-major slice; fails unless it has exactly 16 entries.
    pub fn from_row_slice(entries: &[C64]) -> Result<Self> {
        if entries.len() != 16 {
            return Err(Error::Dimension { expected: 16, got: entries.len() });
        }
        Ok(Self(Matrix4::from_row_slice(entries)))
    }

    /// `first ⊗ second`, where `first` acts on the column (bra) index.
    pub fn kron(first: &Matrix2<C64>, second: &Matrix2<C64>) -> Self {
        let mut m = Matrix4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        m[(2 * i + k, 2 * j + l)] = first[(i, j)] * second[(k, l)];
                    }
                }
            }
        }
        Self(m)
    }

    /// Superoperator of `ρ ↦ A ρ`.
    pub fn left(a: &Matrix2<C64>) -> Self {
        Self::kron(&Matrix2::identity(), a)
    }

    /// Superoperator of `ρ ↦ ρ B`.
    pub fn right(b: &Matrix2<C64>) -> Self {
        Self::kron(&b.transpose(), &Matrix2::identity())
    }

    /// Superoperator of `ρ ↦ A ρ B†`.
    pub fn sandwich(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Self {
        Self::kron(&b.conjugate(), a)
    }

    /// Single-site Lindblad dissipator `D[c]`.
    pub fn dissipator(c: &Matrix2<C64>) -> Self {
        let cdc = c.adjoint() * c;
        Self(Self::sandwich(c, c).0 - (Self::left(&cdc).0 + Self::right(&cdc).0) * C64::new(0.5, 0.0))
    }

    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }
}

impl std::ops::Add for SiteDoubledOperator {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl std::ops::Sub for SiteDoubledOperator {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl std::ops::Mul<SiteDoubledOperator> for C64 {
    type Output = SiteDoubledOperator;
    fn mul(self, rhs: SiteDoubledOperator) -> SiteDoubledOperator {
        SiteDoubledOperator(rhs.0 * self)
    }
}

impl std::ops::Mul<SiteDoubledOperator> for f64 {
    type Output = SiteDoubledOperator;
    fn mul(self, rhs: SiteDoubledOperator) -> SiteDoubledOperator {
        SiteDoubledOperator(rhs.0 * C64::new(self, 0.0))
    }
}

/// Single-qubit operators in the `(|e⟩, |g⟩)` basis.
pub mod site {
    use nalgebra::Matrix2;
    use num_complex::Complex64 as C64;

    fn m(a: f64, b: f64, c: f64, d: f64) -> Matrix2<C64> {
        Matrix2::new(C64::new(a, 0.0), C64::new(b, 0.0), C64::new(c, 0.0), C64::new(d, 0.0))
    }

    pub fn identity() -> Matrix2<C64> {
        m(1.0, 0.0, 0.0, 1.0)
    }

    /// `σ₊ = |e⟩⟨g|`.
    pub fn sigma_plus() -> Matrix2<C64> {
        m(0.0, 1.0, 0.0, 0.0)
    }

    /// `σ₋ = |g⟩⟨e|`.
    pub fn sigma_minus() -> Matrix2<C64> {
        m(0.0, 0.0, 1.0, 0.0)
    }

    pub fn sigma_z() -> Matrix2<C64> {
        m(1.0, 0.0, 0.0, -1.0)
    }

    /// `E₊ = (𝟙 + σ_z)/2 = |e⟩⟨e|`.
    pub fn e_plus() -> Matrix2<C64> {
        m(1.0, 0.0, 0.0, 0.0)
    }

    /// `E₋ = (𝟙 − σ_z)/2 = |g⟩⟨g|`.
    pub fn e_minus() -> Matrix2<C64> {
        m(0.0, 0.0, 0.0, 1.0)
    }
}

/// Collective superoperator `Σ_j s^(j)` restricted to the symmetric subspace.
///
/// The site entry `s[α][β]` becomes `a†_α a_β`, with matrix element
/// `√((n_α + 1) n_β)` for `α ≠ β` and `n_α` on the diagonal.
pub fn lift_one_body(basis: &OccupationBasis, site_op: &SiteDoubledOperator) -> SparseSuperoperator {
    let s = site_op.matrix();
    let nz: Vec<(usize, usize, C64)> = (0..4)
        .flat_map(|a| (0..4).map(move |b| (a, b)))
        .filter(|&(a, b)| s[(a, b)] != ZERO)
        .map(|(a, b)| (a, b, s[(a, b)]))
        .collect();
    let mut triplets = Vec::with_capacity(basis.len() * nz.len());
    for (col, occ) in basis.states().iter().enumerate() {
        for &(a, b, v) in &nz {
            if a == b {
                if occ[a] > 0 {
                    triplets.push((col, col, v * f64::from(occ[a])));
                }
            } else if occ[b] > 0 {
                let mut target = *occ;
                target[b] -= 1;
                target[a] += 1;
                let amp = (f64::from(occ[a] + 1) * f64::from(occ[b])).sqrt();
                let row = basis.index_of(&target).expect("one-body moves stay in the basis");
                triplets.push((row, col, v * amp));
            }
        }
    }
    SparseSuperoperator::from_triplets(basis.len(), triplets).expect("lift indices are in range")
}

/// Covector of the vectorized identity: `Tr ρ = T · coeffs`.
///
/// Nonzero only on population states, with `T(k, 0, 0, N−k) = √C(N, k)`.
pub fn trace_covector(basis: &OccupationBasis) -> Vec<C64> {
    population_covector(basis, |_| 1.0)
}

/// Covector of `J_z`: `(k − N/2) √C(N, k)` on population states.
pub fn observable_covector_jz(basis: &OccupationBasis) -> Vec<C64> {
    let half = basis.n_qubits() as f64 / 2.0;
    population_covector(basis, |k| k as f64 - half)
}

/// Covector of a diagonal observable that depends only on the excitation count.
pub fn population_covector(basis: &OccupationBasis, value: impl Fn(usize) -> f64) -> Vec<C64> {
    let n = basis.n_qubits();
    let mut cov = vec![ZERO; basis.len()];
    for k in 0..=n {
        cov[basis.population_index(k)] = C64::new(value(k) * binomial(n as u32, k as u32).sqrt(), 0.0);
    }
    cov
}

/// A vectorized permutation-symmetric ensemble state.
#[derive(Clone, Debug, PartialEq)]
pub struct SymState {
    basis: Arc<OccupationBasis>,
    coeffs: Vec<C64>,
}

impl SymState {
    pub fn new(basis: Arc<OccupationBasis>, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::Dimension { expected: basis.len(), got: coeffs.len() });
        }
        Ok(Self { basis, coeffs })
    }

    /// `I / 2^N`.
    pub fn maximally_mixed(basis: Arc<OccupationBasis>) -> Self {
        let n = basis.n_qubits();
        let scale = 0.5f64.powi(n as i32);
        let mut coeffs = vec![ZERO; basis.len()];
        for k in 0..=n {
            coeffs[basis.population_index(k)] = C64::new(scale * binomial(n as u32, k as u32).sqrt(), 0.0);
        }
        Self { basis, coeffs }
    }

    /// All qubits in `|g⟩`.
    pub fn ground(basis: Arc<OccupationBasis>) -> Self {
        let idx = basis.population_index(0);
        Self::unit(basis, idx)
    }

    /// All qubits in `|e⟩`.
    pub fn all_up(basis: Arc<OccupationBasis>) -> Self {
        let idx = basis.population_index(basis.n_qubits());
        Self::unit(basis, idx)
    }

    fn unit(basis: Arc<OccupationBasis>, idx: usize) -> Self {
        let mut coeffs = vec![ZERO; basis.len()];
        coeffs[idx] = ONE;
        Self { basis, coeffs }
    }

    pub fn basis(&self) -> &Arc<OccupationBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn trace(&self) -> C64 {
        pair(&trace_covector(&self.basis), &self.coeffs)
    }

    pub fn jz(&self) -> f64 {
        pair(&observable_covector_jz(&self.basis), &self.coeffs).re
    }

    /// `Tr ρ²`, the squared norm of the coefficients.
    pub fn purity(&self) -> f64 {
        purity(&self.coeffs)
    }

    /// Largest violation of `c(n1,n2,n3,n4) = conj c(n1,n3,n2,n4)`.
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.basis, &self.coeffs)
    }
}

pub fn purity(coeffs: &[C64]) -> f64 {
    norm2(coeffs).powi(2)
}

pub fn hermiticity_defect(basis: &OccupationBasis, coeffs: &[C64]) -> f64 {
    (0..basis.len())
        .map(|i| (coeffs[i] - coeffs[basis.hermitian_partner(i)].conj()).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lifted(n: usize, op: SiteDoubledOperator) -> (Arc<OccupationBasis>, SparseSuperoperator) {
        let b = Arc::new(OccupationBasis::new(n).unwrap());
        let l = lift_one_body(&b, &op);
        (b, l)
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(OccupationBasis::new(1).unwrap().len(), 4);
        assert_eq!(OccupationBasis::new(10).unwrap().len(), 286);
        assert_eq!(OccupationBasis::new(100).unwrap().len(), 176_851);
    }

    #[test]
    fn basis_rejects_out_of_range() {
        assert!(OccupationBasis::new(0).is_err());
        assert!(OccupationBasis::new(201).is_err());
        assert!(OccupationBasis::with_max(5, 4).is_err());
    }

    #[test]
    fn ordering_is_descending_lexicographic() {
        let b = OccupationBasis::new(3).unwrap();
        assert_eq!(b.state(0), [3, 0, 0, 0]);
        assert_eq!(b.state(1), [2, 1, 0, 0]);
        assert_eq!(b.state(b.len() - 1), [0, 0, 0, 3]);
        for w in b.states().windows(2) {
            assert!(w[0][..3] > w[1][..3]);
        }
        assert_eq!(b.index_of(&[1, 1, 1, 1]), None);
    }

    #[test]
    fn identity_lifts_to_n_times_identity() {
        let (b, l) = lifted(5, SiteDoubledOperator::identity());
        let expect = SparseSuperoperator::identity(b.len()).scaled_re(5.0);
        assert!(l.max_abs_diff(&expect).unwrap() < 1e-15);
    }

    #[test]
    fn mode_one_projector_is_number_operator() {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = ONE;
        let (b, l) = lifted(4, SiteDoubledOperator(m));
        assert!(l.is_diagonal());
        for (i, occ) in b.states().iter().enumerate() {
            assert_eq!(l.get(i, i), C64::new(f64::from(occ[0]), 0.0));
        }
    }

    #[test]
    fn trace_covector_small_cases() {
        let b1 = OccupationBasis::new(1).unwrap();
        let t1 = trace_covector(&b1);
        assert_eq!(t1, vec![ONE, ZERO, ZERO, ONE]);

        let b2 = OccupationBasis::new(2).unwrap();
        let t2 = trace_covector(&b2);
        assert_eq!(t2[b2.index_of(&[2, 0, 0, 0]).unwrap()], ONE);
        assert!((t2[b2.index_of(&[1, 0, 0, 1]).unwrap()].re - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(t2[b2.index_of(&[0, 0, 0, 2]).unwrap()], ONE);
        assert_eq!(t2.iter().filter(|z| **z != ZERO).count(), 3);
    }

    #[test]
    fn initial_states() {
        let b1 = Arc::new(OccupationBasis::new(1).unwrap());
        let mm1 = SymState::maximally_mixed(b1);
        assert_eq!(mm1.coeffs(), &[C64::new(0.5, 0.0), ZERO, ZERO, C64::new(0.5, 0.0)]);

        let b2 = Arc::new(OccupationBasis::new(2).unwrap());
        let mm2 = SymState::maximally_mixed(b2.clone());
        assert!((mm2.coeffs()[b2.index_of(&[1, 0, 0, 1]).unwrap()].re - 2f64.sqrt() / 4.0).abs() < 1e-15);
        assert!((mm2.coeffs()[b2.index_of(&[2, 0, 0, 0]).unwrap()].re - 0.25).abs() < 1e-15);
        assert!((mm2.purity() - 0.25).abs() < 1e-15);
        assert!((mm2.trace().re - 1.0).abs() < 1e-15);

        for n in [1, 3, 7, 40] {
            let b = Arc::new(OccupationBasis::new(n).unwrap());
            let half = n as f64 / 2.0;
            let g = SymState::ground(b.clone());
            let up = SymState::all_up(b.clone());
            let mm = SymState::maximally_mixed(b);
            assert!((g.jz() + half).abs() < 1e-12);
            assert!((up.jz() - half).abs() < 1e-12);
            assert!(mm.jz().abs() < 1e-12);
            assert!((g.purity() - 1.0).abs() < 1e-15);
            for s in [&g, &up, &mm] {
                assert!((s.trace().re - 1.0).abs() < 1e-12);
                assert_eq!(s.hermiticity_defect(), 0.0);
            }
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(13, 3), 286.0);
        assert_eq!(binomial(103, 3), 176_851.0);
        assert_eq!(binomial(4, 5), 0.0);
        let big = binomial(200, 100);
        assert!((big / 9.054_851_465_610_328e58 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn site_dissipator_amplitude_damping() {
        // D[σ₋] on vec(ρ) with (ee, ge, eg, gg) ordering of matrix units.
        let d = SiteDoubledOperator::dissipator(&site::sigma_minus());
        let m = d.matrix();
        assert_eq!(m[(3, 0)], ONE);
        assert_eq!(m[(0, 0)], -ONE);
        assert_eq!(m[(1, 1)], C64::new(-0.5, 0.0));
        assert_eq!(m[(2, 2)], C64::new(-0.5, 0.0));
        assert_eq!(m[(3, 3)], ZERO);
    }

    #[test]
    fn site_operator_needs_sixteen_entries() {
        assert!(SiteDoubledOperator::from_row_slice(&[ONE; 9]).is_err());
    }
}
