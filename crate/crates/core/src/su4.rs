//! The SU(4) generators on the symmetric subspace and their commutation table.
//!
//! Fifteen independent generators, organized as six SU(2) subalgebras
//! `Q, Σ, M, N, U, V`, each with raising, lowering and diagonal components.
//! All eighteen labels are built explicitly; `N₃`, `U₃` and `V₃` are linear
//! combinations of the others.

use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::Result;
use crate::sparse::SparseSuperoperator;
use crate::symspace::{lift_one_body, site, OccupationBasis, SiteDoubledOperator};

/// Absolute max-norm tolerance for algebraic identities.
pub const ALGEBRA_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Family {
    Q,
    Sigma,
    M,
    N,
    U,
    V,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Component {
    Plus,
    Minus,
    Three,
}

impl Component {
    pub fn flipped(self) -> Self {
        match self {
            Component::Plus => Component::Minus,
            Component::Minus => Component::Plus,
            Component::Three => Component::Three,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GeneratorId {
    pub family: Family,
    pub component: Component,
}

impl GeneratorId {
    pub const fn new(family: Family, component: Component) -> Self {
        Self { family, component }
    }

    pub const FAMILIES: [Family; 6] = [Family::Q, Family::Sigma, Family::M, Family::N, Family::U, Family::V];
    pub const COMPONENTS: [Component; 3] = [Component::Plus, Component::Minus, Component::Three];

    /// All eighteen labels, family-major.
    pub fn all() -> impl Iterator<Item = GeneratorId> {
        Self::FAMILIES
            .into_iter()
            .flat_map(|f| Self::COMPONENTS.into_iter().map(move |c| GeneratorId::new(f, c)))
    }

    fn slot(self) -> usize {
        let f = Self::FAMILIES.iter().position(|&x| x == self.family).unwrap();
        let c = Self::COMPONENTS.iter().position(|&x| x == self.component).unwrap();
        3 * f + c
    }

    /// Site seed whose one-body lift is this generator.
    pub fn seed(self) -> SiteDoubledOperator {
        use Component::*;
        use Family::*;
        let (sp, sm, sz) = (site::sigma_plus(), site::sigma_minus(), site::sigma_z());
        let (ep, em, id) = (site::e_plus(), site::e_minus(), site::identity());
        let half = |m: Matrix2<C64>| m * C64::new(0.5, 0.0);
        let pm = |c: Component| if c == Plus { sp } else { sm };
        let k = SiteDoubledOperator::kron;
        match (self.family, self.component) {
            (Q, Three) => 0.5 * (k(&id, &half(sz)) + k(&half(sz), &id)),
            (Q, c) => k(&pm(c), &pm(c)),
            (Sigma, Three) => 0.5 * (k(&id, &half(sz)) - k(&half(sz), &id)),
            (Sigma, c) => k(&pm(c.flipped()), &pm(c)),
            (M, Three) => 0.5 * k(&ep, &sz),
            (M, c) => k(&ep, &pm(c)),
            (N, Three) => 0.5 * k(&em, &sz),
            (N, c) => k(&em, &pm(c)),
            (U, Three) => 0.5 * k(&sz, &ep),
            (U, c) => k(&pm(c), &ep),
            (V, Three) => 0.5 * k(&sz, &em),
            (V, c) => k(&pm(c), &em),
        }
    }
}

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fam = match self.family {
            Family::Q => "Q",
            Family::Sigma => "Σ",
            Family::M => "M",
            Family::N => "N",
            Family::U => "U",
            Family::V => "V",
        };
        let comp = match self.component {
            Component::Plus => "+",
            Component::Minus => "-",
            Component::Three => "3",
        };
        write!(f, "{fam}{comp}")
    }
}

/// Shorthand used by the table below.
const fn g(family: Family, component: Component) -> GeneratorId {
    GeneratorId::new(family, component)
}

/// The lifted generators for one basis.
#[derive(Clone, Debug)]
pub struct GeneratorCatalog {
    basis: Arc<OccupationBasis>,
    ops: Vec<SparseSuperoperator>,
    identity: SparseSuperoperator,
}

impl GeneratorCatalog {
    pub fn new(basis: Arc<OccupationBasis>) -> Self {
        let ops = GeneratorId::all().map(|id| lift_one_body(&basis, &id.seed())).collect();
        let identity = SparseSuperoperator::identity(basis.len());
        Self { basis, ops, identity }
    }

    pub fn basis(&self) -> &Arc<OccupationBasis> {
        &self.basis
    }

    pub fn n_qubits(&self) -> usize {
        self.basis.n_qubits()
    }

    pub fn get(&self, id: GeneratorId) -> &SparseSuperoperator {
        &self.ops[id.slot()]
    }

    pub fn op(&self, family: Family, component: Component) -> &SparseSuperoperator {
        self.get(GeneratorId::new(family, component))
    }

    /// The SU(4) identity superoperator `ℐ`.
    pub fn identity(&self) -> &SparseSuperoperator {
        &self.identity
    }

    /// Left multiplication by `J±` (`M± + N±`); `Three` gives `J_z`.
    pub fn left_j(&self, c: Component) -> SparseSuperoperator {
        match c {
            Component::Three => self.op(Family::Q, Component::Three) + self.op(Family::Sigma, Component::Three),
            _ => self.op(Family::M, c) + self.op(Family::N, c),
        }
    }

    /// Right multiplication by `J±` (`U∓ + V∓`); `Three` gives `J_z`.
    pub fn right_j(&self, c: Component) -> SparseSuperoperator {
        match c {
            Component::Three => self.op(Family::Q, Component::Three) - self.op(Family::Sigma, Component::Three),
            _ => self.op(Family::U, c.flipped()) + self.op(Family::V, c.flipped()),
        }
    }
}

/// A right-hand side of the commutation table: `coef · generator`, or zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableValue {
    pub coef: f64,
    pub generator: Option<GeneratorId>,
}

const ZERO_ENTRY: TableValue = TableValue { coef: 0.0, generator: None };

const fn tv(coef: f64, id: GeneratorId) -> TableValue {
    TableValue { coef, generator: Some(id) }
}

impl fmt::Display for TableValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.generator {
            None => write!(f, "0"),
            Some(id) => {
                let c = self.coef;
                if c == 1.0 {
                    write!(f, "{id}")
                } else if c == -1.0 {
                    write!(f, "-{id}")
                } else if c == 0.5 {
                    write!(f, "½{id}")
                } else if c == -0.5 {
                    write!(f, "-½{id}")
                } else {
                    write!(f, "{c}·{id}")
                }
            }
        }
    }
}

/// One printed entry `[row, col] = value` of the commutation table.
#[derive(Clone, Copy, Debug)]
pub struct TableEntry {
    pub row: GeneratorId,
    pub col: GeneratorId,
    pub value: TableValue,
}

/// The three sub-tables of cross-family commutators, as printed.
pub fn commutation_table() -> Vec<TableEntry> {
    use Component::{Minus as Mi, Plus as P, Three as T};
    use Family::*;
    let z = ZERO_ENTRY;
    let h = 0.5;
    // Each block: rows × 6 columns.
    let blocks: [(&[GeneratorId], [GeneratorId; 6], Vec<[TableValue; 6]>); 3] = [
        (
            &[g(Q, P), g(Q, Mi), g(Q, T), g(Sigma, P), g(Sigma, Mi), g(Sigma, T)],
            [g(M, P), g(M, Mi), g(M, T), g(N, P), g(N, Mi), g(N, T)],
            vec![
                [z, tv(-1.0, g(V, P)), tv(-h, g(Q, P)), z, tv(1.0, g(U, P)), tv(-h, g(Q, P))],
                [tv(1.0, g(V, Mi)), z, tv(h, g(Q, Mi)), tv(-1.0, g(U, Mi)), z, tv(h, g(Q, Mi))],
                [tv(h, g(M, P)), tv(-h, g(M, Mi)), z, tv(h, g(N, P)), tv(-h, g(N, Mi)), z],
                [z, tv(1.0, g(U, Mi)), tv(-h, g(Sigma, P)), z, tv(-1.0, g(V, Mi)), tv(-h, g(Sigma, P))],
                [tv(-1.0, g(U, P)), z, tv(h, g(Sigma, Mi)), tv(1.0, g(V, P)), z, tv(h, g(Sigma, Mi))],
                [tv(h, g(M, P)), tv(-h, g(M, Mi)), z, tv(h, g(N, P)), tv(-h, g(N, Mi)), z],
            ],
        ),
        (
            &[g(Q, P), g(Q, Mi), g(Q, T), g(Sigma, P), g(Sigma, Mi), g(Sigma, T)],
            [g(U, P), g(U, Mi), g(U, T), g(V, P), g(V, Mi), g(V, T)],
            vec![
                [z, tv(-1.0, g(N, P)), tv(-h, g(Q, P)), z, tv(1.0, g(M, P)), tv(-h, g(Q, P))],
                [tv(1.0, g(N, Mi)), z, tv(h, g(Q, Mi)), tv(-1.0, g(M, Mi)), z, tv(h, g(Q, Mi))],
                [tv(h, g(U, P)), tv(-h, g(U, Mi)), z, tv(h, g(V, P)), tv(-h, g(V, Mi)), z],
                [tv(-1.0, g(M, P)), z, tv(h, g(Sigma, P)), tv(1.0, g(N, P)), z, tv(h, g(Sigma, P))],
                [z, tv(1.0, g(M, Mi)), tv(-h, g(Sigma, Mi)), z, tv(-1.0, g(N, Mi)), tv(-h, g(Sigma, Mi))],
                [tv(-h, g(U, P)), tv(h, g(U, Mi)), z, tv(-h, g(V, P)), tv(h, g(V, Mi)), z],
            ],
        ),
        (
            &[g(M, P), g(M, Mi), g(M, T), g(N, P), g(N, Mi), g(N, T)],
            [g(U, P), g(U, Mi), g(U, T), g(V, P), g(V, Mi), g(V, T)],
            vec![
                [z, tv(-1.0, g(Sigma, P)), tv(-h, g(M, P)), tv(1.0, g(Q, P)), z, tv(h, g(M, P))],
                [tv(1.0, g(Sigma, Mi)), z, tv(h, g(M, Mi)), z, tv(-1.0, g(Q, Mi)), tv(-h, g(M, Mi))],
                [tv(h, g(U, P)), tv(-h, g(U, Mi)), z, tv(-h, g(V, P)), tv(h, g(V, Mi)), z],
                [tv(-1.0, g(Q, P)), z, tv(h, g(N, P)), z, tv(1.0, g(Sigma, P)), tv(-h, g(N, P))],
                [z, tv(1.0, g(Q, Mi)), tv(-h, g(N, Mi)), tv(-1.0, g(Sigma, Mi)), z, tv(h, g(N, Mi))],
                [tv(-h, g(U, P)), tv(h, g(U, Mi)), z, tv(h, g(V, P)), tv(-h, g(V, Mi)), z],
            ],
        ),
    ];
    let mut out = Vec::with_capacity(108);
    for (rows, cols, values) in blocks.iter() {
        for (row, vals) in rows.iter().zip(values) {
            for (col, value) in cols.iter().zip(vals) {
                out.push(TableEntry { row: *row, col: *col, value: *value });
            }
        }
    }
    out
}

/// Outcome of checking one algebraic identity.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub n_qubits: usize,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// For a failed table entry: a value that does hold numerically, if any.
    pub resolved: Option<String>,
}

impl IdentityCheck {
    pub fn new(name: impl Into<String>, n_qubits: usize, deviation: f64, tolerance: f64) -> Self {
        Self { name: name.into(), n_qubits, deviation, tolerance, passed: deviation <= tolerance, resolved: None }
    }
}

fn value_op(catalog: &GeneratorCatalog, v: &TableValue) -> SparseSuperoperator {
    match v.generator {
        None => SparseSuperoperator::zeros(catalog.basis().len()),
        Some(id) => catalog.get(id).scaled_re(v.coef),
    }
}

/// Searches `coef · generator` for a value matching `target`.
fn resolve(catalog: &GeneratorCatalog, target: &SparseSuperoperator) -> Option<String> {
    if target.max_abs() <= ALGEBRA_TOL {
        return Some("0".to_string());
    }
    for id in GeneratorId::all() {
        for coef in [1.0, -1.0, 0.5, -0.5, 2.0, -2.0] {
            let cand = catalog.get(id).scaled_re(coef);
            if target.max_abs_diff(&cand).ok()? <= ALGEBRA_TOL {
                return Some(TableValue { coef, generator: Some(id) }.to_string());
            }
        }
    }
    None
}

/// Evaluates every printed table entry as a matrix identity.
pub fn verify_commutation_table(catalog: &GeneratorCatalog) -> Result<Vec<IdentityCheck>> {
    let n = catalog.n_qubits();
    let mut out = Vec::new();
    for entry in commutation_table() {
        let lhs = catalog.get(entry.row).commutator(catalog.get(entry.col))?;
        let rhs = value_op(catalog, &entry.value);
        let dev = lhs.max_abs_diff(&rhs)?;
        let mut check = IdentityCheck::new(format!("[{}, {}] = {}", entry.row, entry.col, entry.value), n, dev, ALGEBRA_TOL);
        if !check.passed {
            check.resolved = resolve(catalog, &lhs);
        }
        out.push(check);
    }
    Ok(out)
}

/// SU(2) relations within each family, the commuting pairs and the three
/// linear dependences.
pub fn verify_subalgebras(catalog: &GeneratorCatalog) -> Result<Vec<IdentityCheck>> {
    use Component::*;
    let n = catalog.n_qubits();
    let mut out = Vec::new();
    for fam in GeneratorId::FAMILIES {
        let (p, m, t) = (catalog.op(fam, Plus), catalog.op(fam, Minus), catalog.op(fam, Three));
        let name = GeneratorId::new(fam, Plus).to_string();
        let name = &name[..name.len() - 1];
        out.push(IdentityCheck::new(
            format!("[{name}+, {name}-] = 2{name}3"),
            n,
            p.commutator(m)?.max_abs_diff(&t.scaled_re(2.0))?,
            ALGEBRA_TOL,
        ));
        out.push(IdentityCheck::new(
            format!("[{name}3, {name}+] = {name}+"),
            n,
            t.commutator(p)?.max_abs_diff(p)?,
            ALGEBRA_TOL,
        ));
        out.push(IdentityCheck::new(
            format!("[{name}3, {name}-] = -{name}-"),
            n,
            t.commutator(m)?.max_abs_diff(&m.scaled_re(-1.0))?,
            ALGEBRA_TOL,
        ));
    }
    for (a, b) in [(Family::Q, Family::Sigma), (Family::M, Family::N), (Family::U, Family::V)] {
        for ca in GeneratorId::COMPONENTS {
            for cb in GeneratorId::COMPONENTS {
                let (ia, ib) = (GeneratorId::new(a, ca), GeneratorId::new(b, cb));
                let dev = catalog.get(ia).commutator(catalog.get(ib))?.max_abs();
                out.push(IdentityCheck::new(format!("[{ia}, {ib}] = 0"), n, dev, ALGEBRA_TOL));
            }
        }
    }
    let op = |f| catalog.op(f, Three);
    let n3 = &(op(Family::Q) + op(Family::Sigma)) - op(Family::M);
    out.push(IdentityCheck::new("N3 = Q3 + Σ3 - M3", n, op(Family::N).max_abs_diff(&n3)?, ALGEBRA_TOL));
    let u3 = op(Family::M) - op(Family::Sigma);
    out.push(IdentityCheck::new("U3 = M3 - Σ3", n, op(Family::U).max_abs_diff(&u3)?, ALGEBRA_TOL));
    let v3 = op(Family::Q) - op(Family::M);
    out.push(IdentityCheck::new("V3 = Q3 - M3", n, op(Family::V).max_abs_diff(&v3)?, ALGEBRA_TOL));
    Ok(out)
}

/// `O±† = O∓` for the four ladder families used by the average dissipator.
pub fn verify_adjoints(catalog: &GeneratorCatalog) -> Result<Vec<IdentityCheck>> {
    let n = catalog.n_qubits();
    let mut out = Vec::new();
    for fam in [Family::M, Family::N, Family::U, Family::V, Family::Q, Family::Sigma] {
        let p = catalog.op(fam, Component::Plus);
        let m = catalog.op(fam, Component::Minus);
        let id = GeneratorId::new(fam, Component::Plus);
        out.push(IdentityCheck::new(format!("{id}† = {}", GeneratorId::new(fam, Component::Minus)), n, p.adjoint().max_abs_diff(m)?, ALGEBRA_TOL));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog(n: usize) -> GeneratorCatalog {
        GeneratorCatalog::new(Arc::new(OccupationBasis::new(n).unwrap()))
    }

    #[test]
    fn q_plus_on_one_site_moves_mode_four_to_mode_one() {
        let c = catalog(1);
        let q = c.op(Family::Q, Component::Plus);
        assert_eq!(q.nnz(), 1);
        let b = c.basis();
        let from = b.index_of(&[0, 0, 0, 1]).unwrap();
        let to = b.index_of(&[1, 0, 0, 0]).unwrap();
        assert_eq!(q.get(to, from), C64::new(1.0, 0.0));
    }

    #[test]
    fn q_ladder_closes_on_q3() {
        let c = catalog(3);
        let lhs = c.op(Family::Q, Component::Plus).commutator(c.op(Family::Q, Component::Minus)).unwrap();
        assert!(lhs.max_abs_diff(&c.op(Family::Q, Component::Three).scaled_re(2.0)).unwrap() < ALGEBRA_TOL);
    }

    #[test]
    fn n3_dependence_n2() {
        let c = catalog(2);
        let rhs = &(c.op(Family::Q, Component::Three) + c.op(Family::Sigma, Component::Three)) - c.op(Family::M, Component::Three);
        assert!(c.op(Family::N, Component::Three).max_abs_diff(&rhs).unwrap() < ALGEBRA_TOL);
    }

    #[test]
    fn selected_table_entries() {
        let c = catalog(3);
        let lhs = c.op(Family::Q, Component::Three).commutator(c.op(Family::M, Component::Plus)).unwrap();
        assert!(lhs.max_abs_diff(&c.op(Family::M, Component::Plus).scaled_re(0.5)).unwrap() < ALGEBRA_TOL);
        let c2 = catalog(2);
        let lhs = c2.op(Family::Q, Component::Plus).commutator(c2.op(Family::M, Component::Minus)).unwrap();
        assert!(lhs.max_abs_diff(&c2.op(Family::V, Component::Plus).scaled_re(-1.0)).unwrap() < ALGEBRA_TOL);
    }

    #[test]
    fn table_has_108_entries() {
        assert_eq!(commutation_table().len(), 108);
    }

    #[test]
    fn left_and_right_multiplication_commute() {
        let c = catalog(3);
        for a in GeneratorId::COMPONENTS {
            for b in GeneratorId::COMPONENTS {
                let d = c.left_j(a).commutator(&c.right_j(b)).unwrap().max_abs();
                assert!(d < ALGEBRA_TOL, "{a:?} {b:?}");
            }
        }
    }
}
