//! Steady-state expectation values through a double-layer transfer-matrix
//! contraction of `S S^dag`, with direct-trace oracles.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::amplitudes::{MpoTensor, ORIGIN_INDEX};
use crate::error::{NessError, OperatorError};
use crate::exact::{FieldScalar, PolyEU, Scalar};
use crate::ness::{hamiltonian, occupation, Construction, ModelParams};
use crate::par::{self, Exec};
use crate::pauli::{DenseMatrix, PauliIndex, PauliString, SiteLabel, SparseOp};

use PauliIndex::{Minus, Plus, Zero, Z};

/// Coefficients `tr(O P_a P_b^dag)` of a one-site operator `O`, one entry per
/// nonzero label pair `(a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableVertex<C> {
    pub pairs: Vec<(SiteLabel, SiteLabel, C)>,
}

impl<C: Scalar> ObservableVertex<C> {
    pub fn new(op: &SparseOp<C>) -> Result<Self, NessError> {
        if op.len_sites() != 1 {
            return Err(NessError::Operator(OperatorError::LengthMismatch {
                left: op.len_sites(),
                right: 1,
            }));
        }
        let mut pairs = Vec::new();
        for a in SiteLabel::all() {
            for b in SiteLabel::all() {
                let pa = SparseOp::<C>::site_op(1, 0, a);
                let pb = SparseOp::<C>::site_op(1, 0, b.dagger());
                let c = op.mul(&pa)?.mul(&pb)?.trace();
                if !c.is_zero() {
                    pairs.push((a, b, c));
                }
            }
        }
        Ok(Self { pairs })
    }

    pub fn for_label(label: SiteLabel) -> Self {
        Self::new(&SparseOp::site_op(1, 0, label)).expect("one site")
    }
}

/// Site weights `w(s) w(t)` with `w(0) = w(z) = 2`, `w(+) = w(-) = 1`.
pub fn label_weight(label: SiteLabel) -> i64 {
    label.hs_weight()
}

/// Contraction of `<0 (x) 0| prod_j V_j |0 (x) 0>` over the doubled auxiliary space.
#[derive(Debug, Clone)]
pub struct TransferMatrix<C> {
    n: usize,
    mpo: MpoTensor<C>,
    conj: Vec<Vec<(usize, usize, C)>>,
    label_vertices: Vec<ObservableVertex<C>>,
}

impl<C: Scalar> TransferMatrix<C> {
    pub fn new(params: &ModelParams<C>, construction: &Construction) -> Result<Self, NessError> {
        if params.n < 1 {
            return Err(NessError::ChainTooShort { n: params.n, min: 1 });
        }
        let graph = construction.graph_for(params.n)?;
        let mpo = MpoTensor::build(&graph, &construction.table, &params.eps, &params.u)?;
        let conj = SiteLabel::all()
            .map(|l| mpo.matrix(l).iter().map(|(r, c, v)| (*r, *c, v.conj())).collect())
            .collect();
        let label_vertices = SiteLabel::all().map(ObservableVertex::for_label).collect();
        Ok(Self { n: params.n, mpo, conj, label_vertices })
    }

    pub fn len_sites(&self) -> usize {
        self.n
    }

    /// Dimension of the doubled auxiliary space.
    pub fn doubled_dim(&self) -> usize {
        self.mpo.dim() * self.mpo.dim()
    }

    fn step(&self, x: &[C], vertex: &ObservableVertex<C>) -> Vec<C> {
        let d = self.mpo.dim();
        let mut out = vec![C::zero(); d * d];
        for (a, b, weight) in &vertex.pairs {
            for (i, k, va) in self.mpo.matrix(*a) {
                let scaled = va.mul_ref(weight);
                for (j, l, vb) in &self.conj[b.code() as usize] {
                    let xij = &x[i * d + j];
                    if !xij.is_zero() {
                        out[k * d + l].add_assign_ref(&xij.mul_ref(&scaled).mul_ref(vb));
                    }
                }
            }
        }
        out
    }

    /// Contracts one vertex per site, left to right.
    pub fn contract(&self, vertices: &[&ObservableVertex<C>]) -> Result<C, NessError> {
        if vertices.len() != self.n {
            return Err(NessError::Operator(OperatorError::LengthMismatch {
                left: vertices.len(),
                right: self.n,
            }));
        }
        let d = self.mpo.dim();
        let mut x = vec![C::zero(); d * d];
        x[ORIGIN_INDEX * d + ORIGIN_INDEX] = C::one();
        for v in vertices {
            x = self.step(&x, v);
        }
        Ok(x[ORIGIN_INDEX * d + ORIGIN_INDEX].clone())
    }

    /// `tr(S S^dag)`.
    pub fn norm_trace(&self) -> C {
        let id = &self.label_vertices[SiteLabel::IDENTITY.code() as usize];
        self.contract(&vec![id; self.n]).expect("matching length")
    }

    /// `tr(S S^dag O)` for an operator on the whole chain.
    pub fn trace_with(&self, op: &SparseOp<C>) -> Result<C, NessError> {
        if op.len_sites() != self.n {
            return Err(NessError::Operator(OperatorError::LengthMismatch {
                left: op.len_sites(),
                right: self.n,
            }));
        }
        let mut acc = C::zero();
        for (string, c) in op.iter() {
            let vertices: Vec<&ObservableVertex<C>> =
                string.labels().iter().map(|l| &self.label_vertices[l.code() as usize]).collect();
            acc.add_assign_ref(&self.contract(&vertices)?.mul_ref(c));
        }
        Ok(acc)
    }

    /// Dense `sum_{a,b} c_ab A_a (x) conj(A_b)` on the doubled space.
    pub fn vertex_matrix(&self, vertex: &ObservableVertex<C>) -> DenseMatrix<C> {
        let d = self.mpo.dim();
        let mut m = DenseMatrix::<C>::zeros(d * d);
        for (a, b, weight) in &vertex.pairs {
            for (i, k, va) in self.mpo.matrix(*a) {
                for (j, l, vb) in &self.conj[b.code() as usize] {
                    m.entry_mut(i * d + j, k * d + l).add_assign_ref(&va.mul_ref(vb).mul_ref(weight));
                }
            }
        }
        m
    }

    /// `T = sum_{s,t} w(s) w(t) A_{s,t} (x) conj(A_{s,t})`, built from the weights directly.
    pub fn matrix(&self) -> DenseMatrix<C> {
        let d = self.mpo.dim();
        let mut m = DenseMatrix::<C>::zeros(d * d);
        for label in SiteLabel::all() {
            let w = C::from_int(label_weight(label));
            for (i, k, va) in self.mpo.matrix(label) {
                for (j, l, vb) in &self.conj[label.code() as usize] {
                    m.entry_mut(i * d + j, k * d + l).add_assign_ref(&va.mul_ref(vb).mul_ref(&w));
                }
            }
        }
        m
    }
}

impl<C: FieldScalar> TransferMatrix<C> {
    /// `tr(rho O) / tr(rho)`.
    pub fn expectation(&self, op: &SparseOp<C>) -> Result<C, NessError> {
        self.trace_with(op)?.checked_div(&self.norm_trace()).ok_or(NessError::ZeroNorm)
    }
}

/// `tr(S S^dag O) = sum_col <S col| O |S col>`, one basis column at a time.
pub fn direct_trace<C: Scalar>(s: &SparseOp<C>, op: &SparseOp<C>) -> Result<C, NessError> {
    if s.len_sites() != op.len_sites() {
        return Err(NessError::Operator(OperatorError::LengthMismatch {
            left: s.len_sites(),
            right: op.len_sites(),
        }));
    }
    let dim = 1usize << (2 * s.len_sites());
    let mut acc = C::zero();
    for col in 0..dim {
        let column = s.dense_column(col);
        let mut image: BTreeMap<usize, C> = BTreeMap::new();
        for (row, v) in &column {
            for (string, c) in op.iter() {
                if let Some((target, sign)) = string.apply_to_basis(*row) {
                    let mut term = v.mul_ref(c);
                    if sign < 0 {
                        term = term.neg_ref();
                    }
                    image.entry(target).or_insert_with(C::zero).add_assign_ref(&term);
                }
            }
        }
        for (row, v) in &column {
            if let Some(w) = image.get(row) {
                acc.add_assign_ref(&v.conj().mul_ref(w));
            }
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SiteProfile<C> {
    pub site: usize,
    pub sz: C,
    pub tz: C,
    pub n_up: C,
    pub n_down: C,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BondCurrent<C> {
    pub bond: usize,
    pub j_sigma: C,
    pub j_tau: C,
}

/// One-site `sz` or `tz` embedded at `site`.
fn site_z<C: Scalar>(n: usize, site: usize, up: bool) -> SparseOp<C> {
    let label = if up { SiteLabel::new(Z, Zero) } else { SiteLabel::new(Zero, Z) };
    SparseOp::site_op(n, site, label)
}

/// `<sz_j>`, `<tz_j>`, `<n_up,j>`, `<n_down,j>` for every site (1-based in the output).
pub fn site_profiles<C: FieldScalar>(
    tm: &TransferMatrix<C>,
    exec: Exec,
) -> Result<Vec<SiteProfile<C>>, NessError> {
    let n = tm.len_sites();
    let sites: Vec<usize> = (0..n).collect();
    par::map(exec, &sites, |&j| {
        Ok(SiteProfile {
            site: j + 1,
            sz: tm.expectation(&site_z(n, j, true))?,
            tz: tm.expectation(&site_z(n, j, false))?,
            n_up: tm.expectation(&occupation(n, j, true))?,
            n_down: tm.expectation(&occupation(n, j, false))?,
        })
    })
    .into_iter()
    .collect()
}

/// `2i (a+_j a-_{j+1} - a-_j a+_{j+1})` on the sigma (`up`) or tau chain, bond `j`.
pub fn current_operator<C: Scalar>(n: usize, bond: usize, up: bool) -> SparseOp<C> {
    let lab = |p: PauliIndex| if up { SiteLabel::new(p, Zero) } else { SiteLabel::new(Zero, p) };
    let two_i = C::imag_unit().scale_small(2, 1);
    let forward = PauliString::identity(n).with(bond, lab(Plus)).with(bond + 1, lab(Minus));
    let backward = PauliString::identity(n).with(bond, lab(Minus)).with(bond + 1, lab(Plus));
    SparseOp::from_terms(n, [(forward, two_i.clone()), (backward, two_i.neg_ref())])
}

/// Checks `i[H, sz_j] = j_{j-1} - j_j` (missing currents at the chain ends) for
/// every site and both chains, with `u` symbolic.
pub fn continuity_identity_holds(n: usize) -> bool {
    let h = hamiltonian(n, &PolyEU::u());
    (0..n).all(|j| {
        [true, false].into_iter().all(|up| {
            let lhs = h.commutator(&site_z(n, j, up)).expect("same length").scale(&PolyEU::i());
            let mut rhs = SparseOp::zero(n);
            if j > 0 {
                rhs = rhs.add(&current_operator(n, j - 1, up)).expect("same length");
            }
            if j + 1 < n {
                rhs = rhs.sub(&current_operator(n, j, up)).expect("same length");
            }
            lhs == rhs
        })
    })
}

/// `<j^sigma_b>`, `<j^tau_b>` for bonds `b = 1..n-1`.
pub fn current_profiles<C: FieldScalar>(
    tm: &TransferMatrix<C>,
    exec: Exec,
) -> Result<Vec<BondCurrent<C>>, NessError> {
    let n = tm.len_sites();
    if n < 2 {
        return Err(NessError::ChainTooShort { n, min: 2 });
    }
    let bonds: Vec<usize> = (0..n - 1).collect();
    par::map(exec, &bonds, |&b| {
        Ok(BondCurrent {
            bond: b + 1,
            j_sigma: tm.expectation(&current_operator(n, b, true))?,
            j_tau: tm.expectation(&current_operator(n, b, false))?,
        })
    })
    .into_iter()
    .collect()
}

/// `S^z = (1/4) sum_j (tz_j - sz_j)`.
pub fn spin_z<C: Scalar>(n: usize) -> SparseOp<C> {
    let mut op = SparseOp::zero(n);
    for j in 0..n {
        op.add_term(PauliString::identity(n).with(j, SiteLabel::new(Zero, Z)), C::one().scale_small(1, 4));
        op.add_term(PauliString::identity(n).with(j, SiteLabel::new(Z, Zero)), C::one().scale_small(-1, 4));
    }
    op
}

/// `eta^z = -(1/4) sum_j (sz_j + tz_j)`, traceless at half filling.
pub fn eta_z<C: Scalar>(n: usize) -> SparseOp<C> {
    let mut op = SparseOp::zero(n);
    for j in 0..n {
        for label in [SiteLabel::new(Z, Zero), SiteLabel::new(Zero, Z)] {
            op.add_term(PauliString::identity(n).with(j, label), C::one().scale_small(-1, 4));
        }
    }
    op
}

/// `P_j = prod_{k <= j} z_k` on one chain, sites `0..j` (empty product for `j = 0`).
fn parity_string(n: usize, upto: usize, up: bool) -> PauliString {
    let z = if up { SiteLabel::new(Z, Zero) } else { SiteLabel::new(Zero, Z) };
    (0..upto).fold(PauliString::identity(n), |s, k| s.with(k, z))
}

/// `c_{up,j} = P^sigma_{j-1} s-_j`.
pub fn annihilate_up<C: Scalar>(n: usize, site: usize) -> SparseOp<C> {
    let string = parity_string(n, site, true);
    let lower = SparseOp::site_op(n, site, SiteLabel::new(Minus, Zero));
    SparseOp::single(string, C::one()).mul(&lower).expect("same length")
}

/// `c_{down,j} = P^sigma_n P^tau_{j-1} t-_j`.
pub fn annihilate_down<C: Scalar>(n: usize, site: usize) -> SparseOp<C> {
    let sigma = SparseOp::single(parity_string(n, n, true), C::one());
    let tau = SparseOp::single(parity_string(n, site, false), C::one());
    let lower = SparseOp::site_op(n, site, SiteLabel::new(Zero, Minus));
    sigma.mul(&tau).and_then(|p| p.mul(&lower)).expect("same length")
}

/// `S^+ = sum_j c^dag_{up,j} c_{down,j}`.
pub fn spin_raise<C: Scalar>(n: usize) -> SparseOp<C> {
    (0..n).fold(SparseOp::zero(n), |acc, j| {
        let term = annihilate_up::<C>(n, j).adjoint().mul(&annihilate_down(n, j)).expect("same length");
        acc.add(&term).expect("same length")
    })
}

/// `(S^x)^2 + (S^y)^2 + (S^z)^2 = (S^+ S^- + S^- S^+)/2 + (S^z)^2`.
pub fn spin_casimir<C: Scalar>(n: usize) -> SparseOp<C> {
    let plus = spin_raise::<C>(n);
    let minus = plus.adjoint();
    let sz = spin_z::<C>(n);
    plus.anticommutator(&minus)
        .map(|a| a.scale_small(1, 2))
        .and_then(|a| a.add(&sz.mul(&sz)?))
        .expect("same length")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReport<C> {
    pub n: usize,
    pub commutes_spin_z: bool,
    pub commutes_eta_z: bool,
    pub commutes_spin_raise: bool,
    pub commutes_spin_lower: bool,
    pub commutes_number_up: bool,
    pub commutes_number_down: bool,
    pub trace_spin_z: C,
    pub trace_eta_z: C,
    pub casimir_ratio: C,
}

impl<C: FieldScalar> SymmetryReport<C> {
    pub fn expected_casimir(&self) -> C {
        C::from_int(3 * self.n as i64).scale_small(1, 8)
    }

    pub fn commutators_vanish(&self) -> bool {
        self.commutes_spin_z
            && self.commutes_eta_z
            && self.commutes_spin_raise
            && self.commutes_spin_lower
            && self.commutes_number_up
            && self.commutes_number_down
    }
}

/// Commutators of `rho` with the conserved charges, and the symmetry scalars
/// through the transfer matrix.
pub fn symmetry_checks<C: FieldScalar>(
    rho: &SparseOp<C>,
    tm: &TransferMatrix<C>,
    exec: Exec,
) -> Result<SymmetryReport<C>, NessError> {
    let n = tm.len_sites();
    let raise = spin_raise::<C>(n);
    let charges = vec![
        spin_z::<C>(n),
        eta_z::<C>(n),
        raise.adjoint(),
        raise,
        crate::ness::number_operator::<C>(n, true),
        crate::ness::number_operator::<C>(n, false),
    ];
    let commutes: Vec<bool> = par::map(exec, &charges, |q| rho.commutator(q).map(|c| c.is_zero()))
        .into_iter()
        .collect::<Result<_, _>>()?;
    Ok(SymmetryReport {
        n,
        commutes_spin_z: commutes[0],
        commutes_eta_z: commutes[1],
        commutes_spin_lower: commutes[2],
        commutes_spin_raise: commutes[3],
        commutes_number_up: commutes[4],
        commutes_number_down: commutes[5],
        trace_spin_z: tm.trace_with(&charges[0])?,
        trace_eta_z: tm.trace_with(&charges[1])?,
        casimir_ratio: tm.expectation(&spin_casimir(n))?,
    })
}

/// `site,sz,tz,n_up,n_down` table.
pub fn site_csv<C: FieldScalar>(rows: &[SiteProfile<C>]) -> String {
    let mut out = String::from("site,sz,tz,n_up,n_down\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.site,
            r.sz.format_real(),
            r.tz.format_real(),
            r.n_up.format_real(),
            r.n_down.format_real()
        ));
    }
    out
}

/// `bond,j_sigma,j_tau` table.
pub fn current_csv<C: FieldScalar>(rows: &[BondCurrent<C>]) -> String {
    let mut out = String::from("bond,j_sigma,j_tau\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.bond, r.j_sigma.format_real(), r.j_tau.format_real()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::GaussianRational;
    use crate::ness::{build_rho, build_s};

    fn exact(n: usize) -> ModelParams<GaussianRational> {
        ModelParams::new(n, GaussianRational::from_ints(1, 0), GaussianRational::from_ints(4, 0))
    }

    #[test]
    fn single_site_state_is_identity() {
        let tm = TransferMatrix::new(&exact(1), &Construction::default()).unwrap();
        assert_eq!(tm.norm_trace(), GaussianRational::from_ints(4, 0));
        let p = site_profiles(&tm, Exec::Sequential).unwrap();
        assert!(Scalar::is_zero(&p[0].sz) && Scalar::is_zero(&p[0].tz));
    }

    #[test]
    fn identity_vertex_is_transfer_matrix() {
        let tm = TransferMatrix::new(&exact(3), &Construction::default()).unwrap();
        let id = ObservableVertex::for_label(SiteLabel::IDENTITY);
        assert_eq!(tm.vertex_matrix(&id), tm.matrix());
    }

    #[test]
    fn norm_matches_pauli_trace() {
        let params = exact(3);
        let s = build_s(&params, &Construction::default()).unwrap();
        let rho = build_rho(&s, Exec::Sequential);
        let tm = TransferMatrix::new(&params, &Construction::default()).unwrap();
        assert_eq!(tm.norm_trace(), rho.trace());
        assert_eq!(direct_trace(&s, &SparseOp::identity(3)).unwrap(), rho.trace());
        let op = current_operator::<GaussianRational>(3, 1, false);
        assert_eq!(tm.trace_with(&op).unwrap(), rho.mul(&op).unwrap().trace());
    }

    #[test]
    fn continuity_identity() {
        for n in 2..=4 {
            assert!(continuity_identity_holds(n));
        }
    }

    #[test]
    fn fermion_operators_anticommute() {
        let n = 3;
        let (a, b) = (annihilate_up::<GaussianRational>(n, 0), annihilate_down::<GaussianRational>(n, 2));
        assert!(a.anticommutator(&b).unwrap().is_zero());
        let c = annihilate_up::<GaussianRational>(n, 1);
        let anti = c.anticommutator(&c.adjoint()).unwrap();
        assert_eq!(anti, SparseOp::identity(n));
    }

    #[test]
    fn csv_headers() {
        let tm = TransferMatrix::new(&exact(2), &Construction::default()).unwrap();
        let sites = site_csv(&site_profiles(&tm, Exec::Sequential).unwrap());
        assert!(sites.starts_with("site,sz,tz,n_up,n_down\n1,"));
        let bonds = current_csv(&current_profiles(&tm, Exec::Sequential).unwrap());
        assert_eq!(bonds.lines().count(), 2);
    }
}
