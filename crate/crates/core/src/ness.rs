//! Steady-state construction: `S_n` from walks or MPO contraction, `rho = S S^dag`,
//! the Hamiltonian and Liouvillian, and structural checks on the result.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::amplitudes::{Amplitude, AmplitudeTable, MpoTensor, ORIGIN_INDEX};
use crate::error::NessError;
use crate::exact::{GaussianRational, PolyEU, Scalar};
use crate::graph::{build_graph, default_truncation, Coloring, Node, TruncatedGraph};
use crate::par::{self, Exec};
use crate::pauli::{PauliIndex, PauliString, SiteLabel, SparseOp};

use PauliIndex::{Minus, Plus, Zero, Z};

/// Chain length and coupling parameters in a coefficient ring `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<C> {
    pub n: usize,
    pub eps: C,
    pub u: C,
}

impl<C: Scalar> ModelParams<C> {
    pub fn new(n: usize, eps: C, u: C) -> Self {
        Self { n, eps, u }
    }
}

impl ModelParams<PolyEU> {
    /// `eps` and `u` kept as indeterminates.
    pub fn symbolic(n: usize) -> Self {
        Self::new(n, PolyEU::eps(), PolyEU::u())
    }
}

/// Which graph coloring and amplitude table to build from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Construction {
    pub coloring: Coloring,
    pub table: AmplitudeTable,
}

impl Construction {
    pub fn new(coloring: Coloring, table: AmplitudeTable) -> Self {
        Self { coloring, table }
    }

    pub fn graph_for(&self, n: usize) -> Result<TruncatedGraph, NessError> {
        Ok(build_graph(default_truncation(n), self.coloring)?)
    }
}

fn label(s: PauliIndex, t: PauliIndex) -> SiteLabel {
    SiteLabel::new(s, t)
}

/// Two-site term `a` on `site`, `b` on `site + 1`.
fn bond<C: Scalar>(n: usize, site: usize, a: SiteLabel, b: SiteLabel, coeff: C) -> SparseOp<C> {
    let s = PauliString::identity(n).with(site, a).with(site + 1, b);
    SparseOp::single(s, coeff)
}

/// Hopping on both chains plus `(u/4) sum_j sz_j tz_j`.
pub fn hamiltonian<C: Scalar>(n: usize, u: &C) -> SparseOp<C> {
    let mut h = SparseOp::zero(n);
    for j in 0..n.saturating_sub(1) {
        for (a, b) in [
            (label(Plus, Zero), label(Minus, Zero)),
            (label(Minus, Zero), label(Plus, Zero)),
            (label(Zero, Plus), label(Zero, Minus)),
            (label(Zero, Minus), label(Zero, Plus)),
        ] {
            h = h.add(&bond(n, j, a, b, C::one())).expect("same length");
        }
    }
    let onsite = u.scale_small(1, 4);
    for j in 0..n {
        h.add_term(PauliString::identity(n).with(j, label(Z, Z)), onsite.clone());
    }
    h
}

/// Occupation `c^dag c = (1 + sz)/2` of the sigma (`up`) or tau (`down`) chain at `site`.
pub fn occupation<C: Scalar>(n: usize, site: usize, up: bool) -> SparseOp<C> {
    let z = if up { label(Z, Zero) } else { label(Zero, Z) };
    let mut op = SparseOp::identity(n).scale_small(1, 2);
    op.add_term(PauliString::identity(n).with(site, z), C::one().scale_small(1, 2));
    op
}

/// Total particle number on one chain.
pub fn number_operator<C: Scalar>(n: usize, up: bool) -> SparseOp<C> {
    (0..n).fold(SparseOp::zero(n), |acc, j| acc.add(&occupation(n, j, up)).expect("same length"))
}

/// Hamiltonian with chemical potentials added: `H + mu_up N_up + mu_down N_down`.
pub fn shifted_hamiltonian<C: Scalar>(n: usize, u: &C, mu_up: &C, mu_down: &C) -> SparseOp<C> {
    let up = number_operator::<C>(n, true).scale(mu_up);
    let down = number_operator::<C>(n, false).scale(mu_down);
    hamiltonian(n, u).add(&up).and_then(|h| h.add(&down)).expect("same length")
}

fn evaluated_amplitudes<C: Scalar>(
    graph: &TruncatedGraph,
    table: &AmplitudeTable,
    eps: &C,
    u: &C,
) -> Vec<Amplitude<C>> {
    graph.edges().iter().map(|e| table.amplitude(e).evaluate(eps, u)).collect()
}

/// `S_n` as an explicit sum over closed walks from the origin.
pub fn build_s_walks<C: Scalar>(
    params: &ModelParams<C>,
    construction: &Construction,
    exec: Exec,
) -> Result<SparseOp<C>, NessError> {
    check_length(params.n, 1)?;
    let graph = construction.graph_for(params.n)?;
    let amps = evaluated_amplitudes(&graph, &construction.table, &params.eps, &params.u);
    let walks = graph.enumerate_walks(params.n, Node::Origin, Node::Origin)?;
    let parts = par::map_chunks(exec, walks.len(), 256, |range| {
        let mut local: Vec<(PauliString, C)> = Vec::new();
        for walk in &walks[range] {
            let mut product = Amplitude::<C>::identity(1);
            for &e in walk {
                product = product.matmul(&amps[e]);
                if product.is_zero() {
                    break;
                }
            }
            if product.is_zero() {
                continue;
            }
            let labels: Vec<SiteLabel> = walk.iter().map(|&e| graph.label(e)).collect();
            local.push((PauliString::from_labels(&labels), product.entries[0].clone()));
        }
        local
    });
    Ok(SparseOp::from_terms(params.n, parts.into_iter().flatten()))
}

/// `S_n` as `<0| A_{s1,t1} ... A_{sn,tn} |0>` over all label sequences.
pub fn build_s_mpo<C: Scalar>(
    params: &ModelParams<C>,
    construction: &Construction,
) -> Result<SparseOp<C>, NessError> {
    check_length(params.n, 1)?;
    let graph = construction.graph_for(params.n)?;
    let mpo = MpoTensor::build(&graph, &construction.table, &params.eps, &params.u)?;
    let mut start = vec![C::zero(); mpo.dim()];
    start[ORIGIN_INDEX] = C::one();
    let mut frontier: Vec<(Vec<SiteLabel>, Vec<C>)> = vec![(Vec::new(), start)];
    for step in 0..params.n {
        let remaining = (params.n - step - 1) as u32;
        let mut next = Vec::new();
        for (prefix, vector) in &frontier {
            for label in SiteLabel::all() {
                if mpo.matrix(label).is_empty() {
                    continue;
                }
                let mut out = mpo.apply_right(vector, label);
                for (i, v) in out.iter_mut().enumerate() {
                    // Cannot return to the origin from above the remaining budget.
                    if mpo.level(i) > remaining && !v.is_zero() {
                        *v = C::zero();
                    }
                }
                if out.iter().all(Scalar::is_zero) {
                    continue;
                }
                let mut p = prefix.clone();
                p.push(label);
                next.push((p, out));
            }
        }
        frontier = next;
    }
    Ok(SparseOp::from_terms(
        params.n,
        frontier
            .into_iter()
            .map(|(labels, v)| (PauliString::from_labels(&labels), v[ORIGIN_INDEX].clone())),
    ))
}

/// Builds `S_n` both ways and fails unless they agree exactly.
pub fn build_s_checked<C: Scalar>(
    params: &ModelParams<C>,
    construction: &Construction,
    exec: Exec,
) -> Result<SparseOp<C>, NessError> {
    let walks = build_s_walks(params, construction, exec)?;
    let mpo = build_s_mpo(params, construction)?;
    let diff = walks.sub(&mpo)?;
    if !diff.is_zero() {
        return Err(NessError::PathDisagreement(diff.num_terms()));
    }
    Ok(mpo)
}

pub fn build_s<C: Scalar>(
    params: &ModelParams<C>,
    construction: &Construction,
) -> Result<SparseOp<C>, NessError> {
    build_s_mpo(params, construction)
}

/// `rho = S S^dag`.
pub fn build_rho<C: Scalar>(s: &SparseOp<C>, exec: Exec) -> SparseOp<C> {
    s.mul_with(&s.adjoint(), exec).expect("same length")
}

fn check_length(n: usize, min: usize) -> Result<(), NessError> {
    if n < min {
        return Err(NessError::ChainTooShort { n, min });
    }
    Ok(())
}

/// Raising/lowering jump factors without the `sqrt(eps)` prefactor: creation on
/// both chains at the first site, annihilation at the last.
pub fn jump_operators<C: Scalar>(n: usize) -> Vec<SparseOp<C>> {
    vec![
        SparseOp::site_op(n, 0, label(Plus, Zero)),
        SparseOp::site_op(n, 0, label(Zero, Plus)),
        SparseOp::site_op(n, n - 1, label(Minus, Zero)),
        SparseOp::site_op(n, n - 1, label(Zero, Minus)),
    ]
}

/// `-i[H, rho] + eps sum_l (L rho L^dag - {L^dag L, rho}/2)` for a given `H`.
pub fn lindblad_apply_with_hamiltonian<C: Scalar>(
    rho: &SparseOp<C>,
    hamiltonian: &SparseOp<C>,
    eps: &C,
    exec: Exec,
) -> Result<SparseOp<C>, NessError> {
    let n = rho.len_sites();
    let jumps = jump_operators::<C>(n);
    let mut terms: Vec<SparseOp<C>> = Vec::with_capacity(5);
    let minus_i = C::imag_unit().neg_ref();
    terms.push(hamiltonian.commutator_with(rho, exec)?.scale(&minus_i));
    let dissipators = par::map(exec, &jumps, |l| -> Result<SparseOp<C>, NessError> {
        let ld = l.adjoint();
        let sandwich = l.mul(rho)?.mul(&ld)?;
        let ldl = ld.mul(l)?;
        let anti = ldl.anticommutator(rho)?.scale_small(1, 2);
        Ok(sandwich.sub(&anti)?.scale(eps))
    });
    for d in dissipators {
        terms.push(d?);
    }
    let mut out = SparseOp::zero(n);
    for t in terms {
        out = out.add(&t)?;
    }
    Ok(out)
}

pub fn lindblad_apply<C: Scalar>(
    rho: &SparseOp<C>,
    params: &ModelParams<C>,
    exec: Exec,
) -> Result<SparseOp<C>, NessError> {
    lindblad_apply_with_hamiltonian(rho, &hamiltonian(params.n, &params.u), &params.eps, exec)
}

/// Both sides of `[H, S] = c (boundary terms)` and their difference.
#[derive(Debug, Clone)]
pub struct RelationReport<C: Scalar> {
    pub lhs: SparseOp<C>,
    pub rhs: SparseOp<C>,
    pub difference: SparseOp<C>,
}

impl<C: Scalar> RelationReport<C> {
    pub fn holds(&self) -> bool {
        self.difference.is_zero()
    }
}

/// The bracketed boundary combination: `sum_{s in {0,+}} (sz t^s (x) P^{0,s} +
/// s^s tz (x) P^{s,0} - Q^{0,-s} (x) sz t^{-s} - Q^{-s,0} (x) s^{-s} tz)`.
pub fn boundary_terms<C: Scalar>(s: &SparseOp<C>) -> Result<SparseOp<C>, NessError> {
    let n = s.len_sites();
    check_length(n, 2)?;
    let single = |l: SiteLabel| SparseOp::<C>::site_op(1, 0, l);
    let mut out = SparseOp::zero(n);
    for (plus, minus) in [(Zero, Zero), (Plus, Minus)] {
        let p_left = s.hs_project(0, label(Zero, plus))?;
        let p_right = s.hs_project(0, label(plus, Zero))?;
        let q_left = s.hs_project(n - 1, label(Zero, minus))?;
        let q_right = s.hs_project(n - 1, label(minus, Zero))?;
        out = out.add(&single(label(Z, plus)).kron(&p_left))?;
        out = out.add(&single(label(plus, Z)).kron(&p_right))?;
        out = out.sub(&q_left.kron(&single(label(Z, minus))))?;
        out = out.sub(&q_right.kron(&single(label(minus, Z))))?;
    }
    Ok(out)
}

pub fn defining_relation_check<C: Scalar>(
    s: &SparseOp<C>,
    u: &C,
    prefactor: &C,
) -> Result<RelationReport<C>, NessError> {
    let n = s.len_sites();
    let lhs = hamiltonian(n, u).commutator(s)?;
    let rhs = boundary_terms(s)?.scale(prefactor);
    let difference = lhs.sub(&rhs)?;
    Ok(RelationReport { lhs, rhs, difference })
}

/// `sz_1 + tz_1 - sz_n - tz_n`.
pub fn boundary_magnetization<C: Scalar>(n: usize) -> SparseOp<C> {
    let mut op = SparseOp::zero(n);
    let id = PauliString::identity(n);
    op.add_term(id.with(0, label(Z, Zero)), C::one());
    op.add_term(id.with(0, label(Zero, Z)), C::one());
    op.add_term(id.with(n - 1, label(Z, Zero)), C::one().neg_ref());
    op.add_term(id.with(n - 1, label(Zero, Z)), C::one().neg_ref());
    op
}

/// `Z = -i dS/d(eps)` at `eps = 0`, from a symbolic `S`.
pub fn z_operator(s: &SparseOp<PolyEU>) -> SparseOp<PolyEU> {
    let minus_i = PolyEU::i().scale(&GaussianRational::from_ints(-1, 0));
    s.map_coeffs(|c| c.eps_coefficient(1).mul_ref(&minus_i))
}

/// Largest `(eps, u)` degrees over all coefficients.
pub fn max_degrees(s: &SparseOp<PolyEU>) -> (i64, i64) {
    s.iter().fold((-1, -1), |(a, b), (_, c)| {
        let (de, du) = c.degrees();
        (a.max(de), b.max(du))
    })
}

/// Orientation of the triangular structure of dense `S_n` in the computational
/// basis (site 1 most significant, sigma before tau, spin up first).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Triangularity {
    Upper,
    Lower,
    Neither,
}

/// Orientation observed for `S_n` in this ordering.
pub const PINNED_TRIANGULARITY: Triangularity = Triangularity::Upper;

pub fn triangularity<C: Scalar>(s: &SparseOp<C>) -> Result<Triangularity, NessError> {
    let dense = s.to_dense()?;
    Ok(if dense.is_upper_triangular() {
        Triangularity::Upper
    } else if dense.is_lower_triangular() {
        Triangularity::Lower
    } else {
        Triangularity::Neither
    })
}

/// Exact rank of a matrix over the Gaussian rationals.
pub fn exact_rank(mut rows: Vec<Vec<GaussianRational>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !Scalar::is_zero(&rows[r][col])) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = rows[rank][col].inv().expect("nonzero pivot");
        let pivot_row: Vec<GaussianRational> = rows[rank].iter().map(|x| x * &inv).collect();
        for row in rows.iter_mut().skip(rank + 1) {
            let factor = row[col].clone();
            if Scalar::is_zero(&factor) {
                continue;
            }
            for (c, p) in pivot_row.iter().enumerate().skip(col) {
                if !Scalar::is_zero(p) {
                    let sub = &factor * p;
                    row[c] -= &sub;
                }
            }
        }
        rows[rank] = pivot_row;
        rank += 1;
    }
    rank
}

/// Rank of the coefficient matrix of `s` across the cut after `cut` sites.
pub fn schmidt_rank(s: &SparseOp<GaussianRational>, cut: usize) -> usize {
    let n = s.len_sites();
    let mut left: BTreeMap<PauliString, usize> = BTreeMap::new();
    let mut right: BTreeMap<PauliString, usize> = BTreeMap::new();
    for (string, _) in s.iter() {
        let next = left.len();
        left.entry(string.slice(0, cut)).or_insert(next);
        let next = right.len();
        right.entry(string.slice(cut, n)).or_insert(next);
    }
    let mut rows = vec![vec![GaussianRational::default(); right.len()]; left.len()];
    for (string, c) in s.iter() {
        rows[left[&string.slice(0, cut)]][right[&string.slice(cut, n)]] = c.clone();
    }
    exact_rank(rows)
}

/// Ranks across the cuts after sites `1..n-1`.
pub fn schmidt_ranks(s: &SparseOp<GaussianRational>) -> Vec<usize> {
    (1..s.len_sites()).map(|cut| schmidt_rank(s, cut)).collect()
}

/// `[S_n(eps), S_n(eta)] = 0` as a polynomial identity in two independent
/// dissipation strengths at a fixed rational `u`.
pub fn commuting_family_symbolic(
    n: usize,
    u: &GaussianRational,
    construction: &Construction,
) -> Result<bool, NessError> {
    let coupling = PolyEU::constant(u.clone());
    // The second indeterminate slot carries eta; u enters only as a constant.
    let first = build_s(&ModelParams::new(n, PolyEU::eps(), coupling.clone()), construction)?;
    let second = build_s(&ModelParams::new(n, PolyEU::u(), coupling), construction)?;
    Ok(first.commutator(&second)?.is_zero())
}

/// `[S_n(eps_a), S_n(eps_b)] = 0` at one exact parameter point.
pub fn commuting_family_at(
    n: usize,
    eps_a: &GaussianRational,
    eps_b: &GaussianRational,
    u: &GaussianRational,
    construction: &Construction,
) -> Result<bool, NessError> {
    let a = build_s(&ModelParams::new(n, eps_a.clone(), u.clone()), construction)?;
    let b = build_s(&ModelParams::new(n, eps_b.clone(), u.clone()), construction)?;
    Ok(a.commutator(&b)?.is_zero())
}

/// Schmidt rank bound `4 floor(n/2)`.
pub fn schmidt_bound(n: usize) -> usize {
    4 * (n / 2)
}

/// Smallest and largest eigenvalue of a dense Hermitian operator (`n <= 5`).
pub fn hermitian_spectrum_bounds(op: &SparseOp<Complex64>) -> Result<(f64, f64), NessError> {
    let dense = op.to_dense()?;
    let d = dense.dim();
    let m = DMatrix::from_fn(d, d, |i, j| *dense.get(i, j));
    let eig = m.symmetric_eigen();
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((min, max))
}

/// Coefficient-wise conversion of an exact operator to floats.
pub fn to_float(op: &SparseOp<GaussianRational>) -> SparseOp<Complex64> {
    op.map_coeffs(GaussianRational::to_complex)
}

/// `||a||_F / ||b||_F`.
pub fn relative_norm<C: Scalar>(a: &SparseOp<C>, b: &SparseOp<C>) -> f64 {
    (a.frobenius_sqr_f64() / b.frobenius_sqr_f64()).sqrt()
}

/// Groups coefficients by string for quick comparison in reports.
pub fn term_map<C: Scalar>(op: &SparseOp<C>) -> HashMap<String, C> {
    op.iter().map(|(s, c)| (s.to_string(), c.clone())).collect()
}
