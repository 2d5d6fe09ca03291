//! Edge amplitudes as exact polynomials in `eps` and `u`, and the sixteen MPO
//! matrices assembled from them.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::NessError;
use crate::exact::{GaussianRational, PolyEU, Scalar};
use crate::graph::{Edge, Family, TruncatedGraph};
use crate::pauli::SiteLabel;

/// Sign convention for the imaginary unit in the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// Entries exactly as printed.
    Verbatim,
    /// Every entry complex-conjugated (`i -> -i`). This is the variant whose
    /// `S S^dag` is annihilated by the Liouvillian with the printed generator.
    Conjugated,
}

impl Convention {
    /// Prefactor `c` in `[H, S] = c * (boundary terms)` for walking-graph states
    /// built with this convention.
    pub fn relation_prefactor(self) -> PolyEU {
        let half = GaussianRational::frac(1, 2);
        let i_half = &GaussianRational::i() * &half;
        match self {
            Convention::Verbatim => PolyEU::monomial(i_half, 1, 0),
            Convention::Conjugated => PolyEU::monomial(-i_half, 1, 0),
        }
    }
}

/// Dense `rows x cols` matrix mapping the target node space into the source node
/// space. Row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Amplitude<C> {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<C>,
}

impl<C: Scalar> Amplitude<C> {
    pub fn get(&self, row: usize, col: usize) -> &C {
        &self.entries[row * self.cols + col]
    }

    pub fn map<D: Scalar>(&self, f: impl Fn(&C) -> D) -> Amplitude<D> {
        Amplitude { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(f).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Scalar::is_zero)
    }

    pub fn matmul(&self, rhs: &Amplitude<C>) -> Amplitude<C> {
        assert_eq!(self.cols, rhs.rows, "amplitude shapes do not compose");
        let mut entries = vec![C::zero(); self.rows * rhs.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    entries[i * rhs.cols + j].add_assign_ref(&a.mul_ref(rhs.get(k, j)));
                }
            }
        }
        Amplitude { rows: self.rows, cols: rhs.cols, entries }
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![C::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = C::one();
        }
        Amplitude { rows: dim, cols: dim, entries }
    }
}

impl Amplitude<PolyEU> {
    pub fn evaluate<C: Scalar>(&self, eps: &C, u: &C) -> Amplitude<C> {
        self.map(|p| p.evaluate_in(eps, u))
    }
}

fn parity(k: u32) -> i64 {
    if k.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

struct Signs {
    s: i64,
    f1: i64,
    f2: i64,
}

impl Signs {
    fn at(k: u32) -> Self {
        Self { s: parity(k), f1: parity(k.div_ceil(2)), f2: parity(k / 2) }
    }
}

fn g(re: i64, im: i64) -> GaussianRational {
    GaussianRational::from_ints(re, im)
}

/// `c * eps^de * u^du` with integer Gaussian coefficient `re + i im`.
fn mono(re: i64, im: i64, de: u32, du: u32) -> PolyEU {
    PolyEU::monomial(g(re, im), de, du)
}

fn quarter(p: PolyEU) -> PolyEU {
    p.scale(&GaussianRational::frac(1, 4))
}

/// Printed formula for `edge`, with polynomial parts evaluated at level `k` and
/// sign factors taken at level `sign_level`.
fn printed(edge: &Edge, k: u32, sign_level: u32) -> Amplitude<PolyEU> {
    let Signs { s, f1, f2 } = Signs::at(sign_level);
    let kk = k as i64;
    let zero = PolyEU::default;
    let scalar = |p: PolyEU| Amplitude { rows: 1, cols: 1, entries: vec![p] };
    let row = |a: PolyEU, b: PolyEU| Amplitude { rows: 1, cols: 2, entries: vec![a, b] };
    let col = |a: PolyEU, b: PolyEU| Amplitude { rows: 2, cols: 1, entries: vec![a, b] };
    let square = |a, b, c, d| Amplitude { rows: 2, cols: 2, entries: vec![a, b, c, d] };
    match edge.family() {
        Family::OriginLoop => scalar(if edge.mu > 0 { PolyEU::int(1) } else { zero() }),
        Family::OriginToDiagonal => row(mono(0, 2, 1, 0), zero()),
        // (1/2)(i eps - u, -2)
        Family::DiagonalToOrigin => col(
            (mono(0, 1, 1, 0) - PolyEU::u()).scale(&GaussianRational::frac(1, 2)),
            PolyEU::int(-1),
        ),
        Family::OriginToSide => scalar(PolyEU::eps()),
        Family::SideToOrigin => scalar(PolyEU::i().scale(&g(-1, 0))),
        Family::DiagonalToOuterSide => col(PolyEU::eps(), zero()),
        // (1/4)(-s (i eps - k u) eps, 2 f1 eps)
        Family::DiagonalToInnerSide => col(
            quarter(mono(0, -s, 2, 0) + mono(s * kk, 0, 1, 1)),
            quarter(mono(2 * f1, 0, 1, 0)),
        ),
        Family::SideLoop => scalar(mono(0, s, 1, 0).scale(&GaussianRational::frac(1, 2))),
        Family::InnerSideToDiagonal => row(PolyEU::eps(), zero()),
        // (1/4)(-s (4i - k eps u), 2 f1 eps)
        Family::OuterSideToDiagonal => row(
            quarter(mono(0, -4 * s, 0, 0) + mono(s * kk, 0, 1, 1)),
            quarter(mono(2 * f1, 0, 1, 0)),
        ),
        Family::Skew => scalar(mono(0, -1, 1, 0)),
        Family::DiagonalUp => square(mono(0, 2 * s, 1, 0), zero(), zero(), zero()),
        Family::DiagonalDown => {
            // eps + i (k+1) u
            let shifted = PolyEU::eps() + mono(0, kk + 1, 0, 1);
            // s (2i - (1/2) k eps u)
            let left = (mono(0, 2 * s, 0, 0) + mono(-s * kk, 0, 1, 1).scale(&GaussianRational::frac(1, 2)))
                .mul_ref(&shifted);
            let right = shifted.mul_ref(&mono(-f1, 0, 1, 0));
            let lower_left = mono(0, -f2 * kk, 1, 1) + PolyEU::int(-4 * f2);
            let lower_right = mono(0, -2, 1, 0);
            square(quarter(left), quarter(right), quarter(lower_left), quarter(lower_right))
        }
        Family::DiagonalLoop => {
            if edge.mu as i64 == s {
                // (1/4)[[s (i k eps u + 4), 2 i f1 eps], [0, 0]]
                square(
                    quarter(mono(0, s * kk, 1, 1) + PolyEU::int(4 * s)),
                    quarter(mono(0, 2 * f1, 1, 0)),
                    zero(),
                    zero(),
                )
            } else {
                // (1/4)[[s (eps + i k u) eps, 0], [2 i f1 eps, 0]]
                square(
                    quarter(mono(s, 0, 2, 0) + mono(0, s * kk, 1, 1)),
                    zero(),
                    quarter(mono(0, 2 * f1, 1, 0)),
                    zero(),
                )
            }
        }
    }
}

/// The amplitude table in a chosen convention, optionally with one family's
/// sign flipped (used to check that the verification is not vacuous).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AmplitudeTable {
    pub convention: Convention,
    pub flipped: Option<Family>,
}

impl Default for AmplitudeTable {
    fn default() -> Self {
        Self { convention: Convention::Conjugated, flipped: None }
    }
}

impl AmplitudeTable {
    pub fn verbatim() -> Self {
        Self { convention: Convention::Verbatim, flipped: None }
    }

    pub fn with_flipped(mut self, family: Family) -> Self {
        self.flipped = Some(family);
        self
    }

    pub fn amplitude(&self, edge: &Edge) -> Amplitude<PolyEU> {
        let k = edge.family_level();
        let mut amp = printed(edge, k, k);
        if self.convention == Convention::Conjugated {
            amp = amp.map(PolyEU::conjugate);
        }
        if self.flipped == Some(edge.family()) {
            amp = amp.map(|p| -p.clone());
        }
        amp
    }

    pub fn relation_prefactor(&self) -> PolyEU {
        self.convention.relation_prefactor()
    }

    /// Every entry of the table for levels `1..=max_level`, in family order.
    pub fn audit(&self, max_level: u32) -> Vec<AuditEntry> {
        let mut out = Vec::new();
        for family in Family::ALL {
            let levels: Vec<u32> = if family.has_level() { (1..=max_level).collect() } else { vec![0] };
            for k in levels {
                for edge in family.edges_at(k.max(1)) {
                    let amp = self.amplitude(&edge);
                    out.push(AuditEntry {
                        family,
                        edge: edge.to_string(),
                        k,
                        rows: amp.rows,
                        cols: amp.cols,
                        entries: amp.entries,
                    });
                }
            }
        }
        out
    }

    /// SHA-256 of the canonical audit dump up to level 8.
    pub fn content_hash(&self) -> String {
        let dump = serde_json::to_string(&self.audit(8)).expect("audit serializes");
        hex::encode(Sha256::digest(dump.as_bytes()))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditEntry {
    pub family: Family,
    pub edge: String,
    pub k: u32,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<PolyEU>,
}

/// Outcome of [`validate_table`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TableReport {
    pub edges_checked: usize,
    pub issues: Vec<String>,
}

impl TableReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks shapes against node dimensions, degree bounds, and period-4 sign
/// structure for every edge of `graph`.
pub fn validate_table(graph: &TruncatedGraph, table: &AmplitudeTable) -> TableReport {
    let mut report = TableReport::default();
    for edge in graph.edges() {
        report.edges_checked += 1;
        let amp = table.amplitude(edge);
        let want = (edge.from.dim(), edge.to.dim());
        if (amp.rows, amp.cols) != want {
            report.issues.push(format!("{edge}: shape {:?}, expected {want:?}", (amp.rows, amp.cols)));
        }
        let (max_e, max_u) = if edge.family() == Family::DiagonalDown { (2, 2) } else { (2, 1) };
        for p in &amp.entries {
            let (de, du) = p.degrees();
            if de > max_e || du > max_u {
                report.issues.push(format!("{edge}: entry {p} exceeds degree ({max_e}, {max_u})"));
            }
        }
        let k = edge.family_level();
        if k >= 1 && printed(edge, k + 4, k + 4) != printed(edge, k + 4, k) {
            report.issues.push(format!("{edge}: sign factors not periodic with period 4"));
        }
    }
    report
}

/// The sixteen auxiliary-space matrices `A_{s,t}` on a truncated graph, stored
/// sparsely as `(row, col, value)` triples. Index 0 is the origin.
#[derive(Debug, Clone)]
pub struct MpoTensor<C> {
    dim: usize,
    levels: Vec<u32>,
    matrices: Vec<Vec<(usize, usize, C)>>,
}

impl<C: Scalar> MpoTensor<C> {
    pub fn build(
        graph: &TruncatedGraph,
        table: &AmplitudeTable,
        eps: &C,
        u: &C,
    ) -> Result<Self, NessError> {
        let (offsets, dim) = graph.aux_layout();
        let mut levels = vec![0; dim];
        for (node, &off) in graph.nodes().iter().zip(&offsets) {
            for d in 0..node.dim() {
                levels[off + d] = node.level();
            }
        }
        let mut dense: Vec<std::collections::BTreeMap<(usize, usize), C>> =
            vec![Default::default(); 16];
        for (idx, edge) in graph.edges().iter().enumerate() {
            let amp = table.amplitude(edge);
            let want = (edge.from.dim(), edge.to.dim());
            if (amp.rows, amp.cols) != want {
                return Err(NessError::Shape { edge: edge.to_string(), got: (amp.rows, amp.cols), want });
            }
            let amp = amp.evaluate(eps, u);
            let row0 = offsets[graph.node_index(edge.from)?];
            let col0 = offsets[graph.node_index(edge.to)?];
            let slot = &mut dense[graph.label(idx).code() as usize];
            for r in 0..amp.rows {
                for c in 0..amp.cols {
                    let v = amp.get(r, c);
                    if !v.is_zero() {
                        slot.entry((row0 + r, col0 + c)).or_insert_with(C::zero).add_assign_ref(v);
                    }
                }
            }
        }
        let matrices = dense
            .into_iter()
            .map(|m| m.into_iter().filter(|(_, v)| !v.is_zero()).map(|((r, c), v)| (r, c, v)).collect())
            .collect();
        Ok(Self { dim, levels, matrices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Level of an auxiliary basis index.
    pub fn level(&self, index: usize) -> u32 {
        self.levels[index]
    }

    pub fn matrix(&self, label: SiteLabel) -> &[(usize, usize, C)] {
        &self.matrices[label.code() as usize]
    }

    /// True when every nonzero entry couples levels differing by at most one.
    pub fn is_block_tridiagonal(&self) -> bool {
        self.matrices
            .iter()
            .flatten()
            .all(|(r, c, _)| self.levels[*r].abs_diff(self.levels[*c]) <= 1)
    }

    /// Row vector times `A_label`.
    pub fn apply_right(&self, vector: &[C], label: SiteLabel) -> Vec<C> {
        let mut out = vec![C::zero(); self.dim];
        for (r, c, v) in self.matrix(label) {
            if !vector[*r].is_zero() {
                out[*c].add_assign_ref(&vector[*r].mul_ref(v));
            }
        }
        out
    }
}

/// Index of the origin in the auxiliary space.
pub const ORIGIN_INDEX: usize = 0;


#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, Coloring};
    use crate::pauli::PauliIndex;

    fn verbatim(edge: &str) -> Amplitude<PolyEU> {
        AmplitudeTable::verbatim().amplitude(&edge.parse().unwrap())
    }

    fn at(p: &PolyEU, eps: i64, u: i64) -> GaussianRational {
        p.evaluate(&g(eps, 0), &g(u, 0))
    }

    #[test]
    fn origin_entries() {
        assert_eq!(verbatim("0>0#+1").entries, vec![PolyEU::int(1)]);
        assert!(verbatim("0>0#-1").is_zero());
        let a = verbatim("0>D1");
        assert_eq!((a.rows, a.cols), (1, 2));
        assert_eq!(a.entries[0], mono(0, 2, 1, 0));
        assert!(a.entries[1].is_zero());
        assert_eq!(verbatim("U1>0").entries, vec![mono(0, -1, 0, 0)]);
    }

    #[test]
    fn side_entries() {
        assert_eq!(verbatim("U1>U1").entries[0], mono(0, -1, 1, 0).scale(&GaussianRational::frac(1, 2)));
        for k in 1..6 {
            assert_eq!(verbatim(&format!("U{k}>L{k}")).entries[0], mono(0, -1, 1, 0));
        }
        let a = verbatim("D2>U3");
        assert_eq!((a.rows, a.cols), (2, 1));
    }

    #[test]
    fn diagonal_down_degree() {
        let a = verbatim("D3>D2");
        assert_eq!(a.entries[0].degrees(), (2, 2));
        // (1/4) s (2i - k eps u / 2)(eps + i (k+1) u) at k=2, eps=1, u=1: (1/4)(2i - 1)(1 + 3i) = (-7 - i)/4
        assert_eq!(
            at(&a.entries[0], 1, 1),
            GaussianRational::new(crate::exact::rat(-7, 4), crate::exact::rat(-1, 4))
        );
    }

    #[test]
    fn diagonal_loops_follow_parity() {
        // k = 1: mu = -1 carries the (i k eps u + 4) entry with s = -1
        let a = verbatim("D1>D1#-1");
        assert_eq!(at(&a.entries[0], 0, 0), g(-1, 0));
        let b = verbatim("D2>D2#+1");
        assert_eq!(at(&b.entries[0], 0, 0), g(1, 0));
    }

    #[test]
    fn level_zero_specialisations_match_origin() {
        let first = |a: &Amplitude<PolyEU>| a.entries[0].clone();
        let at_zero = |edge: &str| printed(&edge.parse().unwrap(), 0, 0);
        assert_eq!(first(&at_zero("D1>U2")), first(&verbatim("0>U1")));
        assert_eq!(first(&at_zero("U2>D1")), first(&verbatim("U1>0")));
        assert_eq!(at_zero("D1>D2").entries[..2], verbatim("0>D1").entries[..]);
        let down = at_zero("D2>D1");
        assert_eq!([down.entries[0].clone(), down.entries[2].clone()], verbatim("D1>0").entries[..]);
    }

    #[test]
    fn table_validates() {
        let graph = build_graph(9, Coloring::alternating()).unwrap();
        for table in [AmplitudeTable::default(), AmplitudeTable::verbatim()] {
            let report = validate_table(&graph, &table);
            assert!(report.is_ok(), "{:?}", report.issues);
        }
    }

    #[test]
    fn mpo_structure() {
        let graph = build_graph(4, Coloring::alternating()).unwrap();
        let mpo = MpoTensor::<PolyEU>::build(&graph, &AmplitudeTable::default(), &PolyEU::eps(), &PolyEU::u()).unwrap();
        assert_eq!(mpo.dim(), 17);
        use PauliIndex::*;
        assert!(mpo.matrix(SiteLabel::new(Z, Zero)).is_empty());
        assert!(mpo.matrix(SiteLabel::new(Zero, Z)).is_empty());
        assert!(mpo.is_block_tridiagonal());
        let pp = mpo.matrix(SiteLabel::new(Plus, Plus));
        assert!(pp.contains(&(0, 3, mono(0, -2, 1, 0))));
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = AmplitudeTable::default();
        assert_eq!(a.content_hash(), a.content_hash());
        assert_ne!(a.content_hash(), a.with_flipped(Family::DiagonalUp).content_hash());
        assert_ne!(a.content_hash(), AmplitudeTable::verbatim().content_hash());
    }
}
