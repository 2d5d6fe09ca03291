//! Local cancellation conditions: commutators of the Hamiltonian density with
//! products of edge labels, bulk three-walk conditions and boundary two-walk
//! conditions, checked symbolically in `eps` and `u`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::Instant;

use serde::Serialize;

use crate::amplitudes::{Amplitude, AmplitudeTable};
use crate::error::{GraphError, NessError};
use crate::exact::{GaussianRational, PolyEU, Scalar};
use crate::graph::{build_graph, Coloring, Edge, Node, TruncatedGraph};
use crate::ness::{build_rho, build_s, hamiltonian, lindblad_apply, Construction, ModelParams};
use crate::par::{self, Exec};
use crate::pauli::{PauliIndex, PauliString, SiteLabel, SparseOp};

use PauliIndex::{Minus, Plus, Zero, Z};

/// Coordinate displacement of a site label.
pub fn displacement(label: SiteLabel) -> (i64, i64) {
    let (a, b) = label.displacement();
    (a as i64, b as i64)
}

/// `P(s^s t^t) = delta_{s,0} sz t^t + delta_{t,0} s^s tz`, as a one-site operator.
pub fn boundary_map(label: SiteLabel) -> Vec<SiteLabel> {
    let mut out = Vec::new();
    if label.sigma == Zero {
        out.push(SiteLabel::new(Z, label.tau));
    }
    if label.tau == Zero {
        out.push(SiteLabel::new(label.sigma, Z));
    }
    out
}

/// Hubbard density on two sites with separate on-site weights.
pub fn two_site_density(u_left: &PolyEU, u_right: &PolyEU) -> SparseOp<PolyEU> {
    let l = SiteLabel::new;
    let mut h = SparseOp::zero(2);
    for (a, b) in [
        (l(Plus, Zero), l(Minus, Zero)),
        (l(Minus, Zero), l(Plus, Zero)),
        (l(Zero, Plus), l(Zero, Minus)),
        (l(Zero, Minus), l(Zero, Plus)),
    ] {
        h.add_term(PauliString::from_labels(&[a, b]), PolyEU::one());
    }
    h.add_term(PauliString::from_labels(&[l(Z, Z), SiteLabel::IDENTITY]), u_left.clone());
    h.add_term(PauliString::from_labels(&[SiteLabel::IDENTITY, l(Z, Z)]), u_right.clone());
    h
}

/// One term of `[h, w(e) (x) w(f)]`, with the edges that make one factor a
/// valid graph label.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectTerm {
    pub labels: (SiteLabel, SiteLabel),
    pub coeff: PolyEU,
    /// `e'` with `p(e') = p(e)` and `w(e')` equal to the first factor.
    pub left_anchor: Option<Edge>,
    /// `f'` with `q(f') = q(f)` and `w(f')` equal to the second factor.
    pub right_anchor: Option<Edge>,
}

fn edge_with_label<'g>(
    graph: &'g TruncatedGraph,
    candidates: impl Iterator<Item = usize> + 'g,
    label: SiteLabel,
    endpoint: impl Fn(&Edge) -> bool + 'g,
) -> Option<Edge> {
    candidates
        .filter(|&i| graph.label(i) == label && endpoint(&graph.edges()[i]))
        .map(|i| graph.edges()[i])
        .next()
}

/// Expands `[h, w(e) (x) w(f)]` and anchors each term on the left or right.
pub fn defect_decompose(
    graph: &TruncatedGraph,
    e: usize,
    f: usize,
    u_left: &PolyEU,
    u_right: &PolyEU,
) -> Result<Vec<DefectTerm>, String> {
    let (ee, fe) = (graph.edges()[e], graph.edges()[f]);
    if ee.to != fe.from {
        return Err(format!("{ee} and {fe} do not form a walk"));
    }
    let pair = SparseOp::single(
        PauliString::from_labels(&[graph.label(e), graph.label(f)]),
        PolyEU::one(),
    );
    let comm = two_site_density(u_left, u_right).commutator(&pair).expect("two sites");
    let mut out = Vec::new();
    for (string, coeff) in comm.iter() {
        let (a, b) = (string.get(0), string.get(1));
        let left_anchor = edge_with_label(graph, graph.edges_from(ee.from), a, |_| true);
        let right_anchor = edge_with_label(graph, graph.edges_into(fe.to), b, |_| true);
        if left_anchor.is_none() && right_anchor.is_none() {
            return Err(format!("[h, {ee} {fe}] term {string} has no anchor"));
        }
        out.push(DefectTerm { labels: (a, b), coeff: coeff.clone(), left_anchor, right_anchor });
    }
    Ok(out)
}

/// Summary of the defect classification over all two-walks of a graph.
#[derive(Debug, Clone, Default, Serialize)]
pub struct DefectReport {
    pub two_walks: usize,
    pub terms: usize,
    pub left_anchored: usize,
    pub right_anchored: usize,
    /// Terms whose defect factor is itself the label of a completing edge.
    pub label_collisions: Vec<String>,
    /// Terms with neither factor a valid label.
    pub unanchored: Vec<String>,
    /// Terms where no edge at all joins the two nodes around the defect.
    pub missing_links: usize,
}

impl DefectReport {
    pub fn is_ok(&self) -> bool {
        self.label_collisions.is_empty() && self.unanchored.is_empty()
    }
}

/// Checks that commutator defects never coincide with a completing edge label,
/// over all two-walks away from the origin. The two on-site weights are taken
/// as independent indeterminates.
pub fn verify_defect_property(graph: &TruncatedGraph) -> DefectReport {
    let (u_left, u_right) = (PolyEU::eps(), PolyEU::u());
    let top = graph.max_level();
    let mut report = DefectReport::default();
    for (e, edge) in graph.edges().iter().enumerate() {
        if edge.from == Node::Origin || edge.to == Node::Origin || edge.to.level() >= top {
            continue;
        }
        for f in graph.edges_from(edge.to) {
            let fe = graph.edges()[f];
            if fe.to == Node::Origin || fe.to.level() >= top {
                continue;
            }
            report.two_walks += 1;
            let terms = match defect_decompose(graph, e, f, &u_left, &u_right) {
                Ok(t) => t,
                Err(msg) => {
                    report.unanchored.push(msg);
                    continue;
                }
            };
            for term in terms {
                report.terms += 1;
                let (a, b) = term.labels;
                if let Some(ep) = term.left_anchor {
                    report.left_anchored += 1;
                    let links: Vec<usize> = graph.edges_from(ep.to).filter(|&i| graph.edges()[i].to == fe.to).collect();
                    if links.is_empty() {
                        report.missing_links += 1;
                    }
                    if links.iter().any(|&i| graph.label(i) == b) {
                        report.label_collisions.push(format!("[h, {edge} {fe}] -> {a} {b} via {ep}"));
                    }
                }
                if let Some(fp) = term.right_anchor {
                    report.right_anchored += 1;
                    let links: Vec<usize> = graph.edges_into(fp.from).filter(|&i| graph.edges()[i].from == edge.from).collect();
                    if links.is_empty() {
                        report.missing_links += 1;
                    }
                    if links.iter().any(|&i| graph.label(i) == a) {
                        report.label_collisions.push(format!("[h, {edge} {fe}] -> {a} {b} via {fp}"));
                    }
                }
            }
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionKind {
    Bulk,
    LeftBoundary,
    RightBoundary,
}

pub const LEFT_DEFECTS: [SiteLabel; 4] = [
    SiteLabel::new(Zero, Z),
    SiteLabel::new(Z, Zero),
    SiteLabel::new(Plus, Z),
    SiteLabel::new(Z, Plus),
];

pub const RIGHT_DEFECTS: [SiteLabel; 4] = [
    SiteLabel::new(Zero, Z),
    SiteLabel::new(Z, Zero),
    SiteLabel::new(Minus, Z),
    SiteLabel::new(Z, Minus),
];

/// A condition that failed to vanish.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ConditionKind,
    pub from: String,
    pub to: String,
    pub anchors: Vec<String>,
    pub defect: String,
    pub trivial: bool,
    pub value: Vec<PolyEU>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub kmax: u32,
    pub conditions_total: u64,
    pub trivial: u64,
    pub nontrivial_zero: u64,
    pub violations: Vec<Violation>,
    pub amplitude_hash: String,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Default)]
struct Tally {
    total: u64,
    trivial: u64,
    nontrivial_zero: u64,
    violations: Vec<Violation>,
}

impl Tally {
    fn record(&mut self, trivial: bool, value: Option<&Amplitude<PolyEU>>, violation: impl FnOnce() -> Violation) {
        self.total += 1;
        let zero = value.is_none_or(Amplitude::is_zero);
        if zero && trivial {
            self.trivial += 1;
        } else if zero {
            self.nontrivial_zero += 1;
        } else {
            self.violations.push(violation());
        }
    }

    fn merge(&mut self, other: Tally) {
        self.total += other.total;
        self.trivial += other.trivial;
        self.nontrivial_zero += other.nontrivial_zero;
        self.violations.extend(other.violations);
    }
}

fn add_scaled(acc: &mut Amplitude<PolyEU>, matrix: &Amplitude<PolyEU>, c: &PolyEU) {
    for (a, m) in acc.entries.iter_mut().zip(&matrix.entries) {
        if !m.is_zero() {
            a.add_assign_ref(&m.mul_ref(c));
        }
    }
}

fn zero_matrix(rows: usize, cols: usize) -> Amplitude<PolyEU> {
    Amplitude { rows, cols, entries: vec![PolyEU::default(); rows * cols] }
}

/// Evaluates all local conditions for one coloring and amplitude table.
pub struct ProofContext {
    graph: TruncatedGraph,
    table: AmplitudeTable,
    kmax: u32,
    amplitudes: Vec<Amplitude<PolyEU>>,
    h3: SparseOp<PolyEU>,
    h2: SparseOp<PolyEU>,
}

impl ProofContext {
    pub fn new(kmax: u32, coloring: Coloring, table: AmplitudeTable) -> Result<Self, GraphError> {
        let graph = build_graph(kmax + 2, coloring)?;
        let amplitudes = graph.edges().iter().map(|e| table.amplitude(e)).collect();
        Ok(Self {
            graph,
            table,
            kmax,
            amplitudes,
            h3: hamiltonian(3, &PolyEU::u()),
            h2: hamiltonian(2, &PolyEU::u()),
        })
    }

    pub fn graph(&self) -> &TruncatedGraph {
        &self.graph
    }

    fn commutator(&self, h: &SparseOp<PolyEU>, labels: &[SiteLabel]) -> SparseOp<PolyEU> {
        let op = SparseOp::single(PauliString::from_labels(labels), PolyEU::one());
        h.commutator(&op).expect("matching lengths")
    }

    /// All bulk conditions starting at node `v`.
    fn bulk_from(&self, v: Node, cache: &mut HashMap<PauliString, SparseOp<PolyEU>>) -> Tally {
        let g = &self.graph;
        let mut per_target: BTreeMap<Node, HashMap<PauliString, Amplitude<PolyEU>>> = BTreeMap::new();
        for e in g.edges_from(v) {
            let ae = &self.amplitudes[e];
            for f in g.edges_from(g.edges()[e].to) {
                let aef = ae.matmul(&self.amplitudes[f]);
                for h in g.edges_from(g.edges()[f].to) {
                    let r = g.edges()[h].to;
                    if r.level() > self.kmax {
                        continue;
                    }
                    let product = aef.matmul(&self.amplitudes[h]);
                    if product.is_zero() {
                        continue;
                    }
                    let labels = [g.label(e), g.label(f), g.label(h)];
                    let key = PauliString::from_labels(&labels);
                    let comm = cache.entry(key).or_insert_with(|| self.commutator(&self.h3, &labels));
                    let acc = per_target.entry(r).or_default();
                    for (string, c) in comm.iter() {
                        let slot = acc
                            .entry(*string)
                            .or_insert_with(|| zero_matrix(product.rows, product.cols));
                        add_scaled(slot, &product, c);
                    }
                }
            }
        }
        let mut tally = Tally::default();
        for r in g.nodes().iter().copied().filter(|r| r.level() <= self.kmax) {
            if !self.has_three_walk(v, r) {
                continue;
            }
            let acc = per_target.remove(&r).unwrap_or_default();
            for ep in g.edges_from(v) {
                let mid_from = g.edges()[ep].to;
                for gp in g.edges_into(r) {
                    let mid_to = g.edges()[gp].from;
                    let valid: BTreeSet<SiteLabel> = g
                        .edges_from(mid_from)
                        .filter(|&i| g.edges()[i].to == mid_to)
                        .map(|i| g.label(i))
                        .collect();
                    for x in SiteLabel::all() {
                        let string = PauliString::from_labels(&[g.label(ep), x, g.label(gp)]);
                        let value = acc.get(&string);
                        tally.record(valid.contains(&x), value, || Violation {
                            kind: ConditionKind::Bulk,
                            from: v.to_string(),
                            to: r.to_string(),
                            anchors: vec![g.edges()[ep].to_string(), g.edges()[gp].to_string()],
                            defect: x.to_string(),
                            trivial: valid.contains(&x),
                            value: value.map(|m| m.entries.clone()).unwrap_or_default(),
                        });
                    }
                }
            }
        }
        tally
    }

    fn has_three_walk(&self, v: Node, r: Node) -> bool {
        let g = &self.graph;
        g.edges_from(v).any(|e| {
            g.edges_from(g.edges()[e].to)
                .any(|f| g.edges_from(g.edges()[f].to).any(|h| g.edges()[h].to == r))
        })
    }

    /// Boundary conditions at the left (walks from the origin) or right end.
    fn boundary_sums(
        &self,
        kind: ConditionKind,
        with_source: bool,
    ) -> BTreeMap<Node, HashMap<PauliString, Amplitude<PolyEU>>> {
        let g = &self.graph;
        let kappa = self.table.relation_prefactor();
        let left = kind == ConditionKind::LeftBoundary;
        let mut per_node: BTreeMap<Node, HashMap<PauliString, Amplitude<PolyEU>>> = BTreeMap::new();
        let walks: Vec<(usize, usize)> = if left {
            g.edges_from(Node::Origin)
                .flat_map(|e| g.edges_from(g.edges()[e].to).map(move |f| (e, f)))
                .collect()
        } else {
            g.edges_into(Node::Origin)
                .flat_map(|f| g.edges_into(g.edges()[f].from).map(move |e| (e, f)))
                .collect()
        };
        for (e, f) in walks {
            let product = self.amplitudes[e].matmul(&self.amplitudes[f]);
            if product.is_zero() {
                continue;
            }
            let (le, lf) = (g.label(e), g.label(f));
            let mut op = self.commutator(&self.h2, &[le, lf]);
            if with_source && left {
                for p in boundary_map(le) {
                    op.add_term(PauliString::from_labels(&[p, lf]), kappa.neg_ref());
                }
            } else if with_source {
                for p in boundary_map(lf) {
                    op.add_term(PauliString::from_labels(&[le, p]), kappa.clone());
                }
            }
            let node = if left { g.edges()[f].to } else { g.edges()[e].from };
            let acc = per_node.entry(node).or_default();
            for (string, c) in op.iter() {
                let slot = acc.entry(*string).or_insert_with(|| zero_matrix(product.rows, product.cols));
                add_scaled(slot, &product, c);
            }
        }
        per_node
    }

    /// Boundary conditions at the left (walks from the origin) or right end.
    fn boundary(&self, kind: ConditionKind) -> Tally {
        let g = &self.graph;
        let left = kind == ConditionKind::LeftBoundary;
        let per_node = self.boundary_sums(kind, true);
        let mut tally = Tally::default();
        for (node, acc) in per_node {
            let anchors: Vec<usize> =
                if left { g.edges_into(node).collect() } else { g.edges_from(node).collect() };
            let defects = if left { LEFT_DEFECTS } else { RIGHT_DEFECTS };
            for anchor in anchors {
                for x in defects {
                    let labels = if left { [x, g.label(anchor)] } else { [g.label(anchor), x] };
                    let value = acc.get(&PauliString::from_labels(&labels));
                    tally.record(false, value, || Violation {
                        kind,
                        from: if left { Node::Origin.to_string() } else { node.to_string() },
                        to: if left { node.to_string() } else { Node::Origin.to_string() },
                        anchors: vec![g.edges()[anchor].to_string()],
                        defect: x.to_string(),
                        trivial: false,
                        value: value.map(|m| m.entries.clone()).unwrap_or_default(),
                    });
                }
            }
        }
        tally
    }

    /// Labels at the open end of the amplitude-weighted two-walk commutator
    /// sums that are not labels of any origin edge.
    pub fn boundary_defect_labels(&self, kind: ConditionKind) -> BTreeSet<SiteLabel> {
        let g = &self.graph;
        let left = kind == ConditionKind::LeftBoundary;
        let valid: BTreeSet<SiteLabel> = if left {
            g.edges_from(Node::Origin).map(|i| g.label(i)).collect()
        } else {
            g.edges_into(Node::Origin).map(|i| g.label(i)).collect()
        };
        let mut out = BTreeSet::new();
        for acc in self.boundary_sums(kind, false).values() {
            for (string, value) in acc {
                let x = if left { string.get(0) } else { string.get(1) };
                if !value.is_zero() && !valid.contains(&x) {
                    out.insert(x);
                }
            }
        }
        out
    }

    pub fn run(&self, exec: Exec) -> Certificate {
        let sources: Vec<Node> =
            self.graph.nodes().iter().copied().filter(|v| v.level() <= self.kmax).collect();
        let tallies = par::map(exec, &sources, |&v| {
            let mut cache = HashMap::new();
            self.bulk_from(v, &mut cache)
        });
        let mut total = Tally::default();
        for t in tallies {
            total.merge(t);
        }
        total.merge(self.boundary(ConditionKind::LeftBoundary));
        total.merge(self.boundary(ConditionKind::RightBoundary));
        Certificate {
            kmax: self.kmax,
            conditions_total: total.total,
            trivial: total.trivial,
            nontrivial_zero: total.nontrivial_zero,
            violations: total.violations,
            amplitude_hash: self.table.content_hash(),
        }
    }
}

/// Runs every bulk and boundary condition up to level `kmax`. Wall time is
/// returned separately so the certificate itself stays deterministic.
pub fn run_proof(
    kmax: u32,
    coloring: Coloring,
    table: AmplitudeTable,
    exec: Exec,
) -> Result<(Certificate, std::time::Duration), NessError> {
    let start = Instant::now();
    let ctx = ProofContext::new(kmax, coloring, table)?;
    let cert = ctx.run(exec);
    Ok((cert, start.elapsed()))
}

/// Outcome of screening every per-level coloring of the bicolored nodes.
#[derive(Debug, Clone, Serialize)]
pub struct ColoringResolution {
    pub kmax: u32,
    pub candidates: usize,
    pub fixed_point_survivors: usize,
    pub survivors: Vec<Coloring>,
    /// Whether all survivors yield the same `S_n` for `n <= 4`.
    pub survivors_agree: bool,
}

impl ColoringResolution {
    pub fn unique(&self) -> Option<Coloring> {
        match self.survivors.as_slice() {
            [only] => Some(*only),
            [first, ..] if self.survivors_agree => Some(*first),
            _ => None,
        }
    }
}

fn is_fixed_point(construction: &Construction, n: usize) -> bool {
    let params = ModelParams::new(n, GaussianRational::from_ints(1, 0), GaussianRational::from_ints(4, 0));
    let Ok(s) = build_s(&params, construction) else {
        return false;
    };
    let rho = build_rho(&s, Exec::Sequential);
    lindblad_apply(&rho, &params, Exec::Sequential).is_ok_and(|r| r.is_zero())
}

/// Keeps the colorings whose chains of length 2 and 3 are exact fixed points
/// at `(eps, u) = (1, 4)` and which pass every local condition up to `kmax`.
pub fn resolve_coloring(kmax: u32, exec: Exec) -> ColoringResolution {
    let table = AmplitudeTable::default();
    let candidates = Coloring::all_candidates();
    let screened: Vec<Coloring> = par::map(exec, &candidates, |&c| {
        let construction = Construction::new(c, table);
        (is_fixed_point(&construction, 2) && is_fixed_point(&construction, 3)).then_some(c)
    })
    .into_iter()
    .flatten()
    .collect();
    let survivors: Vec<Coloring> = screened
        .iter()
        .copied()
        .filter(|&c| {
            ProofContext::new(kmax, c, table).is_ok_and(|ctx| ctx.run(Exec::Sequential).passed())
        })
        .collect();
    let survivors_agree = (2..=4).all(|n| {
        let built: Vec<_> = survivors
            .iter()
            .map(|&c| build_s(&ModelParams::symbolic(n), &Construction::new(c, table)).ok())
            .collect();
        built.windows(2).all(|w| w[0].is_some() && w[0] == w[1])
    });
    ColoringResolution {
        kmax,
        candidates: candidates.len(),
        fixed_point_survivors: screened.len(),
        survivors,
        survivors_agree,
    }
}
