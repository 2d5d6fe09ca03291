//! The directed walking graph: nodes on the quarter plane, the fourteen edge
//! families, per-edge site labels and walk enumeration.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{GraphError, ParseError};
use crate::pauli::{PauliIndex, SiteLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Origin,
    /// `(k, k)`
    Diagonal(u32),
    /// `(k - 1, k)`
    Upper(u32),
    /// `(k, k - 1)`
    Lower(u32),
}

impl Node {
    pub fn level(self) -> u32 {
        match self {
            Node::Origin => 0,
            Node::Diagonal(k) | Node::Upper(k) | Node::Lower(k) => k,
        }
    }

    pub fn coords(self) -> (i64, i64) {
        match self {
            Node::Origin => (0, 0),
            Node::Diagonal(k) => (k as i64, k as i64),
            Node::Upper(k) => (k as i64 - 1, k as i64),
            Node::Lower(k) => (k as i64, k as i64 - 1),
        }
    }

    /// Dimension of the node space.
    pub fn dim(self) -> usize {
        match self {
            Node::Diagonal(_) => 2,
            _ => 1,
        }
    }

    /// Origin and diagonal nodes carry both colors.
    pub fn is_bicolored(self) -> bool {
        matches!(self, Node::Origin | Node::Diagonal(_))
    }

    fn kind_rank(self) -> u8 {
        match self {
            Node::Origin => 0,
            Node::Upper(_) => 1,
            Node::Lower(_) => 2,
            Node::Diagonal(_) => 3,
        }
    }

    fn sort_key(self) -> (u32, u8) {
        (self.level(), self.kind_rank())
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Origin => write!(f, "0"),
            Node::Diagonal(k) => write!(f, "D{k}"),
            Node::Upper(k) => write!(f, "U{k}"),
            Node::Lower(k) => write!(f, "L{k}"),
        }
    }
}

impl FromStr for Node {
    type Err = ParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = || ParseError::Node(text.to_string());
        if text == "0" {
            return Ok(Node::Origin);
        }
        let mut chars = text.chars();
        let kind = chars.next().ok_or_else(bad)?;
        let level: u32 = chars.as_str().parse().map_err(|_| bad())?;
        if level == 0 {
            return Err(bad());
        }
        match kind {
            'D' => Ok(Node::Diagonal(level)),
            'U' => Ok(Node::Upper(level)),
            'L' => Ok(Node::Lower(level)),
            _ => Err(bad()),
        }
    }
}

/// Directed edge `from -> to` with degeneracy label `mu` (only `-1` on the second
/// self-loop of a bicolored node).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub from: Node,
    pub to: Node,
    pub mu: i8,
}

impl Edge {
    pub fn new(from: Node, to: Node) -> Self {
        Self { from, to, mu: 1 }
    }

    pub fn looped(node: Node, mu: i8) -> Self {
        Self { from: node, to: node, mu }
    }

    pub fn is_degenerate_loop(&self) -> bool {
        self.from == self.to && self.from.is_bicolored()
    }

    pub fn family(&self) -> Family {
        use Node::*;
        match (self.from, self.to) {
            (Origin, Origin) => Family::OriginLoop,
            (Origin, Diagonal(_)) => Family::OriginToDiagonal,
            (Diagonal(_), Origin) => Family::DiagonalToOrigin,
            (Origin, _) => Family::OriginToSide,
            (_, Origin) => Family::SideToOrigin,
            (Diagonal(k), Diagonal(j)) if j == k + 1 => Family::DiagonalUp,
            (Diagonal(k), Diagonal(j)) if k == j + 1 => Family::DiagonalDown,
            (Diagonal(_), Diagonal(_)) => Family::DiagonalLoop,
            (Diagonal(k), Upper(j) | Lower(j)) if j == k + 1 => Family::DiagonalToOuterSide,
            (Diagonal(_), _) => Family::DiagonalToInnerSide,
            (Upper(k) | Lower(k), Diagonal(j)) if k == j + 1 => Family::OuterSideToDiagonal,
            (_, Diagonal(_)) => Family::InnerSideToDiagonal,
            (a, b) if a == b => Family::SideLoop,
            _ => Family::Skew,
        }
    }

    /// Level parameter `k` of the amplitude formula for this edge (0 at the origin).
    pub fn family_level(&self) -> u32 {
        self.from.level().min(self.to.level())
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}>{}", self.from, self.to)?;
        if self.is_degenerate_loop() {
            write!(f, "#{}", if self.mu > 0 { "+1" } else { "-1" })?;
        }
        Ok(())
    }
}

impl FromStr for Edge {
    type Err = ParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = || ParseError::Edge(text.to_string());
        let (body, mu) = match text.split_once('#') {
            Some((body, "+1")) => (body, 1),
            Some((body, "-1")) => (body, -1),
            Some(_) => return Err(bad()),
            None => (text, 1),
        };
        let (from, to) = body.split_once('>').ok_or_else(bad)?;
        let edge = Edge {
            from: from.parse().map_err(|_| bad())?,
            to: to.parse().map_err(|_| bad())?,
            mu,
        };
        if mu == -1 && !edge.is_degenerate_loop() {
            return Err(bad());
        }
        Ok(edge)
    }
}

/// The fourteen edge families of the amplitude table. Level-`k` families are
/// defined for `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    /// `0 -> 0`, both degeneracies
    OriginLoop,
    /// `0 -> D1`
    OriginToDiagonal,
    /// `D1 -> 0`
    DiagonalToOrigin,
    /// `0 -> U1, L1`
    OriginToSide,
    /// `U1, L1 -> 0`
    SideToOrigin,
    /// `D(k) -> U(k+1), L(k+1)`
    DiagonalToOuterSide,
    /// `D(k) -> U(k), L(k)`
    DiagonalToInnerSide,
    /// `U(k) -> U(k)`, `L(k) -> L(k)`
    SideLoop,
    /// `U(k), L(k) -> D(k)`
    InnerSideToDiagonal,
    /// `U(k+1), L(k+1) -> D(k)`
    OuterSideToDiagonal,
    /// `U(k) <-> L(k)`
    Skew,
    /// `D(k) -> D(k+1)`
    DiagonalUp,
    /// `D(k+1) -> D(k)`
    DiagonalDown,
    /// `D(k) -> D(k)`, both degeneracies
    DiagonalLoop,
}

impl Family {
    pub const ALL: [Family; 14] = [
        Family::OriginLoop,
        Family::OriginToDiagonal,
        Family::DiagonalToOrigin,
        Family::OriginToSide,
        Family::SideToOrigin,
        Family::DiagonalToOuterSide,
        Family::DiagonalToInnerSide,
        Family::SideLoop,
        Family::InnerSideToDiagonal,
        Family::OuterSideToDiagonal,
        Family::Skew,
        Family::DiagonalUp,
        Family::DiagonalDown,
        Family::DiagonalLoop,
    ];

    /// Representative edges of the family at level `k` (for level-free families
    /// `k` is ignored).
    pub fn edges_at(self, k: u32) -> Vec<Edge> {
        use Node::*;
        let e = Edge::new;
        match self {
            Family::OriginLoop => vec![Edge::looped(Origin, 1), Edge::looped(Origin, -1)],
            Family::OriginToDiagonal => vec![e(Origin, Diagonal(1))],
            Family::DiagonalToOrigin => vec![e(Diagonal(1), Origin)],
            Family::OriginToSide => vec![e(Origin, Upper(1)), e(Origin, Lower(1))],
            Family::SideToOrigin => vec![e(Upper(1), Origin), e(Lower(1), Origin)],
            Family::DiagonalToOuterSide => {
                vec![e(Diagonal(k), Upper(k + 1)), e(Diagonal(k), Lower(k + 1))]
            }
            Family::DiagonalToInnerSide => vec![e(Diagonal(k), Upper(k)), e(Diagonal(k), Lower(k))],
            Family::SideLoop => vec![e(Upper(k), Upper(k)), e(Lower(k), Lower(k))],
            Family::InnerSideToDiagonal => vec![e(Upper(k), Diagonal(k)), e(Lower(k), Diagonal(k))],
            Family::OuterSideToDiagonal => {
                vec![e(Upper(k + 1), Diagonal(k)), e(Lower(k + 1), Diagonal(k))]
            }
            Family::Skew => vec![e(Upper(k), Lower(k)), e(Lower(k), Upper(k))],
            Family::DiagonalUp => vec![e(Diagonal(k), Diagonal(k + 1))],
            Family::DiagonalDown => vec![e(Diagonal(k + 1), Diagonal(k))],
            Family::DiagonalLoop => {
                vec![Edge::looped(Diagonal(k), 1), Edge::looped(Diagonal(k), -1)]
            }
        }
    }

    pub fn has_level(self) -> bool {
        !matches!(
            self,
            Family::OriginLoop
                | Family::OriginToDiagonal
                | Family::DiagonalToOrigin
                | Family::OriginToSide
                | Family::SideToOrigin
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    White,
    Black,
}

impl Color {
    /// Label of a coordinate left unchanged by an edge governed by this color.
    pub fn still_label(self) -> PauliIndex {
        match self {
            Color::White => PauliIndex::Zero,
            Color::Black => PauliIndex::Z,
        }
    }
}

/// Colors of the upper and lower side nodes, periodic in the level with period 4.
/// Index `i` holds the color for levels `k` with `k - 1 = i (mod 4)`.
/// Serializes as the map `{"U1": "white", ..., "L4": "black"}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "BTreeMap<String, Color>", try_from = "BTreeMap<String, Color>")]
pub struct Coloring {
    pub upper: [Color; 4],
    pub lower: [Color; 4],
}

impl Coloring {
    /// Odd levels white, even levels black, on both sides.
    pub fn alternating() -> Self {
        use Color::*;
        let pattern = [White, Black, White, Black];
        Self { upper: pattern, lower: pattern }
    }

    pub fn uniform(color: Color) -> Self {
        Self { upper: [color; 4], lower: [color; 4] }
    }

    /// All 256 period-4 assignments, in a fixed order.
    pub fn all_candidates() -> Vec<Coloring> {
        (0u32..256)
            .map(|bits| {
                let pick = |i: u32| if bits >> i & 1 == 1 { Color::Black } else { Color::White };
                Coloring {
                    upper: [pick(0), pick(1), pick(2), pick(3)],
                    lower: [pick(4), pick(5), pick(6), pick(7)],
                }
            })
            .collect()
    }

    fn slot(level: u32) -> usize {
        ((level + 3) % 4) as usize
    }

    /// Color of a side node; `None` for bicolored nodes.
    pub fn color_of(&self, node: Node) -> Option<Color> {
        match node {
            Node::Upper(k) => Some(self.upper[Self::slot(k)]),
            Node::Lower(k) => Some(self.lower[Self::slot(k)]),
            _ => None,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.upper == self.lower
    }

    pub fn to_map(&self) -> BTreeMap<String, Color> {
        (0..4)
            .flat_map(|i| {
                [
                    (format!("U{}", i + 1), self.upper[i]),
                    (format!("L{}", i + 1), self.lower[i]),
                ]
            })
            .collect()
    }

    pub fn from_map(map: &BTreeMap<String, Color>) -> Result<Self, ParseError> {
        let mut out = Self::uniform(Color::White);
        for i in 0..4 {
            for (prefix, slot) in [("U", &mut out.upper[i]), ("L", &mut out.lower[i])] {
                let key = format!("{prefix}{}", i + 1);
                *slot = *map
                    .get(&key)
                    .ok_or_else(|| ParseError::Coloring(format!("missing key {key}")))?;
            }
        }
        if map.len() != 8 {
            return Err(ParseError::Coloring("expected exactly the keys U1..U4, L1..L4".into()));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_map()).expect("coloring map serializes")
    }

    /// SHA-256 of the canonical JSON map, hex encoded.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        let map: BTreeMap<String, Color> =
            serde_json::from_str(text).map_err(|e| ParseError::Coloring(e.to_string()))?;
        Self::from_map(&map)
    }
}

impl From<Coloring> for BTreeMap<String, Color> {
    fn from(c: Coloring) -> Self {
        c.to_map()
    }
}

impl TryFrom<BTreeMap<String, Color>> for Coloring {
    type Error = ParseError;

    fn try_from(map: BTreeMap<String, Color>) -> Result<Self, ParseError> {
        Self::from_map(&map)
    }
}

impl Default for Coloring {
    fn default() -> Self {
        Self::alternating()
    }
}

impl fmt::Display for Coloring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = |c: Color| if c == Color::White { 'w' } else { 'b' };
        let up: String = self.upper.iter().map(|x| c(*x)).collect();
        let low: String = self.lower.iter().map(|x| c(*x)).collect();
        write!(f, "U:{up} L:{low}")
    }
}

/// Site label carried by an edge under a coloring.
pub fn omega(edge: &Edge, coloring: &Coloring) -> Result<SiteLabel, GraphError> {
    if edge.is_degenerate_loop() {
        let idx = if edge.mu > 0 { PauliIndex::Zero } else { PauliIndex::Z };
        return Ok(SiteLabel::new(idx, idx));
    }
    let governing = coloring.color_of(edge.from).or(coloring.color_of(edge.to));
    let (p, q) = (edge.from.coords(), edge.to.coords());
    let component = |delta: i64| -> Option<PauliIndex> {
        match delta {
            1 => Some(PauliIndex::Plus),
            -1 => Some(PauliIndex::Minus),
            0 => governing.map(Color::still_label),
            _ => None,
        }
    };
    let forbidden = |label: String| GraphError::ForbiddenLabel { edge: edge.to_string(), label };
    let sigma = component(q.0 - p.0).ok_or_else(|| forbidden("?".into()))?;
    let tau = component(q.1 - p.1).ok_or_else(|| forbidden("?".into()))?;
    let label = SiteLabel::new(sigma, tau);
    let mixed = matches!(
        (sigma, tau),
        (PauliIndex::Z, PauliIndex::Zero) | (PauliIndex::Zero, PauliIndex::Z)
    );
    if mixed {
        return Err(forbidden(label.to_string()));
    }
    Ok(label)
}

/// Graph restricted to levels `<= max_level`, with labels fixed by a coloring.
#[derive(Debug, Clone)]
pub struct TruncatedGraph {
    max_level: u32,
    coloring: Coloring,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    labels: Vec<SiteLabel>,
    node_index: BTreeMap<Node, usize>,
    outgoing: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
}

/// Truncation level sufficient for closed walks of length `n`.
pub fn default_truncation(n: usize) -> u32 {
    (n / 2) as u32 + 1
}

pub fn build_graph(max_level: u32, coloring: Coloring) -> Result<TruncatedGraph, GraphError> {
    let max_level = max_level.max(1);
    let mut nodes = vec![Node::Origin];
    for k in 1..=max_level {
        nodes.extend([Node::Upper(k), Node::Lower(k), Node::Diagonal(k)]);
    }
    let mut edges: Vec<Edge> = Vec::new();
    for family in Family::ALL {
        let levels = if family.has_level() { 1..=max_level } else { 1..=1 };
        for k in levels {
            edges.extend(
                family
                    .edges_at(k)
                    .into_iter()
                    .filter(|e| e.from.level() <= max_level && e.to.level() <= max_level),
            );
        }
    }
    edges.sort_by_key(|e| (e.from, e.to, -e.mu));
    edges.dedup();
    let labels = edges
        .iter()
        .map(|e| omega(e, &coloring))
        .collect::<Result<Vec<_>, _>>()?;
    let node_index: BTreeMap<Node, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let mut outgoing = vec![Vec::new(); nodes.len()];
    let mut incoming = vec![Vec::new(); nodes.len()];
    for (i, e) in edges.iter().enumerate() {
        outgoing[node_index[&e.from]].push(i);
        incoming[node_index[&e.to]].push(i);
    }
    Ok(TruncatedGraph {
        max_level,
        coloring,
        nodes,
        edges,
        labels,
        node_index,
        outgoing,
        incoming,
    })
}

/// A walk as a sequence of edge indices into [`TruncatedGraph::edges`].
pub type Walk = Vec<usize>;

impl TruncatedGraph {
    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn coloring(&self) -> &Coloring {
        &self.coloring
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn label(&self, edge: usize) -> SiteLabel {
        self.labels[edge]
    }

    pub fn node_index(&self, node: Node) -> Result<usize, GraphError> {
        self.node_index
            .get(&node)
            .copied()
            .ok_or_else(|| GraphError::MissingNode(node.to_string()))
    }

    pub fn contains(&self, node: Node) -> bool {
        self.node_index.contains_key(&node)
    }

    pub fn edges_from(&self, node: Node) -> impl Iterator<Item = usize> + '_ {
        let list = self.node_index.get(&node).map(|&i| self.outgoing[i].as_slice());
        list.unwrap_or(&[]).iter().copied()
    }

    pub fn edges_into(&self, node: Node) -> impl Iterator<Item = usize> + '_ {
        let list = self.node_index.get(&node).map(|&i| self.incoming[i].as_slice());
        list.unwrap_or(&[]).iter().copied()
    }

    /// Offset of each node's block in the auxiliary space, plus the total dimension.
    pub fn aux_layout(&self) -> (Vec<usize>, usize) {
        let mut offsets = Vec::with_capacity(self.nodes.len());
        let mut total = 0;
        for node in &self.nodes {
            offsets.push(total);
            total += node.dim();
        }
        (offsets, total)
    }

    /// All `n`-edge walks from `from` to `to`, in lexicographic edge order.
    /// Fails if any such walk touches the truncation level, where missing
    /// edges would make the list incomplete.
    pub fn enumerate_walks(&self, n: usize, from: Node, to: Node) -> Result<Vec<Walk>, GraphError> {
        self.node_index(from)?;
        self.node_index(to)?;
        let mut out = Vec::new();
        let mut path = Vec::with_capacity(n);
        self.walk_dfs(n, from, to, &mut path, &mut out)?;
        let touches_top = |w: &Walk| {
            w.iter().any(|&e| {
                let edge = &self.edges[e];
                edge.from.level().max(edge.to.level()) >= self.max_level
            })
        };
        if out.iter().any(touches_top) {
            return Err(GraphError::Truncation { level: self.max_level });
        }
        Ok(out)
    }

    fn walk_dfs(
        &self,
        remaining: usize,
        at: Node,
        to: Node,
        path: &mut Walk,
        out: &mut Vec<Walk>,
    ) -> Result<(), GraphError> {
        if remaining == 0 {
            if at == to {
                out.push(path.clone());
            }
            return Ok(());
        }
        for e in self.edges_from(at) {
            let next = self.edges[e].to;
            if next.level().abs_diff(to.level()) as usize > remaining - 1 {
                continue;
            }
            path.push(e);
            self.walk_dfs(remaining - 1, next, to, path, out)?;
            path.pop();
        }
        Ok(())
    }

    /// Number of `n`-walks from `from` to `to` by repeated adjacency products.
    pub fn count_walks(&self, n: usize, from: Node, to: Node) -> Result<u128, GraphError> {
        let start = self.node_index(from)?;
        let end = self.node_index(to)?;
        let mut counts = vec![0u128; self.nodes.len()];
        counts[start] = 1;
        for _ in 0..n {
            let mut next = vec![0u128; self.nodes.len()];
            for e in &self.edges {
                next[self.node_index[&e.to]] += counts[self.node_index[&e.from]];
            }
            counts = next;
        }
        Ok(counts[end])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use PauliIndex::*;

    fn graph(k: u32) -> TruncatedGraph {
        build_graph(k, Coloring::alternating()).unwrap()
    }

    #[test]
    fn node_text_round_trip() {
        for text in ["0", "D3", "U1", "L12"] {
            assert_eq!(text.parse::<Node>().unwrap().to_string(), text);
        }
        assert!("D0".parse::<Node>().is_err());
        assert!("X1".parse::<Node>().is_err());
        for text in ["0>D1", "D2>D2#-1", "U3>L3", "0>0#+1"] {
            assert_eq!(text.parse::<Edge>().unwrap().to_string(), text);
        }
        assert!("U1>U1#-1".parse::<Edge>().is_err());
    }

    #[test]
    fn origin_edges() {
        let g = graph(2);
        let out: Vec<String> = g.edges_from(Node::Origin).map(|e| g.edges()[e].to_string()).collect();
        assert_eq!(out, ["0>0#+1", "0>0#-1", "0>U1", "0>L1", "0>D1"]);
    }

    #[test]
    fn level_one_node_set() {
        let g = graph(1);
        assert_eq!(
            g.nodes(),
            &[Node::Origin, Node::Upper(1), Node::Lower(1), Node::Diagonal(1)]
        );
    }

    #[test]
    fn diagonal_degrees() {
        let g = graph(5);
        for k in 1..5 {
            // two loops, four inner/outer side nodes, one step up, one step down
            assert_eq!(g.edges_from(Node::Diagonal(k)).count(), 8, "k={k}");
            assert_eq!(g.edges_into(Node::Diagonal(k)).count(), 8, "k={k}");
        }
    }

    #[test]
    fn labels_follow_coordinates() {
        let c = Coloring::alternating();
        assert_eq!(omega(&Edge::new(Node::Origin, Node::Diagonal(1)), &c).unwrap(), SiteLabel::new(Plus, Plus));
        assert_eq!(omega(&Edge::looped(Node::Diagonal(3), 1), &c).unwrap(), SiteLabel::new(Zero, Zero));
        assert_eq!(omega(&Edge::looped(Node::Diagonal(3), -1), &c).unwrap(), SiteLabel::new(Z, Z));
        assert_eq!(omega(&Edge::new(Node::Upper(2), Node::Lower(2)), &c).unwrap(), SiteLabel::new(Plus, Minus));
        assert_eq!(omega(&Edge::new(Node::Origin, Node::Upper(1)), &c).unwrap(), SiteLabel::new(Zero, Plus));
        assert_eq!(omega(&Edge::new(Node::Diagonal(1), Node::Lower(2)), &c).unwrap(), SiteLabel::new(Plus, Z));
    }

    #[test]
    fn short_closed_walks() {
        let g = graph(2);
        assert_eq!(g.enumerate_walks(1, Node::Origin, Node::Origin).unwrap().len(), 2);
        assert_eq!(g.enumerate_walks(2, Node::Origin, Node::Origin).unwrap().len(), 7);
    }

    #[test]
    fn walks_match_adjacency_counts() {
        let g = graph(4);
        for n in 1..=4 {
            for &to in &[Node::Origin, Node::Diagonal(1), Node::Upper(1), Node::Lower(2)] {
                let walks = g.enumerate_walks(n, Node::Origin, to).unwrap();
                assert_eq!(walks.len() as u128, g.count_walks(n, Node::Origin, to).unwrap());
                for w in &walks {
                    for pair in w.windows(2) {
                        assert_eq!(g.edges()[pair[0]].to, g.edges()[pair[1]].from);
                    }
                }
            }
        }
    }

    #[test]
    fn truncation_guard_fires() {
        let g = graph(1);
        assert_eq!(
            g.enumerate_walks(2, Node::Origin, Node::Origin).unwrap_err(),
            GraphError::Truncation { level: 1 }
        );
    }

    #[test]
    fn closed_walks_stable_under_larger_cutoff() {
        for n in 1..=6 {
            let k = default_truncation(n);
            let a = graph(k);
            let b = graph(k + 1);
            let text = |g: &TruncatedGraph| -> Vec<String> {
                g.enumerate_walks(n, Node::Origin, Node::Origin)
                    .unwrap()
                    .iter()
                    .map(|w| w.iter().map(|&e| g.edges()[e].to_string()).collect::<Vec<_>>().join(" "))
                    .collect()
            };
            assert_eq!(text(&a), text(&b), "n={n}");
        }
    }

    #[test]
    fn coloring_json_round_trip() {
        let c = Coloring::alternating();
        let text = c.to_json();
        assert_eq!(Coloring::from_json(&text).unwrap(), c);
        assert!(Coloring::from_json(r#"{"U1":"white"}"#).is_err());
        assert_eq!(Coloring::all_candidates().len(), 256);
    }
}
