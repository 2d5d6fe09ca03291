//! Least-squares search for the companion operator `B` in the local divergence
//! relation `[h, L (x)p L] = B (x)p L - L (x)p B`, with `h` the two-site density
//! at half the on-site coupling and `L = sum A_{s,t} s^s t^t`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::amplitudes::MpoTensor;
use crate::error::NessError;
use crate::exact::{Complex64, Scalar};
use crate::graph::build_graph;
use crate::ness::{hamiltonian, Construction};
use crate::pauli::{PauliString, SiteLabel, SparseOp};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LodReport {
    pub kmax: u32,
    pub eps: f64,
    pub u: f64,
    pub unknowns: usize,
    pub equations: usize,
    pub rank: usize,
    pub nullity: usize,
    /// `|| [h, L (x)p L] ||` over the interior equations, i.e. the residual at `B = 0`.
    pub baseline: f64,
    pub residual: f64,
    pub relative_residual: f64,
    pub solution_norm: f64,
}

impl LodReport {
    pub fn nontrivial_solution(&self, tolerance: f64) -> bool {
        self.baseline > 0.0 && self.relative_residual < tolerance
    }
}

/// A least-squares solution together with the unknown layout it refers to.
#[derive(Debug, Clone)]
pub struct LodSolution {
    pub report: LodReport,
    /// `(label code, row, col)` of each unknown entry of `B`.
    pub layout: Vec<(u8, usize, usize)>,
    pub values: Vec<Complex64>,
}

struct System {
    layout: Vec<(u8, usize, usize)>,
    rows: Vec<(Vec<(usize, Complex64)>, Complex64)>,
}

fn coords_of_indices(graph: &crate::graph::TruncatedGraph) -> (Vec<(i64, i64)>, Vec<u32>) {
    let mut coords = Vec::new();
    let mut levels = Vec::new();
    for node in graph.nodes() {
        for _ in 0..node.dim() {
            coords.push(node.coords());
            levels.push(node.level());
        }
    }
    (coords, levels)
}

fn shift(label: SiteLabel) -> (i64, i64) {
    let (a, b) = label.displacement();
    (a as i64, b as i64)
}

fn build_system(
    kmax: u32,
    eps: Complex64,
    u: Complex64,
    construction: &Construction,
) -> Result<System, NessError> {
    let graph = build_graph(kmax + 1, construction.coloring)?;
    let mpo = MpoTensor::build(&graph, &construction.table, &eps, &u)?;
    let dim = mpo.dim();
    let (coords, levels) = coords_of_indices(&graph);
    let labels: Vec<SiteLabel> = SiteLabel::all().collect();

    let mut layout = Vec::new();
    let mut index: HashMap<(u8, usize, usize), usize> = HashMap::new();
    for c in &labels {
        let (dx, dy) = shift(*c);
        for i in 0..dim {
            for j in 0..dim {
                let graded = coords[j] == (coords[i].0 + dx, coords[i].1 + dy);
                if graded && levels[i].abs_diff(levels[j]) <= 1 {
                    index.insert((c.code() as u8, i, j), layout.len());
                    layout.push((c.code() as u8, i, j));
                }
            }
        }
    }

    let h = hamiltonian(2, &u.scale_small(1, 2));
    let mut lhs: HashMap<PauliString, Vec<Complex64>> = HashMap::new();
    for a in &labels {
        for b in &labels {
            let pair = SparseOp::single(PauliString::from_labels(&[*a, *b]), Complex64::one());
            let comm = h.commutator(&pair).expect("two sites");
            if comm.is_zero() {
                continue;
            }
            let mut product = vec![Complex64::zero(); dim * dim];
            for (i, k, va) in mpo.matrix(*a) {
                for (k2, j, vb) in mpo.matrix(*b) {
                    if k == k2 {
                        product[i * dim + j] += va * vb;
                    }
                }
            }
            for (string, c) in comm.iter() {
                let slot = lhs.entry(*string).or_insert_with(|| vec![Complex64::zero(); dim * dim]);
                for (s, p) in slot.iter_mut().zip(&product) {
                    *s += c * p;
                }
            }
        }
    }

    let interior = |i: usize| levels[i] <= kmax;
    let mut rows = Vec::new();
    for c in &labels {
        for d in &labels {
            let string = PauliString::from_labels(&[*c, *d]);
            let target = lhs.get(&string);
            let (sx, sy) = (shift(*c).0 + shift(*d).0, shift(*c).1 + shift(*d).1);
            for i in (0..dim).filter(|&i| interior(i)) {
                for j in (0..dim).filter(|&j| interior(j)) {
                    if coords[j] != (coords[i].0 + sx, coords[i].1 + sy) {
                        continue;
                    }
                    let mut coeffs: HashMap<usize, Complex64> = HashMap::new();
                    for (k, jj, v) in mpo.matrix(*d) {
                        if *jj == j {
                            if let Some(&x) = index.get(&(c.code() as u8, i, *k)) {
                                *coeffs.entry(x).or_default() += v;
                            }
                        }
                    }
                    for (ii, k, v) in mpo.matrix(*c) {
                        if *ii == i {
                            if let Some(&x) = index.get(&(d.code() as u8, *k, j)) {
                                *coeffs.entry(x).or_default() -= v;
                            }
                        }
                    }
                    let value = target.map_or(Complex64::zero(), |t| t[i * dim + j]);
                    coeffs.retain(|_, v| *v != Complex64::zero());
                    if coeffs.is_empty() && value == Complex64::zero() {
                        continue;
                    }
                    let mut entries: Vec<(usize, Complex64)> = coeffs.into_iter().collect();
                    entries.sort_by_key(|e| e.0);
                    rows.push((entries, value));
                }
            }
        }
    }
    Ok(System { layout, rows })
}

fn residual_norm(rows: &[(Vec<(usize, Complex64)>, Complex64)], x: &[Complex64]) -> f64 {
    rows.iter()
        .map(|(entries, b)| {
            let ax: Complex64 = entries.iter().map(|(k, v)| v * x[*k]).sum();
            (ax - b).norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// Solves for `B` at fixed numeric `(eps, u)` on the graph truncated just above
/// `kmax`, keeping only equations whose auxiliary indices lie at levels `<= kmax`.
pub fn solve_lod(kmax: u32, eps: f64, u: f64, construction: &Construction) -> Result<LodSolution, NessError> {
    let (e, uu) = (Complex64::new(eps, 0.0), Complex64::new(u, 0.0));
    let system = build_system(kmax, e, uu, construction)?;
    let m = system.layout.len();
    let mut matrix = DMatrix::<Complex64>::zeros(system.rows.len(), m);
    let mut rhs = DVector::<Complex64>::zeros(system.rows.len());
    for (r, (entries, b)) in system.rows.iter().enumerate() {
        rhs[r] = *b;
        for (k, v) in entries {
            matrix[(r, *k)] = *v;
        }
    }
    let scales: Vec<f64> = (0..m)
        .map(|k| {
            let norm = matrix.column(k).norm();
            if norm > 0.0 { 1.0 / norm } else { 1.0 }
        })
        .collect();
    for (k, scale) in scales.iter().enumerate() {
        matrix.column_mut(k).scale_mut(*scale);
    }
    let svd = matrix.svd(true, true);
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = top * 1e-12;
    let rank = svd.singular_values.iter().filter(|s| **s > cutoff).count();
    let scaled = svd.solve(&rhs, cutoff).map_err(|_| NessError::ZeroNorm)?;
    let solution: Vec<Complex64> = scaled.iter().zip(&scales).map(|(x, s)| x * *s).collect();
    let values = solution;
    let zeros = vec![Complex64::zero(); m];
    let baseline = residual_norm(&system.rows, &zeros);
    let residual = residual_norm(&system.rows, &values);
    let report = LodReport {
        kmax,
        eps,
        u,
        unknowns: m,
        equations: system.rows.len(),
        rank,
        nullity: m - rank,
        baseline,
        residual,
        relative_residual: if baseline > 0.0 { residual / baseline } else { 0.0 },
        solution_norm: values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt(),
    };
    Ok(LodSolution { report, layout: system.layout, values })
}

/// Residual of a solution found on a larger truncation, restricted to the
/// unknowns and interior equations of a smaller one, relative to that system's
/// baseline.
pub fn nested_residual(larger: &LodSolution, kmax: u32, construction: &Construction) -> Result<f64, NessError> {
    let (e, u) = (Complex64::new(larger.report.eps, 0.0), Complex64::new(larger.report.u, 0.0));
    let system = build_system(kmax, e, u, construction)?;
    let lookup: HashMap<(u8, usize, usize), Complex64> =
        larger.layout.iter().copied().zip(larger.values.iter().copied()).collect();
    let x: Vec<Complex64> = system.layout.iter().map(|k| lookup.get(k).copied().unwrap_or_default()).collect();
    let zeros = vec![Complex64::zero(); x.len()];
    let baseline = residual_norm(&system.rows, &zeros);
    Ok(residual_norm(&system.rows, &x) / baseline)
}
