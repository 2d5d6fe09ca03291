//! Acceptance gate: one PASS/FAIL line per criterion. Exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use hubbard_ness::amplitudes::MpoTensor;
use hubbard_ness::exact::{rat, Complex64, FieldScalar, GaussianRational, PolyEU, Scalar};
use hubbard_ness::graph::{build_graph, default_truncation, Family};
use hubbard_ness::lod::solve_lod;
use hubbard_ness::ness::{
    boundary_magnetization, build_rho, build_s, build_s_checked, commuting_family_symbolic,
    defining_relation_check, hamiltonian, lindblad_apply, max_degrees, number_operator, relative_norm,
    schmidt_bound, schmidt_ranks, triangularity, z_operator, Construction, ModelParams, Triangularity,
};
use hubbard_ness::observables::{
    continuity_identity_holds, current_operator, current_profiles, direct_trace, spin_casimir, spin_z,
    symmetry_checks, TransferMatrix,
};
use hubbard_ness::par::Exec;
use hubbard_ness::pauli::{PauliIndex, PauliString, SiteLabel, SparseOp};
use hubbard_ness::proof::{resolve_coloring, run_proof};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FLOAT_TOLERANCE: f64 = 1e-10;
const LOD_TOLERANCE: f64 = 1e-8;
const PROOF_KMAX: u32 = 28;
const LOD_KMAX: u32 = 6;
const RANDOM_CASES: usize = 1000;
const SEED: u64 = 20_240_601;
/// SHA-256 of `{"L1":"white","L2":"black",...,"U4":"black"}`.
const PINNED_COLORING_HASH: &str = "301ce7e2f1527a13871910e872e183d59bc330f5d040c9f95a925cf57029d84c";

type Outcome = Result<(bool, String), String>;

struct Gate {
    results: Vec<(u32, bool)>,
}

impl Gate {
    fn check(&mut self, id: u32, name: &str, run: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let (passed, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
        let verdict = if passed { "PASS" } else { "FAIL" };
        println!("{verdict} {id:>2} {name}: {detail} [{:.1} s]", start.elapsed().as_secs_f64());
        self.results.push((id, passed));
    }

    fn info(&self, id: u32, text: &str) {
        println!("INFO {id:>2} {text}");
    }
}

fn g(re: i64) -> GaussianRational {
    GaussianRational::from_ints(re, 0)
}

fn exact(n: usize, eps: GaussianRational, u: GaussianRational) -> ModelParams<GaussianRational> {
    ModelParams::new(n, eps, u)
}

fn float(n: usize, eps: f64, u: f64) -> ModelParams<Complex64> {
    ModelParams::new(n, Complex64::new(eps, 0.0), Complex64::new(u, 0.0))
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn fixed_point_exact(c: &Construction) -> Outcome {
    let mut checked = Vec::new();
    for n in [2usize, 3] {
        let s = build_s(&ModelParams::symbolic(n), c).map_err(err)?;
        let rho = build_rho(&s, Exec::default());
        let out = lindblad_apply(&rho, &ModelParams::symbolic(n), Exec::default()).map_err(err)?;
        if !out.is_zero() {
            return Ok((false, format!("symbolic residual nonzero at n = {n}")));
        }
        let (eps_points, u_points) = (4 * n + 2, 2 * n + 2);
        for i in 0..eps_points {
            for j in 0..u_points {
                let eps = GaussianRational::real(rat(i as i64 + 1, 3));
                let u = GaussianRational::real(rat(2 * j as i64 - n as i64, 2));
                let p = exact(n, eps, u);
                let rho = build_rho(&build_s(&p, c).map_err(err)?, Exec::default());
                if !lindblad_apply(&rho, &p, Exec::default()).map_err(err)?.is_zero() {
                    return Ok((false, format!("nonzero at n = {n}, grid ({i}, {j})")));
                }
            }
        }
        checked.push(format!("n = {n}: symbolic and {eps_points}x{u_points} grid"));
    }
    Ok((true, checked.join("; ")))
}

fn fixed_point_float(c: &Construction) -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [4usize, 5] {
        for (eps, u) in [(1.0, 0.0), (1.0, 4.0), (0.5, 2.0)] {
            let p = float(n, eps, u);
            let rho = build_rho(&build_s(&p, c).map_err(err)?, Exec::default());
            let out = lindblad_apply(&rho, &p, Exec::default()).map_err(err)?;
            worst = worst.max(relative_norm(&out, &rho));
        }
    }
    Ok((worst < FLOAT_TOLERANCE, format!("max relative residual {worst:.2e} < {FLOAT_TOLERANCE:e}")))
}

fn defining_relation(c: &Construction) -> Outcome {
    let prefactor = c.table.relation_prefactor();
    for n in 2..=4 {
        let s = build_s(&ModelParams::symbolic(n), c).map_err(err)?;
        let report = defining_relation_check(&s, &PolyEU::u(), &prefactor).map_err(err)?;
        if !report.holds() {
            return Ok((false, format!("difference nonzero at n = {n}")));
        }
    }
    Ok((true, format!("exact for n = 2..4 with prefactor {prefactor}")))
}

fn proof_certificate(c: &Construction) -> Outcome {
    let (cert, elapsed) = run_proof(PROOF_KMAX, c.coloring, c.table, Exec::default()).map_err(err)?;
    let mut caught = Vec::new();
    for family in Family::ALL {
        let mutated = c.table.with_flipped(family);
        let (bad, _) = run_proof(4, c.coloring, mutated, Exec::default()).map_err(err)?;
        caught.push(!bad.violations.is_empty());
    }
    let all_caught = caught.iter().all(|x| *x);
    Ok((
        cert.passed() && all_caught,
        format!(
            "kmax {}: {} conditions, {} trivial, {} nontrivial zero, {} violations in {:.1} s; \
             sign flip caught in {}/{} families",
            cert.kmax,
            cert.conditions_total,
            cert.trivial,
            cert.nontrivial_zero,
            cert.violations.len(),
            elapsed.as_secs_f64(),
            caught.iter().filter(|x| **x).count(),
            caught.len()
        ),
    ))
}

fn coloring_resolution(c: &Construction) -> Outcome {
    let resolution = resolve_coloring(PROOF_KMAX, Exec::default());
    let Some(chosen) = resolution.unique() else {
        return Ok((false, format!("{} survivors, agree = {}", resolution.survivors.len(), resolution.survivors_agree)));
    };
    let hash = chosen.content_hash();
    let pinned = chosen == c.coloring && hash == PINNED_COLORING_HASH;
    Ok((
        !resolution.survivors.is_empty() && resolution.survivors_agree && pinned,
        format!(
            "{} candidates, {} pass the fixed-point screen, {} survive the proof; chosen {} hash {}",
            resolution.candidates,
            resolution.fixed_point_survivors,
            resolution.survivors.len(),
            chosen.to_json(),
            hash
        ),
    ))
}

fn structure(c: &Construction) -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for n in 2..=6 {
        let s = build_s(&exact(n, g(1), g(4)), c).map_err(err)?;
        let ranks = schmidt_ranks(&s);
        ok &= ranks.iter().all(|r| *r <= schmidt_bound(n));
        notes.push(format!("ranks n={n} {ranks:?}"));
        if n == 2 {
            ok &= ranks == vec![4];
        }
        let (de, du) = max_degrees(&build_s(&ModelParams::symbolic(n), c).map_err(err)?);
        ok &= de <= 2 * n as i64 && du <= n as i64;
        notes.push(format!("degrees ({de}, {du})"));
    }
    for n in 2..=4 {
        let t = triangularity(&build_s(&exact(n, g(1), g(4)), c).map_err(err)?).map_err(err)?;
        ok &= t == Triangularity::Upper;
    }
    notes.push("upper triangular for n <= 4".into());
    let graph = build_graph(default_truncation(6), c.coloring).map_err(err)?;
    let mpo = MpoTensor::build(&graph, &c.table, &PolyEU::eps(), &PolyEU::u()).map_err(err)?;
    let blocks_of_four = (1..=graph.max_level())
        .all(|k| graph.nodes().iter().filter(|v| v.level() == k).map(|v| v.dim()).sum::<usize>() == 4);
    let z_free = [SiteLabel::new(PauliIndex::Z, PauliIndex::Zero), SiteLabel::new(PauliIndex::Zero, PauliIndex::Z)]
        .iter()
        .all(|l| mpo.matrix(*l).iter().all(|(_, _, v)| v.is_zero()));
    ok &= mpo.is_block_tridiagonal() && blocks_of_four && z_free;
    notes.push(format!(
        "block tridiagonal {}, level blocks of size 4 {blocks_of_four}, A_z0 = A_0z = 0 {z_free}",
        mpo.is_block_tridiagonal()
    ));
    Ok((ok, notes.join(", ")))
}

fn commuting_family(c: &Construction) -> Outcome {
    for n in 2..=4 {
        for u in 0..=(2 * n as i64 + 1) {
            if !commuting_family_symbolic(n, &g(u), c).map_err(err)? {
                return Ok((false, format!("fails at n = {n}, u = {u}")));
            }
        }
    }
    Ok((true, "exact in both dissipation strengths, n = 2..4, u = 0..2n+1".into()))
}

fn z_commutator(c: &Construction) -> Outcome {
    let mut half = true;
    let mut literal = true;
    for n in 2..=5 {
        let z = z_operator(&build_s(&ModelParams::symbolic(n), c).map_err(err)?);
        let hz = hamiltonian(n, &PolyEU::u()).commutator(&z).map_err(err)?;
        let target = boundary_magnetization::<PolyEU>(n);
        literal &= hz == target;
        half &= hz == target.scale_small(-1, 2);
    }
    Ok((
        literal,
        format!("[H, Z] equals -1/2 (sz1 + tz1 - szn - tzn) for n = 2..5: {half}"),
    ))
}

fn symmetry_scalars(c: &Construction) -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for n in 2..=5 {
        let p = exact(n, g(1), g(4));
        let rho = build_rho(&build_s(&p, c).map_err(err)?, Exec::default());
        let tm = TransferMatrix::new(&p, c).map_err(err)?;
        let report = symmetry_checks(&rho, &tm, Exec::default()).map_err(err)?;
        ok &= report.commutes_number_up && report.commutes_number_down;
        if n <= 4 {
            ok &= Scalar::is_zero(&report.trace_spin_z) && Scalar::is_zero(&report.trace_eta_z);
            let casimir = report.casimir_ratio == report.expected_casimir();
            ok &= casimir;
            notes.push(format!(
                "n={n} Casimir {} vs 3n/8 = {}",
                report.casimir_ratio.format_real(),
                report.expected_casimir().format_real()
            ));
        }
    }
    let s6 = build_s(&ModelParams::symbolic(6), c).map_err(err)?;
    let n6 = [true, false]
        .iter()
        .all(|up| s6.commutator(&number_operator(6, *up)).is_ok_and(|x| x.is_zero()));
    ok &= n6;
    notes.push(format!("[rho, N] = 0 for n <= 5, [S_6, N] = 0 {n6}"));
    Ok((ok, notes.join(", ")))
}

fn filling(c: &Construction) -> Outcome {
    for n in 2..=5 {
        for (e, u) in [(g(1), g(0)), (g(1), g(4)), (GaussianRational::real(rat(1, 2)), g(2))] {
            let tm = TransferMatrix::new(&exact(n, e, u), c).map_err(err)?;
            let up = tm.expectation(&number_operator(n, true)).map_err(err)?;
            let down = tm.expectation(&number_operator(n, false)).map_err(err)?;
            let density = &up + &down;
            let magnetization = tm.expectation(&spin_z(n)).map_err(err)?;
            if density != g(n as i64) || up != down || !Scalar::is_zero(&magnetization) {
                return Ok((false, format!("n = {n}: density {density}, magnetization {magnetization}")));
            }
        }
    }
    Ok((true, "<N> = n and <S^z> = 0 exactly for n = 2..5 at three points".into()))
}

fn random_operator(rng: &mut ChaCha8Rng) -> SparseOp<GaussianRational> {
    let terms = rng.random_range(1..=6);
    SparseOp::from_terms(
        3,
        (0..terms).map(|_| {
            let labels: Vec<SiteLabel> = (0..3).map(|_| SiteLabel::from_code(rng.random_range(0..16))).collect();
            let coeff = GaussianRational::new(rat(rng.random_range(-5..=5), rng.random_range(1..=4)), rat(rng.random_range(-5..=5), 1));
            (PauliString::from_labels(&labels), coeff)
        }),
    )
}

fn oracle_equivalences(c: &Construction) -> Outcome {
    for n in 1..=6 {
        build_s_checked(&ModelParams::symbolic(n), c, Exec::default()).map_err(err)?;
    }
    let mut probes = 0;
    for n in 2..=5 {
        let p = exact(n, g(1), g(4));
        let s = build_s(&p, c).map_err(err)?;
        let tm = TransferMatrix::new(&p, c).map_err(err)?;
        let mut ops = vec![
            SparseOp::identity(n),
            spin_z(n),
            spin_casimir(n),
            current_operator(n, 0, true),
            current_operator(n, n - 2, false),
        ];
        ops.push(hamiltonian(n, &g(4)));
        for op in &ops {
            probes += 1;
            if tm.trace_with(op).map_err(err)? != direct_trace(&s, op).map_err(err)? {
                return Ok((false, format!("transfer vs dense trace differ at n = {n}")));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for case in 0..RANDOM_CASES {
        let (a, b) = (random_operator(&mut rng), random_operator(&mut rng));
        let sparse = a.mul(&b).map_err(err)?.to_dense().map_err(err)?;
        let dense = a.to_dense().map_err(err)?.matmul(&b.to_dense().map_err(err)?);
        if sparse != dense {
            return Ok((false, format!("sparse product differs from dense in case {case}")));
        }
    }
    Ok((
        true,
        format!("walks = MPO for n <= 6 symbolically, {probes} transfer traces exact, {RANDOM_CASES} random products"),
    ))
}

fn spread<C: FieldScalar>(values: &[C]) -> f64 {
    let as_f64 = |v: &C| v.format_real().parse::<f64>().unwrap_or(f64::NAN);
    let first = as_f64(&values[0]);
    values.iter().map(|v| (as_f64(v) - first).abs()).fold(0.0, f64::max) / first.abs()
}

fn current_uniformity(c: &Construction) -> Outcome {
    for n in 2..=4 {
        let tm = TransferMatrix::new(&exact(n, g(1), g(4)), c).map_err(err)?;
        let rows = current_profiles(&tm, Exec::default()).map_err(err)?;
        if rows.iter().any(|r| r.j_sigma != rows[0].j_sigma || r.j_tau != rows[0].j_tau) {
            return Ok((false, format!("exact currents differ across bonds at n = {n}")));
        }
    }
    let mut worst: f64 = 0.0;
    for n in [5usize, 6] {
        for (eps, u) in [(1.0, 4.0), (0.5, 2.0)] {
            let tm = TransferMatrix::new(&float(n, eps, u), c).map_err(err)?;
            let rows = current_profiles(&tm, Exec::default()).map_err(err)?;
            let sigma: Vec<Complex64> = rows.iter().map(|r| r.j_sigma).collect();
            let tau: Vec<Complex64> = rows.iter().map(|r| r.j_tau).collect();
            worst = worst.max(spread(&sigma)).max(spread(&tau));
        }
    }
    let continuity = (2..=6).all(continuity_identity_holds);
    Ok((
        worst < FLOAT_TOLERANCE && continuity,
        format!("exact for n <= 4, float relative spread {worst:.2e} for n = 5, 6, continuity {continuity}"),
    ))
}

fn lod(c: &Construction) -> Outcome {
    let solution = solve_lod(LOD_KMAX, 1.0, 4.0, c).map_err(err)?;
    let r = &solution.report;
    Ok((
        r.nontrivial_solution(LOD_TOLERANCE),
        format!(
            "kmax {}: {} unknowns, {} equations, rank {}, nullity {}, relative residual {:.2e} < {LOD_TOLERANCE:e}",
            r.kmax, r.unknowns, r.equations, r.rank, r.nullity, r.relative_residual
        ),
    ))
}

fn main() -> ExitCode {
    let c = Construction::default();
    let mut gate = Gate { results: Vec::new() };
    gate.info(0, &format!("amplitude table {}", c.table.content_hash()));
    gate.check(1, "fixed point, exact", || fixed_point_exact(&c));
    gate.check(2, "fixed point, float", || fixed_point_float(&c));
    gate.check(3, "defining relation", || defining_relation(&c));
    gate.check(4, "proof certificate", || proof_certificate(&c));
    gate.check(5, "coloring resolution", || coloring_resolution(&c));
    gate.check(6, "structural claims", || structure(&c));
    gate.check(7, "commuting family", || commuting_family(&c));
    gate.check(8, "Z operator commutator", || z_commutator(&c));
    gate.check(9, "symmetry scalars", || symmetry_scalars(&c));
    gate.check(10, "filling", || filling(&c));
    gate.check(11, "oracle equivalences", || oracle_equivalences(&c));
    gate.check(12, "current uniformity", || current_uniformity(&c));
    gate.check(13, "local operator divergence", || lod(&c));
    let failed: Vec<u32> = gate.results.iter().filter(|(_, p)| !p).map(|(id, _)| *id).collect();
    println!("{} of {} criteria pass; failing: {failed:?}", gate.results.len() - failed.len(), gate.results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
