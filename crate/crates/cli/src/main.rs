use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use hubbard_ness::amplitudes::{validate_table, AmplitudeTable};
use hubbard_ness::exact::{format_rational, parse_rational, Complex64, FieldScalar, GaussianRational, PolyEU, Rational, Scalar};
use hubbard_ness::graph::{build_graph, Coloring};
use hubbard_ness::lod::solve_lod;
use hubbard_ness::ness::{
    boundary_magnetization, build_rho, build_s, build_s_checked, commuting_family_at, hamiltonian,
    lindblad_apply, max_degrees, relative_norm, schmidt_bound, schmidt_ranks, z_operator, Construction,
    ModelParams,
};
use hubbard_ness::observables::{
    current_csv, current_profiles, site_csv, site_profiles, symmetry_checks, TransferMatrix,
};
use hubbard_ness::par::Exec;
use hubbard_ness::pauli::SparseOp;
use hubbard_ness::proof::{resolve_coloring, run_proof};

const FLOAT_TOLERANCE: f64 = 1e-10;
const LOD_TOLERANCE: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(name = "hubbard-ness", about = "Exact steady state of the boundary-driven Hubbard chain", disable_version_flag = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Print the version and the amplitude-table hash.
    #[arg(short = 'V', long)]
    version: bool,

    /// Chain length.
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Dissipation strength, `p/q` (exact) or a decimal (forces float mode).
    #[arg(long, global = true, allow_hyphen_values = true)]
    eps: Option<String>,

    /// Interaction strength, `p/q` (exact) or a decimal (forces float mode).
    #[arg(long, global = true, allow_hyphen_values = true)]
    u: Option<String>,

    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,

    /// Level bound for local conditions and coloring resolution (default 28),
    /// or for the LOD truncation (default 6).
    #[arg(long = "k-max", global = true)]
    k_max: Option<u32>,

    /// Output file (directory for `observe`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for randomized property sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// JSON map `{"U1": "white", ...}` pinning the node coloring.
    #[arg(long, global = true)]
    coloring: Option<PathBuf>,

    /// Disable the worker pool.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build S_n and print its Pauli-string expansion.
    Build,
    #[command(subcommand)]
    Verify(Verify),
    /// Site and bond profiles as CSV.
    Observe,
    /// Screen all per-level colorings and report the survivors.
    ResolveColoring,
    /// Least-squares search for the local divergence companion operator.
    Lod,
    /// Print the amplitude table as printed, with a consistency check.
    Audit,
}

#[derive(Subcommand, Debug)]
enum Verify {
    /// L(rho) = 0 exactly, or to relative 1e-10 in float mode.
    FixedPoint,
    /// Bulk and boundary local conditions up to --k-max, with a certificate.
    LocalConditions,
    /// Structural and symmetry properties of S_n and rho.
    Properties,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Exact,
    Float,
}

#[derive(Debug, Clone)]
enum Param {
    Exact(Rational),
    Float(f64),
}

impl Param {
    fn parse(text: &str) -> Result<Self, String> {
        if text.contains(['.', 'e', 'E']) {
            text.parse::<f64>().map(Param::Float).map_err(|e| format!("bad number {text:?}: {e}"))
        } else {
            parse_rational(text).map(Param::Exact).map_err(|e| e.to_string())
        }
    }

    fn as_f64(&self) -> f64 {
        match self {
            Param::Exact(r) => hubbard_ness::exact::to_f64(r),
            Param::Float(x) => *x,
        }
    }

    fn as_exact(&self) -> Option<GaussianRational> {
        match self {
            Param::Exact(r) => Some(GaussianRational::real(r.clone())),
            Param::Float(_) => None,
        }
    }
}

/// Parameters after flag validation.
#[allow(clippy::large_enum_variant)]
enum Point {
    Symbolic,
    Exact(GaussianRational, GaussianRational),
    Float(f64, f64),
}

enum Failure {
    Usage(String),
    Check(String),
}

impl From<hubbard_ness::error::NessError> for Failure {
    fn from(e: hubbard_ness::error::NessError) -> Self {
        match e {
            hubbard_ness::error::NessError::PathDisagreement(_) => Failure::Check(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<hubbard_ness::error::OperatorError> for Failure {
    fn from(e: hubbard_ness::error::OperatorError) -> Self {
        Failure::Usage(e.to_string())
    }
}

struct Context {
    n: Option<usize>,
    eps: Option<Param>,
    u: Option<Param>,
    mode: Option<Mode>,
    k_max: Option<u32>,
    out: Option<PathBuf>,
    seed: u64,
    construction: Construction,
    exec: Exec,
}

impl Context {
    fn from_cli(cli: &Cli) -> Result<Self, Failure> {
        let eps = cli.eps.as_deref().map(Param::parse).transpose().map_err(Failure::Usage)?;
        let u = cli.u.as_deref().map(Param::parse).transpose().map_err(Failure::Usage)?;
        let coloring = match &cli.coloring {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                Coloring::from_json(&text).map_err(|e| Failure::Usage(e.to_string()))?
            }
            None => Coloring::default(),
        };
        if cli.n == Some(0) {
            return Err(Failure::Usage("--n must be at least 1".into()));
        }
        Ok(Self {
            n: cli.n,
            eps,
            u,
            mode: cli.mode,
            k_max: cli.k_max,
            out: cli.out.clone(),
            seed: cli.seed,
            construction: Construction::new(coloring, AmplitudeTable::default()),
            exec: if cli.sequential { Exec::Sequential } else { Exec::default() },
        })
    }

    fn n(&self) -> Result<usize, Failure> {
        self.n.ok_or_else(|| Failure::Usage("--n is required".into()))
    }

    /// `None` parameters fall back to `default`, or stay symbolic when `default` is `None`.
    fn point(&self, default: Option<(i64, i64)>) -> Result<Point, Failure> {
        let (eps, u) = match (&self.eps, &self.u, default) {
            (None, None, None) => {
                return match self.mode {
                    Some(Mode::Float) => Err(Failure::Usage("float mode needs --eps and --u".into())),
                    _ => Ok(Point::Symbolic),
                }
            }
            (Some(e), Some(u), _) => (e.clone(), u.clone()),
            (e, u, Some((de, du))) => (
                e.clone().unwrap_or(Param::Exact(Rational::from_integer(de.into()))),
                u.clone().unwrap_or(Param::Exact(Rational::from_integer(du.into()))),
            ),
            _ => return Err(Failure::Usage("give both --eps and --u, or neither".into())),
        };
        let forced = matches!(eps, Param::Float(_)) || matches!(u, Param::Float(_));
        if forced || self.mode == Some(Mode::Float) {
            return Ok(Point::Float(eps.as_f64(), u.as_f64()));
        }
        Ok(Point::Exact(eps.as_exact().expect("exact"), u.as_exact().expect("exact")))
    }

    fn params_json(point: &Point) -> Value {
        match point {
            Point::Symbolic => json!({"mode": "symbolic"}),
            Point::Exact(e, u) => json!({
                "mode": "exact",
                "eps": format_rational(&e.re),
                "u": format_rational(&u.re),
            }),
            Point::Float(e, u) => json!({"mode": "float", "eps": e, "u": u}),
        }
    }

    fn emit(&self, text: &str) -> Result<(), Failure> {
        match &self.out {
            Some(path) => write_file(path, text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("json value");
    text.push('\n');
    text
}

fn float_json(c: &Complex64) -> Value {
    json!([c.re, c.im])
}

fn terms_json<C: Scalar>(op: &SparseOp<C>, coeff: impl Fn(&C) -> Value) -> Value {
    Value::Array(op.iter().map(|(s, c)| json!({"string": s.to_string(), "coeff": coeff(c)})).collect())
}

fn cmd_build(ctx: &Context) -> Result<(), Failure> {
    let n = ctx.n()?;
    let point = ctx.point(None)?;
    let (count, terms) = match &point {
        Point::Symbolic => {
            let s = build_s(&ModelParams::symbolic(n), &ctx.construction)?;
            (s.num_terms(), terms_json(&s, |c| serde_json::to_value(c).expect("poly")))
        }
        Point::Exact(e, u) => {
            let s = build_s(&ModelParams::new(n, e.clone(), u.clone()), &ctx.construction)?;
            (s.num_terms(), terms_json(&s, |c| serde_json::to_value(c).expect("rational")))
        }
        Point::Float(e, u) => {
            let p = ModelParams::new(n, Complex64::new(*e, 0.0), Complex64::new(*u, 0.0));
            let s = build_s(&p, &ctx.construction)?;
            (s.num_terms(), terms_json(&s, float_json))
        }
    };
    let mut out = json!({"n": n, "num_terms": count, "terms": terms});
    merge(&mut out, Context::params_json(&point));
    ctx.emit(&pretty(&out))
}

fn merge(target: &mut Value, extra: Value) {
    if let (Value::Object(t), Value::Object(e)) = (target, extra) {
        t.extend(e);
    }
}

fn cmd_fixed_point(ctx: &Context) -> Result<(), Failure> {
    let n = ctx.n()?;
    let point = ctx.point(None)?;
    let mut out = json!({"n": n});
    let passed = match &point {
        Point::Symbolic => {
            let p = ModelParams::symbolic(n);
            let rho = build_rho(&build_s(&p, &ctx.construction)?, ctx.exec);
            let residual = lindblad_apply(&rho, &p, ctx.exec)?;
            merge(&mut out, json!({"residual_terms": residual.num_terms()}));
            residual.is_zero()
        }
        Point::Exact(e, u) => {
            let p = ModelParams::new(n, e.clone(), u.clone());
            let rho = build_rho(&build_s(&p, &ctx.construction)?, ctx.exec);
            let residual = lindblad_apply(&rho, &p, ctx.exec)?;
            merge(&mut out, json!({"residual_terms": residual.num_terms()}));
            residual.is_zero()
        }
        Point::Float(e, u) => {
            let p = ModelParams::new(n, Complex64::new(*e, 0.0), Complex64::new(*u, 0.0));
            let rho = build_rho(&build_s(&p, &ctx.construction)?, ctx.exec);
            let residual = lindblad_apply(&rho, &p, ctx.exec)?;
            let rel = relative_norm(&residual, &rho);
            merge(&mut out, json!({"relative_residual": rel, "tolerance": FLOAT_TOLERANCE}));
            rel < FLOAT_TOLERANCE
        }
    };
    merge(&mut out, Context::params_json(&point));
    merge(&mut out, json!({"passed": passed}));
    ctx.emit(&pretty(&out))?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Check("steady-state residual is nonzero".into()))
    }
}

fn cmd_local_conditions(ctx: &Context) -> Result<(), Failure> {
    let kmax = ctx.k_max.unwrap_or(28);
    let (cert, elapsed) = run_proof(kmax, ctx.construction.coloring, ctx.construction.table, ctx.exec)?;
    eprintln!("local conditions up to level {kmax}: {:.3} s", elapsed.as_secs_f64());
    ctx.emit(&pretty(&serde_json::to_value(&cert).expect("certificate")))?;
    match cert.violations.first() {
        None => Ok(()),
        Some(v) => Err(Failure::Check(format!(
            "{} condition(s) nonzero; first: {:?} {} -> {} defect {}",
            cert.violations.len(),
            v.kind,
            v.from,
            v.to,
            v.defect
        ))),
    }
}

fn random_rational(rng: &mut ChaCha8Rng) -> GaussianRational {
    let num = rng.random_range(1..=40);
    let den = rng.random_range(1..=9);
    GaussianRational::frac(num, den)
}

fn cmd_properties(ctx: &Context) -> Result<(), Failure> {
    let n = ctx.n.unwrap_or(4);
    let (eps, u) = match ctx.point(Some((1, 4)))? {
        Point::Exact(e, u) => (e, u),
        _ => return Err(Failure::Usage("verify properties needs exact parameters".into())),
    };
    let c = &ctx.construction;
    let mut checks: Vec<Value> = Vec::new();
    let mut record = |name: &str, passed: bool, detail: Value| {
        checks.push(json!({"name": name, "passed": passed, "detail": detail}));
    };

    let symbolic = build_s_checked(&ModelParams::symbolic(n), c, ctx.exec)?;
    record("mpo_walk_agreement", true, json!({"terms": symbolic.num_terms()}));
    record("ballot", symbolic.ballot_check(), Value::Null);
    let (de, du) = max_degrees(&symbolic);
    record("degree_bounds", de <= 2 * n as i64 && du <= n as i64, json!({"eps": de, "u": du}));

    let params = ModelParams::new(n, eps.clone(), u.clone());
    let s = build_s(&params, c)?;
    let ranks = schmidt_ranks(&s);
    let bound = schmidt_bound(n);
    record("schmidt_bound", ranks.iter().all(|r| *r <= bound), json!({"ranks": ranks, "bound": bound}));

    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut commuting = true;
    let mut samples = Vec::new();
    for _ in 0..4 {
        let (a, b, w) = (random_rational(&mut rng), random_rational(&mut rng), random_rational(&mut rng));
        commuting &= commuting_family_at(n, &a, &b, &w, c)?;
        samples.push(json!([a.to_string(), b.to_string(), w.to_string()]));
    }
    record("commuting_family", commuting, json!({"samples": samples}));

    let z = z_operator(&symbolic);
    let hz = hamiltonian(n, &PolyEU::u()).commutator(&z)?;
    let target = boundary_magnetization::<PolyEU>(n);
    let half = hz == target.scale_small(-1, 2);
    record("z_commutator", hz == target, json!({"equals_minus_half_boundary_magnetization": half}));

    if n <= 5 {
        let rho = build_rho(&s, ctx.exec);
        let tm = TransferMatrix::new(&params, c)?;
        let report = symmetry_checks(&rho, &tm, ctx.exec)?;
        let traces = Scalar::is_zero(&report.trace_spin_z) && Scalar::is_zero(&report.trace_eta_z);
        record("symmetry_commutators", report.commutators_vanish(), Value::Null);
        record(
            "symmetry_traces",
            traces,
            json!({
                "casimir_ratio": report.casimir_ratio.to_string(),
                "identity_state_casimir": report.expected_casimir().to_string(),
            }),
        );
    }

    let failed: Vec<String> = checks
        .iter()
        .filter(|v| v["passed"] == json!(false))
        .map(|v| v["name"].as_str().unwrap_or_default().to_string())
        .collect();
    let mut out = json!({"n": n, "seed": ctx.seed, "checks": checks});
    merge(&mut out, Context::params_json(&Point::Exact(eps, u)));
    ctx.emit(&pretty(&out))?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("failed: {}", failed.join(", "))))
    }
}

fn observe_with<C: FieldScalar>(ctx: &Context, params: ModelParams<C>) -> Result<(), Failure> {
    let tm = TransferMatrix::new(&params, &ctx.construction)?;
    let sites = site_csv(&site_profiles(&tm, ctx.exec)?);
    let bonds = if params.n >= 2 { current_csv(&current_profiles(&tm, ctx.exec)?) } else { String::new() };
    match &ctx.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
            write_file(&dir.join("sites.csv"), &sites)?;
            if !bonds.is_empty() {
                write_file(&dir.join("currents.csv"), &bonds)?;
            }
        }
        None => {
            print!("{sites}");
            if !bonds.is_empty() {
                print!("\n{bonds}");
            }
        }
    }
    Ok(())
}

fn cmd_observe(ctx: &Context) -> Result<(), Failure> {
    let n = ctx.n()?;
    match ctx.point(Some((1, 4)))? {
        Point::Exact(e, u) => observe_with(ctx, ModelParams::new(n, e, u)),
        Point::Float(e, u) => observe_with(ctx, ModelParams::new(n, Complex64::new(e, 0.0), Complex64::new(u, 0.0))),
        Point::Symbolic => unreachable!("defaults supplied"),
    }
}

fn cmd_resolve(ctx: &Context) -> Result<(), Failure> {
    let kmax = ctx.k_max.unwrap_or(28);
    let start = Instant::now();
    let resolution = resolve_coloring(kmax, ctx.exec);
    eprintln!("coloring resolution up to level {kmax}: {:.3} s", start.elapsed().as_secs_f64());
    let chosen = resolution.unique();
    let report = json!({
        "resolution": resolution,
        "pinned": chosen.map(|c| c.to_map()),
        "coloring_hash": chosen.map(|c| c.content_hash()),
        "amplitude_hash": ctx.construction.table.content_hash(),
    });
    match (&ctx.out, chosen) {
        (Some(path), Some(c)) => {
            write_file(path, &format!("{}\n", c.to_json()))?;
            print!("{}", pretty(&report));
        }
        _ => print!("{}", pretty(&report)),
    }
    match chosen {
        Some(_) => Ok(()),
        None => Err(Failure::Check("no unique coloring survives".into())),
    }
}

fn cmd_lod(ctx: &Context) -> Result<(), Failure> {
    let kmax = ctx.k_max.unwrap_or(6);
    let (eps, u) = match ctx.point(Some((1, 4)))? {
        Point::Exact(e, u) => (e.to_complex().re, u.to_complex().re),
        Point::Float(e, u) => (e, u),
        Point::Symbolic => unreachable!("defaults supplied"),
    };
    let solution = solve_lod(kmax, eps, u, &ctx.construction)?;
    let mut out = serde_json::to_value(&solution.report).expect("report");
    merge(&mut out, json!({
        "tolerance": LOD_TOLERANCE,
        "nontrivial_solution": solution.report.nontrivial_solution(LOD_TOLERANCE),
    }));
    ctx.emit(&pretty(&out))
}

fn cmd_audit(ctx: &Context) -> Result<(), Failure> {
    let kmax = ctx.k_max.unwrap_or(8);
    let verbatim = AmplitudeTable::verbatim();
    let graph = build_graph(kmax, ctx.construction.coloring).map_err(|e| Failure::Usage(e.to_string()))?;
    let report = validate_table(&graph, &verbatim);
    let out = json!({
        "amplitude_hash": ctx.construction.table.content_hash(),
        "printed_table": verbatim.audit(kmax),
        "edges_checked": report.edges_checked,
        "issues": report.issues,
    });
    ctx.emit(&pretty(&out))?;
    if report.is_ok() {
        Ok(())
    } else {
        Err(Failure::Check("amplitude table inconsistent".into()))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if cli.version {
        println!(
            "hubbard-ness {} amplitude-table {}",
            env!("CARGO_PKG_VERSION"),
            AmplitudeTable::default().content_hash()
        );
        return Ok(());
    }
    let ctx = Context::from_cli(&cli)?;
    match cli.command {
        None => Err(Failure::Usage("a subcommand is required; see --help".into())),
        Some(Command::Build) => cmd_build(&ctx),
        Some(Command::Verify(Verify::FixedPoint)) => cmd_fixed_point(&ctx),
        Some(Command::Verify(Verify::LocalConditions)) => cmd_local_conditions(&ctx),
        Some(Command::Verify(Verify::Properties)) => cmd_properties(&ctx),
        Some(Command::Observe) => cmd_observe(&ctx),
        Some(Command::ResolveColoring) => cmd_resolve(&ctx),
        Some(Command::Lod) => cmd_lod(&ctx),
        Some(Command::Audit) => cmd_audit(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
