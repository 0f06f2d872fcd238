//! Subcommand implementations.

use std::time::Instant;

use diracspec::clifford::{build_clifford, check_relations_exact, matrix_to_pairs, CliffordRep};
use diracspec::discretize::{assemble_bs, assemble_weighted_resolvent, build_grid, schatten_norm};
use diracspec::green::{csv_rows, green0, green0_deriv, green0_limit0, Regime};
use diracspec::linalg::{self, cnormal, ginibre_normed, op_norm};
use diracspec::potential::{MatrixPotential, PotentialSpec};
use diracspec::regdet::{product_residual, regdet};
use diracspec::resolvalg::{amplitude_sweep, sweep_dips, threshold_classify, threshold_classify_refined};
use diracspec::ssf::{
    abel_transform_split, abel_zero_limit, default_witten_schedule, ssf_boundary, ssf_counting_table, witten_index,
    MatrixPair, PairFile, SSFTable, SsfMethod, DEFAULT_EPS,
};
use diracspec::{CMat, Cplx, Real};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::input::{load, parse_json};
use crate::output::{usage, CliError, Outcome};
use crate::parse;
use crate::{AbelArgs, BenchArgs, BsArgs, CliffordArgs, DetAuditArgs, GreenArgs, MethodArg, ScanArgs, SsfArgs};
use crate::{ThresholdArgs, WittenArgs};

const DET_AUDIT_TOL: Real = 1e-9;
const WITTEN_TOL: Real = 1e-8;
const HERMITICITY_TOL: Real = 1e-10;
const ABEL_LIMIT_TOL: Real = 1e-6;

fn arg<T>(flag: &str, r: Result<T, String>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Usage(format!("--{flag}: {e}")))
}

fn point(flag: &str, s: &str, n: usize) -> Result<Vec<Real>, CliError> {
    let v = arg(flag, parse::reals(s))?;
    if v.len() != n {
        return usage(format!("--{flag}: expected {n} coordinates, got {}", v.len()));
    }
    Ok(v)
}

fn pair(z: Cplx) -> [Real; 2] {
    [z.re, z.im]
}

fn rep_for(n: usize) -> Result<CliffordRep, CliError> {
    Ok(build_clifford(n)?)
}

fn load_potential(path: &str, n: usize) -> Result<MatrixPotential, CliError> {
    let spec: PotentialSpec = load(path)?;
    if spec.n != n {
        return usage(format!("{path}: /n is {} but --n is {n}", spec.n));
    }
    Ok(MatrixPotential::new(spec)?)
}

pub fn clifford(a: &CliffordArgs) -> Result<Outcome, CliError> {
    let rep = rep_for(a.n)?;
    let matrices: Vec<_> = rep.alphas.iter().map(matrix_to_pairs).collect();
    let check = if a.check { Some(check_relations_exact(a.n)?) } else { None };
    let violation = check.as_ref().filter(|c| !c.ok()).map(|c| format!("relations fail at {:?}", c.failures));
    Outcome::checked(&json!({ "n": a.n, "N": rep.size, "matrices": matrices, "check": check }), violation)
}

/// Kernel or derivative kernel with the regime label used for it.
fn kernel(rep: &CliffordRep, z: Cplx, deriv: Option<usize>, x: &[Real], y: &[Real]) -> Result<(CMat, String), CliError> {
    let label = |r: Regime| serde_json::to_value(r).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
    if z == Cplx::new(0.0, 0.0) {
        if deriv.is_some_and(|r| r > 0) {
            return usage("--deriv needs z ≠ 0");
        }
        return Ok((green0_limit0(rep, x, y)?.value, "zero_limit".into()));
    }
    match deriv {
        Some(r) => {
            let k = green0_deriv(rep, r, z, x, y)?;
            Ok((k.value, label(k.regime)))
        }
        None => {
            let d: Real = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<Real>().sqrt();
            Ok((green0(rep, z, x, y)?.value, label(Regime::for_argument(z.norm() * d))))
        }
    }
}

fn csv_header(n: usize) -> String {
    let mut cols: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    cols.extend((1..=n).map(|i| format!("y{i}")));
    cols.extend(["entry_row", "entry_col", "re", "im"].map(String::from));
    cols.join(",")
}

pub fn green(a: &GreenArgs) -> Result<Outcome, CliError> {
    let rep = rep_for(a.n)?;
    let z = arg("z", parse::complex(&a.z))?;
    let x = point("x", &a.x, a.n)?;
    let y = point("y", &a.y, a.n)?;
    let (m, regime) = kernel(&rep, z, a.deriv, &x, &y)?;
    let mut csv = vec![csv_header(a.n)];
    csv.extend(csv_rows(&x, &y, &m));
    let result = json!({
        "n": a.n, "N": rep.size, "z": pair(z), "x": x, "y": y,
        "deriv": a.deriv.unwrap_or(0), "regime": regime, "matrix": matrix_to_pairs(&m),
    });
    Ok(Outcome { result, csv: Some(csv.join("\n") + "\n"), violation: None })
}

pub fn scan(a: &ScanArgs) -> Result<Outcome, CliError> {
    let rep = rep_for(a.n)?;
    let z = arg("z", parse::complex(&a.z))?;
    let x = point("x", &a.x, a.n)?;
    let dir = point("dir", &a.dir, a.n)?;
    let len = dir.iter().map(|v| v * v).sum::<Real>().sqrt();
    if !(len > 0.0) {
        return usage("--dir must be a nonzero vector");
    }
    let ts = arg("t", parse::range(&a.t))?;
    let mut csv = vec![csv_header(a.n)];
    let mut points = Vec::with_capacity(ts.len());
    for t in ts {
        let y: Vec<Real> = x.iter().zip(&dir).map(|(xi, d)| xi + t * d / len).collect();
        let (m, regime) = kernel(&rep, z, a.deriv, &x, &y)?;
        csv.extend(csv_rows(&x, &y, &m));
        points.push(json!({
            "t": t, "y": y, "regime": regime, "norm": op_norm(&m), "matrix": matrix_to_pairs(&m),
        }));
    }
    let result = json!({ "n": a.n, "N": rep.size, "z": pair(z), "deriv": a.deriv.unwrap_or(0), "points": points });
    Ok(Outcome { result, csv: Some(csv.join("\n") + "\n"), violation: None })
}

fn nonzero(z: Cplx) -> Option<Cplx> {
    (z != Cplx::new(0.0, 0.0)).then_some(z)
}

pub fn bs(a: &BsArgs) -> Result<Outcome, CliError> {
    let rep = rep_for(a.n)?;
    let pot = load_potential(&a.potential, a.n)?;
    let z = arg("z", parse::complex(&a.z))?;
    if !(a.r > 0.0) {
        return usage("--R must be positive");
    }
    let grid = build_grid(a.n, a.r, a.m)?;
    let op = assemble_bs(&rep, &grid, nonzero(z), &pot)?;
    let eigenvalues = match a.eig {
        Some(k) => {
            let mut e = op.eigenvalues()?;
            e.sort_by(|p, q| q.norm().total_cmp(&p.norm()));
            Some(e.into_iter().take(k).map(pair).collect::<Vec<_>>())
        }
        None => None,
    };
    let schatten = match a.schatten {
        Some(p) => Some(json!({ "p": p, "value": schatten_norm(&op.matrix, p)? })),
        None => None,
    };
    let result = json!({
        "n": a.n, "m": a.m, "R": a.r, "z": pair(z), "dimension": op.matrix.nrows(),
        "operator_norm": op.operator_norm(), "eigenvalues": eigenvalues, "schatten": schatten,
        "matrix": a.dump.then(|| matrix_to_pairs(&op.matrix)),
    });
    Outcome::ok(&result)
}

#[derive(Serialize)]
struct AuditReport {
    k: usize,
    dim: usize,
    trials: usize,
    seed: u64,
    max_residual: Real,
    mean_residual: Real,
}

pub fn det_audit(a: &DetAuditArgs, seed: u64) -> Result<Outcome, CliError> {
    if !(1..=4).contains(&a.k) {
        return usage(format!("--k must be in 1..=4, got {}", a.k));
    }
    if a.dim == 0 || a.trials == 0 {
        return usage("--dim and --trials must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut residuals = Vec::with_capacity(a.trials);
    for _ in 0..a.trials {
        let x = ginibre_normed(&mut rng, a.dim, a.dim, 0.4);
        let y = ginibre_normed(&mut rng, a.dim, a.dim, 0.4);
        residuals.push(product_residual(a.k, &x, &y)?);
    }
    let max_residual = residuals.iter().copied().fold(0.0, Real::max);
    let mean_residual = residuals.iter().sum::<Real>() / residuals.len() as Real;
    let report = AuditReport { k: a.k, dim: a.dim, trials: a.trials, seed, max_residual, mean_residual };
    let violation =
        (max_residual > DET_AUDIT_TOL).then(|| format!("max residual {max_residual:e} exceeds {DET_AUDIT_TOL:e}"));
    Outcome::checked(&report, violation)
}

pub fn ssf(a: &SsfArgs) -> Result<Outcome, CliError> {
    let file: PairFile = load(&a.pair)?;
    let pair = file.to_pair()?;
    let grid = arg("grid", parse::range(&a.grid))?;
    let oracle = ssf_counting_table(&pair, &grid)?;
    let table = match a.method {
        MethodArg::Counting => oracle.clone(),
        MethodArg::Krein => ssf_boundary(&pair, &grid, &DEFAULT_EPS, SsfMethod::KreinBoundary)?,
        MethodArg::Eqmain => {
            if a.m == 0 {
                return usage("--m must be at least 1");
            }
            ssf_boundary(&pair, &grid, &DEFAULT_EPS, SsfMethod::EqMain { m: a.m })?
        }
    };
    let mismatches: Vec<Real> = grid
        .iter()
        .zip(table.rounded().iter().zip(oracle.rounded()))
        .filter(|(_, (v, o))| matches!((v, o), (Some(v), Some(o)) if v != o))
        .map(|(l, _)| *l)
        .collect();
    let violation = (!mismatches.is_empty())
        .then(|| format!("{} grid points disagree with the counting oracle, first at λ = {}", mismatches.len(), mismatches[0]));
    Outcome::checked(&table, violation)
}

type XiFn = Box<dyn Fn(Real) -> Real>;

/// ξ as a function together with its jump locations.
fn resolve_xi(spec: &str) -> Result<(XiFn, Vec<Real>), CliError> {
    match spec {
        "step" => return Ok((Box::new(|v| if v > 0.0 { 1.0 } else { 0.0 }), vec![0.0])),
        "sign" => return Ok((Box::new(|v: Real| if v == 0.0 { 0.0 } else { v.signum() }), vec![0.0])),
        _ => {}
    }
    if let Some(rest) = spec.strip_prefix("indicator:") {
        let ends = arg("xi", parse::reals(&rest.replace(':', ",")))?;
        let [lo, hi] = ends[..] else {
            return usage("--xi indicator:a:b needs two endpoints");
        };
        if !(hi > lo) {
            return usage("--xi indicator:a:b needs b > a");
        }
        return Ok((Box::new(move |v| if lo <= v && v <= hi { 1.0 } else { 0.0 }), vec![lo, hi]));
    }
    let file: serde_json::Value = load(spec)?;
    let inner = file.get("result").unwrap_or(&file);
    let table: SSFTable = parse_json(&inner.to_string(), spec)?;
    table_xi(&table)
}

/// Nearest safe sample inside the tabulated range, zero outside it.
fn table_xi(table: &SSFTable) -> Result<(XiFn, Vec<Real>), CliError> {
    if table.lambda.len() != table.xi.len() {
        return usage("SSF table: /lambda and /xi differ in length");
    }
    let samples: Vec<(Real, Real)> =
        table.lambda.iter().zip(&table.xi).filter_map(|(l, x)| x.map(|x| (*l, x))).collect();
    if samples.is_empty() {
        return usage("SSF table has no safe samples");
    }
    let (first, last) = (samples[0].0, samples[samples.len() - 1].0);
    let mut breaks = vec![first, last];
    breaks.extend(samples.windows(2).filter(|w| w[0].1 != w[1].1).map(|w| 0.5 * (w[0].0 + w[1].0)));
    let f = move |v: Real| {
        if v < first || v > last {
            return 0.0;
        }
        let k = samples.partition_point(|s| s.0 < v);
        match (k.checked_sub(1).map(|i| samples[i]), samples.get(k).copied()) {
            (Some(lo), Some(hi)) => {
                if v - lo.0 <= hi.0 - v {
                    lo.1
                } else {
                    hi.1
                }
            }
            (Some(s), None) | (None, Some(s)) => s.1,
            (None, None) => 0.0,
        }
    };
    Ok((Box::new(f), breaks))
}

pub fn abel(a: &AbelArgs) -> Result<Outcome, CliError> {
    let (xi, breaks) = resolve_xi(&a.xi)?;
    if a.lambda.is_none() && !a.limit {
        return usage("missing required parameter: give --lambda, --limit or both");
    }
    let lambdas = match &a.lambda {
        Some(s) => arg("lambda", parse::reals(s))?,
        None => Vec::new(),
    };
    let values = lambdas
        .iter()
        .map(|&l| Ok(json!({ "lambda": l, "value": abel_transform_split(&xi, l, &breaks)? })))
        .collect::<Result<Vec<_>, CliError>>()?;
    let limit = if a.limit { Some(abel_zero_limit(&xi, ABEL_LIMIT_TOL)?) } else { None };
    Outcome::ok(&json!({ "xi": a.xi, "values": values, "limit": limit }))
}

pub fn witten(a: &WittenArgs, seed: u64) -> Result<Outcome, CliError> {
    if a.rows == 0 || a.cols == 0 {
        return usage("--rows and --cols must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = CMat::from_fn(a.rows, a.cols, |_, _| cnormal(&mut rng));
    let w = witten_index(&t, a.k, &default_witten_schedule())?;
    let expected = a.cols as Real - a.rows as Real;
    let err = (w.extrapolated - expected).abs();
    let violation = (err > WITTEN_TOL).then(|| format!("index {} differs from cols − rows = {expected}", w.extrapolated));
    let variance = w.variance();
    Outcome::checked(
        &json!({
            "rows": a.rows, "cols": a.cols, "k": w.k, "lambda_schedule": w.lambda_schedule,
            "scaled_traces": w.scaled_traces, "extrapolated": w.extrapolated,
            "expected": expected, "variance": variance,
        }),
        violation,
    )
}

pub fn threshold(a: &ThresholdArgs) -> Result<Outcome, CliError> {
    let rep = rep_for(a.n)?;
    let pot = load_potential(&a.potential, a.n)?;
    if !(a.r > 0.0) {
        return usage("--R must be positive");
    }
    let grid = build_grid(a.n, a.r, a.m)?;
    let report = if a.refine {
        threshold_classify_refined(&rep, &pot, a.r, a.m, a.tol)?
    } else {
        threshold_classify(&rep, &grid, &pot, a.tol)?
    };
    let (sweep, dips) = match &a.sweep {
        Some(s) => {
            let amps = arg("sweep", parse::range(s))?;
            let sweep = amplitude_sweep(&rep, &grid, &pot, &amps)?;
            let dips = sweep_dips(&sweep);
            (Some(sweep), Some(dips))
        }
        None => (None, None),
    };
    let violation = (report.hermiticity_residual > HERMITICITY_TOL)
        .then(|| format!("hermiticity residual {:e} exceeds {HERMITICITY_TOL:e}", report.hermiticity_residual));
    Outcome::checked(&json!({ "report": report, "sweep": sweep, "dips": dips }), violation)
}

fn time<F: FnMut()>(reps: usize, mut f: F) -> (Real, Real) {
    let samples: Vec<Real> = (0..reps)
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed().as_secs_f64()
        })
        .collect();
    let min = samples.iter().copied().fold(Real::INFINITY, Real::min);
    (min, samples.iter().sum::<Real>() / reps as Real)
}

pub fn bench(a: &BenchArgs, seed: u64) -> Result<Outcome, CliError> {
    if a.reps == 0 {
        return usage("--reps must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rep3 = rep_for(3)?;
    let rep2 = rep_for(2)?;
    let x = [0.3, -0.2, 0.5];
    let ys: Vec<[Real; 3]> = (0..1000).map(|k| [k as Real * 1e-3, 1.0, -0.5]).collect();
    let mats: Vec<CMat> = (0..100).map(|_| ginibre_normed(&mut rng, 6, 6, 0.5)).collect();
    let grid = build_grid(2, 3.0, 12)?;
    let pair = MatrixPair::random(&mut rng, 8, 1.0, 0.5);
    let lambdas = parse::range("-4:4:100").map_err(CliError::Usage)?;
    let z = Cplx::new(0.4, 1.0);

    let mut failure: Option<CliError> = None;
    let mut record = |e: diracspec::Error| failure = Some(e.into());
    let mut items = Vec::new();
    let mut push = |name: &str, (min, mean): (Real, Real)| {
        items.push(json!({ "name": name, "seconds_min": min, "seconds_mean": mean }))
    };
    push("green0 n=3, 1000 point pairs", time(a.reps, || {
        for y in &ys {
            if let Err(e) = green0(&rep3, z, &x, y) {
                record(e);
            }
        }
    }));
    push("regdet k=2 on 6×6, 100 matrices", time(a.reps, || {
        for m in &mats {
            if let Err(e) = regdet(2, m) {
                record(e);
            }
        }
    }));
    push("weighted resolvent n=2, 12 nodes per axis", time(a.reps, || {
        if let Err(e) = assemble_weighted_resolvent(&rep2, &grid, Some(z), 1.1) {
            record(e);
        }
    }));
    push("krein ssf 8×8 on 101 points", time(a.reps, || {
        if let Err(e) = ssf_boundary(&pair, &lambdas, &DEFAULT_EPS, SsfMethod::KreinBoundary) {
            record(e);
        }
    }));
    push("operator norm 256×256", {
        let m = CMat::from_fn(256, 256, |_, _| cnormal(&mut rng));
        time(a.reps, || {
            std::hint::black_box(linalg::op_norm(&m));
        })
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Outcome::ok(&json!({ "reps": a.reps, "workers": rayon::current_num_threads(), "items": items }))
}
