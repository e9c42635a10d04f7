use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use embedlab::access::{
    accessible_with_memory, extremal_path_evolve, majorises, qubit_memory_classical_interval,
    qubit_memoryless_classical_interval, qubit_monotones, uniform_fixed_point_path, BlochState,
};
use embedlab::cost::{
    function_stats, quantum_realization_of_function, tradeoff_table, typicality_sample, widen,
    ClassicalCost, FunctionMap, NamedFunction,
};
use embedlab::embed::{
    check_circulant3, check_embeddable_2x2, check_goodman, check_unistochastic_search, EmbedStatus,
    EmbedVerdict, SearchOptions, MAX_SEARCH_DIM,
};
use embedlab::io::{
    function_from_json, generator_to_json, prob_from_json, realization_to_json, stochastic_from_json, stochastic_to_json,
    DurationJson,
};
use embedlab::qembed::{
    classify_circulant_point, compose_markovian, decompose_2x2, permutation_realization,
    unistochastic_channel, CirculantClass, MarkovianRealization, Stage,
};
use embedlab::thermo::{audit_trajectory, EnergySpec};
use embedlab::{DensityMatrix, ProbVector, StochasticMatrix};

use crate::output::{read_file, CliError, Sink};
use crate::{
    AccessRegionArgs, Cli, Command, CostTableArgs, EmbedCheckArgs, FreeEnergyAuditArgs, Format,
    MatrixSource, Outcome, QembedArgs, QubitPathArgs, RegionScanArgs, TypicalityArgs,
};

type Res<T> = Result<T, CliError>;

pub fn dispatch(cli: &Cli, sink: &mut Sink) -> Res<Outcome> {
    let table_format = cli.format.unwrap_or(Format::Csv);
    let json_only = || -> Res<()> {
        match cli.format {
            Some(Format::Csv) => Err(CliError::new("usage", "this command only emits JSON")),
            _ => Ok(()),
        }
    };
    match &cli.command {
        Command::EmbedCheck(a) => {
            json_only()?;
            embed_check(a, sink)
        }
        Command::Qembed(a) => {
            json_only()?;
            qembed(a, cli.seed, sink)
        }
        Command::RegionScan(a) => region_scan(a, table_format, sink),
        Command::CostTable(a) => cost_table(a, table_format, sink),
        Command::Typicality(a) => {
            json_only()?;
            typicality(a, cli.seed, sink)
        }
        Command::AccessRegion(a) => {
            json_only()?;
            access_region(a, sink)
        }
        Command::QubitPath(a) => qubit_path(a, table_format, sink),
        Command::FreeEnergyAudit(a) => free_energy_audit(a, table_format, sink),
    }
}

/// The matrix and, for circulant input, its `(a, b)` parameters.
fn load_matrix(src: &MatrixSource) -> Res<(StochasticMatrix, Option<(f64, f64)>)> {
    if let Some(ab) = &src.circulant {
        let (a, b) = (ab[0], ab[1]);
        check_circulant3(a, b)?;
        return Ok((StochasticMatrix::circulant3(a.max(0.0), b.max(0.0))?, Some((a, b))));
    }
    let path = src.matrix.as_ref().expect("clap enforces one source");
    let p = stochastic_from_json(&read_file(path)?)?;
    let ab = circulant_params(&p);
    Ok((p, ab))
}

/// `(a, b)` when `p` is exactly a 3×3 circulant.
fn circulant_params(p: &StochasticMatrix) -> Option<(f64, f64)> {
    if p.dim() != 3 {
        return None;
    }
    let (a, b) = (p.get(0, 1), p.get(0, 2));
    let c = StochasticMatrix::circulant3(a, b).ok()?;
    (c.max_abs_diff(p) <= 1e-12).then_some((a, b))
}

fn is_deterministic(p: &StochasticMatrix) -> bool {
    let d = p.dim();
    (0..d).all(|j| (0..d).all(|i| p.get(i, j) == 0.0 || p.get(i, j) == 1.0))
}

fn verdict_for(p: &StochasticMatrix, circ: Option<(f64, f64)>) -> Res<EmbedVerdict> {
    if let Some((a, b)) = circ {
        return Ok(check_circulant3(a, b)?);
    }
    if p.dim() == 2 {
        return Ok(check_embeddable_2x2(p)?);
    }
    let mut v = check_goodman(p);
    if v.status == EmbedStatus::NecessaryOnlyPass && p.is_identity(0.0) {
        v.status = EmbedStatus::Embeddable;
        v.witness = Some(Vec::new());
    }
    Ok(v)
}

#[derive(Serialize)]
struct WitnessStage {
    generator: embedlab::io::MatrixJson,
    duration: DurationJson,
}

fn embed_check(args: &EmbedCheckArgs, sink: &mut Sink) -> Res<Outcome> {
    let (p, circ) = load_matrix(&args.source)?;
    let v = verdict_for(&p, circ)?;
    let witness: Option<Vec<WitnessStage>> = v.witness.as_ref().map(|s| {
        s.iter()
            .map(|(g, t)| WitnessStage {
                generator: generator_to_json(g),
                duration: (*t).into(),
            })
            .collect()
    });
    let out = json!({
        "d": p.dim(),
        "status": v.status,
        "reason": v.reason,
        "witness": witness,
        "witness_error": v.witness_error(&p)?,
    });
    sink.json(&out)?;
    Ok(if v.status == EmbedStatus::NotEmbeddable {
        Outcome::Negative
    } else {
        Outcome::Positive
    })
}

fn classical_realization(p: &StochasticMatrix, circ: (f64, f64), t_trunc: f64) -> Res<MarkovianRealization> {
    let v = check_circulant3(circ.0, circ.1)?;
    let stages = v
        .witness
        .unwrap_or_default()
        .into_iter()
        .map(|(generator, duration)| Stage::Classical { generator, duration })
        .collect();
    Ok(MarkovianRealization::new(stages, p.clone(), t_trunc)?)
}

/// Cheapest construction found for `p`, with a label naming it.
fn realize(p: &StochasticMatrix, circ: Option<(f64, f64)>, seed: u64, t_trunc: f64) -> Res<Option<(&'static str, MarkovianRealization)>> {
    let d = p.dim();
    if p.is_identity(0.0) {
        return Ok(Some(("identity", MarkovianRealization::identity(d))));
    }
    if is_deterministic(p) {
        let table = (0..d).map(|j| (0..d).position(|i| p.get(i, j) == 1.0).unwrap_or(0)).collect();
        let f = FunctionMap::new(table)?;
        return Ok(Some(("function", quantum_realization_of_function(&f, t_trunc)?)));
    }
    if d == 2 {
        return Ok(Some(("two_level", decompose_2x2(p)?)));
    }
    if let Some((a, b)) = circ {
        match classify_circulant_point(a, b)? {
            CirculantClass::ClassicalEmbeddable => {
                return Ok(Some(("classical", classical_realization(p, (a, b), t_trunc)?)));
            }
            CirculantClass::QuantumViaPermutedClassical => {
                for shift in [[1, 2, 0], [2, 0, 1]] {
                    let pp = StochasticMatrix::from_function(&shift)?.compose(p)?;
                    let ab = (pp.get(0, 1), pp.get(0, 2));
                    if check_circulant3(ab.0, ab.1)?.status == EmbedStatus::Embeddable {
                        let mut inverse = [0; 3];
                        for (j, &k) in shift.iter().enumerate() {
                            inverse[k] = j;
                        }
                        let perm = permutation_realization(&inverse)?;
                        let inner = classical_realization(&pp, ab, t_trunc)?;
                        let r = compose_markovian(&perm, &inner)?;
                        return Ok(Some(("permuted_classical", r)));
                    }
                }
            }
            CirculantClass::QuantumViaUnistochastic | CirculantClass::Unknown => {}
        }
    }
    if d <= MAX_SEARCH_DIM {
        let opts = SearchOptions {
            seed,
            ..Default::default()
        };
        let search = check_unistochastic_search(p, &opts)?;
        if let Some(u) = search.witness {
            let r = unistochastic_channel(&u)?;
            let r = MarkovianRealization::new(r.stages, p.clone(), r.t_trunc)?;
            return Ok(Some(("unistochastic", r)));
        }
    }
    Ok(None)
}

fn qembed(args: &QembedArgs, seed: u64, sink: &mut Sink) -> Res<Outcome> {
    let (p, circ) = load_matrix(&args.source)?;
    match realize(&p, circ, seed, args.t_trunc)? {
        Some((method, r)) => {
            sink.json(&json!({
                "realized": true,
                "method": method,
                "realization": realization_to_json(&r),
            }))?;
            Ok(Outcome::Positive)
        }
        None => {
            sink.json(&json!({
                "realized": false,
                "target": stochastic_to_json(&p),
            }))?;
            Ok(Outcome::Negative)
        }
    }
}

#[derive(Serialize)]
struct RegionRow {
    a: f64,
    b: f64,
    classification: &'static str,
}

fn region_scan(args: &RegionScanArgs, format: Format, sink: &mut Sink) -> Res<Outcome> {
    let n = args.grid;
    if n == 0 {
        return Err(CliError::new("invalid_input", "grid must be positive"));
    }
    let step = if n > 1 { 1.0 / (n - 1) as f64 } else { 0.0 };
    let rows = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n, k % n);
            let (a, b) = (i as f64 * step, j as f64 * step);
            let classification = if i + j > n - 1 {
                "outside"
            } else {
                classify_circulant_point(a, b)?.as_str()
            };
            Ok(RegionRow { a, b, classification })
        })
        .collect::<Result<Vec<_>, embedlab::Error>>()?;
    sink.table(format, &rows)?;
    Ok(Outcome::Positive)
}

#[derive(Serialize)]
struct CostRow {
    m: u128,
    classical_kind: &'static str,
    classical_lo: Option<u128>,
    classical_hi: Option<u128>,
    classical_lower_bound: Option<u128>,
    quantum_time: u32,
    quantum_memory: u32,
}

fn cost_table(args: &CostTableArgs, format: Format, sink: &mut Sink) -> Res<Outcome> {
    let stats = match NamedFunction::parse(&args.function) {
        Some(f) => f.stats(args.bits)?,
        None => {
            let text = read_file(std::path::Path::new(&args.function))?;
            widen(function_stats(&function_from_json(&text)?))
        }
    };
    let rows: Vec<CostRow> = tradeoff_table(&stats, &args.mem)?
        .into_iter()
        .map(|r| {
            let (kind, lo, hi, lb) = match r.classical {
                ClassicalCost::Zero => ("zero", Some(0), Some(0), Some(0)),
                ClassicalCost::Infinite => ("infinite", None, None, None),
                ClassicalCost::Interval { lo, hi, lower_bound } => {
                    ("interval", Some(lo), Some(hi), Some(lower_bound))
                }
            };
            CostRow {
                m: r.m,
                classical_kind: kind,
                classical_lo: lo,
                classical_hi: hi,
                classical_lower_bound: lb,
                quantum_time: r.quantum_time,
                quantum_memory: r.quantum_memory,
            }
        })
        .collect();
    sink.table(format, &rows)?;
    Ok(Outcome::Positive)
}

fn typicality(args: &TypicalityArgs, seed: u64, sink: &mut Sink) -> Res<Outcome> {
    let stats = typicality_sample(args.d, args.trials, seed)?;
    let mut v = serde_json::to_value(stats)?;
    v["seed"] = json!(seed);
    v["max_z"] = json!(stats.max_z());
    sink.json(&v)?;
    Ok(Outcome::Positive)
}

fn load_prob(path: &std::path::Path) -> Res<ProbVector> {
    Ok(prob_from_json(&read_file(path)?)?)
}

fn is_uniform(g: &ProbVector) -> bool {
    let u = 1.0 / g.dim() as f64;
    g.as_slice().iter().all(|&x| (x - u).abs() <= 1e-12)
}

/// Distinct permutations of `p`, sorted lexicographically.
fn permutohedron_vertices(p: &[f64]) -> Vec<Vec<f64>> {
    fn go(rest: &mut Vec<f64>, cur: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        for k in 0..rest.len() {
            if rest[..k].contains(&rest[k]) {
                continue;
            }
            let x = rest.remove(k);
            cur.push(x);
            go(rest, cur, out);
            cur.pop();
            rest.insert(k, x);
        }
    }
    let mut rest = p.to_vec();
    rest.sort_by(|a, b| a.total_cmp(b));
    let mut out = Vec::new();
    go(&mut rest, &mut Vec::new(), &mut out);
    out
}

/// Largest vertex count reported for uniform fixed points.
const MAX_VERTEX_DIM: usize = 6;

/// Ground-population interval reachable under the LP oracle, by bisection on each side.
fn lp_qubit_interval(p: &ProbVector, gamma: &ProbVector) -> Res<(f64, f64)> {
    let feasible = |q0: f64| -> Res<bool> {
        let q = ProbVector::new(vec![q0, 1.0 - q0])?;
        Ok(accessible_with_memory(p, &q, gamma)?)
    };
    let p0 = p[0];
    let edge = |far: f64| -> Res<f64> {
        if feasible(far)? {
            return Ok(far);
        }
        let (mut inside, mut outside) = (p0, far);
        for _ in 0..60 {
            let mid = 0.5 * (inside + outside);
            if feasible(mid)? {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        Ok(inside)
    };
    Ok((edge(0.0)?, edge(1.0)?))
}

fn access_region(args: &AccessRegionArgs, sink: &mut Sink) -> Res<Outcome> {
    let p = load_prob(&args.p)?;
    let gamma = load_prob(&args.gamma)?;
    let q = args.q.as_deref().map(load_prob).transpose()?;
    if p.dim() != gamma.dim() || q.as_ref().is_some_and(|q| q.dim() != p.dim()) {
        return Err(CliError::new("dimension_mismatch", "p, gamma and q must have equal dimension"));
    }
    if gamma.as_slice().iter().any(|&g| g <= 0.0) {
        return Err(CliError::new("invalid_input", "gamma must be full rank"));
    }
    let d = p.dim();
    let uniform = is_uniform(&gamma);
    let lp = args.lp || (!args.closed_form && d > 2 && !uniform);
    if !lp && d > 2 && !uniform {
        return Err(CliError::new(
            "unsupported_dimension",
            "closed forms cover qubits and uniform fixed points only; use --lp",
        ));
    }
    let mut out = json!({
        "d": d,
        "method": if lp { "lp" } else { "closed_form" },
        "p": p.to_vec(),
        "gamma": gamma.to_vec(),
    });
    if d == 2 {
        let beta_e = (gamma[0] / gamma[1]).ln();
        out["beta_e"] = json!(beta_e);
        let memory = if lp {
            lp_qubit_interval(&p, &gamma)?
        } else {
            qubit_memory_classical_interval(p[0], beta_e)?
        };
        out["memory_interval"] = json!([memory.0, memory.1]);
        let memoryless = qubit_memoryless_classical_interval(p[0], beta_e)?;
        out["memoryless_interval"] = json!([memoryless.0, memoryless.1]);
    } else if uniform && d <= MAX_VERTEX_DIM {
        out["vertices"] = json!(permutohedron_vertices(p.as_slice()));
    }
    let mut outcome = Outcome::Positive;
    if let Some(q) = q {
        let accessible = if lp {
            accessible_with_memory(&p, &q, &gamma)?
        } else if uniform {
            majorises(&p, &q)
        } else {
            let (lo, hi) = qubit_memory_classical_interval(p[0], (gamma[0] / gamma[1]).ln())?;
            (lo - 1e-12..=hi + 1e-12).contains(&q[0])
        };
        let mut target: Value = json!({ "q": q.to_vec(), "accessible": accessible });
        if accessible && uniform {
            target["schedule"] = serde_json::to_value(uniform_fixed_point_path(&p, &q)?)?;
        }
        out["target"] = target;
        if !accessible {
            outcome = Outcome::Negative;
        }
    }
    sink.json(&out)?;
    Ok(outcome)
}

#[derive(Serialize)]
struct PathRow {
    step: usize,
    x: f64,
    z: f64,
    r_plus: f64,
    r_minus: f64,
    radial_deviation: f64,
}

fn qubit_path(args: &QubitPathArgs, format: Format, sink: &mut Sink) -> Res<Outcome> {
    let start = BlochState::new(args.x, 0.0, args.z)?;
    let traj = extremal_path_evolve(&start, args.zeta, args.delta, args.steps)?;
    let circle = traj.reference_circle()?;
    let rows = traj
        .states()
        .iter()
        .enumerate()
        .map(|(step, s)| {
            let m = qubit_monotones(s, args.zeta)?;
            Ok(PathRow {
                step,
                x: s.x,
                z: s.z,
                r_plus: m.r_plus,
                r_minus: m.r_minus,
                radial_deviation: circle.radial_offset(s),
            })
        })
        .collect::<Result<Vec<_>, embedlab::Error>>()?;
    sink.table(format, &rows)?;
    eprintln!("{}", json!({ "stop_reason": traj.stop_reason, "steps": traj.steps.len() }));
    Ok(Outcome::Positive)
}

#[derive(Serialize)]
struct AuditRow {
    t: f64,
    #[serde(rename = "F")]
    f: f64,
    #[serde(rename = "F_Q")]
    f_q: f64,
    #[serde(rename = "A")]
    a: f64,
}

/// Times and states from a `t,x,y,z` or `t,p0,...` CSV.
fn read_trajectory(path: &std::path::Path, d: usize) -> Res<(Vec<f64>, Vec<DensityMatrix>)> {
    let text = read_file(path)?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let bloch = header == ["t", "x", "y", "z"];
    let pops: Vec<String> = std::iter::once("t".to_string())
        .chain((0..d).map(|k| format!("p{k}")))
        .collect();
    if !bloch && header != pops {
        return Err(CliError::new(
            "invalid_input",
            format!("trajectory header must be t,x,y,z or {}", pops.join(",")),
        ));
    }
    if bloch && d != 2 {
        return Err(CliError::new("dimension_mismatch", "Bloch trajectories need two levels"));
    }
    let (mut times, mut states) = (Vec::new(), Vec::new());
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let vals = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::new("invalid_input", format!("row {}: {e}", line + 1)))?;
        times.push(vals[0]);
        states.push(if bloch {
            BlochState::new(vals[1], vals[2], vals[3])?.to_density()?
        } else {
            DensityMatrix::from_diagonal(&vals[1..])?
        });
    }
    Ok((times, states))
}

fn free_energy_audit(args: &FreeEnergyAuditArgs, format: Format, sink: &mut Sink) -> Res<Outcome> {
    let spec = EnergySpec::new(args.levels.clone(), args.beta)?;
    let (times, states) = read_trajectory(&args.trajectory, spec.dim())?;
    let audit = audit_trajectory(&times, &states, &spec)?;
    let rows: Vec<AuditRow> = (0..audit.times.len())
        .map(|k| AuditRow {
            t: audit.times[k],
            f: audit.f_classical[k],
            f_q: audit.f_quantum[k],
            a: audit.asymmetry[k],
        })
        .collect();
    sink.table(format, &rows)?;
    eprintln!(
        "{}",
        json!({ "monotone_ok": audit.monotone_ok, "backflow_detected": audit.backflow_detected })
    );
    Ok(Outcome::Positive)
}
