//! Verb implementations. Each returns the text for stdout; checks whose
//! residual exceeds its bound turn into [`Failure::Integrity`], which still
//! carries the artifact.

use std::fs;
use std::path::Path;

use greenwalk::duality::{duality_report, forget_time};
use greenwalk::families::{
    bipartite_oracle, complete_oracle, cycle_oracle, hypercube_oracle, path_oracle, toric_oracle,
    tree_oracle,
};
use greenwalk::greens::{exit_frequency_matrix, greens_general, verify_green_constraints};
use greenwalk::hitting::{check_cycle_identities, first_step_residual, hit_time};
use greenwalk::spectral::{spectral_greens, spectral_hitting, spectral_mixing};
use greenwalk::{
    parse_graph, ChainAnalysis, Distribution, Error, GraphFormat, GreensMatrix, OracleReport,
    Simulator, SpectralDecomposition, WeightedDigraph,
};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::format::{g17, matrix_csv, matrix_json, num, rows, to_json, vector};
use crate::{Cli, Command, FamilyName, Input, OutputFormat};

/// Pipeline comparison in `family` is skipped above this many vertices.
const FAMILY_PIPELINE_MAX_N: usize = 1024;

pub enum Failure {
    Input(String),
    Integrity { stdout: String, report: String },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_integrity() {
            Failure::Integrity {
                stdout: String::new(),
                report: format!("{e}\n"),
            }
        } else {
            Failure::Input(e.to_string())
        }
    }
}

type Outcome = Result<String, Failure>;

/// A residual and the bound it must not exceed.
struct Check {
    name: String,
    value: f64,
    bound: f64,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound,
        }
    }

    fn pass(&self) -> bool {
        // NaN fails.
        self.value <= self.bound
    }
}

fn residuals_json(checks: &[Check]) -> Vec<(&str, f64)> {
    checks.iter().map(|c| (c.name.as_str(), c.value)).collect()
}

/// Emits `out`, or fails with a report of every check over its bound.
fn settle(out: String, checks: &[Check]) -> Outcome {
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.pass()).collect();
    if failed.is_empty() {
        return Ok(out);
    }
    let mut report = String::from("integrity checks failed:\n");
    for c in failed {
        report += &format!("  {}: {} > {}\n", c.name, g17(c.value), g17(c.bound));
    }
    Err(Failure::Integrity {
        stdout: out,
        report,
    })
}

struct Bounds {
    /// Matrix identities: `tol · n`.
    matrix: f64,
    /// Times: `tol · max(1, T_hit, T_mix)`.
    time: f64,
    tol: f64,
}

impl Bounds {
    fn of(a: &ChainAnalysis, tol: f64) -> Self {
        Bounds {
            matrix: tol * a.n() as f64,
            time: tol * a.mixing.t_hit.max(a.mixing.t_mix).max(1.0),
            tol,
        }
    }
}

fn validate_flags(cli: &Cli) -> Result<(), Failure> {
    if !(0.0..1.0).contains(&cli.lazy) {
        return Err(Failure::Input(format!(
            "--lazy must lie in [0, 1), got {}",
            cli.lazy
        )));
    }
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        return Err(Failure::Input(format!(
            "--tol must be positive, got {}",
            cli.tol
        )));
    }
    if cli.trials == 0 {
        return Err(Failure::Input("--trials must be at least 1".into()));
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load(input: &Input) -> Result<WeightedDigraph, Failure> {
    let path = &input.input;
    let format = input
        .input_format
        .unwrap_or_else(|| GraphFormat::from_path(path));
    parse_graph(&read(path)?, format)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// `pi`, a vertex index, or comma-separated nonnegative weights.
fn parse_target(spec: Option<&str>, a: &ChainAnalysis) -> Result<Option<Distribution>, Failure> {
    let spec = match spec.map(str::trim) {
        None | Some("pi") => return Ok(None),
        Some(s) => s,
    };
    let n = a.n();
    let tau = if let Ok(k) = spec.parse::<usize>() {
        Distribution::point_mass(n, k)?
    } else {
        let w = spec
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| Failure::Input(format!("cannot read target {spec:?}")))?;
        if w.len() != n {
            return Err(Failure::Input(format!(
                "target has {} weights for {n} vertices",
                w.len()
            )));
        }
        Distribution::from_weights(&w)?
    };
    Ok(Some(tau))
}

pub fn run(cli: &Cli) -> Outcome {
    validate_flags(cli)?;
    match &cli.command {
        Command::Hitting { input } => hitting(cli, input),
        Command::Green { input, target } => green(cli, input, target.as_deref()),
        Command::Exitfreq { input, target } => exitfreq(cli, input, target.as_deref()),
        Command::Mixing { input, measure } => mixing(cli, input, measure.as_deref()),
        Command::Spectral { input } => spectral(cli, input),
        Command::Dual { input } => dual(cli, input),
        Command::Family {
            name,
            params,
            input,
            measure,
        } => family(cli, *name, params, input.as_deref(), measure.as_deref()),
        Command::Simulate { input, from, to } => simulate(cli, input, *from, *to),
        Command::Verify { input, green } => verify(cli, input, green.as_deref()),
    }
}

fn analyse(cli: &Cli, input: &Input) -> Result<(WeightedDigraph, ChainAnalysis), Failure> {
    let g = load(input)?;
    let a = ChainAnalysis::of_graph(&g, cli.lazy)?;
    Ok((g, a))
}

fn emit_matrix(cli: &Cli, target: &Distribution, m: &DMatrix<f64>, checks: &[Check]) -> Outcome {
    let out = match cli.format {
        OutputFormat::Json => to_json(&matrix_json(target.as_slice(), m, &residuals_json(checks))),
        OutputFormat::Csv => matrix_csv(m),
    };
    settle(out, checks)
}

fn hitting(cli: &Cli, input: &Input) -> Outcome {
    let (_, a) = analyse(cli, input)?;
    let b = Bounds::of(&a, cli.tol);
    let (_, random_target) = hit_time(&a.hitting, &a.stationary);
    let checks = [
        Check::new(
            "first_step",
            first_step_residual(&a.hitting, &a.transition),
            b.time,
        ),
        Check::new("random_target", random_target, b.time),
    ];
    emit_matrix(cli, &a.stationary, a.hitting.matrix(), &checks)
}

fn green(cli: &Cli, input: &Input, target: Option<&str>) -> Outcome {
    let (_, a) = analyse(cli, input)?;
    let b = Bounds::of(&a, cli.tol);
    let g = match parse_target(target, &a)? {
        None => a.greens.clone(),
        Some(tau) => greens_general(&a.hitting, &a.stationary, &tau)?,
    };
    let r = verify_green_constraints(&g, &a.transition);
    let checks = [
        Check::new("constraint", r.constraint, b.matrix),
        Check::new("row_sums", r.row_sums, b.matrix),
    ];
    emit_matrix(cli, g.target(), g.matrix(), &checks)
}

fn exitfreq(cli: &Cli, input: &Input, target: Option<&str>) -> Outcome {
    let (_, a) = analyse(cli, input)?;
    let b = Bounds::of(&a, cli.tol);
    let x = match parse_target(target, &a)? {
        None => a.exit_pi.clone(),
        Some(tau) => exit_frequency_matrix(&a.hitting, &a.stationary, &tau)?,
    };
    let checks = [
        Check::new(
            "conservation",
            x.conservation_residual(&a.transition),
            b.matrix,
        ),
        Check::new("row_minima", x.max_row_minimum(), b.tol),
        Check::new("negative_entries", (-x.min_entry()).max(0.0), b.tol),
        Check::new("row_sums", x.row_sum_residual(), b.time),
    ];
    emit_matrix(cli, x.target(), x.matrix(), &checks)
}

fn mixing(cli: &Cli, input: &Input, measure: Option<&str>) -> Outcome {
    let (_, a) = analyse(cli, input)?;
    let b = Bounds::of(&a, cli.tol);
    let m = &a.mixing;
    let t_forget = forget_time(&a.transition, &a.stationary)?;
    if let Some(name) = measure {
        let value = match name.to_ascii_lowercase().replace('_', "").as_str() {
            "tmix" => m.t_mix,
            "treset" => m.t_reset,
            "thit" => m.t_hit,
            "tforget" => t_forget,
            _ => {
                return Err(Failure::Input(format!(
                    "unknown measure {name:?} (tmix, treset, thit, tforget)"
                )))
            }
        };
        return Ok(g17(value) + "\n");
    }
    let (_, random_target) = hit_time(&a.hitting, &a.stationary);
    let checks = [
        Check::new("green_constraint", a.green_residuals.constraint, b.matrix),
        Check::new("green_row_sums", a.green_residuals.row_sums, b.matrix),
        Check::new("random_target", random_target, b.time),
    ];
    let from_pi = a.access_from_pi();
    let out = match cli.format {
        OutputFormat::Json => to_json(&json!({
            "n": a.n(),
            "pi": vector(a.stationary.as_slice().iter().copied()),
            "access_to_pi": vector(m.access_to_pi.iter().copied()),
            "access_from_pi": vector(from_pi.iter().copied()),
            "t_mix": num(m.t_mix),
            "t_reset": num(m.t_reset),
            "t_hit": num(m.t_hit),
            "t_forget": num(t_forget),
            "pessimal": m.pessimal,
            "halting": m.halting,
            "mixing_pessimal": m.mixing_pessimal,
            "residuals": crate::format::residual_map(&residuals_json(&checks)),
        })),
        OutputFormat::Csv => {
            let mut out = String::from("vertex,pi,access_to_pi,access_from_pi,pessimal\n");
            for i in 0..a.n() {
                out += &format!(
                    "{i},{},{},{},{}\n",
                    g17(a.stationary[i]),
                    g17(m.access_to_pi[i]),
                    g17(from_pi[i]),
                    m.pessimal[i]
                );
            }
            out
        }
    };
    settle(out, &checks)
}

fn rel_amax(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
        .fold(0.0, f64::max)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Spectral quantities of the (possibly lazy) walk and their agreement with
/// the hitting-time route. Laziness scales the spectrum by `1 − β` and every
/// time by its inverse.
struct SpectralRoute {
    eigenvalues: Vec<f64>,
    greens: DMatrix<f64>,
    t_mix: f64,
    t_reset: f64,
    t_hit: f64,
    checks: Vec<Check>,
}

fn spectral_route(
    g: &WeightedDigraph,
    a: &ChainAnalysis,
    tol: f64,
) -> Result<SpectralRoute, Failure> {
    let dec = SpectralDecomposition::of_graph(g)?;
    let keep = 1.0 - a.transition.laziness();
    let scale = 1.0 / keep;
    let h = spectral_hitting(&dec).matrix() * scale;
    let greens = spectral_greens(&dec).matrix() * scale;
    let sm = spectral_mixing(&dec, &a.mixing.pessimal)?;
    let (t_mix, t_reset, t_hit) = (sm.t_mix * scale, sm.t_reset * scale, sm.t_hit * scale);
    let eigenvalues: Vec<f64> = dec.eigenvalues().iter().map(|l| l * keep).collect();
    let sum_inv: f64 = eigenvalues.iter().skip(1).map(|l| 1.0 / l).sum();
    let m = &a.mixing;
    let checks = vec![
        Check::new("spectral_hitting", rel_amax(&h, a.hitting.matrix()), tol),
        Check::new("spectral_greens", rel_amax(&greens, a.greens.matrix()), tol),
        Check::new("spectral_t_mix", rel(t_mix, m.t_mix), tol),
        Check::new("spectral_t_reset", rel(t_reset, m.t_reset), tol),
        Check::new("spectral_t_hit", rel(t_hit, m.t_hit), tol),
        Check::new("eigenvalue_sum_t_hit", rel(sum_inv, m.t_hit), tol),
        Check::new("trace_t_hit", rel(a.greens.trace(), m.t_hit), tol),
    ];
    Ok(SpectralRoute {
        eigenvalues,
        greens,
        t_mix,
        t_reset,
        t_hit,
        checks,
    })
}

fn spectral(cli: &Cli, input: &Input) -> Outcome {
    let (g, a) = analyse(cli, input)?;
    if !g.is_undirected() {
        return Err(Failure::Input(
            "the spectral route needs an undirected graph".into(),
        ));
    }
    let s = spectral_route(&g, &a, cli.tol)?;
    let out = match cli.format {
        OutputFormat::Json => to_json(&json!({
            "n": a.n(),
            "target": vector(a.stationary.as_slice().iter().copied()),
            "eigenvalues": vector(s.eigenvalues.iter().copied()),
            "rows": rows(&s.greens),
            "t_mix": num(s.t_mix),
            "t_reset": num(s.t_reset),
            "t_hit": num(s.t_hit),
            "residuals": crate::format::residual_map(&residuals_json(&s.checks)),
        })),
        OutputFormat::Csv => matrix_csv(&s.greens),
    };
    settle(out, &s.checks)
}

fn dual(cli: &Cli, input: &Input) -> Outcome {
    let (_, a) = analyse(cli, input)?;
    let d = duality_report(&a)?;
    let checks: Vec<Check> = d
        .residuals
        .iter()
        .map(|r| Check::new(r.name, r.value, cli.tol))
        .collect();
    let out = match cli.format {
        OutputFormat::Json => to_json(&json!({
            "n": a.n(),
            "reversible": d.reversible,
            "pi": vector(a.stationary.as_slice().iter().copied()),
            "reverse": rows(d.reverse.matrix()),
            "forget": vector(d.forget.iter().copied()),
            "reverse_forget": vector(d.reverse_forget.iter().copied()),
            "offsets": vector(d.offsets.iter().copied()),
            "pi_core": vector(d.pi_core.iter().copied()),
            "exit_pi_core": rows(d.exit_pi_core.matrix()),
            "dual_exit": rows(&d.dual_exit),
            "t_forget": num(d.t_forget),
            "t_reset": num(d.t_reset),
            "reverse_t_forget": num(d.reverse_t_forget),
            "reverse_t_reset": num(d.reverse_t_reset),
            "forget_core_gap": num(d.forget_core_gap),
            "residuals": crate::format::residual_map(&residuals_json(&checks)),
        })),
        OutputFormat::Csv => {
            let mut out = String::from("vertex,pi,forget,reverse_forget,offset,pi_core\n");
            for i in 0..a.n() {
                out += &format!(
                    "{i},{},{},{},{},{}\n",
                    g17(a.stationary[i]),
                    g17(d.forget[i]),
                    g17(d.reverse_forget[i]),
                    g17(d.offsets[i]),
                    g17(d.pi_core[i])
                );
            }
            out
        }
    };
    settle(out, &checks)
}

fn params<const K: usize>(name: &str, p: &[usize]) -> Result<[usize; K], Failure> {
    p.try_into().map_err(|_| {
        Failure::Input(format!(
            "{name} takes {K} parameter{}, got {}",
            if K == 1 { "" } else { "s" },
            p.len()
        ))
    })
}

fn oracle(name: FamilyName, p: &[usize], tree: Option<&Path>) -> Result<OracleReport, Failure> {
    let report = match name {
        FamilyName::Complete => complete_oracle(params::<1>("complete", p)?[0])?,
        FamilyName::Bipartite => {
            let [r, s] = params::<2>("bipartite", p)?;
            bipartite_oracle(r, s)?
        }
        FamilyName::Star => {
            let [n] = params::<1>("star", p)?;
            if n < 2 {
                return Err(Failure::Input("a star needs at least 2 vertices".into()));
            }
            bipartite_oracle(1, n - 1)?
        }
        FamilyName::Path => path_oracle(params::<1>("path", p)?[0])?,
        FamilyName::Cycle => cycle_oracle(params::<1>("cycle", p)?[0])?,
        FamilyName::Hypercube => hypercube_oracle(params::<1>("hypercube", p)?[0])?,
        FamilyName::Toric => {
            if p.is_empty() {
                return Err(Failure::Input(
                    "toric takes one or more side lengths".into(),
                ));
            }
            toric_oracle(p)?
        }
        FamilyName::Tree => {
            params::<0>("tree", p)?;
            let path =
                tree.ok_or_else(|| Failure::Input("tree needs --input <tree file>".into()))?;
            let g = parse_graph(&read(path)?, GraphFormat::from_path(path))
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            tree_oracle(&g)?
        }
    };
    Ok(report)
}

/// Oracle values describe the simple walk; laziness `β` divides every value
/// (hitting times, Green's entries, mixing measures) by `1 − β`.
fn family(
    cli: &Cli,
    name: FamilyName,
    p: &[usize],
    tree: Option<&Path>,
    measure: Option<&str>,
) -> Outcome {
    let report = oracle(name, p, tree)?;
    let scale = 1.0 / (1.0 - cli.lazy);
    if let Some(m) = measure {
        let value = report
            .measure(m)
            .ok_or_else(|| Failure::Input(format!("{} has no value {m:?}", report.family)))?;
        return Ok(g17(value * scale) + "\n");
    }
    let mut checks: Vec<Check> = report
        .checks
        .iter()
        .map(|c| Check::new(c.name.clone(), c.residual, cli.tol))
        .collect();
    let n = report.graph.n();
    let mut deviations = Value::Null;
    if n <= FAMILY_PIPELINE_MAX_N {
        let a = ChainAnalysis::of_graph(&report.graph, 0.0)?;
        let devs = report.compare(&a);
        let worst = devs.iter().map(|d| d.error).fold(0.0, f64::max);
        checks.push(Check::new("pipeline agreement", worst, cli.tol));
        if report.eigenvalues.is_some() && report.graph.is_undirected() {
            let dec = SpectralDecomposition::of_graph(&report.graph)?;
            if let Some(err) = report.compare_spectrum(&dec) {
                checks.push(Check::new("spectrum agreement", err, cli.tol));
            }
        }
        deviations = num(worst);
    }
    let values = report
        .values
        .iter()
        .map(|v| (v.label.as_str(), v.value * scale));
    let out = match cli.format {
        OutputFormat::Json => to_json(&json!({
            "family": report.family,
            "params": report.params,
            "n": n,
            "values": values
                .map(|(label, value)| json!({"label": label, "value": num(value)}))
                .collect::<Vec<_>>(),
            "eigenvalues": report
                .eigenvalues
                .as_ref()
                .map(|e| vector(e.iter().map(|l| l / scale))),
            "checks": checks
                .iter()
                .map(|c| json!({"name": c.name, "residual": num(c.value)}))
                .collect::<Vec<_>>(),
            "max_pipeline_deviation": deviations,
            "notes": report.notes,
        })),
        OutputFormat::Csv => {
            let mut out = String::from("label,value\n");
            for (label, value) in values {
                out += &format!("\"{label}\",{}\n", g17(value));
            }
            out
        }
    };
    settle(out, &checks)
}

fn simulate(cli: &Cli, input: &Input, from: usize, to: Option<usize>) -> Outcome {
    let (_, a) = analyse(cli, input)?;
    let sim = Simulator::new(&a.transition)?;
    let (stats, expected) = match to {
        Some(j) => {
            let s = sim.hitting(from, j, cli.trials, cli.seed)?;
            (s, a.hitting.get(from, j))
        }
        None => (
            sim.random_target(&a.stationary, from, cli.trials, cli.seed)?,
            a.mixing.t_hit,
        ),
    };
    let target = to.map_or_else(|| "pi".to_string(), |j| j.to_string());
    let z = stats.z_score(expected);
    Ok(match cli.format {
        OutputFormat::Json => to_json(&json!({
            "from": from,
            "to": target,
            "trials": stats.trials,
            "seed": stats.seed,
            "mean": num(stats.mean),
            "std_error": num(stats.std_error),
            "expected": num(expected),
            "z_score": num(z),
        })),
        OutputFormat::Csv => format!(
            "from,to,trials,seed,mean,std_error,expected,z_score\n{from},{target},{},{},{},{},{},{}\n",
            stats.trials,
            stats.seed,
            g17(stats.mean),
            g17(stats.std_error),
            g17(expected),
            g17(z)
        ),
    })
}

/// A Green's function saved by `green`: JSON `{n, target, rows}` or a CSV
/// grid (whose target is taken to be π).
fn read_greens(path: &Path, pi: &Distribution) -> Result<GreensMatrix, Failure> {
    let text = read(path)?;
    let bad = |what: &str| Failure::Input(format!("{}: {what}", path.display()));
    let (grid, target): (Vec<Vec<f64>>, Distribution) = if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(&text).map_err(|e| bad(&e.to_string()))?;
        let floats =
            |v: &Value| -> Option<Vec<f64>> { v.as_array()?.iter().map(Value::as_f64).collect() };
        let grid = v["rows"]
            .as_array()
            .and_then(|r| r.iter().map(floats).collect::<Option<Vec<_>>>())
            .ok_or_else(|| bad("missing numeric \"rows\""))?;
        let target = match floats(&v["target"]) {
            Some(t) => Distribution::from_slice(&t)?,
            None => pi.clone(),
        };
        (grid, target)
    } else {
        let grid = text
            .lines()
            .skip(1)
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.split(',').map(|x| x.trim().parse::<f64>()).collect())
            .collect::<Result<Vec<Vec<f64>>, _>>()
            .map_err(|e| bad(&e.to_string()))?;
        (grid, pi.clone())
    };
    let n = grid.len();
    if n != pi.n() || grid.iter().any(|r| r.len() != n) || target.n() != n {
        return Err(bad(&format!("expected a {0}×{0} matrix", pi.n())));
    }
    let m = DMatrix::from_row_iterator(n, n, grid.into_iter().flatten());
    Ok(GreensMatrix::from_parts(m, target)?)
}

fn verify(cli: &Cli, input: &Input, green_file: Option<&Path>) -> Outcome {
    let (g, a) = analyse(cli, input)?;
    let b = Bounds::of(&a, cli.tol);
    let n = a.n();
    let mut checks = vec![
        Check::new(
            "stationary",
            a.stationary.stationarity_residual(&a.transition),
            b.tol,
        ),
        Check::new("green constraint", a.green_residuals.constraint, b.matrix),
        Check::new("green row sums", a.green_residuals.row_sums, b.matrix),
        Check::new(
            "first-step",
            first_step_residual(&a.hitting, &a.transition),
            b.time,
        ),
        Check::new(
            "random target",
            hit_time(&a.hitting, &a.stationary).1,
            b.time,
        ),
        Check::new(
            "trace = T_hit",
            rel(a.greens.trace(), a.mixing.t_hit),
            b.tol,
        ),
    ];
    let x = &a.exit_pi;
    checks.extend([
        Check::new(
            "exit conservation",
            x.conservation_residual(&a.transition),
            b.matrix,
        ),
        Check::new("exit row minima", x.max_row_minimum(), b.tol),
        Check::new("exit negative entries", (-x.min_entry()).max(0.0), b.tol),
        Check::new("exit row sums", x.row_sum_residual(), b.time),
        Check::new(
            "green via exit frequencies",
            (x.to_greens(&a.stationary).matrix() - a.greens.matrix()).amax(),
            b.matrix,
        ),
    ]);
    for (label, tau) in [
        ("point target", Distribution::point_mass(n, 0)?),
        ("uniform target", Distribution::uniform(n)),
    ] {
        let gt = greens_general(&a.hitting, &a.stationary, &tau)?;
        let r = verify_green_constraints(&gt, &a.transition);
        let xt = exit_frequency_matrix(&a.hitting, &a.stationary, &tau)?;
        checks.extend([
            Check::new(format!("{label}: green constraint"), r.constraint, b.matrix),
            Check::new(format!("{label}: green row sums"), r.row_sums, b.matrix),
            Check::new(
                format!("{label}: exit conservation"),
                xt.conservation_residual(&a.transition),
                b.matrix,
            ),
            Check::new(
                format!("{label}: two routes"),
                (xt.to_greens(&a.stationary).matrix() - gt.matrix()).amax(),
                b.matrix,
            ),
        ]);
    }
    if g.is_undirected() {
        let c = check_cycle_identities(&a.hitting, &a.stationary);
        checks.extend([
            Check::new("cycle triples", c.triples, b.time),
            Check::new("cycle pairs", c.pairs, b.time),
            Check::new(
                "green symmetry",
                a.greens.symmetry_residual(&a.stationary),
                b.matrix,
            ),
        ]);
        checks.extend(spectral_route(&g, &a, cli.tol)?.checks);
    }
    let d = duality_report(&a)?;
    checks.extend(
        d.residuals
            .iter()
            .map(|r| Check::new(format!("duality: {}", r.name), r.value, b.tol)),
    );
    if let Some(path) = green_file {
        let gf = read_greens(path, &a.stationary)?;
        let r = verify_green_constraints(&gf, &a.transition);
        let direct = greens_general(&a.hitting, &a.stationary, gf.target())?;
        let scale = direct.matrix().amax().max(1.0);
        checks.extend([
            Check::new("file: green constraint", r.constraint, b.matrix),
            Check::new("file: green row sums", r.row_sums, b.matrix),
            Check::new(
                "file: matches pipeline",
                (gf.matrix() - direct.matrix()).amax() / scale,
                b.tol,
            ),
        ]);
    }
    let passed = checks.iter().all(Check::pass);
    let out = match cli.format {
        OutputFormat::Json => to_json(&json!({
            "n": n,
            "passed": passed,
            "checks": checks
                .iter()
                .map(|c| json!({
                    "name": c.name,
                    "value": num(c.value),
                    "bound": num(c.bound),
                    "pass": c.pass(),
                }))
                .collect::<Vec<_>>(),
        })),
        OutputFormat::Csv => {
            let mut out = String::from("name,value,bound,pass\n");
            for c in &checks {
                out += &format!(
                    "\"{}\",{},{},{}\n",
                    c.name,
                    g17(c.value),
                    g17(c.bound),
                    c.pass()
                );
            }
            out
        }
    };
    settle(out, &checks)
}
