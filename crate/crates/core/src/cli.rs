//! Command-line front end. [`run`] is pure apart from file output and
//! returns the exit code with captured stdout and stderr.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::catalog::{
    load, load_measurement, search_perfect_separable, EnsembleId, PriorFamily, DEFAULT_SEARCH_BOUND,
};
use crate::discrimination::{
    confusion_matrix, delta, eval_tree, party_letter, InferenceModel, ProtocolTree, SearchConfig,
};
use crate::error::{NweError, Result};
use crate::format::sig10;
use crate::gpt::{GptSystem, DEFAULT_EPS};
use crate::quantum::{curve, curve_to_csv, polygon_crossover};
use crate::signaling::{certify_polygon, in_classical_polytope, Channel, Membership};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable overriding the numerical tolerance.
pub const EPS_ENV: &str = "NWE_EPS";

#[derive(Parser, Debug)]
#[command(
    name = "nwe",
    version,
    about = "Nonlocality without entanglement in polygon theories"
)]
struct Cli {
    /// Numerical tolerance (overrides NWE_EPS).
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Describe a polygon system, the Bloch circle or a cataloged ensemble.
    Info(InfoArgs),
    /// Check a cataloged separable measurement against its ensemble.
    Verify { id: String },
    /// Optimal local protocol for a cataloged ensemble.
    Local(LocalArgs),
    /// Biased-prior comparison curve as CSV.
    Curve {
        p_min: f64,
        p_max: f64,
        steps: usize,
        /// CSV destination; stdout when omitted.
        out: Option<PathBuf>,
    },
    /// Bounded classical simulability checks.
    Signal(SignalArgs),
    /// Brute-force search for a perfect separable measurement.
    SearchMeasurement {
        id: String,
        /// Maximum search nodes.
        #[arg(long, default_value_t = DEFAULT_SEARCH_BOUND)]
        bound: u64,
    },
}

#[derive(Args, Debug)]
struct InfoArgs {
    /// Polygon order.
    #[arg(long, conflicts_with_all = ["bloch", "ensemble"])]
    polygon: Option<usize>,
    #[arg(long, conflicts_with = "ensemble")]
    bloch: bool,
    /// Ensemble id (s4, s5, s6, s7, q3).
    #[arg(long)]
    ensemble: Option<String>,
}

#[derive(Args, Debug)]
struct LocalArgs {
    id: String,
    /// `uniform` or `biased:<p>`.
    #[arg(long, default_value = "uniform")]
    priors: String,
    /// Party forced to measure first (alice, bob, charlie or an index).
    #[arg(long)]
    leader: Option<String>,
    /// Measurement index the leader opens with.
    #[arg(long, requires = "leader")]
    opening: Option<usize>,
    /// `eliminative` or `bayesian`.
    #[arg(long, default_value = "eliminative")]
    model: String,
    /// Parties measure in index order (leader first) instead of adaptively.
    #[arg(long)]
    fixed_order: bool,
    /// Evaluate this protocol tree instead of optimizing.
    #[arg(long)]
    tree: Option<String>,
}

#[derive(Args, Debug)]
struct SignalArgs {
    /// Polygon order for exhaustive certification.
    #[arg(long, conflicts_with = "identity", requires_all = ["m", "n"])]
    polygon: Option<usize>,
    /// Number of inputs.
    #[arg(long)]
    m: Option<usize>,
    /// Number of outputs.
    #[arg(long)]
    n: Option<usize>,
    /// Test the noiseless channel on this many symbols.
    #[arg(long)]
    identity: Option<usize>,
    /// Classical alphabet size.
    #[arg(long)]
    d: usize,
    /// Print certificates and witnesses as CSV.
    #[arg(long)]
    csv: bool,
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: msg.into(),
        }
    }
}

/// Runs with `NWE_EPS` read from the process environment.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_env(args, std::env::var(EPS_ENV).ok().as_deref())
}

/// Runs with an explicit value standing in for `NWE_EPS`.
pub fn run_with_env<I, T>(args: I, eps_env: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome::usage(text)
            };
        }
    };
    let eps = match resolve_eps(cli.eps, eps_env) {
        Ok(e) => e,
        Err(e) => return Outcome::usage(format!("error: {e}\n")),
    };
    match dispatch(cli.command, eps) {
        Ok(out) => out,
        Err(e) => Outcome::usage(format!("error: {e}\n")),
    }
}

fn resolve_eps(flag: Option<f64>, env: Option<&str>) -> Result<f64> {
    let eps = match (flag, env) {
        (Some(v), _) => v,
        (None, Some(s)) => s
            .trim()
            .parse()
            .map_err(|_| NweError::InvalidParameter(format!("{EPS_ENV}=`{s}` is not a number")))?,
        (None, None) => DEFAULT_EPS,
    };
    if !(eps > 0.0 && eps < 1e-2) {
        return Err(NweError::InvalidParameter(format!(
            "tolerance must lie in (0, 0.01), got {eps}"
        )));
    }
    Ok(eps)
}

fn dispatch(cmd: Command, eps: f64) -> Result<Outcome> {
    let mut out = String::new();
    let mut err = String::new();
    let code = match cmd {
        Command::Info(a) => info(&a, &mut out)?,
        Command::Verify { id } => verify(&id, eps, &mut out)?,
        Command::Local(a) => local(&a, eps, &mut out)?,
        Command::Curve {
            p_min,
            p_max,
            steps,
            out: path,
        } => curve_cmd(p_min, p_max, steps, path, &mut out, &mut err)?,
        Command::Signal(a) => signal(&a, &mut out)?,
        Command::SearchMeasurement { id, bound } => search(&id, bound, &mut out)?,
    };
    Ok(Outcome {
        code,
        stdout: out,
        stderr: err,
    })
}

fn parse_id(id: &str) -> Result<EnsembleId> {
    id.parse()
}

fn parse_leader(s: &str) -> Result<usize> {
    match s.to_ascii_lowercase().as_str() {
        "alice" | "a" => Ok(0),
        "bob" | "b" => Ok(1),
        "charlie" | "c" => Ok(2),
        other => other
            .parse()
            .map_err(|_| NweError::InvalidParameter(format!("unknown leader `{s}`"))),
    }
}

fn info(a: &InfoArgs, out: &mut String) -> Result<i32> {
    if let Some(n) = a.polygon {
        describe_system(&GptSystem::polygon(n)?, out)?;
    } else if a.bloch {
        describe_system(&GptSystem::bloch_circle(), out)?;
    } else if let Some(id) = &a.ensemble {
        let ens = load(parse_id(id)?, PriorFamily::Uniform)?;
        writeln!(out, "ensemble {id}").ok();
        writeln!(out, "parties {}", ens.arity()).ok();
        for (i, s) in ens.states.iter().enumerate() {
            writeln!(
                out,
                "φ{} {} prior {}",
                i + 1,
                s.label(),
                sig10(ens.priors[i])
            )
            .ok();
        }
        match load_measurement(ens.id.expect("catalog ensembles carry an id")) {
            Ok(m) => {
                for (i, e) in m.effects.iter().enumerate() {
                    writeln!(out, "E{} {}", i + 1, e.label()).ok();
                }
            }
            Err(_) => writeln!(out, "no cataloged measurement").unwrap_or(()),
        }
    } else {
        for id in EnsembleId::ALL {
            let ens = load(id, PriorFamily::Uniform)?;
            let sys = ens.composite.part(0)?;
            writeln!(
                out,
                "{id}\t{} parties\t{} states\t{}\tmeasurement {}",
                ens.arity(),
                ens.len(),
                sys.kind(),
                if id.has_measurement() {
                    "cataloged"
                } else {
                    "none"
                }
            )
            .ok();
        }
    }
    Ok(EXIT_OK)
}

fn describe_system(sys: &GptSystem, out: &mut String) -> Result<()> {
    writeln!(out, "system {}", sys.kind()).ok();
    writeln!(out, "unit {}", vec3(sys.unit().vector.coords())).ok();
    for s in sys.pure_states() {
        writeln!(out, "{} {}", s.label, vec3(s.vector.coords())).ok();
    }
    for e in sys.ray_effects().iter().chain(sys.complement_effects()) {
        writeln!(out, "{} {}", e.label, vec3(e.vector.coords())).ok();
    }
    for m in sys.extremal_measurements() {
        let labels: Vec<&str> = m.effects.iter().map(|e| e.label.as_str()).collect();
        writeln!(out, "{} {{{}}}", m.label, labels.join(", ")).ok();
    }
    if sys.is_polygon() {
        for i in 0..sys.ray_effects().len() {
            let p = sys.zero_one_profile(i)?;
            let fmt = |v: &[usize]| {
                v.iter()
                    .map(|k| format!("ω{k}"))
                    .collect::<Vec<_>>()
                    .join(",")
            };
            writeln!(
                out,
                "profile e{i}: ones [{}] zeros [{}]",
                fmt(&p.ones),
                fmt(&p.zeros)
            )
            .ok();
        }
    }
    sys.check_invariants()?;
    writeln!(out, "invariants ok").ok();
    Ok(())
}

fn vec3(c: &[f64]) -> String {
    let cells: Vec<String> = c.iter().map(|&v| sig10(v)).collect();
    format!("({})", cells.join(", "))
}

fn verify(id: &str, eps: f64, out: &mut String) -> Result<i32> {
    let id = parse_id(id)?;
    let m = load_measurement(id)?;
    let ens = load(id, PriorFamily::Uniform)?;
    let cm = confusion_matrix(&m, &ens)?;
    let residual = ens.composite.completeness_residual(&m)?;
    let identity_err = cm.identity_error().unwrap_or(f64::INFINITY);
    write!(out, "confusion matrix\n{cm}").ok();
    writeln!(out, "identity_error {:e}", identity_err).ok();
    writeln!(out, "completeness_residual {:e}", residual).ok();
    let pass = identity_err <= eps && residual <= crate::gpt::COMPLETENESS_TOL;
    writeln!(out, "{}", if pass { "PASS" } else { "FAIL" }).ok();
    Ok(if pass { EXIT_OK } else { EXIT_FAIL })
}

fn local(a: &LocalArgs, eps: f64, out: &mut String) -> Result<i32> {
    let id = parse_id(&a.id)?;
    let priors: PriorFamily = a.priors.parse()?;
    let ens = load(id, priors)?;
    let mut cfg = SearchConfig::extremal(&ens)?
        .with_model(a.model.parse::<InferenceModel>()?)
        .with_eps(eps);
    if let Some(l) = &a.leader {
        cfg = cfg.with_leader(parse_leader(l)?);
    }
    if let Some(m) = a.opening {
        cfg = cfg.with_opening(m);
    }
    if a.fixed_order {
        cfg = cfg.fixed_order();
    }
    if let Some(text) = &a.tree {
        let tree: ProtocolTree = text.parse()?;
        let success = eval_tree(&tree, &ens, &cfg)?;
        writeln!(out, "model {}", cfg.model).ok();
        writeln!(out, "success {}", sig10(success)).ok();
        writeln!(out, "delta {}", sig10(1.0 - success)).ok();
        writeln!(out, "tree {tree}").ok();
        return Ok(EXIT_OK);
    }
    let report = delta(&ens, &cfg)?;
    writeln!(out, "ensemble {id}").ok();
    out.push_str(&report.report.to_text());
    writeln!(out, "global_perfect {}", report.global_perfect).ok();
    Ok(EXIT_OK)
}

fn curve_cmd(
    p_min: f64,
    p_max: f64,
    steps: usize,
    path: Option<PathBuf>,
    out: &mut String,
    err: &mut String,
) -> Result<i32> {
    let points = curve(p_min, p_max, steps)?;
    let csv = curve_to_csv(&points);
    let mut summary = String::new();
    let gaps = points.iter().map(|p| p.gap());
    let min_gap = gaps.clone().fold(f64::INFINITY, f64::min);
    let max_gap = gaps.fold(f64::NEG_INFINITY, f64::max);
    let all_below = points.iter().all(|p| p.delta_qt < p.delta_poly);
    writeln!(summary, "points {}", points.len()).ok();
    writeln!(summary, "min_gap {}", sig10(min_gap)).ok();
    writeln!(summary, "max_gap {}", sig10(max_gap)).ok();
    writeln!(summary, "quantum_below_polygon {all_below}").ok();
    match polygon_crossover(p_min, p_max, 1e-12)? {
        Some(p) => writeln!(summary, "polygon_crossover {}", sig10(p)).ok(),
        None => writeln!(summary, "polygon_crossover none").ok(),
    };
    match path {
        Some(path) => {
            std::fs::write(&path, csv).map_err(|e| {
                NweError::InvalidParameter(format!("cannot write {}: {e}", path.display()))
            })?;
            writeln!(out, "wrote {}", path.display()).ok();
            out.push_str(&summary);
        }
        None => {
            out.push_str(&csv);
            err.push_str(&summary);
        }
    }
    Ok(EXIT_OK)
}

fn signal(a: &SignalArgs, out: &mut String) -> Result<i32> {
    if let Some(n) = a.polygon {
        let (m, n_out) = (a.m.unwrap_or(0), a.n.unwrap_or(0));
        let report = certify_polygon(n, m, n_out, a.d)?;
        out.push_str(&report.to_text());
        return Ok(EXIT_OK);
    }
    let k = a.identity.ok_or_else(|| {
        NweError::InvalidParameter("give --polygon with --m/--n, or --identity".into())
    })?;
    let ch = Channel::identity(k)?;
    writeln!(out, "channel identity {k}\nd {}", a.d).ok();
    match in_classical_polytope(&ch, a.d)? {
        Membership::Inside(cert) => {
            writeln!(out, "IN").ok();
            writeln!(out, "terms {}", cert.terms.len()).ok();
            if a.csv {
                out.push_str(&cert.to_csv());
            }
        }
        Membership::Outside(w) => {
            writeln!(out, "NOT-IN").ok();
            writeln!(out, "violation {}", sig10(w.violation())).ok();
            out.push_str(&w.to_csv());
        }
    }
    Ok(EXIT_OK)
}

fn search(id: &str, bound: u64, out: &mut String) -> Result<i32> {
    let id = parse_id(id)?;
    let ens = load(id, PriorFamily::Uniform)?;
    match search_perfect_separable(&ens, bound)? {
        Some(m) => {
            writeln!(out, "FOUND").ok();
            for (i, e) in m.effects.iter().enumerate() {
                writeln!(out, "E{} {}", i + 1, e.label()).ok();
            }
            let cm = confusion_matrix(&m, &ens)?;
            writeln!(out, "identity {}", cm.is_identity(1e-9)).ok();
            if let Ok(cat) = load_measurement(id) {
                writeln!(
                    out,
                    "matches_catalog {}",
                    m.sorted_labels() == cat.sorted_labels()
                )
                .ok();
            }
        }
        None => {
            writeln!(
                out,
                "NONE over {} parties",
                (0..ens.arity()).map(party_letter).collect::<String>()
            )
            .ok();
        }
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> Outcome {
        run_with_env(std::iter::once("nwe").chain(args.iter().copied()), None)
    }

    #[test]
    fn eps_resolution() {
        assert_eq!(resolve_eps(None, None).unwrap(), DEFAULT_EPS);
        assert_eq!(resolve_eps(None, Some("1e-8")).unwrap(), 1e-8);
        assert_eq!(resolve_eps(Some(1e-7), Some("1e-8")).unwrap(), 1e-7);
        assert!(resolve_eps(None, Some("abc")).is_err());
        assert!(resolve_eps(Some(-1.0), None).is_err());
    }

    #[test]
    fn leaders() {
        assert_eq!(parse_leader("Alice").unwrap(), 0);
        assert_eq!(parse_leader("bob").unwrap(), 1);
        assert_eq!(parse_leader("2").unwrap(), 2);
        assert!(parse_leader("dave").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(call(&[]).code, EXIT_USAGE);
        assert_eq!(call(&["verify", "s9"]).code, EXIT_USAGE);
        assert_eq!(
            call(&["local", "s5", "--priors", "biased:0.7"]).code,
            EXIT_USAGE
        );
        assert_eq!(run_with_env(["nwe", "info"], Some("x")).code, EXIT_USAGE);
    }

    #[test]
    fn help_exits_zero() {
        let o = call(&["--help"]);
        assert_eq!(o.code, EXIT_OK);
        assert!(o.stdout.contains("search-measurement"));
    }
}
