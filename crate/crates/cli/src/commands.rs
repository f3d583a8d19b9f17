use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use consensus_core::certificates::{
    check_observer, check_theorem1, check_theorem2, check_theorem2_simplified, check_theorem3,
    design_observer_gain, find_common_p, ConsensusCertificate, ObserverCheck, SystemSpec,
};
use consensus_core::coupling::{reduced_coupling, CouplingMatrix};
use consensus_core::linalg::Matrix;
use consensus_core::simulator::{
    consensus_reached, decay_rate_estimate, disagreement, random_initial_state, simulate_full,
    SimConfig, Trajectory,
};
use consensus_core::spectral::{analyze_spectrum, connectivity_hint, CouplingSpectrum};
use serde_json::{json, Map, Value};

use crate::input::{read_coupling, read_matrix, read_system, Inputs, SystemFile};
use crate::json;

/// Reduced eigenvalues with real part above `-CONNECTIVITY_TOL` count as
/// zero for the connectivity hint.
const CONNECTIVITY_TOL: f64 = 1e-9;
/// Tail fraction of the disagreement series used for the rate fit.
const RATE_WINDOW: f64 = 0.5;
/// Coupling strength used by `design-observer`, relative to `1/|Re λ_2|`.
const DESIGN_COUPLING_FACTOR: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Succeeded,
    /// Verdict false or gain design failed.
    Rejected,
}

pub struct Outcome {
    pub report: Value,
    pub status: Status,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CriterionArg {
    T1,
    T2,
    T2s,
    C1,
    C2,
    T3,
}

impl CriterionArg {
    pub fn name(self) -> &'static str {
        match self {
            Self::T1 => "t1",
            Self::T2 => "t2",
            Self::T2s => "t2s",
            Self::C1 => "c1",
            Self::C2 => "c2",
            Self::T3 => "t3",
        }
    }
}

struct Report {
    fields: Map<String, Value>,
}

impl Report {
    fn new(command: &str, seed: u64) -> Self {
        let mut fields = Map::new();
        fields.insert("command".into(), json!(command));
        fields.insert("seed".into(), json!(seed));
        fields.insert(
            "tool".into(),
            json!({ "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") }),
        );
        fields.insert("certificates".into(), json!([]));
        fields.insert("notes".into(), json!([]));
        for key in ["spectrum", "simulation"] {
            fields.insert(key.into(), Value::Null);
        }
        Self { fields }
    }

    fn set(&mut self, key: &str, v: Value) {
        self.fields.insert(key.into(), v);
    }

    fn push(&mut self, key: &str, v: Value) {
        if let Some(Value::Array(items)) = self.fields.get_mut(key) {
            items.push(v);
        }
    }

    fn note(&mut self, text: impl Into<String>) {
        self.push("notes", Value::String(text.into()));
    }

    fn finish(mut self, inputs: &Inputs, status: Status) -> Outcome {
        self.set("input_digest", json!(inputs.digest()));
        self.set(
            "status",
            json!(match status {
                Status::Succeeded => "ok",
                Status::Rejected => "rejected",
            }),
        );
        Outcome {
            report: Value::Object(self.fields),
            status,
        }
    }
}

fn spectrum_value(l: &CouplingMatrix, spec: &CouplingSpectrum) -> Value {
    json!({
        "agents": l.agents(),
        "full": json::complex_list(spec.full.values()),
        "reduced": json::complex_list(spec.reduced.values()),
        "reduced_coupling": json::matrix(&reduced_coupling(l)),
        "zero_eigenvalue": json::complex(spec.zero_eigenvalue),
        "lambda2": json::complex(spec.lambda2),
        "correspondence_error": json::float(spec.correspondence_error),
        "correspondence_ok": spec.correspondence_ok(),
        "connectivity_hint": connectivity_hint(spec, CONNECTIVITY_TOL),
    })
}

fn certificate_value(cert: &ConsensusCertificate, witness: &str) -> Value {
    let per_mode: Vec<Value> = cert
        .per_mode
        .iter()
        .map(|m| json!({ "lambda": json::complex(m.lambda), "value": json::float(m.value) }))
        .collect();
    json!({
        "criterion": cert.criterion.tag(),
        "verdict": cert.verdict,
        "margin": json::float(cert.margin),
        "per_mode": per_mode,
        "p": cert.p.as_ref().map_or(Value::Null, json::matrix),
        "q": cert.q.as_ref().map_or(Value::Null, json::matrix),
        "parameters": json::object(cert.parameters.iter().map(|(k, v)| (k.clone(), json::float(*v)))),
        "notes": cert.notes,
        "witness": witness,
    })
}

pub fn spectrum(path: &Path, seed: u64) -> Result<Outcome> {
    let mut inputs = Inputs::default();
    let l = read_coupling(&mut inputs, path)?;
    let spec = analyze_spectrum(&l)?;
    let mut report = Report::new("spectrum", seed);
    report.set("spectrum", spectrum_value(&l, &spec));
    if !spec.correspondence_ok() {
        report.note(format!(
            "eig(L) and {{0}} U eig(L*) differ by {:.3e}",
            spec.correspondence_error
        ));
    }
    if !connectivity_hint(&spec, CONNECTIVITY_TOL) {
        report.note("L* has an eigenvalue with nonnegative real part: the coupling graph has no spanning tree");
    }
    Ok(report.finish(&inputs, Status::Succeeded))
}

fn coupling_strength(sys: &SystemFile, flag: Option<f64>) -> Result<f64> {
    flag.or(sys.c)
        .ok_or_else(|| anyhow!("coupling strength missing: set \"c\" in the system file or pass --c"))
}

/// The model-(2) system, with `Γ = FC` for observer coupling.
fn build_spec(sys: &SystemFile, c: f64) -> Result<SystemSpec> {
    Ok(match (&sys.gamma, &sys.f, &sys.c_out) {
        (Some(g), _, _) => SystemSpec::new(sys.a.clone(), g.clone(), c, sys.coupling.clone())?,
        (None, Some(f), Some(co)) => {
            SystemSpec::observer(sys.a.clone(), f.clone(), co.clone(), c, sys.coupling.clone())?
        }
        _ => bail!("the system needs \"Gamma\", or \"F\" and \"C\""),
    })
}

pub struct CertifyArgs {
    pub system: PathBuf,
    pub criterion: CriterionArg,
    pub p: Option<PathBuf>,
    pub auto_p: bool,
    pub c: Option<f64>,
    pub epsilon: f64,
    pub margin: f64,
}

/// The `P` witness: from a file, or searched for with `--auto-p`.
fn witness(
    inputs: &mut Inputs,
    args: &CertifyArgs,
    s: &SystemSpec,
    search: impl FnOnce(&SystemSpec) -> Option<Matrix>,
) -> Result<Option<(Matrix, &'static str)>> {
    if let Some(path) = &args.p {
        return Ok(Some((read_matrix(inputs, path)?, "file")));
    }
    if args.auto_p {
        return Ok(search(s).map(|p| (p, "auto")));
    }
    bail!(
        "criterion {} needs a P witness: pass --p FILE or --auto-p",
        args.criterion.name()
    )
}

pub fn certify(args: &CertifyArgs, seed: u64) -> Result<Outcome> {
    let mut inputs = Inputs::default();
    let sys = read_system(&mut inputs, &args.system)?;
    let c = coupling_strength(&sys, args.c)?;
    let mut report = Report::new("certify", seed);
    let spec = analyze_spectrum(&sys.coupling)?;
    report.set("spectrum", spectrum_value(&sys.coupling, &spec));
    let eps = args.epsilon;

    let found = match args.criterion {
        CriterionArg::T1 => {
            let s = build_spec(&sys, c)?;
            Some((check_theorem1(&s, args.margin)?, "none"))
        }
        CriterionArg::T2 => {
            let s = build_spec(&sys, c)?;
            match witness(&mut inputs, args, &s, |s| find_common_p(s, eps))? {
                Some((p, w)) => Some((check_theorem2(&s, &p, eps)?, w)),
                None => None,
            }
        }
        CriterionArg::T2s => {
            let s = build_spec(&sys, c)?;
            let search = |s: &SystemSpec| {
                let n = s.state_dim();
                find_common_p(s, eps)
                    .into_iter()
                    .chain([Matrix::identity(n)])
                    .find(|p| check_theorem2_simplified(s, p, eps).is_ok_and(|k| k.verdict))
            };
            match witness(&mut inputs, args, &s, search)? {
                Some((p, w)) => Some((check_theorem2_simplified(&s, &p, eps)?, w)),
                None => None,
            }
        }
        CriterionArg::T3 => {
            let s = build_spec(&sys, c)?;
            let search = |s: &SystemSpec| Some(Matrix::identity(s.state_dim()));
            match witness(&mut inputs, args, &s, search)? {
                Some((p, w)) => Some((check_theorem3(&s, &p)?, w)),
                None => None,
            }
        }
        CriterionArg::C1 => {
            if sys.f.is_none() {
                bail!("criterion c1 needs \"F\" and \"C\" in the system file");
            }
            let s = build_spec(&sys, c)?;
            let check = ObserverCheck::Modal {
                margin: args.margin,
            };
            Some((check_observer(&s, &check)?, "none"))
        }
        CriterionArg::C2 => {
            let c_out = sys
                .c_out
                .as_ref()
                .ok_or_else(|| anyhow!("criterion c2 needs \"C\" in the system file"))?;
            if sys.f.is_some() {
                let s = build_spec(&sys, c)?;
                match witness(&mut inputs, args, &s, |s| find_common_p(s, eps))? {
                    Some((p, w)) => {
                        let check = ObserverCheck::CommonP { p, epsilon: eps };
                        Some((check_observer(&s, &check)?, w))
                    }
                    None => None,
                }
            } else {
                match design_observer_gain(&sys.a, c_out, eps) {
                    Ok(design) => {
                        report.set("design", design_value(&design, spec.lambda2));
                        let s = SystemSpec::observer(
                            sys.a.clone(),
                            design.f.clone(),
                            c_out.clone(),
                            c,
                            sys.coupling.clone(),
                        )?;
                        let rule = design.coupling_certifies(c, spec.lambda2);
                        report.note(format!(
                            "F = P^-1 C^T designed from (A, C); c*Re(lambda2) < -1 is {rule}"
                        ));
                        let check = ObserverCheck::CommonP {
                            p: design.p,
                            epsilon: eps,
                        };
                        Some((check_observer(&s, &check)?, "design"))
                    }
                    Err(e) => {
                        report.set("design", Value::Null);
                        report.note(e.to_string());
                        None
                    }
                }
            }
        }
    };

    let status = match found {
        Some((cert, w)) => {
            let verdict = cert.verdict;
            report.push("certificates", certificate_value(&cert, w));
            if verdict {
                Status::Succeeded
            } else {
                Status::Rejected
            }
        }
        None => {
            report.note("no witness P was found; nothing was certified");
            Status::Rejected
        }
    };
    Ok(report.finish(&inputs, status))
}

fn design_value(d: &consensus_core::certificates::ObserverDesign, lambda2: consensus_core::Complex64) -> Value {
    json!({
        "p": json::matrix(&d.p),
        "f": json::matrix(&d.f),
        "epsilon": json::float(d.epsilon),
        "max_eigenvalue": json::float(d.max_eigenvalue),
        "route": d.route,
        "candidates_tried": d.candidates_tried,
        "c_min": json::opt_float(d.min_coupling(lambda2)),
    })
}

pub struct SimulateArgs {
    pub system: PathBuf,
    pub x0: Option<PathBuf>,
    pub c: Option<f64>,
    pub dt: f64,
    pub t_end: f64,
    pub stride: usize,
    pub tol: f64,
    pub out: Option<PathBuf>,
}

fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut text = String::from("t");
    for i in 1..=traj.agents {
        for k in 1..=traj.dim {
            text.push_str(&format!(",x_{i}_{k}"));
        }
    }
    text.push('\n');
    for (t, state) in traj.times.iter().zip(&traj.states) {
        text.push_str(&json::format_float(*t));
        for v in state {
            text.push(',');
            text.push_str(&json::format_float(*v));
        }
        text.push('\n');
    }
    let mut f = fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    f.write_all(text.as_bytes())
        .with_context(|| format!("cannot write {}", path.display()))
}

pub fn simulate(args: &SimulateArgs, seed: u64) -> Result<Outcome> {
    let mut inputs = Inputs::default();
    let sys = read_system(&mut inputs, &args.system)?;
    let c = coupling_strength(&sys, args.c)?;
    let s = build_spec(&sys, c)?;
    let (m, n) = (s.agents(), s.state_dim());
    if !(args.tol.is_finite() && args.tol > 0.0) {
        bail!("--tol must be positive, got {}", args.tol);
    }
    let cfg = SimConfig::new(args.dt, args.t_end, args.stride)?;

    let (x0, source) = match &args.x0 {
        Some(path) => {
            let x = read_matrix(&mut inputs, path)?;
            if x.shape() != (m, n) {
                bail!(
                    "x0 must be {m}x{n} (one row per agent), got {}x{}",
                    x.rows(),
                    x.cols()
                );
            }
            ((0..m).map(|i| x.row(i).to_vec()).collect(), "file")
        }
        None => (random_initial_state(m, n, seed), "seed"),
    };

    let mut traj = simulate_full(&s, &x0, &cfg)?;
    if source == "seed" {
        traj.metadata.seed = Some(seed);
    }
    let d = disagreement(&traj)?;
    let (reached, when) = consensus_reached(&traj, args.tol)?;
    let rate = decay_rate_estimate(&d, RATE_WINDOW).ok();
    if let Some(path) = &args.out {
        write_trajectory(path, &traj)?;
    }

    let mut report = Report::new("simulate", seed);
    let spec = analyze_spectrum(&sys.coupling)?;
    report.set("spectrum", spectrum_value(&sys.coupling, &spec));
    report.set(
        "simulation",
        json!({
            "consensus_reached": reached,
            "consensus_time": json::opt_float(when),
            "decay_rate": json::opt_float(rate),
            "diverged": traj.diverged,
            "initial_disagreement": json::opt_float(d.first()),
            "final_disagreement": json::opt_float(d.last()),
            "final_time": json::opt_float(traj.times.last().copied()),
            "records": traj.len(),
            "dt": json::float(cfg.dt),
            "t_end": json::float(cfg.t_end),
            "stride": cfg.stride,
            "tol": json::float(args.tol),
            "c": json::float(c),
            "initial_state": source,
            "system_digest": traj.metadata.system_digest,
            "trajectory": args.out.as_ref().map(|p| p.display().to_string()),
        }),
    );
    if traj.diverged {
        report.note("a state norm exceeded the divergence limit; the trajectory stops there");
    }
    if rate.is_none() {
        report.note("too few positive disagreement samples for a decay-rate fit");
    }
    Ok(report.finish(&inputs, Status::Succeeded))
}

pub fn design_observer(
    a_path: &Path,
    c_path: &Path,
    l_path: &Path,
    epsilon: f64,
    seed: u64,
) -> Result<Outcome> {
    let mut inputs = Inputs::default();
    let a = read_matrix(&mut inputs, a_path)?;
    let c_out = read_matrix(&mut inputs, c_path)?;
    let l = read_coupling(&mut inputs, l_path)?;
    let n = a.ensure_square()?;
    if c_out.cols() != n {
        bail!("C must have {n} columns to match A, got {}", c_out.cols());
    }
    let spec = analyze_spectrum(&l)?;
    let mut report = Report::new("design-observer", seed);
    report.set("spectrum", spectrum_value(&l, &spec));

    let design = match design_observer_gain(&a, &c_out, epsilon) {
        Ok(d) => d,
        Err(e) => {
            report.set("design", Value::Null);
            report.note(e.to_string());
            return Ok(report.finish(&inputs, Status::Rejected));
        }
    };
    report.set("design", design_value(&design, spec.lambda2));
    let Some(c_min) = design.min_coupling(spec.lambda2) else {
        report.note("Re(lambda2) >= 0: no coupling strength satisfies c*Re(lambda2) < -1");
        return Ok(report.finish(&inputs, Status::Rejected));
    };
    let c = DESIGN_COUPLING_FACTOR * c_min;
    let s = SystemSpec::observer(a, design.f.clone(), c_out, c, l)?;
    let modal = check_observer(&s, &ObserverCheck::Modal { margin: 0.0 })?;
    let common = check_observer(
        &s,
        &ObserverCheck::CommonP {
            p: design.p.clone(),
            epsilon,
        },
    )?;
    report.set("coupling", json::float(c));
    report.push("certificates", certificate_value(&modal, "none"));
    report.push("certificates", certificate_value(&common, "design"));
    let status = if modal.verdict {
        Status::Succeeded
    } else {
        Status::Rejected
    };
    Ok(report.finish(&inputs, status))
}
