//! Command-line front end.
//!
//! Every verb prints a report to standard output: plain `key = value` lines
//! by default, or one JSON object with `--json`. Exit codes: 0 for
//! ok/detected/certified, 1 for rejected/not_detected, 2 for input errors.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimation::{
    hamiltonian_blocks, is_estimable, phi_grid, qfi, sweep, group_eigenspaces, GROUPING_TOL,
};
use crate::format::{
    read_density, read_hermitian, read_json, read_matrix, read_measurement, read_pure, to_canonical_json,
    write_matrix, write_measurement, write_vector, MatrixDoc,
};
use crate::linalg::{CMatrix, PSD_TOL};
use crate::measurements::{dephase_block, dephase_povm, wstate_projector_family, Reference, INCOHERENCE_TOL};
use crate::states::StateSpec;
use crate::witness::{
    certify_witness, construct_witness, evaluate_with_tol, povm_violating_certificate, violating_state,
    witness_from_pure, DETECTION_TOL,
};

/// Significant digits of every number in a report.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Formats `x` with 12 significant digits, trimming trailing zeros.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = SIGNIFICANT_DIGITS as i32;
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..digits).contains(&exp) {
        let decimals = (digits - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        if t == "-0" { "0".into() } else { t.to_string() }
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Detected,
    NotDetected,
    Certified,
    Rejected,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Detected => "detected",
            Status::NotDetected => "not_detected",
            Status::Certified => "certified",
            Status::Rejected => "rejected",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok | Status::Detected | Status::Certified => 0,
            Status::NotDetected | Status::Rejected => 1,
        }
    }
}

#[derive(Debug, Clone)]
enum Field {
    Num(f64),
    Int(usize),
    Bool(bool),
    Text(String),
    Nums(Vec<f64>),
    Ints(Vec<usize>),
}

impl Field {
    fn text(&self) -> String {
        match self {
            Field::Num(x) => fmt_sig(*x),
            Field::Int(n) => n.to_string(),
            Field::Bool(b) => b.to_string(),
            Field::Text(s) => s.clone(),
            Field::Nums(xs) => xs.iter().map(|&x| fmt_sig(x)).collect::<Vec<_>>().join(","),
            Field::Ints(ns) => ns.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","),
        }
    }

    fn json(&self) -> Value {
        // round through the 12-digit text so both forms carry the same value
        let num = |x: f64| fmt_sig(x).parse::<f64>().map(Value::from).unwrap_or(Value::Null);
        match self {
            Field::Num(x) => num(*x),
            Field::Int(n) => json!(n),
            Field::Bool(b) => json!(b),
            Field::Text(s) => json!(s),
            Field::Nums(xs) => Value::Array(xs.iter().map(|&x| num(x)).collect()),
            Field::Ints(ns) => json!(ns),
        }
    }
}

/// Result document of one command.
#[derive(Debug, Clone)]
pub struct Report {
    command: String,
    inputs: Vec<(String, String, String)>,
    tolerances: Vec<(String, f64)>,
    outputs: Vec<(String, Field)>,
    status: Status,
    warnings: Vec<String>,
}

impl Report {
    fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            inputs: Vec::new(),
            tolerances: Vec::new(),
            outputs: Vec::new(),
            status: Status::Ok,
            warnings: Vec::new(),
        }
    }

    fn input(&mut self, role: &str, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)?;
        let digest = hex::encode(Sha256::digest(&bytes));
        self.inputs.push((role.into(), path.display().to_string(), digest));
        Ok(())
    }

    fn tol(&mut self, name: &str, value: f64) {
        self.tolerances.push((name.into(), value));
    }

    fn out(&mut self, key: &str, field: Field) {
        self.outputs.push((key.into(), field));
    }

    fn num(&mut self, key: &str, x: f64) {
        self.out(key, Field::Num(x));
    }

    fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command = {}", self.command);
        let _ = writeln!(s, "status = {}", self.status.as_str());
        for (role, path, digest) in &self.inputs {
            let _ = writeln!(s, "input.{role} = {path} sha256:{digest}");
        }
        for (name, value) in &self.tolerances {
            let _ = writeln!(s, "tol.{name} = {}", fmt_sig(*value));
        }
        for (key, field) in &self.outputs {
            let _ = writeln!(s, "{key} = {}", field.text());
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning = {w}");
        }
        s
    }

    pub fn to_json(&self) -> Value {
        let inputs: Vec<Value> = self
            .inputs
            .iter()
            .map(|(role, path, digest)| json!({"role": role, "path": path, "sha256": digest}))
            .collect();
        let tolerances: Map<String, Value> =
            self.tolerances.iter().map(|(k, v)| (k.clone(), Field::Num(*v).json())).collect();
        let outputs: Map<String, Value> = self.outputs.iter().map(|(k, f)| (k.clone(), f.json())).collect();
        json!({
            "command": self.command,
            "status": self.status.as_str(),
            "inputs": inputs,
            "tolerances": tolerances,
            "outputs": outputs,
            "warnings": self.warnings,
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "cohwit", version, about = "Coherence witnesses, incoherence checks and quantum Fisher information")]
pub struct Cli {
    /// Override the verb's numerical tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Emit the report as a JSON object.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build states.
    #[command(subcommand)]
    State(StateCmd),
    /// Validate or generate measurement references.
    #[command(subcommand)]
    Measure(MeasureCmd),
    /// Apply a dephasing map.
    Dephase(DephaseArgs),
    /// Build, certify and evaluate witnesses.
    #[command(subcommand)]
    Witness(WitnessCmd),
    /// Check incoherence of a state.
    #[command(subcommand)]
    Incoherent(IncoherentCmd),
    /// Phase estimation with a degenerate Hamiltonian.
    #[command(subcommand)]
    Estimate(EstimateCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum StateKind {
    Pure,
    Wstate,
    NoisyWstate,
    MaximallyMixed,
    Random,
    RandomBlockIncoherent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MapKind {
    Block,
    Povm,
}

#[derive(Debug, Subcommand)]
enum StateCmd {
    Make {
        #[arg(long, value_enum)]
        kind: StateKind,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        dim: Option<usize>,
        /// Vector file with the amplitudes of a pure state.
        #[arg(long)]
        amplitudes: Option<PathBuf>,
        /// Write the state vector instead of the density matrix (pure kinds only).
        #[arg(long)]
        vector: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum MeasureCmd {
    Validate {
        file: PathBuf,
    },
    WstateFamily {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct DephaseArgs {
    #[arg(long, value_enum)]
    kind: MapKind,
    #[arg(long)]
    measurement: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum WitnessCmd {
    Build {
        #[arg(long)]
        measurement: PathBuf,
        /// Hermitian operator A; the witness is dephase(A) − A.
        #[arg(long, conflicts_with = "phi", required_unless_present = "phi")]
        a: Option<PathBuf>,
        /// Pure target vector φ; the witness is dephase(|φ⟩⟨φ|) − |φ⟩⟨φ|.
        #[arg(long)]
        phi: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Certify {
        #[arg(long)]
        measurement: PathBuf,
        #[arg(long)]
        witness: PathBuf,
        /// Where to write the violating state when certification fails.
        #[arg(long)]
        violating_out: Option<PathBuf>,
    },
    Eval {
        #[arg(long)]
        measurement: PathBuf,
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        state: PathBuf,
        /// Pure target the witness was built from; enables the fidelity fields.
        #[arg(long)]
        phi: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum IncoherentCmd {
    Check {
        #[arg(long, value_enum)]
        kind: MapKind,
        #[arg(long)]
        measurement: PathBuf,
        #[arg(long)]
        state: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum EstimateCmd {
    Blocks {
        #[arg(long)]
        hamiltonian: PathBuf,
        #[arg(long, default_value_t = GROUPING_TOL)]
        grouping_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Qfi {
        #[arg(long)]
        hamiltonian: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = GROUPING_TOL)]
        grouping_tol: f64,
    },
    Sweep {
        #[arg(long)]
        hamiltonian: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        witness: PathBuf,
        /// Reference the witness is certified against; defaults to the eigenspaces of H.
        #[arg(long)]
        measurement: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        phi_start: f64,
        #[arg(long, allow_hyphen_values = true)]
        phi_end: f64,
        #[arg(long)]
        phi_steps: usize,
        #[arg(long, default_value_t = GROUPING_TOL)]
        grouping_tol: f64,
        /// Write the CSV table here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name), runs the verb and writes the
/// report to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 2;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    if let Some(tol) = cli.tol {
        if tol.is_nan() || tol < 0.0 {
            let _ = writeln!(err, "error: --tol must be a non-negative number");
            return 2;
        }
    }
    match execute(&cli, out) {
        Ok(Some(report)) => {
            let text = if cli.json {
                to_canonical_json(&report.to_json())
            } else {
                report.to_text()
            };
            let _ = out.write_all(text.as_bytes());
            report.status.exit_code()
        }
        Ok(None) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn check_kind(kind: MapKind, reference: &Reference) -> Result<()> {
    match (kind, reference) {
        (MapKind::Block, Reference::Povm(_)) => Err(Error::InvalidMeasurement {
            invariant: "kind",
            index: None,
            detail: "block dephasing requires a \"projectors\" measurement file".into(),
        }),
        _ => Ok(()),
    }
}

fn as_povm_reference(kind: MapKind, reference: Reference) -> Reference {
    match (kind, reference) {
        (MapKind::Povm, Reference::Block(p)) => p.to_povm().into(),
        (_, r) => r,
    }
}

fn write_or_note(report: &mut Report, key: &str, path: Option<&PathBuf>, m: &CMatrix) -> Result<()> {
    match path {
        Some(p) => {
            write_matrix(p, m)?;
            report.out(key, Field::Text(p.display().to_string()));
        }
        None => report.out(key, Field::Text(to_canonical_json(&MatrixDoc::from_matrix(m)).trim_end().replace('\n', ""))),
    }
    Ok(())
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<Option<Report>> {
    match &cli.command {
        Command::State(StateCmd::Make { kind, n, p, seed, dim, amplitudes, vector, out: path }) => {
            let mut report = Report::new("state make");
            report.tol("psd", cli.tol.unwrap_or(PSD_TOL));
            let need_n = || n.ok_or_else(|| Error::InvalidParameter("--n is required for this kind".into()));
            let need_dim = || dim.ok_or_else(|| Error::InvalidParameter("--dim is required for this kind".into()));
            let spec = match kind {
                StateKind::Pure => {
                    let file = amplitudes
                        .as_ref()
                        .ok_or_else(|| Error::InvalidParameter("--amplitudes is required for kind pure".into()))?;
                    report.input("amplitudes", file)?;
                    StateSpec::Pure(read_pure(file)?)
                }
                StateKind::Wstate => StateSpec::WState { n: need_n()? },
                StateKind::NoisyWstate => StateSpec::NoisyWState {
                    n: need_n()?,
                    p: p.ok_or_else(|| Error::InvalidParameter("--p is required for kind noisy_wstate".into()))?,
                },
                StateKind::MaximallyMixed => StateSpec::MaximallyMixed { dim: need_dim()? },
                StateKind::Random => StateSpec::Random { dim: need_dim()?, seed: *seed },
                StateKind::RandomBlockIncoherent => StateSpec::RandomBlockIncoherent { dim: need_dim()?, seed: *seed },
            };
            if *vector {
                let phi = spec
                    .pure()?
                    .ok_or_else(|| Error::InvalidParameter("--vector needs a pure kind (pure, wstate)".into()))?;
                write_vector(path, phi.amplitudes())?;
                report.out("dim", Field::Int(phi.dim()));
            } else {
                let rho = spec.build()?;
                write_matrix(path, rho.matrix())?;
                report.out("dim", Field::Int(rho.dim()));
                report.num("trace", rho.matrix().trace().re);
            }
            report.out("out", Field::Text(path.display().to_string()));
            Ok(Some(report))
        }
        Command::Measure(MeasureCmd::Validate { file }) => {
            let mut report = Report::new("measure validate");
            report.tol("structure", crate::measurements::STRUCTURE_TOL);
            report.input("measurement", file)?;
            let reference = read_measurement(file)?;
            report.out("kind", Field::Text(reference.kind().into()));
            report.out("dim", Field::Int(reference.dim()));
            report.out("operators", Field::Int(reference.operators().len()));
            match &reference {
                Reference::Block(p) => report.out("ranks", Field::Ints(p.ranks().to_vec())),
                Reference::Povm(e) => report.out("projective", Field::Bool(e.is_projective())),
            }
            Ok(Some(report))
        }
        Command::Measure(MeasureCmd::WstateFamily { n, out: path }) => {
            let mut report = Report::new("measure wstate-family");
            let family: Reference = wstate_projector_family(*n)?.into();
            if let Reference::Block(p) = &family {
                report.out("ranks", Field::Ints(p.ranks().to_vec()));
            }
            report.out("dim", Field::Int(family.dim()));
            match path {
                Some(p) => {
                    write_measurement(p, &family)?;
                    report.out("out", Field::Text(p.display().to_string()));
                }
                None => {
                    out.write_all(to_canonical_json(&crate::format::MeasurementDoc::from_reference(&family)).as_bytes())?;
                    return Ok(None);
                }
            }
            Ok(Some(report))
        }
        Command::Dephase(args) => {
            let mut report = Report::new("dephase");
            report.input("measurement", &args.measurement)?;
            report.input("input", &args.input)?;
            let reference = read_measurement(&args.measurement)?;
            check_kind(args.kind, &reference)?;
            let rho = read_matrix(&args.input)?;
            let dephased = match (args.kind, &reference) {
                (MapKind::Block, Reference::Block(p)) => dephase_block(&rho, p)?,
                (MapKind::Povm, Reference::Block(p)) => dephase_povm(&rho, &p.to_povm())?,
                (MapKind::Povm, Reference::Povm(e)) => dephase_povm(&rho, e)?,
                (MapKind::Block, Reference::Povm(_)) => unreachable!("rejected by check_kind"),
            };
            report.out("kind", Field::Text(match args.kind {
                MapKind::Block => "block".into(),
                MapKind::Povm => "povm".into(),
            }));
            report.num("input_trace", rho.trace().re);
            report.num("output_trace", dephased.trace().re);
            if args.kind == MapKind::Povm && (dephased.trace().re - rho.trace().re).abs() > 1e-10 {
                report.warn("POVM dephasing is not trace-preserving for this measurement; output is not renormalized");
            }
            write_or_note(&mut report, "out", args.out.as_ref(), &dephased)?;
            Ok(Some(report))
        }
        Command::Witness(cmd) => witness_cmd(cli, cmd),
        Command::Incoherent(IncoherentCmd::Check { kind, measurement, state }) => {
            let tol = cli.tol.unwrap_or(INCOHERENCE_TOL);
            let mut report = Report::new("incoherent check");
            report.tol("incoherence", tol);
            report.input("measurement", measurement)?;
            report.input("state", state)?;
            let reference = read_measurement(measurement)?;
            check_kind(*kind, &reference)?;
            let reference = as_povm_reference(*kind, reference);
            let rho = read_density(state)?;
            let r = reference.check_incoherent(&rho, tol)?;
            report.out("incoherent", Field::Bool(r.incoherent));
            report.num("max_cross_norm", r.max_cross_norm);
            report.num("residual", r.residual);
            report.num("dephased_trace", r.dephased_trace);
            Ok(Some(report))
        }
        Command::Estimate(cmd) => estimate_cmd(cli, cmd, out),
    }
}

fn witness_cmd(cli: &Cli, cmd: &WitnessCmd) -> Result<Option<Report>> {
    match cmd {
        WitnessCmd::Build { measurement, a, phi, out } => {
            let tol = cli.tol.unwrap_or(PSD_TOL);
            let mut report = Report::new("witness build");
            report.tol("certification", tol);
            report.input("measurement", measurement)?;
            let reference = read_measurement(measurement)?;
            let built = match (a, phi) {
                (Some(path), _) => {
                    report.input("a", path)?;
                    construct_witness(&read_hermitian(path)?, &reference)?
                }
                (None, Some(path)) => {
                    report.input("phi", path)?;
                    witness_from_pure(&read_pure(path)?, &reference)?
                }
                (None, None) => return Err(Error::InvalidParameter("one of --a or --phi is required".into())),
            };
            let w = certify_witness(built.operator(), &reference, tol)?;
            witness_fields(&mut report, w.certified(), w.dephased_min_eigenvalue());
            if !w.certified() {
                report.warn("dephase(W) is not positive semidefinite for this POVM; W is not a certified witness");
            }
            write_or_note(&mut report, "out", out.as_ref(), w.operator().matrix())?;
            Ok(Some(report))
        }
        WitnessCmd::Certify { measurement, witness, violating_out } => {
            let tol = cli.tol.unwrap_or(PSD_TOL);
            let mut report = Report::new("witness certify");
            report.tol("certification", tol);
            report.input("measurement", measurement)?;
            report.input("witness", witness)?;
            let reference = read_measurement(measurement)?;
            let op = read_hermitian(witness)?;
            let w = certify_witness(&op, &reference, tol)?;
            witness_fields(&mut report, w.certified(), w.dephased_min_eigenvalue());
            match &reference {
                Reference::Block(p) => {
                    if let Some(delta) = violating_state(&op, p, tol)? {
                        let value = crate::linalg::trace_product(delta.matrix(), op.matrix()).re;
                        report.num("violating_expectation", value);
                        if let Some(path) = violating_out {
                            write_matrix(path, delta.matrix())?;
                            report.out("violating_out", Field::Text(path.display().to_string()));
                        }
                    }
                }
                Reference::Povm(e) => {
                    if let Some(cert) = povm_violating_certificate(&op, e, tol)? {
                        report.num("violating_expectation", cert.expectation);
                        report.num("certificate_trace", cert.trace);
                        report.num("certificate_max_cross_norm", cert.max_cross_norm);
                        if cert.incoherence_unverified {
                            report.warn("non-projective POVM: incoherence of the converse certificate is asserted by construction, not verified");
                        }
                        if let Some(path) = violating_out {
                            write_matrix(path, cert.operator.matrix())?;
                            report.out("violating_out", Field::Text(path.display().to_string()));
                        }
                    }
                }
            }
            Ok(Some(report))
        }
        WitnessCmd::Eval { measurement, witness, state, phi } => {
            let tol = cli.tol.unwrap_or(DETECTION_TOL);
            let mut report = Report::new("witness eval");
            report.tol("certification", tol);
            report.tol("detection", tol);
            report.input("measurement", measurement)?;
            report.input("witness", witness)?;
            report.input("state", state)?;
            let reference = read_measurement(measurement)?;
            let op = read_hermitian(witness)?;
            let rho = read_density(state)?;
            let mut w = certify_witness(&op, &reference, tol)?;
            witness_fields(&mut report, w.certified(), w.dephased_min_eigenvalue());
            if !w.certified() {
                report.warn("witness is not certified for this reference; expectation not evaluated");
                return Ok(Some(report));
            }
            if let Some(path) = phi {
                report.input("phi", path)?;
                w = w.with_target(read_pure(path)?)?;
            }
            let r = evaluate_with_tol(&w, &rho, tol)?;
            report.num("expectation", r.expectation);
            report.num("detection_value", r.detection_value);
            report.out("detected", Field::Bool(r.detected));
            if let (Some(fd), Some(fr)) = (r.fidelity_dephased, r.fidelity_raw) {
                report.num("fidelity_dephased", fd);
                report.num("fidelity_raw", fr);
            }
            report.status = if r.detected { Status::Detected } else { Status::NotDetected };
            Ok(Some(report))
        }
    }
}

fn witness_fields(report: &mut Report, certified: bool, lambda_min: f64) {
    report.out("certified", Field::Bool(certified));
    report.num("dephased_min_eigenvalue", lambda_min);
    report.status = if certified { Status::Certified } else { Status::Rejected };
}

fn estimate_cmd(cli: &Cli, cmd: &EstimateCmd, out: &mut dyn Write) -> Result<Option<Report>> {
    match cmd {
        EstimateCmd::Blocks { hamiltonian, grouping_tol, out: path } => {
            let mut report = Report::new("estimate blocks");
            report.tol("grouping", *grouping_tol);
            report.input("hamiltonian", hamiltonian)?;
            let h = group_eigenspaces(&read_hermitian(hamiltonian)?, *grouping_tol)?;
            let blocks: Reference = hamiltonian_blocks(&h)?.into();
            report.out("energies", Field::Nums(h.levels().iter().map(|l| l.energy).collect()));
            report.out("ranks", Field::Ints(h.levels().iter().map(|l| l.degeneracy).collect()));
            match path {
                Some(p) => {
                    write_measurement(p, &blocks)?;
                    report.out("out", Field::Text(p.display().to_string()));
                }
                None => {
                    out.write_all(to_canonical_json(&crate::format::MeasurementDoc::from_reference(&blocks)).as_bytes())?;
                    return Ok(None);
                }
            }
            Ok(Some(report))
        }
        EstimateCmd::Qfi { hamiltonian, state, grouping_tol } => {
            let tol = cli.tol.unwrap_or(INCOHERENCE_TOL);
            let mut report = Report::new("estimate qfi");
            report.tol("grouping", *grouping_tol);
            report.tol("estimability", tol);
            report.tol("null_space", crate::estimation::NULL_TOL);
            report.input("hamiltonian", hamiltonian)?;
            report.input("state", state)?;
            let h = group_eigenspaces(&read_hermitian(hamiltonian)?, *grouping_tol)?;
            let rho = read_density(state)?;
            let result = qfi(&rho, &h)?;
            let est = is_estimable(&rho, &h, tol)?;
            report.num("value", result.value);
            report.out("skipped_pairs", Field::Int(result.skipped_pairs));
            report.out("eigen_spectrum", Field::Nums(result.eigen_spectrum));
            report.out("estimable", Field::Bool(est.estimable));
            report.num("off_block_norm", est.off_block_norm);
            Ok(Some(report))
        }
        EstimateCmd::Sweep {
            hamiltonian,
            state,
            witness,
            measurement,
            phi_start,
            phi_end,
            phi_steps,
            grouping_tol,
            out: path,
        } => {
            let tol = cli.tol.unwrap_or(PSD_TOL);
            let h = group_eigenspaces(&read_hermitian(hamiltonian)?, *grouping_tol)?;
            let rho = read_density(state)?;
            let reference = match measurement {
                Some(m) => read_measurement(m)?,
                None => hamiltonian_blocks(&h)?.into(),
            };
            let w = certify_witness(&read_hermitian(witness)?, &reference, tol)?;
            if !w.certified() {
                return Err(Error::UncertifiedWitness { min_eigenvalue: w.dephased_min_eigenvalue() });
            }
            let rows = sweep(&rho, &h, &w, &phi_grid(*phi_start, *phi_end, *phi_steps))?;
            let mut csv = String::from("phi,expectation,detection_value\n");
            for r in &rows {
                let _ = writeln!(csv, "{},{},{}", fmt_sig(r.phi), fmt_sig(r.expectation), fmt_sig(r.detection_value));
            }
            match path {
                Some(p) => {
                    std::fs::write(p, &csv)?;
                    let mut report = Report::new("estimate sweep");
                    report.tol("certification", tol);
                    report.tol("grouping", *grouping_tol);
                    report.input("hamiltonian", hamiltonian)?;
                    report.input("state", state)?;
                    report.input("witness", witness)?;
                    report.out("rows", Field::Int(rows.len()));
                    report.out("out", Field::Text(p.display().to_string()));
                    Ok(Some(report))
                }
                None => {
                    out.write_all(csv.as_bytes())?;
                    Ok(None)
                }
            }
        }
    }
}

/// Reads a matrix file and re-emits it canonically.
pub fn canonicalize(path: &Path) -> Result<String> {
    let doc: MatrixDoc = read_json(path)?;
    doc.to_matrix()?;
    Ok(to_canonical_json(&doc))
}
