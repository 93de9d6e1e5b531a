//! Command implementations behind the `torus-wigner` binary.
//!
//! Exit codes: 0 success, 1 a check failed, 2 malformed input or flags,
//! 3 an input that parses but violates an invariant (unnormalized state,
//! mismatched dimensions, non-unitary operator, ...).

pub mod checks;
pub mod render;

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use torus_wigner::doublespace::WignerPropagator;
use torus_wigner::identities::{self, IdentityReport, IDENTITY_TOL};
use torus_wigner::io::{format_f64, format_reports, DataFile, FileKind};
use torus_wigner::lines::{chord_marginal, wigner_marginal};
use torus_wigner::phase_repr::{center_repr, coherent_state, ArrayKind, DensityMatrix, PhaseArray, PureState};
use torus_wigner::random::{random_density, random_kraus, random_pure_state, random_unitary, rng_from_seed};
use torus_wigner::sic::{self, SearchConfig};
use torus_wigner::weylops::{reflection, schwinger_u, schwinger_v, translation, OperatorMatrix};
use torus_wigner::{Error, PhasePoint, TorusDim};

use render::{ColorMode, RenderSpec};

/// Environment variable naming the directory for outputs without `--out`.
pub const OUT_DIR_ENV: &str = "TORUS_WIGNER_OUT_DIR";

#[derive(Debug)]
pub enum CliError {
    Failure(String),
    Malformed(String),
    Semantic(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Malformed(_) => 2,
            CliError::Semantic(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Failure(m) | CliError::Malformed(m) | CliError::Semantic(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Io(_) => CliError::Malformed(e.to_string()),
            _ => CliError::Semantic(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn parse_label(s: &str) -> Result<PhasePoint, String> {
    let (q, p) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `q,p`, got `{s}`"))?;
    let q = q.trim().parse().map_err(|_| format!("bad integer `{q}`"))?;
    let p = p.trim().parse().map_err(|_| format!("bad integer `{p}`"))?;
    Ok(PhasePoint::new(q, p))
}

#[derive(Parser, Debug)]
#[command(name = "torus-wigner", version, about = "Discrete Weyl-Wigner phase space on the torus")]
#[command(after_help = "Outputs without --out go to $TORUS_WIGNER_OUT_DIR (default: the current directory).\n\
Exit codes: 0 success, 1 check failed, 2 malformed input or flags, 3 invariant or dimension error.")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a state, operator or channel file.
    Gen(GenArgs),
    /// Wigner (center) array of a state or density matrix.
    Wigner(ArrayArgs),
    /// Chord array of a state or density matrix.
    Chord(ArrayArgs),
    /// Render an array file as a binary PPM image.
    Render(RenderArgs),
    /// Run an identity suite and report residuals.
    Identities(IdentitiesArgs),
    /// Search for a SIC fiducial by minimizing the quartic localization M.
    Sic(SicArgs),
    /// Send a state through a unitary or Kraus channel.
    Propagate(PropagateArgs),
    /// Line marginals of a state along one direction, as CSV.
    Marginals(MarginalArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// Position eigenstate |q_j> (--j).
    Position,
    /// Periodized Gaussian centered at (--q, --p) on the unit torus.
    Coherent,
    /// Haar-random pure state.
    RandomPure,
    /// Random density matrix of rank --rank.
    RandomMixed,
    MaximallyMixed,
    /// Identity operator.
    Identity,
    /// Cyclic shift V.
    Shift,
    /// Clock U.
    Clock,
    /// Translation T_xi (--xi).
    Translation,
    /// Reflection R_x (--xi).
    Reflection,
    RandomUnitary,
    /// Random Kraus channel with --count operators.
    RandomKraus,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: GenKind,
    /// Hilbert space dimension.
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Position index for `position`.
    #[arg(long, default_value_t = 0)]
    pub j: usize,
    /// Torus coordinate in [0, 1) for `coherent`.
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,
    #[arg(long, default_value_t = 0.0)]
    pub p: f64,
    /// Integer label `q,p` for `translation` and `reflection`.
    #[arg(long, value_parser = parse_label, default_value = "0,0", allow_hyphen_values = true)]
    pub xi: PhasePoint,
    #[arg(long, default_value_t = 2)]
    pub rank: usize,
    #[arg(long, default_value_t = 2)]
    pub count: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct RenderOpts {
    /// Pixels per lattice cell.
    #[arg(long, default_value_t = 8)]
    pub scale: usize,
    /// Image width in pixels; must be a multiple of 2d and overrides --scale.
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long, value_enum, default_value_t = ColorMode::HlsComplex)]
    pub mode: ColorMode,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
}

impl RenderOpts {
    fn spec(&self, d: usize) -> CliResult<RenderSpec> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(CliError::Malformed(format!("gamma must be positive, got {}", self.gamma)));
        }
        let scale = match self.width {
            Some(w) => RenderSpec::scale_for_width(w, d).map_err(CliError::Malformed)?,
            None if self.scale == 0 => return Err(CliError::Malformed("scale must be positive".into())),
            None => self.scale,
        };
        Ok(RenderSpec {
            scale,
            mode: self.mode,
            gamma: self.gamma,
        })
    }
}

#[derive(Args, Debug)]
pub struct ArrayArgs {
    /// State, density or sic-result file.
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a PPM rendering here.
    #[arg(long)]
    pub render: Option<PathBuf>,
    /// Also write the array as CSV (q, p, re, im) here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub opts: RenderOpts,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    /// Center or chord array file.
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub opts: RenderOpts,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Group,
    Pure,
    Transition,
    Lines,
    Double,
}

#[derive(Args, Debug)]
pub struct IdentitiesArgs {
    /// Zero, one or two state files.
    pub inputs: Vec<PathBuf>,
    /// Defaults to `pure` for one input and `transition` for two.
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    /// Dimension for the state-independent suites when no file is given.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = IDENTITY_TOL)]
    pub tol: f64,
    /// Run the pure-state catalogue even on a density matrix.
    #[arg(long)]
    pub expect_pure: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SicArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub restarts: usize,
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
    /// Stop once M is this close to the Welch bound.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Via {
    Matrix,
    Wigner,
}

#[derive(Args, Debug)]
pub struct PropagateArgs {
    /// State or density file.
    pub state: PathBuf,
    /// Unitary operator or Kraus file.
    pub channel: PathBuf,
    #[arg(long, value_enum, default_value_t = Via::Matrix)]
    pub via: Via,
    /// Run both routes and fail if they disagree by more than --tol.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MarginalArgs {
    /// State, density, center or chord file.
    pub input: PathBuf,
    /// Line direction `q,p`.
    #[arg(long, value_parser = parse_label, default_value = "0,1", allow_hyphen_values = true)]
    pub xi: PhasePoint,
    /// Sum the chord array instead of the Wigner array.
    #[arg(long)]
    pub chord: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `--out` if given, otherwise `name` inside the default output directory.
pub fn resolve_out(out: &Option<PathBuf>, name: &str) -> PathBuf {
    match out {
        Some(p) => p.clone(),
        None => std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."))
            .join(name),
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::Semantic(format!("cannot write {}: {e}", path.display())))
}

fn write_file(path: &Path, f: &DataFile) -> CliResult<()> {
    write_bytes(path, f.to_text().as_bytes())
}

fn read_file(path: &Path) -> CliResult<DataFile> {
    DataFile::read(path).map_err(|e| CliError::Malformed(format!("{}: {e}", path.display())))
}

/// Runs one command; returns the text to print on success.
pub fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Gen(a) => cmd_gen(&a),
        Command::Wigner(a) => cmd_array(&a, ArrayKind::Center),
        Command::Chord(a) => cmd_array(&a, ArrayKind::Chord),
        Command::Render(a) => cmd_render(&a),
        Command::Identities(a) => cmd_identities(&a),
        Command::Sic(a) => cmd_sic(&a),
        Command::Propagate(a) => cmd_propagate(&a),
        Command::Marginals(a) => cmd_marginals(&a),
    }
}

fn torus_label(d: usize, coord: f64) -> CliResult<i64> {
    let scaled = coord * (2 * d) as f64;
    let label = scaled.round();
    if (scaled - label).abs() > 1e-9 {
        return Err(CliError::Malformed(format!(
            "coordinate {coord} is not on the 2d = {} lattice",
            2 * d
        )));
    }
    Ok(label as i64)
}

pub fn cmd_gen(a: &GenArgs) -> CliResult<String> {
    if a.d == 0 {
        return Err(CliError::Malformed("--d must be at least 1".into()));
    }
    let dim = TorusDim::new(a.d);
    let mut rng = rng_from_seed(a.seed);
    let file = match a.kind {
        GenKind::Position => {
            if a.j >= a.d {
                return Err(CliError::Malformed(format!("--j {} out of range for d = {}", a.j, a.d)));
            }
            DataFile::from_state(&PureState::position(&dim, a.j))
        }
        GenKind::Coherent => {
            let center = PhasePoint::new(torus_label(a.d, a.q)?, torus_label(a.d, a.p)?);
            DataFile::from_state(&coherent_state(&dim, center))
        }
        GenKind::RandomPure => DataFile::from_state(&random_pure_state(&dim, &mut rng)),
        GenKind::RandomMixed => {
            if a.rank == 0 || a.rank > a.d {
                return Err(CliError::Malformed(format!("--rank must be in 1..={}", a.d)));
            }
            DataFile::from_density(&random_density(&dim, a.rank, &mut rng))
        }
        GenKind::MaximallyMixed => DataFile::from_density(&DensityMatrix::maximally_mixed(&dim)),
        GenKind::Identity => DataFile::from_operator(&OperatorMatrix::identity(&dim)),
        GenKind::Shift => DataFile::from_operator(&schwinger_v(&dim)),
        GenKind::Clock => DataFile::from_operator(&schwinger_u(&dim)),
        GenKind::Translation => DataFile::from_operator(&translation(&dim, a.xi)),
        GenKind::Reflection => DataFile::from_operator(&reflection(&dim, a.xi)),
        GenKind::RandomUnitary => DataFile::from_operator(&random_unitary(&dim, &mut rng)),
        GenKind::RandomKraus => {
            if a.count == 0 {
                return Err(CliError::Malformed("--count must be positive".into()));
            }
            DataFile::from_kraus(&random_kraus(&dim, a.count, &mut rng))?
        }
    };
    let path = resolve_out(&a.out, &format!("{}.txt", file.kind.name()));
    write_file(&path, &file)?;
    Ok(format!("wrote {} (d = {}) to {}", file.kind.name(), a.d, path.display()))
}

fn load_density(path: &Path) -> CliResult<DensityMatrix> {
    Ok(read_file(path)?.to_density()?)
}

pub fn array_csv(arr: &PhaseArray) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Semantic(e.to_string());
    w.write_record(["q", "p", "re", "im"]).map_err(err)?;
    for (x, z) in arr.iter() {
        w.write_record([x.q.to_string(), x.p.to_string(), format_f64(z.re), format_f64(z.im)])
            .map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Semantic(e.to_string()))
}

pub fn cmd_array(a: &ArrayArgs, kind: ArrayKind) -> CliResult<String> {
    let rho = load_density(&a.input)?;
    let arr = match kind {
        ArrayKind::Center => rho.wigner(),
        ArrayKind::Chord => rho.chord(),
    };
    let path = resolve_out(&a.out, &format!("{}.txt", kind.name()));
    write_file(&path, &DataFile::from_array(&arr))?;
    let mut msg = format!("wrote {} array (d = {}) to {}", kind.name(), arr.dim().d(), path.display());
    if let Some(img) = &a.render {
        let spec = a.opts.spec(arr.dim().d())?;
        write_bytes(img, &render::render_ppm(&arr, &spec))?;
        msg.push_str(&format!("\nrendered {}", img.display()));
    }
    if let Some(csv_path) = &a.csv {
        write_bytes(csv_path, &array_csv(&arr)?)?;
        msg.push_str(&format!("\nwrote {}", csv_path.display()));
    }
    Ok(msg)
}

pub fn cmd_render(a: &RenderArgs) -> CliResult<String> {
    let arr = read_file(&a.input)?
        .to_array()
        .map_err(|e| CliError::Malformed(format!("{}: {e}", a.input.display())))?;
    let spec = a.opts.spec(arr.dim().d())?;
    let path = resolve_out(&a.out, "render.ppm");
    write_bytes(&path, &render::render_ppm(&arr, &spec))?;
    Ok(format!("rendered {}", path.display()))
}

fn suite_dim(a: &IdentitiesArgs, files: &[DataFile]) -> CliResult<TorusDim> {
    match (files.first(), a.d) {
        (Some(f), _) => Ok(TorusDim::new(f.dim)),
        (None, Some(d)) if d >= 1 => Ok(TorusDim::new(d)),
        _ => Err(CliError::Malformed("give a state file or --d".into())),
    }
}

pub fn cmd_identities(a: &IdentitiesArgs) -> CliResult<String> {
    let files = a.inputs.iter().map(|p| read_file(p)).collect::<CliResult<Vec<_>>>()?;
    let suite = match (a.suite, files.len()) {
        (Some(s), _) => s,
        (None, 2) => Suite::Transition,
        (None, 1) => Suite::Pure,
        (None, _) => Suite::Group,
    };
    if files.len() > 2 {
        return Err(CliError::Malformed("at most two input files".into()));
    }
    let mut notes = Vec::new();
    let reports: Vec<IdentityReport> = match suite {
        Suite::Group => checks::group_suite(&suite_dim(a, &files)?, a.tol),
        Suite::Double => checks::double_suite(&suite_dim(a, &files)?, a.tol)?,
        Suite::Lines => {
            let f = files
                .first()
                .ok_or_else(|| CliError::Malformed("the lines suite needs a state file".into()))?;
            checks::lines_suite(&f.to_density()?, a.tol)?
        }
        Suite::Pure => {
            let f = files
                .first()
                .ok_or_else(|| CliError::Malformed("the pure suite needs a state file".into()))?;
            let rho = f.to_density()?;
            let pure = f.kind != FileKind::Density;
            let mut reps = if pure || a.expect_pure {
                identities::state_suite(&rho)
            } else {
                notes.push(format!(
                    "input is a density matrix (purity {}); running the operator identities only, pass --expect-pure for the pure-state catalogue",
                    format_f64(rho.purity())
                ));
                identities::main_formula_suite(rho.operator(), rho.operator())?
            };
            for r in &mut reps {
                r.tolerance = a.tol;
                r.passed = r.residual <= a.tol;
            }
            reps
        }
        Suite::Transition => {
            if files.len() != 2 {
                return Err(CliError::Malformed("the transition suite needs two state files".into()));
            }
            let (s1, s2) = (files[0].to_state()?, files[1].to_state()?);
            if s1.dim().d() != s2.dim().d() {
                return Err(CliError::Semantic(format!(
                    "dimension mismatch: {} vs {}",
                    s1.dim().d(),
                    s2.dim().d()
                )));
            }
            let mut reps = identities::transition_suite(&s1, &s2)?;
            for r in &mut reps {
                r.tolerance = a.tol;
                r.passed = r.residual <= a.tol;
            }
            reps
        }
    };
    let mut text = format_reports(&reports);
    for n in &notes {
        text.push_str(&format!("# {n}\n"));
    }
    let path = resolve_out(&a.out, "identities.txt");
    write_bytes(&path, text.as_bytes())?;
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        Ok(text)
    } else {
        Err(CliError::Failure(format!("{text}failed: {}", failed.join(", "))))
    }
}

pub fn cmd_sic(a: &SicArgs) -> CliResult<String> {
    if a.d < 2 {
        return Err(CliError::Malformed("--d must be at least 2".into()));
    }
    if a.restarts == 0 || a.max_iters == 0 {
        return Err(CliError::Malformed("--restarts and --max-iters must be positive".into()));
    }
    let mut config = SearchConfig::new(a.d).with_seed(a.seed);
    config.restarts = a.restarts;
    config.max_iters = a.max_iters;
    config.target_tol = a.tol;
    let result = sic::search(&config);
    let path = resolve_out(&a.out, &format!("sic-d{}.txt", a.d));
    write_file(&path, &DataFile::from_sic_result(&result))?;
    Ok(format!(
        "d = {}\nM = {}\nwelch = {}\ngap = {}\nflat_chord_residual = {}\nrestarts_run = {}\nwrote {}",
        a.d,
        format_f64(result.best_m),
        format_f64(identities::welch_bound(a.d)),
        format_f64(result.gap),
        format_f64(result.flat_chord_residual),
        result.restarts_run,
        path.display()
    ))
}

/// Loads a channel file as Kraus operators and reports whether it was a
/// single unitary.
fn load_channel(path: &Path) -> CliResult<(Vec<OperatorMatrix>, bool)> {
    let f = read_file(path)?;
    let ops = f.to_kraus()?;
    Ok((ops, f.kind == FileKind::Operator))
}

pub fn cmd_propagate(a: &PropagateArgs) -> CliResult<String> {
    let rho = load_density(&a.state)?;
    let (ops, unitary) = load_channel(&a.channel)?;
    let d = rho.dim().d();
    if ops[0].dim().d() != d {
        return Err(CliError::Semantic(format!(
            "dimension mismatch: state has d = {d}, channel has d = {}",
            ops[0].dim().d()
        )));
    }

    let by_matrix = || -> OperatorMatrix {
        let mut acc = OperatorMatrix::zeros(rho.dim());
        for k in &ops {
            acc = &acc + &(&(k * rho.operator()) * &k.adjoint());
        }
        acc
    };
    let by_wigner = || -> CliResult<PhaseArray> {
        let prop = if unitary {
            WignerPropagator::from_unitary(&ops[0])?
        } else {
            WignerPropagator::from_kraus(&ops)?
        };
        Ok(prop.propagate(&rho.wigner())?)
    };

    let mut msg = String::new();
    let (file, name) = match a.via {
        Via::Matrix => {
            if unitary && ops[0].unitarity_defect() > torus_wigner::doublespace::UNITARY_TOL {
                return Err(CliError::Semantic(
                    Error::NotUnitary {
                        deviation: ops[0].unitarity_defect(),
                    }
                    .to_string(),
                ));
            }
            let out = by_matrix();
            let rho_out = DensityMatrix::from_operator(out)?;
            (DataFile::from_density(&rho_out), "propagated-density.txt")
        }
        Via::Wigner => (DataFile::from_array(&by_wigner()?), "propagated-center.txt"),
    };
    if a.verify {
        let w_matrix = center_repr(&by_matrix());
        let w_wigner = by_wigner()?;
        let residual = w_matrix.max_abs_diff(&w_wigner);
        msg.push_str(&format!("verify: max |W_matrix - W_wigner| = {}\n", format_f64(residual)));
        if residual > a.tol {
            return Err(CliError::Failure(format!("{msg}routes disagree beyond tolerance {}", a.tol)));
        }
    }
    let path = resolve_out(&a.out, name);
    write_file(&path, &file)?;
    msg.push_str(&format!("wrote {}", path.display()));
    Ok(msg)
}

pub fn cmd_marginals(a: &MarginalArgs) -> CliResult<String> {
    let f = read_file(&a.input)?;
    let arr = match f.kind {
        FileKind::Center | FileKind::Chord => f.to_array()?,
        _ => {
            let rho = f.to_density()?;
            if a.chord {
                rho.chord()
            } else {
                rho.wigner()
            }
        }
    };
    if a.xi.reduced(arr.dim().two_d()).is_origin() {
        return Err(CliError::Malformed("direction must be nonzero".into()));
    }
    let values: Vec<Complex64> = match arr.kind() {
        ArrayKind::Center => wigner_marginal(&arr, a.xi)?.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        ArrayKind::Chord => chord_marginal(&arr, a.xi)?,
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Semantic(e.to_string());
    match arr.kind() {
        ArrayKind::Center => {
            w.write_record(["line", "value"]).map_err(err)?;
            for (i, v) in values.iter().enumerate() {
                w.write_record([i.to_string(), format_f64(v.re)]).map_err(err)?;
            }
        }
        ArrayKind::Chord => {
            w.write_record(["line", "re", "im"]).map_err(err)?;
            for (i, v) in values.iter().enumerate() {
                w.write_record([i.to_string(), format_f64(v.re), format_f64(v.im)]).map_err(err)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Semantic(e.to_string()))?;
    let path = resolve_out(&a.out, "marginals.csv");
    write_bytes(&path, &bytes)?;
    Ok(format!("wrote {} marginals along {} to {}", values.len(), a.xi, path.display()))
}
