//! Line-oriented text format for states, operators, arrays and channels.
//!
//! ```text
//! torus-wigner 1
//! kind density
//! dim 2
//! meta note maximally mixed
//! block 4
//! [5.0000000000000000e-1, 0.0000000000000000e0]
//! [0.0000000000000000e0, 0.0000000000000000e0]
//! [0.0000000000000000e0, 0.0000000000000000e0]
//! [5.0000000000000000e-1, 0.0000000000000000e0]
//! end
//! ```
//!
//! Matrices and arrays are stored row-major. Numbers are written with 17
//! significant digits, which is enough to recover every `f64` exactly, so
//! emit, parse, emit is byte-identical.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;

use crate::doublespace::{Provenance, SuperOperator};
use crate::error::{Error, Result};
use crate::identities::IdentityReport;
use crate::lattice::TorusDim;
use crate::phase_repr::{ArrayKind, DensityMatrix, PhaseArray, PureState};
use crate::sic::{SearchConfig, SearchResult};
use crate::weylops::{CMatrix, OperatorMatrix};

pub const MAGIC: &str = "torus-wigner";
pub const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FileKind {
    State,
    Density,
    Operator,
    Center,
    Chord,
    Kraus,
    Superop,
    SicResult,
}

impl FileKind {
    pub const ALL: [FileKind; 8] = [
        FileKind::State,
        FileKind::Density,
        FileKind::Operator,
        FileKind::Center,
        FileKind::Chord,
        FileKind::Kraus,
        FileKind::Superop,
        FileKind::SicResult,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FileKind::State => "state",
            FileKind::Density => "density",
            FileKind::Operator => "operator",
            FileKind::Center => "center",
            FileKind::Chord => "chord",
            FileKind::Kraus => "kraus",
            FileKind::Superop => "superop",
            FileKind::SicResult => "sic-result",
        }
    }

    /// Entries per block for dimension `d`.
    pub fn block_len(self, d: usize) -> usize {
        match self {
            FileKind::State | FileKind::SicResult => d,
            FileKind::Density | FileKind::Operator | FileKind::Kraus => d * d,
            FileKind::Center | FileKind::Chord => 4 * d * d,
            FileKind::Superop => d.pow(4),
        }
    }
}

impl FromStr for FileKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        FileKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown kind `{s}`"))
    }
}

/// The raw contents of a data file.
#[derive(Clone, Debug, PartialEq)]
pub struct DataFile {
    pub kind: FileKind,
    pub dim: usize,
    pub meta: Vec<(String, String)>,
    pub blocks: Vec<Vec<Complex64>>,
}

pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

impl DataFile {
    pub fn new(kind: FileKind, dim: usize) -> Self {
        DataFile {
            kind,
            dim,
            meta: Vec::new(),
            blocks: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn with_block(mut self, block: Vec<Complex64>) -> Self {
        self.blocks.push(block);
        self
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn meta_parsed<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self
            .meta(key)
            .ok_or_else(|| parse_err(0, format!("missing meta field `{key}`")))?;
        raw.parse()
            .map_err(|_| parse_err(0, format!("bad value `{raw}` for `{key}`")))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC} {VERSION}");
        let _ = writeln!(out, "kind {}", self.kind.name());
        let _ = writeln!(out, "dim {}", self.dim);
        for (k, v) in &self.meta {
            let _ = writeln!(out, "meta {k} {v}");
        }
        for block in &self.blocks {
            let _ = writeln!(out, "block {}", block.len());
            for z in block {
                let _ = writeln!(out, "[{}, {}]", format_f64(z.re), format_f64(z.im));
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| parse_err(0, format!("unexpected end of file, expected {what}")))
        };

        let (n, header) = next("header")?;
        let version = header
            .strip_prefix(MAGIC)
            .map(str::trim)
            .ok_or_else(|| parse_err(n, format!("missing `{MAGIC}` header")))?;
        if version != VERSION.to_string() {
            return Err(parse_err(n, format!("unsupported format version `{version}`")));
        }

        let (n, kind_line) = next("kind")?;
        let kind = kind_line
            .strip_prefix("kind ")
            .ok_or_else(|| parse_err(n, "expected `kind <name>`"))?
            .parse::<FileKind>()
            .map_err(|m| parse_err(n, m))?;

        let (n, dim_line) = next("dim")?;
        let dim: usize = dim_line
            .strip_prefix("dim ")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(n, "expected `dim <positive integer>`"))?;
        if dim == 0 {
            return Err(parse_err(n, "dimension must be positive"));
        }

        let mut file = DataFile::new(kind, dim);
        loop {
            let (n, line) = next("`end`")?;
            if line == "end" {
                break;
            }
            if let Some(rest) = line.strip_prefix("meta ") {
                let (k, v) = rest
                    .split_once(' ')
                    .ok_or_else(|| parse_err(n, "expected `meta <key> <value>`"))?;
                file.meta.push((k.to_string(), v.to_string()));
            } else if let Some(len) = line.strip_prefix("block ") {
                let len: usize = len
                    .parse()
                    .map_err(|_| parse_err(n, "expected `block <length>`"))?;
                let expected = kind.block_len(dim);
                if len != expected {
                    return Err(parse_err(
                        n,
                        format!("{} block of d = {dim} needs {expected} entries, header says {len}", kind.name()),
                    ));
                }
                let mut block = Vec::with_capacity(len);
                for _ in 0..len {
                    let (n, entry) = next("matrix entry")?;
                    block.push(parse_pair(entry).ok_or_else(|| parse_err(n, format!("bad entry `{entry}`")))?);
                }
                file.blocks.push(block);
            } else {
                return Err(parse_err(n, format!("unexpected line `{line}`")));
            }
        }
        if let Some((n, extra)) = lines.find(|(_, l)| !l.is_empty()) {
            return Err(parse_err(n, format!("trailing content `{extra}`")));
        }

        let blocks = file.blocks.len();
        let ok = match kind {
            FileKind::Kraus => blocks >= 1,
            _ => blocks == 1,
        };
        if !ok {
            return Err(parse_err(0, format!("{} file has {blocks} blocks", kind.name())));
        }
        Ok(file)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    fn expect_kind(&self, kinds: &[FileKind]) -> Result<()> {
        if kinds.contains(&self.kind) {
            Ok(())
        } else {
            let wanted: Vec<&str> = kinds.iter().map(|k| k.name()).collect();
            Err(parse_err(
                0,
                format!("expected a {} file, found {}", wanted.join(" or "), self.kind.name()),
            ))
        }
    }

    fn torus(&self) -> TorusDim {
        TorusDim::new(self.dim)
    }

    pub fn from_state(psi: &PureState) -> Self {
        DataFile::new(FileKind::State, psi.dim().d()).with_block(psi.amplitudes().to_vec())
    }

    pub fn from_operator(op: &OperatorMatrix) -> Self {
        DataFile::new(FileKind::Operator, op.dim().d()).with_block(row_major(op.matrix()))
    }

    pub fn from_density(rho: &DensityMatrix) -> Self {
        DataFile::new(FileKind::Density, rho.dim().d()).with_block(row_major(rho.matrix()))
    }

    pub fn from_array(arr: &PhaseArray) -> Self {
        let kind = match arr.kind() {
            ArrayKind::Center => FileKind::Center,
            ArrayKind::Chord => FileKind::Chord,
        };
        DataFile::new(kind, arr.dim().d()).with_block(arr.entries().to_vec())
    }

    pub fn from_kraus(ops: &[OperatorMatrix]) -> Result<Self> {
        let first = ops.first().ok_or(Error::EmptyList)?;
        let mut f = DataFile::new(FileKind::Kraus, first.dim().d());
        for k in ops {
            f.blocks.push(row_major(k.matrix()));
        }
        Ok(f)
    }

    pub fn from_superop(s: &SuperOperator) -> Self {
        DataFile::new(FileKind::Superop, s.dim().d())
            .with_meta("provenance", s.provenance().name())
            .with_block(row_major(s.matrix()))
    }

    pub fn from_sic_result(r: &SearchResult) -> Self {
        let c = &r.config;
        DataFile::new(FileKind::SicResult, c.d)
            .with_meta("seed", c.seed)
            .with_meta("restarts", c.restarts)
            .with_meta("max_iters", c.max_iters)
            .with_meta("armijo", format_f64(c.armijo))
            .with_meta("initial_step", format_f64(c.initial_step))
            .with_meta("min_step", format_f64(c.min_step))
            .with_meta("target_tol", format_f64(c.target_tol))
            .with_meta("inner_tol", format_f64(c.inner_tol))
            .with_meta("m", format_f64(r.best_m))
            .with_meta("gap", format_f64(r.gap))
            .with_meta("iterations", r.iterations)
            .with_meta("best_restart", r.best_restart)
            .with_meta("restarts_run", r.restarts_run)
            .with_meta("flat_chord_residual", format_f64(r.flat_chord_residual))
            .with_block(r.best_state.amplitudes().to_vec())
    }

    /// A pure state; `sic-result` files yield their best state.
    pub fn to_state(&self) -> Result<PureState> {
        self.expect_kind(&[FileKind::State, FileKind::SicResult])?;
        PureState::new(&self.torus(), self.blocks[0].clone())
    }

    /// A density matrix; pure-state files are promoted to projectors.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        self.expect_kind(&[FileKind::Density, FileKind::State, FileKind::SicResult])?;
        match self.kind {
            FileKind::Density => DensityMatrix::new(&self.torus(), self.matrix(0)),
            _ => Ok(self.to_state()?.to_density()),
        }
    }

    pub fn to_operator(&self) -> Result<OperatorMatrix> {
        self.expect_kind(&[FileKind::Operator, FileKind::Density])?;
        OperatorMatrix::new(&self.torus(), self.matrix(0))
    }

    pub fn to_array(&self) -> Result<PhaseArray> {
        self.expect_kind(&[FileKind::Center, FileKind::Chord])?;
        let kind = if self.kind == FileKind::Center {
            ArrayKind::Center
        } else {
            ArrayKind::Chord
        };
        PhaseArray::new(&self.torus(), kind, self.blocks[0].clone())
    }

    /// Kraus operators; a single `operator` file counts as a one-element set.
    pub fn to_kraus(&self) -> Result<Vec<OperatorMatrix>> {
        self.expect_kind(&[FileKind::Kraus, FileKind::Operator])?;
        (0..self.blocks.len())
            .map(|i| OperatorMatrix::new(&self.torus(), self.matrix(i)))
            .collect()
    }

    pub fn to_superop(&self) -> Result<SuperOperator> {
        self.expect_kind(&[FileKind::Superop])?;
        let n = self.dim * self.dim;
        let m = CMatrix::from_row_slice(n, n, &self.blocks[0]);
        let prov = match self.meta("provenance") {
            Some("unitary-conjugation") => Provenance::UnitaryConjugation,
            Some("kraus") => Provenance::Kraus,
            _ => Provenance::Generic,
        };
        Ok(SuperOperator::new(&self.torus(), m)?.with_provenance(prov))
    }

    pub fn to_sic_result(&self) -> Result<SearchResult> {
        self.expect_kind(&[FileKind::SicResult])?;
        let mut config = SearchConfig::new(self.dim);
        config.seed = self.meta_parsed("seed")?;
        config.restarts = self.meta_parsed("restarts")?;
        config.max_iters = self.meta_parsed("max_iters")?;
        config.armijo = self.meta_parsed("armijo")?;
        config.initial_step = self.meta_parsed("initial_step")?;
        config.min_step = self.meta_parsed("min_step")?;
        config.target_tol = self.meta_parsed("target_tol")?;
        config.inner_tol = self.meta_parsed("inner_tol")?;
        Ok(SearchResult {
            config,
            best_state: self.to_state()?,
            best_m: self.meta_parsed("m")?,
            gap: self.meta_parsed("gap")?,
            iterations: self.meta_parsed("iterations")?,
            best_restart: self.meta_parsed("best_restart")?,
            restarts_run: self.meta_parsed("restarts_run")?,
            flat_chord_residual: self.meta_parsed("flat_chord_residual")?,
        })
    }

    fn matrix(&self, block: usize) -> CMatrix {
        CMatrix::from_row_slice(self.dim, self.dim, &self.blocks[block])
    }
}

fn row_major(m: &CMatrix) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

fn parse_pair(s: &str) -> Option<Complex64> {
    let inner = s.trim().strip_prefix('[')?.strip_suffix(']')?;
    let (re, im) = inner.split_once(',')?;
    Some(Complex64::new(re.trim().parse().ok()?, im.trim().parse().ok()?))
}

/// Identity reports as an aligned table, one identity per line.
pub fn format_reports(reports: &[IdentityReport]) -> String {
    let width = reports.iter().map(|r| r.name.len()).max().unwrap_or(4).max(8);
    let mut out = format!("{:<width$}  {:>24}  {:>24}  result\n", "identity", "residual", "tolerance");
    for r in reports {
        let _ = writeln!(
            out,
            "{:<width$}  {:>24}  {:>24}  {}",
            r.name,
            format_f64(r.residual),
            format_f64(r.tolerance),
            if r.passed { "pass" } else { "FAIL" }
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_kraus, random_pure_state, rng_from_seed};
    use proptest::prelude::*;

    fn roundtrip(f: &DataFile) -> DataFile {
        let text = f.to_text();
        let back = DataFile::parse(&text).unwrap();
        assert_eq!(back.to_text(), text);
        back
    }

    #[test]
    fn typed_roundtrips() {
        let mut rng = rng_from_seed(3);
        let dim = TorusDim::new(3);
        let psi = random_pure_state(&dim, &mut rng);
        let back = roundtrip(&DataFile::from_state(&psi)).to_state().unwrap();
        assert_eq!(back.amplitudes(), psi.amplitudes());

        let rho = random_density(&dim, 2, &mut rng);
        let back = roundtrip(&DataFile::from_density(&rho)).to_density().unwrap();
        assert_eq!(back.matrix(), rho.matrix());

        let w = rho.wigner();
        let back = roundtrip(&DataFile::from_array(&w)).to_array().unwrap();
        assert_eq!(back, w);
        let c = rho.chord();
        assert_eq!(roundtrip(&DataFile::from_array(&c)).to_array().unwrap(), c);

        let ks = random_kraus(&dim, 3, &mut rng);
        let back = roundtrip(&DataFile::from_kraus(&ks).unwrap()).to_kraus().unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in back.iter().zip(&ks) {
            assert_eq!(a.matrix(), b.matrix());
        }

        let s = crate::doublespace::kraus_superop(&ks).unwrap();
        let back = roundtrip(&DataFile::from_superop(&s)).to_superop().unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn sic_result_roundtrip() {
        let mut cfg = SearchConfig::new(2);
        cfg.restarts = 2;
        cfg.max_iters = 50;
        let r = crate::sic::search(&cfg);
        let back = roundtrip(&DataFile::from_sic_result(&r)).to_sic_result().unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn special_values_survive() {
        let vals = [0.0, -0.0, 1.0, -1.0, f64::MIN_POSITIVE, 5e-324, f64::MAX, 0.1, 1.0 / 3.0];
        let block: Vec<Complex64> = vals.iter().map(|&v| Complex64::new(v, -v)).collect();
        let mut f = DataFile::new(FileKind::State, 9).with_block(block.clone());
        f.meta.push(("note".into(), "spaces are fine here".into()));
        let back = roundtrip(&f);
        for (a, b) in back.blocks[0].iter().zip(&block) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        assert_eq!(back.meta("note"), Some("spaces are fine here"));
    }

    #[test]
    fn malformed_inputs_are_parse_errors() {
        let good = DataFile::from_state(&PureState::position(&TorusDim::new(2), 0)).to_text();
        let cases = [
            String::new(),
            good.replace("torus-wigner 1", "torus-wigner 9"),
            good.replace("torus-wigner 1", "wigner 1"),
            good.replace("kind state", "kind banana"),
            good.replace("dim 2", "dim 0"),
            good.replace("dim 2", "dim x"),
            good.replace("block 2", "block 3"),
            good.replace("[1.0000000000000000e0, 0.0000000000000000e0]", "[1.0, oops]"),
            good.replace("end\n", ""),
            format!("{good}junk\n"),
        ];
        for text in &cases {
            assert!(matches!(DataFile::parse(text), Err(Error::Parse { .. })), "accepted:\n{text}");
        }
    }

    #[test]
    fn semantic_errors_are_not_parse_errors() {
        let f = DataFile::new(FileKind::State, 2).with_block(vec![Complex64::new(1.0, 0.0); 2]);
        let f = DataFile::parse(&f.to_text()).unwrap();
        assert!(matches!(f.to_state(), Err(Error::NotNormalized { .. })));
        assert!(matches!(f.to_array(), Err(Error::Parse { .. })));
    }

    #[test]
    fn report_table_lists_every_identity() {
        let psi = PureState::position(&TorusDim::new(3), 1);
        let reports = crate::identities::pure_state_suite(&psi).unwrap();
        let text = format_reports(&reports);
        assert_eq!(text.lines().count(), reports.len() + 1);
        assert!(text.contains("quartic_m"));
    }

    proptest! {
        #[test]
        fn arbitrary_numbers_roundtrip(re in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO,
                                       im in proptest::num::f64::ANY.prop_filter("finite", |x| x.is_finite())) {
            let f = DataFile::new(FileKind::State, 1).with_block(vec![Complex64::new(re, im)]);
            let text = f.to_text();
            let back = DataFile::parse(&text).unwrap();
            prop_assert_eq!(back.to_text(), text);
            prop_assert_eq!(back.blocks[0][0].re.to_bits(), re.to_bits());
        }
    }
}
