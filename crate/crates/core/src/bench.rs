//! Bond-scan benchmarks against exact singlet energies.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adaptive::{run, AnsatzFlavor, OptimizerConfig, SolverConfig};
use crate::chem::{
    build_hamiltonian, fock_sector, hartree_fock_occupation, make_pool, penalized_hamiltonian, s_squared,
    MolecularSystem, PoolFlavor,
};
use crate::dressing::{run_adapt_ft, FtConfig, DEFAULT_TERM_CAP};
use crate::error::{Error, Result};
use crate::pauli::{PauliSum, DEFAULT_THRESHOLD};
use crate::sim::{expectation, subspace_eigensystem, ReferenceState, StateVector};

pub const KCAL_PER_HARTREE: f64 = 627.509474;
/// Spin penalty used for every solver run (Hartree).
pub const DEFAULT_MU: f64 = 0.5;
/// Largest `<S^2>` accepted as a singlet.
pub const SINGLET_TOL: f64 = 1e-6;

/// Lowest singlet energy of `h` in the `(n_alpha, n_beta)` sector of `sys`.
pub fn exact_singlet_energy(sys: &MolecularSystem, h: &PauliSum) -> Result<f64> {
    let s2 = s_squared(sys.n_orbitals)?;
    // Shifting by S^2 orders the singlet first without changing its energy.
    let shifted = h.add(&s2)?;
    let sector = fock_sector(sys.n_orbitals, sys.n_alpha(), sys.n_beta());
    for (_, psi) in subspace_eigensystem(&shifted, &sector)? {
        if expectation(&s2, &psi)?.re.abs() < SINGLET_TOL {
            return Ok(expectation(h, &psi)?.re);
        }
    }
    Err(Error::Domain("no singlet in the electron-number sector".into()))
}

pub fn hartree_fock_energy(sys: &MolecularSystem, h: &PauliSum) -> Result<f64> {
    let reference = ReferenceState::new(hartree_fock_occupation(sys), sys.n_electrons)?;
    Ok(expectation(h, &StateVector::from_reference(h.n_qubits(), &reference)?)?.re)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Hf,
    Adapt,
    Adaft,
    AdaptFt,
}

impl FromStr for MethodKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "hf" => Ok(MethodKind::Hf),
            "adapt" => Ok(MethodKind::Adapt),
            "adaft" => Ok(MethodKind::Adaft),
            "adapt_ft" => Ok(MethodKind::AdaptFt),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub kind: MethodKind,
    pub pool: PoolFlavor,
    pub d: usize,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub k: usize,
    pub m: usize,
    pub mu: f64,
    pub threshold: f64,
    pub tie_tolerance: f64,
    pub optimizer: OptimizerConfig,
    pub track_hamiltonian: bool,
    pub term_cap: usize,
}

impl Default for MethodSpec {
    fn default() -> Self {
        MethodSpec {
            kind: MethodKind::Adaft,
            pool: PoolFlavor::QubitExcitation,
            d: 1,
            epsilon: 1e-3,
            max_iterations: 200,
            k: 5,
            m: 1,
            mu: DEFAULT_MU,
            threshold: DEFAULT_THRESHOLD,
            tie_tolerance: 1e-6,
            optimizer: OptimizerConfig::default(),
            track_hamiltonian: false,
            term_cap: DEFAULT_TERM_CAP,
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.pool.prefix();
        match self.kind {
            MethodKind::Hf => write!(f, "HF"),
            MethodKind::Adapt => write!(f, "{p}-ADAPT(eps={:e},d={})", self.epsilon, self.d),
            MethodKind::Adaft => write!(f, "{p}-ADAFT(eps={:e},d={})", self.epsilon, self.d),
            MethodKind::AdaptFt => write!(f, "{p}-ADAPT-FT({},{},{})", self.k, self.d, self.m),
        }
    }
}

impl MethodSpec {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            epsilon: self.epsilon,
            d: self.d,
            max_iterations: self.max_iterations,
            flavor: if self.kind == MethodKind::Adapt { AnsatzFlavor::Adapt } else { AnsatzFlavor::Adaft },
            optimizer: self.optimizer,
            tie_tolerance: self.tie_tolerance,
        }
    }

    pub fn ft_config(&self) -> FtConfig {
        FtConfig {
            k: self.k,
            d: self.d,
            m: self.m,
            epsilon: self.epsilon,
            optimizer: self.optimizer,
            tie_tolerance: self.tie_tolerance,
            threshold: self.threshold,
            track_hamiltonian: self.track_hamiltonian,
            term_cap: self.term_cap,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub r_angstrom: f64,
    pub path: PathBuf,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub dat: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub molecule: String,
    pub points: Vec<ScanPoint>,
    pub method: MethodSpec,
    pub outputs: Outputs,
}

/// Bond length encoded as `<name>_r<R>.fcidump`.
pub fn bond_length_from_path(path: &Path) -> Result<f64> {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    stem.rsplit_once("_r")
        .and_then(|(_, r)| r.parse().ok())
        .ok_or_else(|| Error::Config(format!("cannot read a bond length from `{}`", path.display())))
}

fn parse_key<T: FromStr>(section: &str, key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Config(format!("[{section}] {key}: cannot parse `{value}`")))
}

impl ScanSpec {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_ini(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Sections `[scan]`, `[method]`, `[output]`; relative paths resolve against `base`.
    pub fn from_ini(text: &str, base: &Path) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut molecule = String::new();
        let mut files: Vec<PathBuf> = Vec::new();
        let mut directory: Option<PathBuf> = None;
        let (mut rmin, mut rmax) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut method = MethodSpec::default();
        let mut outputs = Outputs::default();
        for (section, props) in ini.iter() {
            let section = section.unwrap_or("");
            for (key, value) in props.iter() {
                let v = value.trim();
                match (section, key) {
                    ("scan", "molecule") => molecule = v.to_string(),
                    ("scan", "files") => {
                        files = v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| base.join(s)).collect()
                    }
                    ("scan", "directory") => directory = Some(base.join(v)),
                    ("scan", "rmin") => rmin = parse_key(section, key, v)?,
                    ("scan", "rmax") => rmax = parse_key(section, key, v)?,
                    ("method", "kind") => method.kind = v.parse()?,
                    ("method", "pool") => method.pool = v.parse()?,
                    ("method", "d") => method.d = parse_key(section, key, v)?,
                    ("method", "epsilon") => method.epsilon = parse_key(section, key, v)?,
                    ("method", "max_iterations") => method.max_iterations = parse_key(section, key, v)?,
                    ("method", "k") => method.k = parse_key(section, key, v)?,
                    ("method", "m") => method.m = parse_key(section, key, v)?,
                    ("method", "mu") => method.mu = parse_key(section, key, v)?,
                    ("method", "threshold") => method.threshold = parse_key(section, key, v)?,
                    ("method", "tie_tolerance") => method.tie_tolerance = parse_key(section, key, v)?,
                    ("method", "gtol") => method.optimizer.gtol = parse_key(section, key, v)?,
                    ("method", "max_evaluations") => method.optimizer.max_evaluations = parse_key(section, key, v)?,
                    ("method", "track_hamiltonian") => method.track_hamiltonian = parse_key(section, key, v)?,
                    ("method", "term_cap") => method.term_cap = parse_key(section, key, v)?,
                    ("output", "csv") => outputs.csv = Some(base.join(v)),
                    ("output", "json") => outputs.json = Some(base.join(v)),
                    ("output", "dat") => outputs.dat = Some(base.join(v)),
                    _ => return Err(Error::Config(format!("unknown key `{key}` in section [{section}]"))),
                }
            }
        }
        if let Some(dir) = directory {
            let mut found: Vec<PathBuf> = std::fs::read_dir(&dir)
                .map_err(|e| Error::Config(format!("{}: {e}", dir.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "fcidump"))
                .collect();
            found.sort();
            files.extend(found);
        }
        let mut points = files
            .into_iter()
            .map(|path| Ok(ScanPoint { r_angstrom: bond_length_from_path(&path)?, path }))
            .collect::<Result<Vec<_>>>()?;
        points.retain(|p| p.r_angstrom >= rmin - 1e-9 && p.r_angstrom <= rmax + 1e-9);
        points.sort_by(|a, b| a.r_angstrom.total_cmp(&b.r_angstrom));
        let spec = ScanSpec { molecule, points, method, outputs };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::Config("scan has no geometries".into()));
        }
        if self.points.windows(2).any(|w| w[1].r_angstrom <= w[0].r_angstrom) {
            return Err(Error::Config("bond lengths must be strictly increasing".into()));
        }
        if let Some(p) = self.points.iter().find(|p| !p.path.is_file()) {
            return Err(Error::Config(format!("missing FCIDUMP `{}`", p.path.display())));
        }
        if !(self.method.mu >= 0.0) {
            return Err(Error::Config("mu must be non-negative".into()));
        }
        match self.method.kind {
            MethodKind::AdaptFt => self.method.ft_config().validate(),
            _ => self.method.solver_config().validate(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub r_angstrom: f64,
    pub e_exact: f64,
    pub e_method: f64,
    pub error_kcal: f64,
    pub n_iter: usize,
    pub n_params: usize,
    pub n_terms: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanFailure {
    pub r_angstrom: f64,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub molecule: String,
    pub method: String,
    pub rows: Vec<ScanRow>,
    pub failures: Vec<ScanFailure>,
    pub npe: f64,
    pub mean_error: f64,
    pub max_error: f64,
    pub partial: bool,
}

/// Max error minus min error; zero for fewer than two rows.
pub fn npe(rows: &[ScanRow]) -> f64 {
    let max = rows.iter().map(|r| r.error_kcal).fold(f64::NEG_INFINITY, f64::max);
    let min = rows.iter().map(|r| r.error_kcal).fold(f64::INFINITY, f64::min);
    if rows.is_empty() {
        0.0
    } else {
        max - min
    }
}

impl ScanResult {
    pub fn new(molecule: &str, method: String, rows: Vec<ScanRow>, failures: Vec<ScanFailure>) -> Self {
        let n = rows.len().max(1) as f64;
        ScanResult {
            molecule: molecule.to_string(),
            method,
            npe: npe(&rows),
            mean_error: rows.iter().map(|r| r.error_kcal.abs()).sum::<f64>() / n,
            max_error: rows.iter().map(|r| r.error_kcal.abs()).fold(0.0, f64::max),
            partial: !failures.is_empty(),
            rows,
            failures,
        }
    }
}

fn row(r: f64, e_exact: f64, e_method: f64, n_iter: usize, n_params: usize, n_terms: usize) -> ScanRow {
    ScanRow {
        r_angstrom: r,
        e_exact,
        e_method,
        error_kcal: (e_method - e_exact) * KCAL_PER_HARTREE,
        n_iter,
        n_params,
        n_terms,
    }
}

/// Rows for one geometry: a single row, or one per dressing depth `0..=m` for ADAPT-FT.
pub fn run_point(point: &ScanPoint, method: &MethodSpec) -> Result<Vec<ScanRow>> {
    let sys = MolecularSystem::from_path(&point.path)?;
    sys.validate()?;
    let h = build_hamiltonian(&sys)?;
    let exact = exact_singlet_energy(&sys, &h)?;
    let r = point.r_angstrom;
    if method.kind == MethodKind::Hf {
        return Ok(vec![row(r, exact, hartree_fock_energy(&sys, &h)?, 0, 0, h.term_count())]);
    }
    let hs = penalized_hamiltonian(&h, method.mu)?;
    let pool = make_pool(method.pool, sys.n_orbitals)?;
    let reference = ReferenceState::new(hartree_fock_occupation(&sys), sys.n_electrons)?;
    match method.kind {
        MethodKind::AdaptFt => {
            let out = run_adapt_ft(&hs, &pool, &reference, &method.ft_config(), Some(exact))?;
            let done = out.records.len() - 1;
            Ok((0..=method.m)
                .map(|m| {
                    let rec = &out.records[m.min(done)];
                    let terms = rec.n_terms.unwrap_or(hs.term_count());
                    row(r, exact, rec.energy, m.min(done), rec.n_params, terms)
                })
                .collect())
        }
        _ => {
            let out = run(&hs, &pool, &reference, &method.solver_config(), Some(exact))?;
            Ok(vec![row(r, exact, out.energy, out.records.len(), out.ansatz.n_params(), hs.term_count())])
        }
    }
}

/// One result per dressing depth for ADAPT-FT (index `m`), otherwise a single result.
pub fn run_scan_series(spec: &ScanSpec) -> Vec<ScanResult> {
    let outcomes: Vec<(f64, Result<Vec<ScanRow>>)> =
        spec.points.par_iter().map(|p| (p.r_angstrom, run_point(p, &spec.method))).collect();
    let depths = if spec.method.kind == MethodKind::AdaptFt { spec.method.m + 1 } else { 1 };
    (0..depths)
        .map(|m| {
            let mut rows = Vec::new();
            let mut failures = Vec::new();
            for (r, out) in &outcomes {
                match out {
                    Ok(series) => rows.push(series[m].clone()),
                    Err(e) => failures.push(ScanFailure { r_angstrom: *r, message: e.to_string() }),
                }
            }
            let label = if spec.method.kind == MethodKind::AdaptFt {
                MethodSpec { m, ..spec.method.clone() }.to_string()
            } else {
                spec.method.to_string()
            };
            ScanResult::new(&spec.molecule, label, rows, failures)
        })
        .collect()
}

pub fn run_scan(spec: &ScanSpec) -> ScanResult {
    run_scan_series(spec).pop().expect("at least one depth")
}

const COLUMNS: [&str; 7] = ["R_angstrom", "E_exact", "E_method", "error_kcal", "n_iter", "n_params", "n_terms"];

fn csv_error(e: impl fmt::Display) -> Error {
    Error::Parse { line: 0, message: e.to_string() }
}

pub fn emit_csv(result: &ScanResult) -> String {
    let mut out = COLUMNS.join(",");
    out.push('\n');
    for r in &result.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.r_angstrom, r.e_exact, r.e_method, r.error_kcal, r.n_iter, r.n_params, r.n_terms
        ));
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<ScanRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_error)?;
    if header.iter().collect::<Vec<_>>() != COLUMNS {
        return Err(Error::Parse { line: 1, message: format!("expected header {}", COLUMNS.join(",")) });
    }
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(csv_error)?;
            let bad =
                |col: usize| Error::Parse { line: i + 2, message: format!("bad value in column {}", COLUMNS[col]) };
            let f = |col: usize| rec.get(col).and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| bad(col));
            let u = |col: usize| rec.get(col).and_then(|s| s.parse::<usize>().ok()).ok_or_else(|| bad(col));
            Ok(ScanRow {
                r_angstrom: f(0)?,
                e_exact: f(1)?,
                e_method: f(2)?,
                error_kcal: f(3)?,
                n_iter: u(4)?,
                n_params: u(5)?,
                n_terms: u(6)?,
            })
        })
        .collect()
}

pub fn emit_json(result: &ScanResult) -> String {
    serde_json::to_string_pretty(result).expect("scan results serialize")
}

/// Two-column `R error_kcal` data for plotting.
pub fn emit_dat(result: &ScanResult) -> String {
    let mut out = format!("# {} {}\n# R_angstrom error_kcal\n", result.molecule, result.method);
    for r in &result.rows {
        out.push_str(&format!("{} {}\n", r.r_angstrom, r.error_kcal));
    }
    out
}
