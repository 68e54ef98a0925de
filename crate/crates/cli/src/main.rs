use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adaft::adaptive::{records_to_csv, run, OptimizerConfig};
use adaft::bench::{
    emit_csv, emit_dat, emit_json, exact_singlet_energy, hartree_fock_energy, parse_csv, run_scan_series, MethodKind,
    MethodSpec, ScanResult, ScanSpec, KCAL_PER_HARTREE,
};
use adaft::chem::{
    build_hamiltonian, hartree_fock_occupation, make_pool, penalized_hamiltonian, MolecularSystem, PoolFlavor,
};
use adaft::dressing::{run_adapt_ft, FtOutcome, DEFAULT_TERM_CAP};
use adaft::pauli::DEFAULT_THRESHOLD;
use adaft::sim::ReferenceState;
use adaft::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "adaft", version, about = "ADAPT, ADAFT and ADAPT-FT benchmarks on FCIDUMP inputs")]
struct Cli {
    /// Worker threads for gradient sweeps and scan geometries.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the operator pool for a system.
    Pool {
        fcidump: PathBuf,
        #[arg(long, default_value = "q")]
        pool: PoolFlavor,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one method at one geometry and print its iteration records.
    Run {
        fcidump: PathBuf,
        #[command(flatten)]
        method: MethodArgs,
        /// Write the records here instead of stdout.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Run a bond scan described by an INI file.
    Scan { config: PathBuf },
    /// Run ADAPT-FT with the dressed Hamiltonian tracked and write it out.
    DressDump {
        fcidump: PathBuf,
        #[command(flatten)]
        method: MethodArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute NPE, mean and max error from a scan CSV.
    Npe { csv: PathBuf },
}

#[derive(Args)]
struct MethodArgs {
    #[arg(long, default_value = "adaft")]
    method: MethodKind,
    #[arg(long, default_value = "q")]
    pool: PoolFlavor,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Spin penalty (Hartree).
    #[arg(long, default_value_t = adaft::bench::DEFAULT_MU)]
    mu: f64,
    /// Coefficient drop threshold for the dressed Hamiltonian.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value_t = 1e-6)]
    tie_tolerance: f64,
    #[arg(long, default_value_t = 1e-8)]
    gtol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_evaluations: usize,
    #[arg(long)]
    track_hamiltonian: bool,
    #[arg(long, default_value_t = DEFAULT_TERM_CAP)]
    term_cap: usize,
}

impl From<&MethodArgs> for MethodSpec {
    fn from(a: &MethodArgs) -> Self {
        MethodSpec {
            kind: a.method,
            pool: a.pool,
            d: a.d,
            epsilon: a.epsilon,
            max_iterations: a.max_iterations,
            k: a.k,
            m: a.m,
            mu: a.mu,
            threshold: a.threshold,
            tie_tolerance: a.tie_tolerance,
            optimizer: OptimizerConfig { gtol: a.gtol, max_evaluations: a.max_evaluations, ..Default::default() },
            track_hamiltonian: a.track_hamiltonian,
            term_cap: a.term_cap,
        }
    }
}

enum Failure {
    Config(String),
    Runtime(String),
    Partial,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Parse { .. } | Error::Io(_) => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Config(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<MolecularSystem, Failure> {
    let sys = MolecularSystem::from_path(path)?;
    sys.validate()?;
    Ok(sys)
}

fn ft_table(out: &FtOutcome) -> String {
    let mut s = String::from("m,energy,error_kcal,delta_H,n_params,n_terms,growth_factor,selected\n");
    for r in &out.records {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        s += &format!(
            "{},{},{},{},{},{},{},{}\n",
            r.iteration,
            r.energy,
            opt(r.error_vs_exact.map(|e| e * KCAL_PER_HARTREE)),
            r.delta_h,
            r.n_params,
            r.n_terms.map(|n| n.to_string()).unwrap_or_default(),
            opt(r.growth_factor),
            r.selected.join(";"),
        );
    }
    s
}

fn cmd_run(fcidump: &Path, spec: &MethodSpec, records: Option<&Path>) -> Result<(), Failure> {
    let sys = load(fcidump)?;
    let h = build_hamiltonian(&sys)?;
    let exact = exact_singlet_energy(&sys, &h)?;
    if spec.kind == MethodKind::Hf {
        let e = hartree_fock_energy(&sys, &h)?;
        println!("{spec} E={e:.12} E_exact={exact:.12} error_kcal={:.6}", (e - exact) * KCAL_PER_HARTREE);
        return Ok(());
    }
    let hs = penalized_hamiltonian(&h, spec.mu)?;
    let pool = make_pool(spec.pool, sys.n_orbitals)?;
    let reference = ReferenceState::new(hartree_fock_occupation(&sys), sys.n_electrons)?;
    let (table, energy, status) = if spec.kind == MethodKind::AdaptFt {
        let out = run_adapt_ft(&hs, &pool, &reference, &spec.ft_config(), Some(exact))?;
        (ft_table(&out), out.energy_at(spec.m), format!("{:?}", out.status))
    } else {
        let out = run(&hs, &pool, &reference, &spec.solver_config(), Some(exact))?;
        (records_to_csv(&out.records)?, out.energy, format!("{:?}", out.status))
    };
    write_or_print(records, &table)?;
    eprintln!(
        "{spec} status={status} E={energy:.12} E_exact={exact:.12} error_kcal={:.6}",
        (energy - exact) * KCAL_PER_HARTREE
    );
    Ok(())
}

fn cmd_scan(config: &Path) -> Result<(), Failure> {
    let spec = ScanSpec::from_path(config)?;
    let series = run_scan_series(&spec);
    for r in &series {
        println!(
            "{} {}: npe={:.6} mean={:.6} max={:.6} kcal/mol",
            r.molecule, r.method, r.npe, r.mean_error, r.max_error
        );
    }
    let result: &ScanResult = series.last().expect("at least one depth");
    for f in &result.failures {
        eprintln!("R={} failed: {}", f.r_angstrom, f.message);
    }
    let o = &spec.outputs;
    if let Some(p) = &o.csv {
        write_or_print(Some(p), &emit_csv(result))?;
    }
    if let Some(p) = &o.json {
        write_or_print(Some(p), &emit_json(result))?;
    }
    if let Some(p) = &o.dat {
        write_or_print(Some(p), &emit_dat(result))?;
    }
    if o.csv.is_none() && o.json.is_none() && o.dat.is_none() {
        print!("{}", emit_csv(result));
    }
    if result.partial {
        return Err(Failure::Partial);
    }
    Ok(())
}

fn cmd_dress_dump(fcidump: &Path, spec: &MethodSpec, out: &Path) -> Result<(), Failure> {
    let sys = load(fcidump)?;
    let h = build_hamiltonian(&sys)?;
    let hs = penalized_hamiltonian(&h, spec.mu)?;
    let pool = make_pool(spec.pool, sys.n_orbitals)?;
    let reference = ReferenceState::new(hartree_fock_occupation(&sys), sys.n_electrons)?;
    let config = adaft::dressing::FtConfig { track_hamiltonian: true, ..spec.ft_config() };
    let result = run_adapt_ft(&hs, &pool, &reference, &config, None)?;
    let dump = result
        .dressed
        .dump()
        .ok_or_else(|| Failure::Runtime(format!("dressed Hamiltonian unavailable ({:?})", result.status)))?;
    write_or_print(Some(out), &dump)?;
    eprint!("{}", ft_table(&result));
    Ok(())
}

fn cmd_npe(csv: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(csv).map_err(|e| Failure::Config(format!("{}: {e}", csv.display())))?;
    let rows = parse_csv(&text)?;
    let r = ScanResult::new("", String::new(), rows, Vec::new());
    println!("npe={} mean={} max={} points={}", r.npe, r.mean_error, r.max_error, r.rows.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Pool { fcidump, pool, out } => load(fcidump)
            .and_then(|sys| Ok(make_pool(*pool, sys.n_orbitals)?))
            .and_then(|p| write_or_print(out.as_deref(), &p.dump())),
        Command::Run { fcidump, method, records } => cmd_run(fcidump, &method.into(), records.as_deref()),
        Command::Scan { config } => cmd_scan(config),
        Command::DressDump { fcidump, method, out } => cmd_dress_dump(fcidump, &method.into(), out),
        Command::Npe { csv } => cmd_npe(csv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Partial) => ExitCode::from(1),
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
