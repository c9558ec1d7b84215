//! `qsim`: command-line entry point for the emulator and the hybrid
//! algorithm pipelines. Every subcommand writes a results JSON (stdout and
//! optionally `--out`) plus a run manifest; all timing lives in the
//! manifest so result files are byte-reproducible.
//!
//! Exit codes: 0 success, 2 configuration/input error, 3 run completed but
//! raised a numerical-failure flag.

mod circuit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use qsim_core::chemistry::{hf_reference, jordan_wigner, parse_fcidump};
use qsim_core::error::{Error, Result};
use qsim_core::hydration::{
    build_qubo, load_density, propose_sites, solve_adiabatic, solve_exact, solve_sa, SaSchedule,
};
use qsim_core::mps::MpsState;
use qsim_core::oracles::exact_ground_state;
use qsim_core::qwalk::{analyze_chain, estimate_mean, MarkovChainSpec};
use qsim_core::sv::{dump_state, sample, DenseState, SparseState};
use qsim_core::vqe::{
    adapt_vqe, build_pool, fixed_ansatz_vqe, gga_vqe, overlap_adapt_result, tuccsd_ansatz, Backend,
    PoolKind, VqeOptions, VqeResult,
};

#[derive(Parser)]
#[command(name = "qsim", version, about = "Quantum-circuit emulation and hybrid algorithm runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Master RNG seed; all stochastic stages derive from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker thread count (default: all cores, or RAYON_NUM_THREADS).
    #[arg(long)]
    threads: Option<usize>,
    /// Results JSON path (always also printed to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run-manifest path.
    #[arg(long, default_value = "manifest.json")]
    manifest: PathBuf,
}

#[derive(Args)]
struct BackendOpts {
    /// State representation: dense, sparse, mps, partitioned.
    #[arg(long, default_value = "dense")]
    backend: String,
    /// Partitioned backend: excitation-rank cap relative to the reference.
    #[arg(long, default_value_t = 2)]
    eta: u32,
    /// MPS: maximum bond dimension.
    #[arg(long, default_value_t = 256)]
    max_bond: usize,
    /// MPS / partitioned: truncation threshold.
    #[arg(long, default_value_t = 1e-12)]
    cutoff: f64,
}

impl BackendOpts {
    fn resolve(&self) -> Result<Backend> {
        match self.backend.as_str() {
            "dense" => Ok(Backend::Dense),
            "sparse" => Ok(Backend::Sparse),
            "mps" => Ok(Backend::Mps { cutoff: self.cutoff, max_bond: self.max_bond }),
            "partitioned" => Ok(Backend::Partitioned { eta: self.eta, cutoff: self.cutoff }),
            other => Err(Error::Invalid(format!("unknown backend: {other}"))),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Variational ground-state search on a molecular Hamiltonian.
    Vqe {
        /// adapt, mb-adapt, gga, tuccsd, or overlap-adapt.
        #[arg(long, default_value = "adapt")]
        method: String,
        /// Operator pool: fermionic-sd, qeb, qubit, mcp.
        #[arg(long, default_value = "fermionic-sd")]
        pool: String,
        /// FCIDUMP file with the molecular integrals.
        #[arg(long)]
        fcidump: PathBuf,
        /// Shots per Pauli term, or "exact" for noiseless expectations.
        #[arg(long, default_value = "exact")]
        shots: String,
        /// Gradient threshold for convergence (Hartree).
        #[arg(long, default_value_t = 1e-3)]
        eps_grad: f64,
        #[arg(long, default_value_t = 200)]
        max_iterations: usize,
        /// Operators appended per iteration (mb-adapt only).
        #[arg(long, default_value_t = 1)]
        batch_size: usize,
        #[command(flatten)]
        backend: BackendOpts,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Hydration-site placement: density map in, QUBO solution out.
    Qubo {
        /// exact, sa, or adiabatic.
        #[arg(long, default_value = "exact")]
        solver: String,
        /// Gaussian cube file with the water-density map.
        #[arg(long)]
        density: PathBuf,
        /// Peak threshold as a fraction of the grid maximum.
        #[arg(long, default_value_t = 0.2)]
        threshold_frac: f64,
        /// Minimum separation between candidate sites (angstrom).
        #[arg(long, default_value_t = 1.0)]
        min_sep: f64,
        /// Gaussian width of a placed water (angstrom).
        #[arg(long, default_value_t = 0.5)]
        sigma: f64,
        /// Blockade penalty for sites closer than the exclusion radius.
        #[arg(long, default_value_t = 10.0)]
        penalty: f64,
        /// Simulated annealing: sweeps per restart.
        #[arg(long, default_value_t = 200)]
        sweeps: usize,
        /// Simulated annealing: independent restarts.
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        /// Adiabatic: total evolution time.
        #[arg(long, default_value_t = 20.0)]
        total_time: f64,
        /// Adiabatic: Trotter steps.
        #[arg(long, default_value_t = 64)]
        steps: usize,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Szegedy-walk mean estimation on a reversible Markov chain.
    Walk {
        /// Chain spec JSON: row-major P, stationary pi, observable f.
        #[arg(long)]
        chain: PathBuf,
        /// Phase-register width m.
        #[arg(long, default_value_t = 2)]
        phase_bits: u32,
        #[arg(long, default_value_t = 1000)]
        shots: u64,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run a circuit file and dump the final state plus a sample histogram.
    Emulate {
        /// Gate-list or OpenQASM-2 circuit file; omitted = empty circuit.
        #[arg(long)]
        circuit: Option<PathBuf>,
        /// Qubit count (required for gate-list files and empty circuits).
        #[arg(long)]
        qubits: Option<usize>,
        /// Measurement shots for the histogram (0 = state dump only).
        #[arg(long, default_value_t = 0)]
        shots: u64,
        #[command(flatten)]
        backend: BackendOpts,
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Serialize)]
struct RunManifest {
    subcommand: String,
    config: serde_json::Value,
    seed: u64,
    backend: String,
    version: String,
    wall_time_s: f64,
    peak_rss_kb: Option<u64>,
}

fn peak_rss_kb() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

struct RunOutput {
    result: serde_json::Value,
    /// Set when the run completed but a numerical-failure flag was raised.
    flag: Option<String>,
    backend: String,
    config: serde_json::Value,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Vqe { common, .. }
        | Command::Qubo { common, .. }
        | Command::Walk { common, .. }
        | Command::Emulate { common, .. } => common,
    };
    if let Some(n) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: could not configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let seed = common.seed;
    let out = common.out.clone();
    let manifest_path = common.manifest.clone();
    let subcommand = match &cli.command {
        Command::Vqe { .. } => "vqe",
        Command::Qubo { .. } => "qubo",
        Command::Walk { .. } => "walk",
        Command::Emulate { .. } => "emulate",
    }
    .to_string();

    let t0 = std::time::Instant::now();
    let run = match dispatch(cli.command) {
        Ok(run) => run,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("run `qsim {subcommand} --help` for usage");
            return ExitCode::from(2);
        }
    };

    let manifest = RunManifest {
        subcommand,
        config: run.config,
        seed,
        backend: run.backend,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: t0.elapsed().as_secs_f64(),
        peak_rss_kb: peak_rss_kb(),
    };

    let result_text = serde_json::to_string_pretty(&run.result).expect("result serialization");
    println!("{result_text}");
    if let Some(path) = out {
        if let Err(e) = std::fs::write(&path, format!("{result_text}\n")) {
            eprintln!("error: writing {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    let manifest_text = serde_json::to_string_pretty(&manifest).expect("manifest serialization");
    if let Err(e) = std::fs::write(&manifest_path, format!("{manifest_text}\n")) {
        eprintln!("error: writing {}: {e}", manifest_path.display());
        return ExitCode::from(2);
    }

    match run.flag {
        Some(flag) => {
            eprintln!("numerical-failure flag: {flag}");
            ExitCode::from(3)
        }
        None => ExitCode::SUCCESS,
    }
}

fn dispatch(cmd: Command) -> Result<RunOutput> {
    match cmd {
        Command::Vqe {
            method,
            pool,
            fcidump,
            shots,
            eps_grad,
            max_iterations,
            batch_size,
            backend,
            common,
        } => run_vqe(
            &method,
            &pool,
            &fcidump,
            &shots,
            eps_grad,
            max_iterations,
            batch_size,
            &backend,
            common.seed,
        ),
        Command::Qubo {
            solver,
            density,
            threshold_frac,
            min_sep,
            sigma,
            penalty,
            sweeps,
            restarts,
            total_time,
            steps,
            common,
        } => run_qubo(
            &solver,
            &density,
            threshold_frac,
            min_sep,
            sigma,
            penalty,
            sweeps,
            restarts,
            total_time,
            steps,
            common.seed,
        ),
        Command::Walk { chain, phase_bits, shots, common } => {
            run_walk(&chain, phase_bits, shots, common.seed)
        }
        Command::Emulate { circuit, qubits, shots, backend, common } => {
            run_emulate(circuit.as_deref(), qubits, shots, &backend, common.seed)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_vqe(
    method: &str,
    pool_name: &str,
    fcidump: &std::path::Path,
    shots_arg: &str,
    eps_grad: f64,
    max_iterations: usize,
    batch_size: usize,
    backend_opts: &BackendOpts,
    seed: u64,
) -> Result<RunOutput> {
    let backend = backend_opts.resolve()?;
    let shots: Option<u64> = match shots_arg {
        "exact" => None,
        n => Some(
            n.parse()
                .map_err(|_| Error::Invalid(format!("--shots must be a count or \"exact\": {n}")))?,
        ),
    };
    let m = parse_fcidump(fcidump)?;
    let h = jordan_wigner(&m);
    let hf = hf_reference(&m)?;
    let kind = PoolKind::parse(pool_name)?;
    let pool = build_pool(kind, &m)?;
    let opts = VqeOptions {
        reference: hf.occupation,
        eps_grad,
        max_iterations,
        batch_size: if method == "mb-adapt" { batch_size.max(2) } else { 1 },
        shots,
        seed,
        ..VqeOptions::default()
    };
    let result: VqeResult = match method {
        "adapt" | "mb-adapt" => adapt_vqe(&h, &pool, backend, &opts)?,
        "gga" => gga_vqe(&h, &pool, backend, &opts)?,
        "tuccsd" => fixed_ansatz_vqe(&h, &tuccsd_ansatz(&m)?, backend, &opts)?,
        "overlap-adapt" => {
            // Target the exact ground state; the result's `energy` field
            // then carries the infidelity 1 - |<target|psi>|^2.
            let (_, vec) = exact_ground_state(&h)?;
            let target = DenseState::from_amplitudes(h.n_qubits(), vec)?.to_sparse();
            overlap_adapt_result(&target, &pool, hf.occupation, eps_grad, max_iterations, &opts.optimize)?
        }
        other => return Err(Error::Invalid(format!("unknown method: {other}"))),
    };
    let flag = result.flag.clone();
    let config = json!({
        "method": method,
        "pool": pool_name,
        "fcidump": fcidump.display().to_string(),
        "shots": shots_arg,
        "eps_grad": eps_grad,
        "max_iterations": max_iterations,
        "batch_size": batch_size,
        "backend": backend.name(),
        "eta": backend_opts.eta,
        "max_bond": backend_opts.max_bond,
        "cutoff": backend_opts.cutoff,
    });
    Ok(RunOutput {
        result: serde_json::to_value(&result).map_err(|e| Error::Invalid(e.to_string()))?,
        flag,
        backend: backend.name().to_string(),
        config,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_qubo(
    solver: &str,
    density: &std::path::Path,
    threshold_frac: f64,
    min_sep: f64,
    sigma: f64,
    penalty: f64,
    sweeps: usize,
    restarts: usize,
    total_time: f64,
    steps: usize,
    seed: u64,
) -> Result<RunOutput> {
    let grid = load_density(&density.display().to_string())?;
    let vmax = grid.values.iter().cloned().fold(0.0f64, f64::max);
    let sites = propose_sites(&grid, threshold_frac * vmax, min_sep, sigma);
    if sites.positions.is_empty() {
        return Err(Error::Invalid("no candidate sites above threshold".into()));
    }
    let q = build_qubo(&grid, &sites, penalty)?;
    let solution = match solver {
        "exact" => solve_exact(&q)?,
        "sa" => solve_sa(&q, &SaSchedule { sweeps, restarts, ..SaSchedule::default() }, seed),
        "adiabatic" => solve_adiabatic(&q, total_time, steps, seed)?,
        other => return Err(Error::Invalid(format!("unknown solver: {other}"))),
    };
    let recomputed = q.cost(solution.x);
    let flag = if (recomputed - solution.cost).abs() > 1e-9 {
        Some(format!(
            "solution cost {} does not match recomputation {}",
            solution.cost, recomputed
        ))
    } else {
        None
    };
    let bits: Vec<u8> = (0..q.n).map(|i| ((solution.x >> i) & 1) as u8).collect();
    let placed: Vec<[f64; 3]> = (0..q.n)
        .filter(|i| (solution.x >> i) & 1 == 1)
        .map(|i| sites.positions[i])
        .collect();
    let result = json!({
        "solver": solution.solver,
        "n_sites": q.n,
        "candidate_sites": sites.positions,
        "bits": bits,
        "placed_sites": placed,
        "cost": solution.cost,
        "recomputed_cost": recomputed,
        "ground_probability": solution.ground_probability,
    });
    let config = json!({
        "solver": solver,
        "density": density.display().to_string(),
        "threshold_frac": threshold_frac,
        "min_sep": min_sep,
        "sigma": sigma,
        "penalty": penalty,
        "sweeps": sweeps,
        "restarts": restarts,
        "total_time": total_time,
        "steps": steps,
    });
    Ok(RunOutput { result, flag, backend: "classical".to_string(), config })
}

fn run_walk(chain: &std::path::Path, phase_bits: u32, shots: u64, seed: u64) -> Result<RunOutput> {
    let text = std::fs::read_to_string(chain)?;
    let spec = MarkovChainSpec::from_json(&text)?;
    let analysis = analyze_chain(&spec)?;
    let est = estimate_mean(&spec, phase_bits, shots, seed)?;
    let histogram: Vec<serde_json::Value> =
        est.histogram.iter().map(|(v, n)| json!({"estimate": v, "count": n})).collect();
    let result = json!({
        "phase_bits": phase_bits,
        "shots": shots,
        "histogram": histogram,
        "exact_mean": est.exact_mean,
        "preparation_probability": est.preparation_probability,
        "spectral_gap": analysis.delta,
        "reversible": analysis.reversible,
    });
    let config = json!({
        "chain": chain.display().to_string(),
        "phase_bits": phase_bits,
        "shots": shots,
    });
    Ok(RunOutput { result, flag: None, backend: "dense".to_string(), config })
}

fn run_emulate(
    circuit: Option<&std::path::Path>,
    qubits: Option<usize>,
    shots: u64,
    backend_opts: &BackendOpts,
    seed: u64,
) -> Result<RunOutput> {
    let backend = backend_opts.resolve()?;
    if matches!(backend, Backend::Partitioned { .. }) {
        return Err(Error::Invalid(
            "the partitioned backend needs a reference determinant; use dense, sparse, or mps".into(),
        ));
    }
    let parsed = match circuit {
        Some(path) => circuit::parse_circuit(&std::fs::read_to_string(path)?, qubits)?,
        None => circuit::ParsedCircuit {
            n_qubits: qubits
                .ok_or_else(|| Error::Invalid("empty circuits need --qubits".into()))?,
            gates: Vec::new(),
        },
    };
    if let Some(declared) = qubits {
        if declared != parsed.n_qubits {
            return Err(Error::Invalid(format!(
                "--qubits {} disagrees with the circuit's qreg of {}",
                declared, parsed.n_qubits
            )));
        }
    }
    let n = parsed.n_qubits;
    let entries: Vec<(u64, Complex64)> = match backend {
        Backend::Dense => {
            let mut s = DenseState::zero_state(n);
            for g in &parsed.gates {
                s.apply_gate(g)?;
            }
            s.to_sparse().sorted_entries()
        }
        Backend::Sparse => {
            let mut s = SparseState::zero_state(n);
            for g in &parsed.gates {
                s.apply_gate(g)?;
            }
            s.sorted_entries()
        }
        Backend::Mps { cutoff, max_bond } => {
            let mut s = MpsState::zero_state(n);
            s.cutoff = cutoff;
            s.max_bond = max_bond;
            for g in &parsed.gates {
                s.apply_gate(g)?;
            }
            s.to_dense().to_sparse().sorted_entries()
        }
        Backend::Partitioned { .. } => unreachable!(),
    };
    let dump = dump_state(&entries);
    let histogram: Vec<serde_json::Value> = if shots > 0 {
        let probs: Vec<(u64, f64)> =
            entries.iter().map(|(i, a)| (*i, a.norm_sqr())).collect();
        let counts = sample(&probs, shots, seed, 0)?;
        let mut sorted: Vec<(u64, u64)> = counts.into_iter().collect();
        sorted.sort_unstable();
        sorted.into_iter().map(|(i, c)| json!({"index": i, "count": c})).collect()
    } else {
        Vec::new()
    };
    let result = json!({
        "n_qubits": n,
        "n_gates": parsed.gates.len(),
        "state": dump,
        "shots": shots,
        "histogram": histogram,
    });
    let config = json!({
        "circuit": circuit.map(|p| p.display().to_string()),
        "qubits": qubits,
        "shots": shots,
        "backend": backend.name(),
        "max_bond": backend_opts.max_bond,
        "cutoff": backend_opts.cutoff,
    });
    Ok(RunOutput { result, flag: None, backend: backend.name().to_string(), config })
}
