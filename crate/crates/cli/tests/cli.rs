//! End-to-end tests of the `qsim` binary: exit codes, output formats,
//! cross-backend agreement, and manifest reproducibility.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_qsim")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn tmpdir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("qsim-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(bin()).args(args).current_dir(dir).output().expect("spawn qsim")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

/// Parse the sv dump format (`index<tab>re<tab>im` per line) into amplitudes.
fn parse_dump(dump: &str) -> HashMap<u64, Complex64> {
    dump.lines()
        .map(|l| {
            let mut f = l.split('\t');
            let idx: u64 = f.next().unwrap().parse().unwrap();
            let re: f64 = f.next().unwrap().parse().unwrap();
            let im: f64 = f.next().unwrap().parse().unwrap();
            (idx, Complex64::new(re, im))
        })
        .collect()
}

fn fidelity(a: &HashMap<u64, Complex64>, b: &HashMap<u64, Complex64>) -> f64 {
    let mut ov = Complex64::new(0.0, 0.0);
    for (i, x) in a {
        if let Some(y) = b.get(i) {
            ov += x.conj() * y;
        }
    }
    ov.norm_sqr()
}

#[test]
fn emulate_empty_circuit_is_all_zeros() {
    let d = tmpdir("empty");
    let out = run(&["emulate", "--qubits", "3", "--manifest", "m.json"], &d);
    let v = stdout_json(&out);
    let amps = parse_dump(v["state"].as_str().unwrap());
    assert_eq!(amps.len(), 1);
    assert!((amps[&0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn emulate_bell_circuit_amplitudes() {
    let d = tmpdir("bell");
    std::fs::write(d.join("bell.txt"), "h 0\ncx 0 1\n").unwrap();
    for backend in ["dense", "sparse", "mps"] {
        let out = run(
            &["emulate", "--circuit", "bell.txt", "--qubits", "2", "--backend", backend,
              "--manifest", "m.json"],
            &d,
        );
        let v = stdout_json(&out);
        let amps = parse_dump(v["state"].as_str().unwrap());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(amps.len(), 2, "{backend}");
        assert!((amps[&0] - Complex64::new(s, 0.0)).norm() < 1e-12, "{backend}");
        assert!((amps[&3] - Complex64::new(s, 0.0)).norm() < 1e-12, "{backend}");
    }
}

#[test]
fn emulate_qasm_matches_gate_list() {
    let d = tmpdir("qasm");
    std::fs::write(d.join("c.qasm"),
        "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\nh q[0];\ncx q[0],q[1];\nrz(-pi/3) q[1];\n")
        .unwrap();
    std::fs::write(d.join("c.txt"), "h 0\ncx 0 1\nrz -pi/3 1\n").unwrap();
    let a = stdout_json(&run(&["emulate", "--circuit", "c.qasm", "--manifest", "m.json"], &d));
    let b = stdout_json(&run(
        &["emulate", "--circuit", "c.txt", "--qubits", "2", "--manifest", "m.json"],
        &d,
    ));
    let fa = parse_dump(a["state"].as_str().unwrap());
    let fb = parse_dump(b["state"].as_str().unwrap());
    assert!(fidelity(&fa, &fb) > 1.0 - 1e-12);
}

#[test]
fn unsupported_gates_exit_2_and_are_listed() {
    let d = tmpdir("unsup");
    std::fs::write(d.join("bad.qasm"), "OPENQASM 2.0;\nqreg q[3];\nccx q[0],q[1],q[2];\nswap q[0],q[1];\n")
        .unwrap();
    let out = run(&["emulate", "--circuit", "bad.qasm", "--manifest", "m.json"], &d);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("ccx") && err.contains("swap"), "{err}");
}

#[test]
fn unknown_flag_exits_2_with_usage() {
    let d = tmpdir("flag");
    let out = run(&["emulate", "--qubits", "2", "--no-such-flag"], &d);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.to_lowercase().contains("usage"), "{err}");
}

fn random_circuit_file(path: &Path, n_qubits: usize, n_gates: usize, seed: u64) {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut lines = Vec::new();
    for _ in 0..n_gates {
        match rng.gen_range(0..5) {
            0 => lines.push(format!("h {}", rng.gen_range(0..n_qubits))),
            1 => lines.push(format!("ry {:.12} {}", rng.gen::<f64>() * 6.28, rng.gen_range(0..n_qubits))),
            2 => lines.push(format!("rz {:.12} {}", rng.gen::<f64>() * 6.28, rng.gen_range(0..n_qubits))),
            3 => lines.push(format!("x {}", rng.gen_range(0..n_qubits))),
            _ => {
                let c = rng.gen_range(0..n_qubits);
                let mut t = rng.gen_range(0..n_qubits);
                while t == c {
                    t = rng.gen_range(0..n_qubits);
                }
                lines.push(format!("cx {c} {t}"));
            }
        }
    }
    std::fs::write(path, lines.join("\n") + "\n").unwrap();
}

#[test]
fn random_14_qubit_circuit_dense_vs_mps_fidelity() {
    let d = tmpdir("rand14");
    random_circuit_file(&d.join("c.txt"), 14, 500, 41);
    let dense = stdout_json(&run(
        &["emulate", "--circuit", "c.txt", "--qubits", "14", "--backend", "dense",
          "--manifest", "m.json"],
        &d,
    ));
    let mps = stdout_json(&run(
        &["emulate", "--circuit", "c.txt", "--qubits", "14", "--backend", "mps",
          "--cutoff", "0", "--max-bond", "256", "--manifest", "m.json"],
        &d,
    ));
    let fa = parse_dump(dense["state"].as_str().unwrap());
    let fb = parse_dump(mps["state"].as_str().unwrap());
    assert!(fidelity(&fa, &fb) >= 1.0 - 1e-10);
}

#[test]
fn vqe_adapt_h2_matches_ci_oracle() {
    use qsim_core::chemistry::{jordan_wigner, parse_fcidump};
    use qsim_core::oracles::exact_ground_state;
    let h = jordan_wigner(&parse_fcidump(&data("h2_sto3g.fcidump")).unwrap());
    let (e_ci, _) = exact_ground_state(&h).unwrap();

    let d = tmpdir("vqe");
    let out = run(
        &["vqe", "--method", "adapt", "--fcidump", data("h2_sto3g.fcidump").to_str().unwrap(),
          "--backend", "dense", "--manifest", "m.json"],
        &d,
    );
    let v = stdout_json(&out);
    assert!((v["energy"].as_f64().unwrap() - e_ci).abs() < 1e-8);
    assert_eq!(v["method"], "adapt");
    assert!(v["trace"].as_array().unwrap().len() >= 1);
}

#[test]
fn walk_sym2_all_mass_on_half() {
    let d = tmpdir("walk");
    let out = run(
        &["walk", "--chain", data("chains/sym2.json").to_str().unwrap(), "--phase-bits", "2",
          "--shots", "1000", "--manifest", "m.json"],
        &d,
    );
    let v = stdout_json(&out);
    let hist = v["histogram"].as_array().unwrap();
    assert_eq!(hist.len(), 1);
    assert!((hist[0]["estimate"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(hist[0]["count"].as_u64().unwrap(), 1000);
}

#[test]
fn qubo_exact_cost_matches_recomputation() {
    let d = tmpdir("qubo");
    let out = run(
        &["qubo", "--solver", "exact", "--density", data("synth_pocket.cube").to_str().unwrap(),
          "--sigma", "0.6", "--manifest", "m.json"],
        &d,
    );
    let v = stdout_json(&out);
    let cost = v["cost"].as_f64().unwrap();
    let recomputed = v["recomputed_cost"].as_f64().unwrap();
    assert!((cost - recomputed).abs() < 1e-12);
    assert!(v["n_sites"].as_u64().unwrap() >= 1);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let d = tmpdir("replay");
    random_circuit_file(&d.join("c.txt"), 8, 60, 9);
    let mut results = Vec::new();
    for i in 0..3 {
        let out_file = format!("r{i}.json");
        let out = run(
            &["emulate", "--circuit", "c.txt", "--qubits", "8", "--shots", "500",
              "--seed", "11", "--out", &out_file, "--manifest", &format!("m{i}.json")],
            &d,
        );
        assert!(out.status.success());
        results.push(std::fs::read(d.join(out_file)).unwrap());
    }
    assert_eq!(results[0], results[1]);
    assert_eq!(results[1], results[2]);

    // Manifests agree too, once timing and memory counters are scrubbed.
    let scrub = |p: &str| -> serde_json::Value {
        let mut v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(d.join(p)).unwrap()).unwrap();
        v["wall_time_s"] = serde_json::Value::Null;
        v["peak_rss_kb"] = serde_json::Value::Null;
        v
    };
    assert_eq!(scrub("m0.json"), scrub("m1.json"));
    assert_eq!(scrub("m1.json"), scrub("m2.json"));
}

#[test]
fn results_independent_of_thread_count() {
    let d = tmpdir("threads");
    let mut results = Vec::new();
    for threads in ["1", "4"] {
        let out_file = format!("qubo-t{threads}.json");
        let out = run(
            &["qubo", "--solver", "sa", "--density", data("synth_pocket.cube").to_str().unwrap(),
              "--sigma", "0.6", "--seed", "3", "--threads", threads,
              "--out", &out_file, "--manifest", &format!("mt{threads}.json")],
            &d,
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        results.push(std::fs::read(d.join(out_file)).unwrap());
    }
    assert_eq!(results[0], results[1]);
}
