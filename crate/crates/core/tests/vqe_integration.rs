//! End-to-end variational runs checked against independent oracles: exact CI
//! diagonalization, fine-grid line searches, and finite differences.

use std::path::Path;

use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use qsim_core::chemistry::{hf_reference, jordan_wigner, parse_fcidump};
use qsim_core::oracles::{ci_oracle_sector, fine_grid_min};
use qsim_core::pauli::{PauliString, PauliSum};
use qsim_core::vqe::{
    adapt_vqe, ansatz_energy, build_pool, build_pool_sized, count_cnots, fixed_ansatz_vqe,
    gga_vqe, tuccsd_ansatz, AnsatzCircuit, Backend, CnotDecomposition, EvalPlan, OperatorPool,
    PoolKind, VqeOptions,
};

fn data(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn h2_setup() -> (PauliSum, u64, qsim_core::chemistry::MolecularIntegrals) {
    let m = parse_fcidump(&data("h2_sto3g.fcidump")).unwrap();
    let h = jordan_wigner(&m);
    let reference = hf_reference(&m).unwrap().occupation;
    (h, reference, m)
}

#[test]
fn h2_adapt_reaches_ci_in_three_iterations() {
    let (h, reference, m) = h2_setup();
    let e_ci = ci_oracle_sector(&m, 1, 1).unwrap()[0];
    let pool = build_pool(PoolKind::FermionicSD, &m).unwrap();
    let opts = VqeOptions { reference, eps_grad: 1e-6, ..Default::default() };
    let res = adapt_vqe(&h, &pool, Backend::Sparse, &opts).unwrap();
    assert!(res.trace.len() <= 3, "took {} iterations", res.trace.len());
    assert_abs_diff_eq!(res.energy, e_ci, epsilon = 1e-8);
    // Monotone non-increasing energy trace.
    for w in res.trace.windows(2) {
        assert!(w[1].energy <= w[0].energy + 1e-12);
    }
}

#[test]
fn tuccsd_h2_reaches_ci() {
    let (h, _, m) = h2_setup();
    let e_ci = ci_oracle_sector(&m, 1, 1).unwrap()[0];
    let ansatz = tuccsd_ansatz(&m).unwrap();
    // Parameter count = |S| + |D| from the enumerated excitation lists.
    assert_eq!(ansatz.steps.len(), 3); // 2 spin-preserving singles + 1 double

    // All thetas zero reproduces the reference state energy.
    let plan = EvalPlan::new(&h, Backend::Sparse).unwrap();
    let e_ref = ansatz_energy(&ansatz, &plan).unwrap();
    let hf_det = qsim_core::sv::SparseState::basis_state(4, ansatz.reference);
    assert_abs_diff_eq!(e_ref, hf_det.expectation(&h).unwrap(), epsilon = 1e-12);

    let res = fixed_ansatz_vqe(&h, &ansatz, Backend::Sparse, &VqeOptions::default()).unwrap();
    assert_abs_diff_eq!(res.energy, e_ci, epsilon = 1e-8);
}

#[test]
fn gradient_formula_matches_finite_difference_for_all_pools() {
    let (h, reference, m) = h2_setup();
    let fd = 1e-6;
    for kind in [
        PoolKind::FermionicSD,
        PoolKind::Qeb,
        PoolKind::Qubit,
        PoolKind::MinimalComplete,
    ] {
        let pool = match kind {
            PoolKind::MinimalComplete => build_pool_sized(kind, 4, 2, true).unwrap(),
            _ => build_pool(kind, &m).unwrap(),
        };
        let plan = EvalPlan::new(&h, Backend::Sparse).unwrap();
        // Probe at a non-trivial ansatz point so gradients are generic.
        let mut ansatz = AnsatzCircuit::new(4, reference, pool.clone());
        ansatz.steps.push((0, 0.17));
        let state = plan.prepare(&ansatz).unwrap();
        for (i, g) in pool.generators.iter().enumerate() {
            let analytic = plan.gradient(&state, g, 0).unwrap();
            let mut plus = ansatz.clone();
            plus.steps.push((i, fd));
            let mut minus = ansatz.clone();
            minus.steps.push((i, -fd));
            let numeric = (ansatz_energy(&plus, &plan).unwrap()
                - ansatz_energy(&minus, &plan).unwrap())
                / (2.0 * fd);
            let scale = analytic.abs().max(numeric.abs()).max(1.0);
            assert!(
                (analytic - numeric).abs() / scale < 1e-6,
                "{kind:?} generator {i}: {analytic} vs {numeric}"
            );
        }
    }
}

#[test]
fn adapt_traces_agree_across_backends() {
    let (h, reference, m) = h2_setup();
    let pool = build_pool(PoolKind::FermionicSD, &m).unwrap();
    let opts = VqeOptions { reference, eps_grad: 1e-6, ..Default::default() };
    let runs: Vec<_> = [
        Backend::Dense,
        Backend::Sparse,
        Backend::Mps { cutoff: 0.0, max_bond: 64 },
        Backend::Partitioned { eta: 1, cutoff: 0.0 },
    ]
    .iter()
    .map(|&b| adapt_vqe(&h, &pool, b, &opts).unwrap())
    .collect();
    let first = &runs[0];
    for run in &runs[1..] {
        assert_abs_diff_eq!(run.energy, first.energy, epsilon = 1e-9);
        assert_eq!(run.trace.len(), first.trace.len(), "{}", run.backend);
        for (a, b) in run.trace.iter().zip(&first.trace) {
            assert_eq!(a.selected, b.selected, "{}", run.backend);
            assert_abs_diff_eq!(a.energy, b.energy, epsilon = 1e-9);
        }
    }
}

#[test]
fn mb_adapt_reduces_gradient_sweeps() {
    let (h, reference, m) = h2_setup();
    let pool = build_pool(PoolKind::Qubit, &m).unwrap();
    let base = VqeOptions { reference, eps_grad: 1e-6, ..Default::default() };
    let single = adapt_vqe(&h, &pool, Backend::Sparse, &base).unwrap();
    let batched = adapt_vqe(
        &h,
        &pool,
        Backend::Sparse,
        &VqeOptions { batch_size: 3, ..base },
    )
    .unwrap();
    assert_abs_diff_eq!(single.energy, batched.energy, epsilon = 1e-6);
    let ops_single = single.trace.iter().map(|t| t.selected.len()).sum::<usize>();
    let ops_batched = batched.trace.iter().map(|t| t.selected.len()).sum::<usize>();
    let per_op_single = single.n_gradient_evals as f64 / ops_single.max(1) as f64;
    let per_op_batched = batched.n_gradient_evals as f64 / ops_batched.max(1) as f64;
    assert!(
        per_op_batched < per_op_single / 1.5,
        "gradient sweeps per operator: batched {per_op_batched}, single {per_op_single}"
    );
}

#[test]
fn shot_noise_selection_agrees_with_noiseless() {
    let (h, reference, m) = h2_setup();
    let pool = build_pool(PoolKind::FermionicSD, &m).unwrap();
    let plan = EvalPlan::new(&h, Backend::Sparse).unwrap();
    let ansatz = AnsatzCircuit::new(4, reference, pool.clone());
    let state = plan.prepare(&ansatz).unwrap();
    let exact = plan.pool_gradients(&state, &pool, 0).unwrap();
    let argmax_exact = exact
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .unwrap()
        .0;
    let mut agree = 0;
    let trials = 20;
    for seed in 0..trials {
        let noisy_plan = EvalPlan::new(&h, Backend::Sparse)
            .unwrap()
            .with_shots(Some((100_000, seed)));
        let noisy = noisy_plan.pool_gradients(&state, &pool, 0).unwrap();
        let argmax = noisy
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .unwrap()
            .0;
        if argmax == argmax_exact {
            agree += 1;
        }
    }
    assert!(agree * 100 >= trials * 95, "agreement {agree}/{trials}");
}

fn tfi_chain(n: usize, j: f64, g: f64) -> PauliSum {
    let mut terms = Vec::new();
    for q in 0..n - 1 {
        let mut label = vec!['I'; n];
        label[q] = 'Z';
        label[q + 1] = 'Z';
        terms.push((
            Complex64::new(-j, 0.0),
            PauliString::from_label(&label.iter().collect::<String>()).unwrap(),
        ));
    }
    for q in 0..n {
        terms.push((
            Complex64::new(-g, 0.0),
            PauliString::single(n, q, 'X').unwrap(),
        ));
    }
    PauliSum::from_terms(n, terms).unwrap()
}

#[test]
fn gga_single_qubit_analytic_angle() {
    // H = Z, pool = {i X}: E(theta) = cos(2 theta), minimum -1 at |theta| = pi/2.
    let h = PauliSum::from_terms(
        1,
        vec![(Complex64::new(1.0, 0.0), PauliString::single(1, 0, 'Z').unwrap())],
    )
    .unwrap();
    let pool = OperatorPool {
        kind: PoolKind::Qubit,
        generators: vec![PauliSum::from_terms(
            1,
            vec![(Complex64::i(), PauliString::single(1, 0, 'X').unwrap())],
        )
        .unwrap()],
        labels: vec!["iX".into()],
    };
    let opts = VqeOptions { reference: 0, eps_grad: 1e-10, ..Default::default() };
    let res = gga_vqe(&h, &pool, Backend::Dense, &opts).unwrap();
    assert_abs_diff_eq!(res.energy, -1.0, epsilon = 1e-12);
    assert!(
        (res.thetas[0].abs() - std::f64::consts::FRAC_PI_2).abs() < 1e-9,
        "theta {}",
        res.thetas[0]
    );
}

#[test]
fn gga_angle_matches_fine_grid_line_search() {
    let n = 4;
    let h = tfi_chain(n, 1.0, 0.7);
    let pool = build_pool_sized(PoolKind::MinimalComplete, n, 1, false).unwrap();
    let opts = VqeOptions { reference: 0, eps_grad: 1e-8, max_iterations: 6, ..Default::default() };
    let res = gga_vqe(&h, &pool, Backend::Dense, &opts).unwrap();

    // Replay the greedy run; at each step the chosen angle must match a
    // dense 1-D line-search oracle on the true energy curve.
    let plan = EvalPlan::new(&h, Backend::Dense).unwrap();
    let mut ansatz = AnsatzCircuit::new(n, 0, pool.clone());
    for (step, &(idx, theta)) in res
        .operators
        .iter()
        .map(|l| pool.labels.iter().position(|p| p == l).unwrap())
        .zip(&res.thetas)
        .map(|(idx, t)| (idx, *t))
        .collect::<Vec<_>>()
        .iter()
        .enumerate()
    {
        let probe = |t: f64| {
            let mut a = ansatz.clone();
            a.steps.push((idx, t));
            ansatz_energy(&a, &plan).unwrap()
        };
        let (_, e_oracle) = fine_grid_min(&probe, -std::f64::consts::PI, std::f64::consts::PI, 2000);
        let e_chosen = probe(theta);
        assert!(
            (e_chosen - e_oracle).abs() < 1e-9,
            "step {step}: chosen {e_chosen} vs line-search {e_oracle}"
        );
        ansatz.steps.push((idx, theta));
    }
    // And the recorded trace is monotone.
    for w in res.trace.windows(2) {
        assert!(w[1].energy <= w[0].energy + 1e-12);
    }
}

#[test]
fn gga_rejects_non_cubic_generator() {
    let h = tfi_chain(2, 1.0, 0.5);
    // i(XI + 0.5 IX): unequal weights on commuting strings leave G^3 with
    // no common scale, so G^3 != -lambda^2 G.
    let bad = PauliSum::from_terms(
        2,
        vec![
            (Complex64::i(), PauliString::from_label("XI").unwrap()),
            (Complex64::new(0.0, 0.5), PauliString::from_label("IX").unwrap()),
        ],
    )
    .unwrap();
    let pool = OperatorPool {
        kind: PoolKind::Qubit,
        generators: vec![bad],
        labels: vec!["bad".into()],
    };
    let err = gga_vqe(&h, &pool, Backend::Dense, &VqeOptions::default());
    assert!(matches!(err, Err(qsim_core::error::Error::BadGgaGenerator(0))));
}

#[test]
fn cnot_counting_rules() {
    let pool = OperatorPool {
        kind: PoolKind::Qubit,
        generators: vec![
            PauliSum::from_terms(
                4,
                vec![(Complex64::i(), PauliString::single(4, 2, 'Y').unwrap())],
            )
            .unwrap(),
            PauliSum::from_terms(
                4,
                vec![(Complex64::i(), PauliString::from_label("XXXY").unwrap())],
            )
            .unwrap(),
        ],
        labels: vec!["w1".into(), "w4".into()],
    };
    let mut ansatz = AnsatzCircuit::new(4, 0, pool);
    ansatz.steps.push((0, 0.1));
    assert_eq!(count_cnots(&ansatz, CnotDecomposition::Qubit).unwrap(), 0);
    ansatz.steps.push((1, 0.2));
    assert_eq!(count_cnots(&ansatz, CnotDecomposition::Qubit).unwrap(), 6);
}

#[test]
fn qeb_cnot_constants() {
    let (_, _, m) = h2_setup();
    let pool = build_pool(PoolKind::Qeb, &m).unwrap();
    let mut ansatz = AnsatzCircuit::new(4, 0b0011, pool.clone());
    for i in 0..pool.len() {
        ansatz.steps.push((i, 0.1));
    }
    // H2 QEB pool: 2 singles (2 CNOTs each) + 1 double (13 CNOTs).
    assert_eq!(count_cnots(&ansatz, CnotDecomposition::Qeb).unwrap(), 2 * 2 + 13);
}

#[test]
fn qubit_pool_cnots_cheaper_than_qeb_on_h2() {
    let (h, reference, m) = h2_setup();
    let opts = VqeOptions { reference, eps_grad: 1e-6, ..Default::default() };
    let qeb = adapt_vqe(&h, &build_pool(PoolKind::Qeb, &m).unwrap(), Backend::Sparse, &opts)
        .unwrap();
    let qubit =
        adapt_vqe(&h, &build_pool(PoolKind::Qubit, &m).unwrap(), Backend::Sparse, &opts)
            .unwrap();
    let e_ci = ci_oracle_sector(&m, 1, 1).unwrap()[0];
    assert_abs_diff_eq!(qeb.energy, e_ci, epsilon = 1e-7);
    assert_abs_diff_eq!(qubit.energy, e_ci, epsilon = 1e-7);
    assert!(
        qubit.cnots_qubit.unwrap() < qeb.cnots_qeb.unwrap(),
        "qubit {} vs QEB {}",
        qubit.cnots_qubit.unwrap(),
        qeb.cnots_qeb.unwrap()
    );
}
