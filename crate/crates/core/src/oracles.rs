//! Brute-force reference implementations used by tests.
//!
//! Everything here is deliberately independent of the production kernels:
//! matrices are assembled entry-by-entry, CI uses Slater-Condon rules in a
//! determinant basis, and the line search is a grid scan. Slow is fine.

use ndarray::Array2;
use ndarray_linalg::Eigh;
use num_complex::Complex64;

use crate::chemistry::MolecularIntegrals;
use crate::error::{Error, Result};
use crate::pauli::PauliSum;

pub const DENSE_QUBIT_CAP: usize = 14;
pub const CI_ORBITAL_CAP: usize = 6;

#[derive(Clone, Debug)]
pub struct DenseOperator {
    pub n_qubits: usize,
    pub matrix: Array2<Complex64>,
}

/// Full 2^n x 2^n matrix of a Pauli sum, built column by column from the
/// basis action of each string.
pub fn matrix_of(h: &PauliSum) -> Result<DenseOperator> {
    let n = h.n_qubits();
    if n > DENSE_QUBIT_CAP {
        return Err(Error::SizeLimit(n, DENSE_QUBIT_CAP));
    }
    let dim = 1usize << n;
    let mut matrix = Array2::zeros((dim, dim));
    for (coeff, p) in h.iter() {
        for col in 0..dim {
            let (row, f) = p.apply_to_basis(col as u64);
            matrix[(row as usize, col)] += coeff * f;
        }
    }
    Ok(DenseOperator { n_qubits: n, matrix })
}

/// Lowest eigenpair of a Hermitian Pauli sum. Dense eigendecomposition up to
/// ten qubits, Lanczos with full reorthogonalization above that.
pub fn exact_ground_state(h: &PauliSum) -> Result<(f64, Vec<Complex64>)> {
    let n = h.n_qubits();
    if n > DENSE_QUBIT_CAP {
        return Err(Error::SizeLimit(n, DENSE_QUBIT_CAP));
    }
    if n <= 10 {
        let dense = matrix_of(h)?;
        let (w, v) = dense
            .matrix
            .eigh(ndarray_linalg::UPLO::Lower)
            .map_err(|e| Error::Invalid(format!("eigendecomposition failed: {e}")))?;
        let ground = v.column(0).to_vec();
        Ok((w[0], ground))
    } else {
        lanczos_ground(h)
    }
}

fn apply_dense(h: &PauliSum, v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for (coeff, p) in h.iter() {
        for (b, &amp) in v.iter().enumerate() {
            if amp != Complex64::new(0.0, 0.0) {
                let (to, f) = p.apply_to_basis(b as u64);
                out[to as usize] += coeff * f * amp;
            }
        }
    }
    out
}

fn lanczos_ground(h: &PauliSum) -> Result<(f64, Vec<Complex64>)> {
    use rand::Rng;
    let dim = 1usize << h.n_qubits();
    let max_iter = 300.min(dim);
    let mut rng = crate::rng::derive_rng(0x1a2c, 0x0ac1e);
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    normalize(&mut v);
    let mut basis: Vec<Vec<Complex64>> = vec![v.clone()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    for _ in 0..max_iter {
        let mut w = apply_dense(h, basis.last().unwrap());
        // Full reorthogonalization, twice for stability.
        for _ in 0..2 {
            for b in &basis {
                let ip = inner(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= ip * bi;
                }
            }
        }
        let alpha = inner(basis.last().unwrap(), &apply_dense(h, basis.last().unwrap())).re;
        alphas.push(alpha);
        let beta = norm(&w);
        if beta < 1e-12 {
            break;
        }
        betas.push(beta);
        for wi in &mut w {
            *wi /= beta;
        }
        basis.push(w);
    }
    let k = alphas.len();
    let mut tri = Array2::<f64>::zeros((k, k));
    for i in 0..k {
        tri[(i, i)] = alphas[i];
        if i + 1 < k {
            tri[(i, i + 1)] = betas[i];
            tri[(i + 1, i)] = betas[i];
        }
    }
    let (w, y) = tri
        .eigh(ndarray_linalg::UPLO::Lower)
        .map_err(|e| Error::Invalid(format!("tridiagonal eigh failed: {e}")))?;
    let mut ground = vec![Complex64::new(0.0, 0.0); dim];
    for (j, b) in basis.iter().take(k).enumerate() {
        let c = y[(j, 0)];
        for (g, bi) in ground.iter_mut().zip(b) {
            *g += c * bi;
        }
    }
    normalize(&mut ground);
    Ok((w[0], ground))
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex64]) {
    let n = norm(v);
    for x in v.iter_mut() {
        *x /= n;
    }
}

/// All eigenvalues of the determinant-basis CI Hamiltonian in the
/// (n_alpha, n_beta) sector, sorted ascending, core energy included.
///
/// Electrons split as evenly as possible with any odd one going to alpha.
pub fn ci_oracle(m: &MolecularIntegrals) -> Result<Vec<f64>> {
    let n_alpha = m.n_electrons.div_ceil(2);
    let n_beta = m.n_electrons / 2;
    ci_oracle_sector(m, n_alpha, n_beta)
}

pub fn ci_oracle_sector(
    m: &MolecularIntegrals,
    n_alpha: usize,
    n_beta: usize,
) -> Result<Vec<f64>> {
    let n = m.n_orbitals;
    if n > CI_ORBITAL_CAP {
        return Err(Error::SizeLimit(n, CI_ORBITAL_CAP));
    }
    if n_alpha > n || n_beta > n {
        return Err(Error::TooManyElectrons {
            n_electrons: n_alpha + n_beta,
            n_spin_orbitals: 2 * n,
        });
    }
    // Determinants as bitmasks over interleaved spin-orbitals (bit 2p = p-alpha,
    // bit 2p+1 = p-beta), matching the qubit convention so sectors line up.
    let alphas = bit_combinations(n, n_alpha);
    let betas = bit_combinations(n, n_beta);
    let mut dets: Vec<u64> = Vec::with_capacity(alphas.len() * betas.len());
    for &a in &alphas {
        for &b in &betas {
            dets.push(interleave(a) | (interleave(b) << 1));
        }
    }
    dets.sort_unstable();

    let dim = dets.len();
    let mut hmat = Array2::<f64>::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..=i {
            let e = slater_condon(m, dets[i], dets[j]);
            hmat[(i, j)] = e;
            hmat[(j, i)] = e;
        }
    }
    let (w, _v) = hmat
        .eigh(ndarray_linalg::UPLO::Lower)
        .map_err(|e| Error::Invalid(format!("CI eigh failed: {e}")))?;
    Ok(w.iter().map(|e| e + m.core_energy).collect())
}

fn bit_combinations(n: usize, k: usize) -> Vec<u64> {
    let mut out = Vec::new();
    for bits in 0u64..(1 << n) {
        if bits.count_ones() as usize == k {
            out.push(bits);
        }
    }
    out
}

/// Spread the low bits of `m` to even positions: bit p -> bit 2p.
fn interleave(m: u64) -> u64 {
    let mut out = 0u64;
    let mut m = m;
    while m != 0 {
        let p = m.trailing_zeros();
        out |= 1 << (2 * p);
        m &= m - 1;
    }
    out
}

/// One-body spin-orbital integral; spin-orbital s = 2*spatial + spin.
fn h_so(m: &MolecularIntegrals, s: usize, t: usize) -> f64 {
    if s % 2 != t % 2 {
        return 0.0;
    }
    m.h(s / 2, t / 2)
}

/// Antisymmetrized two-body spin-orbital integral <st||uv> in physicists'
/// notation, from chemists' spatial (pq|rs).
fn g_anti(m: &MolecularIntegrals, s: usize, t: usize, u: usize, v: usize) -> f64 {
    let coul = if s % 2 == u % 2 && t % 2 == v % 2 {
        m.g(s / 2, u / 2, t / 2, v / 2)
    } else {
        0.0
    };
    let exch = if s % 2 == v % 2 && t % 2 == u % 2 {
        m.g(s / 2, v / 2, t / 2, u / 2)
    } else {
        0.0
    };
    coul - exch
}

fn occupied(det: u64) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = det;
    while d != 0 {
        out.push(d.trailing_zeros() as usize);
        d &= d - 1;
    }
    out
}

/// Parity sign for moving an electron past the occupied orbitals strictly
/// between `from` and `to`.
fn excitation_sign(det: u64, from: usize, to: usize) -> f64 {
    let (lo, hi) = if from < to { (from, to) } else { (to, from) };
    let mask = ((1u64 << hi) - 1) & !((1u64 << (lo + 1)) - 1);
    if (det & mask).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn slater_condon(m: &MolecularIntegrals, bra: u64, ket: u64) -> f64 {
    let diff = bra ^ ket;
    match diff.count_ones() {
        0 => {
            let occ = occupied(ket);
            let mut e: f64 = occ.iter().map(|&i| h_so(m, i, i)).sum();
            for (a, &i) in occ.iter().enumerate() {
                for &j in &occ[a + 1..] {
                    e += g_anti(m, i, j, i, j);
                }
            }
            e
        }
        2 => {
            let from = (diff & ket).trailing_zeros() as usize;
            let to = (diff & bra).trailing_zeros() as usize;
            let sign = excitation_sign(ket, from, to);
            let occ = occupied(ket & !diff);
            let mut e = h_so(m, to, from);
            for &i in &occ {
                e += g_anti(m, to, i, from, i);
            }
            sign * e
        }
        4 => {
            let removed = occupied(diff & ket);
            let added = occupied(diff & bra);
            let (m1, n1) = (removed[0], removed[1]);
            let (p1, q1) = (added[0], added[1]);
            // Align both determinants to the common core and count crossings.
            let sign = excitation_sign(ket, m1, p1)
                * excitation_sign(ket ^ (1 << m1) ^ (1 << p1), n1, q1);
            sign * g_anti(m, p1, q1, m1, n1)
        }
        _ => 0.0,
    }
}

/// Dimension of the CI sector (handy for tests that check qubit-space
/// restriction sizes).
pub fn ci_dimension(n_orbitals: usize, n_alpha: usize, n_beta: usize) -> usize {
    fn choose(n: usize, k: usize) -> usize {
        if k > n {
            return 0;
        }
        (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
    }
    choose(n_orbitals, n_alpha) * choose(n_orbitals, n_beta)
}

/// Grid-scan minimizer over [lo, hi]: coarse pass then two refinement passes
/// around the best point. Reference for analytic line-search code.
pub fn fine_grid_min(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, n_points: usize) -> (f64, f64) {
    let mut best_x = lo;
    let mut best_v = f64::INFINITY;
    let mut a = lo;
    let mut b = hi;
    for _ in 0..3 {
        let step = (b - a) / n_points as f64;
        for i in 0..=n_points {
            let x = a + step * i as f64;
            let v = f(x);
            if v < best_v {
                best_v = v;
                best_x = x;
            }
        }
        a = best_x - step;
        b = best_x + step;
    }
    (best_x, best_v)
}

/// Closed-form phase-estimation outcome distribution: probability of reading
/// integer k from an eigenstate with eigenphase `phase` (in turns, [0,1))
/// using `m_bits` ancilla qubits.
pub fn phase_estimation_distribution(phase: f64, m_bits: u32) -> Vec<f64> {
    let big_m = 1u64 << m_bits;
    (0..big_m)
        .map(|k| {
            let delta = phase - k as f64 / big_m as f64;
            let num = (std::f64::consts::PI * big_m as f64 * delta).sin();
            let den = (std::f64::consts::PI * delta).sin();
            if den.abs() < 1e-15 {
                // delta is an exact multiple of 1/M: all weight here.
                if num.abs() < 1e-9 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (num / den).powi(2) / (big_m * big_m) as f64
            }
        })
        .collect()
}
