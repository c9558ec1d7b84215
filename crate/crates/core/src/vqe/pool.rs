//! Operator pools for adaptive ansatz construction.
//!
//! Every generator is stored as an anti-Hermitian PauliSum (purely imaginary
//! coefficients on phase-free strings), so `exp(theta * G)` is unitary and
//! the ADAPT gradient `<psi|[H,G]|psi>` is real.

use num_complex::Complex64;

use crate::chemistry::{annihilation_op, creation_op, MolecularIntegrals};
use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PoolKind {
    FermionicSD,
    Qeb,
    Qubit,
    MinimalComplete,
}

impl PoolKind {
    pub fn parse(s: &str) -> Result<PoolKind> {
        match s {
            "fermionic-sd" => Ok(PoolKind::FermionicSD),
            "qeb" => Ok(PoolKind::Qeb),
            "qubit" => Ok(PoolKind::Qubit),
            "mcp" => Ok(PoolKind::MinimalComplete),
            other => Err(Error::Parse(format!("unknown pool kind: {other}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OperatorPool {
    pub kind: PoolKind,
    pub generators: Vec<PauliSum>,
    pub labels: Vec<String>,
}

impl OperatorPool {
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn n_qubits(&self) -> usize {
        self.generators.first().map_or(0, PauliSum::n_qubits)
    }
}

/// True iff all coefficients are purely imaginary (G^dag = -G on phase-free
/// strings).
pub fn is_anti_hermitian(g: &PauliSum) -> bool {
    g.iter().all(|(c, _)| c.re.abs() < 1e-12)
}

/// Pool from molecular integrals: spin-aware excitations out of the
/// Hartree-Fock determinant (lowest `n_electrons` interleaved spin-orbitals).
pub fn build_pool(kind: PoolKind, m: &MolecularIntegrals) -> Result<OperatorPool> {
    build_pool_sized(kind, 2 * m.n_orbitals, m.n_electrons, true)
}

/// Pool over raw modes: `n_occupied` lowest modes occupied. With
/// `spin_aware` the interleaved spin labels constrain excitations
/// (singles preserve spin, doubles preserve total Sz); without it every
/// index combination is allowed.
pub fn build_pool_sized(
    kind: PoolKind,
    n_qubits: usize,
    n_occupied: usize,
    spin_aware: bool,
) -> Result<OperatorPool> {
    match kind {
        PoolKind::MinimalComplete => minimal_complete_pool(n_qubits),
        PoolKind::FermionicSD => {
            let (gens, labels) = excitation_generators(n_qubits, n_occupied, spin_aware, false)?;
            Ok(OperatorPool { kind, generators: gens, labels })
        }
        PoolKind::Qeb => {
            let (gens, labels) = excitation_generators(n_qubits, n_occupied, spin_aware, true)?;
            Ok(OperatorPool { kind, generators: gens, labels })
        }
        PoolKind::Qubit => {
            let (gens, _) = excitation_generators(n_qubits, n_occupied, spin_aware, true)?;
            let mut seen = std::collections::BTreeSet::new();
            let mut generators = Vec::new();
            let mut labels = Vec::new();
            for g in &gens {
                for (_, p) in g.iter() {
                    let (bare, _) = p.split_phase();
                    if seen.insert((bare.x_mask(), bare.z_mask())) {
                        let mut sum = PauliSum::zero(n_qubits);
                        sum.add_term(Complex64::new(0.0, 1.0), &bare)?;
                        labels.push(format!("i{}", bare.label()));
                        generators.push(sum);
                    }
                }
            }
            Ok(OperatorPool { kind, generators, labels })
        }
    }
}

fn spin(mode: usize) -> usize {
    mode % 2
}

fn excitation_generators(
    n: usize,
    n_occ: usize,
    spin_aware: bool,
    strip_z: bool,
) -> Result<(Vec<PauliSum>, Vec<String>)> {
    if n_occ > n {
        return Err(Error::TooManyElectrons { n_electrons: n_occ, n_spin_orbitals: n });
    }
    let occ: Vec<usize> = (0..n_occ).collect();
    let virt: Vec<usize> = (n_occ..n).collect();
    let mut gens = Vec::new();
    let mut labels = Vec::new();
    for &i in &occ {
        for &a in &virt {
            if spin_aware && spin(i) != spin(a) {
                continue;
            }
            let tau = creation_op(n, a).mul(&annihilation_op(n, i))?;
            let dag = creation_op(n, i).mul(&annihilation_op(n, a))?;
            let g = finish_generator(tau, dag, strip_z, &[i, a]);
            if !g.is_empty() {
                gens.push(g);
                labels.push(format!("s({i}->{a})"));
            }
        }
    }
    for (oi, &i) in occ.iter().enumerate() {
        for &j in occ.iter().skip(oi + 1) {
            for (va, &a) in virt.iter().enumerate() {
                for &b in virt.iter().skip(va + 1) {
                    if spin_aware && spin(i) + spin(j) != spin(a) + spin(b) {
                        continue;
                    }
                    let tau = creation_op(n, a)
                        .mul(&creation_op(n, b))?
                        .mul(&annihilation_op(n, j))?
                        .mul(&annihilation_op(n, i))?;
                    let dag = creation_op(n, i)
                        .mul(&creation_op(n, j))?
                        .mul(&annihilation_op(n, b))?
                        .mul(&annihilation_op(n, a))?;
                    let g = finish_generator(tau, dag, strip_z, &[i, j, a, b]);
                    if !g.is_empty() {
                        gens.push(g);
                        labels.push(format!("d({i},{j}->{a},{b})"));
                    }
                }
            }
        }
    }
    Ok((gens, labels))
}

fn finish_generator(
    tau: PauliSum,
    tau_dag: PauliSum,
    strip_z: bool,
    involved: &[usize],
) -> PauliSum {
    let g = tau
        .add(&tau_dag.scale(Complex64::new(-1.0, 0.0)))
        .expect("same width")
        .canonicalized();
    if !strip_z {
        return g;
    }
    // Qubit-excitation form: drop the Jordan-Wigner Z tails outside the
    // excitation's own qubits.
    let n = g.n_qubits();
    let keep: u64 = involved.iter().map(|&q| 1u64 << q).sum();
    let mut out = PauliSum::zero(n);
    for (c, p) in g.iter() {
        let (bare, phase) = p.split_phase();
        let stripped = PauliString::from_masks(n, bare.x_mask(), bare.z_mask() & keep);
        out.add_term(c * phase, &stripped).expect("same width");
    }
    out.canonicalized()
}

/// The 2n-2 element pool {i Z_k Y_(k+1)} ∪ {i Y_k}, k = 0..n-2. For n ≤ 6
/// the build verifies completeness: the Lie closure, acting on a generic
/// real vector, spans the full tangent space of the real sphere.
pub fn minimal_complete_pool(n_qubits: usize) -> Result<OperatorPool> {
    if n_qubits < 2 {
        return Err(Error::Invalid("minimal complete pool needs >= 2 qubits".into()));
    }
    let mut generators = Vec::new();
    let mut labels = Vec::new();
    let i1 = Complex64::new(0.0, 1.0);
    for k in 0..n_qubits - 1 {
        let zy = PauliString::from_masks(
            n_qubits,
            1 << (k + 1),
            (1 << k) | (1 << (k + 1)),
        );
        let (bare, _) = zy.split_phase();
        let mut g = PauliSum::zero(n_qubits);
        g.add_term(i1, &bare)?;
        labels.push(format!("i{}", bare.label()));
        generators.push(g);
    }
    for k in 0..n_qubits - 1 {
        let y = PauliString::single(n_qubits, k, 'Y')?;
        let (bare, _) = y.split_phase();
        let mut g = PauliSum::zero(n_qubits);
        g.add_term(i1, &bare)?;
        labels.push(format!("i{}", bare.label()));
        generators.push(g);
    }
    if n_qubits <= 6 {
        let masks: Vec<(u64, u64)> = generators
            .iter()
            .map(|g| {
                let (_, p) = g.iter().next().expect("single term");
                let (bare, _) = p.split_phase();
                (bare.x_mask(), bare.z_mask())
            })
            .collect();
        if !closure_is_complete(n_qubits, &masks) {
            return Err(Error::Invalid(
                "minimal pool failed its completeness self-check".into(),
            ));
        }
    }
    Ok(OperatorPool { kind: PoolKind::MinimalComplete, generators, labels })
}

/// Nested-commutator closure over single Pauli strings, then a tangent-rank
/// check at a fixed generic real vector.
pub fn closure_is_complete(n: usize, gens: &[(u64, u64)]) -> bool {
    use std::collections::BTreeSet;
    let anticommute = |a: (u64, u64), b: (u64, u64)| -> bool {
        ((a.0 & b.1).count_ones() + (a.1 & b.0).count_ones()) % 2 == 1
    };
    let mut set: BTreeSet<(u64, u64)> = gens.iter().copied().collect();
    let mut frontier: Vec<(u64, u64)> = gens.to_vec();
    while !frontier.is_empty() {
        let mut new = Vec::new();
        let snapshot: Vec<(u64, u64)> = set.iter().copied().collect();
        for &a in &snapshot {
            for &b in &frontier {
                if anticommute(a, b) {
                    let c = (a.0 ^ b.0, a.1 ^ b.1);
                    if set.insert(c) {
                        new.push(c);
                    }
                }
            }
        }
        frontier = new;
    }
    // Generic real vector: deterministic pseudo-random entries.
    let dim = 1usize << n;
    let mut rng = crate::rng::derive_rng(0x9001, n as u64);
    use rand::Rng;
    let v: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect();
    // Each closure element iP (odd-Y string) is a real matrix; its action on
    // v gives one tangent vector. Rank by Gram-Schmidt.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for &(x, z) in &set {
        let ky = (x & z).count_ones();
        if ky % 2 == 0 {
            // Even-Y strings produce imaginary matrices; the closure of
            // odd-Y generators should never contain them.
            continue;
        }
        let string = PauliString::from_masks(n, x, z);
        let mut w = vec![0.0f64; dim];
        for (col, &amp) in v.iter().enumerate() {
            let (row, f) = string.apply_to_basis(col as u64);
            // i * (phase) is real for odd-Y strings.
            let real = (Complex64::new(0.0, 1.0) * f).re;
            w[row as usize] += real * amp;
        }
        for b in &basis {
            let ip: f64 = b.iter().zip(&w).map(|(a, c)| a * c).sum();
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= ip * bi;
            }
        }
        let norm: f64 = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for wi in &mut w {
                *wi /= norm;
            }
            basis.push(w);
            if basis.len() == dim - 1 {
                return true;
            }
        }
    }
    basis.len() >= dim - 1
}

/// If G^3 == -lambda^2 G symbolically, returns lambda (> 0); the energy
/// along exp(theta G) is then a two-harmonic function of lambda * theta.
pub fn cubic_scale(g: &PauliSum) -> Option<f64> {
    let g = g.clone().canonicalized();
    if g.is_empty() {
        return None;
    }
    let g3 = g.mul(&g).ok()?.mul(&g).ok()?.canonicalized();
    if g3.is_empty() {
        return None;
    }
    // lambda^2 from the first shared term.
    let (c3, p3) = g3.iter().next()?;
    let c1 = g
        .iter()
        .find(|(_, p)| *p == p3)
        .map(|(c, _)| c)?;
    let ratio = c3 / c1;
    if ratio.im.abs() > 1e-10 || ratio.re >= 0.0 {
        return None;
    }
    let lambda2 = -ratio.re;
    let defect = g3
        .add(&g.scale(Complex64::new(lambda2, 0.0)))
        .ok()?
        .canonicalized();
    if defect.coeff_norm() < 1e-10 * (1.0 + g.coeff_norm()) {
        Some(lambda2.sqrt())
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_modes_one_single() {
        let pool = build_pool_sized(PoolKind::FermionicSD, 2, 1, false).unwrap();
        assert_eq!(pool.len(), 1);
        assert!(pool.labels[0].starts_with("s("));
        assert!(is_anti_hermitian(&pool.generators[0]));
    }

    #[test]
    fn h2_pool_singles_plus_one_double() {
        let m = MolecularIntegrals {
            n_orbitals: 2,
            n_electrons: 2,
            core_energy: 0.0,
            one_body: vec![0.0; 4],
            two_body: vec![0.0; 16],
        };
        let pool = build_pool(PoolKind::FermionicSD, &m).unwrap();
        let singles = pool.labels.iter().filter(|l| l.starts_with("s(")).count();
        let doubles = pool.labels.iter().filter(|l| l.starts_with("d(")).count();
        assert_eq!(singles, 2); // 0->2 (alpha), 1->3 (beta)
        assert_eq!(doubles, 1); // (0,1) -> (2,3)
        // The double is the XXXY-family generator: all terms weight 4 with
        // three X/Y on any qubit... concretely, 8 terms of odd Y count.
        let d = &pool.generators[pool.labels.iter().position(|l| l.starts_with("d(")).unwrap()];
        assert_eq!(d.n_terms(), 8);
        for (c, p) in d.iter() {
            assert!(c.re.abs() < 1e-14);
            let (bare, _) = p.split_phase();
            assert_eq!(bare.weight(), 4);
            assert_eq!((bare.x_mask() & bare.z_mask()).count_ones() % 2, 1);
        }
    }

    #[test]
    fn qeb_strips_z_tails() {
        // Single 0 -> 4 on 6 modes: fermionic form carries Z1 Z2 Z3; QEB not.
        let ferm = build_pool_sized(PoolKind::FermionicSD, 6, 1, false).unwrap();
        let qeb = build_pool_sized(PoolKind::Qeb, 6, 1, false).unwrap();
        let idx = ferm.labels.iter().position(|l| l == "s(0->4)").unwrap();
        let max_weight = |g: &PauliSum| {
            g.iter()
                .map(|(_, p)| p.split_phase().0.weight())
                .max()
                .unwrap()
        };
        assert_eq!(max_weight(&ferm.generators[idx]), 5);
        assert_eq!(max_weight(&qeb.generators[idx]), 2);
        assert!(is_anti_hermitian(&qeb.generators[idx]));
    }

    #[test]
    fn qubit_pool_is_single_strings() {
        let pool = build_pool_sized(PoolKind::Qubit, 4, 2, false).unwrap();
        assert!(!pool.is_empty());
        for g in &pool.generators {
            assert_eq!(g.n_terms(), 1);
            assert!(is_anti_hermitian(g));
        }
    }

    #[test]
    fn minimal_pool_size_and_completeness() {
        for n in 2..=6 {
            let pool = minimal_complete_pool(n).unwrap();
            assert_eq!(pool.len(), 2 * n - 2);
            for g in &pool.generators {
                assert!(is_anti_hermitian(g));
            }
        }
    }

    #[test]
    fn incomplete_candidate_rejected_by_check() {
        // {i Y_k} alone only generates single-qubit rotations.
        let gens: Vec<(u64, u64)> = (0..3).map(|k| (1 << k, 1 << k)).collect();
        assert!(!closure_is_complete(4, &gens));
    }

    #[test]
    fn cubic_scale_on_pool_kinds() {
        // Single Pauli: lambda = 1.
        let pool = minimal_complete_pool(4).unwrap();
        for g in &pool.generators {
            let l = cubic_scale(g).unwrap();
            assert!((l - 1.0).abs() < 1e-12);
        }
        // Fermionic single and double excitations satisfy G^3 = -G too.
        let ferm = build_pool_sized(PoolKind::FermionicSD, 4, 2, false).unwrap();
        for g in &ferm.generators {
            let l = cubic_scale(g).unwrap();
            assert!((l - 1.0).abs() < 1e-10, "lambda {l}");
        }
    }

    #[test]
    fn pool_scaling_orders() {
        // fermionic_SD / QEB candidate counts grow ~ N^4, minimal pool ~ N.
        let f8 = build_pool_sized(PoolKind::FermionicSD, 8, 4, false).unwrap();
        let f12 = build_pool_sized(PoolKind::FermionicSD, 12, 6, false).unwrap();
        assert!(f12.len() > 3 * f8.len());
        assert_eq!(minimal_complete_pool(12).unwrap().len(), 22);
    }
}
