//! Molecular-integral ingestion and second-quantized Hamiltonian
//! construction.
//!
//! FCIDUMP files carry spatial-orbital integrals in chemists' notation.
//! Spin-orbitals are interleaved (alpha0, beta0, alpha1, ...) and the qubit
//! index equals the spin-orbital index under Jordan-Wigner.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};

#[derive(Clone, Debug)]
pub struct MolecularIntegrals {
    pub n_orbitals: usize,
    pub n_electrons: usize,
    /// Constant energy offset (nuclear repulsion plus any frozen-core energy).
    pub core_energy: f64,
    /// h_pq, row-major n x n, Hartree.
    pub one_body: Vec<f64>,
    /// (pq|rs) in chemists' notation, row-major n^4, Hartree.
    pub two_body: Vec<f64>,
}

impl MolecularIntegrals {
    pub fn h(&self, p: usize, q: usize) -> f64 {
        self.one_body[p * self.n_orbitals + q]
    }

    pub fn g(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_orbitals;
        self.two_body[((p * n + q) * n + r) * n + s]
    }

    fn set_g(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        let n = self.n_orbitals;
        // 8-fold symmetry of real integrals.
        for (a, b, c, d) in [
            (p, q, r, s),
            (q, p, r, s),
            (p, q, s, r),
            (q, p, s, r),
            (r, s, p, q),
            (s, r, p, q),
            (r, s, q, p),
            (s, r, q, p),
        ] {
            self.two_body[((a * n + b) * n + c) * n + d] = v;
        }
    }

    /// Max violation of the h_pq = h_qp and 8-fold g symmetries.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n_orbitals;
        let mut d = 0.0f64;
        for p in 0..n {
            for q in 0..n {
                d = d.max((self.h(p, q) - self.h(q, p)).abs());
                for r in 0..n {
                    for s in 0..n {
                        let v = self.g(p, q, r, s);
                        d = d.max((v - self.g(q, p, r, s)).abs());
                        d = d.max((v - self.g(r, s, p, q)).abs());
                        d = d.max((v - self.g(p, q, s, r)).abs());
                    }
                }
            }
        }
        d
    }
}

/// Provenance sidecar written next to each bundled FCIDUMP file.
#[derive(Clone, Debug, Deserialize)]
pub struct Provenance {
    pub molecule: String,
    pub basis: String,
    pub hf_energy: f64,
    #[serde(default)]
    pub fci_energy: Option<f64>,
}

pub fn load_provenance(path: &Path) -> Result<Provenance> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("provenance json: {e}")))
}

pub fn parse_fcidump(path: &Path) -> Result<MolecularIntegrals> {
    let text = std::fs::read_to_string(path)?;
    parse_fcidump_str(&text)
}

pub fn parse_fcidump_str(text: &str) -> Result<MolecularIntegrals> {
    let mut lines = text.lines();
    let mut header = String::new();
    let mut found_end = false;
    for line in lines.by_ref() {
        header.push_str(line);
        header.push(' ');
        let upper = line.to_uppercase();
        if upper.contains("&END") || upper.trim() == "/" || upper.trim().ends_with('/') {
            found_end = true;
            break;
        }
    }
    if !found_end {
        return Err(Error::Parse("FCIDUMP header has no &END".into()));
    }
    let grab = |key: &str| -> Result<usize> {
        let upper = header.to_uppercase();
        let pos = upper
            .find(key)
            .ok_or_else(|| Error::Parse(format!("FCIDUMP header missing {key}")))?;
        let rest = &upper[pos + key.len()..];
        let rest = rest.trim_start().trim_start_matches('=').trim_start();
        let num: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
        num.parse()
            .map_err(|_| Error::Parse(format!("bad value for {key}")))
    };
    let n_orbitals = grab("NORB")?;
    let n_electrons = grab("NELEC")?;
    if n_orbitals == 0 {
        return Err(Error::Parse("NORB must be >= 1".into()));
    }

    let mut m = MolecularIntegrals {
        n_orbitals,
        n_electrons,
        core_energy: 0.0,
        one_body: vec![0.0; n_orbitals * n_orbitals],
        two_body: vec![0.0; n_orbitals.pow(4)],
    };
    for line in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 5 {
            return Err(Error::Parse(format!("bad FCIDUMP record: {line}")));
        }
        let v: f64 = fields[0]
            .replace(['D', 'd'], "E")
            .parse()
            .map_err(|_| Error::Parse(format!("bad value: {}", fields[0])))?;
        let idx: Vec<usize> = fields[1..]
            .iter()
            .map(|f| f.parse().map_err(|_| Error::Parse(format!("bad index: {f}"))))
            .collect::<Result<_>>()?;
        let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
        for &ix in &[i, j, k, l] {
            if ix > n_orbitals {
                return Err(Error::Parse(format!("orbital index {ix} > NORB")));
            }
        }
        match (i, j, k, l) {
            (0, 0, 0, 0) => m.core_energy = v,
            (i, j, 0, 0) if i > 0 && j > 0 => {
                m.one_body[(i - 1) * n_orbitals + (j - 1)] = v;
                m.one_body[(j - 1) * n_orbitals + (i - 1)] = v;
            }
            (i, j, k, l) if i > 0 && j > 0 && k > 0 && l > 0 => {
                m.set_g(i - 1, j - 1, k - 1, l - 1, v);
            }
            _ => return Err(Error::Parse(format!("bad index pattern: {line}"))),
        }
    }
    Ok(m)
}

/// Canonical text form; 17 significant digits, same record order every time.
pub fn serialize_fcidump(m: &MolecularIntegrals) -> String {
    let n = m.n_orbitals;
    let mut out = String::new();
    let _ = writeln!(out, "&FCI NORB={},NELEC={},MS2=0,", n, m.n_electrons);
    let _ = writeln!(out, "  ORBSYM={}", "1,".repeat(n));
    let _ = writeln!(out, "  ISYM=1,");
    let _ = writeln!(out, "&END");
    for p in 0..n {
        for q in 0..=p {
            for r in 0..=p {
                let smax = if r == p { q } else { r };
                for s in 0..=smax {
                    let v = m.g(p, q, r, s);
                    if v.abs() > 1e-12 {
                        let _ = writeln!(
                            out,
                            "{:23.16E} {:4} {:4} {:4} {:4}",
                            v,
                            p + 1,
                            q + 1,
                            r + 1,
                            s + 1
                        );
                    }
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..=p {
            let v = m.h(p, q);
            if v.abs() > 1e-12 {
                let _ = writeln!(out, "{:23.16E} {:4} {:4}    0    0", v, p + 1, q + 1);
            }
        }
    }
    let _ = writeln!(out, "{:23.16E}    0    0    0    0", m.core_energy);
    out
}

/// Jordan-Wigner images of the ladder operators on a register of
/// `n_spin_orbitals` qubits: `a_s = Z_0..Z_{s-1} (X_s + i Y_s)/2`.
pub fn annihilation_op(n_spin_orbitals: usize, s: usize) -> PauliSum {
    let tail: u64 = (1u64 << s) - 1;
    let mut sum = PauliSum::zero(n_spin_orbitals);
    let xs = PauliString::from_masks(n_spin_orbitals, 1 << s, tail);
    let ys = PauliString::from_masks(n_spin_orbitals, 1 << s, tail | (1 << s));
    sum.add_term(Complex64::new(0.5, 0.0), &xs).unwrap();
    sum.add_term(Complex64::new(0.0, 0.5), &ys).unwrap();
    sum
}

pub fn creation_op(n_spin_orbitals: usize, s: usize) -> PauliSum {
    let tail: u64 = (1u64 << s) - 1;
    let mut sum = PauliSum::zero(n_spin_orbitals);
    let xs = PauliString::from_masks(n_spin_orbitals, 1 << s, tail);
    let ys = PauliString::from_masks(n_spin_orbitals, 1 << s, tail | (1 << s));
    sum.add_term(Complex64::new(0.5, 0.0), &xs).unwrap();
    sum.add_term(Complex64::new(0.0, -0.5), &ys).unwrap();
    sum
}

/// Spin-orbital index under the interleaved convention.
pub fn spin_orbital(spatial: usize, spin: usize) -> usize {
    2 * spatial + spin
}

/// Map the integrals to a qubit Hamiltonian on 2*n_orbitals qubits.
///
/// Two-body integrals enter as
/// `1/2 sum_{pqrs,st} (pq|rs) a^dag_{p s} a^dag_{r t} a_{s t} a_{q s}`
/// (chemists' notation converted to the physicists' operator ordering here).
pub fn jordan_wigner(m: &MolecularIntegrals) -> PauliSum {
    let n = m.n_orbitals;
    let nq = 2 * n;
    let mut acc: HashMap<(u64, u64), Complex64> = HashMap::new();
    let mut add_sum = |sum: &PauliSum, factor: f64| {
        for (c, p) in sum.iter() {
            let (bare, phase) = p.split_phase();
            *acc.entry((bare.x_mask(), bare.z_mask()))
                .or_insert(Complex64::new(0.0, 0.0)) += c * phase * factor;
        }
    };

    let id = {
        let mut s = PauliSum::zero(nq);
        s.add_term(Complex64::new(1.0, 0.0), &PauliString::identity(nq))
            .unwrap();
        s
    };
    add_sum(&id, m.core_energy);

    // Cache ladder operators.
    let cre: Vec<PauliSum> = (0..nq).map(|s| creation_op(nq, s)).collect();
    let ann: Vec<PauliSum> = (0..nq).map(|s| annihilation_op(nq, s)).collect();

    for p in 0..n {
        for q in 0..n {
            let h = m.h(p, q);
            if h.abs() < 1e-12 {
                continue;
            }
            for spin in 0..2 {
                let op = cre[spin_orbital(p, spin)]
                    .mul(&ann[spin_orbital(q, spin)])
                    .unwrap();
                add_sum(&op, h);
            }
        }
    }

    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let g = m.g(p, q, r, s);
                    if g.abs() < 1e-12 {
                        continue;
                    }
                    for s1 in 0..2 {
                        for s2 in 0..2 {
                            let a = spin_orbital(p, s1);
                            let b = spin_orbital(r, s2);
                            let c = spin_orbital(s, s2);
                            let d = spin_orbital(q, s1);
                            if a == b || c == d {
                                continue; // Pauli exclusion: a^dag a^dag or a a on same mode
                            }
                            let op = cre[a]
                                .mul(&cre[b])
                                .unwrap()
                                .mul(&ann[c])
                                .unwrap()
                                .mul(&ann[d])
                                .unwrap();
                            add_sum(&op, 0.5 * g);
                        }
                    }
                }
            }
        }
    }

    let n_terms = acc.len();
    let mut sum = PauliSum::zero(nq);
    let mut terms: Vec<((u64, u64), Complex64)> = acc.into_iter().collect();
    terms.sort_by_key(|&((x, z), _)| (x, z));
    for ((x, z), c) in terms {
        sum.add_term(c, &PauliString::from_masks(nq, x, z)).unwrap();
    }
    debug_assert_eq!(sum.n_terms(), n_terms);
    sum.canonicalized()
}

/// Total-number operator `sum_i (I - Z_i)/2`.
pub fn number_operator(n_qubits: usize) -> PauliSum {
    let mut sum = PauliSum::zero(n_qubits);
    sum.add_term(
        Complex64::new(n_qubits as f64 / 2.0, 0.0),
        &PauliString::identity(n_qubits),
    )
    .unwrap();
    for q in 0..n_qubits {
        sum.add_term(
            Complex64::new(-0.5, 0.0),
            &PauliString::single(n_qubits, q, 'Z').unwrap(),
        )
        .unwrap();
    }
    sum.canonicalized()
}

/// Hartree-Fock reference determinant: the lowest-index spin-orbitals hold
/// the electrons.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReferenceState {
    pub n_spin_orbitals: usize,
    /// Bit k set means spin-orbital (qubit) k is occupied.
    pub occupation: u64,
}

pub fn hf_reference(m: &MolecularIntegrals) -> Result<ReferenceState> {
    let nq = 2 * m.n_orbitals;
    if m.n_electrons > nq {
        return Err(Error::TooManyElectrons {
            n_electrons: m.n_electrons,
            n_spin_orbitals: nq,
        });
    }
    let occupation = if m.n_electrons == 0 {
        0
    } else {
        (1u64 << m.n_electrons) - 1
    };
    Ok(ReferenceState { n_spin_orbitals: nq, occupation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn one_orbital(h11: f64) -> MolecularIntegrals {
        MolecularIntegrals {
            n_orbitals: 1,
            n_electrons: 2,
            core_energy: 0.0,
            one_body: vec![h11],
            two_body: vec![0.0],
        }
    }

    #[test]
    fn minimal_fcidump_parse() {
        let text = "&FCI NORB=1,NELEC=2,MS2=0,\n&END\n-1.0 1 1 0 0\n0.5 0 0 0 0\n";
        let m = parse_fcidump_str(text).unwrap();
        assert_eq!(m.n_orbitals, 1);
        assert_eq!(m.n_electrons, 2);
        assert_abs_diff_eq!(m.h(0, 0), -1.0);
        assert_abs_diff_eq!(m.core_energy, 0.5);
    }

    #[test]
    fn record_order_free() {
        let a = "&FCI NORB=2,NELEC=2,MS2=0,\n&END\n-1.0 1 1 0 0\n0.25 1 2 1 2\n-0.5 2 2 0 0\n";
        let b = "&FCI NORB=2,NELEC=2,MS2=0,\n&END\n-0.5 2 2 0 0\n0.25 1 2 1 2\n-1.0 1 1 0 0\n";
        let ma = parse_fcidump_str(a).unwrap();
        let mb = parse_fcidump_str(b).unwrap();
        assert_eq!(ma.one_body, mb.one_body);
        assert_eq!(ma.two_body, mb.two_body);
    }

    #[test]
    fn serialize_round_trip() {
        let text = "&FCI NORB=2,NELEC=2,MS2=0,\n&END\n0.7 1 1 1 1\n0.2 1 2 1 2\n-1.0 1 1 0 0\n-0.3 2 1 0 0\n0.9 0 0 0 0\n";
        let m = parse_fcidump_str(text).unwrap();
        let round = parse_fcidump_str(&serialize_fcidump(&m)).unwrap();
        assert_eq!(m.one_body, round.one_body);
        assert_eq!(m.two_body, round.two_body);
        assert_eq!(m.core_energy, round.core_energy);
        // Re-serializing is stable.
        assert_eq!(serialize_fcidump(&m), serialize_fcidump(&round));
    }

    #[test]
    fn number_op_mapping() {
        // a^dag a on a single mode maps to (I - Z)/2.
        let op = creation_op(1, 0).mul(&annihilation_op(1, 0)).unwrap();
        let expected = PauliSum::parse("0.5 I\n-0.5 Z").unwrap();
        assert_eq!(op, expected);
    }

    #[test]
    fn hopping_term_mapping() {
        // h12 (a0^dag a1 + a1^dag a0) -> h12 (X0X1 + Y0Y1)/2 on adjacent modes.
        let h12 = 0.37;
        let hop = creation_op(2, 0)
            .mul(&annihilation_op(2, 1))
            .unwrap()
            .add(&creation_op(2, 1).mul(&annihilation_op(2, 0)).unwrap())
            .unwrap()
            .scale(Complex64::new(h12, 0.0))
            .canonicalized();
        let expected = PauliSum::parse(&format!("{} XX\n{} YY", h12 / 2.0, h12 / 2.0)).unwrap();
        for ((ca, pa), (cb, pb)) in hop.iter().zip(expected.iter()) {
            assert_eq!(pa, pb);
            assert!((ca - cb).norm() < 1e-14);
        }
    }

    #[test]
    fn jw_hamiltonian_is_hermitian_and_number_conserving() {
        let text = "&FCI NORB=2,NELEC=2,MS2=0,\n&END\n\
            0.6744 1 1 1 1\n0.6744 2 2 2 2\n0.6634 1 1 2 2\n0.1813 1 2 1 2\n\
            -1.2524 1 1 0 0\n-0.4759 2 2 0 0\n0.7137 0 0 0 0\n";
        let m = parse_fcidump_str(text).unwrap();
        let h = jordan_wigner(&m);
        assert!(h.is_hermitian());
        let n_op = number_operator(4);
        let comm = h.commutator(&n_op).unwrap();
        assert!(
            comm.coeff_norm() < 1e-10,
            "number symmetry violated: {}",
            comm.coeff_norm()
        );
    }

    #[test]
    fn hf_reference_interleaved() {
        let m = MolecularIntegrals {
            n_orbitals: 2,
            n_electrons: 2,
            core_energy: 0.0,
            one_body: vec![0.0; 4],
            two_body: vec![0.0; 16],
        };
        let r = hf_reference(&m).unwrap();
        assert_eq!(r.occupation, 0b0011);
        let empty = MolecularIntegrals { n_electrons: 0, ..m };
        assert_eq!(hf_reference(&empty).unwrap().occupation, 0);
    }

    #[test]
    fn too_many_electrons_rejected() {
        let m = one_orbital(-1.0);
        let bad = MolecularIntegrals { n_electrons: 3, ..m };
        assert!(hf_reference(&bad).is_err());
    }
}
