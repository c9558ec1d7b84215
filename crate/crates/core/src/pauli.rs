//! Pauli-string algebra: the shared symbolic layer under every backend.
//!
//! A Pauli string is stored as a pair of bitmasks (x-mask, z-mask) with qubit
//! `k` at bit `k`; qubit 0 is the least-significant bit of basis-state indices
//! everywhere in this crate. The symbol on qubit `k` is `I/X/Z/Y` for
//! (x,z) = (0,0)/(1,0)/(0,1)/(1,1), and a string carries an overall phase in
//! {1, i, -1, -i} so that products close over the type.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients below this magnitude are dropped during canonicalization.
pub const CANCELLATION_TOL: f64 = 1e-12;

pub const MAX_QUBITS: usize = 64;

/// A single Pauli string `i^phase * P(x, z)` where `P` is the tensor product
/// of the Hermitian symbols I, X, Y, Z selected by the two masks.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
    /// Power of i in 0..4.
    phase: u8,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits <= MAX_QUBITS);
        PauliString { n_qubits, x: 0, z: 0, phase: 0 }
    }

    /// Build from masks with phase +1.
    pub fn from_masks(n_qubits: usize, x: u64, z: u64) -> Self {
        assert!(n_qubits <= MAX_QUBITS);
        let keep = mask_width(n_qubits);
        PauliString { n_qubits, x: x & keep, z: z & keep, phase: 0 }
    }

    /// Parse a label like "XIZY" with qubit 0 leftmost.
    pub fn from_label(label: &str) -> Result<Self> {
        let n = label.len();
        if n > MAX_QUBITS {
            return Err(Error::SizeLimit(n, MAX_QUBITS));
        }
        let (mut x, mut z) = (0u64, 0u64);
        for (q, c) in label.chars().enumerate() {
            match c {
                'I' => {}
                'X' => x |= 1 << q,
                'Z' => z |= 1 << q,
                'Y' => {
                    x |= 1 << q;
                    z |= 1 << q;
                }
                other => return Err(Error::Parse(format!("bad Pauli symbol '{other}'"))),
            }
        }
        Ok(PauliString { n_qubits: n, x, z, phase: 0 })
    }

    /// Single-symbol string on one qubit of a wider register.
    pub fn single(n_qubits: usize, qubit: usize, symbol: char) -> Result<Self> {
        if qubit >= n_qubits {
            return Err(Error::QubitOutOfRange { index: qubit, n_qubits });
        }
        let (mut x, mut z) = (0u64, 0u64);
        match symbol {
            'I' => {}
            'X' => x = 1 << qubit,
            'Z' => z = 1 << qubit,
            'Y' => {
                x = 1 << qubit;
                z = 1 << qubit;
            }
            other => return Err(Error::Parse(format!("bad Pauli symbol '{other}'"))),
        }
        Ok(PauliString { n_qubits, x, z, phase: 0 })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Phase as a complex number (one of 1, i, -1, -i).
    pub fn phase(&self) -> Complex64 {
        I_POWERS[(self.phase & 3) as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Product `self * rhs` with the accumulated phase.
    pub fn mul(&self, rhs: &PauliString) -> Result<PauliString> {
        if self.n_qubits != rhs.n_qubits {
            return Err(Error::WidthMismatch(self.n_qubits, rhs.n_qubits));
        }
        let x = self.x ^ rhs.x;
        let z = self.z ^ rhs.z;
        // Symbol strings are i^{|x&z|} X^x Z^z; multiplying the X^x Z^z parts
        // commutes Z^{z1} past X^{x2} at cost (-1)^{|z1 & x2|}.
        let mut k = self.phase as u32 + rhs.phase as u32;
        k += (self.x & self.z).count_ones() + (rhs.x & rhs.z).count_ones();
        k += 2 * (self.z & rhs.x).count_ones();
        // Convert X^x Z^z back to the symbol string: divide by i^{|x&z|}.
        k += 4 - (x & z).count_ones() % 4;
        Ok(PauliString { n_qubits: self.n_qubits, x, z, phase: (k % 4) as u8 })
    }

    pub fn commutes_with(&self, rhs: &PauliString) -> bool {
        ((self.x & rhs.z).count_ones() + (self.z & rhs.x).count_ones()) % 2 == 0
    }

    /// Action on a computational basis state: `P |b> = factor |b ^ x>`.
    pub fn apply_to_basis(&self, b: u64) -> (u64, Complex64) {
        let mut k = self.phase as u32 + (self.x & self.z).count_ones();
        k += 2 * (self.z & b).count_ones();
        (b ^ self.x, I_POWERS[(k % 4) as usize])
    }

    /// Strip the phase, returning the phase-free string and the phase factor.
    pub fn split_phase(&self) -> (PauliString, Complex64) {
        (
            PauliString { phase: 0, ..*self },
            I_POWERS[(self.phase & 3) as usize],
        )
    }

    /// Label with qubit 0 leftmost (no phase prefix).
    pub fn label(&self) -> String {
        (0..self.n_qubits)
            .map(|q| match ((self.x >> q) & 1, (self.z >> q) & 1) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (0, 1) => 'Z',
                _ => 'Y',
            })
            .collect()
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["", "i*", "-", "-i*"][(self.phase & 3) as usize];
        write!(f, "{}{}", prefix, self.label())
    }
}

const I_POWERS: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

fn mask_width(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Weighted sum of phase-free Pauli strings. Hamiltonians, cost operators and
/// ADAPT generators all live here.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    /// (coefficient, x-mask, z-mask); strings are phase-free, phases are
    /// absorbed into coefficients. Kept sorted by (x, z) when canonical.
    terms: Vec<(Complex64, u64, u64)>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        assert!(n_qubits <= MAX_QUBITS);
        PauliSum { n_qubits, terms: Vec::new() }
    }

    pub fn from_terms(n_qubits: usize, terms: Vec<(Complex64, PauliString)>) -> Result<Self> {
        let mut sum = PauliSum::zero(n_qubits);
        for (c, p) in terms {
            sum.add_term(c, &p)?;
        }
        Ok(sum.canonicalized())
    }

    /// Parse "coeff label" lines; coefficient is a real or `re,im` pair.
    pub fn parse(text: &str) -> Result<Self> {
        let mut terms: Vec<(Complex64, PauliString)> = Vec::new();
        let mut n_qubits = 0;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (coeff_str, label) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| Error::Parse(format!("bad term line: {line}")))?;
            let coeff = if let Some((re, im)) = coeff_str.split_once(',') {
                Complex64::new(
                    re.parse().map_err(|_| Error::Parse(format!("bad coefficient {re}")))?,
                    im.parse().map_err(|_| Error::Parse(format!("bad coefficient {im}")))?,
                )
            } else {
                Complex64::new(
                    coeff_str
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad coefficient {coeff_str}")))?,
                    0.0,
                )
            };
            let p = PauliString::from_label(label.trim())?;
            n_qubits = n_qubits.max(p.n_qubits());
            terms.push((coeff, p));
        }
        // Pad narrower strings (all labels should have equal length anyway).
        let terms = terms
            .into_iter()
            .map(|(c, p)| (c, PauliString::from_masks(n_qubits, p.x_mask(), p.z_mask())))
            .collect();
        PauliSum::from_terms(n_qubits, terms)
    }

    /// One term per line, `coefficient<space>label`, 17 significant digits.
    pub fn serialize(&self) -> String {
        let canon = self.clone().canonicalized();
        let mut out = String::new();
        for &(c, x, z) in &canon.terms {
            let p = PauliString::from_masks(self.n_qubits, x, z);
            if c.im == 0.0 {
                out.push_str(&format!("{:.16e} {}\n", c.re, p.label()));
            } else {
                out.push_str(&format!("{:.16e},{:.16e} {}\n", c.re, c.im, p.label()));
            }
        }
        out
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Complex64, PauliString)> + '_ {
        let n = self.n_qubits;
        self.terms
            .iter()
            .map(move |&(c, x, z)| (c, PauliString::from_masks(n, x, z)))
    }

    pub fn add_term(&mut self, coeff: Complex64, p: &PauliString) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::WidthMismatch(self.n_qubits, p.n_qubits()));
        }
        let (bare, phase) = p.split_phase();
        self.terms.push((coeff * phase, bare.x, bare.z));
        Ok(())
    }

    pub fn add(&self, rhs: &PauliSum) -> Result<PauliSum> {
        if self.n_qubits != rhs.n_qubits {
            return Err(Error::WidthMismatch(self.n_qubits, rhs.n_qubits));
        }
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&rhs.terms);
        Ok(PauliSum { n_qubits: self.n_qubits, terms }.canonicalized())
    }

    pub fn scale(&self, factor: Complex64) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|&(c, x, z)| (c * factor, x, z)).collect(),
        }
    }

    /// Operator product, canonicalized.
    pub fn mul(&self, rhs: &PauliSum) -> Result<PauliSum> {
        if self.n_qubits != rhs.n_qubits {
            return Err(Error::WidthMismatch(self.n_qubits, rhs.n_qubits));
        }
        let mut acc: HashMap<(u64, u64), Complex64> = HashMap::new();
        for &(ca, xa, za) in &self.terms {
            let a = PauliString::from_masks(self.n_qubits, xa, za);
            for &(cb, xb, zb) in &rhs.terms {
                let b = PauliString::from_masks(self.n_qubits, xb, zb);
                let prod = a.mul(&b).expect("widths already checked");
                let (bare, phase) = prod.split_phase();
                *acc.entry((bare.x, bare.z)).or_insert(Complex64::new(0.0, 0.0)) +=
                    ca * cb * phase;
            }
        }
        let terms = acc.into_iter().map(|((x, z), c)| (c, x, z)).collect();
        Ok(PauliSum { n_qubits: self.n_qubits, terms }.canonicalized())
    }

    /// `[self, rhs] = self*rhs - rhs*self` with cancelled terms removed.
    pub fn commutator(&self, rhs: &PauliSum) -> Result<PauliSum> {
        let ab = self.mul(rhs)?;
        let ba = rhs.mul(self)?;
        ab.add(&ba.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Sort by (x, z), merge duplicates, drop coefficients below the
    /// cancellation tolerance. Idempotent.
    pub fn canonicalized(mut self) -> PauliSum {
        self.terms.sort_by_key(|&(_, x, z)| (x, z));
        let mut merged: Vec<(Complex64, u64, u64)> = Vec::with_capacity(self.terms.len());
        for (c, x, z) in self.terms {
            match merged.last_mut() {
                Some(last) if last.1 == x && last.2 == z => last.0 += c,
                _ => merged.push((c, x, z)),
            }
        }
        merged.retain(|&(c, _, _)| c.norm() >= CANCELLATION_TOL);
        PauliSum { n_qubits: self.n_qubits, terms: merged }
    }

    /// Max |Im(coefficient)| after canonicalization; 0 for Hermitian sums.
    pub fn hermiticity_defect(&self) -> f64 {
        self.clone()
            .canonicalized()
            .terms
            .iter()
            .map(|(c, _, _)| c.im.abs())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() < CANCELLATION_TOL
    }

    /// Sum of |coefficients| — an upper bound on the operator norm.
    pub fn coeff_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _, _)| c.norm()).sum()
    }

    /// Raw term view used by the backends: (coefficient, x-mask, z-mask).
    pub(crate) fn raw_terms(&self) -> &[(Complex64, u64, u64)] {
        &self.terms
    }
}

/// Diagonal spin model: `constant + sum_i linear_i Z_i + sum_{i<j} quad_ij Z_i Z_j`.
#[derive(Clone, Debug)]
pub struct IsingModel {
    pub n_spins: usize,
    pub constant: f64,
    pub linear: Vec<f64>,
    /// Upper-triangular, indexed `[i][j]` with `i < j`; diagonal unused (zero).
    pub quadratic: Vec<Vec<f64>>,
}

impl IsingModel {
    /// Energy of a spin assignment given as a bitstring; bit set means z = -1
    /// (matching the x = (1-z)/2 QUBO convention and the Z eigenvalues of
    /// computational basis states).
    pub fn energy(&self, bits: u64) -> f64 {
        let zval = |i: usize| if bits >> i & 1 == 1 { -1.0 } else { 1.0 };
        let mut e = self.constant;
        for i in 0..self.n_spins {
            e += self.linear[i] * zval(i);
            for j in (i + 1)..self.n_spins {
                e += self.quadratic[i][j] * zval(i) * zval(j);
            }
        }
        e
    }

    pub fn to_pauli_sum(&self) -> PauliSum {
        let n = self.n_spins;
        let mut sum = PauliSum::zero(n);
        let id = PauliString::identity(n);
        sum.add_term(Complex64::new(self.constant, 0.0), &id).unwrap();
        for i in 0..n {
            if self.linear[i] != 0.0 {
                let p = PauliString::single(n, i, 'Z').unwrap();
                sum.add_term(Complex64::new(self.linear[i], 0.0), &p).unwrap();
            }
            for j in (i + 1)..n {
                if self.quadratic[i][j] != 0.0 {
                    let p = PauliString::from_masks(n, 0, (1 << i) | (1 << j));
                    sum.add_term(Complex64::new(self.quadratic[i][j], 0.0), &p)
                        .unwrap();
                }
            }
        }
        sum.canonicalized()
    }
}
