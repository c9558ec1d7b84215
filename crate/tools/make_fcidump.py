#!/usr/bin/env python3
"""Generate FCIDUMP files (plus JSON provenance sidecars) for the bundled
molecular test set.

Self-contained restricted Hartree-Fock over contracted Gaussian basis sets
(McMurchie-Davidson integrals), MO transformation, optional frozen core, and
a small determinant-basis FCI used to record the reference ground-state
energy in the sidecar.

Usage: python3 tools/make_fcidump.py OUTDIR
"""

import json
import math
import sys
from itertools import combinations

import numpy as np
from scipy.special import gammainc, gamma
from scipy.linalg import eigh

# ----------------------------------------------------------------------
# Basis set data (exponents, contraction coefficients), Bohr-free input:
# exponents in bohr^-2 as usual.
# ----------------------------------------------------------------------

BASIS = {
    ("H", "sto-3g"): [
        ("s", [(3.42525091, 0.15432897), (0.62391373, 0.53532814), (0.16885540, 0.44463454)]),
    ],
    ("H", "6-31g"): [
        ("s", [(18.7311370, 0.03349460), (2.8253937, 0.23472695), (0.6401217, 0.81375733)]),
        ("s", [(0.1612778, 1.0)]),
    ],
    ("H", "cc-pvdz"): [
        ("s", [(13.0100000, 0.0196850), (1.9620000, 0.1379770), (0.4446000, 0.4781480)]),
        ("s", [(0.1220000, 1.0)]),
        ("p", [(0.7270000, 1.0)]),
    ],
    ("Li", "6-31g"): [
        ("s", [(642.4189200, 0.0021426), (96.7985150, 0.0162089), (22.0911210, 0.0773156),
               (6.2010703, 0.2457860), (1.9351177, 0.4701890), (0.6367358, 0.3454708)]),
        ("s", [(2.3249184, -0.0350917), (0.6324306, -0.1912328), (0.0790534, 1.0839878)]),
        ("p", [(2.3249184, 0.0089415), (0.6324306, 0.1410095), (0.0790534, 0.9453637)]),
        ("s", [(0.0359620, 1.0)]),
        ("p", [(0.0359620, 1.0)]),
    ],
    ("O", "6-31g"): [
        ("s", [(5484.6717000, 0.0018311), (825.2349500, 0.0139501), (188.0469600, 0.0684451),
               (52.9645000, 0.2327143), (16.8975700, 0.4701930), (5.7996353, 0.3585209)]),
        ("s", [(15.5396160, -0.1107775), (3.5999336, -0.1480263), (1.0137618, 1.1307670)]),
        ("p", [(15.5396160, 0.0708743), (3.5999336, 0.3397528), (1.0137618, 0.7271586)]),
        ("s", [(0.2700058, 1.0)]),
        ("p", [(0.2700058, 1.0)]),
    ],
}

Z_OF = {"H": 1, "Li": 3, "O": 8}

ANGSTROM = 1.0 / 0.529177210903

CART = {"s": [(0, 0, 0)], "p": [(1, 0, 0), (0, 1, 0), (0, 0, 1)]}


class Primitive:
    __slots__ = ("alpha", "coef", "lmn", "center", "norm")

    def __init__(self, alpha, coef, lmn, center):
        self.alpha = alpha
        self.coef = coef
        self.lmn = lmn
        self.center = np.asarray(center, dtype=float)
        l, m, n = lmn
        self.norm = (
            (2 * alpha / math.pi) ** 0.75
            * (4 * alpha) ** ((l + m + n) / 2.0)
            / math.sqrt(dfact(2 * l - 1) * dfact(2 * m - 1) * dfact(2 * n - 1))
        )


def dfact(n):
    return 1 if n <= 1 else n * dfact(n - 2)


def build_basis(atoms, basis_name):
    """atoms: list of (symbol, xyz in bohr). Returns list of contracted functions,
    each a list of Primitives."""
    funcs = []
    for sym, xyz in atoms:
        for shell, prims in BASIS[(sym, basis_name)]:
            for lmn in CART[shell]:
                funcs.append([Primitive(a, c, lmn, xyz) for a, c in prims])
    return funcs


# -------------------- McMurchie-Davidson machinery --------------------

def hermite_e(i, j, t, qx, a, b):
    p = a + b
    q = a * b / p
    if t < 0 or t > i + j:
        return 0.0
    if i == j == t == 0:
        return math.exp(-q * qx * qx)
    if j == 0:
        return (
            hermite_e(i - 1, j, t - 1, qx, a, b) / (2 * p)
            - q * qx / a * hermite_e(i - 1, j, t, qx, a, b)
            + (t + 1) * hermite_e(i - 1, j, t + 1, qx, a, b)
        )
    return (
        hermite_e(i, j - 1, t - 1, qx, a, b) / (2 * p)
        + q * qx / b * hermite_e(i, j - 1, t, qx, a, b)
        + (t + 1) * hermite_e(i, j - 1, t + 1, qx, a, b)
    )


def overlap_prim(a, lmn1, A, b, lmn2, B):
    s = 1.0
    for d in range(3):
        s *= hermite_e(lmn1[d], lmn2[d], 0, A[d] - B[d], a, b)
    return s * (math.pi / (a + b)) ** 1.5


def kinetic_prim(a, lmn1, A, b, lmn2, B):
    l2, m2, n2 = lmn2
    term0 = b * (2 * (l2 + m2 + n2) + 3) * overlap_prim(a, lmn1, A, b, lmn2, B)
    term1 = -2 * b * b * (
        overlap_prim(a, lmn1, A, b, (l2 + 2, m2, n2), B)
        + overlap_prim(a, lmn1, A, b, (l2, m2 + 2, n2), B)
        + overlap_prim(a, lmn1, A, b, (l2, m2, n2 + 2), B)
    )
    term2 = -0.5 * (
        l2 * (l2 - 1) * overlap_prim(a, lmn1, A, b, (l2 - 2, m2, n2), B)
        + m2 * (m2 - 1) * overlap_prim(a, lmn1, A, b, (l2, m2 - 2, n2), B)
        + n2 * (n2 - 1) * overlap_prim(a, lmn1, A, b, (l2, m2, n2 - 2), B)
    )
    return term0 + term1 + term2


def boys(n, x):
    if x < 1e-12:
        return 1.0 / (2 * n + 1)
    return 0.5 * x ** (-(n + 0.5)) * gamma(n + 0.5) * gammainc(n + 0.5, x)


def hermite_r(t, u, v, n, p, PC):
    if t == u == v == 0:
        return (-2 * p) ** n * boys(n, p * (PC @ PC))
    if t > 0:
        val = hermite_r(t - 1, u, v, n + 1, p, PC) * PC[0]
        if t > 1:
            val += (t - 1) * hermite_r(t - 2, u, v, n + 1, p, PC)
        return val
    if u > 0:
        val = hermite_r(t, u - 1, v, n + 1, p, PC) * PC[1]
        if u > 1:
            val += (u - 1) * hermite_r(t, u - 2, v, n + 1, p, PC)
        return val
    val = hermite_r(t, u, v - 1, n + 1, p, PC) * PC[2]
    if v > 1:
        val += (v - 1) * hermite_r(t, u, v - 2, n + 1, p, PC)
    return val


def nuclear_prim(a, lmn1, A, b, lmn2, B, C):
    l1, m1, n1 = lmn1
    l2, m2, n2 = lmn2
    p = a + b
    P = (a * A + b * B) / p
    val = 0.0
    for t in range(l1 + l2 + 1):
        et = hermite_e(l1, l2, t, A[0] - B[0], a, b)
        if et == 0.0:
            continue
        for u in range(m1 + m2 + 1):
            eu = hermite_e(m1, m2, u, A[1] - B[1], a, b)
            if eu == 0.0:
                continue
            for v in range(n1 + n2 + 1):
                ev = hermite_e(n1, n2, v, A[2] - B[2], a, b)
                if ev == 0.0:
                    continue
                val += et * eu * ev * hermite_r(t, u, v, 0, p, P - C)
    return val * 2 * math.pi / p


def eri_prim(a, lmn1, A, b, lmn2, B, c, lmn3, C, d, lmn4, D):
    l1, m1, n1 = lmn1
    l2, m2, n2 = lmn2
    l3, m3, n3 = lmn3
    l4, m4, n4 = lmn4
    p = a + b
    q = c + d
    alpha = p * q / (p + q)
    P = (a * A + b * B) / p
    Q = (c * C + d * D) / q
    val = 0.0
    for t in range(l1 + l2 + 1):
        e1 = hermite_e(l1, l2, t, A[0] - B[0], a, b)
        if e1 == 0.0:
            continue
        for u in range(m1 + m2 + 1):
            e2 = hermite_e(m1, m2, u, A[1] - B[1], a, b)
            if e2 == 0.0:
                continue
            for v in range(n1 + n2 + 1):
                e3 = hermite_e(n1, n2, v, A[2] - B[2], a, b)
                if e3 == 0.0:
                    continue
                for tau in range(l3 + l4 + 1):
                    e4 = hermite_e(l3, l4, tau, C[0] - D[0], c, d)
                    if e4 == 0.0:
                        continue
                    for nu in range(m3 + m4 + 1):
                        e5 = hermite_e(m3, m4, nu, C[1] - D[1], c, d)
                        if e5 == 0.0:
                            continue
                        for phi in range(n3 + n4 + 1):
                            e6 = hermite_e(n3, n4, phi, C[2] - D[2], c, d)
                            if e6 == 0.0:
                                continue
                            val += (
                                e1 * e2 * e3 * e4 * e5 * e6
                                * (-1) ** (tau + nu + phi)
                                * hermite_r(t + tau, u + nu, v + phi, 0, alpha, P - Q)
                            )
    return val * 2 * math.pi ** 2.5 / (p * q * math.sqrt(p + q))


def contracted(fn, f1, f2, *rest):
    val = 0.0
    for p1 in f1:
        for p2 in f2:
            if not rest:
                val += p1.coef * p2.coef * p1.norm * p2.norm * fn(
                    p1.alpha, p1.lmn, p1.center, p2.alpha, p2.lmn, p2.center
                )
            else:
                f3, f4 = rest
                for p3 in f3:
                    for p4 in f4:
                        val += (
                            p1.coef * p2.coef * p3.coef * p4.coef
                            * p1.norm * p2.norm * p3.norm * p4.norm
                            * fn(
                                p1.alpha, p1.lmn, p1.center,
                                p2.alpha, p2.lmn, p2.center,
                                p3.alpha, p3.lmn, p3.center,
                                p4.alpha, p4.lmn, p4.center,
                            )
                        )
    return val


def integrals(atoms, basis_name):
    funcs = build_basis(atoms, basis_name)
    n = len(funcs)
    S = np.zeros((n, n))
    T = np.zeros((n, n))
    V = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            S[i, j] = S[j, i] = contracted(overlap_prim, funcs[i], funcs[j])
            T[i, j] = T[j, i] = contracted(kinetic_prim, funcs[i], funcs[j])
            v = 0.0
            for sym, xyz in atoms:
                v -= Z_OF[sym] * contracted(
                    lambda a, l1, A, b, l2, B: nuclear_prim(a, l1, A, b, l2, B, np.asarray(xyz)),
                    funcs[i], funcs[j],
                )
            V[i, j] = V[j, i] = v
    eri = np.zeros((n, n, n, n))
    pair = [(i, j) for i in range(n) for j in range(i + 1)]
    for a_, (i, j) in enumerate(pair):
        for b_, (k, l) in enumerate(pair):
            if b_ > a_:
                continue
            val = contracted(eri_prim, funcs[i], funcs[j], funcs[k], funcs[l])
            for (p, q) in [(i, j), (j, i)]:
                for (r, s) in [(k, l), (l, k)]:
                    eri[p, q, r, s] = val
                    eri[r, s, p, q] = val
    return S, T, V, eri


def nuclear_repulsion(atoms):
    e = 0.0
    for i in range(len(atoms)):
        for j in range(i):
            zi, zj = Z_OF[atoms[i][0]], Z_OF[atoms[j][0]]
            r = np.linalg.norm(np.asarray(atoms[i][1]) - np.asarray(atoms[j][1]))
            e += zi * zj / r
    return e


def rhf(atoms, basis_name, n_elec, max_iter=200, tol=1e-11):
    S, T, V, eri = integrals(atoms, basis_name)
    hcore = T + V
    n = S.shape[0]
    nocc = n_elec // 2
    e_nuc = nuclear_repulsion(atoms)

    s_eval, s_evec = np.linalg.eigh(S)
    X = s_evec @ np.diag(s_eval ** -0.5) @ s_evec.T

    D = np.zeros((n, n))
    e_old = 0.0
    fock_list, err_list = [], []
    for it in range(max_iter):
        J = np.einsum("pqrs,rs->pq", eri, D)
        K = np.einsum("prqs,rs->pq", eri, D)
        F = hcore + 2 * J - K
        # DIIS
        err = F @ D @ S - S @ D @ F
        fock_list.append(F)
        err_list.append(err)
        if len(fock_list) > 8:
            fock_list.pop(0)
            err_list.pop(0)
        if len(fock_list) > 1:
            m = len(fock_list)
            B = -np.ones((m + 1, m + 1))
            B[m, m] = 0.0
            for i in range(m):
                for j in range(m):
                    B[i, j] = np.sum(err_list[i] * err_list[j])
            rhs = np.zeros(m + 1)
            rhs[m] = -1.0
            try:
                c = np.linalg.solve(B, rhs)[:m]
                F = sum(ci * fi for ci, fi in zip(c, fock_list))
            except np.linalg.LinAlgError:
                pass
        Fp = X.T @ F @ X
        eps, Cp = np.linalg.eigh(Fp)
        C = X @ Cp
        D = C[:, :nocc] @ C[:, :nocc].T
        e_el = np.sum(D * (hcore + F)) if False else np.einsum("pq,pq->", D, 2 * hcore + 2 * J - K)
        e_tot = e_el + e_nuc
        if abs(e_tot - e_old) < tol and it > 3:
            break
        e_old = e_tot
    # MO transforms
    h_mo = C.T @ hcore @ C
    eri_mo = np.einsum("pqrs,pi,qj,rk,sl->ijkl", eri, C, C, C, C, optimize=True)
    return e_tot, e_nuc, h_mo, eri_mo, C


def freeze_core(e_nuc, h_mo, eri_mo, n_frozen):
    """Return (core_energy, h_eff, eri_act) over the active orbitals."""
    n = h_mo.shape[0]
    act = list(range(n_frozen, n))
    e_core = e_nuc
    for c in range(n_frozen):
        e_core += 2 * h_mo[c, c]
        for d in range(n_frozen):
            e_core += 2 * eri_mo[c, c, d, d] - eri_mo[c, d, d, c]
    h_eff = np.zeros((len(act), len(act)))
    for i, p in enumerate(act):
        for j, q in enumerate(act):
            v = h_mo[p, q]
            for c in range(n_frozen):
                v += 2 * eri_mo[p, q, c, c] - eri_mo[p, c, c, q]
            h_eff[i, j] = v
    eri_act = eri_mo[np.ix_(act, act, act, act)]
    return e_core, h_eff, eri_act


# -------------------- determinant FCI (reference energy) --------------------

def fci_ground(h, eri, n_orb, n_alpha, n_beta):
    """Dense determinant-basis FCI; chemists' notation eri (pq|rs)."""
    occs_a = list(combinations(range(n_orb), n_alpha))
    occs_b = list(combinations(range(n_orb), n_beta))
    dets = [(a, b) for a in occs_a for b in occs_b]
    idx = {d: i for i, d in enumerate(dets)}
    dim = len(dets)

    def mask(occ):
        m = 0
        for o in occ:
            m |= 1 << o
        return m

    def sign(m, p, q):
        # sign for moving p->q (p occupied) counting occupied between
        lo, hi = (p, q) if p < q else (q, p)
        between = m & (((1 << hi) - 1) ^ ((1 << (lo + 1)) - 1))
        return -1.0 if bin(between).count("1") % 2 else 1.0

    H = np.zeros((dim, dim))
    for I, (oa, ob) in enumerate(dets):
        ma, mb = mask(oa), mask(ob)
        # diagonal
        e = sum(h[p, p] for p in oa) + sum(h[p, p] for p in ob)
        for p in oa:
            for q in oa:
                e += 0.5 * (eri[p, p, q, q] - eri[p, q, q, p])
            for q in ob:
                e += eri[p, p, q, q]
        for p in ob:
            for q in ob:
                e += 0.5 * (eri[p, p, q, q] - eri[p, q, q, p])
        H[I, I] = e
        # single excitations, alpha
        for spin, (occ, msk) in enumerate([(oa, ma), (ob, mb)]):
            other = ob if spin == 0 else oa
            for p in occ:
                for q in range(n_orb):
                    if msk >> q & 1:
                        continue
                    nocc = tuple(sorted(set(occ) - {p} | {q}))
                    nd = (nocc, ob) if spin == 0 else (oa, nocc)
                    J = idx[nd]
                    if J < I:
                        continue
                    v = h[p, q]
                    for r in occ:
                        if r != p:
                            v += eri[p, q, r, r] - eri[p, r, r, q]
                    for r in other:
                        v += eri[p, q, r, r]
                    v *= sign(msk, p, q)
                    H[I, J] += v
                    if J != I:
                        H[J, I] += v
        # double alpha-beta
        for p in oa:
            for q in range(n_orb):
                if ma >> q & 1:
                    continue
                for r in ob:
                    for s in range(n_orb):
                        if mb >> s & 1:
                            continue
                        na = tuple(sorted(set(oa) - {p} | {q}))
                        nb = tuple(sorted(set(ob) - {r} | {s}))
                        J = idx[(na, nb)]
                        if J < I:
                            continue
                        v = eri[p, q, r, s] * sign(ma, p, q) * sign(mb, r, s)
                        H[I, J] += v
                        if J != I:
                            H[J, I] += v
        # double same-spin
        for spin, (occ, msk) in enumerate([(oa, ma), (ob, mb)]):
            for p, r in combinations(occ, 2):
                virt = [q for q in range(n_orb) if not (msk >> q & 1)]
                for qi in range(len(virt)):
                    for si in range(qi + 1, len(virt)):
                        q, s = virt[qi], virt[si]
                        nocc = tuple(sorted(set(occ) - {p, r} | {q, s}))
                        nd = (nocc, ob) if spin == 0 else (oa, nocc)
                        J = idx[nd]
                        if J < I:
                            continue
                        m1 = msk
                        s1 = sign(m1, p, q)
                        m2 = (m1 & ~(1 << p)) | (1 << q)
                        s2 = sign(m2, r, s)
                        v1 = eri[p, q, r, s]
                        s1b = sign(m1, p, s)
                        m2b = (m1 & ~(1 << p)) | (1 << s)
                        s2b = sign(m2b, r, q)
                        v2 = eri[p, s, r, q]
                        v = s1 * s2 * v1 - s1b * s2b * v2
                        H[I, J] += v
                        if J != I:
                            H[J, I] += v
    w = eigh(H, eigvals_only=True, subset_by_index=[0, 0])
    return w[0], dim


# -------------------- FCIDUMP output --------------------

def write_fcidump(path, core, h, eri, n_elec, ms2=0, tol=1e-12):
    n = h.shape[0]
    with open(path, "w") as f:
        f.write(f"&FCI NORB={n},NELEC={n_elec},MS2={ms2},\n")
        f.write("  ORBSYM=" + "1," * n + "\n")
        f.write("  ISYM=1,\n")
        f.write("&END\n")
        for p in range(n):
            for q in range(p + 1):
                for r in range(p + 1):
                    smax = q if r == p else r
                    for s in range(smax + 1):
                        v = eri[p, q, r, s]
                        if abs(v) > tol:
                            f.write(f"{v:23.16E} {p+1:4d} {q+1:4d} {r+1:4d} {s+1:4d}\n")
        for p in range(n):
            for q in range(p + 1):
                if abs(h[p, q]) > tol:
                    f.write(f"{h[p,q]:23.16E} {p+1:4d} {q+1:4d}    0    0\n")
        f.write(f"{core:23.16E}    0    0    0    0\n")


def make(outdir, name, atoms, basis_name, n_elec, n_frozen, do_fci=True):
    e_hf, e_nuc, h_mo, eri_mo, _ = rhf(atoms, basis_name, n_elec)
    core, h_eff, eri_act = freeze_core(e_nuc, h_mo, eri_mo, n_frozen)
    n_act = h_eff.shape[0]
    n_act_elec = n_elec - 2 * n_frozen
    path = f"{outdir}/{name}.fcidump"
    write_fcidump(path, core, h_eff, eri_act, n_act_elec)
    meta = {
        "molecule": name,
        "basis": basis_name,
        "geometry_bohr": [[s, list(x)] for s, x in atoms],
        "n_frozen_spatial": n_frozen,
        "hf_energy": e_hf,
    }
    if do_fci:
        na = n_act_elec // 2 + n_act_elec % 2
        nb = n_act_elec // 2
        e_fci, dim = fci_ground(h_eff, eri_act, n_act, na, nb)
        meta["fci_energy"] = e_fci + core
        meta["fci_dim"] = dim
    with open(f"{outdir}/{name}.json", "w") as f:
        json.dump(meta, f, indent=1)
    print(name, "HF", e_hf, "FCI", meta.get("fci_energy"))
    return meta


def main():
    outdir = sys.argv[1] if len(sys.argv) > 1 else "data"
    # Bond lengths in angstrom, converted to bohr below.
    r_h2_sto = 0.7414 * ANGSTROM
    make(outdir, "h2_sto3g", [("H", (0, 0, 0)), ("H", (0, 0, r_h2_sto))], "sto-3g", 2, 0)

    r_h2 = float(sys.argv[2]) if len(sys.argv) > 2 else 0.7247558
    make(outdir, "h2_ccpvdz", [("H", (0, 0, 0)), ("H", (0, 0, r_h2 * ANGSTROM))], "cc-pvdz", 2, 0)

    r_lih = float(sys.argv[3]) if len(sys.argv) > 3 else 1.5957
    make(outdir, "lih_631g", [("Li", (0, 0, 0)), ("H", (0, 0, r_lih * ANGSTROM))], "6-31g", 4, 1)

    # Water: experimental geometry, frozen 1s core, FCI dim ~245k (skipped).
    r_oh = 0.9572 * ANGSTROM
    ang = math.radians(104.52)
    h1 = (r_oh * math.sin(ang / 2), 0.0, r_oh * math.cos(ang / 2))
    h2 = (-r_oh * math.sin(ang / 2), 0.0, r_oh * math.cos(ang / 2))
    make(outdir, "h2o_631g", [("O", (0, 0, 0)), ("H", h1), ("H", h2)], "6-31g", 10, 1, do_fci=False)


if __name__ == "__main__":
    main()
