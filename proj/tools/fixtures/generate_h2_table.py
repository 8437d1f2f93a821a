#!/usr/bin/env python3
"""Generate the H2/STO-3G qubit Hamiltonian table shipped in data/.

Integrals come from PySCF (RHF molecular orbitals); the fermion-to-qubit map
is a plain Jordan-Wigner transform implemented below. Each row is checked
against PySCF's FCI energy before it is written.

Conventions recorded in the output's '#' header:
  * spin-orbital j = 2*p + s (p = spatial MO index, s = 0 alpha / 1 beta)
    maps to qubit j;
  * in labels and bitstrings, qubit i is the character at position n-1-i
    (rightmost character = qubit 0), so "0011" is the Hartree-Fock state.

Usage: generate_h2_table.py [output.csv]
"""

import itertools
import sys

import numpy as np
from pyscf import ao2mo, fci, gto, scf

N_QUBITS = 4
GRID = [round(0.30 + 0.01 * i, 2) for i in range(221)]
PAULI_MUL = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}


def multiply(a, b):
    out = {}
    for wa, ca in a.items():
        for wb, cb in b.items():
            phase, letters = 1, []
            for pa, pb in zip(wa, wb):
                f, l = PAULI_MUL[(pa, pb)]
                phase *= f
                letters.append(l)
            key = tuple(letters)
            out[key] = out.get(key, 0) + phase * ca * cb
    return out


def add_into(acc, op, scale):
    for w, c in op.items():
        acc[w] = acc.get(w, 0) + scale * c


def ladder(j, dagger):
    # ops indexed by qubit number
    z = ["Z"] * j + ["I"] * (N_QUBITS - j)
    x = list(z)
    y = list(z)
    x[j] = "X"
    y[j] = "Y"
    sign = -0.5j if dagger else 0.5j
    return {tuple(x): 0.5, tuple(y): sign}


def qubit_hamiltonian(r):
    mol = gto.M(atom=f"H 0 0 0; H 0 0 {r}", basis="sto-3g", unit="Angstrom", verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-13
    mf.kernel()
    c = mf.mo_coeff.copy()
    for p in range(c.shape[1]):
        if c[np.argmax(np.abs(c[:, p])), p] < 0:
            c[:, p] *= -1
    h1 = c.T @ mf.get_hcore() @ c
    eri = ao2mo.restore(1, ao2mo.kernel(mol, c), c.shape[1])  # chemist (pq|rs)
    nso = 2 * c.shape[1]

    ham = {tuple("I" * N_QUBITS): complex(mol.energy_nuc())}
    for p, q in itertools.product(range(nso), repeat=2):
        if p % 2 == q % 2 and abs(h1[p // 2, q // 2]) > 0:
            add_into(ham, multiply(ladder(p, True), ladder(q, False)), h1[p // 2, q // 2])
    for p, q, r_, s in itertools.product(range(nso), repeat=4):
        # 1/2 sum <pq|rs> a+_p a+_q a_s a_r,  <pq|rs> = (pr|qs)
        if p % 2 != r_ % 2 or q % 2 != s % 2:
            continue
        v = eri[p // 2, r_ // 2, q // 2, s // 2]
        if abs(v) < 1e-15:
            continue
        op = multiply(multiply(ladder(p, True), ladder(q, True)),
                      multiply(ladder(s, False), ladder(r_, False)))
        add_into(ham, op, 0.5 * v)

    e_fci = fci.FCI(mf).kernel()[0]
    return ham, e_fci


def label(word):
    return "".join(reversed(word))


def dense(ham):
    mats = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]),
            "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1.0, -1.0])}
    m = np.zeros((2 ** N_QUBITS, 2 ** N_QUBITS), dtype=complex)
    for w, coef in ham.items():
        k = np.array([[1.0]])
        for letter in reversed(w):  # highest qubit is the most significant factor
            k = np.kron(k, mats[letter])
        m += coef * k
    return m


def main():
    out_path = sys.argv[1] if len(sys.argv) > 1 else "h2_sto3g.csv"
    rows = []
    words = None
    for r in GRID:
        ham, e_fci = qubit_hamiltonian(r)
        ham = {w: c for w, c in ham.items() if abs(c) > 1e-12}
        for w, c in ham.items():
            assert abs(c.imag) < 1e-12, (r, w, c)
        e0 = np.linalg.eigvalsh(dense(ham)).min()
        assert abs(e0 - e_fci) < 1e-9, (r, e0, e_fci)
        keys = sorted(ham, key=lambda w: (w != tuple("I" * N_QUBITS), label(w)))
        if words is None:
            words = keys
        assert set(keys) == set(words), r
        rows.append((r, [ham[w].real for w in words]))

    with open(out_path, "w", encoding="utf-8") as f:
        f.write("# H2 / STO-3G, RHF orbitals, Jordan-Wigner; generated by tools/fixtures/generate_h2_table.py\n")
        f.write("# qubit j = spin-orbital 2*p+s (p spatial MO, s=0 alpha, s=1 beta)\n")
        f.write("# label/bitstring character n-1-i is qubit i; Hartree-Fock occupation = 0011\n")
        f.write("# identity column includes nuclear repulsion; units: Angstrom, Hartree\n")
        f.write("R_angstrom," + ",".join(label(w) for w in words) + "\n")
        for r, coefs in rows:
            f.write(f"{r:.2f}," + ",".join(f"{c:.15f}" for c in coefs) + "\n")


if __name__ == "__main__":
    main()
