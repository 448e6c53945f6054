"""Generate the H2O (4e, 4o) cc-pVDZ active-space integrals and their
skeleton nuclear derivatives used by the benchmark fixtures.

The derivative file holds central finite differences of the active-space
integrals with the molecular-orbital coefficients frozen at the reference
geometry, so orbital-response contributions are not included.

Usage: python3 scripts/generate_h2o.py crates/core/data
"""
import sys
import numpy as np
from pyscf import gto, scf, mcscf, tools

STEP = 1e-4  # bohr
NCAS, NELECAS = 4, 4
GEOM = [("O", (0.0, 0.0, 0.2217)), ("H", (0.0, 1.4309, -0.8867)), ("H", (0.0, -1.4309, -0.8867))]


def build(coords):
    mol = gto.M(atom=[(s, c) for s, c in coords], basis="cc-pvdz", unit="Bohr", verbose=0)
    return mol


def active_integrals(mol, mo):
    mf = scf.RHF(mol)
    mc = mcscf.CASCI(mf, NCAS, NELECAS)
    h1, ecore = mc.get_h1eff(mo)
    h2 = mcscf.casci.ao2mo.restore(1, mc.get_h2eff(mo), NCAS)
    return ecore, h1, h2


def main(outdir):
    mol = build(GEOM)
    mf = scf.RHF(mol).run(conv_tol=1e-12)
    mc = mcscf.CASCI(mf, NCAS, NELECAS)
    mc.kernel()
    mo = mc.mo_coeff
    ecore, h1, h2 = active_integrals(mol, mo)
    tools.fcidump.from_integrals(f"{outdir}/h2o_cas44.fcidump", h1, h2, NCAS, NELECAS, nuc=ecore, ms=0, tol=1e-14)
    print("CASCI energy", mc.e_tot)

    lines = ["# H2O cc-pVDZ CAS(4e,4o) skeleton derivatives (frozen MO coefficients)",
             f"# central differences, step {STEP} bohr"]
    for atom in range(len(GEOM)):
        for axis, name in enumerate("xyz"):
            vals = []
            for sign in (+1, -1):
                coords = [(s, list(c)) for s, c in GEOM]
                coords[atom][1][axis] += sign * STEP
                vals.append(active_integrals(build(coords), mo))
            de = (vals[0][0] - vals[1][0]) / (2 * STEP)
            dh = (vals[0][1] - vals[1][1]) / (2 * STEP)
            dg = (vals[0][2] - vals[1][2]) / (2 * STEP)
            lines.append(f"coord {GEOM[atom][0]}{atom}{name}")
            lines.append(f"E {de:.15e}")
            for i in range(NCAS):
                for j in range(i + 1):
                    if abs(dh[i, j]) > 1e-12:
                        lines.append(f"K {i} {j} {dh[i, j]:.15e}")
            for i in range(NCAS):
                for j in range(i + 1):
                    for k in range(NCAS):
                        for l in range(k + 1):
                            if i * (i + 1) // 2 + j < k * (k + 1) // 2 + l:
                                continue
                            if abs(dg[i, j, k, l]) > 1e-12:
                                lines.append(f"G {i} {j} {k} {l} {dg[i, j, k, l]:.15e}")
    with open(f"{outdir}/h2o_cas44.derivs", "w") as fh:
        fh.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else ".")
