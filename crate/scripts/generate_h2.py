"""Generate the H2 STO-3G (2e, 2o) integrals and skeleton derivatives used
as the small test system.

Derivatives are central finite differences with the molecular-orbital
coefficients frozen at the reference geometry.

Usage: python3 scripts/generate_h2.py crates/core/data
"""
import sys
import numpy as np
from pyscf import gto, scf, mcscf, tools

STEP = 1e-4  # bohr
NCAS, NELECAS = 2, 2
GEOM = [("H", (0.0, 0.0, -0.7)), ("H", (0.0, 0.0, 0.7))]


def build(coords):
    return gto.M(atom=[(s, c) for s, c in coords], basis="sto-3g", unit="Bohr", verbose=0)


def integrals(mol, mo):
    mc = mcscf.CASCI(scf.RHF(mol), NCAS, NELECAS)
    h1, ecore = mc.get_h1eff(mo)
    h2 = mcscf.casci.ao2mo.restore(1, mc.get_h2eff(mo), NCAS)
    return ecore, h1, h2


def main(outdir):
    mol = build(GEOM)
    mf = scf.RHF(mol).run(conv_tol=1e-12)
    mc = mcscf.CASCI(mf, NCAS, NELECAS)
    mc.kernel()
    mo = mc.mo_coeff
    ecore, h1, h2 = integrals(mol, mo)
    tools.fcidump.from_integrals(f"{outdir}/h2_sto3g.fcidump", h1, h2, NCAS, NELECAS, nuc=ecore, ms=0, tol=1e-14)
    print("FCI energy", mc.e_tot)

    lines = ["# H2 STO-3G skeleton derivatives (frozen MO coefficients)",
             f"# central differences, step {STEP} bohr"]
    for atom in range(len(GEOM)):
        for axis, name in enumerate("xyz"):
            vals = []
            for sign in (+1, -1):
                coords = [(s, list(c)) for s, c in GEOM]
                coords[atom][1][axis] += sign * STEP
                vals.append(integrals(build(coords), mo))
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
    with open(f"{outdir}/h2_sto3g.derivs", "w") as fh:
        fh.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else ".")
