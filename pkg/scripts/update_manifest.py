"""Rebuild refdata/manifest.json from the files on disk.

Checksums are recomputed; descriptions come from the directory layout and
file contents; expected values mirror the refs frozen inside each file at
the suite's anchoring tolerance. The criteria block collects the numeric
targets the acceptance tests read instead of hard-coding them.
"""

import glob
import json
import os
import re

from crystalvqe import integrals, refdata

ROOT = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                    "refdata")

SYSTEM_NOTES = {
    "free_fermion": "synthetic two-band free fermions (closed-form refs)",
    "toy_gamma": "one-orbital Gamma-only interacting toy (closed-form refs)",
    "hchain_nk3": "equally spaced hydrogen chain, H2 unit cell, 3 k points",
    "hchain_nk4": "equally spaced hydrogen chain, H2 unit cell, 4 k points",
    "dimer_nk2": "dimerized hydrogen chain, H2 unit cell, 2 k points",
}

REF_TOL = 1.0e-8

CRITERIA = {
    "hf_anchor": {"tol": 1.0e-8},
    "encoding_oracle": {"n_cases": 100, "max_modes": 4, "tol": 1.0e-10},
    "vqe_chain_12q": {
        "group": "hchain_nk3",
        "variant": "buccsd-real",
        "r_near_equilibrium": 2.0,
        "tol_near_equilibrium": 1.6e-3,
        "tol_full_range": 1.0e-2,
    },
    "ucc_variants_16q": {
        "group": "hchain_nk4",
        "stretched_r": 4.5,
        "iuccd_stretched_kcal": 4.8,
        "buccd_stretched_kcal": 10.3,
        "stretched_rel_band": 0.30,
        "equilibrium_r": 2.0,
        "iuccd_equilibrium_kcal": 2.78,
        "buccd_equilibrium_kcal": 3.28,
        "equilibrium_factor": 1.3,
        "kcal_per_hartree": 627.5094740631,
    },
    "qse_dimer_bands": {
        "group": "dimer_nk2",
        "tol_band": 3.0e-4,
        "tol_gap_vs_ed": 3.0e-4,
        "gap_hartree": 1.5047,
        "tol_gap_value": 2.0e-2,
    },
    "rayleigh_ritz": {"tol": 1.0e-9},
    "crystal_momentum": {
        "tol_kl_over_pi": 1.0e-6,
        "tol_translation_defect": 1.0e-8,
        "uniform_groups": ["hchain_nk3", "hchain_nk4"],
    },
    "gradient_fd": {"step": 1.0e-5, "rtol": 1.0e-6, "n_points": 50},
    "symmetry_conservation": {"tol": 1.0e-10},
}


def entry_for(path: str) -> dict:
    rel = os.path.relpath(path, ROOT)
    system = rel.split(os.sep)[0]
    stem = os.path.basename(rel).removesuffix(".kint.json")
    ints = integrals.load(path)
    entry = {
        "sha256": refdata.sha256_of(path),
        "system": SYSTEM_NOTES.get(system, system),
        "geometry": stem,
        "mesh": f"n_k={ints.mesh.n_k} shift={ints.mesh.shift} "
                f"L={ints.mesh.length}",
        "n_qubits": ints.n_qubits,
        "expected": {name: {"value": value, "tol": REF_TOL}
                     for name, value in sorted(ints.refs.items())},
    }
    match = re.search(r"_r([0-9]+(?:\.[0-9]+)?)$", stem)
    if match:
        entry["r_bohr"] = float(match.group(1))
    return entry


def main() -> None:
    files = sorted(glob.glob(os.path.join(ROOT, "*", "*.kint.json")))
    if not files:
        raise SystemExit(f"no .kint.json files under {ROOT}")
    doc = {
        "schema_version": 1,
        "files": {os.path.relpath(p, ROOT).replace(os.sep, "/"): entry_for(p)
                  for p in files},
        "criteria": CRITERIA,
    }
    out = os.path.join(ROOT, "manifest.json")
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(f"wrote {out} with {len(files)} entries")


if __name__ == "__main__":
    main()
