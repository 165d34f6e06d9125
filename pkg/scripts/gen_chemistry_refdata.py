"""Regenerate the hydrogen-lattice reference files under refdata/.

Run from the repo root after installing both packages:

    python scripts/gen_chemistry_refdata.py

Every job records its own export_kint command line under
refs_meta["export_args"], so any shipped file can be rebuilt from nothing
but its contents.  The uniform-chain bond grid is our own sampling of the
compressed-to-stretched crossover; dissociation physics sits past 2.6 Bohr.
The dimer job carries the calibrated zero-mode constant (see the v0 note
inside the emitted file).
"""

import os

from kintexport.emit import run_export
from kintexport.geometry import ExportJob, parse_geometry

ROOT = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                    "refdata")

# (system dir, geometry spec, n_k, shift, v0)
JOBS = [
    ("hchain_nk3", "chain:R=1", 3, 0.0, 0.0),
    ("hchain_nk3", "chain:R=1.4", 3, 0.0, 0.0),
    ("hchain_nk3", "chain:R=1.8", 3, 0.0, 0.0),
    ("hchain_nk3", "chain:R=2", 3, 0.0, 0.0),
    ("hchain_nk3", "chain:R=2.4", 3, 0.0, 0.0),
    ("hchain_nk3", "chain:R=2.8", 3, 0.0, 0.0),
    ("hchain_nk3", "chain:R=3", 3, 0.0, 0.0),
    ("hchain_nk4", "chain:R=2", 4, 0.5, 0.0),
    ("hchain_nk4", "chain:R=4.5", 4, 0.5, 0.0),
    ("dimer_nk2", "dimer:intra=1.2,inter=4", 2, 0.25, 0.1127),
]


def args_line(geom: str, n_k: int, shift: float, v0: float) -> str:
    line = f"--geometry {geom} --nk {n_k} --shift {shift:g}"
    if v0 != 0.0:
        line += f" --v0 {v0:g}"
    return line


def main() -> None:
    for system, geom, n_k, shift, v0 in JOBS:
        cell = parse_geometry(geom)
        os.makedirs(os.path.join(ROOT, system), exist_ok=True)
        out = os.path.join(ROOT, system, f"{cell.label}.kint.json")
        job = ExportJob(cell=cell, n_k=n_k, shift=shift, out=out, v0=v0,
                        meta_notes={"export_args":
                                    args_line(geom, n_k, shift, v0)})
        doc = run_export(job)
        refs = doc["refs"]
        gap = refs.get("gap_ed")
        print(f"{os.path.relpath(out, ROOT):40s} hf={refs['hf']:+.8f} "
              f"fci={refs.get('fci', float('nan')):+.8f} "
              f"gap={gap if gap is None else round(gap, 6)}")


if __name__ == "__main__":
    main()
