"""Write the two synthetic reference files (free-fermion, Gamma-only toy).

Reference values are closed-form: non-interacting band sums for the flat
file, the single-determinant sector energy for the toy. Run from anywhere;
files land in <repo>/refdata. Rerunning is byte-stable.
"""

import os

import numpy as np

from crystalvqe import integrals

ROOT = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                    "refdata")


def free_fermion() -> None:
    # two flat bands per k point; half filling occupies the lower band
    t = np.zeros((2, 2, 2), dtype=complex)
    t[0, 0, 0], t[0, 1, 1] = -1.3, 0.9
    t[1, 0, 0], t[1, 1, 1] = -0.7, 1.4
    e_const = 0.45
    hf = 2 * (-1.3) + 2 * (-0.7) + e_const
    refs = {"hf": hf, "fci": hf, "homo": -0.7, "lumo": 0.9,
            "gap_ed": 2.1}  # direct gaps 2.2 at k=0, 2.1 at k=1
    mesh = integrals.KMesh(n_k=2, shift=0.0, length=4.0)
    ints = integrals.from_dense(mesh, 2, 4, t, {}, e_const=e_const, refs=refs)
    path = os.path.join(ROOT, "free_fermion", "flat.kint.json")
    os.makedirs(os.path.dirname(path), exist_ok=True)
    integrals.save(ints, path)
    print("wrote", path)


def toy_gamma() -> None:
    # one orbital, one k point, two electrons: H = sum_s t n_s + U n_up n_dn
    # so the doubly occupied determinant is the whole N=2 sector
    t = np.full((1, 1, 1), -0.5, dtype=complex)
    v = {(0, 0, 0, 0, 0, 0, 0, 0): 0.3}
    e_const, madelung = 0.1, 0.05
    hf = 2 * (-0.5) + 0.3 + e_const
    refs = {"hf": hf, "fci": hf}
    mesh = integrals.KMesh(n_k=1, shift=0.0, length=1.5)
    ints = integrals.from_dense(mesh, 1, 2, t, v, e_const=e_const,
                                madelung=madelung, refs=refs)
    path = os.path.join(ROOT, "toy_gamma", "gamma.kint.json")
    os.makedirs(os.path.dirname(path), exist_ok=True)
    integrals.save(ints, path)
    print("wrote", path)


if __name__ == "__main__":
    free_fermion()
    toy_gamma()
