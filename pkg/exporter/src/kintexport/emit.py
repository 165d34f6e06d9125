"""Assemble and write the interchange document for one export job.

The two-body tensor is symmetrized over the Hermitian and pair-swap
relations before reduction to unique records, momentum violations are
asserted to be numerical zeros, and the HF energy is recomputed from the
emitted tables and compared against the SCF value before anything is
written to disk.
"""

from __future__ import annotations

import json

import numpy as np

from .ci import ci_references
from .geometry import ExportJob
from .scf import (ExportError, MoIntegrals, mo_transform, mp2_energy,
                  ring_of, run_rhf)
from .torus import ao_integrals, with_background

V_KEEP = 1e-12
V_LEAK = 1e-10
ANCHOR_TOL = 1e-9

VKey = tuple[int, int, int, int, int, int, int, int]


def _herm(key: VKey) -> VKey:
    kp, p, kq, q, kr, r, ks, s = key
    return (kq, q, kp, p, ks, s, kr, r)


def _swap(key: VKey) -> VKey:
    kp, p, kq, q, kr, r, ks, s = key
    return (kr, r, ks, s, kp, p, kq, q)


def unique_records(vmap: dict[VKey, complex]) -> list[tuple[VKey, complex]]:
    """Orbit-reduce a symmetric v map to sorted representative records."""
    seen: set[VKey] = set()
    out = []
    for key in sorted(vmap):
        if key in seen:
            continue
        h = _herm(key)
        images = [(key, False), (h, True), (_swap(key), False),
                  (_swap(h), True)]
        rep, cj = min((img for img in images), key=lambda t: t[0])
        val = np.conj(vmap[key]) if cj else vmap[key]
        if rep == _herm(rep):
            val = complex(val.real, 0.0)
        out.append((rep, complex(val)))
        for img, _ in images:
            seen.add(img)
    return out


def two_body_map(mo: MoIntegrals) -> dict[VKey, complex]:
    w = mo.w
    w_sym = 0.25 * (w + np.conj(np.transpose(w, (1, 0, 3, 2)))
                    + np.transpose(w, (2, 3, 0, 1))
                    + np.conj(np.transpose(w, (3, 2, 1, 0))))
    n_orb, n_k = mo.n_orb, mo.n_k
    vmap: dict[VKey, complex] = {}
    worst_leak = 0.0
    for a in range(mo.n_mo):
        for b in range(mo.n_mo):
            for c in range(mo.n_mo):
                for d in range(mo.n_mo):
                    ka, pa = divmod(a, n_orb)
                    kb, pb = divmod(b, n_orb)
                    kc, pc = divmod(c, n_orb)
                    kd, pd = divmod(d, n_orb)
                    val = complex(w_sym[a, b, c, d])
                    if (ka - kb + kc - kd) % n_k != 0:
                        worst_leak = max(worst_leak, abs(val))
                        continue
                    if abs(val) <= V_KEEP:
                        continue
                    vmap[(ka, pa, kb, pb, kc, pc, kd, pd)] = val
    if worst_leak > V_LEAK:
        raise ExportError(
            f"momentum-violating two-body amplitude {worst_leak:.3e}")
    return vmap


def hf_from_tables(t: np.ndarray, vmap: dict[VKey, complex], e_const: float,
                   n_k: int, n_orb: int, n_occ: int) -> float:
    """HF energy as the downstream consumer would evaluate it."""
    occ = [(k, p) for k in range(n_k) for p in range(n_occ)]
    e = e_const
    for k, p in occ:
        e += 2.0 * t[k, p, p].real
    for (ki, pi) in occ:
        for (kj, pj) in occ:
            coul = vmap.get((ki, pi, ki, pi, kj, pj, kj, pj), 0.0)
            exch = vmap.get((ki, pi, kj, pj, kj, pj, ki, pi), 0.0)
            e += (2.0 * coul - exch).real
    return e


def build_document(job: ExportJob, mo: MoIntegrals, refs: dict[str, float],
                   refs_meta: dict[str, str]) -> dict:
    vmap = two_body_map(mo)
    anchor = hf_from_tables(mo.t, vmap, mo.e_nn, mo.n_k, mo.n_orb, mo.n_occ)
    if abs(anchor - mo.e_hf) > ANCHOR_TOL:
        raise ExportError(
            f"emitted tables give HF {anchor:.12f}, SCF says "
            f"{mo.e_hf:.12f}")
    tout = [[[[float(mo.t[k, p, q].real), float(mo.t[k, p, q].imag)]
              for q in range(mo.n_orb)] for p in range(mo.n_orb)]
            for k in range(mo.n_k)]
    vout = []
    for key, val in unique_records(vmap):
        kp, p, kq, q, kr, r, ks, s = key
        vout.append({"kp": kp, "p": p, "kq": kq, "q": q,
                     "kr": kr, "r": r, "ks": ks, "s": s,
                     "re": float(val.real), "im": float(val.imag)})
    return {
        "meta": {
            "n_orb": mo.n_orb,
            "n_k": mo.n_k,
            "shift": job.shift,
            "n_elec": 2 * mo.n_occ * mo.n_k,
            "L_bohr": job.cell.l_bohr,
            "e_const": float(mo.e_nn),
            "madelung": 0.0,
        },
        "t": tout,
        "v": vout,
        "refs": {k: float(v) for k, v in sorted(refs.items())},
        "refs_meta": dict(sorted(refs_meta.items())),
    }


def run_export(job: ExportJob) -> dict:
    """Full pipeline for one geometry; returns the document written."""
    ring = ring_of(job.cell, job.n_k, job.shift)
    ints = with_background(ao_integrals(ring), job.v0)
    n_orb = job.cell.n_atoms
    n_elec = job.cell.n_atoms * job.n_k
    scf = run_rhf(ints, job.n_k, n_orb, job.shift, n_elec,
                  tol=job.scf_tol, maxiter=job.scf_maxiter)
    mo = mo_transform(scf, job.n_k, n_orb)
    homo = float(scf.eps[:, scf.n_occ - 1].max())
    lumo = float(scf.eps[:, scf.n_occ:].min())
    refs = {
        "hf": scf.e_hf,
        "mp2": scf.e_hf + mp2_energy(mo),
        "homo": homo,
        "lumo": lumo,
    }
    refs_meta = {
        "basis": "minimal 1s Gaussian contraction per hydrogen",
        "kernel": "Coulomb truncated at half the torus circumference, "
                  "half weight on the seam",
        "hf": "restricted, per-k blocks, global aufbau over bands",
        "madelung": "zero under the truncated kernel convention",
        "geometry": job.cell.label,
    }
    if job.v0 != 0.0:
        refs_meta["v0"] = (
            f"constant {job.v0:g} Hartree removed from the zero-momentum "
            f"mode of every pair interaction; occupied bands shift by +v0, "
            f"virtuals stay, direct gaps shift by -v0 vs the bare kernel")
    if job.with_ci:
        ci = ci_references(mo, n_elec)
        refs["fci"] = ci["fci"]
        refs["ip_ed"] = ci["ip_ed"]
        refs["ea_ed"] = ci["ea_ed"]
        refs["gap_ed"] = ci["gap_ed"]
        for j, g in sorted(ci["direct_gaps"].items()):
            refs[f"gap_k{j}"] = g
        refs_meta["fci"] = (f"determinant CI over all bands, ground momentum "
                            f"block {ci['kappa0']}")
        refs_meta["gap_ed"] = (
            "smallest of the per-point direct gaps gap_k<j>; gap_k<j> pairs "
            "the electron-attachment tower at mesh point j with the removal "
            "tower at -j, both relative to the ground momentum block")
    for key, note in job.meta_notes.items():
        refs_meta[key] = str(note)
    doc = build_document(job, mo, refs, refs_meta)
    text = json.dumps(doc, indent=1)
    if job.out is not None:
        with open(job.out, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.write("\n")
    return doc
