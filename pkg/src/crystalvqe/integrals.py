"""Crystalline integral tables: the KINT file format and momentum bookkeeping.

A KINT file is UTF-8 JSON with four sections:

  meta  - {n_orb, n_k, shift, n_elec, L_bohr, e_const, madelung}
  t     - one-body integrals, array over k of row-major n_orb x n_orb
          complex matrices, each entry encoded as [re, im]
  v     - two-body integrals in chemist pair notation over spatial
          orbitals, a list of records
          {kp, p, kq, q, kr, r, ks, s, re, im}; only symmetry-unique
          records are stored, images are regenerated on load
  refs  - optional map of reference energies, label -> Hartree

An optional `refs_meta` section (label -> string) documents conventions of
the generator and is carried through untouched.

Conventions. Spatial orbital p at mesh point k; the qubit register orders
spin orbitals as q = k*(2*n_orb) + 2*p + spin with spin 0 = up, 1 = down.
Crystal momentum lives on the integer mesh residue: a two-body key is
admissible iff (kp - kq + kr - ks) = 0 (mod n_k). Mesh shifts drop out of
that combination, so conservation is pure integer arithmetic. The stored
value v[pq|rs] obeys v[pq|rs] = conj(v[qp|sr]) and v[pq|rs] = v[rs|pq].
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import HermiticityViolation, IndexOutOfRange, MomentumViolation, ParseError

# Relative tolerance for the structural validation of stored integrals.
VALIDATION_RTOL = 1e-10

VKey = tuple[int, int, int, int, int, int, int, int]

_META_KEYS = {"n_orb", "n_k", "shift", "n_elec", "L_bohr", "e_const", "madelung"}
_TOP_KEYS = {"meta", "t", "v", "refs", "refs_meta"}


@dataclass(frozen=True)
class KMesh:
    """Uniform k-point mesh on a 1D Brillouin zone of length 2*pi/L.

    Mesh point j carries k = (j + shift)/n_k * 2*pi/L. All conservation
    arithmetic happens on the integer index j modulo n_k.
    """

    n_k: int
    shift: float = 0.0
    length: float = 1.0

    def __post_init__(self):
        if self.n_k < 1:
            raise ParseError(f"mesh needs at least one k-point, got n_k={self.n_k}")
        if not 0.0 <= self.shift < 1.0:
            raise ParseError(f"mesh shift must lie in [0, 1), got {self.shift}")
        if self.length <= 0:
            raise ParseError(f"cell length must be positive, got {self.length}")

    def k_frac(self, j: int) -> float:
        """Crystal momentum of point j as a fraction of 2*pi/L."""
        return (j % self.n_k + self.shift) / self.n_k

    def k_value(self, j: int) -> float:
        return self.k_frac(j) * 2.0 * np.pi / self.length

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.n_k

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.n_k

    def residue(self, kp: int, kq: int, kr: int, ks: int) -> int:
        """Momentum residue of a chemist-notation key (mod n_k)."""
        return (kp - kq + kr - ks) % self.n_k

    def momentum_ok(self, kp: int, kq: int, kr: int, ks: int) -> bool:
        return self.residue(kp, kq, kr, ks) == 0


@dataclass(frozen=True)
class SpinOrbitalMap:
    """Layout of (k, orbital, spin) triples on the qubit register."""

    n_orb: int
    n_k: int

    @property
    def n_qubits(self) -> int:
        return 2 * self.n_orb * self.n_k

    def qubit(self, k: int, p: int, spin: int) -> int:
        if not 0 <= k < self.n_k:
            raise IndexOutOfRange(f"k index {k} outside mesh of {self.n_k}")
        if not 0 <= p < self.n_orb:
            raise IndexOutOfRange(f"orbital index {p} outside cell of {self.n_orb}")
        if spin not in (0, 1):
            raise IndexOutOfRange(f"spin must be 0 (up) or 1 (down), got {spin}")
        return k * (2 * self.n_orb) + 2 * p + spin

    def unpack(self, q: int) -> tuple[int, int, int]:
        if not 0 <= q < self.n_qubits:
            raise IndexOutOfRange(f"qubit {q} outside register of {self.n_qubits}")
        k, rem = divmod(q, 2 * self.n_orb)
        p, spin = divmod(rem, 2)
        return k, p, spin


def _herm_image(key: VKey) -> VKey:
    kp, p, kq, q, kr, r, ks, s = key
    return (kq, q, kp, p, ks, s, kr, r)


def _swap_image(key: VKey) -> VKey:
    kp, p, kq, q, kr, r, ks, s = key
    return (kr, r, ks, s, kp, p, kq, q)


def _orbit(key: VKey) -> list[tuple[VKey, bool]]:
    """Symmetry orbit of a chemist key as (image, conjugate?) pairs."""
    h = _herm_image(key)
    s = _swap_image(key)
    hs = _swap_image(h)
    out: list[tuple[VKey, bool]] = []
    for img, cj in ((key, False), (h, True), (s, False), (hs, True)):
        if all(img != o for o, _ in out):
            out.append((img, cj))
    return out


def canonical_v_items(v: dict[VKey, complex]) -> list[tuple[VKey, complex]]:
    """Reduce a fully-expanded v map to sorted symmetry-unique records."""
    seen: set[VKey] = set()
    out: list[tuple[VKey, complex]] = []
    for key in sorted(v):
        if key in seen:
            continue
        orbit = _orbit(key)
        rep, rep_conj = min(orbit, key=lambda t: t[0])
        val = v[key]
        if rep_conj:
            val = np.conj(val)
        if rep == _herm_image(rep):
            val = complex(val.real, 0.0)
        out.append((rep, complex(val)))
        for img, _ in orbit:
            seen.add(img)
    return out


@dataclass
class CrystalIntegrals:
    """One and two-body integrals of a periodic cell on a k-mesh.

    t[k] is the Hermitian one-body matrix at mesh point k over the cell's
    spatial orbitals. v maps chemist-notation keys (kp,p,kq,q,kr,r,ks,s) to
    v[pq|rs]; the map is stored fully expanded under the Hermitian and
    pair-swap symmetries. e_const is the scalar energy of the reference
    sector and madelung the per-electron shift applied when the particle
    number leaves that sector.
    """

    mesh: KMesh
    n_orb: int
    n_elec: int
    t: np.ndarray
    v: dict[VKey, complex]
    e_const: float = 0.0
    madelung: float = 0.0
    refs: dict[str, float] = field(default_factory=dict)
    refs_meta: dict[str, str] = field(default_factory=dict)

    @property
    def n_k(self) -> int:
        return self.mesh.n_k

    @property
    def orbital_map(self) -> SpinOrbitalMap:
        return SpinOrbitalMap(self.n_orb, self.mesh.n_k)

    @property
    def n_qubits(self) -> int:
        return 2 * self.n_orb * self.mesh.n_k

    def sector_constant(self, n: int) -> float:
        """Scalar energy for an n-electron sector.

        The stored constant belongs to the n_elec sector; leaving it costs
        one madelung shift per added or removed electron.
        """
        if not 0 <= n <= self.n_qubits:
            raise IndexOutOfRange(
                f"sector {n} outside register of {self.n_qubits} spin orbitals"
            )
        return self.e_const + (n - self.n_elec) * self.madelung

    def scale(self) -> float:
        """Magnitude reference for relative tolerances."""
        m = float(np.max(np.abs(self.t))) if self.t.size else 0.0
        if self.v:
            m = max(m, max(abs(x) for x in self.v.values()))
        return max(1.0, m)

    def validate(self) -> None:
        """Re-check every structural invariant, raising on the first failure."""
        if self.t.shape != (self.mesh.n_k, self.n_orb, self.n_orb):
            raise ParseError(
                f"t has shape {self.t.shape}, expected "
                f"{(self.mesh.n_k, self.n_orb, self.n_orb)}"
            )
        if not 1 <= self.n_elec <= self.n_qubits:
            raise ParseError(
                f"n_elec={self.n_elec} outside register of {self.n_qubits}"
            )
        tol = VALIDATION_RTOL * self.scale()
        for k in range(self.mesh.n_k):
            dev = float(np.max(np.abs(self.t[k] - self.t[k].conj().T)))
            if dev > tol:
                raise HermiticityViolation(
                    f"t[{k}] deviates from Hermitian by {dev:.3e} (tol {tol:.3e})"
                )
        for key, val in self.v.items():
            kp, p, kq, q, kr, r, ks, s = key
            for orb in (p, q, r, s):
                if not 0 <= orb < self.n_orb:
                    raise IndexOutOfRange(f"orbital index {orb} in v key {key}")
            for kk in (kp, kq, kr, ks):
                if not 0 <= kk < self.mesh.n_k:
                    raise IndexOutOfRange(f"k index {kk} in v key {key}")
            if not self.mesh.momentum_ok(kp, kq, kr, ks):
                raise MomentumViolation(
                    f"v key {key} has residue "
                    f"{self.mesh.residue(kp, kq, kr, ks)} (mod {self.mesh.n_k})"
                )
            himg = _herm_image(key)
            hval = self.v.get(himg)
            if hval is None or abs(np.conj(hval) - val) > tol:
                raise HermiticityViolation(
                    f"v image {himg} missing or conflicting for key {key}"
                )
            simg = _swap_image(key)
            sval = self.v.get(simg)
            if sval is None or abs(sval - val) > tol:
                raise HermiticityViolation(
                    f"v pair-swap image {simg} missing or conflicting for key {key}"
                )


def _expand_v(records: list[tuple[VKey, complex]], mesh: KMesh, n_orb: int,
              tol: float) -> dict[VKey, complex]:
    """Expand stored records to the full map under the two symmetries.

    Image values are defined exactly from the stored representative, so the
    expanded map satisfies the symmetries to the last bit. Conflicts beyond
    tol between stored records that share an orbit raise.
    """
    full: dict[VKey, complex] = {}
    for key, val in records:
        kp, p, kq, q, kr, r, ks, s = key
        for orb in (p, q, r, s):
            if not 0 <= orb < n_orb:
                raise ParseError(f"orbital index {orb} out of range in v record {key}")
        for kk in (kp, kq, kr, ks):
            if not 0 <= kk < mesh.n_k:
                raise ParseError(f"k index {kk} out of range in v record {key}")
        if not mesh.momentum_ok(kp, kq, kr, ks):
            raise MomentumViolation(
                f"v record {key} violates momentum conservation "
                f"(residue {mesh.residue(kp, kq, kr, ks)} mod {mesh.n_k})"
            )
        if key == _herm_image(key) and abs(val.imag) > tol:
            raise HermiticityViolation(
                f"self-conjugate v record {key} has imaginary part {val.imag:.3e}"
            )
        for img, cj in _orbit(key):
            ival = np.conj(val) if cj else val
            if img == _herm_image(img):
                ival = complex(ival.real, 0.0)
            prev = full.get(img)
            if prev is not None and abs(prev - ival) > tol:
                raise HermiticityViolation(
                    f"conflicting values for v key {img}: {prev} vs {ival}"
                )
            if prev is None:
                full[img] = complex(ival)
    return full


def loads(text: str) -> CrystalIntegrals:
    """Parse KINT content from a string."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ParseError(f"unknown top-level sections: {sorted(unknown)}")
    for req in ("meta", "t", "v"):
        if req not in doc:
            raise ParseError(f"missing required section '{req}'")

    meta = doc["meta"]
    if not isinstance(meta, dict) or set(meta) != _META_KEYS:
        raise ParseError(
            f"meta must have exactly the keys {sorted(_META_KEYS)}"
        )
    try:
        n_orb = int(meta["n_orb"])
        n_k = int(meta["n_k"])
        shift = float(meta["shift"])
        n_elec = int(meta["n_elec"])
        length = float(meta["L_bohr"])
        e_const = float(meta["e_const"])
        madelung = float(meta["madelung"])
    except (TypeError, ValueError) as exc:
        raise ParseError(f"malformed meta entry: {exc}") from exc
    if n_orb < 1:
        raise ParseError(f"n_orb must be positive, got {n_orb}")
    mesh = KMesh(n_k=n_k, shift=shift, length=length)

    traw = doc["t"]
    t = np.zeros((n_k, n_orb, n_orb), dtype=np.complex128)
    if not isinstance(traw, list) or len(traw) != n_k:
        raise ParseError(f"t must be a list of {n_k} matrices")
    for k, mat in enumerate(traw):
        if not isinstance(mat, list) or len(mat) != n_orb:
            raise ParseError(f"t[{k}] must have {n_orb} rows")
        for p, row in enumerate(mat):
            if not isinstance(row, list) or len(row) != n_orb:
                raise ParseError(f"t[{k}][{p}] must have {n_orb} entries")
            for q, ent in enumerate(row):
                if (not isinstance(ent, list) or len(ent) != 2
                        or not all(isinstance(x, (int, float)) for x in ent)):
                    raise ParseError(
                        f"t[{k}][{p}][{q}] must be an [re, im] pair"
                    )
                t[k, p, q] = complex(ent[0], ent[1])

    vraw = doc["v"]
    if not isinstance(vraw, list):
        raise ParseError("v must be a list of records")
    rec_fields = ("kp", "p", "kq", "q", "kr", "r", "ks", "s")
    records: list[tuple[VKey, complex]] = []
    seen_keys: set[VKey] = set()
    for i, rec in enumerate(vraw):
        if not isinstance(rec, dict) or set(rec) != set(rec_fields) | {"re", "im"}:
            raise ParseError(f"v record {i} must have fields {rec_fields} + re, im")
        try:
            key = tuple(int(rec[f]) for f in rec_fields)
            val = complex(float(rec["re"]), float(rec["im"]))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"malformed v record {i}: {exc}") from exc
        if key in seen_keys:
            raise ParseError(f"duplicate v record for key {key}")
        seen_keys.add(key)
        records.append((key, val))

    scale = max(1.0, float(np.max(np.abs(t))) if t.size else 0.0,
                max((abs(v) for _, v in records), default=0.0))
    tol = VALIDATION_RTOL * scale

    for k in range(n_k):
        dev = float(np.max(np.abs(t[k] - t[k].conj().T)))
        if dev > tol:
            raise HermiticityViolation(
                f"t[{k}] deviates from Hermitian by {dev:.3e} (tol {tol:.3e})"
            )
    t = 0.5 * (t + np.conj(np.transpose(t, (0, 2, 1))))

    v = _expand_v(records, mesh, n_orb, tol)

    refs_raw = doc.get("refs", {})
    if not isinstance(refs_raw, dict):
        raise ParseError("refs must be a map label -> float")
    refs = {}
    for label, value in refs_raw.items():
        if not isinstance(value, (int, float)):
            raise ParseError(f"refs['{label}'] must be a number")
        refs[str(label)] = float(value)
    meta_raw = doc.get("refs_meta", {})
    if not isinstance(meta_raw, dict):
        raise ParseError("refs_meta must be a map label -> string")
    refs_meta = {str(k): str(vv) for k, vv in meta_raw.items()}

    ints = CrystalIntegrals(
        mesh=mesh, n_orb=n_orb, n_elec=n_elec, t=t, v=v,
        e_const=e_const, madelung=madelung, refs=refs, refs_meta=refs_meta,
    )
    ints.validate()
    return ints


def load(path: str) -> CrystalIntegrals:
    """Load and validate a KINT file."""
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dumps(ints: CrystalIntegrals) -> str:
    """Serialize to KINT text, storing only symmetry-unique v records."""
    tout = [
        [[[float(ints.t[k, p, q].real), float(ints.t[k, p, q].imag)]
          for q in range(ints.n_orb)] for p in range(ints.n_orb)]
        for k in range(ints.mesh.n_k)
    ]
    vout = []
    for key, val in canonical_v_items(ints.v):
        kp, p, kq, q, kr, r, ks, s = key
        vout.append({
            "kp": kp, "p": p, "kq": kq, "q": q,
            "kr": kr, "r": r, "ks": ks, "s": s,
            "re": float(val.real), "im": float(val.imag),
        })
    doc = {
        "meta": {
            "n_orb": ints.n_orb,
            "n_k": ints.mesh.n_k,
            "shift": float(ints.mesh.shift),
            "n_elec": ints.n_elec,
            "L_bohr": float(ints.mesh.length),
            "e_const": float(ints.e_const),
            "madelung": float(ints.madelung),
        },
        "t": tout,
        "v": vout,
    }
    if ints.refs:
        doc["refs"] = {k: float(v) for k, v in sorted(ints.refs.items())}
    if ints.refs_meta:
        doc["refs_meta"] = dict(sorted(ints.refs_meta.items()))
    return json.dumps(doc, indent=1)


def save(ints: CrystalIntegrals, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(ints))
        fh.write("\n")


def from_dense(mesh: KMesh, n_orb: int, n_elec: int, t: np.ndarray,
               v: dict[VKey, complex], e_const: float = 0.0,
               madelung: float = 0.0,
               refs: dict[str, float] | None = None) -> CrystalIntegrals:
    """Build validated integrals from in-memory arrays.

    v may be given sparsely; missing symmetry images are filled in exactly.
    """
    t = np.asarray(t, dtype=np.complex128)
    scale = max(1.0, float(np.max(np.abs(t))) if t.size else 0.0,
                max((abs(x) for x in v.values()), default=0.0))
    full = _expand_v(list(v.items()), mesh, n_orb, VALIDATION_RTOL * scale)
    t = 0.5 * (t + np.conj(np.transpose(t, (0, 2, 1))))
    ints = CrystalIntegrals(
        mesh=mesh, n_orb=n_orb, n_elec=n_elec, t=t, v=full,
        e_const=e_const, madelung=madelung, refs=dict(refs or {}),
    )
    ints.validate()
    return ints
