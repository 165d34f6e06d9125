"""AO integrals of wrapped Gaussian s orbitals on a twisted ring.

The Born-von-Karman supercell is a ring of circumference C = n_k * L.
Basis functions are twisted image sums X_j(r) = sum_m e^{i theta m}
phi(r - x_j - m C), theta = 2 pi shift, so a shifted k mesh maps onto
twisted boundary conditions on the small torus.  All charges interact
through the spherically truncated Coulomb kernel w(r) = 1/r for
r < C/2 (midpoint weight exactly at the cut), which is periodic on the
ring without any G=0 surgery; the probe-charge Madelung constant of
this model is identically zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .sto3g import contracted_h

# keep image/lattice sums until the dropped Gaussian weight is < 1e-18
_TAIL = 41.5


@dataclass(frozen=True)
class RingGeometry:
    """One s function per hydrogen at each x position on the ring axis."""

    centers: tuple
    circumference: float
    twist: float = 0.0

    def __post_init__(self):
        for x in self.centers:
            if not 0 <= x < self.circumference:
                raise ValueError(f"center {x} outside [0, {self.circumference})")

    @property
    def n_ao(self) -> int:
        return len(self.centers)

    @property
    def r_cut(self) -> float:
        return 0.5 * self.circumference


def trunc_coulomb(d, q, rc):
    """<w(r)> of a normalized Gaussian (exponent q) displaced by d.

    Closed form of int rho_q(r - d zhat) w(|r|) d3r for the truncated
    kernel; elementwise over d.
    """
    d = np.abs(np.asarray(d, dtype=float))
    sq = np.sqrt(q)
    tiny = d < 1e-6
    dsafe = np.where(tiny, 1.0, d)
    full = (2 * erf(sq * dsafe) + erf(sq * (rc - dsafe))
            - erf(sq * (rc + dsafe))) / (2 * dsafe)
    limit = 2 * sq / np.sqrt(np.pi) * (1.0 - np.exp(-q * rc * rc))
    return np.where(tiny, limit, full)


@dataclass
class PairTable:
    """Primitive pair data for one ordered AO pair, flattened over
    (prim a, prim b, relative image m); coef folds contraction weights,
    the twist phase, and the Gaussian product prefactor."""

    coef: np.ndarray
    p: np.ndarray
    mu: np.ndarray
    d: np.ndarray
    center: np.ndarray


def _pair_table(geom: RingGeometry, xi: float, xj: float,
                alphas: np.ndarray, weights: np.ndarray) -> PairTable:
    c = geom.circumference
    mu_min = alphas.min() / 2.0
    n_img = int(np.ceil((np.sqrt(_TAIL / mu_min) + c) / c))
    ms = np.arange(-n_img, n_img + 1)
    xjm = xj + ms * c
    shape = (len(alphas), len(alphas), len(ms))
    a = alphas[:, None, None]
    b = alphas[None, :, None]
    d = np.broadcast_to(xjm[None, None, :] - xi, shape)
    p = np.broadcast_to(a + b, shape)
    mu = np.broadcast_to(a * b / (a + b), shape)
    coef = (weights[:, None, None] * weights[None, :, None]
            * np.exp(-mu * d * d) * np.exp(1j * geom.twist * ms)[None, None, :])
    center = (a * xi + b * xjm[None, None, :]) / p
    keep = np.abs(coef).ravel() > 1e-18
    return PairTable(coef=coef.ravel()[keep], p=p.ravel()[keep],
                     mu=mu.ravel()[keep], d=np.abs(d).ravel()[keep],
                     center=center.ravel()[keep])


def _kernel_images(circumference: float, q_min: float) -> np.ndarray:
    """Kernel lattice shifts that can reach inside the truncation sphere."""
    rc = 0.5 * circumference
    n = int(np.ceil((rc + np.sqrt(_TAIL / q_min) + circumference)
                    / circumference))
    return np.arange(-n, n + 1) * circumference


@dataclass
class TorusIntegrals:
    geom: RingGeometry
    s: np.ndarray
    kin: np.ndarray
    v_ne: np.ndarray
    eri: np.ndarray
    e_nn: float


def ao_integrals(geom: RingGeometry) -> TorusIntegrals:
    alphas, weights = contracted_h()
    n = geom.n_ao
    rc = geom.r_cut
    tables = [[_pair_table(geom, geom.centers[i], geom.centers[j],
                           alphas, weights) for j in range(n)]
              for i in range(n)]

    s = np.zeros((n, n), dtype=complex)
    kin = np.zeros((n, n), dtype=complex)
    v_ne = np.zeros((n, n), dtype=complex)
    pair_shifts = _kernel_images(geom.circumference, 2 * alphas.min())
    for i in range(n):
        for j in range(n):
            t = tables[i][j]
            gauss = (np.pi / t.p) ** 1.5
            s[i, j] = np.sum(t.coef * gauss)
            kin[i, j] = np.sum(t.coef * gauss * t.mu * (3 - 2 * t.mu * t.d ** 2))
            acc = 0.0
            for x_a in geom.centers:
                for shift in pair_shifts:
                    dist = np.abs(t.center - x_a - shift)
                    if dist.min() > rc + np.sqrt(_TAIL / t.p.min()):
                        continue
                    acc = acc + np.sum(t.coef * gauss
                                       * trunc_coulomb(dist, t.p, rc))
            v_ne[i, j] = -acc

    eri = np.zeros((n, n, n, n), dtype=complex)
    mu2_min = alphas.min()  # p_min * q_min / (p_min + q_min) with p = 2 alpha
    eri_shifts = _kernel_images(geom.circumference, mu2_min)
    pair_index = [(i, j) for i in range(n) for j in range(n)]
    for t1_idx, (i, j) in enumerate(pair_index):
        t1 = tables[i][j]
        g1 = (np.pi / t1.p) ** 1.5
        for t2_idx in range(t1_idx, len(pair_index)):
            k, l = pair_index[t2_idx]
            t2 = tables[k][l]
            g2 = (np.pi / t2.p) ** 1.5
            coef = np.outer(t1.coef * g1, t2.coef * g2)
            mu2 = np.multiply.outer(t1.p, t2.p) / np.add.outer(t1.p, t2.p)
            dpq = np.subtract.outer(t1.center, t2.center)
            reach = rc + np.sqrt(_TAIL / mu2.min())
            val = 0.0
            for shift in eri_shifts:
                dist = np.abs(dpq - shift)
                if dist.min() > reach:
                    continue
                val = val + np.sum(coef * trunc_coulomb(dist, mu2, rc))
            eri[i, j, k, l] = val
            eri[k, l, i, j] = val  # the kernel is symmetric in 1 <-> 2
    return TorusIntegrals(geom=geom, s=s, kin=kin, v_ne=v_ne, eri=eri,
                          e_nn=nuclear_repulsion(geom))


def with_background(ints: TorusIntegrals, v0: float) -> TorusIntegrals:
    """Remove a constant v0 from the zero-momentum mode of the pair
    interaction, for every distinct pair of charges (ee, en, nn alike).

    This reproduces the bookkeeping of reciprocal-space codes that drop
    the divergent zero-mode term and shift charged-sector energies by a
    particle-number-linear constant afterwards: eigenvectors and all
    same-charge energy differences are untouched, occupied band energies
    move by +v0 while virtuals stay, and the fundamental gap moves by
    exactly -v0.  v0 = 0 returns the input unchanged.
    """
    if v0 == 0.0:
        return ints
    n_nuc = ints.geom.n_ao  # one unit charge per center
    eri = ints.eri - v0 * np.multiply.outer(ints.s, ints.s)
    v_ne = ints.v_ne + v0 * n_nuc * ints.s
    e_nn = ints.e_nn - v0 * (n_nuc * (n_nuc - 1) / 2.0)
    return TorusIntegrals(geom=ints.geom, s=ints.s, kin=ints.kin,
                          v_ne=v_ne, eri=eri, e_nn=e_nn)


def nuclear_repulsion(geom: RingGeometry) -> float:
    """Point charges under the truncated kernel; only minimum images
    survive, with half weight on a pair exactly at the cut (the two tied
    images then sum to the kernel's continuous seam value)."""
    c, rc = geom.circumference, geom.r_cut
    total = 0.0
    for a in range(geom.n_ao):
        for b in range(a + 1, geom.n_ao):
            d0 = geom.centers[b] - geom.centers[a]
            for m in range(-2, 3):
                d = abs(d0 - m * c)
                if abs(d - rc) < 1e-9:
                    total += 0.5 / rc
                elif d < rc:
                    total += 1.0 / d
    return total
