"""Command line front end: ground states, energy scans, bands, diagnostics.

Commands read an optional JSON config whose fields individual flags
override, write machine-readable outputs into the --out directory, and
return 0 on success, 1 on validation or I/O failure, 2 when a run finished
without converging (outputs are still written).  Runs are deterministic
unless a seed requests a randomized starting point.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import math
import os
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from . import integrals, qse
from . import vqe as vqe_mod
from .ansatz import prepare_state, resolve_variant
from .errors import CrystalVqeError, ParseError
from .oracle import crystal_momentum, fidelity, ground_in_number_sector
from .statevec import hartree_fock_state

TASKS = ("vqe", "fci", "bands", "momentum", "fidelity")

PEC_HEADER = "geometry_label,e_hf,e_vqe,e_fci,error_vs_fci"

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


@dataclass
class RunConfig:
    files: list = field(default_factory=list)
    variant: str = "buccsd-real"
    momentum_filter: bool = False
    gtol: float = vqe_mod.DEFAULT_GTOL
    maxiter: int = vqe_mod.DEFAULT_MAXITER
    out: str = "."
    jobs: int = 1
    seed: int | None = None
    tasks: tuple = TASKS
    labels: list | None = None
    metric_threshold: float = qse.METRIC_THRESHOLD
    plot: bool = False
    result: str | None = None


_CONFIG_KEYS = {f.name for f in fields(RunConfig)}


def make_config(args, check_files: bool = True) -> RunConfig:
    cfg = RunConfig()
    if args.config is not None:
        with open(args.config, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"config {args.config} is not JSON: {exc}")
        if not isinstance(doc, dict):
            raise ParseError("config must be a JSON object")
        unknown = set(doc) - _CONFIG_KEYS
        if unknown:
            raise ParseError(f"unknown config keys: {sorted(unknown)}")
        for key, value in doc.items():
            setattr(cfg, key, value)
    for name in ("variant", "momentum_filter", "gtol", "maxiter", "out",
                 "jobs", "seed", "metric_threshold", "plot", "result"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if getattr(args, "tasks", None) is not None:
        cfg.tasks = tuple(t for t in args.tasks.split(",") if t)
    if getattr(args, "labels", None) is not None:
        cfg.labels = [s for s in args.labels.split(",") if s]
    if getattr(args, "files", None):
        cfg.files = list(args.files)

    cfg.tasks = tuple(cfg.tasks)
    bad = set(cfg.tasks) - set(TASKS)
    if bad:
        raise ParseError(f"unknown tasks {sorted(bad)}; choose from {TASKS}")
    resolve_variant(cfg.variant)
    if cfg.jobs < 1:
        raise ParseError(f"jobs must be positive, got {cfg.jobs}")
    if cfg.maxiter < 1:
        raise ParseError(f"maxiter must be positive, got {cfg.maxiter}")
    if cfg.metric_threshold < 0:
        raise ParseError("metric_threshold must be nonnegative")
    if not cfg.files:
        raise ParseError("no integral files given (positional or config 'files')")
    if check_files:
        for path in cfg.files:
            if not os.path.isfile(path):
                raise ParseError(f"integral file not found: {path}")
    return cfg


def _initial_params(n: int, seed) -> np.ndarray:
    if seed is None:
        return np.zeros(n)
    # the only RNG in the front end: a seeded start-point perturbation
    return np.random.default_rng(int(seed)).normal(scale=1e-2, size=n)


def _write(cfg: RunConfig, name: str, text: str) -> str:
    os.makedirs(cfg.out, exist_ok=True)
    path = os.path.join(cfg.out, name)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
        if not text.endswith("\n"):
            fh.write("\n")
    return path


def cmd_validate(cfg: RunConfig) -> int:
    failures = 0
    for path in cfg.files:
        try:
            ints = integrals.load(path)
        except (CrystalVqeError, OSError) as exc:
            print(f"FAIL {path}: {exc}", file=sys.stderr)
            failures += 1
            continue
        print(f"OK {path} n_orb={ints.n_orb} n_k={ints.mesh.n_k} "
              f"n_elec={ints.n_elec} n_qubits={ints.n_qubits} "
              f"v_records={len(ints.v)} refs={sorted(ints.refs)}")
    return 1 if failures else 0


def cmd_vqe(cfg: RunConfig) -> int:
    if len(cfg.files) != 1:
        raise ParseError(f"vqe needs exactly one integral file, got {len(cfg.files)}")
    ints = integrals.load(cfg.files[0])
    problem = vqe_mod.make_problem(ints, cfg.variant,
                                   momentum_filter=cfg.momentum_filter,
                                   gtol=cfg.gtol, maxiter=cfg.maxiter)
    res = vqe_mod.minimize(problem, _initial_params(problem.n_params, cfg.seed))
    res.momentum_filter = cfg.momentum_filter
    path = _write(cfg, "vqe_result.json", res.to_json())
    print(f"vqe {cfg.files[0]}: energy={res.energy:.10f} Ha "
          f"status={res.status} n_iter={res.n_iter} -> {path}")
    return 0 if res.converged else 2


def _pec_point(task) -> dict:
    path, variant, momentum_filter, gtol, maxiter, seed = task
    try:
        ints = integrals.load(path)
        problem = vqe_mod.make_problem(ints, variant,
                                       momentum_filter=momentum_filter,
                                       gtol=gtol, maxiter=maxiter)
        e_hf = vqe_mod.energy(problem, np.zeros(problem.n_params))
        res = vqe_mod.minimize(problem,
                               _initial_params(problem.n_params, seed))
        e_fci, _ = ground_in_number_sector(problem.hamiltonian, ints.n_elec)
        return {"e_hf": e_hf, "e_vqe": res.energy, "e_fci": e_fci,
                "converged": res.converged, "error": None}
    except CrystalVqeError as exc:
        return {"e_hf": math.nan, "e_vqe": math.nan, "e_fci": math.nan,
                "converged": False, "error": str(exc)}


def cmd_pec(cfg: RunConfig) -> int:
    if len(cfg.files) < 2:
        raise ParseError(f"pec needs at least two integral files, got {len(cfg.files)}")
    labels = cfg.labels
    if labels is None:
        labels = [os.path.splitext(os.path.basename(p))[0].removesuffix(".kint")
                  for p in cfg.files]
    if len(labels) != len(cfg.files):
        raise ParseError(f"{len(labels)} labels for {len(cfg.files)} files")
    tasks = [(p, cfg.variant, cfg.momentum_filter, cfg.gtol, cfg.maxiter,
              cfg.seed) for p in cfg.files]
    if cfg.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_pec_point, tasks))
    else:
        rows = [_pec_point(t) for t in tasks]

    clean = True
    lines = [PEC_HEADER]
    for label, row in zip(labels, rows):
        if row["error"] is not None:
            print(f"pec point {label} failed: {row['error']}", file=sys.stderr)
            clean = False
        elif not row["converged"]:
            print(f"pec point {label} did not converge", file=sys.stderr)
            clean = False
        err = row["e_vqe"] - row["e_fci"]
        lines.append(f"{label},{row['e_hf']:.12e},{row['e_vqe']:.12e},"
                     f"{row['e_fci']:.12e},{err:.12e}")
    path = _write(cfg, "pec.csv", "\n".join(lines))
    print(f"pec: {len(rows)} points -> {path}")
    if cfg.plot:
        xs = _axis_positions(labels)
        series = []
        for pos, key in enumerate(("e_hf", "e_vqe", "e_fci")):
            ys = [row[key] for row in rows]
            series.append((key, ys, _PALETTE[pos]))
        svg = _svg_line_plot(xs, series, "potential energy curve",
                             "geometry", "energy [Ha]")
        _write(cfg, "pec.svg", svg)
    return 0 if clean else 2


def _state_from_config(cfg: RunConfig, ints, allow_hf: bool = False):
    """(problem, params, converged) honoring a saved result if given."""
    if cfg.result is not None:
        with open(cfg.result, encoding="utf-8") as fh:
            res = vqe_mod.VqeResult.from_json(fh.read())
        variant = res.variant or cfg.variant
        problem = vqe_mod.make_problem(ints, variant,
                                       momentum_filter=res.momentum_filter,
                                       gtol=cfg.gtol, maxiter=cfg.maxiter)
        return problem, res.params, res.converged
    problem = vqe_mod.make_problem(ints, cfg.variant,
                                   momentum_filter=cfg.momentum_filter,
                                   gtol=cfg.gtol, maxiter=cfg.maxiter)
    if allow_hf and "vqe" not in cfg.tasks:
        return problem, np.zeros(problem.n_params), True
    res = vqe_mod.minimize(problem, _initial_params(problem.n_params, cfg.seed))
    return problem, res.params, res.converged


def cmd_bands(cfg: RunConfig) -> int:
    if len(cfg.files) != 1:
        raise ParseError(f"bands needs exactly one integral file, got {len(cfg.files)}")
    ints = integrals.load(cfg.files[0])
    problem, params, converged = _state_from_config(cfg, ints)
    psi = prepare_state(problem.circuit, params, problem.reference)
    bs = qse.bands(psi, problem.hamiltonian, ints,
                   metric_threshold=cfg.metric_threshold)
    path = _write(cfg, "bands.csv", bs.to_csv())
    gap, k_at = bs.direct_gap()
    _write(cfg, "gap_summary.json", json.dumps(
        {"direct_gap_hartree": gap, "k_of_gap": int(k_at)}, indent=1))
    print(f"bands: E0={bs.e0:.10f} Ha direct_gap={gap:.6f} Ha "
          f"at k={k_at} -> {path}")
    return 0 if converged else 2


def cmd_diag(cfg: RunConfig) -> int:
    if len(cfg.files) != 1:
        raise ParseError(f"diag needs exactly one integral file, got {len(cfg.files)}")
    ints = integrals.load(cfg.files[0])
    problem, params, converged = _state_from_config(cfg, ints, allow_hf=True)
    psi = prepare_state(problem.circuit, params, problem.reference)
    doc = {}
    if "momentum" in cfg.tasks:
        _, mag, raw = crystal_momentum(psi, ints.mesh)
        # K L = -i log<T_L>; a defective magnitude shows up imaginary
        doc["KL_over_pi_re"] = float(np.angle(raw)) / math.pi
        doc["KL_over_pi_im"] = (-math.log(mag) / math.pi if mag > 0 else math.inf)
    if "fci" in cfg.tasks or "fidelity" in cfg.tasks:
        e_fci, fci_state = ground_in_number_sector(problem.hamiltonian,
                                                   ints.n_elec)
        if "fci" in cfg.tasks:
            doc["fci_energy"] = float(e_fci)
        if "fidelity" in cfg.tasks:
            doc["infidelity"] = float(1.0 - fidelity(psi, fci_state))
    path = _write(cfg, "diag.json", json.dumps(doc, indent=1))
    print(f"diag: {sorted(doc)} -> {path}")
    return 0 if converged else 2


def _axis_positions(labels) -> list:
    """Numeric x axis when labels carry numbers, else plain indices."""
    import string
    try:
        return [float(s.lstrip(string.ascii_letters + "_")) for s in labels]
    except ValueError:
        return list(range(len(labels)))


def _svg_line_plot(xs, series, title: str, xlabel: str, ylabel: str) -> str:
    """Small self-contained line plot; one polyline per series."""
    w, h = 640, 420
    ml, mr, mt, mb = 76, 24, 34, 52
    finite = [y for _, ys, _ in series for y in ys if math.isfinite(y)]
    xmin, xmax = min(xs), max(xs)
    ymin, ymax = (min(finite), max(finite)) if finite else (0.0, 1.0)
    if xmax - xmin < 1e-300:
        xmax = xmin + 1.0
    if ymax - ymin < 1e-300:
        ymax = ymin + 1.0
    pad = 0.05 * (ymax - ymin)
    ymin, ymax = ymin - pad, ymax + pad

    def sx(x):
        return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr)

    def sy(y):
        return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
           f'viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">',
           f'<rect width="{w}" height="{h}" fill="white"/>',
           f'<text x="{w / 2:.0f}" y="20" text-anchor="middle">{title}</text>']
    for i in range(5):
        y = ymin + i * (ymax - ymin) / 4
        py = sy(y)
        out.append(f'<line x1="{ml}" y1="{py:.1f}" x2="{w - mr}" y2="{py:.1f}" '
                   f'stroke="#ddd"/>')
        out.append(f'<text x="{ml - 6}" y="{py + 4:.1f}" '
                   f'text-anchor="end">{y:.5g}</text>')
    for x in sorted(set(xs)):
        px = sx(x)
        out.append(f'<line x1="{px:.1f}" y1="{h - mb}" x2="{px:.1f}" '
                   f'y2="{h - mb + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.1f}" y="{h - mb + 18}" '
                   f'text-anchor="middle">{x:.5g}</text>')
    out.append(f'<rect x="{ml}" y="{mt}" width="{w - ml - mr}" '
               f'height="{h - mt - mb}" fill="none" stroke="black"/>')
    out.append(f'<text x="{w / 2:.0f}" y="{h - 10}" '
               f'text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="16" y="{h / 2:.0f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {h / 2:.0f})">{ylabel}</text>')
    for pos, (label, ys, color) in enumerate(series):
        pts = " ".join(f"{sx(x):.1f},{sy(y):.1f}"
                       for x, y in zip(xs, ys) if math.isfinite(y))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5"/>')
        for x, y in zip(xs, ys):
            if math.isfinite(y):
                out.append(f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="2.5" '
                           f'fill="{color}"/>')
        ly = mt + 16 + 16 * pos
        out.append(f'<line x1="{w - mr - 90}" y1="{ly - 4}" x2="{w - mr - 70}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{w - mr - 64}" y="{ly}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crystalvqe",
        description="ground states and quasiparticle bands of periodic "
                    "lattice models")
    sub = parser.add_subparsers(dest="command", required=True)
    specs = (
        ("validate", cmd_validate, "lint KINT integral files"),
        ("vqe", cmd_vqe, "variational ground-state run on one file"),
        ("pec", cmd_pec, "potential energy curve over several files"),
        ("bands", cmd_bands, "quasiparticle band structure of one file"),
        ("diag", cmd_diag, "momentum/fidelity diagnostics of a state"),
    )
    for name, func, help_text in specs:
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("files", nargs="*", help="KINT integral files")
        sp.add_argument("--config", help="JSON config; flags override its fields")
        sp.add_argument("--out", help="output directory (default .)")
        sp.add_argument("--jobs", type=int, help="worker processes for pec")
        sp.add_argument("--variant", help="ansatz variant name")
        sp.add_argument("--momentum-filter", dest="momentum_filter",
                        action="store_true", default=None,
                        help="drop excitations with nonzero momentum transfer")
        sp.add_argument("--seed", type=int,
                        help="seed for a randomized starting point")
        sp.add_argument("--gtol", type=float, help="gradient norm target")
        sp.add_argument("--maxiter", type=int, help="optimizer iteration cap")
        sp.add_argument("--metric-threshold", dest="metric_threshold",
                        type=float, help="subspace metric cutoff")
        sp.add_argument("--plot", action="store_true", default=None,
                        help="also emit an SVG plot")
        sp.add_argument("--result", help="existing vqe_result.json to reuse")
        sp.add_argument("--tasks", help="comma-separated diag task list")
        sp.add_argument("--labels", help="comma-separated pec point labels")
        sp.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args, check_files=args.func is not cmd_validate)
        return args.func(cfg)
    except (CrystalVqeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
