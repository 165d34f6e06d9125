"""Shipped reference data: locating, loading, and integrity-checking.

The data set lives in `refdata/<system>/<geometry>.kint.json` next to a
`manifest.json` that records a sha256 per file, a short description, and
the frozen expected values the test suite anchors on.  Everything here is
read-only; `scripts/update_manifest.py` regenerates the manifest.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field

from . import integrals
from .errors import CrystalVqeError, ParseError

ENV_VAR = "CRYSTALVQE_REFDATA"
MANIFEST_NAME = "manifest.json"


def data_dir() -> str:
    """Path of the reference-data directory.

    $CRYSTALVQE_REFDATA wins when set; otherwise walk upwards from the
    package (covers editable installs) and from the working directory
    until a refdata/manifest.json appears.
    """
    override = os.environ.get(ENV_VAR)
    if override:
        if not os.path.isfile(os.path.join(override, MANIFEST_NAME)):
            raise FileNotFoundError(
                f"{ENV_VAR}={override} has no {MANIFEST_NAME}")
        return override
    here = os.path.dirname(os.path.abspath(__file__))
    for start in (here, os.getcwd()):
        node = start
        while True:
            cand = os.path.join(node, "refdata")
            if os.path.isfile(os.path.join(cand, MANIFEST_NAME)):
                return cand
            parent = os.path.dirname(node)
            if parent == node:
                break
            node = parent
    raise FileNotFoundError(
        f"no refdata/{MANIFEST_NAME} above {here} or the working "
        f"directory; set {ENV_VAR}")


def sha256_of(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def load_manifest(root: str | None = None) -> dict:
    path = os.path.join(root or data_dir(), MANIFEST_NAME)
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path} is not JSON: {exc}")
    for key in ("files", "criteria"):
        if key not in doc:
            raise ParseError(f"manifest lacks the '{key}' section")
    return doc


def file_path(rel: str, root: str | None = None) -> str:
    return os.path.join(root or data_dir(), rel)


def load_file(rel: str, root: str | None = None) -> integrals.CrystalIntegrals:
    return integrals.load(file_path(rel, root))


def criteria(root: str | None = None) -> dict:
    return load_manifest(root)["criteria"]


@dataclass
class VerifyReport:
    n_checked: int = 0
    issues: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def __str__(self) -> str:
        head = f"{self.n_checked} files checked"
        if self.ok:
            return head + ", all clean"
        lines = [head + f", {len(self.issues)} issues:"]
        lines += ["  " + issue for issue in self.issues]
        return "\n".join(lines)


def verify_manifest(root: str | None = None) -> VerifyReport:
    """Checksums, loadability, and manifest/file consistency in one pass.

    Flags: manifest entries whose file is gone, checksum mismatches,
    files that fail KINT validation, expected values that disagree with
    the refs frozen inside the file, and stray .kint.json files the
    manifest does not list.
    """
    root = root or data_dir()
    manifest = load_manifest(root)
    report = VerifyReport()
    for rel, entry in sorted(manifest["files"].items()):
        report.n_checked += 1
        path = os.path.join(root, rel)
        if not os.path.isfile(path):
            report.issues.append(f"missing file: {rel}")
            continue
        digest = sha256_of(path)
        if digest != entry.get("sha256"):
            report.issues.append(
                f"checksum mismatch: {rel} hashes to {digest[:12]}.., "
                f"manifest says {str(entry.get('sha256'))[:12]}..")
            continue
        try:
            ints = integrals.load(path)
        except (CrystalVqeError, OSError) as exc:
            report.issues.append(f"load failure: {rel}: {exc}")
            continue
        for name, spec in entry.get("expected", {}).items():
            if name not in ints.refs:
                report.issues.append(f"expected value {name} not in refs: {rel}")
            elif abs(ints.refs[name] - spec["value"]) > spec["tol"]:
                report.issues.append(
                    f"expected {name}={spec['value']} but refs carry "
                    f"{ints.refs[name]}: {rel}")
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for name in sorted(filenames):
            if not name.endswith(".kint.json"):
                continue
            rel = os.path.relpath(os.path.join(dirpath, name), root)
            if rel not in manifest["files"]:
                report.issues.append(f"unlisted file: {rel}")
    return report
