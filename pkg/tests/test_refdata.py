"""Manifest integrity checks against scratch data sets and the shipped one."""

import json
import os

import numpy as np
import pytest

from crystalvqe import integrals, refdata, statevec
from crystalvqe.errors import ParseError
from crystalvqe.fermion_ops import build_hamiltonian
from crystalvqe.integrals import KMesh
from crystalvqe.jw_encoding import jordan_wigner, real_coefficients


def small_ints(t00=-1.0, refs=None):
    t = np.zeros((2, 1, 1), dtype=complex)
    t[0, 0, 0], t[1, 0, 0] = t00, 1.0
    mesh = KMesh(n_k=2, shift=0.0, length=2.0)
    return integrals.from_dense(mesh, 1, 2, t, {}, e_const=0.25, refs=refs)


def make_root(tmp_path):
    """Two-file scratch data set with a consistent manifest."""
    root = tmp_path / "refdata"
    entries = {}
    for sub, t00 in (("sys_a/a.kint.json", -1.0), ("sys_b/b.kint.json", -2.0)):
        path = root / sub
        path.parent.mkdir(parents=True, exist_ok=True)
        hf = 2 * t00 + 0.25
        integrals.save(small_ints(t00, refs={"hf": hf}), str(path))
        entries[sub] = {"sha256": refdata.sha256_of(str(path)),
                        "system": sub.split("/")[0], "geometry": "ring",
                        "mesh": "n_k=2 shift=0.0 L=2.0",
                        "expected": {"hf": {"value": hf, "tol": 1e-8}}}
    manifest = {"schema_version": 1, "files": entries,
                "criteria": {"hf_anchor": {"tol": 1e-8}}}
    (root / "manifest.json").write_text(json.dumps(manifest, indent=1))
    return root


def rewrite_manifest(root, mutate):
    doc = json.loads((root / "manifest.json").read_text())
    mutate(doc)
    (root / "manifest.json").write_text(json.dumps(doc, indent=1))


def test_env_override_wins(tmp_path, monkeypatch):
    root = make_root(tmp_path)
    monkeypatch.setenv(refdata.ENV_VAR, str(root))
    assert refdata.data_dir() == str(root)
    monkeypatch.setenv(refdata.ENV_VAR, str(tmp_path / "nowhere"))
    with pytest.raises(FileNotFoundError):
        refdata.data_dir()


def test_walk_up_finds_checkout(monkeypatch):
    monkeypatch.delenv(refdata.ENV_VAR, raising=False)
    root = refdata.data_dir()
    assert os.path.isfile(os.path.join(root, "manifest.json"))


def test_clean_set_verifies(tmp_path):
    root = make_root(tmp_path)
    report = refdata.verify_manifest(str(root))
    assert report.ok
    assert report.n_checked == 2
    assert "all clean" in str(report)


def test_corrupted_byte_is_named(tmp_path):
    root = make_root(tmp_path)
    victim = root / "sys_a" / "a.kint.json"
    blob = bytearray(victim.read_bytes())
    blob[-2] ^= 0x01
    victim.write_bytes(bytes(blob))
    report = refdata.verify_manifest(str(root))
    assert not report.ok
    assert len(report.issues) == 1
    assert "checksum mismatch" in report.issues[0]
    assert "sys_a/a.kint.json" in report.issues[0]


def test_entry_without_file_fails(tmp_path):
    root = make_root(tmp_path)
    (root / "sys_b" / "b.kint.json").unlink()
    report = refdata.verify_manifest(str(root))
    assert report.issues == ["missing file: sys_b/b.kint.json"]


def test_unlisted_file_flagged(tmp_path):
    root = make_root(tmp_path)
    integrals.save(small_ints(), str(root / "sys_a" / "extra.kint.json"))
    report = refdata.verify_manifest(str(root))
    assert [i for i in report.issues if i.startswith("unlisted")] \
        == ["unlisted file: sys_a/extra.kint.json"]


def test_unloadable_file_reported(tmp_path):
    root = make_root(tmp_path)
    victim = root / "sys_a" / "a.kint.json"
    victim.write_text("{\"meta\": {}}")
    rewrite_manifest(root, lambda doc: doc["files"]
                     ["sys_a/a.kint.json"].update(
                         sha256=refdata.sha256_of(str(victim))))
    report = refdata.verify_manifest(str(root))
    assert any(i.startswith("load failure: sys_a") for i in report.issues)


def test_expected_value_drift_flagged(tmp_path):
    root = make_root(tmp_path)

    def bump(doc):
        doc["files"]["sys_a/a.kint.json"]["expected"]["hf"]["value"] += 0.5

    rewrite_manifest(root, bump)
    report = refdata.verify_manifest(str(root))
    assert any("expected hf" in i for i in report.issues)

    def rename(doc):
        exp = doc["files"]["sys_b/b.kint.json"]["expected"]
        exp["mp2"] = exp.pop("hf")

    rewrite_manifest(root, rename)
    report = refdata.verify_manifest(str(root))
    assert any("mp2 not in refs" in i for i in report.issues)


def test_manifest_must_have_sections(tmp_path):
    root = make_root(tmp_path)
    rewrite_manifest(root, lambda doc: doc.pop("criteria"))
    with pytest.raises(ParseError):
        refdata.load_manifest(str(root))


def test_shipped_set_is_clean():
    report = refdata.verify_manifest()
    assert report.ok, str(report)
    assert report.n_checked >= 2


def test_shipped_synthetic_refs_anchor():
    # closed-form files: band-sum and single-determinant references
    for rel, hf_expected in (("free_fermion/flat.kint.json", -3.55),
                             ("toy_gamma/gamma.kint.json", -0.6)):
        ints = refdata.load_file(rel)
        ham = real_coefficients(jordan_wigner(build_hamiltonian(ints),
                                              ints.n_qubits))
        hf = statevec.expectation(statevec.hartree_fock_state(ints), ham).real
        assert hf == pytest.approx(hf_expected, abs=1e-12)
        assert ints.refs["hf"] == pytest.approx(hf_expected, abs=1e-12)


def test_criteria_block_present():
    crit = refdata.criteria()
    assert "hf_anchor" in crit and crit["hf_anchor"]["tol"] == 1e-8
    assert "qse_dimer_bands" in crit
