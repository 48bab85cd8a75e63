"""JSON state and witness files (format version 1).

Complex entries are stored as ``[re, im]`` pairs.  Python's float repr is the
shortest string that round-trips, so numeric payloads survive a write/read
cycle bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .linalg import Bipartition, from_pauli_expansion, pauli_expansion
from .states import check_density_matrix
from .witness import Mode, WitnessCertificate

FORMAT_VERSION = 1
PAULI_DROP = 1e-14


class FormatError(ValueError):
    """Malformed or unsupported file contents."""


def encode_matrix(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def decode_matrix(rows: Any) -> np.ndarray:
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"matrix is not a nested list of [re, im] pairs: {exc}") from None
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise FormatError(f"matrix must be square with [re, im] entries, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _load_json(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise FormatError(f"{path}: top level must be an object")
    version = data.get("format-version")
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format-version {version!r}")
    return data


def _dump_json(data: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(data, indent=1) + "\n")


# -- states --------------------------------------------------------------------------


@dataclass
class StateFile:
    matrix: np.ndarray
    dims: list[int]
    metadata: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "format-version": FORMAT_VERSION,
            "dims": list(self.dims),
            "matrix": encode_matrix(self.matrix),
            "metadata": {str(k): str(v) for k, v in self.metadata.items()},
        }

    @classmethod
    def from_dict(cls, data: dict, validate: bool = True) -> "StateFile":
        for key in ("dims", "matrix"):
            if key not in data:
                raise FormatError(f"state file lacks {key!r}")
        dims = data["dims"]
        if not isinstance(dims, list) or not all(isinstance(x, int) and x >= 2 for x in dims):
            raise FormatError("dims must be a list of integers >= 2")
        mat = decode_matrix(data["matrix"])
        if mat.shape[0] != int(np.prod(dims)):
            raise FormatError(f"matrix side {mat.shape[0]} does not match dims {dims}")
        if validate:
            try:
                check_density_matrix(mat)
            except ValueError as exc:
                raise FormatError(f"not a density matrix: {exc}") from None
        meta = data.get("metadata", {})
        if not isinstance(meta, dict):
            raise FormatError("metadata must be an object")
        return cls(mat, dims, {str(k): str(v) for k, v in meta.items()})


def write_state(path: str | Path, rho: np.ndarray, metadata: dict | None = None) -> StateFile:
    rho = np.asarray(rho, dtype=complex)
    n = int(round(np.log2(rho.shape[0])))
    sf = StateFile(rho, [2] * n, dict(metadata or {}))
    _dump_json(sf.to_dict(), path)
    return sf


def read_state(path: str | Path, validate: bool = True) -> StateFile:
    sf = StateFile.from_dict(_load_json(path), validate)
    if any(d != 2 for d in sf.dims):
        raise FormatError("only qubit systems are supported")
    return sf


# -- witnesses -------------------------------------------------------------------------


@dataclass
class WitnessFile:
    n: int
    mode: str
    pauli: list[tuple[str, float]]
    certificate: dict | None = None
    provenance: dict[str, Any] = field(default_factory=dict)

    def matrix(self) -> np.ndarray:
        return from_pauli_expansion({k: v for k, v in self.pauli})

    def to_dict(self) -> dict:
        out = {
            "format-version": FORMAT_VERSION,
            "n": self.n,
            "mode": self.mode,
            "pauli-expansion": [[k, float(v)] for k, v in self.pauli],
            "provenance": self.provenance,
        }
        if self.certificate is not None:
            out["certificate"] = self.certificate
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "WitnessFile":
        for key in ("n", "mode", "pauli-expansion"):
            if key not in data:
                raise FormatError(f"witness file lacks {key!r}")
        try:
            pauli = [(str(k), float(v)) for k, v in data["pauli-expansion"]]
        except (TypeError, ValueError):
            raise FormatError("pauli-expansion must be a list of [letters, coefficient] pairs") from None
        n = data["n"]
        for k, _ in pauli:
            if len(k) != n or set(k) - set("IXYZ"):
                raise FormatError(f"bad Pauli string {k!r} for n={n}")
        return cls(n, str(data["mode"]), pauli, data.get("certificate"), data.get("provenance", {}))

    def decode_certificate(self) -> WitnessCertificate | None:
        if self.certificate is None:
            return None
        c = self.certificate
        p, q = {}, {}
        for entry in c["bipartitions"]:
            m = Bipartition(self.n, tuple(entry["members"]))
            p[m] = decode_matrix(entry["p"])
            q[m] = decode_matrix(entry["q"])
        return WitnessCertificate(decode_matrix(c["w"]), p, q, Mode(self.mode))


def pauli_terms(w: np.ndarray) -> list[tuple[str, float]]:
    exp = pauli_expansion(w, tol=PAULI_DROP)
    return sorted((k, float(v.real)) for k, v in exp.items())


def witness_file(
    w: np.ndarray, mode: str, certificate: WitnessCertificate | None = None, provenance: dict | None = None
) -> WitnessFile:
    n = int(round(np.log2(np.asarray(w).shape[0])))
    cert = None
    if certificate is not None:
        cert = {
            "w": encode_matrix(certificate.w),
            "bipartitions": [
                {"members": list(m.members), "p": encode_matrix(certificate.p[m]), "q": encode_matrix(certificate.q[m])}
                for m in certificate.p
            ],
        }
    return WitnessFile(n, mode, pauli_terms(w), cert, dict(provenance or {}))


def write_witness(path: str | Path, wf: WitnessFile) -> None:
    _dump_json(wf.to_dict(), path)


def read_witness(path: str | Path) -> WitnessFile:
    return WitnessFile.from_dict(_load_json(path))


def read_observables(path: str | Path) -> list[str]:
    """Pauli strings from a JSON list (or ``{"observables": [...]}``) or one string per line."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = [line.split("#")[0].strip() for line in text.splitlines()]
        data = [x for x in data if x]
    if isinstance(data, dict):
        data = data.get("observables")
    if not isinstance(data, list) or not all(isinstance(x, str) for x in data) or not data:
        raise FormatError(f"{path}: expected a nonempty list of Pauli strings")
    letters = [x.upper() for x in data]
    for x in letters:
        if set(x) - set("IXYZ"):
            raise FormatError(f"{path}: bad Pauli string {x!r}")
    return letters


def write_decomposition(path: str | Path, dec) -> None:
    data = {
        "format-version": FORMAT_VERSION,
        "target": StateFile(dec.target, [2] * 3).to_dict(),
        "parts": [
            {"members": list(p.cut.members), "weight": p.weight, "component": StateFile(p.component, [2] * 3).to_dict()}
            for p in dec.parts
        ],
    }
    _dump_json(data, path)
