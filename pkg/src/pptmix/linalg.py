"""Dense linear algebra on multi-qubit operators.

Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of a
computational-basis index. All operators are plain ``numpy`` arrays; the
subsystem structure is passed alongside as ``dims`` (defaults to qubits).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-12

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def scaled_tol(a: np.ndarray, tol: float) -> float:
    """Absolute-plus-relative tolerance ``tol * (1 + max|a|)``."""
    return tol * (1.0 + (np.abs(a).max() if a.size else 0.0))


def n_qubits(dim: int) -> int:
    n = int(round(np.log2(dim)))
    if 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True)
class Bipartition:
    """A cut ``M | complement(M)`` of ``n`` subsystems.

    ``members`` holds the 0-based indices in ``M``. The canonical
    representative of the pair ``{M, complement(M)}`` is the one that
    contains subsystem 0.
    """

    n: int
    members: tuple[int, ...]

    def __post_init__(self):
        members = tuple(sorted(set(int(i) for i in self.members)))
        if not members or len(members) >= self.n:
            raise ValueError(f"{members} is not a strict nonempty subset of {self.n} parties")
        if members[0] < 0 or members[-1] >= self.n:
            raise ValueError(f"indices {members} out of range for n={self.n}")
        object.__setattr__(self, "members", members)

    @property
    def complement(self) -> "Bipartition":
        return Bipartition(self.n, tuple(i for i in range(self.n) if i not in self.members))

    @property
    def is_canonical(self) -> bool:
        return self.members[0] == 0

    def canonical(self) -> "Bipartition":
        return self if self.is_canonical else self.complement

    def label(self) -> str:
        rest = self.complement.members
        return "".join(map(str, self.members)) + "|" + "".join(map(str, rest))

    def __contains__(self, i: int) -> bool:
        return i in self.members


def bipartitions(n: int, canonical_only: bool = True) -> list[Bipartition]:
    """All bipartitions of ``n`` parties, ordered by bitmask.

    With ``canonical_only`` the ``2**(n-1) - 1`` representatives containing
    party 0 are returned, otherwise all ``2**n - 2`` proper subsets.
    """
    out = []
    for mask in range(1, 2**n - 1):
        members = tuple(i for i in range(n) if mask >> (n - 1 - i) & 1)
        b = Bipartition(n, members)
        if canonical_only and not b.is_canonical:
            continue
        out.append(b)
    return out


def _as_members(m, n: int) -> tuple[int, ...]:
    if isinstance(m, Bipartition):
        if m.n != n:
            raise ValueError(f"bipartition over {m.n} parties applied to {n}-party operator")
        return m.members
    members = tuple(sorted(set(int(i) for i in m)))
    if members and (members[0] < 0 or members[-1] >= n):
        raise ValueError(f"indices {members} out of range for n={n}")
    return members


def _dims_for(op: np.ndarray, dims: Sequence[int] | None) -> list[int]:
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {op.shape}")
    if dims is None:
        return [2] * n_qubits(op.shape[0])
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != op.shape[0]:
        raise ValueError(f"dims {dims} do not match matrix side {op.shape[0]}")
    return dims


def kron(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of any number of matrices, left to right."""
    return reduce(np.kron, ops)


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return a.shape[0] == a.shape[1] and np.abs(a - a.conj().T).max() <= scaled_tol(a, tol)


def check_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    if not is_hermitian(np.asarray(a), tol):
        raise ValueError("matrix is not Hermitian")


def partial_transpose(op: np.ndarray, m, dims: Sequence[int] | None = None) -> np.ndarray:
    """Transpose the subsystems in ``m`` in the computational product basis.

    ``m`` is a :class:`Bipartition` or an iterable of subsystem indices.
    """
    op = np.asarray(op)
    dims = _dims_for(op, dims)
    n = len(dims)
    members = _as_members(m, n)
    t = op.reshape(dims + dims)
    axes = list(range(2 * n))
    for i in members:
        axes[i], axes[n + i] = axes[n + i], axes[i]
    return t.transpose(axes).reshape(op.shape)


def partial_trace(op: np.ndarray, keep: Iterable[int], dims: Sequence[int] | None = None) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``."""
    op = np.asarray(op)
    dims = _dims_for(op, dims)
    n = len(dims)
    keep = _as_members(keep, n)
    t = op.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    # trace from the highest index down so earlier axis numbers stay valid
    for k, i in enumerate(sorted(traced, reverse=True)):
        n_left = n - k
        t = np.trace(t, axis1=i, axis2=i + n_left)
    d = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(d, d)


def jacobi_eigh(a: np.ndarray, tol: float = 1e-14, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigensolver for complex Hermitian matrices.

    Each pair ``(p, q)`` is annihilated by ``J = diag(1, e^{-i phi}) R(theta)``:
    the phase makes the 2x2 pivot block real, the real rotation diagonalises it.
    Quadratically convergent; O(d^3) per sweep.
    """
    a = np.array(a, dtype=complex)
    check_hermitian(a, 1e-10)
    d = a.shape[0]
    v = np.eye(d, dtype=complex)
    scale = max(np.abs(a).max(), 1e-300)
    for _ in range(max_sweeps):
        # direct norm; subtracting the diagonal mass from the total cancels below ~1e-8
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                r = abs(a[p, q])
                if r <= 1e-300:
                    continue
                ph = a[p, q] / r
                theta = 0.5 * np.arctan2(2 * r, (a[q, q] - a[p, p]).real)
                c, s = np.cos(theta), np.sin(theta)
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * np.conj(ph) * aq
                a[:, q] = s * ap + c * np.conj(ph) * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - s * ph * aq
                a[q, :] = s * ap + c * ph * aq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * np.conj(ph) * vq
                v[:, q] = s * vp + c * np.conj(ph) * vq
    w = np.diag(a).real
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def hermitian_eigen(h: np.ndarray, method: str = "lapack") -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    ``method="jacobi"`` selects the dependency-free :func:`jacobi_eigh`.
    """
    h = np.asarray(h)
    check_hermitian(h)
    if method == "lapack":
        return np.linalg.eigh(h)
    if method == "jacobi":
        return jacobi_eigh(h)
    raise ValueError(f"unknown eigensolver {method!r}")


def min_eig(h: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (h + h.conj().T))[0])


def schmidt_coefficients(psi: np.ndarray, m, dims: Sequence[int] | None = None, tol: float = 1e-10) -> np.ndarray:
    """Schmidt coefficients of ``psi`` across the cut ``m``, descending."""
    psi = np.asarray(psi, dtype=complex).ravel()
    if abs(np.linalg.norm(psi) - 1) > tol:
        raise ValueError("state vector is not normalized")
    if dims is None:
        dims = [2] * n_qubits(psi.size)
    dims = list(dims)
    n = len(dims)
    members = _as_members(m, n)
    rest = [i for i in range(n) if i not in members]
    t = psi.reshape(dims).transpose(list(members) + rest)
    da = int(np.prod([dims[i] for i in members]))
    return np.linalg.svd(t.reshape(da, -1), compute_uv=False)


@dataclass(frozen=True)
class PauliString:
    """A weighted tensor product of single-qubit Pauli matrices."""

    letters: str
    coefficient: complex = 1.0

    def __post_init__(self):
        letters = self.letters.upper()
        if not letters or set(letters) - set("IXYZ"):
            raise ValueError(f"invalid Pauli string {self.letters!r}")
        object.__setattr__(self, "letters", letters)

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def weight(self) -> int:
        return sum(c != "I" for c in self.letters)

    def matrix(self) -> np.ndarray:
        return pauli_string_matrix(self)


def pauli_string_matrix(p: PauliString | str) -> np.ndarray:
    if isinstance(p, str):
        p = PauliString(p)
    return p.coefficient * kron(*(PAULI[c] for c in p.letters))


def pauli_expansion(op: np.ndarray, tol: float = 0.0) -> dict[str, complex]:
    """Coefficients ``c_s`` with ``op = sum_s c_s * s`` over Pauli strings ``s``.

    Uses the fast Walsh-Hadamard style contraction one qubit at a time, so
    cost is O(4^n * n) rather than O(16^n).
    """
    op = np.asarray(op, dtype=complex)
    n = n_qubits(op.shape[0])
    # basis change per qubit: c[P] = tr(P A) / 2 for a single qubit
    basis = np.stack([PAULI[c].T for c in "IXYZ"]) / 2  # (4, 2, 2): contracts a[i, j] * P[j, i]
    t = op.reshape([2] * (2 * n))
    # interleave row/col indices per qubit: (r0, c0, r1, c1, ...)
    t = t.transpose([k for i in range(n) for k in (i, n + i)])
    for _ in range(n):
        # contract the leading (r, c) pair and move the Pauli index to the end
        t = np.tensordot(t, basis, axes=([0, 1], [1, 2]))
    coeffs = t.reshape(-1)
    out = {}
    for idx, c in enumerate(coeffs):
        if abs(c) > tol:
            letters = "".join("IXYZ"[(idx >> (2 * (n - 1 - k))) & 3] for k in range(n))
            out[letters] = complex(c)
    return out


def from_pauli_expansion(terms: dict[str, complex] | Iterable[tuple[str, complex]]) -> np.ndarray:
    items = terms.items() if isinstance(terms, dict) else terms
    total = None
    for letters, c in items:
        term = c * pauli_string_matrix(letters)
        total = term if total is None else total + term
    if total is None:
        raise ValueError("empty Pauli expansion")
    return total


def realify(h: np.ndarray) -> np.ndarray:
    """Real symmetric embedding ``[[Re H, -Im H], [Im H, Re H]]``."""
    h = np.asarray(h)
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])


def complexify(x: np.ndarray) -> np.ndarray:
    """Left inverse of :func:`realify`; averages the two redundant copies."""
    d = x.shape[0] // 2
    re = 0.5 * (x[:d, :d] + x[d:, d:])
    im = 0.5 * (x[d:, :d] - x[:d, d:])
    return re + 1j * im


def apply_local(op: np.ndarray, unitaries: Sequence[np.ndarray]) -> np.ndarray:
    """Conjugate ``op`` by the product unitary ``U_0 (x) U_1 (x) ...``."""
    u = kron(*unitaries)
    return u @ op @ u.conj().T
