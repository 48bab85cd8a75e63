"""Reference states, graph-state machinery, noise mixing and random states."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .linalg import PauliString, check_hermitian, n_qubits, pauli_string_matrix

DENSITY_TOL = 1e-10


def _basis_index(bits: Sequence[int]) -> int:
    idx = 0
    for b in bits:
        idx = 2 * idx + int(b)
    return idx


def ket(bits: str | Sequence[int]) -> np.ndarray:
    """Computational basis vector, e.g. ``ket("0101")``."""
    bits = [int(b) for b in bits]
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[_basis_index(bits)] = 1
    return v


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    return np.outer(psi, psi.conj())


def ghz(n: int) -> np.ndarray:
    if n < 2:
        raise ValueError("GHZ state needs n >= 2")
    v = np.zeros(2**n, dtype=complex)
    v[0] = v[-1] = 1 / np.sqrt(2)
    return v


def dicke(n: int, k: int) -> np.ndarray:
    """Equal superposition of all weight-``k`` basis states of ``n`` qubits."""
    if n < 2 or not 0 <= k <= n:
        raise ValueError(f"invalid Dicke parameters n={n}, k={k}")
    v = np.zeros(2**n, dtype=complex)
    for ones in combinations(range(n), k):
        v[sum(1 << (n - 1 - i) for i in ones)] = 1
    return v / np.linalg.norm(v)


def w_state(n: int) -> np.ndarray:
    return dicke(n, 1)


def singlet4() -> np.ndarray:
    """Four-qubit total-spin-zero singlet."""
    v = 2 * ket("0011") + 2 * ket("1100") - ket("0101") - ket("0110") - ket("1001") - ket("1010")
    return v / (2 * np.sqrt(3))


@dataclass(frozen=True)
class GraphSpec:
    """Simple undirected graph on vertices ``0..n-1``."""

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        norm = set()
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValueError(f"self-loop on vertex {a}")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ValueError(f"edge ({a}, {b}) out of range for n={self.n}")
            norm.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def path(cls, n: int) -> "GraphSpec":
        return cls(n, frozenset((i, i + 1) for i in range(n - 1)))

    def neighbors(self, i: int) -> set[int]:
        return {b if a == i else a for a, b in self.edges if i in (a, b)}

    def closed_neighborhood(self, i: int) -> set[int]:
        return self.neighbors(i) | {i}


def stabilizer_generators(g: GraphSpec) -> list[PauliString]:
    """``g_i = X_i prod_{k in N(i)} Z_k`` for every vertex."""
    gens = []
    for i in range(g.n):
        letters = ["I"] * g.n
        letters[i] = "X"
        for k in g.neighbors(i):
            letters[k] = "Z"
        gens.append(PauliString("".join(letters)))
    return gens


def _edge_parity(g: GraphSpec) -> np.ndarray:
    """``sum_{(i,j) in E} x_i x_j mod 2`` for every basis index ``x``."""
    x = np.arange(2**g.n)
    bit = lambda i: (x >> (g.n - 1 - i)) & 1  # noqa: E731
    par = np.zeros_like(x)
    for a, b in g.edges:
        par ^= bit(a) & bit(b)
    return par


def graph_basis_vector(g: GraphSpec, a: Sequence[int]) -> np.ndarray:
    """Joint eigenvector with ``g_i v = (-1)^{a_i} v``.

    Amplitudes are ``2^{-n/2} (-1)^{x.a + sum_E x_i x_j}``; the ``a`` part is
    the ``Z`` flips that turn the graph state into the labelled basis vector.
    """
    a = [int(b) for b in a]
    if len(a) != g.n:
        raise ValueError(f"label of length {len(a)} for {g.n}-vertex graph")
    x = np.arange(2**g.n)
    par = _edge_parity(g)
    for i, ai in enumerate(a):
        if ai:
            par = par ^ ((x >> (g.n - 1 - i)) & 1)
    return (1 - 2 * par).astype(complex) / np.sqrt(2**g.n)


def graph_basis(g: GraphSpec) -> np.ndarray:
    """Unitary whose column ``idx`` is the graph basis vector labelled by ``idx``'s bits."""
    x = np.arange(2**g.n)
    par = _edge_parity(g)
    # (-1)^{x.a} is the Sylvester-Hadamard entry H[x, a]
    dots = np.bitwise_count(x[:, None] & x[None, :])
    sign = (1 - 2 * ((dots + par[:, None]) & 1)).astype(complex)
    return sign / np.sqrt(2**g.n)


def graph_state(g: GraphSpec) -> np.ndarray:
    return graph_basis_vector(g, [0] * g.n)


def linear_cluster(n: int) -> tuple[np.ndarray, list[PauliString]]:
    """Linear cluster state and its generators ``X_1 Z_2, Z_{i-1} X_i Z_{i+1}, Z_{n-1} X_n``."""
    if n < 2:
        raise ValueError("linear cluster needs n >= 2")
    g = GraphSpec.path(n)
    return graph_state(g), stabilizer_generators(g)


def stabilizer_projector(gens: Sequence[PauliString], signs: Sequence[int] | None = None) -> np.ndarray:
    """``prod_i (1 + s_i g_i) / 2`` as a dense matrix."""
    d = 2 ** gens[0].n
    out = np.eye(d, dtype=complex)
    signs = signs if signs is not None else [1] * len(gens)
    for s, gen in zip(signs, gens):
        out = out @ (np.eye(d) + s * pauli_string_matrix(gen)) / 2
    return out


def white_noise_mix(psi: np.ndarray, p: float) -> np.ndarray:
    """``(1 - p) |psi><psi| + p * 1 / d``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"noise weight {p} outside [0, 1]")
    psi = np.asarray(psi, dtype=complex).ravel()
    if abs(np.linalg.norm(psi) - 1) > 1e-10:
        raise ValueError("state vector is not normalized")
    d = psi.size
    return (1 - p) * projector(psi) + p * np.eye(d) / d


def check_density_matrix(rho: np.ndarray, tol: float = DENSITY_TOL) -> np.ndarray:
    """Validate trace one, Hermiticity and positivity; returns ``rho`` as complex."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got {rho.shape}")
    check_hermitian(rho)
    if abs(np.trace(rho).real - 1) > tol:
        raise ValueError(f"trace {np.trace(rho).real} != 1")
    if np.linalg.eigvalsh(rho)[0] < -tol:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


# -- random states ---------------------------------------------------------
#
# Streams: every sample ``i`` drawn under seed ``s`` uses the counter-based
# Philox generator keyed by ``SeedSequence(s, spawn_key=(i,))``.  Samples are
# therefore independent of how a run is split over workers.


def rng_stream(seed: int, index: int | None = None) -> np.random.Generator:
    key = () if index is None else (int(index),)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=key)))


def ginibre(dim: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(ginibre(dim, rng))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density_hs(dim: int, seed: int | np.random.Generator) -> np.ndarray:
    """Hilbert-Schmidt distributed density matrix ``G G^+ / tr(G G^+)``."""
    if dim < 2:
        raise ValueError("dimension must be at least 2")
    rng = seed if isinstance(seed, np.random.Generator) else rng_stream(seed)
    g = ginibre(dim, rng)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_density_bures(dim: int, seed: int | np.random.Generator) -> np.ndarray:
    """Bures distributed density matrix ``(1 + U) G G^+ (1 + U)^+`` normalised."""
    if dim < 2:
        raise ValueError("dimension must be at least 2")
    rng = seed if isinstance(seed, np.random.Generator) else rng_stream(seed)
    g = ginibre(dim, rng)
    u = haar_unitary(dim, rng)
    a = (np.eye(dim) + u) @ g
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_pure(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_biseparable(n: int, rng: np.random.Generator, terms: int = 4) -> np.ndarray:
    """Dirichlet-weighted mixture of pure states, each a product across a random cut."""
    from .linalg import bipartitions

    cuts = bipartitions(n)
    weights = rng.dirichlet(np.ones(terms))
    rho = np.zeros((2**n, 2**n), dtype=complex)
    for w in weights:
        cut = cuts[rng.integers(len(cuts))]
        a = random_pure(2 ** len(cut.members), rng)
        b = random_pure(2 ** (n - len(cut.members)), rng)
        psi = reorder_product(a, b, cut.members, n)
        rho += w * projector(psi)
    return rho


def reorder_product(a: np.ndarray, b: np.ndarray, members: Iterable[int], n: int) -> np.ndarray:
    """``a`` on qubits ``members`` tensored with ``b`` on the rest, in standard order."""
    members = list(members)
    rest = [i for i in range(n) if i not in members]
    t = np.kron(a, b).reshape([2] * n)
    order = members + rest
    return t.transpose(np.argsort(order)).reshape(-1)


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


def apply_pauli(letters: str, psi: np.ndarray) -> np.ndarray:
    return pauli_string_matrix(letters) @ psi


def qubit_count(psi_or_rho: np.ndarray) -> int:
    return n_qubits(np.asarray(psi_or_rho).shape[0])
