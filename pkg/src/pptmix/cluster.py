"""Analytic fully decomposable witnesses for linear cluster states.

All indices are 0-based.  Graph-basis labels are bit tuples ``a`` with
``g_i |a> = (-1)^{a_i} |a>``; in that basis ``Z_k`` flips bit ``k``, which is
how the per-cut operators ``P_M`` below are assembled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .linalg import Bipartition, bipartitions, partial_transpose
from .states import GraphSpec, graph_basis, stabilizer_generators

# Hadamards on the two end qubits map X_1 Z_2 -> Z_1 Z_2 and Z_{n-1} X_n -> Z_{n-1} Z_n
H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


@dataclass(frozen=True)
class BSet:
    """Qubits ``beta_i`` whose closed neighbourhoods on the path are pairwise disjoint."""

    n: int
    members: tuple[int, ...]

    def __post_init__(self):
        members = tuple(sorted(int(b) for b in self.members))
        object.__setattr__(self, "members", members)
        if self.n < 4:
            raise ValueError("the construction needs at least four qubits")
        if len(set(members)) != len(members):
            raise ValueError("repeated B-set member")
        if len(members) < 2:
            raise ValueError("B-set needs at least two members")
        if members[0] < 0 or members[-1] >= self.n:
            raise ValueError(f"B-set {members} out of range for n={self.n}")
        g = GraphSpec.path(self.n)
        for x, y in zip(members, members[1:]):
            if g.closed_neighborhood(x) & g.closed_neighborhood(y):
                raise ValueError(f"closed neighbourhoods of {x} and {y} overlap")

    @property
    def m(self) -> int:
        return len(self.members)

    def window(self, i: int) -> tuple[int, ...]:
        """Qubits of the closed neighbourhood of ``beta_i`` in increasing order."""
        b = self.members[i]
        return tuple(q for q in (b - 1, b, b + 1) if 0 <= q < self.n)


def default_bset(n: int) -> BSet:
    """Every third qubit starting from the first."""
    if n <= 3:
        raise ValueError("no valid B-set for three or fewer qubits")
    return BSet(n, tuple(range(0, n, 3)))


def _graph(n: int) -> GraphSpec:
    return GraphSpec.path(n)


def _label_index(bits) -> int:
    idx = 0
    for b in bits:
        idx = 2 * idx + int(b)
    return idx


def graph_projector_sum(n: int, labels) -> np.ndarray:
    """``sum_a |a><a|`` over graph-basis labels ``a`` of the linear cluster."""
    u = graph_basis(_graph(n))
    cols = sorted({_label_index(a) for a in labels})
    if not cols:
        return np.zeros((2**n, 2**n), dtype=complex)
    v = u[:, cols]
    return v @ v.conj().T


def pplus_labels(n: int, b: BSet) -> list[tuple[int, ...]]:
    """Graph-basis labels with at least two excitations on the B-set."""
    out = []
    for a in product((0, 1), repeat=n):
        if sum(a[q] for q in b.members) >= 2:
            out.append(a)
    return out


def build_pplus(n: int, b: BSet | None = None) -> np.ndarray:
    """``P_+ = sum_s prod_{i in B} (s_i g_i + 1) / 2`` over sign vectors with two or more ``-1``."""
    b = b or default_bset(n)
    gens = [g.matrix() for g in stabilizer_generators(_graph(n))]
    d = 2**n
    out = np.zeros((d, d), dtype=complex)
    for s in product((1, -1), repeat=b.m):
        if s.count(-1) < 2:
            continue
        term = np.eye(d, dtype=complex)
        for si, q in zip(s, b.members):
            term = term @ (si * gens[q] + np.eye(d)) / 2
        out += term
    return out


def cluster_projector(n: int) -> np.ndarray:
    u = graph_basis(_graph(n))
    return np.outer(u[:, 0], u[:, 0].conj())


def build_cluster_witness(n: int, b: BSet | None = None) -> np.ndarray:
    """``W = 1/2 - |Cl_n><Cl_n| - P_+ / 2``."""
    b = b or default_bset(n)
    if b.n != n:
        raise ValueError(f"B-set is for n={b.n}, not {n}")
    return 0.5 * np.eye(2**n) - cluster_projector(n) - 0.5 * build_pplus(n, b)


def end_hadamards(n: int) -> np.ndarray:
    """Local frame change used for the four-qubit witness written with ``Z Z`` generators."""
    ops = [H] + [np.eye(2)] * (n - 2) + [H]
    out = ops[0]
    for o in ops[1:]:
        out = np.kron(out, o)
    return out


# -- per-cut construction ----------------------------------------------------

CASE_FLIPS = {
    # (window length, word) -> (case label, offsets of the flipped qubits relative to beta)
    (2, (0, 1)): ("2.(i).I", None),
    (2, (1, 0)): ("2.(i).I", None),
    (2, (0, 0)): ("2.(i).II", ()),
    (2, (1, 1)): ("2.(i).II", ()),
    (3, (1, 1, 0)): ("2.(ii).I", (1,)),
    (3, (0, 0, 1)): ("2.(ii).I", (1,)),
    (3, (0, 1, 0)): ("2.(ii).II", (-1, 1)),
    (3, (1, 0, 1)): ("2.(ii).II", (-1, 1)),
    (3, (1, 0, 0)): ("2.(ii).III", (-1,)),
    (3, (0, 1, 1)): ("2.(ii).III", (-1,)),
    (3, (0, 0, 0)): ("2.(ii).IV", ()),
    (3, (1, 1, 1)): ("2.(ii).IV", ()),
}


@dataclass
class PmStep:
    index: int
    word: tuple[int, ...]
    case: str
    flips: tuple[int, ...]

    @property
    def changed(self) -> bool:
        return bool(self.flips)


@dataclass
class PmConstruction:
    m: Bipartition
    steps: list[PmStep]
    r: int
    t: int | None
    labels: list[tuple[int, ...]]
    p_m: np.ndarray = field(repr=False)


def construct_pm(n: int, b: BSet, m: Bipartition) -> PmConstruction:
    """Build ``P_M`` by walking the B-set and flipping graph-basis bits.

    Each ``beta_i`` whose closed neighbourhood straddles the cut doubles the
    current label set by a ``Z`` flip chosen from its window word.  With ``r``
    such steps and ``t`` the last one, ``P_M`` is the label set before step
    ``t`` minus the all-zero label, or zero when ``r <= 1``.
    """
    if m.n != n:
        raise ValueError(f"bipartition on {m.n} qubits, expected {n}")
    labels: list[frozenset] = [frozenset()]  # sets of flipped bits; frozenset() is the cluster state
    history = [list(labels)]
    steps = []
    for i, beta in enumerate(b.members):
        win = b.window(i)
        word = tuple(int(q in m) for q in win)
        case, offsets = CASE_FLIPS[(len(win), word)]
        if offsets is None:
            # boundary qubit: flip its single neighbour
            offsets = (win[1] - beta,) if win[0] == beta else (win[0] - beta,)
        flips = tuple(beta + o for o in offsets)
        if flips:
            f = frozenset(flips)
            labels = labels + [lab ^ f for lab in labels]
        history.append(list(labels))
        steps.append(PmStep(i, word, case, flips))
    changed = [s.index for s in steps if s.changed]
    r = len(changed)
    t = changed[-1] if changed else None
    if r <= 1:
        final: list[tuple[int, ...]] = []
    else:
        # history[k] is the label set after k steps; step t (0-based) starts from history[t]
        final = []
        for lab in history[t]:
            if lab:
                final.append(tuple(int(q in lab) for q in range(n)))
    p = graph_projector_sum(n, final)
    return PmConstruction(m, steps, r, t, final, p)


def straddling_count(n: int, b: BSet, m: Bipartition) -> int:
    """Number of ``beta_i`` whose closed neighbourhood meets both sides of the cut."""
    count = 0
    for i in range(b.m):
        inside = {q in m for q in b.window(i)}
        count += len(inside) == 2
    return count


# -- verification ------------------------------------------------------------------


@dataclass
class CutCheck:
    m: Bipartition
    r: int
    min_eig_p: float
    min_eig_q: float
    residual: float

    def passed(self, tol: float) -> bool:
        return self.min_eig_q >= -tol and self.min_eig_p >= -tol and self.residual <= tol


@dataclass
class DecomposabilityReport:
    checks: list[CutCheck]
    tol: float

    @property
    def n_passed(self) -> int:
        return sum(c.passed(self.tol) for c in self.checks)

    @property
    def passed(self) -> bool:
        return self.n_passed == len(self.checks)

    @property
    def worst_q(self) -> float:
        return min(c.min_eig_q for c in self.checks)

    @property
    def worst_p(self) -> float:
        return min(c.min_eig_p for c in self.checks)

    def failures(self) -> list[Bipartition]:
        return [c.m for c in self.checks if not c.passed(self.tol)]

    def summary(self) -> str:
        return f"{self.n_passed}/{len(self.checks)} bipartitions PSD"


def check_cut(w: np.ndarray, n: int, b: BSet, m: Bipartition) -> CutCheck:
    con = construct_pm(n, b, m)
    q = partial_transpose(w - con.p_m, m)
    resid = float(np.abs(w - con.p_m - partial_transpose(q, m)).max())
    ep = np.linalg.eigvalsh(con.p_m)[0] if con.labels else 0.0
    eq = np.linalg.eigvalsh(0.5 * (q + q.conj().T))[0]
    return CutCheck(m, con.r, float(ep), float(eq), resid)


def _check_cut_task(args):
    return check_cut(*args)


def verify_full_decomposability(
    w: np.ndarray, n: int, b: BSet | None = None, tol: float = 1e-9, jobs: int = 1
) -> DecomposabilityReport:
    """Check ``P_M >= 0`` and ``Q_M = T_M(W - P_M) >= 0`` on every canonical cut."""
    b = b or default_bset(n)
    cuts = bipartitions(n)
    tasks = [(w, n, b, m) for m in cuts]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs) as pool:
            checks = list(pool.map(_check_cut_task, tasks))
    else:
        checks = [check_cut(*t) for t in tasks]
    return DecomposabilityReport(checks, tol)


# -- white-noise tolerance -------------------------------------------------------


def noise_tolerance_exact(n: int) -> Fraction:
    """``(1 - 2^{1-n} + (k + 1) 2^{-k})^{-1}`` with ``k = floor((n + 2) / 3)``."""
    if n < 4:
        raise ValueError("formula holds for n >= 4")
    k = (n + 2) // 3
    return 1 / (1 - Fraction(1, 2 ** (n - 1)) + Fraction(k + 1, 2**k))


def noise_tolerance_formula(n: int) -> float:
    return float(noise_tolerance_exact(n))


def witness_zero_crossing(w: np.ndarray, psi: np.ndarray) -> float:
    """Root of the affine map ``p -> tr(W rho(p))`` for white-noise mixtures of ``psi``."""
    psi = np.asarray(psi).ravel()
    d = psi.size
    v0 = float(np.real(psi.conj() @ w @ psi))
    v1 = float(np.trace(w).real) / d
    if v0 >= 0 or v1 <= v0:
        raise ValueError("witness value does not cross zero on the noise line")
    return v0 / (v0 - v1)
