"""Fully decomposable witnesses: the PPT-mixture SDP and its variants.

A witness ``W`` is fully decomposable when for every cut ``M`` it splits as
``W = P_M + T_M(Q_M)`` with ``P_M, Q_M >= 0``.  Minimising ``tr(W rho)`` over
such witnesses (``tr W = 1``) certifies genuine multipartite entanglement
whenever the optimum is negative.

Each ``P_M`` and ``Q_M`` is a realified Hermitian block of the primal SDP.
``W`` is read off the first cut, and the remaining cuts are tied to it by
entrywise equalities; partial transposition only permutes matrix entries so
every equality row stays sparse.
"""

from __future__ import annotations

import enum
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations, product
from typing import Callable, Sequence

import numpy as np

from . import sdp
from .linalg import (
    Bipartition,
    PauliString,
    bipartitions,
    n_qubits,
    partial_transpose,
    pauli_string_matrix,
    realify,
    complexify,
)
from .states import (
    check_density_matrix,
    random_density_bures,
    random_density_hs,
    rng_stream,
    white_noise_mix,
)

log = logging.getLogger(__name__)

DECISION_THRESHOLD = 1e-7
CERTIFICATE_TOL = 1e-7


class Mode(str, enum.Enum):
    FULLY_DECOMPOSABLE = "full"
    FULLY_PPT = "fully-ppt"
    RESTRICTED = "restricted"
    MONOTONE = "monotone"


class Verdict(str, enum.Enum):
    GME = "GenuineMultipartiteEntangled"
    PPT_MIXTURE = "PptMixture"


class InfeasibleWitness(sdp.SolverError):
    """No normalised witness exists in the requested class."""


# -- certificates -------------------------------------------------------------


@dataclass
class WitnessCertificate:
    w: np.ndarray
    p: dict[Bipartition, np.ndarray]
    q: dict[Bipartition, np.ndarray]
    mode: Mode
    observables: list[PauliString] | None = None
    coefficients: np.ndarray | None = None

    @property
    def n(self) -> int:
        return n_qubits(self.w.shape[0])


@dataclass
class CertificateReport:
    decomposition_residual: float
    min_eig_p: float
    min_eig_q: float
    max_eig_p: float
    max_eig_q: float
    trace_error: float
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def verify_certificate(cert: WitnessCertificate, tol: float = CERTIFICATE_TOL) -> CertificateReport:
    """Re-check every decomposition of ``cert`` by eigendecomposition."""
    resid = 0.0
    min_p = min_q = np.inf
    max_p = max_q = -np.inf
    for m in cert.p:
        p, q = cert.p[m], cert.q[m]
        resid = max(resid, np.abs(cert.w - p - partial_transpose(q, m)).max())
        ep = np.linalg.eigvalsh(0.5 * (p + p.conj().T))
        eq = np.linalg.eigvalsh(0.5 * (q + q.conj().T))
        min_p, max_p = min(min_p, ep[0]), max(max_p, ep[-1])
        min_q, max_q = min(min_q, eq[0]), max(max_q, eq[-1])
    tr_err = abs(np.trace(cert.w).real - 1.0)
    report = CertificateReport(resid, min_p, min_q, max_p, max_q, tr_err)
    if not cert.p:
        report.failures.append("no bipartitions")
    if resid > tol:
        report.failures.append(f"W != P_M + Q_M^T_M (residual {resid:.2e})")
    if min_p < -tol:
        report.failures.append(f"P_M not PSD (min eigenvalue {min_p:.2e})")
    if min_q < -tol:
        report.failures.append(f"Q_M not PSD (min eigenvalue {min_q:.2e})")
    if cert.mode is Mode.MONOTONE:
        if max(max_p, max_q) > 1 + tol:
            report.failures.append(f"P_M or Q_M exceeds identity (max eigenvalue {max(max_p, max_q):.2e})")
    elif tr_err > tol:
        report.failures.append(f"tr W = {np.trace(cert.w).real:.9f}")
    if cert.mode is Mode.FULLY_PPT:
        worst = max(np.abs(p).max() for p in cert.p.values())
        if worst > tol:
            report.failures.append(f"fully PPT witness has nonzero P_M ({worst:.2e})")
    if cert.observables is not None:
        span = sum(c * o.matrix() for c, o in zip(cert.coefficients, cert.observables))
        if np.abs(span - cert.w).max() > tol:
            report.failures.append("W is not in the span of the observables")
    return report


# -- observables ----------------------------------------------------------------


@dataclass
class ObservableBasis:
    observables: list[PauliString]

    def __post_init__(self):
        seen = {}
        for o in self.observables:
            seen.setdefault(o.letters, PauliString(o.letters))
        self.observables = list(seen.values())
        if not self.observables:
            raise ValueError("observable basis is empty")
        if len({o.n for o in self.observables}) != 1:
            raise ValueError("observables act on different numbers of qubits")

    @property
    def n(self) -> int:
        return self.observables[0].n

    def __len__(self) -> int:
        return len(self.observables)

    def __iter__(self):
        return iter(self.observables)

    def letters(self) -> list[str]:
        return [o.letters for o in self.observables]

    def union(self, other: "ObservableBasis") -> "ObservableBasis":
        return ObservableBasis(self.observables + other.observables)

    @classmethod
    def full(cls, n: int) -> "ObservableBasis":
        return cls([PauliString("".join(s)) for s in product("IXYZ", repeat=n)])


def measurement_setting_closure(setting: PauliString | str) -> ObservableBasis:
    """All strings obtained from a local setting by replacing letters with ``I``."""
    letters = setting.letters if isinstance(setting, PauliString) else setting.upper()
    if "I" in letters:
        raise ValueError("a measurement setting has no identity letters")
    out = []
    for mask in product((0, 1), repeat=len(letters)):
        out.append(PauliString("".join(c if keep else "I" for c, keep in zip(letters, mask))))
    return ObservableBasis(out)


def distinct_permutations(letters: str) -> list[str]:
    return sorted({"".join(p) for p in permutations(letters)})


def settings_closure(settings: Sequence[str]) -> ObservableBasis:
    """Closure of several settings together with all their distinct permutations."""
    obs: list[PauliString] = []
    for s in settings:
        for perm in distinct_permutations(s):
            obs.extend(measurement_setting_closure(perm))
    return ObservableBasis(obs)


DICKE_SETTINGS = ("XXXX", "YYYY", "ZZZZ", "XXYY", "XXZZ", "YYZZ")


def dicke_stage_basis(stage: int) -> ObservableBasis:
    """Observables of stage ``stage`` (2..6): the first ``stage`` settings of the sequence."""
    if not 2 <= stage <= len(DICKE_SETTINGS):
        raise ValueError(f"stage must be in 2..{len(DICKE_SETTINGS)}")
    return settings_closure(DICKE_SETTINGS[:stage])


# -- SDP assembly -----------------------------------------------------------------


@lru_cache(maxsize=None)
def _pt_source(n: int, members: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
    """``(a', b')`` with ``T_M(H)[a, b] = H[a', b']`` for every entry."""
    d = 2**n
    idx = np.arange(d * d).reshape(d, d)
    src = partial_transpose(idx, members) if members else idx
    return src // d, src % d


@lru_cache(maxsize=None)
def _hermitian_rows(d: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Real coordinates of a Hermitian matrix: ``Re`` on ``a <= b``, ``Im`` on ``a < b``."""
    iu, ju = np.triu_indices(d)
    re = (iu, ju, np.zeros(iu.size, dtype=np.int64))
    off = iu != ju
    im = (iu[off], ju[off], np.ones(off.sum(), dtype=np.int64))
    return tuple(np.concatenate(x) for x in zip(re, im))


def _entry_terms(block: int, d: int, members: tuple[int, ...], scale: float, real: bool):
    """COO terms expressing each real coordinate of ``scale * T_M(H(X_block))``."""
    n = n_qubits(d)
    a, b, part = _hermitian_rows(d)
    sa, sb = _pt_source(n, members)
    a2, b2 = sa[a, b], sb[a, b]
    rows = np.arange(a.size)
    re = part == 0
    if real:
        # symmetric blocks carry H directly and only the Re rows exist
        k_ = rows[re]
        return k_, np.full(k_.size, block), a2[re], b2[re], np.full(k_.size, float(scale))
    im = ~re
    # Re H[a,b] = (X[a,b] + X[d+a,d+b]) / 2,  Im H[a,b] = (X[d+a,b] - X[a,d+b]) / 2
    r_ = np.concatenate([a2[re], d + a2[re], d + a2[im], a2[im]])
    c_ = np.concatenate([b2[re], d + b2[re], b2[im], d + b2[im]])
    k_ = np.concatenate([rows[re], rows[re], rows[im], rows[im]])
    v_ = 0.5 * scale * np.concatenate([np.ones(re.sum() * 2), np.ones(im.sum()), -np.ones(im.sum())])
    return k_, np.full(k_.size, block), r_, c_, v_


def _embed(h: np.ndarray, real: bool) -> np.ndarray:
    """Matrix ``E`` with ``tr(h H) = <E, X>`` for the block ``X`` encoding ``H``."""
    return h.real.copy() if real else realify(h) / 2


def _unembed(x: np.ndarray, real: bool) -> np.ndarray:
    return x.astype(complex) if real else complexify(x)


@dataclass
class WitnessProblem:
    problem: sdp.SdpProblem
    cuts: list[Bipartition]
    p_blocks: dict[Bipartition, int]
    q_blocks: dict[Bipartition, int]
    mode: Mode
    real: bool
    observables: list[PauliString] | None = None


def _span_complement_rows(n: int, basis: ObservableBasis) -> list[str]:
    """Pauli strings outside ``basis``; ``W`` must have zero overlap with each."""
    inside = set(basis.letters())
    return ["".join(s) for s in product("IXYZ", repeat=n) if "".join(s) not in inside]


def _trace_terms(block: int, members: tuple[int, ...], op: np.ndarray, real: bool):
    """COO terms for ``tr(op * T_M(H(X_block)))`` as one constraint row."""
    # tr(op T_M(H)) = tr(T_M(op) H)
    e = _embed(partial_transpose(op, members) if members else op, real)
    e = 0.5 * (e + e.T)
    rr, cc = np.nonzero(np.triu(np.abs(e) > 0))
    vals = np.where(rr == cc, e[rr, cc], 2 * e[rr, cc])
    return np.zeros(rr.size, dtype=np.int64), np.full(rr.size, block), rr, cc, vals


def build_witness_problem(
    rho: np.ndarray,
    mode: Mode | str = Mode.FULLY_DECOMPOSABLE,
    basis: ObservableBasis | None = None,
    all_subsets: bool = False,
    real: bool | None = None,
) -> WitnessProblem:
    """Assemble the witness SDP.

    Parameters
    ----------
    real : bool, optional
        Restrict to real symmetric witnesses. Defaults to ``True`` when ``rho``
        is real, which loses nothing: averaging a witness with its complex
        conjugate keeps every decomposition and the value on a real ``rho``.
    """
    mode = Mode(mode)
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    n = n_qubits(d)
    if n < 2:
        raise ValueError("need at least two qubits")
    if real is None:
        real = not np.any(rho.imag)
    cuts = bipartitions(n, canonical_only=not all_subsets)
    prob = sdp.SdpProblem()
    size = d if real else 2 * d
    with_p = mode is not Mode.FULLY_PPT
    bounded = mode is Mode.MONOTONE
    p_blocks, q_blocks = {}, {}
    first = cuts[0]
    for m in cuts:
        is_first = m == first
        if with_p:
            cost = _embed(rho, real) if is_first else None
            p_blocks[m] = prob.add_block(size, cost, bounded=bounded)
        cost = _embed(partial_transpose(rho, m), real) if is_first else None
        q_blocks[m] = prob.add_block(size, cost, bounded=bounded)

    def w_terms(m, sign):
        parts = []
        if with_p:
            parts.append(_entry_terms(p_blocks[m], d, (), sign, real))
        parts.append(_entry_terms(q_blocks[m], d, m.members, sign, real))
        return parts

    n_rows = d * (d + 1) // 2 if real else d * d
    for m in cuts[1:]:
        parts = w_terms(m, 1.0) + w_terms(first, -1.0)
        k, b, r, c, v = (np.concatenate(x) for x in zip(*parts))
        r, c = np.minimum(r, c), np.maximum(r, c)
        prob.add_constraints(k, b, r, c, v, np.zeros(n_rows))

    def add_trace_row(op, rhs):
        parts = []
        if with_p:
            parts.append(_trace_terms(p_blocks[first], (), op, real))
        parts.append(_trace_terms(q_blocks[first], first.members, op, real))
        k, b, r, c, v = (np.concatenate(x) for x in zip(*parts))
        if k.size:
            prob.add_constraints(k, b, r, c, v, [rhs])

    if mode is not Mode.MONOTONE:
        add_trace_row(np.eye(d), 1.0)

    observables = None
    if mode is Mode.RESTRICTED:
        if basis is None:
            raise ValueError("restricted mode needs an observable basis")
        if basis.n != n:
            raise ValueError(f"observables act on {basis.n} qubits, state on {n}")
        observables = basis.observables
        for letters in _span_complement_rows(n, basis):
            # strings with an odd number of Y vanish on real witnesses already
            add_trace_row(pauli_string_matrix(letters), 0.0)
    return WitnessProblem(prob, cuts, p_blocks, q_blocks, mode, real, observables)


def _certificate(wp: WitnessProblem, sol: sdp.SdpSolution, d: int) -> WitnessCertificate:
    p, q = {}, {}
    for m in wp.cuts:
        q[m] = _unembed(sol.x[wp.q_blocks[m]], wp.real)
        p[m] = _unembed(sol.x[wp.p_blocks[m]], wp.real) if m in wp.p_blocks else np.zeros((d, d), dtype=complex)
    first = wp.cuts[0]
    w = p[first] + partial_transpose(q[first], first)
    w = 0.5 * (w + w.conj().T)
    coeffs = None
    if wp.observables is not None:
        coeffs = np.array([np.trace(o.matrix() @ w).real / d for o in wp.observables])
    return WitnessCertificate(w, p, q, wp.mode, wp.observables, coeffs)


@dataclass
class DetectionResult:
    optimal_value: float
    certificate: WitnessCertificate
    verdict: Verdict
    solution: sdp.SdpSolution
    report: CertificateReport

    @property
    def detected(self) -> bool:
        return self.verdict is Verdict.GME


def _near_optimal(sol: sdp.SdpSolution, settings: sdp.Settings) -> bool:
    """A stalled but feasible iterate whose gap is within 100x tolerance; the certificate check decides."""
    if sol.status not in (sdp.Status.NUMERICAL_FAILURE, sdp.Status.MAX_ITERATIONS):
        return False
    feasible = sol.primal_infeasibility <= settings.feas_tol and sol.dual_infeasibility <= settings.feas_tol
    return feasible and sol.duality_gap <= 100 * settings.gap_tol * (1 + abs(sol.primal_objective))


def detect(
    rho: np.ndarray,
    mode: Mode | str = Mode.FULLY_DECOMPOSABLE,
    basis: ObservableBasis | None = None,
    all_subsets: bool = False,
    settings: sdp.Settings | None = None,
    validate: bool = True,
) -> DetectionResult:
    """Solve the witness SDP for ``rho`` in the requested witness class."""
    mode = Mode(mode)
    if validate:
        rho = check_density_matrix(rho)
    d = rho.shape[0]
    wp = build_witness_problem(rho, mode, basis, all_subsets)
    sol = sdp.solve(wp.problem, settings)
    if sol.status is sdp.Status.INFEASIBLE and mode is Mode.RESTRICTED:
        raise InfeasibleWitness("no trace-one witness in the span of the observables", sol)
    if not sol.optimal and not _near_optimal(sol, settings or sdp.Settings()):
        raise sdp.SolverError(
            f"witness SDP ended with {sol.status.value} after {sol.iterations} iterations "
            f"(gap {sol.duality_gap:.2e}, pinf {sol.primal_infeasibility:.2e}, dinf {sol.dual_infeasibility:.2e})",
            sol,
        )
    cert = _certificate(wp, sol, d)
    value = float(np.trace(cert.w @ rho).real)
    report = verify_certificate(cert)
    if not report.passed:
        if not sol.optimal:
            raise sdp.SolverError(f"stalled witness SDP gave an invalid certificate: {'; '.join(report.failures)}", sol)
        log.warning("certificate failed verification: %s", "; ".join(report.failures))
    verdict = Verdict.GME if value < -DECISION_THRESHOLD else Verdict.PPT_MIXTURE
    return DetectionResult(value, cert, verdict, sol, report)


def detect_gme(rho: np.ndarray, **kw) -> DetectionResult:
    return detect(rho, Mode.FULLY_DECOMPOSABLE, **kw)


def detect_fully_ppt(rho: np.ndarray, **kw) -> DetectionResult:
    return detect(rho, Mode.FULLY_PPT, **kw)


def detect_restricted(rho: np.ndarray, basis: ObservableBasis, **kw) -> DetectionResult:
    return detect(rho, Mode.RESTRICTED, basis=basis, **kw)


def gme_negativity(rho: np.ndarray, full_output: bool = False, **kw):
    """Genuine multipartite negativity ``-min tr(rho W)`` with ``0 <= P_M, Q_M <= 1``."""
    res = detect(rho, Mode.MONOTONE, **kw)
    value = max(0.0, -res.optimal_value)
    return (value, res) if full_output else value


# -- white-noise tolerance ---------------------------------------------------------


@dataclass
class ToleranceSearch:
    value: float
    lower: float
    upper: float
    evaluations: int

    def __float__(self) -> float:
        return self.value


def tolerance_search(
    psi: np.ndarray,
    mode: Mode | str = Mode.FULLY_DECOMPOSABLE,
    basis: ObservableBasis | None = None,
    width: float = 5e-4,
    settings: sdp.Settings | None = None,
) -> ToleranceSearch:
    """Bisect on the noise weight ``p`` for the detection boundary."""
    mode = Mode(mode)

    def detected(p: float) -> bool:
        return detect(white_noise_mix(psi, p), mode, basis=basis, settings=settings, validate=False).detected

    evals = 1
    if not detected(0.0):
        return ToleranceSearch(0.0, 0.0, 0.0, evals)
    lo, hi = 0.0, 1.0
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        evals += 1
        if detected(mid):
            lo = mid
        else:
            hi = mid
    return ToleranceSearch(0.5 * (lo + hi), lo, hi, evals)


def white_noise_tolerance(psi: np.ndarray, mode: Mode | str = Mode.FULLY_DECOMPOSABLE, **kw) -> float:
    """Largest white-noise weight at which ``psi`` is still detected (bisection)."""
    return tolerance_search(psi, mode, **kw).value


def linear_tolerance(
    psi: np.ndarray,
    mode: Mode | str = Mode.FULLY_DECOMPOSABLE,
    basis: ObservableBasis | None = None,
    settings: sdp.Settings | None = None,
) -> float:
    """Exact tolerance from a single solve at ``p = 0``.

    With ``tr W = 1`` the objective ``(1 - p) <psi|W|psi> + p / d`` is affine in
    ``p`` for every feasible ``W``, so the optimum is too; its root gives the
    tolerance directly. Not valid for the monotone normalisation.
    """
    mode = Mode(mode)
    if mode is Mode.MONOTONE:
        raise ValueError("the monotone has no trace normalisation")
    psi = np.asarray(psi, dtype=complex).ravel()
    d = psi.size
    v0 = detect(white_noise_mix(psi, 0.0), mode, basis=basis, settings=settings, validate=False).optimal_value
    if v0 >= -DECISION_THRESHOLD:
        return 0.0
    return -v0 * d / (1 - v0 * d)


# -- volume of detected states -----------------------------------------------------


@dataclass
class VolumeEstimate:
    detected: int
    samples: int
    measure: str
    mode: Mode
    seed: int

    @property
    def fraction(self) -> float:
        return self.detected / self.samples

    @property
    def stderr(self) -> float:
        f = self.fraction
        return float(np.sqrt(max(f * (1 - f), 0.0) / self.samples))

    def interval(self, z: float = 1.96) -> tuple[float, float]:
        """Wilson score interval."""
        n, f = self.samples, self.fraction
        den = 1 + z**2 / n
        centre = (f + z**2 / (2 * n)) / den
        half = z * np.sqrt(f * (1 - f) / n + z**2 / (4 * n**2)) / den
        return centre - half, centre + half


SAMPLERS: dict[str, Callable] = {"hs": random_density_hs, "bures": random_density_bures}


def sample_state(measure: str, seed: int, index: int, dim: int = 8) -> np.ndarray:
    try:
        sampler = SAMPLERS[measure.lower()]
    except KeyError:
        raise ValueError(f"unknown measure {measure!r}; expected one of {sorted(SAMPLERS)}") from None
    return sampler(dim, rng_stream(seed, index))


def _detect_sample(args) -> bool:
    measure, mode, seed, index, dim = args
    rho = sample_state(measure, seed, index, dim)
    try:
        return detect(rho, mode, validate=False).detected
    except sdp.SolverError as exc:
        log.warning("sample %d: %s", index, exc)
        return False


def volume_estimate(
    n_samples: int,
    measure: str = "hs",
    mode: Mode | str = Mode.FULLY_DECOMPOSABLE,
    seed: int = 0,
    n_qubits: int = 3,
    jobs: int = 1,
    start: int = 0,
) -> VolumeEstimate:
    """Fraction of random states detected; sample ``i`` uses stream ``(seed, i)``."""
    if n_samples < 1:
        raise ValueError("need at least one sample")
    mode = Mode(mode)
    dim = 2**n_qubits
    tasks = [(measure, mode, seed, i, dim) for i in range(start, start + n_samples)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            hits = sum(pool.map(_detect_sample, tasks, chunksize=64))
    else:
        hits = sum(map(_detect_sample, tasks))
    return VolumeEstimate(int(hits), n_samples, measure.lower(), mode, seed)


# -- explicit witnesses and decomposition checks --------------------------------------

# rounded coefficients of the published Dicke witness
DICKE_WITNESS_ALPHAS = (0.014, -0.095, 0.0046, 0.16, -0.14, -0.15)


def dicke_witness(alphas: Sequence[float] = DICKE_WITNESS_ALPHAS) -> np.ndarray:
    """Explicit four-qubit witness for ``D_{2,4}`` built from permutation-symmetric Pauli sums."""
    a1, a2, a3, a4, a5, a6 = alphas

    def perms(letters: str) -> np.ndarray:
        return sum(pauli_string_matrix(s) for s in distinct_permutations(letters))

    w = (
        np.eye(16)
        + a1 * (perms("XXXX") + perms("YYYY"))
        + a2 * perms("ZZZZ")
        + a3 * perms("XXYY")
        + a4 * (perms("ZZYY") + perms("ZZXX"))
        + a5 * (perms("XXII") + perms("YYII"))
        + a6 * perms("ZZII")
    )
    return w / 16


@dataclass
class CutDecomposition:
    m: Bipartition
    p: np.ndarray
    q: np.ndarray
    shift: float

    @property
    def violation(self) -> float:
        """PSD violation after splitting the identity shift evenly between ``P`` and ``Q``."""
        return max(0.0, self.shift / 2)


def decompose_across(w: np.ndarray, m: Bipartition, settings: sdp.Settings | None = None) -> CutDecomposition:
    """Smallest ``s`` with ``W + s 1 = P + T_M(Q)`` and ``P, Q >= 0``."""
    w = np.asarray(w, dtype=complex)
    d = w.shape[0]
    real = not np.any(w.imag)
    size = d if real else 2 * d
    prob = sdp.SdpProblem()
    pb = prob.add_block(size)
    qb = prob.add_block(size)
    # s = sigma - 1 with sigma >= 0 keeps the shift free in sign
    sb = prob.add_block(1, np.ones((1, 1)))
    parts = [_entry_terms(pb, d, (), 1.0, real), _entry_terms(qb, d, m.members, 1.0, real)]
    a, b, part = _hermitian_rows(d)
    if real:
        a, b, part = a[part == 0], b[part == 0], part[part == 0]
    diag = np.nonzero((a == b) & (part == 0))[0]
    parts.append((diag, np.full(diag.size, sb), np.zeros(diag.size, int), np.zeros(diag.size, int), -np.ones(diag.size)))
    k, bl, r, c, v = (np.concatenate(x) for x in zip(*parts))
    r, c = np.minimum(r, c), np.maximum(r, c)
    target = np.where(part == 0, w[a, b].real, w[a, b].imag)
    target[diag] -= 1.0
    prob.add_constraints(k, bl, r, c, v, target)
    sol = sdp.solve(prob, settings)
    if not sol.optimal:
        raise sdp.SolverError(f"decomposition SDP for cut {m.label()} ended with {sol.status.value}", sol)
    p = _unembed(sol.x[pb], real)
    q = _unembed(sol.x[qb], real)
    return CutDecomposition(m, p, q, float(sol.x[sb][0, 0]) - 1.0)


def decompose_all_cuts(w: np.ndarray, settings: sdp.Settings | None = None) -> list[CutDecomposition]:
    n = n_qubits(np.asarray(w).shape[0])
    return [decompose_across(w, m, settings) for m in bipartitions(n)]
