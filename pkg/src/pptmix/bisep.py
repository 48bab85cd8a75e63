"""Biseparability certificates for three qubits.

The inner approximation keeps, for each cut ``k | rest``, only states
supported on ``C^2 (x) Sym(rest)``.  That space is ``2 (x) 3`` where PPT is
equivalent to separability, so any decomposition
``rho = sum_k p_k rho_k`` into PPT components of this form proves ``rho``
biseparable.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import sdp
from .linalg import Bipartition, complexify, partial_transpose
from .states import check_density_matrix, ket, reorder_product, w_state, white_noise_mix

log = logging.getLogger(__name__)

N_QUBITS = 3
# documented biseparability point of the noisy four-qubit linear cluster state
CL4_BISEPARABLE_P = 0.616

PSI_PLUS = (ket("01") + ket("10")) / np.sqrt(2)
SYM_BASIS = np.array([ket("00"), PSI_PLUS, ket("11")]).T  # 4 x 3 isometry onto Sym(C^2 (x) C^2)


def sym_projector() -> np.ndarray:
    return SYM_BASIS @ SYM_BASIS.conj().T


def cut_isometry(k: int) -> np.ndarray:
    """8 x 6 isometry from ``C^2_k (x) Sym(rest)`` into three qubits; columns ordered ``(i, s)``."""
    cols = []
    for i in range(2):
        e = np.eye(2)[i]
        for s in range(3):
            cols.append(reorder_product(e, SYM_BASIS[:, s], (k,), N_QUBITS))
    return np.array(cols).T


def support_residual(component: np.ndarray, k: int) -> float:
    """Norm of the part of ``component`` outside ``C^2_k (x) Sym(rest)``."""
    v = cut_isometry(k)
    out = np.eye(8) - v @ v.conj().T
    return float(np.linalg.norm(out @ component @ out, 2) + np.linalg.norm(out @ component, 2))


# -- decompositions ------------------------------------------------------------


@dataclass
class BisepPart:
    cut: Bipartition
    weight: float
    component: np.ndarray


@dataclass
class BisepReport:
    weight_error: float
    reconstruction_error: float
    min_weight: float
    min_ppt_eig: float
    min_eig: float
    max_support_residual: float
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


@dataclass
class BisepDecomposition:
    parts: list[BisepPart]
    target: np.ndarray
    parameter: float | None = None  # the W3 mixing angle ``a`` when built analytically
    margin: float | None = None  # SDP eigenvalue margin when found numerically

    def reconstruct(self) -> np.ndarray:
        return sum(p.weight * p.component for p in self.parts)

    def verify(self, tol: float = 1e-8, ppt_tol: float | None = None) -> BisepReport:
        """Independent re-check using only dense linear algebra."""
        ppt_tol = tol if ppt_tol is None else ppt_tol
        weights = np.array([p.weight for p in self.parts])
        werr = abs(weights.sum() - 1)
        rerr = float(np.abs(self.reconstruct() - self.target).max())
        min_ppt = min(np.linalg.eigvalsh(partial_transpose(p.component, p.cut))[0] for p in self.parts)
        min_eig = min(np.linalg.eigvalsh(p.component)[0] for p in self.parts)
        supp = max(support_residual(p.component, p.cut.members[0]) for p in self.parts)
        rep = BisepReport(werr, rerr, float(weights.min()), float(min_ppt), float(min_eig), supp)
        if werr > 1e-9:
            rep.failures.append(f"weights sum to {weights.sum():.12f}")
        if weights.min() < -1e-12:
            rep.failures.append("negative weight")
        if rerr > tol:
            rep.failures.append(f"reconstruction error {rerr:.2e}")
        if min_eig < -ppt_tol:
            rep.failures.append(f"component not PSD ({min_eig:.2e})")
        if min_ppt < -ppt_tol:
            rep.failures.append(f"component not PPT ({min_ppt:.2e})")
        if supp > tol:
            rep.failures.append(f"component leaves the symmetric subspace ({supp:.2e})")
        for p in self.parts:
            if len(p.cut.members) != 1:
                rep.failures.append(f"cut {p.cut.label()} does not split off one qubit")
        return rep


# -- SDP route ---------------------------------------------------------------------


def _coord_basis(d: int, real: bool) -> list[np.ndarray]:
    """Hermitian basis ``E_j`` dual to the coordinates ``Re H[a,b]`` (a <= b) and ``Im H[a,b]`` (a < b)."""
    out = []
    for a in range(d):
        for b in range(a, d):
            e = np.zeros((d, d), dtype=complex)
            e[a, b] = e[b, a] = 1
            out.append(e)
    if not real:
        for a in range(d):
            for b in range(a + 1, d):
                e = np.zeros((d, d), dtype=complex)
                e[a, b], e[b, a] = 1j, -1j
                out.append(e)
    return out


def _coords(h: np.ndarray, real: bool) -> np.ndarray:
    d = h.shape[0]
    iu, ju = np.triu_indices(d)
    re = h[iu, ju].real
    if real:
        return re
    iu, ju = np.triu_indices(d, 1)
    return np.concatenate([re, h[iu, ju].imag])


def _coord_entries(d: int, real: bool) -> list[list[tuple[int, int, float]]]:
    """Entries of the block ``X`` whose combination gives each coordinate of ``H(X)``."""
    out = []
    for a in range(d):
        for b in range(a, d):
            out.append([(a, b, 1.0)] if real else [(a, b, 0.5), (d + a, d + b, 0.5)])
    if not real:
        for a in range(d):
            for b in range(a + 1, d):
                out.append([(min(d + a, b), max(d + a, b), 0.5), (a, d + b, -0.5)])
    return out


def _map_terms(block: int, lin, d_in: int, d_out: int, real: bool, sign: float = 1.0):
    """COO terms for the coordinates of ``sign * lin(H(X_block))``; ``lin`` is linear on Hermitian matrices."""
    basis = _coord_basis(d_in, real)
    entries = _coord_entries(d_in, real)
    mat = np.array([_coords(lin(e), real) for e in basis]).T  # out coords x in coords
    # coord_j(H) = coefficient of E_j, but E_j for off-diagonals counts both (a,b) and (b,a)
    k_, b_, r_, c_, v_ = [], [], [], [], []
    rows, cols = np.nonzero(np.abs(mat) > 1e-15)
    for r, j in zip(rows, cols):
        for rr, cc, w in entries[j]:
            k_.append(r)
            b_.append(block)
            r_.append(min(rr, cc))
            c_.append(max(rr, cc))
            v_.append(sign * mat[r, j] * w)
    return k_, b_, r_, c_, v_


def _ta_local(s: np.ndarray) -> np.ndarray:
    """Transpose of the qubit factor of an operator on ``C^2 (x) C^3`` (index ``3 i + s``)."""
    return s.reshape(2, 3, 2, 3).transpose(2, 1, 0, 3).reshape(6, 6)


def certify_biseparable_sym(
    rho: np.ndarray, settings: sdp.Settings | None = None, tol: float = 1e-7
) -> BisepDecomposition | None:
    """Search for a symmetric-subspace PPT decomposition of a three-qubit state.

    Maximises a common eigenvalue margin ``t`` of every component and of its
    partial transpose; the state is certified when ``t >= -tol`` and the
    recovered decomposition passes :meth:`BisepDecomposition.verify`.
    Returns ``None`` otherwise, which proves nothing about ``rho``.
    """
    rho = check_density_matrix(rho)
    if rho.shape != (8, 8):
        raise ValueError("biseparability certificates are implemented for three qubits")
    real = not np.any(rho.imag)
    size = 6 if real else 12
    prob = sdp.SdpProblem()
    s_blocks = [prob.add_block(size) for _ in range(3)]
    u_blocks = [prob.add_block(size) for _ in range(3)]
    # margin t = s - 1 with s >= 0: a single shifted variable keeps both problems strictly feasible
    s_margin = prob.add_block(1, -np.ones((1, 1)))
    isos = [cut_isometry(k) for k in range(3)]

    # sum_k V_k (S_k + t) V_k^+ = rho, i.e. sum_k V_k S_k V_k^+ + s E = rho + E
    parts = []
    for k, v in enumerate(isos):
        parts.append(_map_terms(s_blocks[k], lambda h, v=v: v @ h @ v.conj().T, 6, 8, real))
    eye_sum = sum(v @ v.conj().T for v in isos)
    ec = _coords(eye_sum, real)
    nz = np.nonzero(np.abs(ec) > 1e-15)[0]
    parts.append((list(nz), [s_margin] * nz.size, [0] * nz.size, [0] * nz.size, list(ec[nz])))
    k_, b_, r_, c_, v_ = (np.concatenate([np.asarray(p[i], dtype=float) for p in parts]) for i in range(5))
    prob.add_constraints(k_.astype(int), b_.astype(int), r_.astype(int), c_.astype(int), v_, _coords(rho, real) + ec)

    # U_k = T_A(S_k): the shift t I is invariant under the partial transpose
    n_coords = 36 if not real else 21
    for k in range(3):
        p1 = _map_terms(u_blocks[k], lambda h: h, 6, 6, real)
        p2 = _map_terms(s_blocks[k], _ta_local, 6, 6, real, sign=-1.0)
        k_, b_, r_, c_, v_ = (np.asarray(x1 + x2) for x1, x2 in zip(p1, p2))
        prob.add_constraints(k_, b_, r_, c_, v_.astype(float), np.zeros(n_coords))

    sol = sdp.solve(prob, settings)
    if sol.status is sdp.Status.INFEASIBLE:
        return None
    stalled = sol.status in (sdp.Status.NUMERICAL_FAILURE, sdp.Status.MAX_ITERATIONS)
    if stalled and sol.primal_infeasibility <= 1e-8:
        # a primal-feasible iterate is all a certificate needs; verify() below decides
        log.info("using the last feasible iterate after %s", sol.status.value)
    elif not sol.optimal:
        raise sdp.SolverError(f"biseparability SDP ended with {sol.status.value}", sol)
    t = float(sol.x[s_margin][0, 0]) - 1.0
    if t < -tol:
        return None
    unembed = (lambda x: x.astype(complex)) if real else complexify
    out = []
    for k, v in enumerate(isos):
        sigma = unembed(sol.x[s_blocks[k]]) + t * np.eye(6)
        sigma = 0.5 * (sigma + sigma.conj().T)
        comp = v @ sigma @ v.conj().T
        w = float(np.trace(comp).real)
        if w > 0:
            out.append(BisepPart(Bipartition(N_QUBITS, (k,)), w, comp / w))
    dec = BisepDecomposition(out, rho, margin=t)
    rep = dec.verify(tol=tol)
    if not rep.passed:
        return None
    return dec


# -- analytic W3 decomposition ------------------------------------------------------


def critical_p_w3() -> float:
    """Noise level above which the analytic W3 decomposition is PPT."""
    s3 = np.sqrt(3.0)
    return (367 - 71 * s3 - np.sqrt(2894 * s3 - 2988)) / 382


def w3_component(p: float, a: float) -> np.ndarray:
    """``rho~_{A|BC}`` with spectrum ``p/8, p/8, 3p/8, 1 - 5p/8``."""
    chi1 = ket("000")
    chi2 = ket("111")
    chi3 = (2 * np.sqrt(2) * np.kron(ket("1"), PSI_PLUS) - ket("011")) / 3
    chi4 = a * np.kron(ket("0"), PSI_PLUS) + np.sqrt(max(0.0, 1 - a * a)) * ket("100")
    lam = [p / 8, p / 8, 3 * p / 8, 1 - 5 * p / 8]
    return sum(l * np.outer(c, c.conj()) for l, c in zip(lam, [chi1, chi2, chi3, chi4]))


def _swap(rho: np.ndarray, i: int, j: int) -> np.ndarray:
    perm = list(range(N_QUBITS))
    perm[i], perm[j] = perm[j], perm[i]
    t = rho.reshape([2] * 6)
    t = t.transpose(perm + [N_QUBITS + q for q in perm])
    return t.reshape(8, 8)


def _w3_parts(p: float, a: float) -> list[BisepPart]:
    base = w3_component(p, a)
    comps = [base, _swap(base, 0, 1), _swap(base, 0, 2)]
    return [BisepPart(Bipartition(N_QUBITS, (k,)), 1 / 3, c) for k, c in enumerate(comps)]


# coherence <100|rho|010> fixes ``a``; the remaining elements agree identically
_MATCH = (4, 2)


def _match(p: float, a: float) -> float:
    mix = sum(q.weight * q.component for q in _w3_parts(p, a))
    return float((mix - white_noise_mix(w_state(3), p))[_MATCH].real)


def w3_analytic_decomposition(p: float, ppt_tol: float = 1e-10) -> BisepDecomposition:
    """Equal-weight decomposition of the noisy W3 state into symmetric PPT components.

    The mixing angle ``a`` solves a scalar matching condition. The matched
    coherence is monotone on ``[-1, -1/sqrt 3]``, ``[-1/sqrt 3, sqrt(2/3)]``
    and ``[sqrt(2/3), 1]``; every root is tried and the one whose component
    has the largest partial-transpose eigenvalue is kept.

    Raises
    ------
    ValueError
        If neither root yields a PPT component, which happens below the
        critical noise level.
    """
    if not 0 <= p <= 1:
        raise ValueError(f"noise weight {p} outside [0, 1]")
    rho = white_noise_mix(w_state(3), p)
    knots = (-1.0, -np.sqrt(1 / 3), np.sqrt(2 / 3), 1.0)
    candidates = []
    for lo, hi in zip(knots, knots[1:]):
        f_lo, f_hi = _match(p, lo), _match(p, hi)
        if f_lo == 0:
            candidates.append(lo)
        elif f_hi == 0:
            candidates.append(hi)
        elif f_lo * f_hi < 0:
            candidates.append(brentq(lambda a: _match(p, a), lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    best = None
    for a in candidates:
        dec = BisepDecomposition(_w3_parts(p, a), rho, parameter=a)
        margin = np.linalg.eigvalsh(partial_transpose(dec.parts[0].component, (0,)))[0]
        if best is None or margin > best[0]:
            best = (margin, dec)
    if best is None:
        raise ValueError(f"no real mixing angle matches p={p}")
    margin, dec = best
    if margin < -ppt_tol:
        raise ValueError(
            f"p={p} is below the critical level {critical_p_w3():.6f}: component partial transpose has eigenvalue {margin:.3e}"
        )
    return dec
