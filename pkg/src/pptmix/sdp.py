"""Block-diagonal semidefinite programs and a primal-dual interior-point solver.

Problems are posed in primal standard form over real symmetric blocks::

    minimise    sum_j <C_j, X_j>
    subject to  sum_j <A_kj, X_j> = b_k       for every constraint k
                X_j >= 0                       (and optionally X_j <= I)

with dual ``max b.y  s.t.  Z_j = C_j - sum_k y_k A_kj >= 0``.

Constraint coefficients are stored sparsely as ``(k, block, row, col, value)``
entries; an entry contributes ``value * X[row, col]`` to row ``k``. The
solver is an infeasible-start path-following method with Nesterov-Todd
scaling and Mehrotra predictor-corrector steps, factoring the dense Schur
complement by Cholesky.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .linalg import complexify, realify  # noqa: F401  (re-exported)

log = logging.getLogger(__name__)


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    MAX_ITERATIONS = "MaxIterations"
    NUMERICAL_FAILURE = "NumericalFailure"


class SolverError(RuntimeError):
    """Raised by callers that require an optimal solution."""

    def __init__(self, message: str, solution: "SdpSolution | None" = None):
        super().__init__(message)
        self.solution = solution


@dataclass
class Settings:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iterations: int = 200
    step_fraction: float = 0.98


@dataclass
class SdpSolution:
    status: Status
    primal_objective: float
    dual_objective: float
    x: list[np.ndarray]
    y: np.ndarray
    z: list[np.ndarray]
    duality_gap: float
    primal_infeasibility: float
    dual_infeasibility: float
    iterations: int

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


@dataclass
class SdpProblem:
    """Builder for a block SDP in primal standard form."""

    block_sizes: list[int] = field(default_factory=list)
    costs: list[np.ndarray | None] = field(default_factory=list)
    bounded: list[bool] = field(default_factory=list)
    rhs: list[float] = field(default_factory=list)
    _entries: list[tuple[np.ndarray, ...]] = field(default_factory=list, repr=False)

    @property
    def n_constraints(self) -> int:
        return len(self.rhs)

    def add_block(self, size: int, cost: np.ndarray | None = None, bounded: bool = False) -> int:
        if size < 1:
            raise ValueError("block size must be positive")
        if cost is not None:
            cost = np.asarray(cost, dtype=float)
            if cost.shape != (size, size):
                raise ValueError(f"cost shape {cost.shape} does not match block size {size}")
            if not np.all(np.isfinite(cost)):
                raise ValueError("objective coefficients must be finite")
            cost = 0.5 * (cost + cost.T)
        self.block_sizes.append(int(size))
        self.costs.append(cost)
        self.bounded.append(bool(bounded))
        return len(self.block_sizes) - 1

    def add_constraints(self, rows, blocks, r, c, values, rhs) -> np.ndarray:
        """Append a batch of constraints given as COO arrays.

        ``rows`` index into the new batch (0 .. len(rhs)-1); returns the global
        constraint indices assigned to the batch.
        """
        rhs = np.atleast_1d(np.asarray(rhs, dtype=float))
        rows = np.asarray(rows, dtype=np.int64)
        blocks = np.asarray(blocks, dtype=np.int64)
        r = np.asarray(r, dtype=np.int64)
        c = np.asarray(c, dtype=np.int64)
        values = np.asarray(values, dtype=float)
        if not (rows.shape == blocks.shape == r.shape == c.shape == values.shape):
            raise ValueError("COO arrays must share one shape")
        if rows.size and (rows.min() < 0 or rows.max() >= rhs.size):
            raise ValueError("constraint row index out of range")
        nb = len(self.block_sizes)
        if blocks.size and (blocks.min() < 0 or blocks.max() >= nb):
            raise ValueError("constraint references an undeclared block")
        sizes = np.asarray(self.block_sizes, dtype=np.int64)
        if blocks.size and (np.any(r >= sizes[blocks]) or np.any(c >= sizes[blocks]) or r.min() < 0 or c.min() < 0):
            raise ValueError("constraint entry outside its block")
        offset = len(self.rhs)
        self._entries.append((rows + offset, blocks, r, c, values))
        self.rhs.extend(rhs.tolist())
        return offset + np.arange(rhs.size)

    def add_constraint(self, entries, rhs: float) -> int:
        """One constraint from ``[(block, row, col, value), ...]``."""
        entries = list(entries)
        if entries:
            b, r, c, v = (np.array(t) for t in zip(*entries))
        else:
            b = r = c = np.zeros(0, dtype=np.int64)
            v = np.zeros(0)
        return int(self.add_constraints(np.zeros(len(entries), dtype=np.int64), b, r, c, v, [rhs])[0])

    def coo(self) -> tuple[np.ndarray, ...]:
        if not self._entries:
            z = np.zeros(0, dtype=np.int64)
            return z, z, z, z, np.zeros(0)
        return tuple(np.concatenate(parts) for parts in zip(*self._entries))


# -- solver internals -------------------------------------------------------


@dataclass
class _Block:
    n: int
    cost: np.ndarray
    rows: np.ndarray  # global constraint indices touching this block
    a: sp.csr_matrix  # (len(rows), n*n) symmetrised coefficient matrix
    at: sp.csr_matrix = None  # cached transpose

    def __post_init__(self):
        self.at = self.a.T.tocsr()


def _expand_bounds(p: SdpProblem) -> SdpProblem:
    """Model ``X <= I`` by a slack block ``S`` with ``X + S = I``."""
    if not any(p.bounded):
        return p
    q = SdpProblem(list(p.block_sizes), list(p.costs), [False] * len(p.block_sizes), list(p.rhs), list(p._entries))
    for j, flag in enumerate(p.bounded):
        if not flag:
            continue
        n = p.block_sizes[j]
        s = q.add_block(n)
        iu, ju = np.triu_indices(n)
        k = np.arange(iu.size)
        rows = np.concatenate([k, k])
        blocks = np.concatenate([np.full(k.size, j), np.full(k.size, s)])
        q.add_constraints(rows, blocks, np.tile(iu, 2), np.tile(ju, 2), np.ones(2 * k.size), (iu == ju).astype(float))
    return q


def _compile(p: SdpProblem) -> tuple[list[_Block], np.ndarray]:
    k, bl, r, c, v = p.coo()
    m = p.n_constraints
    blocks = []
    for j, n in enumerate(p.block_sizes):
        sel = bl == j
        kj, rj, cj, vj = k[sel], r[sel], c[sel], v[sel]
        rows, local = np.unique(kj, return_inverse=True)
        # symmetric split: off-diagonal value v at (r,c) becomes v/2 at (r,c) and (c,r)
        off = rj != cj
        lr = np.concatenate([local, local[off]])
        col = np.concatenate([rj * n + cj, cj[off] * n + rj[off]])
        val = np.concatenate([np.where(off, 0.5 * vj, vj), 0.5 * vj[off]])
        a = sp.csr_matrix((val, (lr, col)), shape=(rows.size, n * n))
        a.sum_duplicates()
        cost = p.costs[j] if p.costs[j] is not None else np.zeros((n, n))
        blocks.append(_Block(n, cost, rows, a))
    return blocks, np.asarray(p.rhs, dtype=float).reshape(m)


def _a_op(blocks: list[_Block], xs: list[np.ndarray], m: int) -> np.ndarray:
    out = np.zeros(m)
    for blk, x in zip(blocks, xs):
        if blk.rows.size:
            out[blk.rows] += blk.a @ x.ravel()
    return out


def _at_op(blocks: list[_Block], y: np.ndarray) -> list[np.ndarray]:
    out = []
    for blk in blocks:
        if blk.rows.size:
            out.append((blk.at @ y[blk.rows]).reshape(blk.n, blk.n))
        else:
            out.append(np.zeros((blk.n, blk.n)))
    return out


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def _max_step(li: np.ndarray, d: np.ndarray) -> float:
    """Largest ``alpha`` with ``L L^T + alpha d >= 0`` given ``li = L^{-1}``."""
    lam = np.linalg.eigvalsh(_sym(li @ d @ li.T))[0]
    return np.inf if lam >= 0 else -1.0 / lam


class _NumericalFailure(Exception):
    pass


def _nt_scaling(x: np.ndarray, z: np.ndarray):
    try:
        lx = np.linalg.cholesky(x)
        lz = np.linalg.cholesky(z)
    except np.linalg.LinAlgError as exc:
        raise _NumericalFailure("iterate lost positive definiteness") from exc
    u, s, vt = np.linalg.svd(lz.T @ lx)
    if s.min() <= 0:
        raise _NumericalFailure("degenerate scaling point")
    g = lx @ vt.T / np.sqrt(s)
    lxi = sla.solve_triangular(lx, np.eye(lx.shape[0]), lower=True)
    ginv = (np.sqrt(s)[:, None] * vt) @ lxi
    lzi = sla.solve_triangular(lz, np.eye(lz.shape[0]), lower=True)
    return g, ginv, s, lxi, lzi


def _initial_point(blocks: list[_Block], b: np.ndarray):
    xs, zs = [], []
    for blk in blocks:
        n = blk.n
        if blk.rows.size:
            # Frobenius norm of each constraint matrix restricted to this block
            anorm = np.sqrt(np.asarray(blk.a.multiply(blk.a).sum(axis=1)).ravel())
            ratio = np.max((1 + np.abs(b[blk.rows])) / (1 + anorm))
            amax = anorm.max()
        else:
            ratio, amax = 1.0, 0.0
        xi = max(10.0, np.sqrt(n), n * ratio)
        eta = max(10.0, np.sqrt(n), np.linalg.norm(blk.cost), amax)
        xs.append(xi * np.eye(n))
        zs.append(eta * np.eye(n))
    return xs, np.zeros(b.size), zs


def solve(problem: SdpProblem, settings: Settings | None = None) -> SdpSolution:
    """Solve ``problem``; never raises on solver trouble, see ``status``."""
    settings = settings or Settings()
    prob = _expand_bounds(problem)
    blocks, b = _compile(prob)
    m = b.size
    ntot = sum(blk.n for blk in blocks)
    xs, y, zs = _initial_point(blocks, b)
    cs = [blk.cost for blk in blocks]
    bnorm = np.linalg.norm(b)
    cnorm = np.sqrt(sum(np.sum(c**2) for c in cs))

    def objectives(xs, y):
        pobj = sum(np.sum(c * x) for c, x in zip(cs, xs))
        return float(pobj), float(b @ y)

    # A A^T, used to project primal directions back onto A dX = rp
    gram = np.zeros((m, m))
    for blk in blocks:
        if blk.rows.size:
            gram[np.ix_(blk.rows, blk.rows)] += (blk.a @ blk.a.T).toarray()
    try:
        gram_factor = sla.cho_factor(gram + 1e-14 * np.eye(m), lower=True, check_finite=False) if m else None
    except np.linalg.LinAlgError:
        gram_factor = None  # dependent constraints; skip the projection

    status = Status.MAX_ITERATIONS
    it = 0
    stalls = 0
    pinf = dinf = np.inf
    for it in range(settings.max_iterations + 1):
        rp = b - _a_op(blocks, xs, m)
        aty = _at_op(blocks, y)
        rd = [c - z - t for c, z, t in zip(cs, zs, aty)]
        pobj, dobj = objectives(xs, y)
        mu = sum(np.sum(x * z) for x, z in zip(xs, zs)) / ntot
        pinf = np.linalg.norm(rp) / (1 + bnorm)
        rd_norm = np.sqrt(sum(np.sum(r**2) for r in rd))
        dinf = rd_norm / (1 + cnorm)
        gap = max(abs(pobj - dobj), mu * ntot)
        log.debug("it %3d pobj %+.9e dobj %+.9e gap %.2e pinf %.2e dinf %.2e", it, pobj, dobj, gap, pinf, dinf)
        if gap <= settings.gap_tol * (1 + abs(pobj)) and pinf <= settings.feas_tol and dinf <= settings.feas_tol:
            status = Status.OPTIMAL
            break
        # infeasibility certificates: the dual (resp. primal) ray dominates
        if dobj > 0 and np.sqrt(sum(np.sum((c - r) ** 2) for c, r in zip(cs, rd))) <= settings.feas_tol * dobj:
            status = Status.INFEASIBLE
            break
        if dinf <= settings.feas_tol and dobj > 1.0 / settings.feas_tol * (1 + cnorm):
            status = Status.INFEASIBLE
            break
        if pobj < 0 and np.linalg.norm(b - rp) <= settings.feas_tol * -pobj:
            status = Status.UNBOUNDED
            break
        if pinf <= settings.feas_tol and pobj < -1.0 / settings.feas_tol * (1 + bnorm):
            status = Status.UNBOUNDED
            break
        if it == settings.max_iterations:
            break
        try:
            scal = [_nt_scaling(x, z) for x, z in zip(xs, zs)]
            ws = [g @ g.T for g, *_ in scal]
            schur = np.zeros((m, m))
            for blk, w in zip(blocks, ws):
                if blk.rows.size:
                    kw = np.kron(w, w)
                    part = blk.a @ kw
                    contrib = (blk.a @ part.T).T
                    lo, hi = blk.rows[0], blk.rows[-1] + 1
                    if hi - lo == blk.rows.size:
                        schur[lo:hi, lo:hi] += contrib
                    else:
                        schur[np.ix_(blk.rows, blk.rows)] += contrib
            # only the lower triangle is read by the factorisation
            try:
                factor = sla.cho_factor(schur, lower=True, check_finite=False)
            except np.linalg.LinAlgError:
                # one retry with a tiny ridge before declaring breakdown
                ridge = 1e-12 * max(1.0, np.abs(np.diag(schur)).max())
                factor = sla.cho_factor(schur + ridge * np.eye(m), lower=True, check_finite=False)
            wrdw = [w @ r @ w for w, r in zip(ws, rd)]

            def direction(rcs):
                rhs = rp - _a_op(blocks, rcs, m) + _a_op(blocks, wrdw, m)
                dy = sla.cho_solve(factor, rhs, check_finite=False)
                dz = [r - t for r, t in zip(rd, _at_op(blocks, dy))]
                dx = [_sym(rc - w @ d @ w) for rc, w, d in zip(rcs, ws, dz)]
                if gram_factor is not None:
                    err = rp - _a_op(blocks, dx, m)
                    fix = _at_op(blocks, sla.cho_solve(gram_factor, err, check_finite=False))
                    dx = [x + f for x, f in zip(dx, fix)]
                return dx, dy, [_sym(d) for d in dz]

            def steps(dx, dz):
                ap = min(_max_step(s[3], d) for s, d in zip(scal, dx))
                ad = min(_max_step(s[4], d) for s, d in zip(scal, dz))
                return ap, ad

            # predictor: affine-scaling direction, X + W dZ W = -X
            dxa, dya, dza = direction([-x for x in xs])
            ap, ad = steps(dxa, dza)
            ap, ad = min(1.0, ap), min(1.0, ad)
            mu_aff = sum(np.sum((x + ap * dx) * (z + ad * dz)) for x, z, dx, dz in zip(xs, zs, dxa, dza)) / ntot
            expon = max(1.0, 3 * min(ap, ad) ** 2)
            sigma = min(1.0, max(0.0, mu_aff / mu) ** expon)

            # corrector: solve the scaled Lyapunov equation with the second-order term
            rcs = []
            for (g, ginv, lam, _, _), dx, dz in zip(scal, dxa, dza):
                dxt = ginv @ dx @ ginv.T
                dzt = g.T @ dz @ g
                rhs = 2 * sigma * mu * np.eye(lam.size) - 2 * np.diag(lam**2) - (dxt @ dzt + dzt @ dxt)
                rt = rhs / (lam[:, None] + lam[None, :])
                rcs.append(_sym(g @ rt @ g.T))
            dx, dy, dz = direction(rcs)
            ap, ad = steps(dx, dz)
        except (_NumericalFailure, np.linalg.LinAlgError, ValueError) as exc:
            log.debug("numerical failure: %s", exc)
            status = Status.NUMERICAL_FAILURE
            break
        tau = settings.step_fraction
        ap = min(1.0, tau * ap)
        ad = min(1.0, tau * ad)
        if max(ap, ad) < 1e-10:
            stalls += 1
            if stalls >= 3:
                status = Status.NUMERICAL_FAILURE
                break
        else:
            stalls = 0
        xs = [x + ap * d for x, d in zip(xs, dx)]
        y = y + ad * dy
        zs = [z + ad * d for z, d in zip(zs, dz)]

    pobj, dobj = objectives(xs, y)
    n_user = len(problem.block_sizes)
    return SdpSolution(
        status=status,
        primal_objective=pobj,
        dual_objective=dobj,
        x=xs[:n_user],
        y=y,
        z=zs[:n_user],
        duality_gap=abs(pobj - dobj),
        primal_infeasibility=float(pinf),
        dual_infeasibility=float(dinf),
        iterations=it,
    )
