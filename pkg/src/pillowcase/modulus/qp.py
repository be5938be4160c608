"""Quadratic program for the extremal density on a mesh.

The discrete problem minimizes the weighted area  sum_v mu_v nu_v**2
over vertex densities nu >= 0 subject to linear length constraints
row . nu >= target, one row per admissible cycle (or crossing path).
Rows have nonnegative coefficients, so the unconstrained-sign optimum
already satisfies nu >= 0 and the bound constraint can be dropped.

The dual is a bound-constrained QP in the multipliers; it is solved by a
primal-feasibility driven active-set iteration on the Gram matrix of the
constraint rows, which stays small because only the cycles produced by
the cutting-plane loop enter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ..errors import InfeasibleQP, IterationBudgetExceeded


@dataclass
class ConstraintRows:
    """Sparse nonnegative rows over mesh vertices with target lengths."""

    n_vertices: int
    indices: List[np.ndarray] = field(default_factory=list)
    values: List[np.ndarray] = field(default_factory=list)
    targets: List[float] = field(default_factory=list)
    keys: set = field(default_factory=set)
    _mat: object = field(default=None, repr=False)
    _mat_rows: int = field(default=0, repr=False)

    def __len__(self) -> int:
        return len(self.targets)

    def matrix(self):
        """CSR matrix of the rows (cached until rows are added)."""
        from scipy.sparse import csr_matrix

        if self._mat is None or self._mat_rows != len(self):
            indptr = np.zeros(len(self) + 1, dtype=np.int64)
            np.cumsum([len(i) for i in self.indices], out=indptr[1:])
            data = (np.concatenate(self.values) if self.values
                    else np.zeros(0))
            cols = (np.concatenate(self.indices) if self.indices
                    else np.zeros(0, dtype=np.int64))
            self._mat = csr_matrix((data, cols, indptr),
                                   shape=(len(self), self.n_vertices))
            self._mat_rows = len(self)
        return self._mat

    def add(self, idx: np.ndarray, val: np.ndarray, target: float) -> bool:
        """Add a row; returns False if an identical row is already present."""
        order = np.argsort(idx)
        idx = np.asarray(idx)[order]
        val = np.asarray(val, dtype=float)[order]
        # Merge duplicate vertex entries.
        uniq, inv = np.unique(idx, return_inverse=True)
        merged = np.zeros(len(uniq))
        np.add.at(merged, inv, val)
        key = (uniq.tobytes(), np.round(merged, 12).tobytes(), round(target, 12))
        if key in self.keys:
            return False
        self.keys.add(key)
        self.indices.append(uniq)
        self.values.append(merged)
        self.targets.append(float(target))
        return True

    def dot(self, nu: np.ndarray) -> np.ndarray:
        return np.asarray([v @ nu[i] for i, v in zip(self.indices, self.values)])


def solve_qp(mu: np.ndarray, rows: ConstraintRows,
             active: Optional[List[int]] = None,
             tol: float = 1e-10, max_iter: int = 2000,
             ) -> Tuple[np.ndarray, np.ndarray, List[int], float]:
    """Minimize sum(mu * nu**2) subject to rows.dot(nu) >= targets.

    Returns (nu, lambda, active_set, area).  ``active`` warm-starts the
    active set from a previous call with a superset of the rows.
    """
    m = len(rows)
    if m == 0:
        raise InfeasibleQP("no constraints; the zero density is optimal")
    inv2mu = 1.0 / (2.0 * mu)
    targets = np.asarray(rows.targets)
    A = rows.matrix()
    B = A.multiply(inv2mu[None, :]).tocsr()  # rows scaled by 1/(2 mu)

    active_set = sorted(set(active or [])) or [int(np.argmax(targets))]
    lam = np.zeros(m)
    for _ in range(max_iter):
        S = active_set
        G = (B[S] @ A[S].T).toarray()
        try:
            lam_S = np.linalg.solve(G + 1e-14 * np.trace(G) / max(len(S), 1)
                                    * np.eye(len(S)), targets[S])
        except np.linalg.LinAlgError:
            lam_S, *_ = np.linalg.lstsq(G, targets[S], rcond=None)
        if len(S) and lam_S.min() < -tol * max(1.0, abs(lam_S).max()):
            drop = S[int(np.argmin(lam_S))]
            active_set = [i for i in S if i != drop]
            continue
        lam[:] = 0.0
        lam[S] = np.maximum(lam_S, 0.0)
        nu = (A[S].T @ lam[S]) * inv2mu
        slack = A @ nu - targets
        worst = int(np.argmin(slack))
        if slack[worst] >= -tol * max(1.0, targets.max()):
            area = float(mu @ (nu * nu))
            return nu, lam, active_set, area
        if worst in active_set:
            raise InfeasibleQP("active constraint remains violated")
        active_set = sorted(active_set + [worst])
    raise IterationBudgetExceeded("active-set iteration did not converge")


def solve_qp_fista(mu: np.ndarray, rows: ConstraintRows,
                   lam: Optional[np.ndarray] = None,
                   tol: float = 1e-7, max_iter: int = 40000,
                   ) -> Tuple[np.ndarray, np.ndarray, float, float]:
    """First-order solver for the same QP, scalable to many rows.

    Maximizes the dual  t.lam - 1/4 lam.A M^-1 A^T lam  over lam >= 0 by
    accelerated projected gradient with adaptive restarts, on rows
    normalized to a unit Gram diagonal, warm-started from a previous
    multiplier vector.  The returned density is rescaled to satisfy
    every row, so the area is a true upper bound for the constrained
    minimum over the accumulated rows; the dual objective is a true
    lower bound.  Terminates when the relative gap drops below ``tol``.

    Returns (nu, lam, area, dual_bound).
    """
    m = len(rows)
    if m == 0:
        raise InfeasibleQP("no constraints; the zero density is optimal")
    A0 = rows.matrix()
    t0 = np.asarray(rows.targets)
    inv2mu = 1.0 / (2.0 * mu)
    # Normalize rows so the dual Hessian has unit diagonal.
    d = A0.multiply(A0) @ (0.5 * inv2mu)
    sc = 1.0 / np.sqrt(np.maximum(d, 1e-300))
    from scipy.sparse import diags

    A = (diags(sc) @ A0).tocsr()
    AT = A.T.tocsr()
    targets = t0 * sc

    def grad_nu(l):
        nu = (AT @ l) * inv2mu
        return targets - A @ nu, nu

    # Lipschitz constant of the dual gradient by power iteration.
    z = np.random.default_rng(7).standard_normal(m)
    nz = 1.0
    for _ in range(30):
        z = A @ ((A.T @ z) * inv2mu)
        nz = np.linalg.norm(z)
        if nz == 0:
            break
        z /= nz
    L = max(nz, 1e-12) * 1.01
    step = 1.0 / L

    l_prev = np.zeros(m)
    if lam is not None:
        l_prev[:len(lam)] = np.maximum(lam, 0.0)
    y = l_prev.copy()
    tk = 1.0
    best_gap = np.inf
    out = None
    for it in range(max_iter):
        g, _ = grad_nu(y)
        l_new = np.maximum(0.0, y + step * g)
        if (g * (l_new - l_prev)).sum() < 0.0:   # adaptive restart
            tk = 1.0
            y = l_prev.copy()
            continue
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * tk * tk))
        y = l_new + ((tk - 1.0) / t_next) * (l_new - l_prev)
        l_prev, tk = l_new, t_next
        if it % 25 == 0 or it == max_iter - 1:
            g, nu = grad_nu(l_new)
            dual = float(targets @ l_new - mu @ (nu * nu))
            lens = A0 @ nu
            scale = np.max(t0 / np.maximum(lens, 1e-30))
            if not np.isfinite(scale) or scale > 1e6:
                continue
            primal = float(scale ** 2 * (mu @ (nu * nu)))
            gap = primal - dual
            ref = max(abs(primal), 1e-12)
            if gap / ref < best_gap:
                best_gap = gap / ref
                out = (nu * scale, l_new.copy(), primal, dual)
            if gap <= tol * ref:
                return out
    if out is None:
        raise IterationBudgetExceeded("dual ascent found no feasible scaling")
    return out
