"""
This module contains a dense two-phase simplex solver (Bland's rule) that returns primal values and row
duals, and a best-bound branch and bound over it for mixed binary programs, seeded by a rounding dive.
Problems solved here have at most a few hundred rows, so the whole tableau is kept in memory.
"""

import heapq
import itertools
import logging
import time
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np

log = logging.getLogger(__name__)

PIVOT_TOL = 1e-9
REDUCED_COST_TOL = 1e-9
FEASIBILITY_TOL = 1e-7
INTEGRALITY_TOL = 1e-6
MAX_PIVOTS = 50000

LE, GE, EQ = '<=', '>=', '=='
FLIPPED = {LE: GE, GE: LE, EQ: EQ}


class LpError(ValueError):
    """A malformed linear program."""


class LpStatus(Enum):
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    UNBOUNDED = 'unbounded'
    NUMERICAL_FAILURE = 'numerical_failure'
    TIME_LIMIT = 'time_limit'
    CUTOFF = 'cutoff'


@dataclass
class LinearProgram:
    """min cost.x  s.t.  rows.x (<=, >=, ==) rhs,  lower <= x <= upper. Lower bounds must be finite."""

    cost: np.ndarray
    rows: Optional[np.ndarray] = None
    senses: tuple = ()
    rhs: Optional[np.ndarray] = None
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    def __post_init__(self):
        self.cost = np.asarray(self.cost, dtype=float).ravel()
        n = self.cost.size

        self.rows = np.zeros((0, n)) if self.rows is None else np.asarray(self.rows, dtype=float).reshape(-1, n)
        self.rhs = np.zeros(0) if self.rhs is None else np.asarray(self.rhs, dtype=float).ravel()
        self.senses = tuple(self.senses)
        self.lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float).ravel().copy()
        self.upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).ravel().copy()

        m = self.rows.shape[0]
        if len(self.senses) != m or self.rhs.size != m:
            raise LpError(f'{m} rows need as many senses and rhs entries (got {len(self.senses)}, {self.rhs.size})')
        if any(sense not in FLIPPED for sense in self.senses):
            raise LpError(f'row senses must be one of {sorted(FLIPPED)}')
        if self.lower.size != n or self.upper.size != n:
            raise LpError('bounds need one entry per variable')
        if not (np.all(np.isfinite(self.cost)) and np.all(np.isfinite(self.rows)) and np.all(np.isfinite(self.rhs))):
            raise LpError('cost, rows and rhs must be finite')
        if not np.all(np.isfinite(self.lower)):
            raise LpError('lower bounds must be finite')
        if np.any(self.lower > self.upper):
            raise LpError('a lower bound exceeds its upper bound')

    @property
    def n_vars(self):
        return self.cost.size

    @property
    def n_rows(self):
        return self.rows.shape[0]

    def is_feasible(self, x, tol=FEASIBILITY_TOL):
        x = np.asarray(x, dtype=float)
        lhs = self.rows @ x
        slack = tol * (1.0 + np.abs(self.rhs))
        senses = np.array(self.senses, dtype=object)

        ok = np.ones(self.n_rows, dtype=bool)
        ok[senses == LE] = lhs[senses == LE] <= self.rhs[senses == LE] + slack[senses == LE]
        ok[senses == GE] = lhs[senses == GE] >= self.rhs[senses == GE] - slack[senses == GE]
        ok[senses == EQ] = np.abs(lhs[senses == EQ] - self.rhs[senses == EQ]) <= slack[senses == EQ]

        in_bounds = np.all(x >= self.lower - tol * (1.0 + np.abs(self.lower)))
        finite = np.isfinite(self.upper)
        in_bounds &= np.all(x[finite] <= self.upper[finite] + tol * (1.0 + np.abs(self.upper[finite])))

        return bool(ok.all() and in_bounds)


@dataclass
class LpSolution:
    status: LpStatus
    x: Optional[np.ndarray] = None
    objective: float = np.nan
    duals: Optional[np.ndarray] = None
    pivots: int = 0


class _Tableau:
    def __init__(self, body, basis, max_pivots):
        self.body = body
        self.basis = basis
        self.obj = np.zeros(body.shape[1])
        self.tol = REDUCED_COST_TOL
        self.pivots = 0
        self.max_pivots = max_pivots

    def price(self, cost):
        self.obj[:-1] = cost - cost[self.basis] @ self.body[:, :-1]
        self.obj[-1] = -cost[self.basis] @ self.body[:, -1]
        self.tol = REDUCED_COST_TOL * np.maximum(1.0, np.abs(cost))

    def pivot(self, r, j):
        self.body[r] /= self.body[r, j]
        column = self.body[:, j].copy()
        column[r] = 0.0
        self.body -= np.outer(column, self.body[r])
        self.obj -= self.obj[j] * self.body[r]
        self.basis[r] = j

        rhs = self.body[:, -1]
        rhs[(rhs < 0) & (rhs > -PIVOT_TOL)] = 0.0
        self.pivots += 1

    def run(self, allowed):
        while True:
            entering = np.flatnonzero((self.obj[:-1] < -self.tol) & allowed)
            if entering.size == 0:
                return LpStatus.OPTIMAL

            j = entering[0]
            column = self.body[:, j]
            eligible = np.flatnonzero(column > PIVOT_TOL)
            if eligible.size == 0:
                return LpStatus.UNBOUNDED

            ratios = self.body[eligible, -1] / column[eligible]
            best = ratios.min()
            ties = eligible[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
            r = ties[np.argmin(self.basis[ties])]

            if self.pivots >= self.max_pivots:
                return LpStatus.NUMERICAL_FAILURE
            self.pivot(r, j)


def solve_lp(p, max_pivots=MAX_PIVOTS):
    """
    Solve a linear program with the two-phase simplex method.

    Variables are shifted to their lower bounds, finite upper bounds become rows and rows with a
    negative right-hand side are negated. Phase 1 minimizes the sum of artificials, which are then
    kept in the tableau but never allowed to re-enter. Bland's rule keeps both phases finite.

    Args:
        p (LinearProgram): The problem.
        max_pivots (int, optional): Pivot limit over both phases.

    Returns:
        LpSolution: Status, primal x, objective and one dual per row of p (>= 0 for rows of
        type >=, <= 0 for rows of type <=).
    """

    n = p.n_vars
    bounded = np.flatnonzero(np.isfinite(p.upper))

    a = np.vstack([p.rows, np.eye(n)[bounded]])
    b = np.concatenate([p.rhs - p.rows @ p.lower, (p.upper - p.lower)[bounded]])
    senses = list(p.senses) + [LE] * bounded.size
    m = b.size

    sign = np.where(b < 0, -1.0, 1.0)
    a = a * sign[:, None]
    b = b * sign
    senses = [FLIPPED[sense] if sg < 0 else sense for sense, sg in zip(senses, sign)]

    n_slack = sum(sense != EQ for sense in senses)
    n_art = sum(sense != LE for sense in senses)
    n_cols = n + n_slack + n_art

    body = np.zeros((m, n_cols + 1))
    body[:, :n] = a
    body[:, -1] = b
    basis = np.empty(m, dtype=int)
    unit_col = np.empty(m, dtype=int)
    artificial = np.zeros(n_cols, dtype=bool)

    slack_col, art_col = n, n + n_slack
    for i, sense in enumerate(senses):
        if sense != EQ:
            body[i, slack_col] = 1.0 if sense == LE else -1.0
            if sense == LE:
                basis[i] = unit_col[i] = slack_col
            slack_col += 1
        if sense != LE:
            body[i, art_col] = 1.0
            artificial[art_col] = True
            basis[i] = unit_col[i] = art_col
            art_col += 1

    tableau = _Tableau(body, basis, max_pivots)

    if artificial.any():
        tableau.price(artificial.astype(float))
        status = tableau.run(np.ones(n_cols, dtype=bool))
        if status is not LpStatus.OPTIMAL:
            log.warning('simplex phase 1 stopped status=%s pivots=%d', status.value, tableau.pivots)
            return LpSolution(LpStatus.NUMERICAL_FAILURE, pivots=tableau.pivots)

        infeasibility = -tableau.obj[-1]
        if infeasibility > FEASIBILITY_TOL * max(1.0, float(b.max(initial=0.0))):
            log.debug('simplex infeasible residual=%.3g rows=%d vars=%d', infeasibility, m, n)
            return LpSolution(LpStatus.INFEASIBLE, pivots=tableau.pivots)

        # drive degenerate artificials out of the basis, rows left over are redundant
        for r in range(m):
            if artificial[tableau.basis[r]]:
                candidates = np.flatnonzero((np.abs(tableau.body[r, :-1]) > PIVOT_TOL) & ~artificial)
                if candidates.size:
                    tableau.pivot(r, candidates[0])

    cost = np.zeros(n_cols)
    cost[:n] = p.cost
    tableau.price(cost)
    status = tableau.run(~artificial)
    if status is not LpStatus.OPTIMAL:
        log.debug('simplex phase 2 stopped status=%s pivots=%d', status.value, tableau.pivots)
        return LpSolution(status, pivots=tableau.pivots)

    x_std = np.zeros(n_cols)
    x_std[tableau.basis] = tableau.body[:, -1]
    x = x_std[:n] + p.lower

    if not p.is_feasible(x):
        log.warning('simplex solution violates the problem rows=%d vars=%d pivots=%d', p.n_rows, n, tableau.pivots)
        return LpSolution(LpStatus.NUMERICAL_FAILURE, pivots=tableau.pivots)

    duals = sign * -tableau.obj[unit_col]

    return LpSolution(
        status=LpStatus.OPTIMAL,
        x=x,
        objective=float(p.cost @ x),
        duals=duals[:p.n_rows],
        pivots=tableau.pivots,
    )


@dataclass
class MixedIntegerProgram:
    lp: LinearProgram
    integer: np.ndarray

    def __post_init__(self):
        self.integer = np.asarray(self.integer, dtype=bool).ravel()
        if self.integer.size != self.lp.n_vars:
            raise LpError('integrality mask needs one entry per variable')
        if np.any(~np.isfinite(self.lp.upper[self.integer])):
            raise LpError('integer variables need finite upper bounds')


@dataclass
class MilpSolution:
    status: LpStatus
    x: Optional[np.ndarray]
    objective: float
    bound: float
    gap: float
    nodes: int


def _branching_variable(x, integer):
    frac = x - np.floor(x)
    distance = np.where(integer, np.minimum(frac, 1.0 - frac), 0.0)
    if distance.max(initial=0.0) <= INTEGRALITY_TOL:
        return None
    return int(np.argmax(distance))


def _is_integral(x, integer):
    return bool(np.all(np.abs(x[integer] - np.round(x[integer])) <= INTEGRALITY_TOL))


def _dive(p, node, deadline):
    """
    Depth-first rounding dive: fix the most fractional variable to its nearest integer (up on ties),
    falling back to the other side when that relaxation is infeasible.

    Returns:
        tuple: (integral LpSolution or None, relaxations solved).
    """

    lower, upper = p.lp.lower.copy(), p.lp.upper.copy()
    nodes = 0

    while True:
        j = _branching_variable(node.x, p.integer)
        if j is None:
            return node, nodes
        if time.monotonic() > deadline:
            return None, nodes

        near = np.floor(node.x[j] + 0.5)
        far = np.ceil(node.x[j]) if near == np.floor(node.x[j]) else np.floor(node.x[j])
        for value in (near, far):
            fixed_lower, fixed_upper = lower.copy(), upper.copy()
            fixed_lower[j] = fixed_upper[j] = value
            child = solve_lp(replace(p.lp, lower=fixed_lower, upper=fixed_upper))
            nodes += 1
            if child.status is LpStatus.OPTIMAL:
                break
        else:
            return None, nodes

        lower, upper, node = fixed_lower, fixed_upper, child


def solve_milp(p, time_budget=60.0, start=None, cutoff=None):
    """
    Best-bound branch and bound on the most fractional integer variable (lowest index on ties). A
    rounding dive from the root relaxation supplies the first incumbent.

    Args:
        p (MixedIntegerProgram): The problem.
        time_budget (float, optional): Seconds before the best incumbent is returned with its gap.
        start (np.ndarray, optional): A feasible integral point used as the initial incumbent.
        cutoff (float, optional): Stop as soon as an incumbent with objective at or below this value exists.

    Returns:
        MilpSolution: Status OPTIMAL, INFEASIBLE, TIME_LIMIT or CUTOFF (incumbent and gap) or the LP
        failure status of the root relaxation. nodes counts solved relaxations, the root included.
    """

    started = time.monotonic()
    deadline = started + time_budget
    counter = itertools.count()

    incumbent, best = None, np.inf
    if start is not None:
        start = np.asarray(start, dtype=float)
        if p.lp.is_feasible(start) and _is_integral(start, p.integer):
            incumbent, best = start.copy(), float(p.lp.cost @ start)
        else:
            log.warning('ignoring an infeasible start point for branch and bound')

    root = solve_lp(p.lp)
    nodes = 1
    if root.status is LpStatus.INFEASIBLE:
        return MilpSolution(LpStatus.INFEASIBLE, None, np.inf, np.inf, np.inf, nodes)
    if root.status is not LpStatus.OPTIMAL:
        return MilpSolution(root.status, None, np.nan, np.nan, np.inf, nodes)

    dived, dive_nodes = _dive(p, root, deadline)
    nodes += dive_nodes
    if dived is not None and dived.objective < best:
        x = dived.x.copy()
        x[p.integer] = np.round(x[p.integer])
        best, incumbent = float(p.lp.cost @ x), x

    heap = [(root.objective, next(counter), p.lp.lower, p.lp.upper, root)]
    status = LpStatus.OPTIMAL

    while heap:
        if cutoff is not None and best <= cutoff:
            status = LpStatus.CUTOFF
            break

        bound, _, lower, upper, node = heapq.heappop(heap)
        if incumbent is not None and bound >= best - 1e-9 * max(1.0, abs(best)):
            continue

        j = _branching_variable(node.x, p.integer)
        if j is None:
            x = node.x.copy()
            x[p.integer] = np.round(x[p.integer])
            best, incumbent = float(p.lp.cost @ x), x
            continue

        if time.monotonic() > deadline:
            heapq.heappush(heap, (bound, next(counter), lower, upper, node))
            status = LpStatus.TIME_LIMIT
            break

        down_upper = upper.copy()
        down_upper[j] = np.floor(node.x[j])
        up_lower = lower.copy()
        up_lower[j] = np.ceil(node.x[j])

        for child_lower, child_upper in ((lower, down_upper), (up_lower, upper)):
            if np.any(child_lower > child_upper):
                continue
            child = solve_lp(replace(p.lp, lower=child_lower, upper=child_upper))
            nodes += 1
            if child.status is LpStatus.OPTIMAL and child.objective < best:
                heapq.heappush(heap, (child.objective, next(counter), child_lower, child_upper, child))
            elif child.status is LpStatus.NUMERICAL_FAILURE:
                log.warning('branch and bound node failed numerically nodes=%d', nodes)

    open_bound = min([entry[0] for entry in heap] + [best])
    if incumbent is None:
        final = LpStatus.TIME_LIMIT if status is LpStatus.TIME_LIMIT else LpStatus.INFEASIBLE
        return MilpSolution(final, None, np.inf, open_bound, np.inf, nodes)

    gap = (best - open_bound) / max(1.0, abs(best))
    if status is LpStatus.TIME_LIMIT:
        log.warning('branch and bound hit the time budget nodes=%d gap=%.3g', nodes, gap)

    return MilpSolution(status, incumbent, best, open_bound, max(gap, 0.0), nodes)
