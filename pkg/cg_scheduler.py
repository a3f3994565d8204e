"""
This module contains the column generation scheduler that minimizes the total electrical power of the
VLC network. The restricted master problem mixes independent sets (columns) over one time unit, the
pricing problem is a mixed binary program over the link indicators and the DC powers, and the loop stops
once no column has negative reduced cost or the upper and lower bounds are within a factor 1 + epsilon.
A reality check then re-rates the chosen columns with co-channel interference and re-solves the mix.
"""

import logging
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import FrozenSet, List, Optional

import numpy as np
import pandas as pd

import capacity
import optics
from conflict import build_conflict_graph, enumerate_independent_sets, independence_constraints
from lp import GE, LE, LinearProgram, LpStatus, MixedIntegerProgram, solve_lp, solve_milp
from scenario import build_candidate_links

log = logging.getLogger(__name__)

ILLUM_TOL = 1e-6
REDUCED_COST_TOL = 1e-9
SLACK_COST_PER_MBPS = 1e6
SLACK_TOL = 1e-6
OMEGA_TOL = 1e-9
KAPPA = 1.0
MAX_ITERATIONS = 500
PRICING_TIME_BUDGET = 60.0

ITERATION_LOG_COLUMNS = ['iteration', 'z_upper', 'z_lower', 'reduced_cost', 'n_columns', 'wall_ms']


class IlluminationInfeasible(RuntimeError):
    """The illuminance bounds cannot be met, optionally at a known grid point."""

    def __init__(self, message, grid_point=None, position=None):
        self.grid_point = grid_point
        self.position = position
        if position is not None:
            message = f'{message} at grid point {grid_point} {tuple(round(v, 3) for v in position)}'
        super().__init__(message)


class ColumnGenerationError(RuntimeError):
    pass


class CgStatus(Enum):
    OPTIMAL = 'optimal'
    BOUNDED = 'bounded'
    INFEASIBLE = 'infeasible'
    ABORTED = 'aborted'
    ITERATION_LIMIT = 'iteration_limit'


@dataclass(frozen=True, eq=False)
class IndependentSetColumn:
    schedule: FrozenSet[int]
    dc_power: np.ndarray
    p_ac_electrical: float
    p_dc_electrical: float
    rate_per_ut: np.ndarray

    @property
    def cost(self):
        return self.p_ac_electrical + self.p_dc_electrical


@dataclass
class RmpSolution:
    omega: np.ndarray
    slack_mbps: np.ndarray
    z_upper: float
    lam: np.ndarray
    mu: float

    @property
    def has_slack(self):
        return bool(self.slack_mbps.size and self.slack_mbps.max() > SLACK_TOL)


@dataclass
class PricingResult:
    column: IndependentSetColumn
    reduced_cost: float
    reduced_cost_bound: float
    nodes: int
    status: LpStatus = LpStatus.OPTIMAL


@dataclass
class CgSolution:
    columns: List[IndependentSetColumn]
    omega: np.ndarray
    z_upper: float
    z_lower: float
    p_illumi_min: float
    epsilon: float
    iterations: int
    status: CgStatus
    lam: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mu: float = 0.0
    reduced_cost: float = np.nan
    slack_mbps: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iteration_log: pd.DataFrame = field(default_factory=lambda: pd.DataFrame(columns=ITERATION_LOG_COLUMNS))
    algorithm: str = 'cg'
    reality_checked: bool = False
    sir_threshold: Optional[float] = None
    idle_dc_power: Optional[np.ndarray] = None
    model: Optional['PowerModel'] = field(default=None, repr=False)

    @property
    def feasible(self):
        return self.status in (CgStatus.OPTIMAL, CgStatus.BOUNDED)

    @property
    def time_used(self):
        return float(np.sum(self.omega))

    @property
    def excess_power(self):
        """P_total - P_illumi^min, the power reported in the experiments."""
        return self.z_upper - self.p_illumi_min

    def active_columns(self):
        return [(float(w), col) for w, col in zip(self.omega, self.columns) if w > OMEGA_TOL]


class PowerModel:
    """
    Linear illuminance and power data of one scenario and its candidate links, shared by every LP and
    MILP built during a run. Grid points enter the LPs lazily: a row is added once a solution violates
    it, and stays for later solves of the same model.
    """

    def __init__(self, s, links, rows_per_round=None):
        self.scenario = s
        self.links = list(links)

        points = optics.grid_points(s)
        rho = s.constants.luminosity_efficacy
        grid = s.illum_grid

        self.dc_transmitters = s.dc_transmitters()
        self.dc_lux = rho * optics.dc_gain_matrix(s, points)
        p_ac_avg = np.array([link.p_ac_avg for link in self.links], dtype=float)
        self.ac_lux = rho * optics.ac_gain_matrix(self.links, points) * p_ac_avg
        self.lower = grid.lower - grid.ambient
        self.upper = grid.upper - grid.ambient
        self.positions = grid.positions

        chips = [s.aps[i].chips[m] for i, m in self.dc_transmitters]
        self.dc_cost = np.array([1.0 / chip.eta_dc for chip in chips])
        self.dc_cap = np.array([chip.p_max for chip in chips])

        groups = [s.power_group(i, m) for i, m in self.dc_transmitters]
        if len(set(groups)) != len(groups):
            raise ColumnGenerationError('every power group must hold exactly one DC transmitter')
        group_index = {g: t for t, g in enumerate(groups)}
        self.link_group = np.array([group_index[s.power_group(l.ap, l.chip)] for l in self.links], dtype=int)
        self.ac_peak = np.array([l.p_ac_pp for l in self.links], dtype=float)
        self.ac_cost = np.array([l.p_ac_avg / l.eta_ac for l in self.links], dtype=float)
        self.link_ut = np.array([l.ut for l in self.links], dtype=int)
        self.link_capacity = np.array([l.capacity for l in self.links], dtype=float)

        self.rows_per_round = rows_per_round or max(10, len(points) // 25)
        self.lower_rows = set()
        self.upper_rows = set()
        self._min_illumination = None

    @property
    def n_links(self):
        return len(self.links)

    @property
    def n_dc(self):
        return len(self.dc_transmitters)

    @property
    def n_uts(self):
        return len(self.scenario.uts)

    def ac_load(self, schedule):
        idx = np.array(sorted(schedule), dtype=int)
        load = np.zeros(self.n_dc)
        np.add.at(load, self.link_group[idx], self.ac_peak[idx])
        return load

    def ac_illuminance(self, schedule):
        idx = np.array(sorted(schedule), dtype=int)
        return self.ac_lux[:, idx].sum(axis=1)

    def rate_per_ut(self, schedule):
        idx = np.array(sorted(schedule), dtype=int)
        rate = np.zeros(self.n_uts)
        np.add.at(rate, self.link_ut[idx], self.link_capacity[idx])
        return rate

    def illuminance(self, schedule, dc_power):
        """Illuminance on the grid without ambient light."""
        return self.dc_lux @ np.asarray(dc_power, dtype=float) + self.ac_illuminance(schedule)

    def add_violated_rows(self, lux):
        """
        Activate the most violated grid rows that are not in the LPs yet.

        Returns:
            bool: True when rows were added.
        """

        below = np.where(self.lower - lux > ILLUM_TOL, self.lower - lux, 0.0)
        above = np.where(lux - self.upper > ILLUM_TOL, lux - self.upper, 0.0)
        below[list(self.lower_rows)] = 0.0
        above[list(self.upper_rows)] = 0.0

        candidates = [(v, k, 'lower') for k, v in enumerate(below) if v > 0]
        candidates += [(v, k, 'upper') for k, v in enumerate(above) if v > 0]
        if not candidates:
            return False

        candidates.sort(key=lambda c: (-c[0], c[1]))
        for _, k, side in candidates[:self.rows_per_round]:
            (self.lower_rows if side == 'lower' else self.upper_rows).add(k)
        log.debug('illuminance rows lower=%d upper=%d', len(self.lower_rows), len(self.upper_rows))
        return True

    def illuminance_rows(self, n_x_before=0, ac_coeffs=None):
        """
        Lazy illuminance rows over the variables [x (n_x_before), P_DC].

        Returns:
            tuple: (rows, senses, rhs) ready for a LinearProgram.
        """

        lower_k = sorted(self.lower_rows)
        upper_k = sorted(self.upper_rows)
        rows, senses, rhs = [], [], []

        for ks, sense, bound in ((lower_k, GE, self.lower), (upper_k, LE, self.upper)):
            for k in ks:
                row = np.zeros(n_x_before + self.n_dc)
                if ac_coeffs is not None:
                    row[:n_x_before] = ac_coeffs[k]
                row[n_x_before:] = self.dc_lux[k]
                rows.append(row)
                senses.append(sense)
                rhs.append(bound[k])

        return rows, senses, rhs

    def _diagnose(self, ac, headroom):
        brightest = self.dc_lux @ headroom + ac
        short = self.lower - brightest
        if short.max(initial=-np.inf) > ILLUM_TOL:
            k = int(np.argmax(short))
            raise IlluminationInfeasible(
                f'lower bound {self.lower[k]:.1f} lux unreachable at full DC power', k, self.positions[k]
            )
        excess = ac - self.upper
        if excess.max(initial=-np.inf) > ILLUM_TOL:
            k = int(np.argmax(excess))
            raise IlluminationInfeasible(f'AC light alone exceeds the upper bound {self.upper[k]:.1f} lux', k, self.positions[k])

    def dc_optimum(self, schedule):
        """
        Cheapest DC optical power per transmitter meeting the grid bounds with the AC light of the
        schedule fixed and the power budget of every group respected.

        Raises:
            IlluminationInfeasible: When no DC vector meets the bounds.
        """

        ac = self.ac_illuminance(schedule)
        headroom = self.dc_cap - self.ac_load(schedule)
        if headroom.min(initial=0.0) < -1e-12:
            raise IlluminationInfeasible('AC peak power exceeds the optical budget of a transmitter')
        headroom = np.maximum(headroom, 0.0)
        self._diagnose(ac, headroom)

        while True:
            rows, senses, rhs = self.illuminance_rows()
            ac_rhs = [ac[k] for k in sorted(self.lower_rows)] + [ac[k] for k in sorted(self.upper_rows)]
            problem = LinearProgram(
                cost=self.dc_cost,
                rows=np.array(rows).reshape(-1, self.n_dc),
                senses=senses,
                rhs=np.array(rhs) - np.array(ac_rhs),
                lower=np.zeros(self.n_dc),
                upper=headroom,
            )
            sol = solve_lp(problem)
            if sol.status is LpStatus.INFEASIBLE:
                raise IlluminationInfeasible('illuminance bounds cannot be met jointly')
            if sol.status is not LpStatus.OPTIMAL:
                raise ColumnGenerationError(f'DC power LP ended with status {sol.status.value}')

            if not self.add_violated_rows(self.dc_lux @ sol.x + ac):
                return sol.x

    def min_illumination(self):
        if self._min_illumination is None:
            dc = self.dc_optimum(frozenset())
            self._min_illumination = (float(self.dc_cost @ dc), dc)
        return self._min_illumination

    def make_column(self, schedule):
        schedule = frozenset(int(l) for l in schedule)
        dc = self.dc_optimum(schedule)
        idx = np.array(sorted(schedule), dtype=int)
        return IndependentSetColumn(
            schedule=schedule,
            dc_power=dc,
            p_ac_electrical=float(self.ac_cost[idx].sum()),
            p_dc_electrical=float(self.dc_cost @ dc),
            rate_per_ut=self.rate_per_ut(schedule),
        )


def min_illumination_power(s, model=None):
    """
    Electrical power of the cheapest DC-only lighting that meets the illuminance bounds.

    Args:
        s (Scenario): The instance.
        model (PowerModel, optional): Model to reuse, built without links when absent.

    Returns:
        tuple: (P_illumi^min in W, DC optical power per DC transmitter).
    """

    model = model or PowerModel(s, [])
    return model.min_illumination()


def optimize_dc_for_schedule(s, schedule, model):
    """DC optical power vector of the cheapest lighting for a schedule of link ids."""

    if model.scenario is not s:
        raise ColumnGenerationError('power model was built for another scenario')
    return model.dc_optimum(frozenset(schedule))


def initial_columns(model):
    """
    One column per candidate link. Singletons whose lighting is infeasible are dropped.

    Raises:
        ColumnGenerationError: When every singleton is infeasible.
    """

    columns = []
    for link in model.links:
        try:
            columns.append(model.make_column({link.id}))
        except IlluminationInfeasible as e:
            log.warning('dropping initial column link=%d reason=%s', link.id, e)

    if model.links and not columns:
        raise ColumnGenerationError('no single-link schedule meets the illuminance bounds')
    return columns


def solve_rmp(columns, s, p_illumi_min):
    """
    Restricted master problem over the given columns.

    Demand rows are scaled to Mbps and each carries an artificial slack priced at SLACK_COST_PER_MBPS,
    so the LP is always feasible and its duals exist. lam is returned per bit/s.

    Args:
        columns (list of IndependentSetColumn): Column pool.
        s (Scenario): The instance.
        p_illumi_min (float): Power of the illumination-only periods.

    Returns:
        RmpSolution: Time fractions, slacks, z_upper and duals.
    """

    n_cols = len(columns)
    n_uts = len(s.uts)

    rates = np.zeros((n_uts, n_cols))
    for q, col in enumerate(columns):
        rates[:, q] = col.rate_per_ut / 1e6

    cost = np.concatenate([[col.cost - p_illumi_min for col in columns], np.full(n_uts, SLACK_COST_PER_MBPS)])
    rows = np.vstack([
        np.hstack([rates, np.eye(n_uts)]),
        np.concatenate([np.ones(n_cols), np.zeros(n_uts)])[None, :],
    ])
    rhs = np.concatenate([s.demands / 1e6, [1.0]])

    sol = solve_lp(LinearProgram(cost=cost, rows=rows, senses=[GE] * n_uts + [LE], rhs=rhs))
    if sol.status is not LpStatus.OPTIMAL:
        raise ColumnGenerationError(f'restricted master problem ended with status {sol.status.value}')

    # rows with zero demand may carry any dual in a degenerate basis, zero stays dual optimal
    lam = np.where(s.demands > 0, sol.duals[:n_uts], 0.0)

    return RmpSolution(
        omega=sol.x[:n_cols],
        slack_mbps=sol.x[n_cols:],
        z_upper=sol.objective + p_illumi_min,
        lam=lam / 1e6,
        mu=float(sol.duals[n_uts]),
    )


def solve_pricing(lam, mu, model, graph, p_illumi_min, time_budget=PRICING_TIME_BUDGET, first_improving=False):
    """
    Pricing problem: the independent set and DC powers of least reduced cost.

    Variables are the link indicators x followed by the DC optical powers. Rows are the independence
    rows of the conflict graph, the optical budget of every power group and the lazily activated
    illuminance rows of the grid. The dark schedule with the minimum illumination DC powers is the
    starting incumbent, and the objective is normalized to unit scale before branch and bound.
    With first_improving the search stops at the first column of negative reduced cost.

    Returns:
        PricingResult: Column, its exact reduced cost and a lower bound on the least reduced cost.
    """

    s = model.scenario
    n_x, n_dc = model.n_links, model.n_dc
    lam = np.asarray(lam, dtype=float)

    cost = np.concatenate([model.ac_cost - lam[model.link_ut] * model.link_capacity, model.dc_cost])
    constant = -p_illumi_min - mu
    scale = max(1.0, float(np.abs(cost).max(initial=0.0)))
    start = np.concatenate([np.zeros(n_x), model.min_illumination()[1]])
    cutoff = None
    if first_improving:
        cutoff = (-constant - REDUCED_COST_TOL * max(1.0, abs(constant))) / scale

    is_rows, is_rhs = independence_constraints(graph, s)
    base_rows = [np.concatenate([row, np.zeros(n_dc)]) for row in is_rows]
    base_senses = [LE] * len(base_rows)
    base_rhs = list(is_rhs)

    for t in range(n_dc):
        members = np.flatnonzero(model.link_group == t)
        if members.size == 0:
            continue
        row = np.zeros(n_x + n_dc)
        row[members] = model.ac_peak[members]
        row[n_x + t] = 1.0
        base_rows.append(row)
        base_senses.append(LE)
        base_rhs.append(model.dc_cap[t])

    lower = np.zeros(n_x + n_dc)
    upper = np.concatenate([np.ones(n_x), model.dc_cap])
    integer = np.concatenate([np.ones(n_x, dtype=bool), np.zeros(n_dc, dtype=bool)])
    nodes = 0

    while True:
        illum_rows, illum_senses, illum_rhs = model.illuminance_rows(n_x, model.ac_lux)
        rows = base_rows + illum_rows
        problem = MixedIntegerProgram(
            lp=LinearProgram(
                cost=cost / scale,
                rows=np.array(rows).reshape(-1, n_x + n_dc),
                senses=base_senses + illum_senses,
                rhs=np.array(base_rhs + illum_rhs),
                lower=lower,
                upper=upper,
            ),
            integer=integer,
        )
        result = solve_milp(problem, time_budget=time_budget, start=start, cutoff=cutoff)
        nodes += result.nodes
        if result.x is None:
            raise ColumnGenerationError(f'pricing problem ended with status {result.status.value}')

        schedule = frozenset(int(l) for l in np.flatnonzero(result.x[:n_x] > 0.5))
        lux = model.illuminance(schedule, result.x[n_x:])
        if not model.add_violated_rows(lux):
            break

    column = model.make_column(schedule)
    reduced_cost = column.cost - p_illumi_min - float(lam @ column.rate_per_ut) - mu
    bound = min(result.bound * scale + constant, reduced_cost)
    if result.status is LpStatus.TIME_LIMIT:
        log.warning('pricing stopped at the time budget gap=%.3g', result.gap)

    return PricingResult(column=column, reduced_cost=reduced_cost, reduced_cost_bound=bound, nodes=nodes,
                         status=result.status)


def within_epsilon(z_upper, z_lower, epsilon):
    return z_lower > 0 and z_upper / z_lower <= 1 + epsilon


def column_generation(s, epsilon, sir_threshold=3.0, links=None, graph=None, model=None,
                      max_iterations=MAX_ITERATIONS, gap_on_excess=False,
                      pricing_time_budget=PRICING_TIME_BUDGET):
    """
    Column generation with epsilon-bounded termination.

    z_lower is kept as max(z_lower, z_upper + c_r*), where c_r* is a lower bound on the least reduced
    cost found by pricing. The loop stops when c_r* is non-negative, when z_upper / z_lower <= 1 + epsilon
    with all demands met, or when pricing returns a column already in the pool.

    Args:
        s (Scenario): The instance.
        epsilon (float): Approximation tolerance in [0, 1).
        sir_threshold (float, optional): SIR threshold of the conflict graph when none is given.
        links (list of Link, optional): Candidate links, built from s when absent.
        graph (ConflictGraph, optional): Conflict graph over the links.
        model (PowerModel, optional): Power model over the links.
        max_iterations (int, optional): Iteration limit.
        gap_on_excess (bool, optional): Apply the epsilon test to z - P_illumi^min instead of z.
        pricing_time_budget (float, optional): Seconds per pricing MILP.

    Returns:
        CgSolution: Column pool, time fractions, bounds and the iteration log.
    """

    if not 0 <= epsilon < 1:
        raise ValueError(f'epsilon must lie in [0, 1) (got {epsilon})')

    links = build_candidate_links(s) if links is None else links
    graph = build_conflict_graph(links, sir_threshold, s) if graph is None else graph
    model = PowerModel(s, links) if model is None else model

    p_il, idle_dc = model.min_illumination()
    columns = initial_columns(model)
    seen = {col.schedule for col in columns}

    z_lower = -np.inf
    history = []
    status = CgStatus.ITERATION_LIMIT
    rmp, pricing = None, None

    if not columns:
        rmp = RmpSolution(np.zeros(0), s.demands / 1e6, p_il + SLACK_COST_PER_MBPS * s.demands.sum() / 1e6,
                          np.zeros(len(s.uts)), 0.0)
        status = CgStatus.OPTIMAL
        max_iterations = 0

    for iteration in range(1, max_iterations + 1):
        started = time.perf_counter()
        rmp = solve_rmp(columns, s, p_il)
        pricing = solve_pricing(rmp.lam, rmp.mu, model, graph, p_il, time_budget=pricing_time_budget,
                                first_improving=rmp.has_slack)
        z_lower = max(z_lower, rmp.z_upper + KAPPA * pricing.reduced_cost_bound)

        wall_ms = (time.perf_counter() - started) * 1000
        history.append([iteration, rmp.z_upper, z_lower, pricing.reduced_cost, len(columns), wall_ms])
        log.info('cg iteration=%d z_upper=%.6f z_lower=%.6f reduced_cost=%.3e columns=%d wall_ms=%.0f',
                 iteration, rmp.z_upper, z_lower, pricing.reduced_cost, len(columns), wall_ms)

        if pricing.reduced_cost_bound >= -REDUCED_COST_TOL * max(1.0, abs(rmp.z_upper)):
            status = CgStatus.OPTIMAL
            break

        offset = p_il if gap_on_excess else 0.0
        if not rmp.has_slack and within_epsilon(rmp.z_upper - offset, z_lower - offset, epsilon):
            status = CgStatus.BOUNDED
            break

        if pricing.reduced_cost >= -REDUCED_COST_TOL * max(1.0, abs(rmp.z_upper)):
            log.error('pricing found no improving column status=%s reduced_cost_bound=%.3e',
                      pricing.status.value, pricing.reduced_cost_bound)
            status = CgStatus.ABORTED
            break

        if pricing.column.schedule in seen:
            log.error('pricing returned a pooled column schedule=%s reduced_cost=%.3e',
                      sorted(pricing.column.schedule), pricing.reduced_cost)
            status = CgStatus.ABORTED
            break

        columns.append(pricing.column)
        seen.add(pricing.column.schedule)

    if status in (CgStatus.OPTIMAL, CgStatus.ITERATION_LIMIT) and rmp.has_slack:
        log.warning('demands cannot be met shortfall_mbps=%.3f', float(rmp.slack_mbps.sum()))
        status = CgStatus.INFEASIBLE

    return CgSolution(
        columns=columns,
        omega=rmp.omega,
        z_upper=rmp.z_upper,
        z_lower=z_lower,
        p_illumi_min=p_il,
        epsilon=epsilon,
        iterations=len(history),
        status=status,
        lam=rmp.lam,
        mu=rmp.mu,
        reduced_cost=pricing.reduced_cost if pricing else 0.0,
        slack_mbps=rmp.slack_mbps,
        iteration_log=pd.DataFrame(history, columns=ITERATION_LOG_COLUMNS),
        sir_threshold=graph.sir_threshold,
        idle_dc_power=idle_dc,
        model=model,
    )


def physical_rates(model, schedule):
    """Per-UT rate of a schedule with the co-channel interference of its own links."""

    active = [model.links[l] for l in sorted(schedule)]
    rate = np.zeros(model.n_uts)
    for link, link_rate in zip(active, capacity.link_rates(model.scenario, active)):
        rate[link.ut] += link_rate.capacity
    return rate


def reality_check(sol, s):
    """
    Re-rate every scheduled column under the Physical Model and re-solve the master problem over
    exactly those columns.

    Args:
        sol (CgSolution): A feasible solution carrying its power model.
        s (Scenario): The instance.

    Returns:
        CgSolution: The re-optimized solution, with status INFEASIBLE when the time budget no
        longer covers the demands.
    """

    if not sol.feasible:
        raise ValueError(f'reality check needs a feasible solution (status {sol.status.value})')
    if sol.model is None or sol.model.scenario is not s:
        raise ValueError('solution does not carry the power model of this scenario')

    checked = [replace(col, rate_per_ut=physical_rates(sol.model, col.schedule)) for _, col in sol.active_columns()]
    if not checked:
        return replace(sol, reality_checked=True)

    rmp = solve_rmp(checked, s, sol.p_illumi_min)
    status = CgStatus.INFEASIBLE if rmp.has_slack else sol.status
    log.info('reality check %s z_protocol=%.6f z_physical=%.6f status=%s',
             sol.algorithm, sol.z_upper, rmp.z_upper, status.value)

    return replace(
        sol,
        columns=checked,
        omega=rmp.omega,
        z_upper=rmp.z_upper,
        status=status,
        lam=rmp.lam,
        mu=rmp.mu,
        slack_mbps=rmp.slack_mbps,
        reality_checked=True,
    )


def solve_full_master(model, graph):
    """
    Master problem over every independent set of the conflict graph. Only usable on small instances,
    where it gives the exact optimum the column generation is checked against.

    Returns:
        RmpSolution: The master problem optimum, columns listed by exhaustive_columns().
    """

    columns = exhaustive_columns(model, graph)
    p_il, _ = model.min_illumination()
    return solve_rmp(columns, model.scenario, p_il)


def exhaustive_columns(model, graph):
    columns = []
    for schedule in enumerate_independent_sets(graph, model.scenario):
        try:
            columns.append(model.make_column(schedule))
        except IlluminationInfeasible:
            log.debug('independent set %s has no feasible lighting', sorted(schedule))
    return columns
