"""
This module contains the schedulers the column generation results are compared against: random link
scheduling in the style of VICO and maximum weighted independent set scheduling. Both pick one
independent set at a time, give it the time its neediest UT still requires and stop once every demand
is met or the time unit is used up. DC power per set comes from the same LP as the column generation.
"""

import logging
import time
from dataclasses import dataclass

import numpy as np
import pandas as pd

from cg_scheduler import (ITERATION_LOG_COLUMNS, CgSolution, CgStatus, IlluminationInfeasible, IndependentSetColumn,
                          PowerModel, SLACK_TOL)
from conflict import build_conflict_graph, independence_constraints, is_independent
from lp import LE, LinearProgram, MixedIntegerProgram, solve_milp
from scenario import build_candidate_links

log = logging.getLogger(__name__)

DEMAND_TOL = 1.0  # bit/s
TIME_TOL = 1e-12
MWIS_TIME_BUDGET = 30.0


@dataclass
class BaselineSolution(CgSolution):
    algorithm: str = 'vico'


def _prepare(s, sir_threshold, links, graph, model):
    links = build_candidate_links(s) if links is None else links
    graph = build_conflict_graph(links, sir_threshold, s) if graph is None else graph
    model = PowerModel(s, links) if model is None else model
    return links, graph, model


def uniform_dc_column(model, schedule):
    """
    Column whose DC power is one level shared by all transmitters, set so that the room-mean
    illuminance equals the room-mean lower bound. The grid bounds are not enforced.
    """

    schedule = frozenset(schedule)
    ac = model.ac_illuminance(schedule)
    headroom = np.maximum(model.dc_cap - model.ac_load(schedule), 0.0)

    per_watt = model.dc_lux.sum(axis=1).mean()
    level = max(0.0, (model.lower.mean() - ac.mean()) / per_watt) if per_watt > 0 else 0.0
    dc = np.minimum(np.full(model.n_dc, level), headroom)

    idx = np.array(sorted(schedule), dtype=int)
    return IndependentSetColumn(
        schedule=schedule,
        dc_power=dc,
        p_ac_electrical=float(model.ac_cost[idx].sum()),
        p_dc_electrical=float(model.dc_cost @ dc),
        rate_per_ut=model.rate_per_ut(schedule),
    )


def _allocate(column, remaining, budget):
    served = column.rate_per_ut > 0
    if not np.any(served & (remaining > DEMAND_TOL)):
        return 0.0
    need = np.where(served, remaining / np.where(served, column.rate_per_ut, 1.0), 0.0)
    return float(min(need.max(), budget))


def _finish(algorithm, columns, omega, remaining, model, p_il, idle_dc, history, sir_threshold):
    omega = np.array(omega, dtype=float)
    z = float(sum(w * col.cost for w, col in zip(omega, columns)) + (1 - omega.sum()) * p_il)
    slack = remaining / 1e6
    status = CgStatus.INFEASIBLE if slack.max(initial=0.0) > SLACK_TOL else CgStatus.OPTIMAL
    if status is CgStatus.INFEASIBLE:
        log.warning('%s leaves demands unmet shortfall_mbps=%.3f', algorithm, float(slack.sum()))

    return BaselineSolution(
        columns=columns,
        omega=omega,
        z_upper=z,
        z_lower=np.nan,
        p_illumi_min=p_il,
        epsilon=np.nan,
        iterations=len(columns),
        status=status,
        lam=np.zeros(model.n_uts),
        slack_mbps=slack,
        iteration_log=pd.DataFrame(history, columns=ITERATION_LOG_COLUMNS),
        algorithm=algorithm,
        sir_threshold=sir_threshold,
        idle_dc_power=idle_dc,
        model=model,
    )


def _run(algorithm, model, pick, p_il, idle_dc, sir_threshold):
    remaining = model.scenario.demands.copy()
    budget = 1.0
    columns, omega, history = [], [], []

    while remaining.max(initial=0.0) > DEMAND_TOL and budget > TIME_TOL:
        started = time.perf_counter()
        column = pick(remaining)
        if column is None:
            break
        w = _allocate(column, remaining, budget)
        if w <= 0:
            break

        remaining = np.maximum(remaining - w * column.rate_per_ut, 0.0)
        budget -= w
        columns.append(column)
        omega.append(w)

        z = sum(wq * col.cost for wq, col in zip(omega, columns)) + budget * p_il
        wall_ms = (time.perf_counter() - started) * 1000
        history.append([len(columns), z, np.nan, np.nan, len(columns), wall_ms])
        log.debug('%s pick=%s omega=%.4f budget=%.4f', algorithm, sorted(column.schedule), w, budget)

    return _finish(algorithm, columns, omega, remaining, model, p_il, idle_dc, history, sir_threshold)


def vico_random_schedule(s, seed, sir_threshold=3.0, links=None, graph=None, model=None, illum_constraint=True):
    """
    Random link scheduling: insert the links of unserved UTs in a random order while the set stays
    independent, then drop links from the end until the lighting LP is feasible.

    Args:
        s (Scenario): The instance.
        seed (int): Seed of the random link orders.
        sir_threshold (float, optional): SIR threshold of the conflict graph when none is given.
        links, graph, model: Prebuilt candidate links, conflict graph and power model.
        illum_constraint (bool, optional): When False the DC level is uniform and the grid bounds are
            ignored, as in the original VICO scheme.

    Returns:
        BaselineSolution: The schedule, before the reality check.
    """

    links, graph, model = _prepare(s, sir_threshold, links, graph, model)
    rng = np.random.default_rng(seed)

    if illum_constraint:
        p_il, idle_dc = model.min_illumination()
    else:
        idle = uniform_dc_column(model, frozenset())
        p_il, idle_dc = idle.cost, idle.dc_power

    def pick(remaining):
        wanting = [l for l in links if remaining[l.ut] > DEMAND_TOL and l.capacity > 0]
        order = rng.permutation(len(wanting))
        inserted = []
        for idx in order:
            candidate = inserted + [wanting[idx].id]
            if is_independent(candidate, graph, s):
                inserted = candidate

        if not illum_constraint:
            return uniform_dc_column(model, inserted) if inserted else None
        while inserted:
            try:
                return model.make_column(inserted)
            except IlluminationInfeasible:
                inserted = inserted[:-1]
        return None

    name = 'vico' if illum_constraint else 'vico_no_illum'
    return _run(name, model, pick, p_il, idle_dc, graph.sir_threshold)


def mwis_schedule(s, sir_threshold=3.0, links=None, graph=None, model=None, time_budget=MWIS_TIME_BUDGET):
    """
    Maximum weighted independent set scheduling. A link weighs the remaining demand of its UT in Mbps,
    plus a small capacity term so the best link of a UT wins ties. Sets whose lighting is infeasible
    are excluded with a no-good cut and the MILP is solved again.

    Returns:
        BaselineSolution: The schedule, before the reality check.
    """

    links, graph, model = _prepare(s, sir_threshold, links, graph, model)
    p_il, idle_dc = model.min_illumination()

    n = model.n_links
    is_rows, is_rhs = independence_constraints(graph, s)
    top_capacity = max(model.link_capacity.max(initial=0.0), 1.0)

    def pick(remaining):
        weights = remaining[model.link_ut] / 1e6 * (1 + 1e-6 * model.link_capacity / top_capacity)
        weights[(model.link_capacity <= 0) | (remaining[model.link_ut] <= DEMAND_TOL)] = 0.0
        if not np.any(weights > 0):
            return None

        cut_rows, cut_rhs = [], []
        while True:
            rows = list(is_rows) + cut_rows
            problem = MixedIntegerProgram(
                lp=LinearProgram(
                    cost=-weights,
                    rows=np.array(rows).reshape(-1, n),
                    senses=[LE] * len(rows),
                    rhs=np.concatenate([is_rhs, cut_rhs]),
                    upper=np.ones(n),
                ),
                integer=np.ones(n, dtype=bool),
            )
            result = solve_milp(problem, time_budget=time_budget)
            if result.x is None:
                log.warning('mwis ended with status %s', result.status.value)
                return None

            schedule = [int(l) for l in np.flatnonzero((result.x > 0.5) & (weights > 0))]
            if not schedule or result.objective >= 0:
                return None
            try:
                return model.make_column(schedule)
            except IlluminationInfeasible:
                cut = np.zeros(n)
                cut[schedule] = 1.0
                cut_rows.append(cut)
                cut_rhs.append(len(schedule) - 1.0)

    return _run('mwis', model, pick, p_il, idle_dc, graph.sir_threshold)
