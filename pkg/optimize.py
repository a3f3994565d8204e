"""
Experiment runner for the VLC power minimization: solves single scenarios, sweeps the SIR threshold,
compares the column generation against the baselines over the number of UTs or the demand, prints the
cost of the epsilon tolerance and exports illuminance heatmaps. Results are written as CSV files next
to a manifest.json that pins the config, its digest, the tolerances and the tool version.
"""

__version__ = "0.1.0"

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from tqdm import tqdm

import baselines
import cg_scheduler
import conflict
import lp
import optics
from cg_scheduler import ColumnGenerationError, IlluminationInfeasible, PowerModel, column_generation, reality_check
from conflict import build_conflict_graph, write_conflict_graph
from scenario import ScenarioError, build_candidate_links, load_scenario, with_overrides

log = logging.getLogger('optimize')

ALGORITHMS = ('cg', 'vico', 'mwis')
AXES = ('uts', 'demand')
DEFAULT_CONFIG = Path(__file__).parent / 'data/office-default.json'


@dataclass
class ExperimentResult:
    digest: str
    algorithm: str
    config_kind: str
    sir_threshold: float
    epsilon: float
    n_uts: int
    demand_mbps: float
    seed: Optional[int]
    protocol_feasible: bool
    protocol_power: float
    reality_power: float
    feasible: bool
    status: str
    iterations: int
    wall_ms: float


@dataclass
class SirSweep:
    sir_lower: Optional[float]
    sir_upper: Optional[float]
    table: pd.DataFrame


def tolerances():
    return {
        'lp_feasibility': lp.FEASIBILITY_TOL,
        'lp_pivot': lp.PIVOT_TOL,
        'lp_integrality': lp.INTEGRALITY_TOL,
        'reduced_cost': cg_scheduler.REDUCED_COST_TOL,
        'illuminance_lux': cg_scheduler.ILLUM_TOL,
        'slack_mbps': cg_scheduler.SLACK_TOL,
        'slack_cost_per_mbps': cg_scheduler.SLACK_COST_PER_MBPS,
        'unit_vector': optics.UNIT_TOL,
    }


def run_algorithm(s, algorithm, epsilon=0.01, sir_threshold=3.0, seed=0, links=None, graph=None, model=None,
                  illum_constraint=True, gap_on_excess=False):
    """
    Run one scheduler and its reality check on a scenario.

    Returns:
        tuple: (protocol solution, reality-checked solution or None, wall time in ms).
    """

    links = build_candidate_links(s) if links is None else links
    graph = build_conflict_graph(links, sir_threshold, s) if graph is None else graph
    model = PowerModel(s, links) if model is None else model

    started = time.perf_counter()
    if algorithm == 'cg':
        sol = column_generation(s, epsilon, links=links, graph=graph, model=model, gap_on_excess=gap_on_excess)
    elif algorithm == 'vico':
        sol = baselines.vico_random_schedule(s, seed, links=links, graph=graph, model=model,
                                             illum_constraint=illum_constraint)
    elif algorithm == 'mwis':
        sol = baselines.mwis_schedule(s, links=links, graph=graph, model=model)
    else:
        raise ValueError(f'unknown algorithm {algorithm!r} (expected one of {", ".join(ALGORITHMS)})')

    checked = reality_check(sol, s) if sol.feasible else None
    return sol, checked, (time.perf_counter() - started) * 1000


def result_row(s, sol, checked, wall_ms, seed=None):
    return ExperimentResult(
        digest=s.digest,
        algorithm=sol.algorithm,
        config_kind=s.config_kind.value,
        sir_threshold=sol.sir_threshold,
        epsilon=sol.epsilon,
        n_uts=len(s.uts),
        demand_mbps=float(s.demands.max(initial=0.0) / 1e6),
        seed=seed,
        protocol_feasible=sol.feasible,
        protocol_power=sol.excess_power if sol.feasible else np.nan,
        reality_power=checked.excess_power if checked is not None and checked.feasible else np.nan,
        feasible=checked is not None and checked.feasible,
        status=(checked if checked is not None else sol).status.value,
        iterations=sol.iterations,
        wall_ms=wall_ms,
    )


def sweep_sir(s, thresholds, epsilon=0.01, seed=None):
    """
    Run the column generation and its reality check for every SIR threshold.

    The upper threshold is the largest one whose Protocol Model solution is feasible, the lower
    threshold the smallest one whose reality check is feasible.

    Args:
        s (Scenario): The instance.
        thresholds (list of float): Ascending thresholds, all >= 1.
        epsilon (float, optional): Epsilon of the column generation.

    Returns:
        SirSweep: Both thresholds (None when absent) and one row per threshold.
    """

    thresholds = [float(t) for t in thresholds]
    if not thresholds or thresholds != sorted(thresholds) or thresholds[0] < 1:
        raise ValueError('thresholds must be a non-empty ascending list of values >= 1')

    links = build_candidate_links(s)
    model = PowerModel(s, links)
    rows = []

    for threshold in tqdm(thresholds, desc='sir', leave=False):
        graph = build_conflict_graph(links, threshold, s)
        sol, checked, wall_ms = run_algorithm(s, 'cg', epsilon, threshold, links=links, graph=graph, model=model)
        rows.append(asdict(result_row(s, sol, checked, wall_ms, seed)))

    table = pd.DataFrame(rows)
    protocol = table.loc[table.protocol_feasible, 'sir_threshold']
    reality = table.loc[table.feasible, 'sir_threshold']
    sir_upper = float(protocol.max()) if len(protocol) else None
    sir_lower = float(reality.min()) if len(reality) else None
    log.info('sir sweep lower=%s upper=%s', sir_lower, sir_upper)

    return SirSweep(sir_lower=sir_lower, sir_upper=sir_upper, table=table)


def run_comparison(s, algorithms, axis, values, seeds=(0,), epsilon=0.01, sir_threshold=3.0, config_kinds=None):
    """
    Compare schedulers over the number of UTs or the per-UT demand.

    Every (config, value, seed) cell re-materializes the scenario so that all algorithms share the same
    UT placement, candidate links and conflict graph. Infeasible rows are recorded and the run goes on.

    Args:
        s (Scenario): The base instance.
        algorithms (list of str): Any of 'cg', 'vico', 'mwis'.
        axis (str): 'uts' or 'demand'.
        values (list): UT counts or demands in Mbps.
        seeds (list of int, optional): UT placement (and VICO) seeds.
        config_kinds (list of str, optional): Light configurations to repeat the comparison for.

    Returns:
        pandas.DataFrame: One ExperimentResult row per (config, value, seed, algorithm).
    """

    algorithms = list(algorithms)
    if not algorithms:
        raise ValueError('at least one algorithm is required')
    unknown = set(algorithms) - set(ALGORITHMS)
    if unknown:
        raise ValueError(f'unknown algorithms {sorted(unknown)}')
    if axis not in AXES:
        raise ValueError(f'axis must be one of {AXES}')
    if not values:
        raise ValueError('values must not be empty')

    kinds = list(config_kinds) if config_kinds else [s.config_kind.value]
    rows = []
    cells = [(kind, value, seed) for kind in kinds for value in values for seed in seeds]

    for kind, value, seed in tqdm(cells, desc=f'compare {axis}', leave=False):
        if axis == 'uts':
            cell = with_overrides(s, n_uts=int(value), seed=seed, config_kind=kind)
        else:
            cell = with_overrides(s, demand_mbps=float(value), seed=seed, config_kind=kind)

        links = build_candidate_links(cell)
        graph = build_conflict_graph(links, sir_threshold, cell)
        model = PowerModel(cell, links)

        for algorithm in algorithms:
            try:
                sol, checked, wall_ms = run_algorithm(cell, algorithm, epsilon, sir_threshold, seed,
                                                      links=links, graph=graph, model=model)
            except (IlluminationInfeasible, ColumnGenerationError) as e:
                log.warning('comparison cell failed algorithm=%s kind=%s value=%s seed=%s reason=%s',
                            algorithm, kind, value, seed, e)
                continue
            row = asdict(result_row(cell, sol, checked, wall_ms, seed))
            row['axis'] = axis
            row['value'] = value
            rows.append(row)

    return pd.DataFrame(rows)


def epsilon_cost(s, epsilons, sir_threshold=3.0, gap_on_excess=False):
    """Iterations, bounds and wall time of the column generation for each epsilon."""

    links = build_candidate_links(s)
    graph = build_conflict_graph(links, sir_threshold, s)
    rows = []

    for epsilon in tqdm(epsilons, desc='epsilon', leave=False):
        model = PowerModel(s, links)
        started = time.perf_counter()
        sol = column_generation(s, epsilon, links=links, graph=graph, model=model, gap_on_excess=gap_on_excess)
        rows.append({
            'epsilon': epsilon,
            'status': sol.status.value,
            'iterations': sol.iterations,
            'z_upper': sol.z_upper,
            'z_lower': sol.z_lower,
            'excess_power': sol.excess_power,
            'wall_ms': (time.perf_counter() - started) * 1000,
        })

    return pd.DataFrame(rows)


def export_heatmap(s, sol):
    """
    Illuminance per grid point of a solution: the time-weighted mean over its independent sets and
    the idle (illumination only) period, plus the per-set minimum and maximum.

    Returns:
        pandas.DataFrame: One row per grid point with x, y, lux, lux_min, lux_max, lower, upper, violated.
    """

    model = sol.model
    fields, weights = [], []

    for w, col in sol.active_columns():
        active = [model.links[l] for l in sorted(col.schedule)]
        fields.append(optics.illuminance_field(s, active, col.dc_power))
        weights.append(w)

    idle = max(0.0, 1.0 - sum(weights))
    if idle > cg_scheduler.OMEGA_TOL or not fields:
        idle_dc = sol.idle_dc_power if sol.idle_dc_power is not None else model.min_illumination()[1]
        fields.append(optics.illuminance_field(s, [], idle_dc))
        weights.append(idle if fields[:-1] else 1.0)

    stack = np.vstack(fields)
    weights = np.array(weights)
    grid = s.illum_grid
    lux_min, lux_max = stack.min(axis=0), stack.max(axis=0)
    tol = cg_scheduler.ILLUM_TOL

    return pd.DataFrame({
        'x': [p[0] for p in grid.positions],
        'y': [p[1] for p in grid.positions],
        'lux': weights @ stack / weights.sum(),
        'lux_min': lux_min,
        'lux_max': lux_max,
        'lower': grid.lower,
        'upper': grid.upper,
        'violated': (lux_min < grid.lower - tol) | (lux_max > grid.upper + tol),
    })


def write_manifest(out, s, args):
    manifest = {
        'tool': 'optimize',
        'version': __version__,
        'created': datetime.now(timezone.utc).isoformat(timespec='seconds'),
        'command': {k: v for k, v in vars(args).items() if k != 'func'},
        'digest': s.digest,
        'config': s.source,
        'tolerances': tolerances(),
    }
    with open(Path(out) / 'manifest.json', 'w') as f:
        json.dump(manifest, f, indent=2, default=str)


def _scenario(args):
    s = load_scenario(args.config)
    kind = getattr(args, 'light_config', None)
    return with_overrides(s, config_kind=kind) if kind else s


def _out_dir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_solve(args):
    s = _scenario(args)
    out = _out_dir(args)

    links = build_candidate_links(s)
    graph = build_conflict_graph(links, args.sir, s)
    model = PowerModel(s, links)
    if args.dump_conflict_graph:
        write_conflict_graph(graph, out / 'conflict.adjlist')

    sol, checked, wall_ms = run_algorithm(s, 'cg', args.epsilon, args.sir, links=links, graph=graph, model=model,
                                          gap_on_excess=args.excess_gap)
    row = asdict(result_row(s, sol, checked, wall_ms))

    if args.exhaustive:
        full = cg_scheduler.solve_full_master(model, graph)
        row['exhaustive_power'] = full.z_upper - sol.p_illumi_min

    pd.DataFrame([row]).to_csv(out / 'results.csv', index=False)
    sol.iteration_log.to_csv(out / 'iterations.csv', index=False)
    if sol.feasible:
        export_heatmap(s, checked if checked is not None and checked.feasible else sol).to_csv(out / 'heatmap.csv', index=False)
    write_manifest(out, s, args)

    print(f'status: {sol.status.value}  iterations: {sol.iterations}')
    print(f'P_illumi_min: {sol.p_illumi_min:.4f} W  z_upper: {sol.z_upper:.4f} W  z_lower: {sol.z_lower:.4f} W')
    print(f'protocol power: {row["protocol_power"]:.4f} W  reality power: {row["reality_power"]:.4f} W')
    return 0 if sol.feasible else 2


def cmd_sweep_sir(args):
    s = _scenario(args)
    out = _out_dir(args)
    thresholds = np.round(np.arange(args.start, args.stop + args.step / 2, args.step), 10).tolist()

    tables, bounds = [], []
    for kind in args.light_configs or [s.config_kind.value]:
        for n_uts in args.uts or [len(s.uts)]:
            cell = with_overrides(s, n_uts=n_uts if args.uts else None, config_kind=kind)
            sweep = sweep_sir(cell, thresholds, args.epsilon)
            tables.append(sweep.table)
            bounds.append({'config_kind': kind, 'n_uts': n_uts, 'sir_lower': sweep.sir_lower, 'sir_upper': sweep.sir_upper})
            print(f'config {kind}, {n_uts} UTs: SIR_th^L = {sweep.sir_lower}  SIR_th^U = {sweep.sir_upper}')

    pd.concat(tables, ignore_index=True).to_csv(out / 'results.csv', index=False)
    pd.DataFrame(bounds).to_csv(out / 'bounds.csv', index=False)
    write_manifest(out, s, args)
    return 0


def cmd_compare(args):
    s = _scenario(args)
    out = _out_dir(args)
    seeds = args.seeds if args.seeds else list(range(10))

    table = run_comparison(s, args.algos, args.axis, args.values, seeds, args.epsilon, args.sir, args.light_configs)
    table.to_csv(out / 'results.csv', index=False)
    write_manifest(out, s, args)

    if not table.empty:
        means = table.groupby(['config_kind', 'value', 'algorithm'])[['protocol_power', 'reality_power']].mean()
        print(means.to_string())
    return 0


def cmd_heatmap(args):
    s = _scenario(args)
    out = _out_dir(args)

    sol, checked, _ = run_algorithm(s, args.algo, args.epsilon, args.sir, args.seed,
                                    illum_constraint=not args.no_illum_constraint)
    if not sol.feasible:
        log.error('no feasible schedule to export status=%s', sol.status.value)
        return 2

    heatmap = export_heatmap(s, checked if checked is not None and checked.feasible else sol)
    heatmap.to_csv(out / 'heatmap.csv', index=False)
    write_manifest(out, s, args)

    print(f'lux range: {heatmap.lux_min.min():.1f} .. {heatmap.lux_max.max():.1f}')
    print(f'violation fraction: {heatmap.violated.mean():.3f}')
    return 0


def cmd_epsilon_cost(args):
    s = _scenario(args)
    out = _out_dir(args)

    table = epsilon_cost(s, args.epsilons, args.sir, args.excess_gap)
    table.to_csv(out / 'results.csv', index=False)
    write_manifest(out, s, args)
    print(table.to_string(index=False))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog='optimize', description='Power minimization of an indoor VLC network.')
    parser.add_argument('--log-level', default='INFO', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    commands = parser.add_subparsers(dest='command', required=True)

    def common(sub, out='out'):
        sub.add_argument('--config', default=str(DEFAULT_CONFIG), help='scenario JSON file')
        sub.add_argument('--light-config', choices=['a', 'b', 'c', 'A', 'B', 'C'], help='override the light configuration')
        sub.add_argument('--epsilon', type=float, default=0.01)
        sub.add_argument('--sir', type=float, default=3.0, help='linear SIR threshold')
        sub.add_argument('--out', default=out, help='output directory')

    solve = commands.add_parser('solve', help='column generation plus reality check on one scenario')
    common(solve)
    solve.add_argument('--exhaustive', action='store_true', help='also solve the master problem over all independent sets')
    solve.add_argument('--excess-gap', action='store_true', help='apply epsilon to the power above P_illumi_min')
    solve.add_argument('--dump-conflict-graph', action='store_true')
    solve.set_defaults(func=cmd_solve)

    sweep = commands.add_parser('sweep-sir', help='feasibility over a range of SIR thresholds')
    common(sweep)
    sweep.add_argument('--from', dest='start', type=float, default=1.0)
    sweep.add_argument('--to', dest='stop', type=float, default=6.0)
    sweep.add_argument('--step', type=float, default=1.0)
    sweep.add_argument('--uts', type=int, nargs='+', help='repeat the sweep for these numbers of UTs')
    sweep.add_argument('--light-configs', nargs='+', type=str.upper, choices=['A', 'B', 'C'])
    sweep.set_defaults(func=cmd_sweep_sir)

    compare = commands.add_parser('compare', help='compare schedulers over the number of UTs or the demand')
    common(compare)
    compare.add_argument('--axis', choices=AXES, required=True)
    compare.add_argument('--values', type=float, nargs='+', required=True)
    compare.add_argument('--algos', type=lambda v: [a for a in v.split(',') if a], default=list(ALGORITHMS))
    compare.add_argument('--seeds', type=int, nargs='+', help='UT placement seeds (default 0..9)')
    compare.add_argument('--light-configs', nargs='+', type=str.upper, choices=['A', 'B', 'C'])
    compare.set_defaults(func=cmd_compare)

    heatmap = commands.add_parser('heatmap', help='illuminance on the grid for one scheduler')
    common(heatmap)
    heatmap.add_argument('--algo', choices=ALGORITHMS, default='cg')
    heatmap.add_argument('--seed', type=int, default=0)
    heatmap.add_argument('--no-illum-constraint', action='store_true', help='VICO with a uniform DC level')
    heatmap.set_defaults(func=cmd_heatmap)

    eps = commands.add_parser('epsilon-cost', help='iterations and bounds for several epsilons')
    common(eps)
    eps.add_argument('--epsilons', type=float, nargs='+', default=[0.01, 0.005, 1e-14])
    eps.add_argument('--excess-gap', action='store_true')
    eps.set_defaults(func=cmd_epsilon_cost)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format='%(asctime)s level=%(levelname)s logger=%(name)s %(message)s',
    )

    if getattr(args, 'no_illum_constraint', False) and args.algo != 'vico':
        log.error('--no-illum-constraint only applies to --algo vico')
        return 1

    try:
        return args.func(args)
    except (ScenarioError, IlluminationInfeasible, ColumnGenerationError, conflict.ConflictGraphError, ValueError) as e:
        log.error('%s failed: %s', args.command, e)
        return 1


if __name__ == '__main__':
    sys.exit(main())
