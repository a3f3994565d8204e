import json

import numpy as np
import pandas as pd
import pytest

from cg_scheduler import column_generation
from optimize import __version__, epsilon_cost, export_heatmap, main, run_algorithm, run_comparison, sweep_sir
from scenario import with_overrides


def test_comparison_needs_algorithms(tiny):
    with pytest.raises(ValueError):
        run_comparison(tiny, [], 'uts', [2])
    with pytest.raises(ValueError):
        run_comparison(tiny, ['cg', 'greedy'], 'uts', [2])
    with pytest.raises(ValueError):
        run_comparison(tiny, ['cg'], 'rooms', [2])


def test_comparison_rows(tiny):
    table = run_comparison(tiny, ['cg', 'vico'], 'uts', [2, 3], seeds=(0, 1), epsilon=1e-14)

    assert len(table) == 8
    assert set(table.algorithm) == {'cg', 'vico'}
    assert set(table.axis) == {'uts'}
    assert sorted(table.groupby(['value', 'seed']).n_uts.first().tolist()) == [2, 2, 3, 3]

    cg = table[table.algorithm == 'cg'].set_index(['value', 'seed'])
    vico = table[table.algorithm == 'vico'].set_index(['value', 'seed'])
    assert cg.protocol_feasible.all()
    assert np.all(cg.protocol_power <= vico.protocol_power.loc[cg.index] + 1e-6)


def test_comparison_over_the_demand(tiny):
    table = run_comparison(tiny, ['mwis'], 'demand', [5.0, 10.0])

    assert len(table) == 2
    assert table.demand_mbps.tolist() == [5.0, 10.0]
    assert table.protocol_power.is_monotonic_increasing


def test_sir_sweep_with_one_ut(make_tiny):
    sweep = sweep_sir(make_tiny(n_uts=1), [1.0, 2.0, 4.0])

    assert sweep.sir_lower == 1.0
    assert sweep.sir_upper == 4.0
    assert sweep.table.feasible.all()


def test_sir_sweep_power_grows_with_the_threshold(make_tiny):
    sweep = sweep_sir(make_tiny(n_uts=4, seed=2), [1.0, 2.0, 3.0, 5.0], epsilon=0.0)
    power = sweep.table.protocol_power.to_numpy()

    assert sweep.table.sir_threshold.tolist() == [1.0, 2.0, 3.0, 5.0]
    assert np.all(np.diff(power) >= -1e-6)
    feasible = sweep.table.protocol_feasible.tolist()
    assert feasible == sorted(feasible, reverse=True)


@pytest.mark.parametrize('thresholds', [[], [2.0, 1.0], [0.5, 2.0]])
def test_sir_sweep_rejects_bad_thresholds(tiny, thresholds):
    with pytest.raises(ValueError):
        sweep_sir(tiny, thresholds)


def test_unknown_algorithm(tiny):
    with pytest.raises(ValueError):
        run_algorithm(tiny, 'random')


def test_heatmap_without_demand(make_tiny):
    s = make_tiny(demand_mbps=0.0)
    heatmap = export_heatmap(s, column_generation(s, 0.1))

    assert list(heatmap.columns) == ['x', 'y', 'lux', 'lux_min', 'lux_max', 'lower', 'upper', 'violated']
    assert len(heatmap) == 25
    assert not heatmap.violated.any()
    assert np.allclose(heatmap.lux, heatmap.lux_min)
    assert np.all(heatmap.lux >= 150.0 - 1e-5)


def test_heatmap_of_a_schedule(tiny):
    sol, checked, _ = run_algorithm(tiny, 'cg', epsilon=0.01)
    heatmap = export_heatmap(tiny, checked)

    assert not heatmap.violated.any()
    assert np.all(heatmap.lux_min <= heatmap.lux + 1e-9)
    assert np.all(heatmap.lux <= heatmap.lux_max + 1e-9)


def test_solve_command(tiny_file, tmp_path):
    out = tmp_path / 'out'
    code = main(['--log-level', 'WARNING', 'solve', '--config', str(tiny_file), '--out', str(out),
                 '--dump-conflict-graph'])

    assert code == 0
    for name in ('results.csv', 'iterations.csv', 'heatmap.csv', 'manifest.json', 'conflict.adjlist'):
        assert (out / name).exists()

    results = pd.read_csv(out / 'results.csv')
    assert results.algorithm.tolist() == ['cg']
    assert bool(results.feasible.iloc[0])

    with open(out / 'manifest.json') as f:
        manifest = json.load(f)
    assert manifest['version'] == __version__
    assert manifest['digest'] == results.digest.iloc[0]
    assert manifest['command']['command'] == 'solve'
    assert {'lp_feasibility', 'reduced_cost', 'slack_cost_per_mbps'} <= set(manifest['tolerances'])


def test_compare_command(tiny_file, tmp_path):
    out = tmp_path / 'out'
    code = main(['--log-level', 'WARNING', 'compare', '--config', str(tiny_file), '--out', str(out),
                 '--axis', 'demand', '--values', '10', '--algos', 'cg,mwis', '--seeds', '0'])

    assert code == 0
    results = pd.read_csv(out / 'results.csv')
    assert sorted(results.algorithm) == ['cg', 'mwis']


def test_broken_config_fails_cleanly(tmp_path):
    path = tmp_path / 'broken.json'
    path.write_text('{"room": {"x": -1}}')

    assert main(['--log-level', 'ERROR', 'solve', '--config', str(path), '--out', str(tmp_path / 'out')]) == 1


def test_missing_config_fails_cleanly(tmp_path):
    missing = str(tmp_path / 'missing.json')
    assert main(['--log-level', 'ERROR', 'solve', '--config', missing, '--out', str(tmp_path / 'out')]) == 1


def test_uniform_dc_only_applies_to_vico(tiny_file, tmp_path):
    args = ['--log-level', 'ERROR', 'heatmap', '--config', str(tiny_file), '--out', str(tmp_path / 'out'),
            '--no-illum-constraint']
    assert main(args) == 1
    assert main(args + ['--algo', 'vico']) == 0
    assert (tmp_path / 'out' / 'heatmap.csv').exists()


@pytest.mark.slow
def test_office_epsilon_costs_fewer_iterations(office_default):
    table = epsilon_cost(office_default, [0.01, 1e-14])

    assert set(table.status) <= {'optimal', 'bounded'}
    assert table.iterations.iloc[0] < table.iterations.iloc[1]
    assert np.all(table.z_lower <= table.z_upper + 1e-6)


@pytest.mark.slow
def test_office_schedule_keeps_every_set_within_the_illuminance_bounds(office_default):
    sol, _, _ = run_algorithm(office_default, 'cg', epsilon=0.01)
    heatmap = export_heatmap(office_default, sol)

    assert sol.feasible
    assert heatmap.lux_min.min() >= 300.0 - 1e-3
    assert heatmap.lux_max.max() <= 500.0 + 1e-3


@pytest.mark.slow
def test_office_vico_without_illumination_violates_the_bounds(office_default):
    s = with_overrides(office_default, n_uts=10, demand_mbps=5.0)
    sol, checked, _ = run_algorithm(s, 'vico', illum_constraint=False)
    heatmap = export_heatmap(s, checked if checked is not None else sol)

    assert heatmap.violated.mean() > 0.3


@pytest.mark.slow
def test_office_sir_sweep(office_default):
    sweep = sweep_sir(office_default, np.arange(1.0, 6.01, 0.5))
    feasible = sweep.table.protocol_feasible.tolist()

    assert feasible == sorted(feasible, reverse=True)
    assert 2.0 <= sweep.sir_upper <= 4.0
    assert 1.0 <= sweep.sir_lower <= 3.0
    assert sweep.sir_lower <= sweep.sir_upper


@pytest.mark.slow
def test_office_column_generation_saves_power_over_the_baselines(office_default):
    s = with_overrides(office_default, demand_mbps=5.0)
    table = run_comparison(s, ['cg', 'vico', 'mwis'], 'uts', [35], seeds=range(10))
    power = table.groupby('algorithm').reality_power.mean()

    assert len(table) == 30
    assert power['cg'] <= power['vico']
    assert power['cg'] <= power['mwis']
    assert power['cg'] <= 0.6 * power['vico']


@pytest.mark.slow
def test_office_light_configurations(office_default):
    table = run_comparison(office_default, ['cg'], 'uts', [20], seeds=range(10), config_kinds=['A', 'B', 'C'])
    power = table.groupby('config_kind').reality_power.mean()

    assert power['A'] >= 1.5 * power['B']
    assert abs(power['B'] - power['C']) <= 0.25 * power['B']
