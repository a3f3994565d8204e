import numpy as np
import pytest

import optics
from cg_scheduler import (CgStatus, ColumnGenerationError, IlluminationInfeasible, PowerModel, column_generation,
                          exhaustive_columns, initial_columns, min_illumination_power, optimize_dc_for_schedule,
                          reality_check, solve_full_master, solve_pricing, solve_rmp)
from lp import LpStatus
from scenario import with_overrides


def single_ap(make_tiny, lower_center=200.0, **kwargs):
    """One AP above the middle of a 2 x 2 m room, lit from a 3 x 3 grid with a bound at the center only."""

    kwargs.setdefault('k', 1)
    lower = [0.0] * 9
    lower[4] = lower_center
    return make_tiny(grid={'nx': 1, 'ny': 1, 'spacing': 1.0},
                     illum={'lower': lower, 'upper': 1000.0, 'spacing': 1.0, 'ambient': 0.0}, **kwargs)


def test_no_lower_bound_needs_no_light(make_tiny):
    s = make_tiny(illum={'lower': 0.0, 'upper': 600.0, 'spacing': 0.5, 'ambient': 0.0})
    p_il, dc = min_illumination_power(s)

    assert p_il == 0.0
    assert dc == pytest.approx(np.zeros(4))


def test_min_illumination_with_a_single_ap(make_tiny):
    s = single_ap(make_tiny)
    p_il, dc = min_illumination_power(s)

    assert s.illum_grid.positions[4] == (1.0, 1.0)
    gain = optics.illum_gain(optics.dc_pose(s.aps[0]), (1.0, 1.0, 0.8))
    optical = 200.0 / (s.constants.luminosity_efficacy * gain)

    assert dc == pytest.approx([optical], rel=1e-9)
    assert p_il == pytest.approx(optical / s.aps[0].chips[0].eta_dc, rel=1e-9)
    assert optical < s.aps[0].chips[0].p_max


def test_unreachable_lower_bound(make_tiny):
    s = single_ap(make_tiny, lower_center=5000.0)
    with pytest.raises(IlluminationInfeasible) as e:
        min_illumination_power(s)
    assert e.value.grid_point == 4
    assert e.value.position == (1.0, 1.0)


def test_ac_light_above_the_upper_bound(make_tiny, prepare):
    s = make_tiny(uts=[{'position': [0.5, 0.5]}], k=1,
                  illum={'lower': 0.0, 'upper': 0.5, 'spacing': 0.5, 'ambient': 0.0})
    _, _, model = prepare(s)

    # about 0.8 lux of AC light reaches the grid point below the AP
    assert model.ac_lux[:, 0].max() > 0.5
    with pytest.raises(IlluminationInfeasible):
        model.make_column({0})
    with pytest.raises(ColumnGenerationError):
        initial_columns(model)


def test_empty_schedule_costs_the_min_illumination(tiny, prepare):
    _, _, model = prepare(tiny)
    p_il, _ = model.min_illumination()
    column = model.make_column(frozenset())

    assert column.cost == pytest.approx(p_il)
    assert column.p_ac_electrical == 0.0
    assert np.all(column.rate_per_ut == 0)


def test_columns_meet_the_grid_bounds(tiny, prepare):
    links, _, model = prepare(tiny)
    lower, upper = model.lower, model.upper

    for link in links:
        column = model.make_column({link.id})
        lux = model.illuminance(column.schedule, column.dc_power)
        assert np.all(lux >= lower - 1e-5)
        assert np.all(lux <= upper + 1e-5)
        assert np.all(column.dc_power + model.ac_load(column.schedule) <= model.dc_cap + 1e-9)
        assert column.rate_per_ut[link.ut] == pytest.approx(link.capacity)
        assert column.p_ac_electrical == pytest.approx(link.p_ac_avg / link.eta_ac)


def test_dc_power_needs_the_model_of_the_scenario(tiny, make_tiny, prepare):
    _, _, model = prepare(tiny)
    with pytest.raises(ColumnGenerationError):
        optimize_dc_for_schedule(make_tiny(seed=2), {0}, model)
    dc = optimize_dc_for_schedule(tiny, {0}, model)
    assert model.dc_cost @ dc == pytest.approx(model.make_column({0}).p_dc_electrical)


def test_one_initial_column_per_link(tiny, prepare):
    links, _, model = prepare(tiny)
    columns = initial_columns(model)

    assert [set(c.schedule) for c in columns] == [{l.id} for l in links]


def test_rmp_without_demand(make_tiny, prepare):
    s = make_tiny(demand_mbps=0.0)
    _, _, model = prepare(s)
    p_il, _ = model.min_illumination()
    rmp = solve_rmp(initial_columns(model), s, p_il)

    assert rmp.omega == pytest.approx(np.zeros(len(model.links)))
    assert rmp.z_upper == pytest.approx(p_il)
    assert not rmp.has_slack


def test_rmp_shares_the_time_unit(make_tiny, prepare):
    base = make_tiny(uts=[{'position': [0.5, 0.5]}], k=1)
    capacity = prepare(base)[0][0].capacity
    s = with_overrides(base, demand_mbps=capacity / 2 / 1e6)
    _, _, model = prepare(s)
    p_il, _ = model.min_illumination()
    column = model.make_column({0})

    rmp = solve_rmp([column], s, p_il)
    assert rmp.omega == pytest.approx([0.5])
    assert rmp.z_upper == pytest.approx(p_il + 0.5 * (column.cost - p_il))
    assert rmp.lam == pytest.approx([(column.cost - p_il) / capacity])
    assert rmp.mu == pytest.approx(0.0, abs=1e-9)


def test_rmp_prices_unmet_demand(make_tiny, prepare):
    s = make_tiny(uts=[{'position': [0.5, 0.5]}], k=1, demand_mbps=5000.0)
    _, _, model = prepare(s)
    p_il, _ = model.min_illumination()
    rmp = solve_rmp(initial_columns(model), s, p_il)

    assert rmp.has_slack
    assert rmp.omega.sum() == pytest.approx(1.0)
    assert rmp.lam == pytest.approx([1.0])


def test_pricing_without_duals_returns_the_dark_schedule(tiny, prepare):
    _, graph, model = prepare(tiny)
    p_il, _ = model.min_illumination()
    result = solve_pricing(np.zeros(len(tiny.uts)), 0.0, model, graph, p_il)

    assert result.column.schedule == frozenset()
    assert result.reduced_cost == pytest.approx(0.0, abs=1e-6)
    assert result.reduced_cost_bound <= result.reduced_cost + 1e-9
    assert result.nodes >= 1


def test_pricing_picks_the_best_link_under_high_duals(make_tiny, prepare):
    s = make_tiny(uts=[{'position': [0.6, 0.4]}], k=2)
    links, graph, model = prepare(s)
    p_il, _ = model.min_illumination()

    # one watt per Mbps
    result = solve_pricing(np.array([1e-6]), 0.0, model, graph, p_il)
    best = max(links, key=lambda l: l.capacity)
    assert result.column.schedule == frozenset([best.id])
    assert result.reduced_cost < 0


def test_pricing_matches_the_best_enumerated_set(tiny, prepare):
    _, graph, model = prepare(tiny)
    p_il, _ = model.min_illumination()
    columns = exhaustive_columns(model, graph)
    rmp = solve_rmp(initial_columns(model), tiny, p_il)

    result = solve_pricing(rmp.lam, rmp.mu, model, graph, p_il)
    reduced = [c.cost - p_il - rmp.lam @ c.rate_per_ut - rmp.mu for c in columns]

    assert result.reduced_cost == pytest.approx(min(reduced), abs=1e-6)
    assert result.reduced_cost_bound <= min(reduced) + 1e-6


def test_pricing_out_of_time_keeps_an_incumbent(tiny, prepare):
    _, graph, model = prepare(tiny)
    p_il, _ = model.min_illumination()
    rmp = solve_rmp(initial_columns(model), tiny, p_il)

    result = solve_pricing(rmp.lam, rmp.mu, model, graph, p_il, time_budget=-1.0)

    assert result.status in (LpStatus.TIME_LIMIT, LpStatus.OPTIMAL)
    assert result.reduced_cost_bound <= result.reduced_cost + 1e-9
    if result.column.schedule == frozenset():
        assert result.reduced_cost == pytest.approx(-rmp.mu, abs=1e-6)


def test_pricing_under_slack_duals_stops_at_an_improving_column(make_tiny, prepare):
    s = make_tiny(uts=[{'position': [0.5, 0.5]}, {'position': [1.5, 1.5]}], k=1, demand_mbps=400.0)
    _, graph, model = prepare(s, sir_threshold=1.0)
    p_il, _ = model.min_illumination()
    rmp = solve_rmp(initial_columns(model), s, p_il)
    assert rmp.has_slack

    result = solve_pricing(rmp.lam, rmp.mu, model, graph, p_il, first_improving=True)

    assert result.reduced_cost < 0
    assert result.reduced_cost_bound <= result.reduced_cost + 1e-9
    assert result.column.schedule


def test_cg_without_demand(make_tiny):
    s = make_tiny(demand_mbps=0.0)
    sol = column_generation(s, 0.0)

    assert sol.status is CgStatus.OPTIMAL
    assert sol.feasible
    assert sol.iterations == 1
    assert sol.z_upper == pytest.approx(sol.p_illumi_min)
    assert sol.time_used == pytest.approx(0.0, abs=1e-9)
    assert sol.active_columns() == []


def test_cg_without_links(make_tiny):
    s = make_tiny(n_uts=0)
    sol = column_generation(s, 0.1)

    assert sol.status is CgStatus.OPTIMAL
    assert sol.iterations == 0
    assert sol.z_upper == pytest.approx(sol.p_illumi_min)


@pytest.mark.parametrize('epsilon', [-0.1, 1.0, 2.0])
def test_epsilon_range(tiny, epsilon):
    with pytest.raises(ValueError):
        column_generation(tiny, epsilon)


def check_against_full_master(make_tiny, prepare, seed):
    s = make_tiny(n_uts=4, k=3, seed=seed)
    links, graph, model = prepare(s)
    sol = column_generation(s, 0.0, links=links, graph=graph, model=model)
    full = solve_full_master(model, graph)

    assert sol.status in (CgStatus.OPTIMAL, CgStatus.BOUNDED)
    assert sol.z_upper == pytest.approx(full.z_upper, rel=1e-6)
    assert sol.z_lower <= full.z_upper * (1 + 1e-6)


@pytest.mark.parametrize('seed', [0, 1, 2])
def test_cg_reaches_the_full_master_optimum(make_tiny, prepare, seed):
    check_against_full_master(make_tiny, prepare, seed)


@pytest.mark.slow
@pytest.mark.parametrize('seed', range(3, 23))
def test_cg_reaches_the_full_master_optimum_on_more_seeds(make_tiny, prepare, seed):
    check_against_full_master(make_tiny, prepare, seed)


def test_epsilon_certificate(tiny, prepare):
    links, graph, model = prepare(tiny)
    sol = column_generation(tiny, 0.1, links=links, graph=graph, model=model)
    full = solve_full_master(model, graph)

    assert sol.feasible
    assert sol.z_lower <= full.z_upper * (1 + 1e-6)
    assert sol.z_upper >= full.z_upper * (1 - 1e-6)
    assert sol.z_upper <= 1.1 * sol.z_lower * (1 + 1e-9)
    assert not np.any(sol.slack_mbps > 1e-6)
    assert sol.time_used <= 1 + 1e-9


def test_lower_bound_never_decreases(tiny):
    sol = column_generation(tiny, 0.0)
    log = sol.iteration_log

    assert list(log.columns) == ['iteration', 'z_upper', 'z_lower', 'reduced_cost', 'n_columns', 'wall_ms']
    assert len(log) == sol.iterations
    assert np.all(np.diff(log['z_lower']) >= 0)
    assert np.all(np.diff(log['n_columns']) >= 0)
    assert log['z_lower'].iloc[-1] <= log['z_upper'].iloc[-1] + 1e-6


def test_demand_beyond_capacity_is_infeasible(make_tiny):
    s = make_tiny(uts=[{'position': [0.5, 0.5]}], k=1, demand_mbps=5000.0)
    sol = column_generation(s, 0.1)

    assert sol.status is CgStatus.INFEASIBLE
    assert not sol.feasible
    assert sol.slack_mbps.sum() > 0
    with pytest.raises(ValueError):
        reality_check(sol, s)


def test_reality_check_never_lowers_the_power(make_tiny):
    for seed in (1, 2, 3):
        s = make_tiny(n_uts=4, seed=seed, demand_mbps=50.0)
        sol = column_generation(s, 0.0, sir_threshold=1.0)
        checked = reality_check(sol, s)

        assert checked.reality_checked
        assert checked.z_upper >= sol.z_upper - 1e-6
        for _, col in checked.active_columns():
            assert np.all(col.rate_per_ut <= sol.model.rate_per_ut(col.schedule) + 1e-6)


def test_reality_check_with_one_ut_changes_nothing(make_tiny):
    s = make_tiny(n_uts=1, k=2)
    sol = column_generation(s, 0.0)
    checked = reality_check(sol, s)

    assert checked.status is sol.status
    assert checked.z_upper == pytest.approx(sol.z_upper, rel=1e-9)


def test_reality_check_needs_the_same_scenario(tiny, make_tiny):
    sol = column_generation(tiny, 0.1)
    with pytest.raises(ValueError):
        reality_check(sol, make_tiny(seed=2))


def test_rows_per_round(tiny, office_default):
    assert PowerModel(tiny, []).rows_per_round == 10
    assert PowerModel(office_default, []).rows_per_round == 25


@pytest.mark.slow
def test_office_default_instance(office_default):
    sol = column_generation(office_default, 0.1)

    assert sol.feasible
    assert sol.z_upper <= 1.1 * sol.z_lower * (1 + 1e-9)
    assert sol.excess_power > 0

    checked = reality_check(sol, office_default)
    assert checked.z_upper >= sol.z_upper - 1e-6


@pytest.mark.slow
@pytest.mark.parametrize('epsilon', [0.01, 0.005])
def test_office_epsilon_certificate(office_default, epsilon):
    sol = column_generation(office_default, epsilon)

    assert sol.feasible
    if sol.status is CgStatus.BOUNDED:
        assert sol.z_upper <= (1 + epsilon) * sol.z_lower * (1 + 1e-9)
    assert sol.z_lower <= sol.z_upper + 1e-6
