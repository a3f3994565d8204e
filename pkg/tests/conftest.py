import json
import os
import sys
from pathlib import Path

_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, _ROOT)

import pytest

from cg_scheduler import PowerModel
from conflict import build_conflict_graph
from scenario import build_candidate_links, load_scenario, scenario_from_dict

DATA = Path(_ROOT) / 'data'


def tiny_config(n_uts=3, seed=1, demand_mbps=20.0, k=2, kind='A', **extra):
    """2 x 2 m room with four APs and a 5 x 5 illuminance grid."""

    cfg = {
        'room': {'x': 2.0, 'y': 2.0, 'z': 3.0},
        'grid': {'nx': 2, 'ny': 2, 'spacing': 1.0},
        'config_kind': kind,
        'uts': {'count': n_uts, 'seed': seed, 'demand_mbps': demand_mbps},
        'illum': {'lower': 150.0, 'upper': 600.0, 'spacing': 0.5, 'ambient': 0.0},
        'association_k': k,
    }
    cfg.update(extra)
    return cfg


@pytest.fixture
def make_tiny():
    def make(**kwargs):
        return scenario_from_dict(tiny_config(**kwargs))
    return make


@pytest.fixture
def prepare():
    """Candidate links, conflict graph and power model of a scenario."""

    def build(s, sir_threshold=3.0):
        links = build_candidate_links(s)
        graph = build_conflict_graph(links, sir_threshold, s)
        return links, graph, PowerModel(s, links)
    return build


@pytest.fixture
def tiny(make_tiny):
    return make_tiny()


@pytest.fixture
def tiny_file(tmp_path):
    path = tmp_path / 'tiny.json'
    with open(path, 'w') as f:
        json.dump(tiny_config(), f)
    return path


@pytest.fixture(scope='session')
def office_default():
    return load_scenario(DATA / 'office-default.json')
