import argparse
import json
from pathlib import Path

import numpy
from tqdm import tqdm

data = Path(__file__).resolve().parent.parent / 'data'


def generate_config(room, ap_grid, n_uts, demand_mbps, config_kind, seed, illum=(300.0, 500.0), spacing=0.25):
    """
    Generates a scenario config with the AP grid centered in the room and the UTs placed uniformly at
    random on the desk plane. The UT positions are written out explicitly, so the file pins the
    placement independently of the seed handling of the loader.

    Args:
        room (list of float): Room size x, y, z in meters.
        ap_grid (list of int): Number of APs along x and y, spaced 1 m apart.
        n_uts (int): Number of UTs.
        demand_mbps (float): Demand of every UT.
        config_kind (str): Light-source configuration A, B or C.
        seed (int): Seed of the UT placement.
        illum (tuple of float, optional): Illuminance bounds in lux. Defaults to (300, 500).
        spacing (float, optional): Illuminance grid spacing in meters. Defaults to 0.25.

    Returns:
        dict: The config.
    """

    rng = numpy.random.default_rng(seed)
    xs = rng.uniform(0.0, room[0], n_uts)
    ys = rng.uniform(0.0, room[1], n_uts)

    return {
        'room': {'x': room[0], 'y': room[1], 'z': room[2]},
        'desk_height': 0.8,
        'config_kind': config_kind,
        'grid': {'nx': ap_grid[0], 'ny': ap_grid[1], 'spacing': 1.0},
        'uts': [
            {'position': [round(float(x), 4), round(float(y), 4)], 'demand_mbps': demand_mbps}
            for x, y in zip(xs, ys)
        ],
        'illum': {'lower': illum[0], 'upper': illum[1], 'spacing': spacing, 'ambient': 0.0},
        'rng_seed': seed,
    }


if __name__ == '__main__':
    parser = argparse.ArgumentParser(description='Write seeded scenario configs to data/.')
    parser.add_argument('--room', type=float, nargs=3, default=[6.0, 6.0, 3.0])
    parser.add_argument('--aps', type=int, nargs=2, default=[6, 6])
    parser.add_argument('--uts', type=int, default=30)
    parser.add_argument('--demand', type=float, default=20.0)
    parser.add_argument('--kind', choices=['A', 'B', 'C'], default='A')
    parser.add_argument('--seeds', type=int, nargs='+', default=[0])
    parser.add_argument('--prefix', default='scenario')
    args = parser.parse_args()

    data.mkdir(exist_ok=True)
    for seed in tqdm(args.seeds):
        config = generate_config(args.room, args.aps, args.uts, args.demand, args.kind, seed)
        path = data / f'{args.prefix}-{args.kind.lower()}-{args.uts}ut-seed{seed}.json'
        with open(path, 'w') as f:
            json.dump(config, f, indent=2)
