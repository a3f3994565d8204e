"""
This module holds the problem instance of a multi-user VLC indoor network: the room, the access points
on the ceiling and their chips, the user terminals on the desk plane, the channels, the illuminance grid
and the physical constants. Instances are loaded from a JSON config file and validated on the way in.
"""

import copy
import hashlib
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from shapely.geometry import Point, box

import capacity
import optics

log = logging.getLogger(__name__)

Vector = Tuple[float, float, float]

DOWN = (0.0, 0.0, -1.0)

DEFAULTS = {
    'room': {'x': 6.0, 'y': 6.0, 'z': 3.0},
    'desk_height': 0.8,
    'config_kind': 'A',
    'grid': {'nx': 6, 'ny': 6, 'spacing': 1.0},
    'chips_per_side': 2,
    'chip': {
        'leds': 625,
        'led_max_power': 0.02,
        'p_ac_pp': 0.1,
        'eta_ac': 0.02,
        'eta_dc': 0.1,
        'theta_half_dc': 70.0,
    },
    'receiver': {
        'area': 1e-4,
        'fov_half': 60.0,
        'filter_gain': 1.0,
        'lens_index': 1.5,
        'responsivity': 0.54,
    },
    'receivers_per_ut': 1,
    'uts': {'count': 30, 'seed': 7, 'demand_mbps': 20.0},
    'channels': [{'id': 0, 'bandwidth_hz': 1e8}],
    'illum': {'lower': 300.0, 'upper': 500.0, 'spacing': 0.25, 'ambient': 0.0},
    'constants': {'noise_variance': 4.7e-14, 'luminosity_efficacy': 300.0},
    'association_k': 1,
    'rng_seed': 0,
}

# semi-angles at half power of the AC source when the config does not set one
THETA_HALF_AC = {'A': 70.0, 'B': 30.0, 'C': 30.0}


class ScenarioError(ValueError):
    """A config that cannot be parsed or breaks an invariant of the instance."""

    def __init__(self, field_name, rule):
        self.field = field_name
        self.rule = rule
        super().__init__(f'{field_name}: {rule}')


class ConfigKind(Enum):
    A = 'A'  # fixed beamangle and beamwidth
    B = 'B'  # mechanically steered towards the UT
    C = 'C'  # electronically selected chip


class ChipRole(Enum):
    SOLE = 'sole'
    CENTRAL = 'central'
    PERIPHERAL = 'peripheral'


class Orientation(Enum):
    FACE_UP = 'face_up'
    FACE_SERVING_TX = 'face_serving_tx'


@dataclass(frozen=True)
class Chip:
    role: ChipRole
    beam_direction: Vector
    theta_half_ac: float
    theta_half_dc: float
    p_max: float
    p_ac_pp: float
    p_ac_avg: float
    eta_ac: float
    eta_dc: float

    @property
    def carries_ac(self):
        return self.role is not ChipRole.CENTRAL

    @property
    def carries_dc(self):
        return self.role is not ChipRole.PERIPHERAL


@dataclass(frozen=True)
class AccessPoint:
    position: Vector
    chips: Tuple[Chip, ...]
    cell_size: float
    max_active_links: int


@dataclass(frozen=True)
class Receiver:
    area: float
    fov_half: float
    filter_gain: float
    lens_index: float
    responsivity: float
    orientation: Orientation


@dataclass(frozen=True)
class UserTerminal:
    position: Vector
    receivers: Tuple[Receiver, ...]
    demand_bps: float


@dataclass(frozen=True)
class Channel:
    id: int
    bandwidth_hz: float


@dataclass(frozen=True)
class IlluminanceGrid:
    positions: Tuple[Tuple[float, float], ...]
    e_lower: Tuple[float, ...]
    e_upper: Tuple[float, ...]
    e_ambient: Tuple[float, ...]
    spacing: float

    @property
    def lower(self):
        return np.asarray(self.e_lower, dtype=float)

    @property
    def upper(self):
        return np.asarray(self.e_upper, dtype=float)

    @property
    def ambient(self):
        return np.asarray(self.e_ambient, dtype=float)

    def __len__(self):
        return len(self.positions)


@dataclass(frozen=True)
class PhysicalConstants:
    noise_variance: float
    luminosity_efficacy: float


@dataclass(frozen=True)
class Link:
    """A candidate (AP, chip, UT, receiver, channel) tuple with its LOS gain and Protocol Model capacity."""

    id: int
    ap: int
    chip: int
    ut: int
    rx: int
    channel: int
    bandwidth_hz: float
    gain: float
    capacity: float
    ac_pose: 'optics.BeamPose'
    rx_position: Vector
    rx_normal: Vector
    p_ac_pp: float
    p_ac_avg: float
    eta_ac: float

    @property
    def transmitter(self):
        return self.ap, self.chip

    @property
    def receiver(self):
        return self.ut, self.rx


@dataclass(frozen=True)
class Scenario:
    room_size: Vector
    desk_height: float
    aps: Tuple[AccessPoint, ...]
    uts: Tuple[UserTerminal, ...]
    channels: Tuple[Channel, ...]
    illum_grid: IlluminanceGrid
    constants: PhysicalConstants
    config_kind: ConfigKind
    rng_seed: int
    association_k: int = 1
    source: Dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def demands(self):
        return np.array([ut.demand_bps for ut in self.uts], dtype=float)

    @property
    def digest(self):
        """Git blob hash of the canonical JSON of the config the scenario was built from."""
        payload = json.dumps(self.source, sort_keys=True, separators=(',', ':')).encode()
        return hashlib.sha1(b'blob %d\0' % len(payload) + payload).hexdigest()

    def dc_transmitters(self):
        """
        The (ap, chip) pairs that carry DC optical power, in a fixed order.
        This order indexes every DC power vector in the code base.
        """

        return [(i, m) for i, ap in enumerate(self.aps) for m, chip in enumerate(ap.chips) if chip.carries_dc]

    def power_group(self, ap, chip):
        """
        Key of the optical budget a transmitter draws from. In config C all chips of one AP
        share the P_max of a single chip.
        """

        if self.config_kind is ConfigKind.C:
            return (ap,)
        return (ap, chip)


def load_scenario(path):
    """
    Load and validate a scenario from a JSON config file.

    Args:
        path (str or Path): The config file.

    Returns:
        Scenario: The validated instance.

    Raises:
        ScenarioError: When the file does not parse or an invariant is broken.
    """

    path = Path(path)
    try:
        with open(path, 'r') as f:
            cfg = json.load(f)
    except json.JSONDecodeError as e:
        raise ScenarioError(str(path), f'invalid JSON ({e})') from e
    except OSError as e:
        raise ScenarioError(str(path), f'cannot read the config ({e.strerror})') from e

    return scenario_from_dict(cfg)


def scenario_from_dict(cfg):
    """
    Build a validated Scenario from a config dict. Missing keys take the office defaults
    (6x6x3 m room, 36 APs, 100 MHz, 300-500 lux).

    Args:
        cfg (dict): The parsed config.

    Returns:
        Scenario: The validated instance.
    """

    if not isinstance(cfg, dict):
        raise ScenarioError('config', 'top level must be an object')

    merged = _merge(DEFAULTS, cfg)
    if 'aps' in cfg:
        merged.pop('grid', None)

    kind_name = str(merged['config_kind']).upper()
    if kind_name not in ConfigKind.__members__:
        raise ScenarioError('config_kind', f'must be one of A, B, C (got {merged["config_kind"]!r})')
    merged['config_kind'] = kind_name
    kind = ConfigKind(kind_name)

    room = merged['room']
    room_size = (float(room['x']), float(room['y']), float(room['z']))
    if min(room_size) <= 0:
        raise ScenarioError('room', 'all dimensions must be positive')

    desk_height = float(merged['desk_height'])
    if not 0 <= desk_height < room_size[2]:
        raise ScenarioError('desk_height', 'must lie between the floor and the ceiling')

    aps = _build_aps(merged, kind, room_size, desk_height)
    uts = _build_uts(merged, kind, room_size, desk_height)
    channels = _build_channels(merged['channels'])
    illum_grid = _build_illum_grid(merged['illum'], room_size)

    constants = PhysicalConstants(
        noise_variance=float(merged['constants']['noise_variance']),
        luminosity_efficacy=float(merged['constants']['luminosity_efficacy']),
    )
    if constants.noise_variance <= 0:
        raise ScenarioError('constants.noise_variance', 'must be strictly positive')
    if constants.luminosity_efficacy <= 0:
        raise ScenarioError('constants.luminosity_efficacy', 'must be strictly positive')

    association_k = int(merged['association_k'])
    if not 1 <= association_k <= len(aps):
        raise ScenarioError('association_k', f'must lie in [1, {len(aps)}]')

    return Scenario(
        room_size=room_size,
        desk_height=desk_height,
        aps=tuple(aps),
        uts=tuple(uts),
        channels=tuple(channels),
        illum_grid=illum_grid,
        constants=constants,
        config_kind=kind,
        rng_seed=int(merged['rng_seed']),
        association_k=association_k,
        source=merged,
    )


def with_overrides(s, n_uts=None, demand_mbps=None, config_kind=None, seed=None):
    """
    Re-materialize a scenario from its config with some experiment knobs changed.
    Sampled UT positions follow the (possibly overridden) seed, so a row can be rebuilt from it.

    Args:
        s (Scenario): The base scenario.
        n_uts (int, optional): Number of uniformly placed UTs.
        demand_mbps (float, optional): Demand of every UT.
        config_kind (str, optional): Light-source configuration A, B or C.
        seed (int, optional): Seed of the UT placement.

    Returns:
        Scenario: The new instance.
    """

    cfg = copy.deepcopy(s.source)
    uts = cfg['uts']

    if n_uts is not None or (seed is not None and isinstance(uts, dict)):
        if isinstance(uts, list):
            demand = uts[0].get('demand_mbps', DEFAULTS['uts']['demand_mbps']) if uts else DEFAULTS['uts']['demand_mbps']
            uts = {'count': len(uts), 'seed': cfg.get('rng_seed', 0), 'demand_mbps': demand}
        if n_uts is not None:
            uts['count'] = int(n_uts)
        if seed is not None:
            uts['seed'] = int(seed)
    if demand_mbps is not None:
        if isinstance(uts, list):
            for ut in uts:
                ut['demand_mbps'] = float(demand_mbps)
        else:
            uts['demand_mbps'] = float(demand_mbps)
    cfg['uts'] = uts

    if config_kind is not None:
        cfg['config_kind'] = str(config_kind).upper()

    return scenario_from_dict(cfg)


def build_candidate_links(s):
    """
    Emit the candidate links: for each UT receiver and each channel, one link to each of the UT's
    k nearest APs. In config C the serving chip is the peripheral chip whose coverage center is
    nearest the UT. Every link carries its channel gain and its Protocol Model capacity.

    Args:
        s (Scenario): The instance.

    Returns:
        list of Link: The candidate links, ids in emission order.
    """

    links = []
    ap_positions = np.array([ap.position for ap in s.aps])

    for j, ut in enumerate(s.uts):
        distances = np.linalg.norm(ap_positions - np.asarray(ut.position), axis=1)
        nearest = np.argsort(distances, kind='stable')[:s.association_k]

        for n, receiver in enumerate(ut.receivers):
            for b, channel in enumerate(s.channels):
                for i in nearest:
                    ap = s.aps[int(i)]
                    m = optics.serving_chip_index(s.config_kind, ap, ut)
                    chip = ap.chips[m]
                    ac_pose, _ = optics.beam_for_link(s.config_kind, ap, chip, ut)
                    normal = optics.receiver_normal(receiver, ut.position, ac_pose.origin)
                    gain = optics.channel_gain(ac_pose, receiver, ut.position, normal)
                    rate = capacity.protocol_capacity(
                        channel.bandwidth_hz, receiver.responsivity, gain, chip.p_ac_pp, s.constants.noise_variance
                    )
                    links.append(Link(
                        id=len(links),
                        ap=int(i),
                        chip=m,
                        ut=j,
                        rx=n,
                        channel=b,
                        bandwidth_hz=channel.bandwidth_hz,
                        gain=gain,
                        capacity=rate,
                        ac_pose=ac_pose,
                        rx_position=ut.position,
                        rx_normal=normal,
                        p_ac_pp=chip.p_ac_pp,
                        p_ac_avg=chip.p_ac_avg,
                        eta_ac=chip.eta_ac,
                    ))

    log.debug('candidate links=%d uts=%d channels=%d k=%d', len(links), len(s.uts), len(s.channels), s.association_k)
    return links


def _merge(base, override):
    result = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(result.get(key), dict):
            result[key] = _merge(result[key], value)
        else:
            result[key] = copy.deepcopy(value)
    return result


def _build_chip(role, direction, cfg, kind):
    p_max = cfg.get('p_max')
    if p_max is None:
        p_max = float(cfg['leds']) * float(cfg['led_max_power'])
    p_ac_pp = float(cfg['p_ac_pp'])
    p_ac_avg = float(cfg.get('p_ac_avg', p_ac_pp / 2))

    chip = Chip(
        role=role,
        beam_direction=direction,
        theta_half_ac=float(cfg.get('theta_half_ac', THETA_HALF_AC[kind.value])),
        theta_half_dc=float(cfg['theta_half_dc']),
        p_max=float(p_max),
        p_ac_pp=p_ac_pp,
        p_ac_avg=p_ac_avg,
        eta_ac=float(cfg['eta_ac']),
        eta_dc=float(cfg['eta_dc']),
    )

    for name in ('theta_half_ac', 'theta_half_dc'):
        if not 0 < getattr(chip, name) < 90:
            raise ScenarioError(f'chip.{name}', 'must lie strictly between 0 and 90 degrees')
    if not 0 < chip.p_ac_avg <= chip.p_ac_pp <= chip.p_max:
        raise ScenarioError('chip', 'requires 0 < p_ac_avg <= p_ac_pp <= p_max')
    if not 0 < chip.eta_ac <= chip.eta_dc <= 1:
        raise ScenarioError('chip', 'requires 0 < eta_ac <= eta_dc <= 1')

    return chip


def _build_aps(cfg, kind, room_size, desk_height):
    ceiling = room_size[2]

    if 'aps' in cfg:
        positions = []
        for idx, ap in enumerate(cfg['aps']):
            pos = [float(v) for v in ap['position']]
            if len(pos) == 3 and abs(pos[2] - ceiling) > 1e-9:
                raise ScenarioError(f'aps[{idx}].position', 'must lie on the ceiling plane z = room.z')
            positions.append((pos[0], pos[1], ceiling))
        cell_size = float(cfg.get('cell_size', 1.0))
    else:
        grid = cfg['grid']
        nx, ny, spacing = int(grid['nx']), int(grid['ny']), float(grid['spacing'])
        if nx < 1 or ny < 1 or spacing <= 0:
            raise ScenarioError('grid', 'needs nx, ny >= 1 and a positive spacing')
        xs = (np.arange(nx) - (nx - 1) / 2) * spacing + room_size[0] / 2
        ys = (np.arange(ny) - (ny - 1) / 2) * spacing + room_size[1] / 2
        positions = [(float(x), float(y), ceiling) for y in ys for x in xs]
        cell_size = float(cfg.get('cell_size', spacing))

    if not positions:
        raise ScenarioError('aps', 'at least one AP is required')
    if cell_size <= 0:
        raise ScenarioError('cell_size', 'must be positive')

    chip_cfg = cfg['chip']
    aps = []
    for position in positions:
        if kind is ConfigKind.C:
            n = int(cfg['chips_per_side'])
            if n < 2 or n % 2:
                raise ScenarioError('chips_per_side', 'must be a positive multiple of 2')
            chips = [_build_chip(ChipRole.CENTRAL, DOWN, chip_cfg, kind)]
            offsets = ((np.arange(n) + 0.5) / n - 0.5) * cell_size
            for dy in offsets:
                for dx in offsets:
                    center = np.array([position[0] + dx, position[1] + dy, desk_height])
                    direction = center - np.asarray(position)
                    direction = tuple(float(v) for v in direction / np.linalg.norm(direction))
                    chips.append(_build_chip(ChipRole.PERIPHERAL, direction, chip_cfg, kind))
            max_active = 1
        else:
            chips = [_build_chip(ChipRole.SOLE, DOWN, chip_cfg, kind)]
            max_active = len(chips)
        aps.append(AccessPoint(position=position, chips=tuple(chips), cell_size=cell_size, max_active_links=max_active))

    return aps


def _build_receivers(cfg, kind, count):
    rcfg = cfg['receiver']
    default_orientation = Orientation.FACE_UP if kind is ConfigKind.A else Orientation.FACE_SERVING_TX
    orientation = rcfg.get('orientation_policy', default_orientation.value)
    try:
        orientation = Orientation(orientation)
    except ValueError as e:
        raise ScenarioError('receiver.orientation_policy', f'unknown policy {orientation!r}') from e

    receiver = Receiver(
        area=float(rcfg['area']),
        fov_half=float(rcfg['fov_half']),
        filter_gain=float(rcfg['filter_gain']),
        lens_index=float(rcfg['lens_index']),
        responsivity=float(rcfg['responsivity']),
        orientation=orientation,
    )
    if not 0 < receiver.fov_half <= 90:
        raise ScenarioError('receiver.fov_half', 'must lie in (0, 90] degrees')
    if receiver.responsivity <= 0:
        raise ScenarioError('receiver.responsivity', 'must be positive')
    if receiver.area <= 0:
        raise ScenarioError('receiver.area', 'must be positive')
    if count < 1:
        raise ScenarioError('receivers_per_ut', 'every UT needs at least one receiver')

    return tuple([receiver] * count)


def _build_uts(cfg, kind, room_size, desk_height):
    footprint = box(0.0, 0.0, room_size[0], room_size[1])
    receivers = _build_receivers(cfg, kind, int(cfg['receivers_per_ut']))
    uts_cfg = cfg['uts']

    if isinstance(uts_cfg, list):
        placements = []
        for idx, ut in enumerate(uts_cfg):
            pos = [float(v) for v in ut['position']]
            if len(pos) == 3 and abs(pos[2] - desk_height) > 1e-9:
                raise ScenarioError(f'uts[{idx}].position', 'must lie on the desk plane z = desk_height')
            demand = ut.get('demand_mbps', DEFAULTS['uts']['demand_mbps'])
            placements.append((pos[0], pos[1], float(demand)))
    else:
        count = int(uts_cfg['count'])
        if count < 0:
            raise ScenarioError('uts.count', 'must be non-negative')
        rng = np.random.default_rng(int(uts_cfg.get('seed', cfg['rng_seed'])))
        xs = rng.uniform(0.0, room_size[0], count)
        ys = rng.uniform(0.0, room_size[1], count)
        demand = float(uts_cfg['demand_mbps'])
        placements = [(float(x), float(y), demand) for x, y in zip(xs, ys)]

    uts = []
    for idx, (x, y, demand) in enumerate(placements):
        if not footprint.covers(Point(x, y)):
            raise ScenarioError(f'uts[{idx}].position', 'must lie inside the room footprint')
        if demand < 0:
            raise ScenarioError(f'uts[{idx}].demand_mbps', 'must be non-negative')
        uts.append(UserTerminal(position=(x, y, desk_height), receivers=receivers, demand_bps=demand * 1e6))

    return uts


def _build_channels(channels_cfg):
    if not channels_cfg:
        raise ScenarioError('channels', 'at least one channel is required')

    channels = []
    for idx, ch in enumerate(channels_cfg):
        channel = Channel(id=int(ch.get('id', idx)), bandwidth_hz=float(ch['bandwidth_hz']))
        if channel.bandwidth_hz <= 0:
            raise ScenarioError(f'channels[{idx}].bandwidth_hz', 'must be positive')
        channels.append(channel)

    return channels


def _per_position(value, count, name):
    if isinstance(value, (list, tuple)):
        if len(value) != count:
            raise ScenarioError(f'illum.{name}', f'needs one value per grid position ({count})')
        return tuple(float(v) for v in value)
    return tuple([float(value)] * count)


def _build_illum_grid(illum_cfg, room_size):
    spacing = float(illum_cfg['spacing'])
    if spacing <= 0:
        raise ScenarioError('illum.spacing', 'must be positive')

    steps = [room_size[0] / spacing, room_size[1] / spacing]
    if any(abs(n - round(n)) > 1e-6 for n in steps):
        raise ScenarioError('illum.spacing', f'must divide the room footprint {room_size[0]} x {room_size[1]} m')

    nx = int(round(steps[0])) + 1
    ny = int(round(steps[1])) + 1
    xs = np.linspace(0.0, room_size[0], nx)
    ys = np.linspace(0.0, room_size[1], ny)
    positions = tuple((float(x), float(y)) for y in ys for x in xs)

    count = len(positions)
    lower = _per_position(illum_cfg['lower'], count, 'lower')
    upper = _per_position(illum_cfg['upper'], count, 'upper')
    ambient = _per_position(illum_cfg.get('ambient', 0.0), count, 'ambient')

    for k, (lo, hi) in enumerate(zip(lower, upper)):
        if lo > hi:
            raise ScenarioError('illum', f'e_lower > e_upper at grid position {k} {positions[k]}')
    if min(ambient) < 0:
        raise ScenarioError('illum.ambient', 'must be non-negative')

    return IlluminanceGrid(positions=positions, e_lower=lower, e_upper=upper, e_ambient=ambient, spacing=spacing)
