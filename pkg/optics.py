"""
This module contains the optical model of the room: Lambertian sources on the ceiling, the LOS channel
gain towards a photodiode, and the illuminance gain towards the desk-height grid that the lighting
constraints are checked on.
"""

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Tuple

import numpy as np

if TYPE_CHECKING:
    from scenario import AccessPoint, Chip, Receiver, Scenario, UserTerminal

log = logging.getLogger(__name__)

UNIT_TOL = 1e-12


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class BeamPose:
    origin: Tuple[float, float, float]
    direction: Tuple[float, float, float]
    lambertian_order: float

    def __post_init__(self):
        if abs(np.linalg.norm(self.direction) - 1.0) > UNIT_TOL:
            raise GeometryError(f'beam direction {self.direction} is not a unit vector')


@dataclass(frozen=True)
class LinkGeometry:
    distance: float
    radiance_angle: float
    incidence_angle: float


def lambertian_order(theta_half):
    """
    Lambertian order m_l = -ln 2 / ln(cos theta_1/2) of a source with the given semi-angle at half power.

    Args:
        theta_half (float): Semi-angle in degrees, strictly inside (0, 90).

    Returns:
        float: The Lambertian order.
    """

    if not 0.0 < theta_half < 90.0:
        raise GeometryError(f'semi-angle at half power must lie in (0, 90) degrees (got {theta_half})')

    return -math.log(2.0) / math.log(math.cos(math.radians(theta_half)))


def unit(vector):
    v = np.asarray(vector, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise GeometryError('cannot normalize a zero vector')
    return tuple(float(c) for c in v / norm)


def link_geometry(tx, rx_position, rx_normal):
    """
    Distance, radiance angle and incidence angle (radians) between a source pose and a receiver pose.
    """

    v = np.asarray(rx_position, dtype=float) - np.asarray(tx.origin, dtype=float)
    distance = float(np.linalg.norm(v))
    if distance == 0:
        raise GeometryError('transmitter and receiver coincide')

    cos_theta = float(np.clip(np.dot(tx.direction, v) / distance, -1.0, 1.0))
    cos_psi = float(np.clip(np.dot(rx_normal, -v) / distance, -1.0, 1.0))

    return LinkGeometry(distance=distance, radiance_angle=math.acos(cos_theta), incidence_angle=math.acos(cos_psi))


def channel_gain(tx, receiver, rx_position, rx_normal):
    """
    LOS DC channel gain of a Lambertian source towards a photodiode behind an optical concentrator.
    The gain is 0 outside the receiver FOV or behind the source.

    Args:
        tx (BeamPose): The source.
        receiver (Receiver): Photodiode parameters.
        rx_position (tuple): Receiver position.
        rx_normal (tuple): Unit normal of the photodiode.

    Returns:
        float: The gain H >= 0.
    """

    geo = link_geometry(tx, rx_position, rx_normal)
    fov = math.radians(receiver.fov_half)
    if geo.incidence_angle > fov or geo.radiance_angle >= math.pi / 2:
        return 0.0

    ml = tx.lambertian_order
    concentrator = receiver.lens_index ** 2 / math.sin(fov) ** 2

    return (
        (ml + 1) * receiver.area / (2 * math.pi * geo.distance ** 2)
        * math.cos(geo.radiance_angle) ** ml
        * receiver.filter_gain
        * concentrator
        * math.cos(geo.incidence_angle)
    )


def illum_gain(tx, points):
    """
    Illuminance gain of a source towards grid points on a horizontal plane facing up.
    There is no FOV cutoff, only points behind the source get 0.

    Args:
        tx (BeamPose): The source.
        points (array-like): One (x, y, z) point or an array of shape (K, 3).

    Returns:
        float or numpy.ndarray: The gain(s) g.
    """

    single = np.ndim(points) == 1
    pts = np.atleast_2d(np.asarray(points, dtype=float))

    v = pts - np.asarray(tx.origin, dtype=float)
    distance = np.linalg.norm(v, axis=1)
    cos_theta = np.clip(v @ np.asarray(tx.direction) / distance, 0.0, 1.0)
    cos_psi = np.clip(-v[:, 2] / distance, 0.0, 1.0)

    ml = tx.lambertian_order
    g = (ml + 1) / (2 * math.pi * distance ** 2) * cos_theta ** ml * cos_psi

    return float(g[0]) if single else g


def coverage_center(chip, ap_position, plane_z):
    """Point where the beam axis of a chip meets the horizontal plane z = plane_z."""

    origin = np.asarray(ap_position, dtype=float)
    direction = np.asarray(chip.beam_direction, dtype=float)
    if direction[2] >= 0:
        raise GeometryError('chip beam does not point towards the desk plane')

    t = (plane_z - origin[2]) / direction[2]
    return origin + t * direction


def serving_chip_index(config_kind, ap, ut):
    """
    Index of the chip of an AP that carries the AC signal towards a UT. In config C this is the
    peripheral chip whose coverage center is nearest the UT, otherwise the single AC-capable chip.
    """

    if config_kind.value == 'C':
        best, best_distance = None, math.inf
        for m, chip in enumerate(ap.chips):
            if not chip.carries_ac or chip.carries_dc:
                continue
            center = coverage_center(chip, ap.position, ut.position[2])
            distance = math.hypot(center[0] - ut.position[0], center[1] - ut.position[1])
            if distance < best_distance:
                best, best_distance = m, distance
        if best is None:
            raise GeometryError('config C access point has no peripheral chip')
        return best

    for m, chip in enumerate(ap.chips):
        if chip.carries_ac:
            return m
    raise GeometryError('access point has no AC-capable chip')


def dc_pose(ap):
    """Vertical DC beam of the chip of an AP that carries the illumination."""

    for chip in ap.chips:
        if chip.carries_dc:
            return BeamPose(ap.position, (0.0, 0.0, -1.0), lambertian_order(chip.theta_half_dc))
    raise GeometryError('access point has no DC-capable chip')


def beam_for_link(config_kind, ap, chip, ut):
    """
    AC and DC beam poses used when a chip of an AP serves a UT.

    Config A emits both beams vertically, config B steers the AC beam at the UT and config C uses the
    fixed direction of the selected peripheral chip. The DC beam is always vertical.

    Returns:
        tuple of BeamPose: (ac_pose, dc_pose).
    """

    origin = ap.position
    kind = config_kind.value

    if kind == 'A':
        direction = (0.0, 0.0, -1.0)
    elif kind == 'B':
        direction = unit(np.asarray(ut.position) - np.asarray(origin))
    else:
        if chip != ap.chips[serving_chip_index(config_kind, ap, ut)]:
            raise GeometryError('config C links must use the peripheral chip nearest the UT')
        direction = chip.beam_direction

    ac = BeamPose(origin, direction, lambertian_order(chip.theta_half_ac))
    return ac, dc_pose(ap)


def receiver_normal(receiver, rx_position, tx_origin):
    """Photodiode normal under the receiver's orientation policy."""

    if receiver.orientation.value == 'face_up':
        return (0.0, 0.0, 1.0)
    return unit(np.asarray(tx_origin, dtype=float) - np.asarray(rx_position, dtype=float))


def grid_points(s):
    """Illuminance grid positions of a scenario lifted to the desk plane, shape (K, 3)."""

    xy = np.asarray(s.illum_grid.positions, dtype=float).reshape(-1, 2)
    z = np.full((len(xy), 1), s.desk_height)
    return np.hstack([xy, z])


def dc_gain_matrix(s, points=None):
    """Illuminance gains (K, T) of the DC transmitters of a scenario, columns in dc_transmitters() order."""

    points = grid_points(s) if points is None else points
    columns = [illum_gain(dc_pose(s.aps[i]), points) for i, _ in s.dc_transmitters()]
    if not columns:
        return np.zeros((len(points), 0))
    return np.column_stack(columns)


def ac_gain_matrix(links, points):
    """Illuminance gains (K, L) of the AC beams of the given links."""

    if not links:
        return np.zeros((len(points), 0))
    return np.column_stack([illum_gain(link.ac_pose, points) for link in links])


def illuminance_field(s, active_links, dc_powers):
    """
    Illuminance (lux) on the grid for the given active links and DC optical powers.

    Args:
        s (Scenario): The instance.
        active_links (list of Link): Links carrying AC during the period.
        dc_powers (array-like): DC optical power per DC transmitter.

    Returns:
        numpy.ndarray: Illuminance per grid position.
    """

    points = grid_points(s)
    dc_powers = np.asarray(dc_powers, dtype=float)
    ac_avg = np.array([link.p_ac_avg for link in active_links], dtype=float)

    optical = dc_gain_matrix(s, points) @ dc_powers + ac_gain_matrix(list(active_links), points) @ ac_avg
    return s.constants.luminosity_efficacy * optical + s.illum_grid.ambient
