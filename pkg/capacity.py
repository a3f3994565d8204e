"""
This module contains the link capacity under the Protocol Model (noise only) and under the
Physical Model (co-channel interference from the other active AC beams treated as noise).
"""

import logging
import math
from dataclasses import dataclass

import optics

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinkRate:
    link: int
    interference_power: float
    sinr: float
    capacity: float


def protocol_capacity(bandwidth, responsivity, gain, p_ac, noise):
    """
    Shannon capacity of a link when only noise is present.

    Args:
        bandwidth (float): Channel bandwidth in Hz.
        responsivity (float): Photodiode responsivity in A/W.
        gain (float): LOS channel gain.
        p_ac (float): Peak-to-peak AC optical power in W.
        noise (float): Noise variance N in A^2.

    Returns:
        float: Capacity in bits per second.
    """

    return bandwidth * math.log2(1 + (responsivity * gain * p_ac) ** 2 / noise)


def physical_capacity(bandwidth, responsivity, gain, p_ac, p_interference, noise):
    """Shannon capacity of a link with the interfering optical power P_I added to the noise."""

    signal = (responsivity * gain * p_ac) ** 2
    return bandwidth * math.log2(1 + signal / ((responsivity * p_interference) ** 2 + noise))


def interference_power(link, active_links, s):
    """
    Optical power reaching the receiver of a link from the AC beams of the other active links
    on the same channel.

    Args:
        link (Link): The link being received.
        active_links (iterable of Link): Links active in the same period.
        s (Scenario): The instance, used for the receiver parameters.

    Returns:
        float: P_I in W.
    """

    receiver = s.uts[link.ut].receivers[link.rx]
    total = 0.0

    for other in active_links:
        if other.id == link.id or other.channel != link.channel:
            continue
        gain = optics.channel_gain(other.ac_pose, receiver, link.rx_position, link.rx_normal)
        total += gain * other.p_ac_pp

    return total


def link_rates(s, active_links):
    """Physical Model rate of every link in an active set."""

    active_links = list(active_links)
    rates = []

    for link in active_links:
        p_i = interference_power(link, active_links, s)
        receiver = s.uts[link.ut].receivers[link.rx]
        noise = s.constants.noise_variance
        signal = (receiver.responsivity * link.gain * link.p_ac_pp) ** 2
        sinr = signal / ((receiver.responsivity * p_i) ** 2 + noise)
        rates.append(LinkRate(
            link=link.id,
            interference_power=p_i,
            sinr=sinr,
            capacity=physical_capacity(link.bandwidth_hz, receiver.responsivity, link.gain, link.p_ac_pp, p_i, noise),
        ))

    return rates
