"""
This module builds the conflict graph over the candidate links. Two links conflict when they share a
transmitter or a receiver, when their AP or UT can only host one active link, or when they use the same
channel and one of them would see a SIR below the threshold while both are active.
"""

import itertools
import logging
import math
from dataclasses import dataclass

import networkx as nx
import numpy as np

import optics

log = logging.getLogger(__name__)


class ConflictGraphError(ValueError):
    pass


@dataclass
class ConflictGraph:
    links: list
    graph: nx.Graph
    sir_threshold: float

    def conflicts(self, a, b):
        return self.graph.has_edge(a, b)

    def neighbors(self, link_id):
        return set(self.graph.neighbors(link_id))

    @property
    def n_edges(self):
        return self.graph.number_of_edges()


def pairwise_sir(a, b, s):
    """
    SIR seen by each of two same-channel links when both are active.

    Returns:
        tuple of float: (SIR at the receiver of a, SIR at the receiver of b). A zero interfering
        gain gives inf, a zero signal gain gives 0.
    """

    if a.id == b.id:
        raise ConflictGraphError('a link does not interfere with itself')
    if a.channel != b.channel:
        raise ConflictGraphError(f'links {a.id} and {b.id} use different channels')

    return _sir(a, b, s), _sir(b, a, s)


def _sir(victim, interferer, s):
    signal = victim.gain * victim.p_ac_pp
    if signal == 0:
        return 0.0

    receiver = s.uts[victim.ut].receivers[victim.rx]
    interference = optics.channel_gain(interferer.ac_pose, receiver, victim.rx_position, victim.rx_normal) * interferer.p_ac_pp
    if interference == 0:
        return math.inf
    return signal / interference


def _structural_conflict(a, b, s):
    if a.transmitter == b.transmitter:
        return 'transmitter'
    if a.receiver == b.receiver:
        return 'receiver'
    if a.ap == b.ap and s.aps[a.ap].max_active_links == 1:
        return 'ap'
    if a.ut == b.ut and len(s.uts[a.ut].receivers) == 1:
        return 'ut'
    return None


def build_conflict_graph(links, sir_threshold, s):
    """
    Build the conflict graph of the candidate links.

    A finite threshold never connects a same-channel pair whose SIR is infinite, which happens when
    the interferer lies outside the field of view of the receiver. An infinite threshold connects
    every same-channel pair, so the graph is complete per channel.

    Args:
        links (list of Link): The candidate links.
        sir_threshold (float): Linear SIR threshold, at least 1, math.inf for the complete graph.
        s (Scenario): The instance.

    Returns:
        ConflictGraph: Nodes are link ids, every edge carries the kind of conflict.
    """

    if sir_threshold < 1:
        raise ConflictGraphError(f'SIR threshold must be >= 1 (got {sir_threshold})')
    if any(link.id != idx for idx, link in enumerate(links)):
        raise ConflictGraphError('link ids must match their position in the candidate list')

    graph = nx.Graph()
    graph.add_nodes_from(link.id for link in links)

    for a, b in itertools.combinations(links, 2):
        kind = _structural_conflict(a, b, s)
        if kind is not None:
            graph.add_edge(a.id, b.id, kind=kind)
            continue
        if a.channel != b.channel:
            continue
        sir = min(pairwise_sir(a, b, s))
        if sir < sir_threshold or math.isinf(sir_threshold):
            graph.add_edge(a.id, b.id, kind='sir', sir=sir)

    log.info('conflict graph links=%d edges=%d sir_threshold=%g', len(links), graph.number_of_edges(), sir_threshold)
    return ConflictGraph(links=list(links), graph=graph, sir_threshold=sir_threshold)


def is_independent(schedule, g, s):
    """
    Check a set of link ids against the conflict edges and the per-AP, per-UT, per-transmitter
    and per-receiver activity limits.
    """

    schedule = sorted(set(schedule))
    for a, b in itertools.combinations(schedule, 2):
        if g.graph.has_edge(a, b):
            return False

    counts = {}
    for l in schedule:
        link = g.links[l]
        limits = (
            (('tx', link.transmitter), 1),
            (('rx', link.receiver), 1),
            (('ap', link.ap), s.aps[link.ap].max_active_links),
            (('ut', link.ut), len(s.uts[link.ut].receivers)),
        )
        for key, limit in limits:
            counts[key] = counts.get(key, 0) + 1
            if counts[key] > limit:
                return False

    return True


def independence_constraints(g, s):
    """
    Rows A x <= b over the link indicators that describe exactly the independent sets:
    one row per conflict edge plus cardinality rows for APs and UTs that host more than one link.

    Returns:
        tuple of numpy.ndarray: (A of shape (R, L), b of shape (R,)).
    """

    n = len(g.links)
    rows, rhs = [], []

    for a, b in g.graph.edges():
        row = np.zeros(n)
        row[[a, b]] = 1.0
        rows.append(row)
        rhs.append(1.0)

    groups = {}
    for link in g.links:
        groups.setdefault(('ap', link.ap), []).append(link.id)
        groups.setdefault(('ut', link.ut), []).append(link.id)

    for (kind, idx), members in groups.items():
        limit = s.aps[idx].max_active_links if kind == 'ap' else len(s.uts[idx].receivers)
        if limit > 1 and len(members) > limit:
            row = np.zeros(n)
            row[members] = 1.0
            rows.append(row)
            rhs.append(float(limit))

    if not rows:
        return np.zeros((0, n)), np.zeros(0)
    return np.vstack(rows), np.array(rhs)


def enumerate_independent_sets(g, s, max_links=20):
    """
    Every independent set of the conflict graph, the empty set included.
    Only meant for small instances that are solved exhaustively.
    """

    n = len(g.links)
    if n > max_links:
        raise ConflictGraphError(f'refusing to enumerate independent sets over {n} links (limit {max_links})')

    found = []

    def extend(start, current):
        found.append(frozenset(current))
        for l in range(start, n):
            candidate = current + [l]
            if is_independent(candidate, g, s):
                extend(l + 1, candidate)

    extend(0, [])
    return found


def write_conflict_graph(g, path):
    """Dump the conflict graph as an adjacency list for debugging."""

    nx.write_adjlist(g.graph, str(path))
    log.info('conflict graph written path=%s', path)
