"""Maximum-value simple-path search when the deadline never binds (case I).

Every arc's travel time is pre-optimized (bound-valued), so a route is scored
by summing fixed arc values and the search is a label-correcting dynamic
program over (end node, visited set) states, breadth-first by visited-set
size.  Labels are pruned by a dominance rule that also compares labels whose
visited sets differ: a label that skipped the idle stop can still dominate
one that visited it, after charging the worst-case value of inserting the
idle stop just before the exit depot.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .instance import ArcIndexTable
from .relaxation import RelaxCoeffs

_NEG = -1e300


@dataclass(slots=True)
class LabelC1:
    """Partial path from the entry depot to ``node``.

    ``mask`` has bit ``k-1`` set when interior waypoint ``k`` was visited;
    the entry depot is implicitly visited by every label.
    """

    node: int
    mask: int
    value: float
    parent: Optional["LabelC1"]
    order: int
    depth: int
    alive: bool = True


def reconstruct(label: LabelC1) -> List[int]:
    """Interior node sequence of a label, oldest first."""
    nodes: List[int] = []
    cur: Optional[LabelC1] = label
    while cur is not None:
        nodes.append(cur.node)
        cur = cur.parent
    nodes.reverse()
    return nodes


def path_value(label: LabelC1, values: np.ndarray) -> float:
    """Re-sum a label's value from its reconstructed path (cross-check)."""
    nodes = [0] + reconstruct(label)
    return float(sum(values[i, j] for i, j in zip(nodes[:-1], nodes[1:])))


def dominates_case1(l1: LabelC1, l2: LabelC1, vbar: int,
                    c_extra: Optional[float]) -> bool:
    """True when ``l1`` makes ``l2`` redundant.

    Requires the same end node and ``visited(l1) subseteq visited(l2)``.
    When both or neither visited the idle stop, plain value comparison
    decides.  When only ``l2`` visited it, ``l1`` must still win after paying
    ``c_extra``: the worst-case value of rerouting any completion of ``l2``
    through the idle stop just before the exit.  The minimum must range over
    every node that can immediately precede the exit in a completion of
    ``l2``, which is its current end node plus all nodes it has not visited;
    dropping the end node from that set over-prunes (it loses completions
    that exit directly).  ``c_extra=None`` declines the comparison.
    """
    if l1.node != l2.node:
        return False
    if l1.mask & ~l2.mask:
        return False
    vb_bit = 0 if vbar == 0 else 1 << (vbar - 1)
    in1 = bool(l1.mask & vb_bit)
    in2 = bool(l2.mask & vb_bit)
    if in1 == in2:
        return l1.value >= l2.value
    # subset relation rules out in1 and not in2
    if c_extra is None:
        return False
    return l1.value + c_extra >= l2.value


class _Store:
    """Per-node label store: a state dict for exact-visited-set merges plus
    numpy mirrors for bulk subset-dominance checks."""

    __slots__ = ("labels", "masks", "values", "alive", "size", "by_mask")

    def __init__(self):
        self.labels: List[LabelC1] = []
        cap = 64
        self.masks = np.zeros(cap, dtype=np.int64)
        self.values = np.zeros(cap)
        self.alive = np.zeros(cap, dtype=bool)
        self.size = 0
        self.by_mask: Dict[int, int] = {}

    def append(self, label: LabelC1) -> None:
        if self.size == len(self.masks):
            self.masks = np.resize(self.masks, 2 * self.size)
            self.values = np.resize(self.values, 2 * self.size)
            self.alive = np.resize(self.alive, 2 * self.size)
        k = self.size
        self.masks[k] = label.mask
        self.values[k] = label.value
        self.alive[k] = True
        self.labels.append(label)
        self.by_mask[label.mask] = k
        self.size = k + 1

    def kill(self, idx: int) -> None:
        self.alive[idx] = False
        self.labels[idx].alive = False


@dataclass
class Case1Result:
    value: float
    nodes: Tuple[int, ...]
    label: LabelC1
    labels_stored: int
    labels_alive: int


def solve_case1(coeffs: RelaxCoeffs, vbar: int, table: ArcIndexTable,
                use_dominance: bool = True, scan_cap: int = 4096) -> Case1Result:
    """Best simple route for one idle candidate.

    Returns the maximum sum of arc values over routes from the entry to the
    exit depot; for ``vbar != 0`` only routes visiting ``vbar`` qualify.  The
    returned value excludes the multiplier constant and the idle-gain term,
    which the caller adds.

    ``scan_cap`` bounds the per-node store size up to which the cross-set
    subset-dominance scan runs; above it only exact-state merging prunes.
    The cap trades pruning effort for insert cost on big instances and never
    changes the returned value.
    """
    n = table.n
    if not (vbar == 0 or 1 <= vbar <= n):
        raise ValueError(f"idle candidate {vbar} is not a waypoint id")
    exit_id = table.exit_id
    values = table.matrix(coeffs.arc_values(vbar), fill=_NEG)
    vb_bit = 0 if vbar == 0 else 1 << (vbar - 1)

    # worst-case value of inserting vbar between i and the exit
    ext_cost = np.full(n + 1, np.inf)
    if vbar != 0:
        for i in range(1, n + 1):
            if i != vbar:
                ext_cost[i] = (values[i, vbar] + values[vbar, exit_id]
                               - values[i, exit_id])
    c_extra_cache: Dict[Tuple[int, int], Optional[float]] = {}

    def c_extra(mask: int, end: int) -> Optional[float]:
        """Worst-case value of inserting vbar before the exit, over every
        node that can precede the exit: the end node itself (direct exit) or
        any yet-unvisited node."""
        key = (mask, end)
        got = c_extra_cache.get(key)
        if got is not None or key in c_extra_cache:
            return got
        best = float(ext_cost[end]) if end != vbar else None
        for i in range(1, n + 1):
            if not (mask >> (i - 1)) & 1 and i != vbar:
                e = float(ext_cost[i])
                if best is None or e < best:
                    best = e
        c_extra_cache[key] = best
        return best

    stores = [_Store() for _ in range(n + 1)]  # index by node 1..n
    order = 0

    def insert(node: int, mask: int, value: float,
               parent: Optional[LabelC1], depth: int) -> None:
        nonlocal order
        st = stores[node]
        if use_dominance:
            # exact-state merge: same end node and same visited set means the
            # higher value wins outright (no children exist yet, since equal
            # cardinality states only collide within one extension layer)
            row = st.by_mask.get(mask)
            if row is not None and st.alive[row]:
                old = st.labels[row]
                if value > old.value:
                    old.value = value
                    old.parent = parent
                    st.values[row] = value
                return
        if use_dominance and st.size and st.size <= scan_cap:
            k = st.size
            m = st.masks[:k]
            v = st.values[:k]
            a = st.alive[:k]
            new_in = bool(mask & vb_bit)
            # existing dominates new?
            subset = a & ((m & ~mask) == 0)
            if subset.any():
                vals = v[subset]
                if new_in:
                    # clause 1 where the existing label also visited vbar,
                    # clause 2 (pay the detour cost) where it did not
                    e_in = (m[subset] & vb_bit) != 0
                    ce = c_extra(mask, node)
                    if ce is None:
                        win = e_in & (vals >= value)
                    else:
                        win = np.where(e_in, vals >= value, vals + ce >= value)
                else:
                    # subset relation forces equal vbar membership here
                    win = vals >= value
                if win.any():
                    return
            # new dominates existing?
            sup = a & ((mask & ~m) == 0)
            if sup.any():
                for idx in np.flatnonzero(sup):
                    e_mask = int(st.masks[idx])
                    e_in = bool(e_mask & vb_bit)
                    if new_in == e_in:
                        if value >= st.values[idx]:
                            st.kill(int(idx))
                    elif not new_in and e_in:
                        ce = c_extra(e_mask, node)
                        if ce is not None and value + ce >= st.values[idx]:
                            st.kill(int(idx))
        st.append(LabelC1(node, mask, value, parent, order, depth))
        order += 1

    row0 = values[0].tolist()
    for i in range(1, n + 1):
        insert(i, 1 << (i - 1), row0[i], None, 1)

    rows = values.tolist()
    for depth in range(1, n):
        for j in range(1, n + 1):
            st = stores[j]
            row = rows[j]
            for idx in range(st.size):
                label = st.labels[idx]
                if not label.alive or label.depth != depth:
                    continue
                mask = label.mask
                base = label.value
                for i in range(1, n + 1):
                    bit = 1 << (i - 1)
                    if mask & bit:
                        continue
                    insert(i, mask | bit, base + row[i], label, depth + 1)

    best_label = None
    best_total = -np.inf
    for i in range(1, n + 1):
        st = stores[i]
        for idx in range(st.size):
            label = st.labels[idx]
            if not label.alive:
                continue
            if vbar != 0 and not (label.mask & vb_bit):
                continue
            total = label.value + float(values[i, exit_id])
            if total > best_total:
                best_total = total
                best_label = label

    stored = sum(st.size for st in stores)
    alive = sum(int(st.alive[:st.size].sum()) for st in stores)
    nodes = tuple([0] + reconstruct(best_label) + [exit_id])
    return Case1Result(best_total, nodes, best_label, stored, alive)
