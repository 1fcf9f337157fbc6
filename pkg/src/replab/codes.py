"""Canonical byte codes for rooted graphs carrying 0, 1, or 2 vertex colorings.

Two rooted (di)colored graphs get equal codes iff there is an isomorphism
preserving the root, the edges, and every attached coloring.

Code format (stable; codes are used as golden-test keys):

* Trees: ``b"T"`` followed by the root's node record.  A node record is
  ``varint(len(payload)) + payload`` where payload is one byte for the
  number of colorings, one byte per coloring with this vertex's color,
  then the records of the child subtrees sorted lexicographically
  (AHU-style).  Varints are 7-bit little-endian with continuation bit.
* Other rooted graphs: ``b"G"`` followed by varint(n), the coloring count
  byte, the upper-triangular adjacency of the canonically labeled graph
  (one byte per vertex pair, row-major, root first), and the per-vertex
  color bytes in canonical order.  The canonical labeling is the
  lexicographic minimum over an individualization-refinement search, so
  it is label-independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import CapacityError, ParameterError

__all__ = ["LocalCode", "encode_rooted", "tree_code"]

_SEARCH_LEAF_CAP = 100_000


@dataclass(frozen=True)
class LocalCode:
    """Canonical encoding of a rooted graph with 0-2 colorings."""

    data: bytes
    is_tree: bool

    def hex(self) -> str:
        return self.data.hex()


def _varint(n: int) -> bytes:
    out = bytearray()
    while True:
        b = n & 0x7F
        n >>= 7
        if n:
            out.append(b | 0x80)
        else:
            out.append(b)
            return bytes(out)


def _color_bytes(v, colorings: Sequence[Mapping[int, int]]) -> bytes:
    cols = bytearray([len(colorings)])
    for col in colorings:
        c = col[v]
        if not (1 <= c <= 255):
            raise ParameterError(f"color {c} outside encodable range 1..255")
        cols.append(c)
    return bytes(cols)


def tree_code(adj: Mapping[int, Sequence[int]], root,
              colorings: Sequence[Mapping[int, int]] = ()) -> bytes:
    """AHU encoding of a rooted tree, children sorted by their own codes."""
    order = [root]
    parent = {root: None}
    for v in order:
        for w in adj[v]:
            if w not in parent:
                parent[w] = v
                order.append(w)
    if len(order) != len(adj):
        raise ParameterError("tree adjacency is not connected from the root")
    children: dict = {v: [] for v in order}
    for v in order[1:]:
        children[parent[v]].append(v)
    code: dict = {}
    for v in reversed(order):  # post-order: children appear before parents
        payload = _color_bytes(v, colorings) + b"".join(sorted(code[w] for w in children[v]))
        code[v] = _varint(len(payload)) + payload
    return b"T" + code[root]


def _refine(cells: list[list[int]], adj: Mapping[int, Sequence[int]]) -> list[list[int]]:
    while True:
        index = {}
        for i, cell in enumerate(cells):
            for v in cell:
                index[v] = i
        new_cells: list[list[int]] = []
        changed = False
        for cell in cells:
            if len(cell) == 1:
                new_cells.append(cell)
                continue
            sig = {v: tuple(sorted(index[w] for w in adj[v])) for v in cell}
            groups: dict[tuple, list[int]] = {}
            for v in cell:
                groups.setdefault(sig[v], []).append(v)
            if len(groups) > 1:
                changed = True
            for key in sorted(groups):
                new_cells.append(groups[key])
        cells = new_cells
        if not changed:
            return cells


def _encode_ordered(order: list[int], adj: Mapping[int, Sequence[int]],
                    colorings: Sequence[Mapping[int, int]]) -> bytes:
    pos = {v: i for i, v in enumerate(order)}
    n = len(order)
    bits = bytearray()
    for i in range(n):
        nb = {pos[w] for w in adj[order[i]]}
        for j in range(i + 1, n):
            bits.append(1 if j in nb else 0)
    cols = bytearray()
    for v in order:
        cols += _color_bytes(v, colorings)
    return bytes(bits) + bytes(cols)


def _canonical_graph_code(adj: Mapping[int, Sequence[int]], root,
                          colorings: Sequence[Mapping[int, int]]) -> bytes:
    # initial partition: root alone, then classes by (distance, colors, degree)
    dist = {root: 0}
    frontier = [root]
    while frontier:
        nxt = []
        for v in frontier:
            for w in adj[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    nxt.append(w)
        frontier = nxt
    if len(dist) != len(adj):
        raise ParameterError("rooted graph is not connected from the root")
    keys: dict[int, tuple] = {
        v: (dist[v], tuple(col[v] for col in colorings), len(adj[v])) for v in adj
    }
    groups: dict[tuple, list[int]] = {}
    for v in adj:
        if v == root:
            continue
        groups.setdefault(keys[v], []).append(v)
    cells = [[root]] + [groups[key] for key in sorted(groups)]

    best: bytes | None = None
    leaves = 0

    def descend(cells: list[list[int]]):
        nonlocal best, leaves
        cells = _refine(cells, adj)
        target = next((i for i, c in enumerate(cells) if len(c) > 1), None)
        if target is None:
            leaves += 1
            if leaves > _SEARCH_LEAF_CAP:
                raise CapacityError("canonical-labeling search too large",
                                    bound=_SEARCH_LEAF_CAP)
            order = [c[0] for c in cells]
            cand = _encode_ordered(order, adj, colorings)
            if best is None or cand < best:
                best = cand
            return
        cell = cells[target]
        for w in sorted(cell):
            rest = [v for v in cell if v != w]
            descend(cells[:target] + [[w], rest] + cells[target + 1:])

    descend(cells)
    assert best is not None
    return (b"G" + _varint(len(adj)) + bytes([len(colorings)]) + best)


def encode_rooted(adj: Mapping[int, Sequence[int]], root,
                  colorings: Sequence[Mapping[int, int]] = (),
                  max_nontree_size: int = 24) -> LocalCode:
    """Canonical code of a rooted connected graph with attached colorings.

    Trees get the AHU path; anything with a cycle goes through the
    canonical-labeling search, which refuses graphs larger than
    ``max_nontree_size``.
    """
    n = len(adj)
    n_edges = sum(len(nbrs) for nbrs in adj.values()) // 2
    if n_edges == n - 1:
        return LocalCode(tree_code(adj, root, colorings), True)
    if n > max_nontree_size:
        raise CapacityError("ball too large for non-tree canonicalization",
                            bound=max_nontree_size)
    return LocalCode(_canonical_graph_code(adj, root, colorings), False)
