"""Constructors for structured states: graph/cluster, coset, stabilizer
towers, the W-state circuit and Dicke vectors.

Each constructor returns an Engine whose root is the finished state, so the
caller gets the node store, statistics and measurement machinery along with
the edge.  Graph and coset states are built directly as towers (one node per
level) with the defining labels on the high edges; "qmdd" variants run the
equivalent gate circuit instead, since identity-group labels cannot carry
the Pauli strings the direct towers use.

Vertex v of a graph maps to qubit level n - v, so vertex 0 is the top qubit
and bit strings read left to right match the vertex order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .diagram import Edge, scale_edge
from .engine import Engine
from .pauli import PauliLim, identity, mul, scale, zero


class StateError(Exception):
    pass


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 1:
            raise StateError("graph needs at least one vertex")
        norm = set()
        for a, b in self.edges:
            if a == b:
                raise StateError(f"self-loop at vertex {a}")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise StateError(f"edge ({a},{b}) out of range")
            norm.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(norm))


@dataclass(frozen=True)
class Coset:
    """Affine subspace of GF(2)^n: span(basis) + offset, strings read with
    the top qubit leftmost."""

    n: int
    basis: tuple = ()
    offset: str = ""

    def __post_init__(self):
        object.__setattr__(self, "basis", tuple(self.basis))
        off = self.offset or "0" * self.n
        for s in (*self.basis, off):
            if len(s) != self.n or set(s) - {"0", "1"}:
                raise StateError(f"bad {self.n}-bit string {s!r}")
        object.__setattr__(self, "offset", off)


def graph_state(g: Graph, mode: str = "limdd") -> Engine:
    """Engine holding (1/sqrt(2^n)) sum_x (-1)^{#edges inside x} |x>."""
    eng = Engine(g.n, mode=mode)
    if mode == "qmdd":
        for k in range(1, g.n + 1):
            eng.run_gate("h", k)
        for a, b in sorted(g.edges):
            eng.run_gate("cz", g.n - a, g.n - b)
        return eng
    store = eng.store
    er = Edge(identity(0), store.leaf)
    for level in range(1, g.n + 1):
        v = g.n - level   # vertex landing on this level
        zmask = 0
        for a, b in g.edges:
            other = b if a == v else a if b == v else None
            if other is not None and other > v:
                zmask |= 1 << (g.n - other - 1)
        lim = PauliLim(level - 1, 0, zmask, 1.0)
        er = store.make_edge(er, Edge(mul(lim, er.label), er.target))
    eng.root = scale_edge(2 ** (-g.n / 2), er)
    _note_peak(eng)
    return eng


def cluster_state(rows: int, cols: int, mode: str = "limdd") -> Engine:
    """Graph state of the rows x cols grid, vertices numbered row-major."""
    if rows < 1 or cols < 1:
        raise StateError("grid dimensions must be positive")
    edges = set()
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.add((v, v + 1))
            if r + 1 < rows:
                edges.add((v, v + cols))
    return graph_state(Graph(rows * cols, frozenset(edges)), mode)


def coset_state(c: Coset) -> Engine:
    """Uniform superposition over span(basis) + offset as an X-labelled tower."""
    eng = Engine(c.n)
    store = eng.store
    pivots: dict[int, int] = {}
    for s in c.basis:
        row = int(s, 2)
        for b in sorted(pivots, reverse=True):
            if (row >> b) & 1:
                row ^= pivots[b]
        if row == 0:
            raise StateError(f"basis string {s!r} is dependent on the others")
        pivots[row.bit_length() - 1] = row
    for b, row in list(pivots.items()):
        for b2 in pivots:
            if b2 != b and (pivots[b2] >> b) & 1:
                pivots[b2] ^= row
    er = Edge(identity(0), store.leaf)
    for level in range(1, c.n + 1):
        row = pivots.get(level - 1)
        if row is None:
            hi = Edge(zero(level - 1), er.target)
        else:
            low_bits = row & ((1 << (level - 1)) - 1)
            hi = Edge(mul(PauliLim(level - 1, low_bits, 0, 1.0), er.label), er.target)
        er = store.make_edge(er, hi)
    lift = mul(PauliLim(c.n, int(c.offset, 2), 0, 1.0), er.label)
    eng.root = Edge(scale(2 ** (-len(pivots) / 2), lift), er.target)
    _note_peak(eng)
    return eng


def stabilizer_state(n: int, gates, mode: str = "limdd") -> Engine:
    """Run an h/s/cx gate list on |0...0>."""
    eng = Engine(n, mode=mode)
    for gate in gates:
        if gate[0] not in ("h", "s", "cx"):
            raise StateError(f"non-Clifford gate {gate[0]!r}")
        eng.run_gate(*gate)
    return eng


def w_state_circuit(n: int) -> list:
    """Gate list preparing W_n from |0...0>, n a power of two.

    The top log n qubits (register A) go into uniform superposition; each
    non-one-hot pattern of A flips one low qubit (register B) through a
    multi-controlled X; finally each B qubit uncomputes the 1-bits of its
    pattern.  Entries are ("h", q), ("mcx", ((q, want), ...), t), ("cx", c, t).
    """
    m = n.bit_length() - 1
    if n < 2 or (1 << m) != n:
        raise StateError("W circuit is defined for powers of two, n >= 2")
    a_qubits = [n - i for i in range(m)]               # top down
    b_qubits = list(range(n - m, 0, -1))
    patterns = [p for p in range(1 << m) if p.bit_count() != 1]
    gates: list = [("h", q) for q in a_qubits]
    for t, p in zip(b_qubits, patterns):
        controls = tuple(
            (a_qubits[i], (p >> (m - 1 - i)) & 1) for i in range(m)
        )
        gates.append(("mcx", controls, t))
    for t, p in zip(b_qubits, patterns):
        for i in range(m):
            if (p >> (m - 1 - i)) & 1:
                gates.append(("cx", t, a_qubits[i]))
    return gates


def w_state_engine(n: int) -> Engine:
    eng = Engine(n)
    for gate in w_state_circuit(n):
        if gate[0] == "mcx":
            eng.run_mcx(gate[1], gate[2])
        else:
            eng.run_gate(*gate)
    return eng


def w_state_as_circuit(n: int):
    """The same gate list as a user-indexed Circuit (qubit 0 on top)."""
    from .circuit import Circuit

    ops = []
    for gate in w_state_circuit(n):
        if gate[0] == "mcx":
            _, controls, t = gate
            ops.append(("mcx", (n - t, *((n - q, want) for q, want in controls))))
        else:
            ops.append((gate[0], tuple(n - q for q in gate[1:])))
    return Circuit(n, tuple(ops))


def dicke_dense(n: int, w: int) -> np.ndarray:
    """Normalized equal superposition of all weight-w basis states."""
    if not 1 <= n <= 14:
        raise StateError("dense Dicke vectors limited to 1..14 qubits")
    if not 0 <= w <= n:
        raise StateError(f"weight {w} out of range 0..{n}")
    vec = np.zeros(1 << n, dtype=complex)
    amp = 1.0 / math.sqrt(math.comb(n, w))
    for idx in range(1 << n):
        if idx.bit_count() == w:
            vec[idx] = amp
    return vec


def _note_peak(eng: Engine) -> None:
    if eng.store.node_count() > eng.stats.peak_nodes:
        eng.stats.peak_nodes = eng.store.node_count()
