"""Reduced decision diagrams with Pauli-operator edge labels.

A node at level m has a low and a high edge to level m-1; an edge carries a
label that is either a PauliLim on m-1 qubits or the zero operator.  The
represented state is |v> = |0>|low> + |1>(B|high>) and an edge <A, v> means
A|v>.  The leaf (level 0) represents the scalar 1.

Reduction invariants maintained by make_edge:
  * merge: one node per (low target, high label, high target),
  * zero edge: a zero high label forces high target == low target, and low
    labels are never zero,
  * low precedence: low target precedes high target in insertion order,
  * low factoring: low labels are the identity,
  * high determinism: the high label is the canonical representative picked
    by get_labels.

The all-zero vector has no node; it only ever appears as a zero-labelled
edge.  A store with ``group="identity"`` restricts labels to scalars, which
degrades the structure to a plain scalar-normalized diagram (qmdd mode).
There the X/Z corrections behind the swap rule and the high-label choice are
unavailable, so zero low edges are kept as real structure (with the high
label normalized to 1), children are not reordered, and the high label is
stored exactly; stabilizer sets are trivial throughout.
"""

from __future__ import annotations

import math
from typing import Iterable, Optional

import numpy as np

from .pauli import (
    EPS_EQ,
    GeneratorSet,
    Lim,
    PauliLim,
    ZeroLim,
    format_lim,
    group_product,
    identity,
    inverse,
    is_zero,
    lex_cmp,
    mul,
    neg,
    pauli_conjugate,
    rref,
    scale,
    single,
    string_kernel,
    strip_top,
    tensor_top,
    top_factor,
    zero,
)

_PHASES = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)
_TWO_PI = 2.0 * math.pi
_THETA_CELLS = round(_TWO_PI * 1e9) + 1


class DiagramError(Exception):
    pass


class Node:
    __slots__ = ("index", "low", "high", "nid")

    def __init__(self, index: int, low: Optional["Edge"], high: Optional["Edge"], nid: int):
        self.index = index
        self.low = low
        self.high = high
        self.nid = nid

    def __repr__(self) -> str:
        return f"Node(level={self.index}, id={self.nid})"


class Edge:
    __slots__ = ("label", "target")

    def __init__(self, label: Lim, target: Node):
        self.label = label
        self.target = target

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Edge)
            and self.target is other.target
            and self.label == other.label
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"<{format_lim(self.label)}, {self.target!r}>"


def scale_edge(c: complex, e: Edge) -> Edge:
    return Edge(scale(c, e.label), e.target)


def _scalar_cell(c: complex) -> tuple[int, int]:
    t = math.atan2(c.imag, c.real)
    if t < 0:
        t += _TWO_PI
    return round(abs(c) * 1e9), round(t * 1e9)


def _scalar_close(a: complex, b: complex) -> bool:
    return abs(a - b) <= EPS_EQ * max(1.0, abs(a))


class ScalarKeyedTable:
    """Mapping with keys (discrete part, complex scalar).

    The scalar is hashed on a 1e-9 polar grid; lookups probe the neighbouring
    cells (with phase wrap-around) and confirm with an exact comparison, so
    nearly-equal scalars from different float paths land on one entry."""

    __slots__ = ("_d",)

    def __init__(self):
        self._d: dict = {}

    def __len__(self) -> int:
        return sum(len(v) for v in self._d.values())

    def get(self, disc: tuple, scalar: complex):
        rc, tc = _scalar_cell(scalar)
        for dr in (0, -1, 1):
            for dt in (0, -1, 1):
                bucket = self._d.get((disc, rc + dr, (tc + dt) % _THETA_CELLS))
                if bucket:
                    for s, val in bucket:
                        if _scalar_close(s, scalar):
                            return val
        return None

    def put(self, disc: tuple, scalar: complex, val) -> None:
        rc, tc = _scalar_cell(scalar)
        self._d.setdefault((disc, rc, tc), []).append((scalar, val))

    def clear(self) -> None:
        self._d.clear()


def _lim_disc(a: PauliLim) -> tuple:
    return (a.x, a.z)


class DiagramStore:
    """Node storage plus every structural and canonicalization operation.

    ``group`` selects the label group: "pauli" (full labels) or "identity"
    (scalars only).  Nodes are never garbage collected; insertion order is
    the node order used by the low-precedence rule."""

    def __init__(self, group: str = "pauli"):
        if group not in ("pauli", "identity"):
            raise ValueError(f"unknown label group {group!r}")
        self.group = group
        self.leaf = Node(0, None, None, 0)
        self.nodes: list[Node] = [self.leaf]
        self._table = ScalarKeyedTable()          # (v0, v1, x, z) + scalar -> Node
        self._zero_high: dict[int, Node] = {}     # v0 nid -> Node
        self._zero_low: dict[int, Node] = {}      # v1 nid -> Node (identity mode)
        self._stab: dict[int, GeneratorSet] = {0: GeneratorSet(0, [])}
        self._empty: dict[int, GeneratorSet] = {0: self._stab[0]}
        self._union_rows_memo: dict = {}
        self._opposite_memo: dict = {}
        self._intersect_memo: dict = {}

    # -- bookkeeping --------------------------------------------------------

    def node_count(self) -> int:
        """Nodes above the leaf."""
        return len(self.nodes) - 1

    def level_widths(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for v in self.nodes[1:]:
            out[v.index] = out.get(v.index, 0) + 1
        return out

    def reachable_count(self, e: Edge) -> int:
        """Nodes above the leaf reachable from ``e``."""
        seen: set[int] = set()
        stack = [e.target]
        while stack:
            v = stack.pop()
            if v.nid in seen:
                continue
            seen.add(v.nid)
            if v.index > 0:
                stack.append(v.low.target)
                stack.append(v.high.target)
        return len(seen - {0})

    def empty_set(self, n: int) -> GeneratorSet:
        g = self._empty.get(n)
        if g is None:
            g = GeneratorSet(n, [])
            self._empty[n] = g
        return g

    def _new_node(self, index: int, low: Edge, high: Edge) -> Node:
        v = Node(index, low, high, len(self.nodes))
        self.nodes.append(v)
        return v

    # -- traversal ----------------------------------------------------------

    def follow(self, e: Edge, b: int) -> Edge:
        """The b-branch of the state A|v>, label flips folded in."""
        v = e.target
        if v.index == 0:
            raise DiagramError("cannot follow below the leaf")
        a = e.label
        if is_zero(a):
            return Edge(zero(v.index - 1), v.low.target)
        x, zb = top_factor(a)
        rest = strip_top(a)
        z1 = _PHASES[(x & zb) % 4]
        z2 = -z1 if zb else z1
        branch = v.low if x == b else v.high
        diag = z1 if x == b else z2
        if is_zero(branch.label):
            return Edge(zero(v.index - 1), branch.target)
        return Edge(mul(scale(diag, rest), branch.label), branch.target)

    def amplitude(self, e: Edge, bits) -> complex:
        """Amplitude of the basis state given as bits with bits[0] the top qubit."""
        seq = [int(b) for b in bits]
        if len(seq) != e.target.index:
            raise DiagramError(
                f"expected {e.target.index} bits, got {len(seq)}"
            )
        if any(b not in (0, 1) for b in seq):
            raise DiagramError("bits must be 0 or 1")
        for b in seq:
            e = self.follow(e, b)
        if is_zero(e.label):
            return 0j
        return e.label.scalar

    def to_dense(self, e: Edge) -> np.ndarray:
        """Dense statevector (index bit k-1 = qubit k, top qubit most significant)."""
        memo: dict[int, np.ndarray] = {}

        def node_vec(v: Node) -> np.ndarray:
            if v.index == 0:
                return np.ones(1, dtype=complex)
            got = memo.get(v.nid)
            if got is None:
                got = np.concatenate(
                    [edge_vec(v.low, v.index - 1), edge_vec(v.high, v.index - 1)]
                )
                memo[v.nid] = got
            return got

        def edge_vec(edge: Edge, m: int) -> np.ndarray:
            if is_zero(edge.label):
                return np.zeros(1 << m, dtype=complex)
            return lim_apply_dense(edge.label, node_vec(edge.target))

        return edge_vec(e, e.target.index)

    def is_pauli_equivalent(self, e: Edge, f: Edge) -> bool:
        if is_zero(e.label) or is_zero(f.label):
            return is_zero(e.label) and is_zero(f.label)
        return e.target is f.target

    def get_isomorphism(self, e: Edge, f: Edge) -> Optional[PauliLim]:
        """A LIM C with C|e> = |f>, or None; exact thanks to canonicity."""
        if is_zero(e.label) and is_zero(f.label):
            raise DiagramError("no isomorphism between zero vectors")
        if is_zero(e.label) or is_zero(f.label):
            return None
        if e.target is not f.target:
            return None
        return mul(f.label, inverse(e.label))

    # -- stabilizer machinery ----------------------------------------------

    def _union_rows(self, g0: GeneratorSet, g1: GeneratorSet):
        """Reduced row basis of <g0 union g1> with factor tracking: rows are
        (string key, pivot bit, p0, p1) with p0 in <g0>, p1 in <g1> and
        string(p0.p1) = key.  Signs of p0, p1 are exact; the row strings
        follow plain GF(2) elimination."""
        memo_key = (g0.content_key(), g1.content_key())
        rows = self._union_rows_memo.get(memo_key)
        if rows is not None:
            return rows
        n = g0.n
        work = [(g.string_key(), g, identity(n)) for g in g0.gens]
        work += [(g.string_key(), identity(n), g) for g in g1.gens]
        done: list[tuple[int, int, PauliLim, PauliLim]] = []
        for bit in range(2 * n - 1, -1, -1):
            pivot = None
            for i, row in enumerate(work):
                if (row[0] >> bit) & 1:
                    pivot = work.pop(i)
                    break
            if pivot is None:
                continue
            kp, a0, a1 = pivot
            work = [
                (k ^ kp, mul(p0, a0), mul(p1, a1)) if (k >> bit) & 1 else (k, p0, p1)
                for (k, p0, p1) in work
            ]
            done = [
                (k ^ kp, piv, mul(p0, a0), mul(p1, a1))
                if (k >> bit) & 1
                else (k, piv, p0, p1)
                for (k, piv, p0, p1) in done
            ]
            done.append((kp, bit, a0, a1))
        rows = tuple(done)
        self._union_rows_memo[memo_key] = rows
        return rows

    def _find_opposite(self, g0: GeneratorSet, g1: GeneratorSet) -> Optional[PauliLim]:
        key = (g0.content_key(), g1.content_key())
        if key in self._opposite_memo:
            return self._opposite_memo[key]
        from .pauli import find_opposite

        res = find_opposite(g0, g1)
        self._opposite_memo[key] = res
        return res

    def arg_lex_min(
        self, g0: GeneratorSet, g1: GeneratorSet, a: PauliLim
    ) -> tuple[PauliLim, PauliLim, PauliLim]:
        """(w0, w1, value): w0 in <g0>, w1 in <g1>, value = a.w0.w1 is the
        lexicographic minimum of the double coset, phase included."""
        acc0 = identity(a.n)
        acc1 = identity(a.n)
        key = a.string_key()
        for k, piv, p0, p1 in self._union_rows(g0, g1):
            if (key >> piv) & 1:
                key ^= k
                acc0 = mul(acc0, p0)
                acc1 = mul(acc1, p1)
        cand = mul(mul(a, acc0), acc1)
        opp = self._find_opposite(g0, g1)
        if opp is not None:
            h0 = mul(acc0, opp)
            h1 = mul(neg(opp), acc1)
            alt = mul(mul(a, h0), h1)
            if lex_cmp(alt, cand) < 0:
                return h0, h1, alt
        return acc0, acc1, cand

    def lex_min(self, g0: GeneratorSet, g1: GeneratorSet, a: PauliLim) -> PauliLim:
        return self.arg_lex_min(g0, g1, a)[2]

    def root_label(self, e: Edge) -> PauliLim:
        """Canonical representative of label modulo the target's stabilizers."""
        if is_zero(e.label):
            raise DiagramError("zero edges have no root label")
        v = e.target
        return self.lex_min(self.get_stabilizer_gen_set(v), self.empty_set(v.index), e.label)

    def intersect_stabilizer_groups(
        self, g0: GeneratorSet, g1: GeneratorSet
    ) -> GeneratorSet:
        """<g0> meet <g1>: string-kernel pairs whose exact products agree.

        Sign quotients are multiplicative over the kernel, so one basis
        vector with a sign clash repairs all the others by XOR."""
        key = (g0.content_key(), g1.content_key())
        got = self._intersect_memo.get(key)
        if got is not None:
            return got
        n = g0.n
        pairs = string_kernel(g0, g1)
        agree = []
        for m0, m1 in pairs:
            p0 = group_product(g0.gens, m0, n)
            p1 = group_product(g1.gens, m1, n)
            agree.append(p0.scalar.real * p1.scalar.real > 0)
        flip = next((i for i, ok in enumerate(agree) if not ok), None)
        sels = []
        for i, (m0, _) in enumerate(pairs):
            if agree[i]:
                sels.append(m0)
            elif i != flip:
                sels.append(m0 ^ pairs[flip][0])
        res = rref(GeneratorSet(n, [group_product(g0.gens, m, n) for m in sels]))
        self._intersect_memo[key] = res
        return res

    def intersect_isomorphism_sets(
        self, pi0: PauliLim, g0: GeneratorSet, pi1: PauliLim, g1: GeneratorSet
    ) -> Optional[tuple[PauliLim, GeneratorSet]]:
        """Representative and group of pi0<g0> intersect pi1<g1>, or None."""
        a = mul(inverse(pi1), pi0)
        w0, _, val = self.arg_lex_min(g0, g1, a)
        if val.is_identity_string() and abs(val.scalar - 1.0) <= EPS_EQ:
            return mul(pi0, w0), self.intersect_stabilizer_groups(g0, g1)
        return None

    def get_stabilizer_gen_set(self, v: Node) -> GeneratorSet:
        """Generators of the Pauli stabilizer subgroup of |v>, cached per node."""
        got = self._stab.get(v.nid)
        if got is not None:
            return got
        m = v.index
        if self.group == "identity":
            res = self.empty_set(m)
            self._stab[v.nid] = res
            return res
        if m == 1:
            res = self._stab_level_one(v)
        else:
            res = self._stab_recursive(v)
        self._stab[v.nid] = res
        return res

    def _stab_level_one(self, v: Node) -> GeneratorSet:
        # |v> = (1, beta); scan the six signed single-qubit strings
        beta = None if is_zero(v.high.label) else v.high.label.scalar
        gens = []
        if beta is None:
            gens.append(single(1, 1, "Z"))
        else:
            if abs(beta - 1.0) <= EPS_EQ:
                gens.append(single(1, 1, "X"))
            elif abs(beta + 1.0) <= EPS_EQ:
                gens.append(single(1, 1, "X", -1.0))
            elif abs(beta - 1j) <= EPS_EQ:
                gens.append(single(1, 1, "Y"))
            elif abs(beta + 1j) <= EPS_EQ:
                gens.append(single(1, 1, "Y", -1.0))
        return rref(GeneratorSet(1, gens))

    def _stab_recursive(self, v: Node) -> GeneratorSet:
        m = v.index
        v0 = v.low.target
        g0 = self.get_stabilizer_gen_set(v0)
        gens: list[PauliLim] = []
        if is_zero(v.high.label):
            gens = [tensor_top("I", g) for g in g0.gens]
            gens.append(single(m, m, "Z"))
            return rref(GeneratorSet(m, gens))
        a1 = v.high.label
        v1 = v.high.target
        g1v = self.get_stabilizer_gen_set(v1)
        g1 = rref(
            GeneratorSet(m - 1, [pauli_conjugate(a1, g) for g in g1v.gens])
        )
        ident = identity(m - 1)
        # diagonal stabilizers: I (x) (G0 meet G1) and Z (x) (iso of e1 and -e1)
        res = self.intersect_isomorphism_sets(ident, g0, ident, g1)
        if res is not None:
            gens.extend(tensor_top("I", g) for g in res[1].gens)
        iso = self.get_isomorphism(v.high, Edge(neg(a1), v1))
        if iso is not None:
            res = self.intersect_isomorphism_sets(ident, g0, iso, g1)
            if res is not None:
                gens.append(tensor_top("Z", res[0]))
        # antidiagonal stabilizers need the children to be isomorphic
        p0 = self.get_isomorphism(v.low, v.high)
        p1 = self.get_isomorphism(v.high, v.low)
        if p0 is not None and p1 is not None:
            res = self.intersect_isomorphism_sets(p0, g0, p1, g1)
            if res is not None:
                gens.append(tensor_top("X", res[0]))
        em = Edge(scale(-1j, a1), v1)
        p0 = self.get_isomorphism(v.low, em)
        p1 = self.get_isomorphism(em, v.low)
        if p0 is not None and p1 is not None:
            res = self.intersect_isomorphism_sets(p0, g0, p1, g1)
            if res is not None:
                gens.append(tensor_top("Y", res[0]))
        return rref(GeneratorSet(m, gens))

    # -- canonicalizing constructor -----------------------------------------

    def get_labels(
        self, a_hat: PauliLim, v0: Node, v1: Node
    ) -> tuple[PauliLim, PauliLim]:
        """Canonical high label for the isomorphism class of node(I v0, a_hat v1)
        and the root correction so that <B_root, node(I v0, B_high v1)> equals
        |0>|v0> + |1> a_hat |v1>."""
        if self.group == "identity":
            # the only isomorphisms available are scalars, and low factoring
            # already spent the scalar freedom: no normalization choice left
            if not a_hat.is_identity_string():
                raise DiagramError("identity-group store cannot hold Pauli labels")
            return a_hat, identity(a_hat.n + 1)
        g0 = self.get_stabilizer_gen_set(v0)
        g1 = self.get_stabilizer_gen_set(v1)
        lam = a_hat.scalar
        p_unit = PauliLim(a_hat.n, a_hat.x, a_hat.z, 1.0)
        w0, w1, _ = self.arg_lex_min(g0, g1, a_hat)
        m = mul(mul(w0, p_unit), w1)
        best = None
        choice = (0, 0)
        xs_options = ((0, 0), (0, 1), (1, 0), (1, 1)) if v0 is v1 else ((0, 0), (0, 1))
        for x, s in xs_options:
            lam_x = lam if x == 0 else 1.0 / lam
            cand = scale(-lam_x if s else lam_x, m)
            if best is None or lex_cmp(cand, best) < 0:
                best = cand
                choice = (x, s)
        x, s = choice
        b_root = tensor_top("Z" if s else "I", inverse(w0))
        if x:
            b_root = mul(tensor_top("X", a_hat), b_root)
        return best, b_root

    def make_edge(self, e0: Edge, e1: Edge) -> Edge:
        """The canonical edge for |0>|e0> + |1>|e1>; the single way nodes enter
        the store."""
        a, b = e0.label, e1.label
        v0, v1 = e0.target, e1.target
        if v0.index != v1.index:
            raise DiagramError("children must sit on the same level")
        if is_zero(a) and is_zero(b):
            raise DiagramError("the all-zero vector has no node")
        m = v0.index
        if self.group == "identity":
            if is_zero(a):
                # no X correction available to swap the zero branch away;
                # keep a zero low edge, normalized to a unit high label
                node = self._zero_low.get(v1.nid)
                if node is None:
                    node = self._new_node(
                        m + 1, Edge(zero(m), v1), Edge(identity(m), v1)
                    )
                    self._zero_low[v1.nid] = node
                    self.get_stabilizer_gen_set(node)
                return Edge(tensor_top("I", b), node)
        elif is_zero(a) or (not is_zero(b) and v0.nid > v1.nid):
            res = self.make_edge(e1, e0)
            return Edge(mul(single(m + 1, m + 1, "X"), res.label), res.target)
        if is_zero(b):
            node = self._zero_high.get(v0.nid)
            if node is None:
                node = self._new_node(
                    m + 1, Edge(identity(m), v0), Edge(zero(m), v0)
                )
                self._zero_high[v0.nid] = node
                self.get_stabilizer_gen_set(node)
            return Edge(tensor_top("I", a), node)
        a_hat = mul(inverse(a), b)
        b_high, b_root = self.get_labels(a_hat, v0, v1)
        disc = (v0.nid, v1.nid) + _lim_disc(b_high)
        node = self._table.get(disc, b_high.scalar)
        if node is None:
            node = self._new_node(m + 1, Edge(identity(m), v0), Edge(b_high, v1))
            self._table.put(disc, b_high.scalar, node)
            self.get_stabilizer_gen_set(node)
        return Edge(mul(tensor_top("I", a), b_root), node)

    # -- diagnostics ---------------------------------------------------------

    def audit(self) -> None:
        """Re-walk the store checking every reduction invariant; raises on
        violation.  Meant for debug runs and tests."""
        for v in self.nodes[1:]:
            low, high = v.low, v.high
            if low.target.index != v.index - 1 or high.target.index != v.index - 1:
                raise DiagramError(f"{v!r}: child level mismatch")
            if is_zero(low.label):
                if self.group != "identity":
                    raise DiagramError(f"{v!r}: zero low label")
                if high.target is not low.target or not (
                    high.label.is_identity_string() and high.label.scalar == 1.0
                ):
                    raise DiagramError(f"{v!r}: malformed zero-low node")
                continue
            if not (low.label.is_identity_string() and low.label.scalar == 1.0):
                raise DiagramError(f"{v!r}: low label not identity")
            if is_zero(high.label):
                if high.target is not low.target:
                    raise DiagramError(f"{v!r}: zero high edge with distinct target")
                continue
            if self.group == "pauli" and low.target.nid > high.target.nid:
                raise DiagramError(f"{v!r}: low precedence violated")
            bh, _ = self.get_labels(high.label, low.target, high.target)
            if (bh.x, bh.z) != (high.label.x, high.label.z) or not _scalar_close(
                bh.scalar, high.label.scalar
            ):
                raise DiagramError(
                    f"{v!r}: high label {format_lim(high.label)} is not the "
                    f"canonical {format_lim(bh)}"
                )

    def to_dot(self, e: Edge) -> str:
        """Graphviz text for the DAG under ``e``: one rank per level, dashed
        low edges, solid high edges, labels in debug form."""
        reach: dict[int, Node] = {}
        stack = [e.target]
        while stack:
            v = stack.pop()
            if v.nid in reach:
                continue
            reach[v.nid] = v
            if v.index > 0:
                stack.append(v.low.target)
                stack.append(v.high.target)
        lines = [
            "digraph limdd {",
            "  rankdir=TB;",
            '  root [shape=none, label=""];',
            f'  root -> n{e.target.nid} [label="{format_lim(e.label)}"];',
        ]
        by_level: dict[int, list[Node]] = {}
        for v in reach.values():
            by_level.setdefault(v.index, []).append(v)
        for level in sorted(by_level, reverse=True):
            group = by_level[level]
            names = "; ".join(f"n{v.nid}" for v in group)
            lines.append(f"  {{ rank=same; {names}; }}")
            for v in group:
                shape = "box" if level == 0 else "circle"
                text = "1" if level == 0 else str(level)
                lines.append(f'  n{v.nid} [shape={shape}, label="{text}"];')
                if level == 0:
                    continue
                lines.append(
                    f"  n{v.nid} -> n{v.low.target.nid} "
                    f'[style=dashed, label="{format_lim(v.low.label)}"];'
                )
                lines.append(
                    f"  n{v.nid} -> n{v.high.target.nid} "
                    f'[style=solid, label="{format_lim(v.high.label)}"];'
                )
        lines.append("}")
        return "\n".join(lines)


def lim_apply_dense(a: Lim, vec: np.ndarray) -> np.ndarray:
    """Apply a LIM to a dense vector (oracle route for tests and to_dense)."""
    if isinstance(a, ZeroLim):
        return np.zeros_like(vec)
    if a.x == 0 and a.z == 0:
        return a.scalar * vec
    dim = vec.shape[0]
    idx = np.arange(dim, dtype=np.int64)
    src = idx ^ a.x
    par = src & a.z
    for shift in (32, 16, 8, 4, 2, 1):
        par ^= par >> shift
    signs = 1.0 - 2.0 * (par & 1)
    phase = a.scalar * _PHASES[(a.x & a.z).bit_count() % 4]
    return phase * signs * vec[src]
