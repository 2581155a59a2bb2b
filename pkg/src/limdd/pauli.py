"""Pauli string algebra on check vectors.

A labelled Pauli operator (a "LIM") is lambda * P_n (x) ... (x) P_1 with
P_k in {I, X, Y, Z} and lambda a nonzero complex scalar.  Strings are stored
as two bitmasks: bit k-1 of ``x``/``z`` holds the X/Z component of qubit k,
so qubit n is the most significant bit and the leftmost letter in text form.
The single-qubit factor encoded by bits (x, z) is i^(xz) * X^x * Z^z, which
makes (1, 1) exactly Y, every string Hermitian, and every string square to
+I, so products need only integer phase tracking.

The zero operator gets its own type; it annihilates everything it multiplies
and is never a member of a generator set.

Generator sets hold independent commuting strings with scalars +-1 and are
the working representation for stabilizer subgroups.  Clifford circuits are
flat tuples of ("h", q), ("s", q), ("cx", c, t) with 1-based qubits.
"""

from __future__ import annotations

import cmath
import itertools
import math
from typing import Iterable, Iterator, Optional, Sequence, Union

EPS_EQ = 1e-12    # equality of complex scalars
EPS_ORD = 1e-9    # ordering comparisons on (magnitude, phase)

_PHASES = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}


class PauliError(Exception):
    pass


class NotAStabilizerGroupError(PauliError):
    """Raised when a generator set is dependent, non-commuting, or yields -I."""


def _bits(v: int) -> Iterator[int]:
    while v:
        low = v & -v
        yield low.bit_length() - 1
        v ^= low


class PauliLim:
    """A nonzero scalar times a Pauli string on ``n`` qubits."""

    __slots__ = ("n", "x", "z", "scalar")

    def __init__(self, n: int, x: int, z: int, scalar: complex = 1.0):
        if scalar == 0:
            raise PauliError("PauliLim scalar must be nonzero; use ZeroLim")
        self.n = n
        self.x = x
        self.z = z
        self.scalar = complex(scalar)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, PauliLim)
            and self.n == other.n
            and self.x == other.x
            and self.z == other.z
            and self.scalar == other.scalar
        )

    __hash__ = None  # keys are built explicitly via quantized helpers

    def __repr__(self) -> str:
        return format_lim(self)

    def string_key(self) -> int:
        """The 2n-bit check string (x_n..x_1 z_n..z_1) as one integer."""
        return (self.x << self.n) | self.z

    def is_identity_string(self) -> bool:
        return self.x == 0 and self.z == 0


class ZeroLim:
    """The zero operator on ``n`` qubits (the label of an all-zero branch)."""

    __slots__ = ("n",)

    def __init__(self, n: int):
        self.n = n

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ZeroLim) and self.n == other.n

    __hash__ = None

    def __repr__(self) -> str:
        return "0"


Lim = Union[PauliLim, ZeroLim]


def identity(n: int) -> PauliLim:
    return PauliLim(n, 0, 0, 1.0)


def zero(n: int) -> ZeroLim:
    return ZeroLim(n)


def single(n: int, qubit: int, letter: str, scalar: complex = 1.0) -> PauliLim:
    """The operator ``scalar * letter`` acting on 1-based ``qubit``."""
    if not 1 <= qubit <= n:
        raise PauliError(f"qubit {qubit} out of range 1..{n}")
    xb, zb = _LETTER_BITS[letter.upper()]
    b = qubit - 1
    return PauliLim(n, xb << b, zb << b, scalar)


def is_zero(a: Lim) -> bool:
    return isinstance(a, ZeroLim)


def mul(a: Lim, b: Lim) -> Lim:
    """Exact operator product a . b (phases tracked as integer powers of i)."""
    if isinstance(a, ZeroLim) or isinstance(b, ZeroLim):
        return ZeroLim(a.n)
    if a.n != b.n:
        raise PauliError(f"qubit count mismatch {a.n} != {b.n}")
    x3 = a.x ^ b.x
    z3 = a.z ^ b.z
    phi = (
        (a.x & a.z).bit_count()
        + (b.x & b.z).bit_count()
        + 2 * (a.z & b.x).bit_count()
        - (x3 & z3).bit_count()
    ) % 4
    return PauliLim(a.n, x3, z3, a.scalar * b.scalar * _PHASES[phi])


def inverse(a: PauliLim) -> PauliLim:
    """Inverse of a nonzero LIM; strings are involutions so only the scalar flips."""
    if isinstance(a, ZeroLim):
        raise PauliError("zero operator has no inverse")
    return PauliLim(a.n, a.x, a.z, 1.0 / a.scalar)


def scale(c: complex, a: Lim) -> Lim:
    """c * a; scaling by 0 yields the zero operator."""
    if isinstance(a, ZeroLim):
        return a
    if c == 0:
        return ZeroLim(a.n)
    return PauliLim(a.n, a.x, a.z, c * a.scalar)


def neg(a: Lim) -> Lim:
    return scale(-1.0, a)


def pauli_conjugate(a: PauliLim, g: PauliLim) -> PauliLim:
    """a . g . a^-1 for Pauli ``a``: g up to the symplectic sign; a's scalar cancels."""
    sign = -1.0 if ((a.x & g.z).bit_count() + (a.z & g.x).bit_count()) & 1 else 1.0
    return PauliLim(g.n, g.x, g.z, sign * g.scalar)


def commutes(a: PauliLim, b: PauliLim) -> bool:
    return ((a.x & b.z).bit_count() + (a.z & b.x).bit_count()) % 2 == 0


def tensor_top(letter: str, a: Lim, extra_scalar: complex = 1.0) -> Lim:
    """(letter (x) a) on n+1 qubits, optionally scaled; the new qubit is the top."""
    if isinstance(a, ZeroLim):
        return ZeroLim(a.n + 1)
    xb, zb = _LETTER_BITS[letter.upper()]
    out = PauliLim(a.n + 1, a.x | (xb << a.n), a.z | (zb << a.n), a.scalar)
    return scale(extra_scalar, out) if extra_scalar != 1.0 else out


def top_factor(a: PauliLim) -> tuple[int, int]:
    """(x, z) bits of the top-qubit factor of ``a``."""
    b = a.n - 1
    return (a.x >> b) & 1, (a.z >> b) & 1


def strip_top(a: PauliLim) -> PauliLim:
    """Drop the top-qubit factor, keeping the scalar on the remaining string."""
    mask = (1 << (a.n - 1)) - 1
    return PauliLim(a.n - 1, a.x & mask, a.z & mask, a.scalar)


# ---------------------------------------------------------------------------
# ordering and check vectors


def lex_cmp(a: PauliLim, b: PauliLim) -> int:
    """Total order: X block, then Z block (qubit n most significant), then
    scalar magnitude, then phase in [0, 2*pi); float ties within EPS_ORD are
    equal.  Returns -1, 0, or 1."""
    if a.n != b.n:
        raise PauliError("cannot order operators on different qubit counts")
    if a.x != b.x:
        return -1 if a.x < b.x else 1
    if a.z != b.z:
        return -1 if a.z < b.z else 1
    ra, rb = abs(a.scalar), abs(b.scalar)
    if abs(ra - rb) > EPS_ORD:
        return -1 if ra < rb else 1
    ta, tb = _phase_angle(a.scalar), _phase_angle(b.scalar)
    if abs(ta - tb) > EPS_ORD:
        return -1 if ta < tb else 1
    return 0


def _phase_angle(c: complex) -> float:
    t = cmath.phase(c)
    if t < 0:
        t += 2.0 * math.pi
    if t >= 2.0 * math.pi:
        t = 0.0
    return t


def to_check_vector(a: PauliLim) -> tuple[tuple[int, ...], tuple[int, ...], float, float]:
    """((x_n..x_1), (z_n..z_1), r, theta) with r > 0 and theta in [0, 2*pi)."""
    xs = tuple((a.x >> k) & 1 for k in range(a.n - 1, -1, -1))
    zs = tuple((a.z >> k) & 1 for k in range(a.n - 1, -1, -1))
    return xs, zs, abs(a.scalar), _phase_angle(a.scalar)


def from_check_vector(
    xs: Iterable[int], zs: Iterable[int], r: float = 1.0, theta: float = 0.0
) -> PauliLim:
    xs = tuple(xs)
    zs = tuple(zs)
    if len(xs) != len(zs):
        raise PauliError("x and z blocks must have equal length")
    x = z = 0
    for bit in xs:
        x = (x << 1) | (bit & 1)
    for bit in zs:
        z = (z << 1) | (bit & 1)
    return PauliLim(len(xs), x, z, r * cmath.exp(1j * theta))


def check_vector_str(a: PauliLim) -> str:
    xs, zs, r, theta = to_check_vector(a)
    return "%s|%s|%g,%g" % (
        "".join(map(str, xs)),
        "".join(map(str, zs)),
        r,
        theta,
    )


def _scalar_str(c: complex) -> str:
    if abs(c.imag) <= EPS_EQ:
        return "%g" % c.real
    if abs(c.real) <= EPS_EQ:
        return "%gi" % c.imag if c.imag != 1.0 else "i"
    return "(%g%+gi)" % (c.real, c.imag)


def format_lim(a: Lim) -> str:
    """Debug form ``[-]?[i]? <scalar>? * P_n..P_1``, e.g. ``-i*XZY``."""
    if isinstance(a, ZeroLim):
        return "0"
    letters = "".join(
        _BITS_LETTER[((a.x >> k) & 1, (a.z >> k) & 1)] for k in range(a.n - 1, -1, -1)
    )
    c = a.scalar
    if a.n == 0:
        return _scalar_str(c)
    if c == 1:
        return letters
    if c == -1:
        return "-" + letters
    if c == 1j:
        return "i*" + letters
    if c == -1j:
        return "-i*" + letters
    return _scalar_str(c) + "*" + letters


def from_text(text: str, n: Optional[int] = None) -> PauliLim:
    """Parse the debug form; letters are qubit n down to qubit 1."""
    text = text.strip()
    scalar: complex = 1.0
    if "*" in text:
        head, text = text.split("*", 1)
        head = head.strip()
        if head == "-":
            scalar = -1.0
        elif head == "i":
            scalar = 1j
        elif head == "-i":
            scalar = -1j
        else:
            scalar = complex(head.replace("i", "j"))
    elif text.startswith("-i"):
        scalar, text = -1j, text[2:]
    elif text.startswith("i"):
        scalar, text = 1j, text[1:]
    elif text.startswith("-"):
        scalar, text = -1.0, text[1:]
    letters = text.strip().upper()
    if n is not None and len(letters) != n:
        raise PauliError(f"expected {n} letters, got {len(letters)}")
    x = z = 0
    for ch in letters:
        if ch not in _LETTER_BITS:
            raise PauliError(f"bad Pauli letter {ch!r}")
        xb, zb = _LETTER_BITS[ch]
        x = (x << 1) | xb
        z = (z << 1) | zb
    return PauliLim(len(letters), x, z, scalar)


# ---------------------------------------------------------------------------
# generator sets


_uid_counter = itertools.count(1)


class GeneratorSet:
    """Independent commuting +-1 Pauli strings generating a stabilizer subgroup.

    Instances are treated as immutable.  ``uid`` supports identity-keyed
    memo tables; ``content_key`` supports content-keyed ones (it sees
    generator order, which rref canonicalizes)."""

    __slots__ = ("n", "gens", "uid", "_ckey")

    def __init__(self, n: int, gens: Iterable[PauliLim] = ()):
        self.n = n
        snapped = []
        for g in gens:
            if g.n != n:
                raise PauliError("generator qubit count mismatch")
            snapped.append(_snap_sign(g))
        self.gens = tuple(snapped)
        self.uid = next(_uid_counter)
        self._ckey = None

    def content_key(self) -> tuple:
        if self._ckey is None:
            self._ckey = (self.n,) + tuple(
                (g.x, g.z, 1 if g.scalar.real > 0 else -1) for g in self.gens
            )
        return self._ckey

    def __len__(self) -> int:
        return len(self.gens)

    def __iter__(self) -> Iterator[PauliLim]:
        return iter(self.gens)

    def __repr__(self) -> str:
        return "<%s>" % ", ".join(format_lim(g) for g in self.gens)

def _snap_sign(g: PauliLim) -> PauliLim:
    """Force a generator scalar to exactly +-1; reject anything else."""
    s = g.scalar
    if abs(s - 1.0) <= 1e-9:
        return PauliLim(g.n, g.x, g.z, 1.0) if s != 1.0 else g
    if abs(s + 1.0) <= 1e-9:
        return PauliLim(g.n, g.x, g.z, -1.0) if s != -1.0 else g
    raise NotAStabilizerGroupError(f"generator scalar {s} is not +-1")


def rref(g: GeneratorSet) -> GeneratorSet:
    """Gauss-Jordan reduce over check strings with exact phase tracking.

    Rows come out with strictly decreasing pivot positions and each pivot
    eliminated from every other row.  An identity-string row with scalar -1
    means -I is generated: error.  +I rows (dependent input) are dropped."""
    rows: list[PauliLim] = [_snap_sign(r) for r in g.gens]
    pivot_rows: list[PauliLim] = []
    width = 2 * g.n
    for bit in range(width - 1, -1, -1):
        pick = None
        for i, r in enumerate(rows):
            if (r.string_key() >> bit) & 1:
                pick = i
                break
        if pick is None:
            continue
        piv = rows.pop(pick)
        rows = [
            _snap_sign(mul(r, piv)) if (r.string_key() >> bit) & 1 else r for r in rows
        ]
        pivot_rows = [
            _snap_sign(mul(r, piv)) if (r.string_key() >> bit) & 1 else r
            for r in pivot_rows
        ]
        pivot_rows.append(piv)
    for r in rows:  # fully eliminated leftovers
        if r.scalar.real < 0:
            raise NotAStabilizerGroupError("generators produce -I")
    pivot_rows.sort(key=lambda r: -r.string_key())
    return GeneratorSet(g.n, pivot_rows)


def division_remainder(g: GeneratorSet, a: PauliLim) -> tuple[PauliLim, PauliLim]:
    """(remainder, h): h in <g> with exact phase and mul(a, h) == remainder,
    where the remainder string is lexicographically minimal over the coset."""
    red = a
    h = identity(g.n)
    for row in rref(g).gens:
        piv = row.string_key().bit_length() - 1
        if (red.string_key() >> piv) & 1:
            red = mul(red, row)
            h = mul(h, row)
    return red, h


def membership(g: GeneratorSet, a: PauliLim) -> bool:
    """True iff ``a`` is exactly an element of <g> (phase included)."""
    rem, _ = division_remainder(g, a)
    return rem.is_identity_string() and abs(rem.scalar - 1.0) <= EPS_EQ


def membership_mod_phase(g: GeneratorSet, a: PauliLim) -> bool:
    """True iff the string of ``a`` lies in the string span of <g>."""
    rem, _ = division_remainder(g, a)
    return rem.is_identity_string()


# ---------------------------------------------------------------------------
# diagonal-group intersection


def _gf2_echelon(rows: list[int], width: int) -> list[int]:
    out: list[int] = []
    for bit in range(width - 1, -1, -1):
        pick = None
        for i, r in enumerate(rows):
            if (r >> bit) & 1:
                pick = i
                break
        if pick is None:
            continue
        piv = rows.pop(pick)
        rows = [r ^ piv if (r >> bit) & 1 else r for r in rows]
        out = [r ^ piv if (r >> bit) & 1 else r for r in out]
        out.append(piv)
    return out + [r for r in rows if r]


def zassenhaus_intersect(a: GeneratorSet, b: GeneratorSet) -> GeneratorSet:
    """Intersection of two diagonal (Z-only strings, +-1 signs) subgroups.

    Such a group is a GF(2) vector space on (z bits, sign bit); the block
    construction [[u, u], [w, 0]] reduced over the left block leaves right
    halves of left-zero rows as an intersection basis."""
    n = a.n
    for g in itertools.chain(a.gens, b.gens):
        if g.x != 0:
            raise PauliError("zassenhaus_intersect requires diagonal strings")
    w = n + 1  # z bits plus sign bit

    def vec(g: PauliLim) -> int:
        return (g.z << 1) | (1 if g.scalar.real < 0 else 0)

    rows = [(vec(g) << w) | vec(g) for g in rref(a).gens]
    rows += [vec(g) << w for g in rref(b).gens]
    basis = []
    for r in _gf2_echelon(rows, 2 * w):
        if r >> w == 0 and r != 0:
            basis.append(r)
    gens = []
    for v in basis:
        zbits = v >> 1
        sign = -1.0 if v & 1 else 1.0
        if zbits == 0:
            if sign < 0:
                raise NotAStabilizerGroupError("-I in diagonal intersection")
            continue
        gens.append(PauliLim(n, 0, zbits, sign))
    return rref(GeneratorSet(n, gens))


# ---------------------------------------------------------------------------
# Clifford circuits, conjugation, diagonalization


CliffordGate = tuple
CliffordCircuit = tuple


def _conj_gate(a: PauliLim, gate: CliffordGate) -> PauliLim:
    x, z, s = a.x, a.z, a.scalar
    kind = gate[0]
    if kind == "h":
        b = gate[1] - 1
        xb = (x >> b) & 1
        zb = (z >> b) & 1
        if xb & zb:
            s = -s
        if xb != zb:
            x ^= 1 << b
            z ^= 1 << b
    elif kind == "s":
        b = gate[1] - 1
        xb = (x >> b) & 1
        if xb:
            if (z >> b) & 1:
                s = -s
            z ^= 1 << b
    elif kind == "cx":
        bc = gate[1] - 1
        bt = gate[2] - 1
        xc = (x >> bc) & 1
        zt = (z >> bt) & 1
        if xc and zt and (((x >> bt) ^ (z >> bc) ^ 1) & 1):
            s = -s
        if xc:
            x ^= 1 << bt
        if zt:
            z ^= 1 << bc
    else:
        raise PauliError(f"unknown Clifford gate {gate!r}")
    return PauliLim(a.n, x, z, s)


def conjugate(a: PauliLim, circuit: Iterable[CliffordGate]) -> PauliLim:
    """U a U^dagger where U applies the circuit's gates in list order."""
    for gate in circuit:
        a = _conj_gate(a, gate)
    return a


def inverse_circuit(circuit: Iterable[CliffordGate]) -> CliffordCircuit:
    out = []
    for gate in reversed(tuple(circuit)):
        if gate[0] == "s":
            out.extend([gate, gate, gate])  # S^-1 = S^3
        else:
            out.append(gate)
    return tuple(out)


class CliffordTableau:
    """Images of X_k and Z_k under conjugation by a fixed Clifford circuit.

    ``apply`` conjugates an arbitrary LIM in O(n) string products instead of
    replaying the whole circuit."""

    __slots__ = ("n", "ximg", "zimg")

    def __init__(self, n: int, ximg: list[PauliLim], zimg: list[PauliLim]):
        self.n = n
        self.ximg = ximg
        self.zimg = zimg

    @classmethod
    def from_circuit(cls, n: int, circuit: Iterable[CliffordGate]) -> "CliffordTableau":
        ximg = [single(n, k + 1, "X") for k in range(n)]
        zimg = [single(n, k + 1, "Z") for k in range(n)]
        for gate in circuit:
            ximg = [_conj_gate(p, gate) for p in ximg]
            zimg = [_conj_gate(p, gate) for p in zimg]
        return cls(n, ximg, zimg)

    def apply(self, a: PauliLim) -> PauliLim:
        res = PauliLim(
            self.n, 0, 0, a.scalar * _PHASES[(a.x & a.z).bit_count() % 4]
        )
        for b in _bits(a.x):
            res = mul(res, self.ximg[b])
        for b in _bits(a.z):
            res = mul(res, self.zimg[b])
        return res


def clifford_to_z_form(g: GeneratorSet) -> tuple[CliffordCircuit, GeneratorSet]:
    """A circuit U of H/S/CX gates with U <g> U^dagger = {Z_1, ..., Z_k}.

    Sweeps generator i onto +Z_(i+1): S turns Y factors into X, H turns X
    into Z, CXs collapse the Z support onto one qubit, two CXs move it to
    the pivot, and an inlined X (= H S S H) fixes a -1 sign.  Earlier pivots
    are never disturbed because generator i commutes with Z_1..Z_i."""
    work = list(rref(g).gens)
    if len(work) != len(g.gens):
        raise NotAStabilizerGroupError("dependent generator set")
    n = g.n
    circuit: list[CliffordGate] = []

    def emit(gate: CliffordGate) -> None:
        circuit.append(gate)
        for j in range(len(work)):
            work[j] = _conj_gate(work[j], gate)

    for i in range(len(work)):
        # clear X components: Y -> -X via S, then X -> Z via H
        for b in list(_bits(work[i].x & work[i].z)):
            emit(("s", b + 1))
        for b in list(_bits(work[i].x)):
            emit(("h", b + 1))
        if work[i].x != 0:
            raise NotAStabilizerGroupError("failed to diagonalize generator")
        support = list(_bits(work[i].z))
        high = [b for b in support if b >= i]
        if not high:
            raise NotAStabilizerGroupError("dependent or non-commuting generators")
        q = i if i in support else high[0]
        for b in support:
            if b != q:
                emit(("cx", b + 1, q + 1))
        if q != i:
            emit(("cx", i + 1, q + 1))
            emit(("cx", q + 1, i + 1))
        if work[i].scalar.real < 0:
            for gate in (("h", i + 1), ("s", i + 1), ("s", i + 1), ("h", i + 1)):
                emit(gate)
    for i, row in enumerate(work):
        if not (row.x == 0 and row.z == 1 << i and abs(row.scalar - 1.0) <= EPS_EQ):
            raise NotAStabilizerGroupError("input is not a stabilizer generator set")
    zgens = GeneratorSet(n, [single(n, i + 1, "Z") for i in range(len(work))])
    return tuple(circuit), zgens


def group_product(gens: Sequence[PauliLim], mask: int, n: int) -> PauliLim:
    """Exact product of the generators selected by ``mask`` bits.

    Well defined without an ordering convention because stabilizer
    generators commute."""
    res = identity(n)
    for b in _bits(mask):
        res = mul(res, gens[b])
    return res


def string_kernel(g0: GeneratorSet, g1: GeneratorSet) -> list[tuple[int, int]]:
    """Basis of {(a, b) : prod g0^a and prod g1^b have the same string}.

    Plain GF(2) elimination on the stacked check strings, with selection
    bits carried along; rows whose string part cancels record a kernel
    member in their selection part.  Phases are ignored here."""
    k0 = len(g0.gens)
    w = k0 + len(g1.gens)
    sel_mask = (1 << w) - 1
    basis: dict[int, int] = {}
    out: list[tuple[int, int]] = []
    for i, g in enumerate(g0.gens + g1.gens):
        cur = (g.string_key() << w) | (1 << i)
        while cur >> w:
            lead = cur.bit_length() - 1
            hit = basis.get(lead)
            if hit is None:
                basis[lead] = cur
                cur = 0
                break
            cur ^= hit
        if cur:
            out.append((cur & ((1 << k0) - 1), (cur & sel_mask) >> k0))
    return out


def find_opposite(g0: GeneratorSet, g1: GeneratorSet) -> Optional[PauliLim]:
    """Some h with h in <g0> and -h in <g1>, or None.

    Such an h shares its string with an element of <g1>, so every candidate
    lives in the string kernel of the stacked generator sets.  Sign
    quotients are multiplicative over the kernel (commuting +-1 generators
    square to +I exactly), so scanning one kernel basis decides existence:
    any basis pair whose exact products disagree in sign is a witness."""
    n = g0.n
    for m0, m1 in string_kernel(g0, g1):
        h = group_product(g0.gens, m0, n)
        other = group_product(g1.gens, m1, n)
        if h.scalar.real * other.scalar.real < 0:
            return h
    return None
