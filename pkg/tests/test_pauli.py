"""Pauli algebra layer against dense matrices and explicit enumeration."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import limdd.pauli as pl
from oracles import (
    clifford_circuit_matrix,
    cx_matrix,
    enumerate_group,
    group_keys,
    lim_to_matrix,
    random_stabilizer_genset,
)


def random_lim(rng, n, scalar_pool="any"):
    x = int(rng.integers(0, 1 << n))
    z = int(rng.integers(0, 1 << n))
    if scalar_pool == "sign":
        s = -1.0 if rng.integers(0, 2) else 1.0
    elif scalar_pool == "unit":
        s = np.exp(2j * np.pi * rng.random())
    else:
        s = (rng.normal() + 1j * rng.normal()) or 1.0
    return pl.PauliLim(n, x, z, s)


lim_strategy = st.integers(1, 4).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.integers(0, (1 << n) - 1),
        st.integers(0, (1 << n) - 1),
        st.sampled_from([1.0, -1.0, 1j, -1j, 0.5, -2.0 + 1.0j]),
    )
).map(lambda t: pl.PauliLim(*t))


def test_single_letter_matrices():
    np.testing.assert_allclose(
        lim_to_matrix(pl.single(1, 1, "Y")), np.array([[0, -1j], [1j, 0]])
    )
    np.testing.assert_allclose(
        lim_to_matrix(pl.from_text("XZ")),
        np.kron(np.array([[0, 1], [1, 0]]), np.diag([1, -1])).astype(complex),
    )


def test_mul_matches_dense():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = int(rng.integers(1, 5))
        a, b = random_lim(rng, n), random_lim(rng, n)
        got = lim_to_matrix(pl.mul(a, b))
        want = lim_to_matrix(a) @ lim_to_matrix(b)
        np.testing.assert_allclose(got, want, atol=1e-12)


@settings(max_examples=150, deadline=None)
@given(lim_strategy, lim_strategy, lim_strategy)
def test_mul_associative(a, b, c):
    n = max(a.n, b.n, c.n)

    def pad(p):
        return pl.PauliLim(n, p.x, p.z, p.scalar)

    a, b, c = pad(a), pad(b), pad(c)
    left = pl.mul(pl.mul(a, b), c)
    right = pl.mul(a, pl.mul(b, c))
    assert left.x == right.x and left.z == right.z
    assert abs(left.scalar - right.scalar) <= 1e-12 * max(1.0, abs(left.scalar))


def test_sign_product_closure():
    rng = np.random.default_rng(11)
    for _ in range(300):
        n = int(rng.integers(1, 4))
        a = random_lim(rng, n, "sign")
        b = random_lim(rng, n, "sign")
        s = pl.mul(a, b).scalar
        assert s in (1 + 0j, -1 + 0j, 1j, -1j)


def test_inverse():
    rng = np.random.default_rng(3)
    for _ in range(100):
        a = random_lim(rng, int(rng.integers(1, 5)))
        prod = pl.mul(a, pl.inverse(a))
        assert prod.is_identity_string()
        assert abs(prod.scalar - 1.0) <= 1e-12


def test_pauli_conjugate_matches_dense():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(1, 4))
        a = random_lim(rng, n)
        g = random_lim(rng, n, "sign")
        got = lim_to_matrix(pl.pauli_conjugate(a, g))
        ma = lim_to_matrix(a)
        want = ma @ lim_to_matrix(g) @ np.linalg.inv(ma)
        np.testing.assert_allclose(got, want, atol=1e-9)


def test_check_vector_examples():
    # X ~ (1 | 0); Z (x) Y ~ (0,1 | 1,1)
    assert pl.to_check_vector(pl.from_text("X"))[:2] == ((1,), (0,))
    assert pl.to_check_vector(pl.from_text("ZY"))[:2] == ((0, 1), (1, 1))
    xs, zs, r, t = pl.to_check_vector(pl.PauliLim(3, 0b111, 0, 3.0))
    assert (xs, zs) == ((1, 1, 1), (0, 0, 0)) and r == 3.0 and t == 0.0
    xs, zs, r, t = pl.to_check_vector(pl.from_text("-0.5i*IZY"))
    assert (xs, zs) == ((0, 0, 1), (0, 1, 1))
    assert abs(r - 0.5) < 1e-12 and abs(t - 3 * math.pi / 2) < 1e-12
    assert pl.check_vector_str(pl.PauliLim(3, 0b111, 0, 3.0)) == "111|000|3,0"


def test_check_vector_roundtrip():
    rng = np.random.default_rng(13)
    for _ in range(50):
        a = random_lim(rng, int(rng.integers(1, 5)))
        xs, zs, r, t = pl.to_check_vector(a)
        b = pl.from_check_vector(xs, zs, r, t)
        assert (b.x, b.z) == (a.x, a.z)
        assert abs(b.scalar - a.scalar) <= 1e-9 * max(1.0, abs(a.scalar))


def test_lex_order_examples():
    assert pl.lex_cmp(pl.from_text("X"), pl.from_text("Y")) < 0
    assert pl.lex_cmp(pl.from_text("ZI"), pl.from_text("ZX")) < 0
    assert pl.lex_cmp(pl.from_text("Z"), pl.from_text("X")) < 0  # X block first
    assert pl.lex_cmp(pl.from_text("X"), pl.from_text("-X")) < 0  # theta tie-break
    assert pl.lex_cmp(pl.from_text("0.5*X"), pl.from_text("X")) < 0


def test_lex_order_total():
    rng = np.random.default_rng(17)
    lims = [random_lim(rng, 3) for _ in range(40)]

    def key(a):
        xs, zs, r, t = pl.to_check_vector(a)
        return (xs, zs, round(r, 6), round(t, 6))

    for a in lims:
        for b in lims:
            c = pl.lex_cmp(a, b)
            assert c == -pl.lex_cmp(b, a)
            if key(a) < key(b):
                assert c < 0
            elif key(a) > key(b):
                assert c > 0


def test_format_and_parse():
    assert pl.format_lim(pl.from_text("-i*XZY")) == "-i*XZY"
    assert pl.format_lim(pl.identity(3)) == "III"
    assert pl.format_lim(pl.PauliLim(2, 0b10, 0b01, -1.0)) == "-XZ"
    assert pl.format_lim(pl.PauliLim(1, 1, 1, 1j)) == "i*Y"
    assert pl.format_lim(pl.PauliLim(2, 0, 0b11, 0.5)) == "0.5*ZZ"
    assert pl.format_lim(pl.zero(3)) == "0"
    a = pl.from_text("0.5*XX")
    assert a.scalar == 0.5 and a.x == 0b11 and a.z == 0


def test_zero_and_errors():
    with pytest.raises(pl.PauliError):
        pl.PauliLim(2, 0, 0, 0.0)
    with pytest.raises(pl.PauliError):
        pl.single(2, 3, "X")
    assert pl.is_zero(pl.mul(pl.zero(2), pl.identity(2)))
    assert pl.is_zero(pl.scale(0.0, pl.identity(2)))
    with pytest.raises(pl.PauliError):
        pl.inverse(pl.zero(2))


# ---------------------------------------------------------------------------
# generator sets


def test_rref_preserves_group():
    rng = np.random.default_rng(23)
    for _ in range(60):
        n = int(rng.integers(1, 5))
        g = random_stabilizer_genset(n, rng)
        r = pl.rref(g)
        assert group_keys(g) == group_keys(r)
        # pivots strictly decreasing, eliminated everywhere else
        keys = [row.string_key() for row in r.gens]
        pivs = [k.bit_length() - 1 for k in keys]
        assert pivs == sorted(pivs, reverse=True) and len(set(pivs)) == len(pivs)
        for i, k in enumerate(keys):
            for j, p in enumerate(pivs):
                if i != j:
                    assert not (k >> p) & 1


def test_rref_detects_minus_identity():
    g = pl.GeneratorSet(2, [pl.from_text("XI"), pl.from_text("-XI")])
    with pytest.raises(pl.NotAStabilizerGroupError):
        pl.rref(g)


def test_division_remainder_minimal():
    rng = np.random.default_rng(29)
    for _ in range(40):
        n = int(rng.integers(1, 4))
        g = random_stabilizer_genset(n, rng)
        a = random_lim(rng, n)
        rem, h = pl.division_remainder(g, a)
        got = pl.mul(a, h)
        assert (got.x, got.z) == (rem.x, rem.z)
        assert abs(got.scalar - rem.scalar) <= 1e-12 * max(1.0, abs(rem.scalar))
        best = min(pl.mul(a, el).string_key() for el in enumerate_group(g))
        assert rem.string_key() == best


def test_membership_vs_enumeration():
    rng = np.random.default_rng(31)
    for _ in range(60):
        n = int(rng.integers(1, 4))
        g = random_stabilizer_genset(n, rng)
        keys = group_keys(g)
        a = random_lim(rng, n, "sign")
        in_group = (a.x, a.z, 1 if a.scalar.real > 0 else -1) in keys
        assert pl.membership(g, a) == in_group
        in_span = any((a.x, a.z) == (x, z) for (x, z, _) in keys)
        assert pl.membership_mod_phase(g, a) == in_span


def test_zassenhaus_vs_enumeration():
    rng = np.random.default_rng(37)
    for _ in range(60):
        n = int(rng.integers(1, 5))

        def diag_set():
            gens = []
            keys = []
            for _ in range(int(rng.integers(0, n + 1))):
                z = int(rng.integers(1, 1 << n))
                from oracles import gf2_rank

                zk = (z << 1) | 0
                if gf2_rank(keys + [z]) != len(keys) + 1:
                    continue
                keys.append(z)
                gens.append(pl.PauliLim(n, 0, z, -1.0 if rng.integers(0, 2) else 1.0))
            return pl.GeneratorSet(n, gens)

        a, b = diag_set(), diag_set()
        inter = pl.zassenhaus_intersect(a, b)
        assert group_keys(inter) == group_keys(a) & group_keys(b)


def test_zassenhaus_rejects_offdiagonal():
    with pytest.raises(pl.PauliError):
        pl.zassenhaus_intersect(
            pl.GeneratorSet(2, [pl.from_text("XI")]), pl.GeneratorSet(2, [])
        )


# ---------------------------------------------------------------------------
# conjugation and diagonalization


def test_conjugate_single_gates_vs_dense():
    rng = np.random.default_rng(41)
    for _ in range(150):
        n = int(rng.integers(1, 4))
        a = random_lim(rng, n)
        q = int(rng.integers(1, n + 1))
        gates = [("h", q), ("s", q)]
        if n >= 2:
            t = int(rng.integers(1, n + 1))
            while t == q:
                t = int(rng.integers(1, n + 1))
            gates.append(("cx", q, t))
        gate = gates[int(rng.integers(0, len(gates)))]
        got = lim_to_matrix(pl.conjugate(a, (gate,)))
        u = clifford_circuit_matrix(n, (gate,))
        np.testing.assert_allclose(got, u @ lim_to_matrix(a) @ u.conj().T, atol=1e-9)


def test_conjugate_circuit_vs_dense():
    rng = np.random.default_rng(43)
    for _ in range(30):
        n = int(rng.integers(2, 5))
        circ = []
        for _ in range(int(rng.integers(1, 12))):
            kind = ("h", "s", "cx")[int(rng.integers(0, 3))]
            if kind == "cx":
                c, t = rng.choice(n, size=2, replace=False) + 1
                circ.append(("cx", int(c), int(t)))
            else:
                circ.append((kind, int(rng.integers(1, n + 1))))
        a = random_lim(rng, n)
        got = lim_to_matrix(pl.conjugate(a, circ))
        u = clifford_circuit_matrix(n, circ)
        np.testing.assert_allclose(got, u @ lim_to_matrix(a) @ u.conj().T, atol=1e-9)


def test_cx_convention_pinned():
    # control qubit 2 (MSB), target qubit 1: the textbook CNOT matrix
    np.testing.assert_allclose(
        cx_matrix(2, 2, 1),
        np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    )
    # conjugation facts: CX X_c CX = X_c X_t ; CX Z_t CX = Z_c Z_t
    a = pl.conjugate(pl.from_text("XI"), (("cx", 2, 1),))
    assert pl.format_lim(a) == "XX"
    b = pl.conjugate(pl.from_text("IZ"), (("cx", 2, 1),))
    assert pl.format_lim(b) == "ZZ"


def test_tableau_matches_conjugate():
    rng = np.random.default_rng(47)
    for _ in range(40):
        n = int(rng.integers(1, 6))
        circ = []
        for _ in range(int(rng.integers(0, 15))):
            kind = ("h", "s", "cx")[int(rng.integers(0, 3))]
            if kind == "cx" and n >= 2:
                c, t = rng.choice(n, size=2, replace=False) + 1
                circ.append(("cx", int(c), int(t)))
            else:
                circ.append(("h" if kind == "cx" else kind, int(rng.integers(1, n + 1))))
        tab = pl.CliffordTableau.from_circuit(n, circ)
        for _ in range(5):
            a = random_lim(rng, n)
            got = tab.apply(a)
            want = pl.conjugate(a, circ)
            assert (got.x, got.z) == (want.x, want.z)
            assert abs(got.scalar - want.scalar) <= 1e-12 * max(1.0, abs(want.scalar))


def test_inverse_circuit():
    rng = np.random.default_rng(53)
    n = 4
    circ = [("h", 1), ("s", 2), ("cx", 3, 1), ("s", 4), ("cx", 2, 4), ("h", 3)]
    inv = pl.inverse_circuit(circ)
    for _ in range(20):
        a = random_lim(rng, n)
        back = pl.conjugate(pl.conjugate(a, circ), inv)
        assert (back.x, back.z) == (a.x, a.z)
        assert abs(back.scalar - a.scalar) <= 1e-12 * max(1.0, abs(a.scalar))


def test_clifford_to_z_form():
    rng = np.random.default_rng(59)
    for _ in range(60):
        n = int(rng.integers(1, 7))
        g = pl.rref(random_stabilizer_genset(n, rng))
        circuit, zgens = pl.clifford_to_z_form(g)
        assert all(gate[0] in ("h", "s", "cx") for gate in circuit)
        imgs = sorted(
            (pl.conjugate(gen, circuit) for gen in g.gens), key=lambda p: p.z
        )
        assert len(imgs) == len(g.gens)
        for i, img in enumerate(imgs):
            assert img.x == 0 and img.z == 1 << i and img.scalar == 1.0
        assert [gen.z for gen in zgens.gens] == [1 << i for i in range(len(g.gens))]


def test_clifford_to_z_form_dense_check():
    rng = np.random.default_rng(61)
    for _ in range(15):
        n = int(rng.integers(1, 4))
        g = pl.rref(random_stabilizer_genset(n, rng, k=int(rng.integers(1, n + 1))))
        circuit, _ = pl.clifford_to_z_form(g)
        u = clifford_circuit_matrix(n, circuit)
        got = {
            (np.round(u @ lim_to_matrix(gen) @ u.conj().T, 6) + 0.0).tobytes()
            for gen in g.gens
        }
        want = {
            (np.round(lim_to_matrix(pl.single(n, i + 1, "Z")), 6) + 0.0).tobytes()
            for i in range(len(g.gens))
        }
        assert got == want


def test_clifford_to_z_form_rejects_bad_input():
    g = pl.GeneratorSet(2, [pl.from_text("XI"), pl.from_text("ZI")])  # anticommute
    with pytest.raises(pl.NotAStabilizerGroupError):
        pl.clifford_to_z_form(g)


def test_find_opposite_vs_enumeration():
    rng = np.random.default_rng(67)
    none_seen = found_seen = 0
    for _ in range(200):
        n = int(rng.integers(1, 4))
        g0 = pl.rref(random_stabilizer_genset(n, rng))
        g1 = pl.rref(random_stabilizer_genset(n, rng))
        k0 = group_keys(g0)
        k1 = group_keys(g1)
        exists = any((x, z, -s) in k1 for (x, z, s) in k0)
        got = pl.find_opposite(g0, g1)
        if got is None:
            none_seen += 1
            assert not exists
        else:
            found_seen += 1
            assert pl.membership(g0, got)
            assert pl.membership(g1, pl.neg(got))
    assert none_seen > 0 and found_seen > 0


def test_find_opposite_known_case():
    # <XX, -ZZ> contains +YY and <-YY> contains -YY: opposite pair exists
    g0 = pl.GeneratorSet(2, [pl.from_text("XX"), pl.from_text("-ZZ")])
    g1 = pl.GeneratorSet(2, [pl.from_text("-YY")])
    h = pl.find_opposite(g0, g1)
    assert h is not None
    assert pl.membership(g0, h) and pl.membership(g1, pl.neg(h))
    # empty second set can never contain -h
    assert pl.find_opposite(g0, pl.GeneratorSet(2, [])) is None
