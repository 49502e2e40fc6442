"""Flags, opposition, the linear action and unipotent transporters."""

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from xratio.cartan import FaceSignature
from xratio.errors import DependentColumns, NotUnimodular, SignatureMismatch
from xratio.flags import (
    Flag,
    act,
    is_opposite,
    longest_element,
    make_flag,
    ortho_opposite,
    standard_pair,
    transversality,
    unipotent_transporter,
)
from xratio.sampling import random_flag, random_spd, random_unimodular
from xratio.spdspace import SpdPoint

from strategies import faces, rngs


def line(n, *coords):
    """The flag (span v) < R^n, completed by the standard basis."""
    v = np.array(coords, dtype=float)
    basis = np.eye(n)
    basis[:, 0] = v
    if abs(v[0]) < 1e-12:
        basis[:, 1] = np.eye(n)[:, 0]
    return make_flag(n, FaceSignature(n, (1, n)), basis)


def test_make_flag_identity_is_standard():
    x = make_flag(2, (1, 2), np.eye(2))
    assert np.allclose(x.basis, np.eye(2))


def test_make_flag_canonicalizes():
    x = make_flag(2, (1, 2), [[1.0, 1.0], [0.0, 1.0]])
    assert x.same_as(make_flag(2, (1, 2), np.eye(2)))


def test_make_flag_rank_deficient():
    with pytest.raises(DependentColumns):
        make_flag(2, (1, 2), [[1.0, 2.0], [1.0, 2.0]])


def test_standard_pair_n2():
    x, y = standard_pair(2)
    assert np.allclose(np.abs(x.subspace(1)[:, 0]), [1.0, 0.0])
    assert np.allclose(np.abs(y.subspace(1)[:, 0]), [0.0, 1.0])


def test_standard_pair_n3_partial():
    x, y = standard_pair(3, FaceSignature(3, (1, 3)))
    assert x.signature.dims == (1, 3)
    assert y.signature.dims == (2, 3)
    assert np.allclose(np.abs(x.subspace(1)[:, 0]), [1.0, 0.0, 0.0])
    plane = y.subspace(2)
    assert np.allclose(np.abs(plane[0]), 0.0)  # e2 ^ e3


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_standard_pairs_are_opposite_for_every_signature(n):
    import itertools

    for k in range(1, n):
        for steps in itertools.combinations(range(1, n), k):
            x, y = standard_pair(n, FaceSignature(n, steps + (n,)))
            assert is_opposite(x, y)


def test_is_opposite_examples():
    x, y = standard_pair(2)
    assert is_opposite(x, y)
    assert not is_opposite(x, x)
    assert is_opposite(line(2, 1, 0), line(2, 1, 1))


def test_transversality_needs_opposite_signatures():
    x = random_flag(3, FaceSignature(3, (1, 3)), np.random.default_rng(0))
    with pytest.raises(SignatureMismatch):
        transversality(x, x)


def test_act_identity_and_longest_element():
    x, y = standard_pair(4)
    assert act(np.eye(4), x).same_as(x)
    assert act(longest_element(4), x).same_as(y)


def test_act_requires_unimodular():
    x, _ = standard_pair(2)
    with pytest.raises(NotUnimodular):
        act(2.0 * np.eye(2), x)


@given(rngs(), st.sampled_from([2, 3, 4]))
def test_act_is_associative(rng, n):
    g, h = random_unimodular(n, rng), random_unimodular(n, rng)
    x = random_flag(n, None, rng)
    assert act(g @ h, x).same_as(act(g, act(h, x)), tol=1e-7)


@given(rngs(), st.sampled_from([2, 3, 4]))
def test_act_preserves_opposition(rng, n):
    g = random_unimodular(n, rng)
    x, y = random_flag(n, None, rng), random_flag(n, None, rng)
    assert is_opposite(x, y) == is_opposite(act(g, x), act(g, y))


def test_ortho_opposite_of_standard_flag():
    x, y = standard_pair(3)
    assert ortho_opposite(x, SpdPoint.identity(3)).same_as(y)


def test_ortho_opposite_n2_examples():
    x = line(2, 1, 0)
    # diagonal o: the o^{-1}-orthogonal line to e1 is still e2
    diag = ortho_opposite(x, SpdPoint(2, np.diag([4.0, 0.25])))
    assert np.allclose(np.abs(diag.subspace(1)[:, 0]), [0.0, 1.0])
    # o = [[2, 1], [1, 1]]: o^{-1} = [[1, -1], [-1, 2]], so e1^T o^{-1} v = v1 - v2 = 0
    sheared = ortho_opposite(x, SpdPoint(2, np.array([[2.0, 1.0], [1.0, 1.0]])))
    assert sheared.same_as(line(2, 1, 1))


@given(rngs(), st.sampled_from([2, 3, 4, 5]), st.data())
def test_ortho_opposite_is_opposite(rng, n, data):
    face = data.draw(faces(n))
    x = random_flag(n, face, rng)
    assert is_opposite(x, ortho_opposite(x, random_spd(n, rng)))


@given(rngs(), st.sampled_from([2, 3, 4]))
def test_ortho_opposite_of_factored_point_matches_product(rng, n):
    g = random_unimodular(n, rng)
    o = random_spd(n, rng)
    x = random_flag(n, None, rng)
    factored = SpdPoint.acted(g, o)
    assert ortho_opposite(x, factored).same_as(ortho_opposite(x, factored.mat), tol=1e-7)


def test_transporter_examples():
    x = line(2, 1, 0)
    z = line(2, 0, 1)
    assert np.allclose(unipotent_transporter(x, z, z), np.eye(2))
    c = 0.7
    y = line(2, c, 1)
    u = unipotent_transporter(x, z, y)
    assert np.allclose(u, [[1.0, c], [0.0, 1.0]])


@given(rngs(), st.sampled_from([2, 3, 4]))
def test_transporter_fixes_x_and_moves_z_to_y(rng, n):
    x, z, y = (random_flag(n, None, rng) for _ in range(3))
    # nearly tangent triples give transporters too ill-conditioned to act with
    assume(min(transversality(x, z) + transversality(x, y)) > 0.05)
    u = unipotent_transporter(x, z, y)
    assert act(u, x).same_as(x, tol=1e-7)
    assert act(u, z).same_as(y, tol=1e-6)


def test_flag_json_roundtrip():
    x = random_flag(4, FaceSignature(4, (1, 3, 4)), np.random.default_rng(3))
    back = Flag.from_json(x.to_json())
    assert back.same_as(x)
