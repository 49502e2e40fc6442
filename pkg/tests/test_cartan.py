"""Types, faces, corner types and dual bases of the Cartan subspace."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from xratio.cartan import (
    FaceSignature,
    TypeVector,
    a_inner,
    corner,
    corner_types,
    dual_basis,
    embed,
    face_type,
    involute,
    make_type,
    project_to_face,
    regular_type,
)
from xratio.errors import BadMultiplicities, NotDecreasing
from xratio.sampling import random_type

from strategies import faces, rngs

R2 = 1.0 / math.sqrt(2.0)


@st.composite
def types(draw, n_values=(2, 3, 4, 5, 6)):
    n = draw(st.sampled_from(n_values))
    face = draw(faces(n))
    return random_type(n, draw(rngs()), face.mults)


def test_make_type_valid_examples():
    TypeVector(2, (R2, -R2), (1, 1))
    TypeVector(3, (R2, 0.0, -R2), (1, 1, 1))


def test_make_type_rejects_increasing_values():
    with pytest.raises(NotDecreasing):
        make_type(2, (1.0, 2.0))


def test_make_type_rejects_bad_constraints():
    with pytest.raises(BadMultiplicities):
        TypeVector(2, (1.0, -1.0), (1, 1))
    with pytest.raises(BadMultiplicities):
        TypeVector(3, (R2, -R2), (1, 1))


def test_normalize_projects_onto_constraints():
    t = make_type(3, (5.0, 2.0, 1.0), normalize=True)
    lam = embed(t)
    assert lam.sum() == pytest.approx(0.0, abs=1e-15)
    assert lam @ lam == pytest.approx(1.0)


def test_involute_examples():
    t = TypeVector(2, (R2, -R2), (1, 1))
    assert involute(t) == t
    a = make_type(3, (3.0, 1.0), (1, 2), normalize=True)
    ia = involute(a)
    assert ia.values == (-a.values[1], -a.values[0])
    assert ia.mults == (2, 1)


@given(types())
def test_involute_is_an_involution(t):
    assert involute(involute(t)).values == pytest.approx(t.values)
    assert involute(involute(t)).mults == t.mults
    assert np.allclose(embed(involute(t)), -embed(t)[::-1])


def test_corner_n2():
    assert corner_types(2)[0].values == pytest.approx((R2, -R2))


def test_corner_n3_first():
    # the two constraint equations a + 2b = 0, a^2 + 2b^2 = 1
    assert corner(3, 1).values == pytest.approx((math.sqrt(2.0 / 3.0), -math.sqrt(1.0 / 6.0)))
    assert corner(3, 1).mults == (1, 2)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_corners_are_unit_types(n):
    cs = corner_types(n)
    assert len(cs) == n - 1
    for c in cs:
        lam = embed(c)
        assert lam.sum() == pytest.approx(0.0, abs=1e-14)
        assert a_inner(lam, lam) == pytest.approx(1.0)


def test_embed_examples():
    t = make_type(3, (3.0, 1.0), (1, 2), normalize=True)
    a, b = t.values
    assert np.allclose(embed(t), [a, b, b])
    assert np.allclose(embed(corner(2, 1)), [R2, -R2])


def test_a_inner_example():
    u = np.array([1.0, 0.0, -1.0]) / math.sqrt(2.0)
    v = np.array([1.0, -2.0, 1.0]) / math.sqrt(6.0)
    assert a_inner(u, v) == pytest.approx(0.0, abs=1e-16)


@given(rngs())
def test_a_inner_bilinear(rng):
    u, v, w = rng.normal(size=(3, 4))
    s = rng.normal()
    assert a_inner(u + s * v, w) == pytest.approx(a_inner(u, w) + s * a_inner(v, w))
    assert a_inner(u, v) == pytest.approx(a_inner(v, u))


def test_dual_basis_n2():
    (alpha,) = dual_basis(FaceSignature.full(2)).values()
    assert np.allclose(alpha, [R2, -R2])


def _all_faces(n):
    import itertools

    for k in range(1, n):
        for steps in itertools.combinations(range(1, n), k):
            yield FaceSignature(n, steps + (n,))


@pytest.mark.parametrize("face", list(_all_faces(4)), ids=lambda f: str(f.dims))
def test_dual_basis_is_dual_to_corners(face):
    alphas = dual_basis(face)
    for j, alpha in alphas.items():
        for i in face.steps:
            assert a_inner(alpha, embed(corner(4, i))) == pytest.approx(float(i == j), abs=1e-12)


@pytest.mark.parametrize("face", list(_all_faces(4)), ids=lambda f: str(f.dims))
def test_face_dual_basis_is_projection_of_chamber_dual_basis(face):
    full = dual_basis(FaceSignature.full(4))
    for j, alpha in dual_basis(face).items():
        assert np.allclose(project_to_face(full[j], face), alpha, atol=1e-12)


@given(rngs(), st.sampled_from(list(_all_faces(4))))
def test_projection_is_idempotent(rng, face):
    v = rng.normal(size=4)
    p = project_to_face(v, face)
    assert np.allclose(project_to_face(p, face), p, atol=1e-12)
    # the residual is orthogonal to every corner of the face
    for j in face.steps:
        assert a_inner(v - p, embed(corner(4, j))) == pytest.approx(0.0, abs=1e-12)


def test_face_type_lies_inside_its_face():
    face = FaceSignature(5, (2, 4, 5))
    t = face_type(face)
    assert t.signature == face
    assert regular_type(5).signature.is_full()


def test_face_involution():
    face = FaceSignature(5, (1, 3, 5))
    assert face.involute().dims == (2, 4, 5)
    assert face.involute().involute() == face
    assert FaceSignature(5, (3, 5)).is_face_of(face)
