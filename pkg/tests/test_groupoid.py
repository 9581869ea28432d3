from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from emergent.core import approx_diff
from emergent.errors import CompositionError, DomainError
from emergent.groupoid import (
    Arrow,
    add,
    compose_arrows,
    deformed_dif,
    dif_arrows,
    dilate_arrow,
    identity_arrow,
    inverse_arrow,
    norm_arrow,
)
from emergent.models import (
    MODELS,
    CarnotHeisenbergModel,
    RealVectorModel,
    SphereModel,
    build_model,
)
from emergent.scale import ScaleKind, neutral

RV = RealVectorModel(2)
label = st.integers(-5, 5)


def arrow_is(a, target, source):
    return np.array_equal(a.target, np.atleast_1d(target)) and np.array_equal(
        a.source, np.atleast_1d(source))


def test_compose_examples():
    assert arrow_is(compose_arrows(Arrow(1, 2), Arrow(2, 3)), 1, 3)
    assert arrow_is(add(identity_arrow(4), Arrow(4, 7)), 4, 7)
    with pytest.raises(CompositionError):
        compose_arrows(Arrow(1, 2), Arrow(3, 4))


def test_inverse_examples():
    assert arrow_is(inverse_arrow(Arrow(1, 2)), 2, 1)
    assert inverse_arrow(identity_arrow(3)).isclose(identity_arrow(3))
    g = Arrow([0.5, 1.0], [2.0, -1.0])
    assert compose_arrows(g, inverse_arrow(g)).isclose(identity_arrow(g.target))


def test_dif_examples():
    assert arrow_is(dif_arrows(Arrow(1, 3), Arrow(2, 3)), 1, 2)
    g = Arrow(5, 3)
    assert dif_arrows(g, g).is_identity
    with pytest.raises(CompositionError):
        dif_arrows(Arrow(1, 3), Arrow(2, 4))


@given(label, label, label, label)
def test_groupoid_laws(a, b, c, d):
    f, g, h = Arrow(a, b), Arrow(b, c), Arrow(c, d)
    assert compose_arrows(compose_arrows(f, g), h).isclose(compose_arrows(f, compose_arrows(g, h)))
    assert compose_arrows(identity_arrow(a), f).isclose(f)
    assert compose_arrows(f, identity_arrow(b)).isclose(f)
    assert compose_arrows(inverse_arrow(f), f).is_identity


def test_arrow_validation_and_immutability():
    with pytest.raises(ValueError):
        Arrow([1.0, 2.0], [1.0])
    g = Arrow([1.0, 2.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        g.target[0] = 5.0
    target, source = g
    assert target[1] == 2.0 and source[0] == 0.0


def test_dilate_examples():
    g = Arrow([2.0, 0.0], [0.0, 0.0])
    assert arrow_is(dilate_arrow(RV, 0.5, g), [1, 0], [0, 0])
    e = identity_arrow([0.3, 0.4])
    assert dilate_arrow(RV, 0.5, e).isclose(e)
    h = Arrow([0.3, -0.7], [1.0, 2.0])
    assert dilate_arrow(RV, 0.5, dilate_arrow(RV, 0.5, h)).isclose(dilate_arrow(RV, 0.25, h))
    assert np.array_equal(dilate_arrow(RV, 0.3, h).source, h.source)


def test_norm_examples():
    g = Arrow([3.0, 4.0], [0.0, 0.0])
    assert norm_arrow(RV, g) == 5.0
    assert norm_arrow(RV, identity_arrow([1.0, 1.0])) == 0.0
    assert norm_arrow(RV, inverse_arrow(g)) == norm_arrow(RV, g)


@pytest.mark.parametrize("m", [RV, CarnotHeisenbergModel(), SphereModel()], ids=lambda m: m.name)
def test_norm_homogeneity(m):
    pts = m.sample_ball(30, 1.0, seed=8)
    for x, y in zip(pts, pts[1:]):
        g = Arrow(y, x)
        for eps in (0.1, 0.5, 0.9):
            assert norm_arrow(m, dilate_arrow(m, eps, g)) == pytest.approx(eps * norm_arrow(m, g),
                                                                           abs=1e-9)


def test_deformed_dif_example():
    x, y, z = [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]
    d = deformed_dif(RV, 0.1, Arrow(y, x), Arrow(z, x))
    np.testing.assert_allclose(d.target, [1.0, -0.9], atol=1e-15)
    np.testing.assert_allclose(d.source, [0.0, 0.1], atol=1e-15)


def test_deformed_dif_rational_oracle():
    # target y - z + x + eps (z - x), source x + eps (z - x), from the defining relation
    for eps in (F(1, 2), F(1, 8), F(3, 7)):
        x, y, z = oracles.vec(F(1, 4), -1), oracles.vec(2, F(1, 2)), oracles.vec(F(-3, 2), 1)
        target = oracles.affine_diff(eps, x, z, y)
        source = oracles.affine_op(eps, x, z)
        assert target == tuple(b - c + a + eps * (c - a) for a, b, c in zip(x, y, z))
        # dilating (target, source) about its source lands on dif of the dilated arrows
        assert oracles.affine_op(eps, source, target) == oracles.affine_op(eps, x, y)


def test_deformed_dif_degenerate_cases():
    m = CarnotHeisenbergModel()
    x, z, y = m.sample_ball(3, seed=9)
    h = Arrow(z, x)
    d = deformed_dif(m, 0.3, h, h)
    np.testing.assert_allclose(d.target, m.op(0.3, x, z), atol=1e-12)
    np.testing.assert_allclose(d.source, m.op(0.3, x, z), atol=1e-12)
    one = deformed_dif(m, neutral(m.scale_kind), Arrow(y, x), h)
    assert one.isclose(dif_arrows(Arrow(y, x), h), 1e-12)


def test_deformed_dif_needs_common_source():
    with pytest.raises(CompositionError):
        deformed_dif(RV, 0.5, Arrow([1.0, 0], [0.0, 0]), Arrow([1.0, 0], [0.5, 0]))


def test_long_arrows_rejected_on_sphere():
    s = SphereModel()
    north = np.array([0.0, 0.0, 1.0])
    g = Arrow(-north, north)
    with pytest.raises(DomainError):
        dilate_arrow(s, 0.5, g)
    with pytest.raises(DomainError):
        deformed_dif(s, 0.5, g, identity_arrow(north))


@pytest.mark.parametrize("name", sorted(MODELS))
def test_defining_relation(name):
    m = build_model(name)
    rng = np.random.default_rng(42)
    xs = m.sample_ball(100, 1.0, rng)
    scales = [e for e in m.check_scales() if m.scale_size(e) < 1]
    if m.scale_kind is not ScaleKind.INTEGER_SHIFT:
        scales.append(m.scale(0.01))
    for eps in scales:
        for x in xs:
            y, z = m.sample_ball(2, 1.0, rng, center=x)
            g, h = Arrow(y, x), Arrow(z, x)
            d = deformed_dif(m, eps, g, h)
            lhs = dilate_arrow(m, eps, Arrow(m.project(d.target), d.source))
            rhs = dif_arrows(dilate_arrow(m, eps, g), dilate_arrow(m, eps, h))
            assert lhs.isclose(rhs, 1e-9), (name, eps)
            assert np.array_equal(d.target, approx_diff(m, eps, x, z, y))
