import numpy as np
import pytest

from quantscatter.analysis import domain_Dn
from quantscatter.presets import (PRESETS, ChiGeometry, EntangledGeometry, ExplicitScenario,
                                  fig1_curves, fit_design, get_preset)

X = np.linspace(0.0, 4 * np.pi, 400)


@pytest.mark.parametrize("name", sorted(n for n, s in PRESETS.items() if s.kind != "coherent"))
def test_preset_matches_closed_form_shape(name):
    sc = get_preset(name)
    y = sc.signal_vs_x(X)
    shape = sc.expected_shape(X)
    k = int(np.argmax(shape))
    np.testing.assert_allclose(y, y[k] / shape[k] * shape, atol=1e-12 * y.max())


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_batched_equals_scalar(name):
    sc = get_preset(name)
    a = np.array([0.4, 1.3, 2.2])
    omegas = [0.9, 1.0]
    table = sc.forward_many(a, omegas)
    for i, ai in enumerate(a):
        np.testing.assert_allclose(table[i], sc.forward(ai, omegas), rtol=1e-13)


def test_coherent_preset_is_dominated_by_incident_light():
    y = get_preset("coherent-backscatter").signal_vs_x(X)
    assert y.min() > 0
    assert (y.max() - y.min()) / y.max() < 1e-3


def test_geometry_constraints():
    g = ChiGeometry(0.9, 0.75)
    assert g.s1[2] - g.n1[2] == pytest.approx(1.8)
    assert 0.75 * (g.s2[2] - g.n2[2]) == pytest.approx(0.9)
    for v in (g.s1, g.n1, g.s2, g.n2):
        assert np.linalg.norm(v) == pytest.approx(1.0)
    e = EntangledGeometry(0.9, 0.75)
    assert e.q1[2] == pytest.approx(e.s1[2])
    with pytest.raises(ValueError):
        ChiGeometry(0.4, 0.75)
    with pytest.raises(ValueError):
        ChiGeometry(0.9, 1.2)


def test_unknown_preset():
    with pytest.raises(ValueError, match="unknown preset"):
        get_preset("nope")


def test_fig1_curves_examples():
    c = fig1_curves(0.9, [0.0, np.pi / 4 / 0.9])
    for k in ("red", "black", "green"):
        assert c[k][0] == 1.0
        assert c[k][1] == pytest.approx(0.0, abs=1e-30)
    with pytest.raises(ValueError, match="1/2 < |chi| < 1"):
        fig1_curves(0.3, [0.0])


def test_explicit_scenario_matches_preset():
    ex = ExplicitScenario("one_photon", lam=tuple(get_preset("one-photon-backscatter").lam.ravel()))
    ref = get_preset("one-photon-backscatter")
    np.testing.assert_allclose(ex.signal_vs_x(X), ref.signal_vs_x(X), rtol=1e-13)


def test_explicit_sphere_and_validation():
    ex = ExplicitScenario("one_photon", model_kind="sphere", n1=(1.0, 0.0, -1.0), component1=0)
    assert ex.evaluate(0.7) > 0
    with pytest.raises(ValueError):
        ExplicitScenario("two_photon")
    with pytest.raises(ValueError):
        ExplicitScenario("squeezed")
    with pytest.raises(ValueError):
        ExplicitScenario("one_photon", lam=(1.0, 2.0))


def test_fit_designs():
    for name in PRESETS:
        d = fit_design(name)
        assert d.bounds[0] < d.a_true < d.bounds[1]
    d = fit_design("two-photon-chi09")
    assert d.prior_domain == 0 and d.bounds[0] == pytest.approx(domain_Dn(0.9, 0)[0])
