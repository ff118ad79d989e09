import numpy as np
import pytest

from quantscatter.correlators import Detector, two_laser_phi2
from quantscatter.presets import generic_lambda
from quantscatter.scatterer import TwoPointCenters
from quantscatter.states import (CoherentState, EntangledBiphotonState, SpectralEnvelope,
                                 TwoModeCoherentState, TwoPhotonState, eliminated_component_exists,
                                 make_one_photon, state_from_json, symmetrize_two_photon)

Z = np.array([0.0, 0.0, 1.0])
X = np.array([1.0, 0.0, 0.0])
Y = np.array([0.0, 1.0, 0.0])


def test_one_photon_coefficients_are_normalized():
    st = make_one_photon(1.0, Z, [3.0, 4.0])
    np.testing.assert_allclose(st.pol_coeffs, [0.6, 0.8])
    assert np.linalg.norm(st.polarization) == pytest.approx(1.0)


def test_one_photon_rejects_zero_coefficients():
    with pytest.raises(ValueError):
        make_one_photon(1.0, Z, [0.0, 0.0])


@pytest.mark.parametrize("kwargs", [dict(omega_hat=0.0), dict(omega_hat=-1.0),
                                    dict(angular_width=0.0), dict(frequency_width=-0.1)])
def test_envelope_rejects_bad_parameters(kwargs):
    args = dict(omega_hat=1.0, s=Z, c=[1, 0])
    args.update(kwargs)
    with pytest.raises(ValueError):
        make_one_photon(**args)


def test_envelope_direction_is_normalized():
    env = SpectralEnvelope(1.0, [0.0, 0.0, 5.0])
    np.testing.assert_allclose(env.carrier_direction, Z)
    assert env.narrowband


def test_frequency_gate_is_one_at_carrier_and_zero_far_away():
    env = SpectralEnvelope(2.0, Z, frequency_width=0.01)
    assert env.frequency_gate(2.0) == 1.0
    assert env.frequency_gate(-2.0) == 1.0
    assert env.frequency_gate(2.05) == 0.0


def test_angular_profile_has_unit_integral():
    env = SpectralEnvelope(1.0, Z, angular_width=0.05)
    theta = np.linspace(0, np.pi, 20001)
    m = np.stack([np.sin(theta), 0 * theta, np.cos(theta)], axis=1)
    integral = 2 * np.pi * np.trapezoid(env.angular_profile(m) * np.sin(theta), theta)
    assert integral == pytest.approx(1.0, rel=1e-6)


def test_eliminated_component_examples():
    st = make_one_photon(1.0, Z, [1.0, 0.0])
    # e1(z) = x, so the y and z components vanish
    assert eliminated_component_exists(st, 1)
    assert eliminated_component_exists(st, 2)
    assert not eliminated_component_exists(st, 0)
    diag = make_one_photon(1.0, Z, [1.0, 1.0])
    assert not eliminated_component_exists(diag, 0)
    assert not eliminated_component_exists(diag, 1)


def test_symmetrize_fills_missing_mirror_entry():
    envs = (SpectralEnvelope(1.0, Z), SpectralEnvelope(0.75, X))
    st = symmetrize_two_photon(envs, [[0.0, 1.0], [None, 0.0]])
    np.testing.assert_allclose(st.pol_matrix, [[0, 1], [1, 0]])
    st2 = symmetrize_two_photon(envs, [[0.0, 1.0], [np.nan, 0.0]])
    assert st == st2


def test_symmetrize_keeps_symmetric_part():
    envs = (SpectralEnvelope(1.0, Z), SpectralEnvelope(0.75, X))
    st = symmetrize_two_photon(envs, [[1.0, 2.0], [0.0, 0.0]])
    np.testing.assert_allclose(st.pol_matrix, [[1, 1], [1, 0]])


def test_symmetrize_rejects_entries_missing_on_both_sides():
    envs = (SpectralEnvelope(1.0, Z), SpectralEnvelope(0.75, X))
    with pytest.raises(ValueError):
        symmetrize_two_photon(envs, [[1.0, None], [None, 0.0]])


def test_swapped_photons_give_equal_state():
    e1, e2 = SpectralEnvelope(1.0, Z), SpectralEnvelope(0.75, X)
    c = np.array([[0.3, 0.7], [0.7, -0.2j]])
    a = symmetrize_two_photon((e1, e2), c)
    b = symmetrize_two_photon((e2, e1), c.T)
    assert a == b
    assert hash(a) == hash(b)


def test_two_photon_state_requires_symmetric_matrix():
    envs = (SpectralEnvelope(1.0, Z), SpectralEnvelope(0.75, X))
    with pytest.raises(ValueError):
        TwoPhotonState(envs, np.array([[0, 1], [0, 0]]))


def test_degenerate_flag():
    same = TwoPhotonState((SpectralEnvelope(1.0, Z), SpectralEnvelope(1.0, X)), np.eye(2))
    diff = TwoPhotonState((SpectralEnvelope(1.0, Z), SpectralEnvelope(0.9, X)), np.eye(2))
    assert same.degenerate and not diff.degenerate


def _entangled(freqs=(1.0, 0.75)):
    return EntangledBiphotonState((Y, -Z), (Z, X), freqs, [[0, 1], [1, 0]])


def test_entangled_requires_distinct_frequencies():
    with pytest.raises(ValueError, match="distinct"):
        _entangled((1.0, 1.0))


def test_entangled_branches_share_polarization_tensor():
    st = _entangled()
    a, b = st.branch_state("a"), st.branch_state("b")
    np.testing.assert_array_equal(a.pol_matrix, b.pol_matrix)
    assert a.bases == b.bases
    np.testing.assert_allclose(a.envelopes[0].carrier_direction, Y)
    np.testing.assert_allclose(b.envelopes[1].carrier_direction, X)


def test_two_mode_requires_equal_amplitudes():
    env = SpectralEnvelope(1.0, Z)
    m1 = CoherentState(env, [1, 0], 2.0)
    with pytest.raises(ValueError, match="equal"):
        TwoModeCoherentState((m1, CoherentState(env.with_direction(X), [1, 0], 1.0)))
    with pytest.raises(ValueError):
        TwoModeCoherentState((m1,))
    with pytest.raises(ValueError):
        TwoModeCoherentState((m1, m1), phase_mode="sometimes")


def test_coherent_with_phase_keeps_modulus():
    st = CoherentState(SpectralEnvelope(1.0, Z), [1, 0], 2.0)
    assert st.with_phase(1.0).amplitude == pytest.approx(2.0 * np.exp(1j))


@pytest.mark.parametrize("make", [
    lambda: make_one_photon(1.0, [1, 1, 1], [1, 1j], angular_width=0.02),
    lambda: CoherentState(SpectralEnvelope(1.0, X), [0, 1], 1.5 - 0.5j),
    lambda: symmetrize_two_photon((SpectralEnvelope(1.0, Z), SpectralEnvelope(0.75, X)),
                                  [[0.1, 1j], [1j, 0]]),
    lambda: _entangled(),
    lambda: TwoModeCoherentState((CoherentState(SpectralEnvelope(1.0, Z), [1, 0]),
                                  CoherentState(SpectralEnvelope(1.0, X), [1, 0])), "fixed"),
])
def test_json_round_trip(make):
    st = make()
    back = state_from_json(st.to_json())
    assert back == st
    assert back.to_json() == st.to_json()


def test_unknown_kind_rejected():
    with pytest.raises(ValueError, match="unknown state kind"):
        state_from_json('{"kind": "squeezed"}')


def test_random_phase_monte_carlo_converges_to_analytic_average():
    env = SpectralEnvelope(1.0, Z)
    modes = (CoherentState(env, [1, 0]), CoherentState(env.with_direction([0.3, 0.4, 0.8]), [1, 1]))
    st = TwoModeCoherentState(modes, "random")
    model = TwoPointCenters(generic_lambda(0.1), np.array([0.3, 0.2, 1.1]))
    d1, d2 = Detector(-Z, 1.0, 0), Detector(-Y, 1.0, 0)
    exact = two_laser_phi2(st, d1, d2, model)
    errs = []
    for n in (400, 6400):
        samples = [two_laser_phi2(st, d1, d2, model, seed=k, n_samples=n) for k in range(200)]
        errs.append(np.sqrt(np.mean((np.array(samples) - exact) ** 2)) / exact)
    # sixteen times the samples should cut the rms error by about four
    assert 3.0 < errs[0] / errs[1] < 5.3
