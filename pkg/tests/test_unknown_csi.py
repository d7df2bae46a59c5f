import numpy as np
import pytest

from hybridsec.channels import ChannelSet, Geometry
from hybridsec.errors import QosInfeasibleError
from hybridsec.known_csi import optimal_message_powers
from hybridsec.link import SystemParams
from hybridsec.unknown_csi import (AN_MRT, AN_SDR, BASELINE_MRT, EavesdropperRing,
                                   UnknownCsiConfig, baseline_mrt_plan, expected_secrecy_rate,
                                   pd_star_unknown, solve_unknown_csi)

from _helpers import random_channels

H = 2.065829439808268e-05
# independent mpmath evaluation at R_th = R_thD = 2, eta = 0.8, h1 = h2
PD_STAR_FULL_LOG = 1.481856601549352e-02
PD_STAR_HALF_LOG = 5.974005801871654e-02
SP = SystemParams()


def _cfg(method, **kw):
    return UnknownCsiConfig(**{"r_th": 1.0, "r_th_d": 1.0, "method": method,
                               "eav_distance_min": 4.0, "expectation_samples": 200, **kw})


@pytest.fixture(scope="module")
def instances():
    return random_channels(41, 50, Geometry(d_d=5.0, d_e_min=4.0))


def test_pd_star_values():
    ch = ChannelSet(H, H, [1, 1], [0, 0])
    p1, p2 = optimal_message_powers(ch, 2.0, SP.k, SP.fe)
    got = pd_star_unknown(ch, 2.0, 0.8, p1, p2, SP.k, SP.fe)
    assert got == pytest.approx(PD_STAR_FULL_LOG, rel=1e-12)
    alt = pd_star_unknown(ch, 2.0, 0.8, p1, p2, SP.k, SP.fe, full_log_exponent=False)
    assert alt == pytest.approx(PD_STAR_HALF_LOG, rel=1e-12)
    assert pd_star_unknown(ch, 0.0, 0.8, p1, p2, SP.k, SP.fe) == 0.0


def test_baseline_plan_uses_full_power_mrt():
    ch = random_channels(43, 1)[0]
    sol = baseline_mrt_plan(ch, _cfg(BASELINE_MRT), SP)
    assert sol.pa.dc_bias == pytest.approx(SP.fe.max_current / 2)
    np.testing.assert_allclose(np.abs(sol.beam.w) ** 2, sol.relay_caps, rtol=1e-12)
    np.testing.assert_allclose(np.angle(sol.beam.w), np.angle(ch.hD), atol=1e-12)
    assert not np.any(sol.beam.n_a)


@pytest.mark.parametrize("method", [AN_SDR, AN_MRT])
def test_an_plan_invariants(instances, method):
    cfg = _cfg(method)
    solved = 0
    for i, ch in enumerate(instances):
        try:
            sol = solve_unknown_csi(ch, cfg, SP, np.random.default_rng(i))
        except QosInfeasibleError:
            continue
        if "an-infeasible-baseline" in sol.flags:
            continue
        solved += 1
        b = sol.beam
        assert abs(np.vdot(ch.hD, b.n_a)) <= 1e-12 * np.linalg.norm(ch.hD) * np.linalg.norm(b.n_a)
        assert sol.dest_rate >= cfg.r_th_d - 1e-6
        assert np.all(b.transmit_powers() <= np.array(sol.relay_caps) * (1 + 1e-9))
        assert 0 <= sol.avg_secrecy_rate <= sol.hop_bound + 1e-12
    assert solved >= 40


def test_sdr_and_mrt_jamming_agree(instances):
    for i, ch in enumerate(instances[:20]):
        try:
            sdr = solve_unknown_csi(ch, _cfg(AN_SDR), SP, np.random.default_rng(i))
            mrt = solve_unknown_csi(ch, _cfg(AN_MRT), SP, np.random.default_rng(i))
        except QosInfeasibleError:
            continue
        assert sdr.beam.beta >= mrt.beam.beta - 1e-6
        assert sdr.beam.beta == pytest.approx(mrt.beam.beta, rel=1e-6)


def test_jamming_never_hurts_expected_rate(instances):
    ch = instances[0]
    sol = solve_unknown_csi(ch, _cfg(AN_SDR), SP, np.random.default_rng(0))
    ring = EavesdropperRing(ch.users, 4.0, SP.rf)
    s2 = SP.k.sigma_rf_sq
    with_an = expected_secrecy_rate(sol, ch, ring, 300, np.random.default_rng(1), sigma_rf_sq=s2)
    sol.beam.n_a = np.zeros(2, complex)
    without = expected_secrecy_rate(sol, ch, ring, 300, np.random.default_rng(1), sigma_rf_sq=s2)
    assert with_an >= without


def test_clamp_order(instances):
    ch = instances[1]
    sol = solve_unknown_csi(ch, _cfg(BASELINE_MRT), SP, np.random.default_rng(0))
    # an eavesdropper inside the relays' reach makes some draws negative
    ring = EavesdropperRing(ch.users, 1.0, SP.rf)
    s2 = SP.k.sigma_rf_sq
    after = expected_secrecy_rate(sol, ch, ring, 400, np.random.default_rng(2), sigma_rf_sq=s2)
    per = expected_secrecy_rate(sol, ch, ring, 400, np.random.default_rng(2),
                                clamp_per_draw=True, sigma_rf_sq=s2)
    assert per >= after >= 0
    with pytest.raises(ValueError):
        expected_secrecy_rate(sol, ch, ring, 0, np.random.default_rng(2))


def test_ring_sampler_shape():
    users = np.array([[0.5, 0.0], [-1.0, 0.3]])
    ring = EavesdropperRing(users, 6.0, SP.rf)
    hE = ring(np.random.default_rng(0), 1000)
    assert hE.shape == (1000, 2)
    assert np.all(np.isfinite(hE))


def test_sampler_required_without_positions():
    ch = ChannelSet(H, H, [1e-4, 1e-4], [0, 0])
    with pytest.raises(ValueError):
        solve_unknown_csi(ch, _cfg(BASELINE_MRT), SP, np.random.default_rng(0))


def test_unreachable_destination_target(instances):
    ch = instances[2]
    with pytest.raises(QosInfeasibleError):
        solve_unknown_csi(ch, _cfg(AN_MRT, r_th_d=30.0), SP, np.random.default_rng(0))


def test_consistent_exponent_leaves_less_headroom():
    ch = random_channels(47, 1)[0]
    loose = solve_unknown_csi(ch, _cfg(AN_SDR, full_log_exponent=True), SP,
                              np.random.default_rng(0))
    try:
        tight = solve_unknown_csi(ch, _cfg(AN_SDR, full_log_exponent=False), SP,
                                  np.random.default_rng(0))
    except QosInfeasibleError:
        return
    assert tight.pa.pd >= loose.pa.pd
    assert tight.pa.dc_bias <= loose.pa.dc_bias


def test_config_validation():
    with pytest.raises(ValueError):
        UnknownCsiConfig(method="sdr")
    with pytest.raises(ValueError):
        UnknownCsiConfig(expectation_samples=0)
    with pytest.raises(ValueError):
        UnknownCsiConfig(eav_distance_min=-1)
