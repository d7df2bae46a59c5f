"""Designs for a passive eavesdropper whose channel is known only statistically.

Three plans share the same VLC-side closed forms:

* ``mrt``: DC bias at its floor, all harvested power beamformed to the
  destination (no jamming).
* ``an-sdr``: smallest PD meeting the destination rate target, the beam
  meeting that target from an SDP relaxation, and the rest of the harvested
  power spent on jamming placed in the null space of the destination channel.
* ``an-mrt``: as ``an-sdr`` but the beam is restricted to the destination
  channel's direction.

The figure of merit is an average over eavesdropper draws, see
:func:`expected_secrecy_rate`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .channels import ChannelSet, RfModel, rf_channels_to
from .errors import QosInfeasibleError
from .known_csi import optimal_message_powers, pd_for_relay_rate
from .link import (PowerAllocation, RateBundle, SystemParams, an_rate_terms, noma_rates,
                   relay_powers, rx_power)
from .sdp import BeamformerSolution, extract_rank_one, jamming_gains, solve_an_power_sdp

BASELINE_MRT = "mrt"
AN_SDR = "an-sdr"
AN_MRT = "an-mrt"
METHODS = (BASELINE_MRT, AN_SDR, AN_MRT)


@dataclass(frozen=True)
class UnknownCsiConfig:
    r_th: float = 2.0
    r_th_d: float = 2.0
    method: str = AN_SDR
    eav_distance_min: float = 4.0
    expectation_samples: int = 500
    # PD target inverts 2^(eta R) - 1 as displayed; False uses 2^(2 eta R) - 1,
    # the form consistent with the half-log VLC rates
    full_log_exponent: bool = True
    # both jamming rows use |hD1|^2 instead of the nulling-consistent pairing
    shared_jamming_gain: bool = False
    clamp_per_draw: bool = False
    randomization_samples: int = 200

    def __post_init__(self):
        if self.r_th < 0 or self.r_th_d < 0:
            raise ValueError("rate thresholds must be non-negative")
        if self.expectation_samples < 1:
            raise ValueError("expectation_samples must be >= 1")
        if self.eav_distance_min <= 0:
            raise ValueError("eav_distance_min must be positive")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")


@dataclass
class UnknownCsiSolution:
    pa: PowerAllocation
    beam: BeamformerSolution
    rate_bundle: RateBundle
    relay_caps: tuple[float, float]
    dest_rate: float  # RF destination rate, jamming-free
    eta: float
    avg_secrecy_rate: float = math.nan
    flags: list[str] = field(default_factory=list)

    @property
    def hop_bound(self) -> float:
        """VLC-hop limit on the RF secrecy rate, min R_{ui->D} / eta."""
        return self.rate_bundle.relay_bound / self.eta


def pd_star_unknown(ch: ChannelSet, r_th_d: float, eta: float, p1: float, p2: float,
                    k, fe, full_log_exponent: bool = True) -> float:
    """Smallest PD letting both relays carry the destination target rate."""
    return pd_for_relay_rate(eta * r_th_d, ch, p1, p2, k, fe, half_log=not full_log_exponent)


def _mrt_direction(hD: np.ndarray) -> np.ndarray:
    mag = np.abs(hD)
    return np.where(mag > 0, hD / np.where(mag > 0, mag, 1), 1.0)


def _null_jammer(hD: np.ndarray, beta: float) -> np.ndarray:
    # conjugated so that hD^H n_a vanishes for complex channels
    return beta * np.array([np.conj(hD[1]), -np.conj(hD[0])])


def _vlc_side(ch: ChannelSet, cfg: UnknownCsiConfig, params: SystemParams, pd: float | None):
    fe, k = params.fe, params.k
    p1, p2 = optimal_message_powers(ch, cfg.r_th, k, fe)
    head = fe.max_current / 2 - math.sqrt(p1) - math.sqrt(p2)
    if head < 0:
        raise QosInfeasibleError(f"R_th={cfg.r_th} needs more than I_H/2 of signal swing")
    if pd is None:
        pd = head**2
    elif math.sqrt(pd) > head * (1 + 1e-12):
        raise QosInfeasibleError(f"PD={pd:.6g} for R_thD={cfg.r_th_d} exceeds the headroom")
    b = fe.max_current - math.sqrt(p1) - math.sqrt(p2) - math.sqrt(pd)
    pa = PowerAllocation(p1, p2, pd, b)
    return pa, noma_rates(pa, ch, k, fe), relay_powers(ch, b, params)


def baseline_mrt_plan(ch: ChannelSet, cfg: UnknownCsiConfig,
                      params: SystemParams) -> UnknownCsiSolution:
    pa, rates, caps = _vlc_side(ch, cfg, params, None)
    w = np.sqrt(caps) * _mrt_direction(ch.hD)
    dest = float(0.5 * np.log2(1 + rx_power(ch.hD, w) / params.k.sigma_rf_sq))
    beam = BeamformerSolution(w=w, n_a=np.zeros(2, complex))
    return UnknownCsiSolution(pa, beam, rates, caps, dest, params.k.eta)


def _best_beta_for_direction(u, hD, caps, g, need):
    """Largest jamming scale when the beam points along ``u``.

    The beam takes the smallest scale meeting |hD^H w|^2 >= need; whatever
    each user has left goes to jamming.  Returns (beta, w) or (None, None).
    """
    gain = float(rx_power(hD, u))
    if gain <= 0:
        return None, None
    w = u * math.sqrt(need / gain)
    left = np.asarray(caps) - np.abs(w) ** 2
    if np.any(left < -1e-12 * np.asarray(caps)):
        return None, None
    beta = math.sqrt(max(0.0, float(np.min(np.maximum(left, 0) / g))))
    return beta, w


def _an_solution(ch, cfg, params, beam_fn):
    k = params.k
    pd = pd_star_unknown(ch, cfg.r_th_d, k.eta, *optimal_message_powers(ch, cfg.r_th, k, params.fe),
                         k, params.fe, cfg.full_log_exponent)
    pa, rates, caps = _vlc_side(ch, cfg, params, pd)
    need = k.sigma_rf_sq * (2 ** (2 * cfg.r_th_d) - 1)
    g = jamming_gains(ch.hD, cfg.shared_jamming_gain)
    beam = beam_fn(ch, caps, g, need, cfg, k)
    dest = float(0.5 * np.log2(1 + rx_power(ch.hD, beam.w) / k.sigma_rf_sq))
    sol = UnknownCsiSolution(pa, beam, rates, caps, dest, k.eta)
    if beam.flag:
        sol.flags.append(beam.flag)
    return sol


def _sdr_beam(ch, caps, g, need, cfg, k) -> BeamformerSolution:
    HD = np.outer(ch.hD, ch.hD.conj())
    out = solve_an_power_sdp(HD, ch.hD, *caps, cfg.r_th_d, k.sigma_rf_sq,
                             shared_gain=cfg.shared_jamming_gain)
    if out.status == "infeasible":
        # destination target out of reach even without jamming
        w = np.sqrt(caps) * _mrt_direction(ch.hD)
        return BeamformerSolution(w=w, n_a=np.zeros(2, complex), beta=0.0,
                                  achieved_objective=0.0, flag="an-infeasible-baseline")
    if need <= 0:
        beta = out.scalar
        return BeamformerSolution(w=np.zeros(2, complex), n_a=_null_jammer(ch.hD, beta),
                                  beta=beta, achieved_objective=beta)
    u, not_rank_one = extract_rank_one(out.beam_matrix)
    cands = [u]
    flag = ""
    if out.status != "optimal" or not_rank_one:
        # rank-one safety net: directions drawn from CN(0, W), each scored by
        # the jamming it leaves room for
        rng = np.random.default_rng(0)
        ev, U = np.linalg.eigh(0.5 * (out.beam_matrix + out.beam_matrix.conj().T))
        root = U * np.sqrt(np.clip(ev, 0, None))
        z = (rng.standard_normal((cfg.randomization_samples, 2))
             + 1j * rng.standard_normal((cfg.randomization_samples, 2))) / math.sqrt(2)
        cands += list(z @ root.T)
        flag = "randomized"
    best = (None, None)
    for v in cands:
        beta, w = _best_beta_for_direction(v, ch.hD, caps, g, need)
        if beta is not None and (best[0] is None or beta > best[0]):
            best = (beta, w)
    if best[0] is None:
        # the relaxation is feasible but no sampled direction is; MRT always
        # reaches the target when the relaxation does
        best = _best_beta_for_direction(_mrt_direction(ch.hD) * np.sqrt(caps), ch.hD, caps,
                                        g, need)
        flag = "randomized-mrt"
    beta, w = best
    return BeamformerSolution(w=w, n_a=_null_jammer(ch.hD, beta), beta=beta,
                              achieved_objective=beta, flag=flag)


def _alpha_max(beta, caps, hD_abs2, g):
    left = np.asarray(caps) - beta**2 * g
    if np.any(left < 0):
        return None
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(hD_abs2 > 0, np.sqrt(left / np.where(hD_abs2 > 0, hD_abs2, 1)), 0.0)


def _mrt_beam(ch, caps, g, need, cfg, k, tol=1e-13, max_iter=200) -> BeamformerSolution:
    hD_abs2 = np.abs(ch.hD) ** 2
    target = math.sqrt(need)

    def feasible(beta):
        a = _alpha_max(beta, caps, hD_abs2, g)
        return a is not None and float(a @ hD_abs2) >= target

    if not feasible(0.0):
        raise QosInfeasibleError(f"R_thD={cfg.r_th_d} unreachable with full-power MRT")
    lo, hi = 0.0, math.sqrt(float(np.min(np.asarray(caps) / g)))
    if feasible(hi):
        lo = hi
    else:
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            if feasible(mid):
                lo = mid
            else:
                hi = mid
            if hi - lo <= tol * hi:
                break
    alpha = _alpha_max(lo, caps, hD_abs2, g)
    # spend only what the target needs on the beam; the rest stays unused
    amp = float(alpha @ hD_abs2)
    if target > 0 and amp > target:
        alpha = alpha * (target / amp)
    w = alpha * ch.hD
    return BeamformerSolution(w=w, n_a=_null_jammer(ch.hD, lo), beta=lo,
                              alpha=(float(alpha[0]), float(alpha[1])), achieved_objective=lo)


def an_sdr_plan(ch: ChannelSet, cfg: UnknownCsiConfig, params: SystemParams) -> UnknownCsiSolution:
    return _an_solution(ch, cfg, params, _sdr_beam)


def an_mrt_plan(ch: ChannelSet, cfg: UnknownCsiConfig, params: SystemParams) -> UnknownCsiSolution:
    return _an_solution(ch, cfg, params, _mrt_beam)


PLANS: dict[str, Callable] = {BASELINE_MRT: baseline_mrt_plan, AN_SDR: an_sdr_plan,
                              AN_MRT: an_mrt_plan}


@dataclass(frozen=True)
class EavesdropperRing:
    """Eavesdropper at a fixed distance from the cell centre, uniform azimuth,
    with independent shadowing and fading on each draw."""

    users_xy: np.ndarray
    radius: float
    rf: RfModel

    def __call__(self, rng: np.random.Generator, n: int) -> np.ndarray:
        a = 2 * math.pi * rng.random(n)
        pts = self.radius * np.column_stack([np.cos(a), np.sin(a)])
        normals = rng.standard_normal((n, 2, 3))
        return rf_channels_to(self.users_xy, pts, self.rf, normals)


def expected_secrecy_rate(sol: UnknownCsiSolution, ch: ChannelSet,
                          eav_sampler: Callable[[np.random.Generator, int], np.ndarray],
                          n: int, rng: np.random.Generator, clamp_per_draw: bool = False,
                          sigma_rf_sq: float | None = None) -> float:
    """Average secrecy rate over ``n`` eavesdropper draws, capped by the VLC hop.

    The RF term averages dest - eav rate; by default the clamp at zero is
    applied to the average, ``clamp_per_draw`` clamps each draw instead.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    s2 = sigma_rf_sq if sigma_rf_sq is not None else RfModel().noise_power
    hE = np.asarray(eav_sampler(rng, n))
    dest, eav = an_rate_terms(sol.beam.w, sol.beam.n_a, ch.hD, hE, s2)
    diff = dest - eav
    rf = float(np.mean(np.maximum(diff, 0.0))) if clamp_per_draw else max(0.0, float(np.mean(diff)))
    return min(sol.hop_bound, rf)


def solve_unknown_csi(ch: ChannelSet, cfg: UnknownCsiConfig, params: SystemParams,
                      rng: np.random.Generator, eav_sampler=None) -> UnknownCsiSolution:
    """Plan for ``cfg.method`` and fill in its average secrecy rate."""
    sol = PLANS[cfg.method](ch, cfg, params)
    if eav_sampler is None:
        if ch.users is None:
            raise ValueError("channel set carries no user positions; pass eav_sampler")
        eav_sampler = EavesdropperRing(ch.users, cfg.eav_distance_min, params.rf)
    sol.avg_secrecy_rate = expected_secrecy_rate(sol, ch, eav_sampler, cfg.expectation_samples,
                                                 rng, cfg.clamp_per_draw, params.k.sigma_rf_sq)
    return sol
