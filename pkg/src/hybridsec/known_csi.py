"""Joint power, DC-bias and beamforming design when the eavesdropper's CSI is known.

Message powers are the smallest values meeting the entrusted users' QoS.
The destination message power PD is found by bisection: lowering PD raises
the DC bias (more harvested relay power, higher RF secrecy rate) but lowers
the rate at which the relays can decode the destination message.  The
bisection looks for the PD where the relay-hop bound is met with equality.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .channels import ChannelSet, VlcFrontEnd
from .errors import QosInfeasibleError, SolverError
from .link import (PowerAllocation, RateBundle, SystemParams, VlcSystemConstants,
                   noma_rates, relay_powers, rf_secrecy_rate, vlc_snr_gain)
from .sdp import (BeamformerSolution, extract_rank_one, gaussian_randomization,
                  secrecy_ratio, solve_secrecy_cc_sdp)

log = logging.getLogger(__name__)

SDR = "sdr"
ZF = "zf"


@dataclass(frozen=True)
class KnownCsiConfig:
    r_th: float = 2.0
    method: str = SDR
    bisection_tol: float = 1e-4
    max_iters: int = 40
    randomization_samples: int = 200

    def __post_init__(self):
        if self.r_th < 0:
            raise ValueError("r_th must be non-negative")
        if self.max_iters < 1 or self.bisection_tol <= 0:
            raise ValueError("max_iters >= 1 and bisection_tol > 0 required")
        if self.method not in (SDR, ZF):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass
class KnownCsiSolution:
    pa: PowerAllocation
    beam: BeamformerSolution
    secrecy_rate: float  # RF-hop secrecy rate R_s, bits/s/Hz
    rate_bundle: RateBundle
    iterations: int
    pd_interval: tuple[float, float]
    residual: float  # |eta R_s - min R_{ui->D}|
    converged: bool
    eta: float
    relay_caps: tuple[float, float]
    # RF secrecy rate the final beam supports before any back-off; differs
    # from secrecy_rate only when the VLC hop is the bottleneck
    rf_only_rate: float
    vlc_limited: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def end_to_end_rate(self) -> float:
        """Secure destination rate R_D = eta * R_s."""
        return self.eta * self.secrecy_rate


def optimal_message_powers(ch: ChannelSet, r_th: float, k: VlcSystemConstants,
                           fe: VlcFrontEnd) -> tuple[float, float]:
    """Smallest P1, P2 giving both entrusted users exactly ``r_th``."""
    if ch.h2 <= 0:
        raise QosInfeasibleError("weaker entrusted user has no VLC channel")
    q = 2 ** (2 * r_th) - 1
    g1, g2 = float(vlc_snr_gain(ch.h1, k, fe)), float(vlc_snr_gain(ch.h2, k, fe))
    p1 = k.sigma_v_sq * q / g1
    p2 = q * (k.sigma_v_sq + g2 * p1) / g2
    return p1, p2


def dc_bias_from_powers(p1: float, p2: float, pd: float, fe: VlcFrontEnd) -> float:
    b = fe.max_current - math.sqrt(p1) - math.sqrt(p2) - math.sqrt(pd)
    if b < fe.max_current / 2 * (1 - 1e-12):
        raise QosInfeasibleError(f"DC bias {b:.6g} A below I_H/2; message powers too large")
    return b


def pd_for_relay_rate(rate: float, ch: ChannelSet, p1: float, p2: float,
                      k: VlcSystemConstants, fe: VlcFrontEnd,
                      half_log: bool = True) -> float:
    """Smallest PD letting both relays decode the destination message at ``rate``.

    ``half_log=False`` inverts log2(1 + SINR) instead of the half-log rate,
    giving the smaller PD that some closed forms use.
    """
    q = 2 ** ((2 if half_log else 1) * rate) - 1
    out = 0.0
    for h in (ch.h1, ch.h2):
        g = float(vlc_snr_gain(h, k, fe))
        out = max(out, q * (k.sigma_v_sq + g * (p1 + p2)) / g)
    return out


def zf_beamformer(ch: ChannelSet, pr1: float, pr2: float) -> BeamformerSolution:
    """Beam in the null space of the eavesdropper channel, largest cap-feasible scale."""
    hE = ch.hE
    if not np.any(np.abs(hE) > 0):
        w = np.sqrt([pr1, pr2]) * np.exp(1j * np.angle(ch.hD))
        return BeamformerSolution(w=w, n_a=np.zeros(2, complex), flag="zf-degenerate-mrt")
    with np.errstate(divide="ignore"):
        a = min(math.sqrt(pr1) / abs(hE[1]) if hE[1] != 0 else math.inf,
                math.sqrt(pr2) / abs(hE[0]) if hE[0] != 0 else math.inf)
    w = a * np.array([np.conj(hE[1]), -np.conj(hE[0])])
    return BeamformerSolution(w=w, n_a=np.zeros(2, complex), a=a)


def sdr_beamformer(ch: ChannelSet, pr1: float, pr2: float, sigma_rf_sq: float,
                   n_random: int = 200, rng=None) -> BeamformerSolution:
    HD = np.outer(ch.hD, ch.hD.conj())
    HE = np.outer(ch.hE, ch.hE.conj())
    out = solve_secrecy_cc_sdp(HD, HE, pr1, pr2, sigma_rf_sq)
    w, flagged = extract_rank_one(out.beam_matrix)
    flag = ""
    if out.status != "optimal" or flagged:
        rng = rng if rng is not None else np.random.default_rng(0)
        w = gaussian_randomization(out.beam_matrix, (pr1, pr2),
                                   lambda v: float(secrecy_ratio(v, ch.hD, ch.hE, sigma_rf_sq)),
                                   n_random, rng)
        flag = "randomized"
    ratio = float(secrecy_ratio(w, ch.hD, ch.hE, sigma_rf_sq))
    return BeamformerSolution(w=w, n_a=np.zeros(2, complex), achieved_objective=ratio,
                              flag=flag)


def _backoff_scale(w: np.ndarray, ch: ChannelSet, target: float, sigma_rf_sq: float) -> float:
    """Factor t <= 1 such that t*w has RF secrecy rate ``target``.

    With A, E the destination and eavesdropper SNRs of w, the rate of t*w is
    1/2 log2((1 + t^2 A)/(1 + t^2 E)); solving for t^2 is linear.
    """
    a = abs(np.vdot(ch.hD, w)) ** 2 / sigma_rf_sq
    e = abs(np.vdot(ch.hE, w)) ** 2 / sigma_rf_sq
    r = 2 ** (2 * target)
    t2 = (r - 1) / (a - r * e)
    return math.sqrt(min(1.0, max(0.0, t2)))


@dataclass
class _Eval:
    pd: float
    b: float
    beam: BeamformerSolution
    rs: float
    rates: RateBundle
    caps: tuple[float, float]

    def predicate(self, eta):
        return eta * self.rs - self.rates.relay_bound


def solve_known_csi(ch: ChannelSet, cfg: KnownCsiConfig, params: SystemParams,
                    rng=None) -> KnownCsiSolution:
    fe, k = params.fe, params.k
    p1, p2 = optimal_message_powers(ch, cfg.r_th, k, fe)
    head = fe.max_current / 2 - math.sqrt(p1) - math.sqrt(p2)
    if head < 0:
        raise QosInfeasibleError(f"R_th={cfg.r_th} needs more than I_H/2 of signal swing")
    pd_max = head**2

    def evaluate(pd: float) -> _Eval:
        b = fe.max_current - math.sqrt(p1) - math.sqrt(p2) - math.sqrt(pd)
        caps = relay_powers(ch, b, params)
        try:
            if cfg.method == ZF:
                beam = zf_beamformer(ch, *caps)
            else:
                beam = sdr_beamformer(ch, *caps, k.sigma_rf_sq, cfg.randomization_samples, rng)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise SolverError(f"inner {cfg.method} solve failed at PD={pd:.6g}: {exc}") from exc
        rs = rf_secrecy_rate(beam.w, ch, k)
        return _Eval(pd, b, beam, rs, noma_rates(PowerAllocation(p1, p2, pd, b), ch, k, fe), caps)

    top = evaluate(pd_max)
    # lower bracket from the secrecy rate at the largest PD; the log2 form is
    # looser than the half-log one, and both keep the predicate >= 0 there
    lo = min(pd_for_relay_rate(k.eta * top.rs, ch, p1, p2, k, fe, half_log=False), pd_max)
    interval = (lo, pd_max)
    best, iters, converged, vlc_limited = top, 0, False, False
    rf_only = top.rs
    notes: list[str] = []

    if top.predicate(k.eta) > 0:
        # relay hop is the bottleneck even at the largest PD; trade beam power
        # for an RF secrecy rate that the relays can carry
        vlc_limited = True
        target = top.rates.relay_bound / k.eta
        scale = _backoff_scale(top.beam.w, ch, target, k.sigma_rf_sq)
        top.beam.w = top.beam.w * scale
        if top.beam.a == top.beam.a:
            top.beam.a *= scale
        top.rs = rf_secrecy_rate(top.beam.w, ch, k)
        converged = True
    else:
        a1, a2 = lo, pd_max
        prev_pred = prev_pd = None
        for iters in range(1, cfg.max_iters + 1):
            ev = evaluate(0.5 * (a1 + a2))
            pred = ev.predicate(k.eta)
            if prev_pred is not None and pred > prev_pred + 1e-9 and ev.pd > prev_pd:
                notes.append(f"non-monotone predicate near PD={ev.pd:.6g}")
                log.debug(notes[-1])
            prev_pred, prev_pd = pred, ev.pd
            if pred < 0:
                a2, best, rf_only = ev.pd, ev, ev.rs
                if -pred <= cfg.bisection_tol:
                    converged = True
                    break
            else:
                a1 = ev.pd
            if a2 - a1 <= 1e-15 * pd_max:
                break
        if not converged and -best.predicate(k.eta) <= cfg.bisection_tol:
            converged = True

    beam = best.beam
    beam.achieved_objective = float(secrecy_ratio(beam.w, ch.hD, ch.hE, k.sigma_rf_sq))
    return KnownCsiSolution(
        pa=PowerAllocation(p1, p2, best.pd, best.b), beam=beam, secrecy_rate=best.rs,
        rate_bundle=best.rates, iterations=iters, pd_interval=interval,
        residual=abs(best.predicate(k.eta)), converged=converged, eta=k.eta,
        relay_caps=best.caps, rf_only_rate=rf_only, vlc_limited=vlc_limited, notes=notes)
