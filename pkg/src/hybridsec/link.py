"""Rate, secrecy and energy-harvesting expressions for the two-hop link."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import ChannelSet, RfModel, VlcFrontEnd

C_CONST = 1 / (2 * math.pi * math.e)


@dataclass(frozen=True)
class PowerAllocation:
    """Peak electrical powers (A^2) of the three NOMA messages and DC bias (A)."""

    p1: float
    p2: float
    pd: float
    dc_bias: float

    @property
    def amplitude_sum(self) -> float:
        return math.sqrt(self.p1) + math.sqrt(self.p2) + math.sqrt(self.pd)


@dataclass(frozen=True)
class VlcSystemConstants:
    c_const: float
    eta: float
    sigma_v_sq: float
    sigma_rf_sq: float

    def __post_init__(self):
        if not 0 < self.eta <= 1:
            raise ValueError("eta must lie in (0, 1]")
        if self.sigma_v_sq <= 0 or self.sigma_rf_sq <= 0:
            raise ValueError("noise variances must be positive")

    @classmethod
    def from_frontends(cls, fe: VlcFrontEnd, rf: RfModel, eta: float | None = None):
        if eta is None:
            eta = rf.bandwidth / fe.bandwidth
        return cls(C_CONST, eta, fe.noise_variance, rf.noise_power)


@dataclass(frozen=True)
class EnergyHarvestParams:
    fill_factor: float = 0.75
    thermal_voltage: float = 0.025  # V
    dark_current: float = 1e-10  # A

    def __post_init__(self):
        if not 0 < self.fill_factor <= 1:
            raise ValueError("fill_factor must lie in (0, 1]")
        if self.thermal_voltage <= 0 or self.dark_current <= 0:
            raise ValueError("thermal_voltage and dark_current must be positive")


@dataclass(frozen=True)
class RateBundle:
    r_u1: float
    r_u2: float
    r_u1_to_d: float
    r_u2_to_d: float

    @property
    def relay_bound(self) -> float:
        """Rate of the destination message the weaker relay can still decode."""
        return min(self.r_u1_to_d, self.r_u2_to_d)


@dataclass(frozen=True)
class SystemParams:
    """Everything a solver needs besides the channel draw."""

    fe: VlcFrontEnd = field(default_factory=VlcFrontEnd)
    rf: RfModel = field(default_factory=RfModel)
    eh: EnergyHarvestParams = field(default_factory=EnergyHarvestParams)
    eta: float = 0.8

    @property
    def k(self) -> VlcSystemConstants:
        return VlcSystemConstants.from_frontends(self.fe, self.rf, self.eta)


def vlc_snr_gain(h, k: VlcSystemConstants, fe: VlcFrontEnd):
    """c * rho^2 * nu^2 * h^2: electrical SNR numerator per unit peak power."""
    return k.c_const * fe.oe_factor**2 * fe.eo_factor**2 * np.square(h)


def _half_log(x):
    return 0.5 * np.log2(1 + x)


def noma_rates(pa: PowerAllocation, ch: ChannelSet, k: VlcSystemConstants,
               fe: VlcFrontEnd) -> RateBundle:
    g1 = float(vlc_snr_gain(ch.h1, k, fe))
    g2 = float(vlc_snr_gain(ch.h2, k, fe))
    s = k.sigma_v_sq
    return RateBundle(
        r_u1=float(_half_log(g1 * pa.p1 / s)),
        r_u2=float(_half_log(g2 * pa.p2 / (s + g2 * pa.p1))),
        r_u1_to_d=float(_half_log(g1 * pa.pd / (s + g1 * (pa.p1 + pa.p2)))),
        r_u2_to_d=float(_half_log(g2 * pa.pd / (s + g2 * (pa.p1 + pa.p2)))),
    )


def harvested_power(h, b, eh: EnergyHarvestParams, fe: VlcFrontEnd):
    """Electrical power harvested from the DC component at a photodiode."""
    i_dc = fe.oe_factor * fe.eo_factor * np.asarray(h, dtype=float) * b
    out = eh.fill_factor * eh.thermal_voltage * i_dc * np.log1p(i_dc / eh.dark_current)
    return float(out) if np.ndim(out) == 0 else out


def relay_powers(ch: ChannelSet, b: float, params: SystemParams) -> tuple[float, float]:
    pr = harvested_power(np.array([ch.h1, ch.h2]), b, params.eh, params.fe)
    return float(pr[0]), float(pr[1])


def rx_power(h, w):
    """|h^H w|^2, broadcasting over leading axes of ``h``."""
    return np.abs(np.sum(np.conj(h) * w, axis=-1)) ** 2


def secrecy_difference(w, hD, hE, sigma_rf_sq):
    """Unclamped destination-minus-eavesdropper rate (bits/s/Hz)."""
    return _half_log(rx_power(hD, w) / sigma_rf_sq) - _half_log(rx_power(hE, w) / sigma_rf_sq)


def rf_secrecy_rate(w, ch: ChannelSet, k: VlcSystemConstants) -> float:
    return max(0.0, float(secrecy_difference(np.asarray(w), ch.hD, ch.hE, k.sigma_rf_sq)))


def an_rate_terms(w, n_a, hD, hE, sigma_rf_sq):
    """Destination and eavesdropper rates when ``n_a`` carries jamming noise.

    The destination term ignores ``n_a``: it lies in the null space of hD.
    ``hE`` may carry leading batch axes.
    """
    dest = _half_log(rx_power(hD, w) / sigma_rf_sq)
    eav = _half_log(rx_power(hE, w) / (sigma_rf_sq + rx_power(hE, n_a)))
    return dest, eav


def an_rf_secrecy_terms(w, n_a, ch: ChannelSet, k: VlcSystemConstants) -> tuple[float, float]:
    dest, eav = an_rate_terms(np.asarray(w), np.asarray(n_a), ch.hD, ch.hE, k.sigma_rf_sq)
    return float(dest), float(eav)


@dataclass
class FeasibilityReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def check_feasibility(pa: PowerAllocation, rates: RateBundle, *, max_current: float,
                      r_th: float, eta: float = 1.0, secrecy_rate: float | None = None,
                      r_th_d: float | None = None, beam_powers=None, relay_caps=None,
                      rtol: float = 1e-8) -> FeasibilityReport:
    """Evaluate the constraints of the active problem.

    ``secrecy_rate`` activates the relay-hop bound eta*R_s <= R_{ui->D};
    ``r_th_d`` activates eta*R_thD <= R_{ui->D}; ``beam_powers`` (per-user
    transmit power) is checked against ``relay_caps``.
    """
    rep = FeasibilityReport()
    bad = rep.violations.append
    ih = max_current
    if min(pa.p1, pa.p2, pa.pd) < 0:
        bad("negative message power")
    if pa.dc_bias < ih / 2 * (1 - rtol):
        bad(f"dc bias {pa.dc_bias:.6g} below I_H/2")
    if pa.dc_bias > ih * (1 + rtol):
        bad(f"dc bias {pa.dc_bias:.6g} above I_H")
    if pa.amplitude_sum + pa.dc_bias > ih * (1 + rtol):
        bad("amplitude budget sqrt(P1)+sqrt(P2)+sqrt(PD)+b exceeds I_H")
    for name, r in (("R_u1", rates.r_u1), ("R_u2", rates.r_u2)):
        if r < r_th - rtol * max(1.0, r_th):
            bad(f"{name}={r:.6g} below R_th={r_th:.6g}")
    for target, label in ((secrecy_rate, "R_s"), (r_th_d, "R_thD")):
        if target is None:
            continue
        need = eta * target
        for name, r in (("R_u1->D", rates.r_u1_to_d), ("R_u2->D", rates.r_u2_to_d)):
            if r < need - rtol * max(1.0, need):
                bad(f"{name}={r:.6g} below eta*{label}={need:.6g}")
    if beam_powers is not None:
        for i, (p, cap) in enumerate(zip(beam_powers, relay_caps), start=1):
            if p > cap * (1 + rtol):
                bad(f"relay {i} transmit power {p:.6g} exceeds harvested {cap:.6g}")
    return rep
