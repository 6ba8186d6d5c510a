"""Received intensity per subchannel, blind regions and detection-limited rates.

A location is blind on subchannel i when the intensity collected across
that subchannel falls strictly below ``delta * w``.  Gamma counts the blind
subchannels at a location; the blind region is every location with
Gamma >= 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .antennas import AngleGrid, AntennaModel
from .errors import OutOfRange, PolicyInfeasible

LN2 = math.log(2.0)


# -- plan -----------------------------------------------------------------------

@dataclass(frozen=True)
class EqualizeAtBob:
    """Piecewise-constant transmit density giving Bob the same intensity on every subchannel.

    Give either the target intensity ``s_bob`` (W/m^2) or ``p_ab_db``, the
    target normalized to ``delta * w``.  A channel whose mean normalized gain
    toward Bob is below ``min_gain`` cannot be equalized.
    """

    s_bob: float | None = None
    p_ab_db: float | None = None
    min_gain: float = 1e-5

    def __post_init__(self):
        if (self.s_bob is None) == (self.p_ab_db is None):
            raise ValueError("give exactly one of s_bob and p_ab_db")
        if self.s_bob is not None and self.s_bob <= 0:
            raise ValueError("s_bob must be positive")

    def target(self, plan: TransmissionPlan) -> float:
        if self.s_bob is not None:
            return self.s_bob
        return s_bob_from_p_ab(self.p_ab_db, plan.delta, plan.w)


@dataclass(frozen=True)
class UniformSpectralDensity:
    """Flat transmit spectrum.

    Either ``p0`` in W/Hz directly, or ``p_ab_db`` measured at Bob over a
    w-wide band centred on f_C.
    """

    p0: float | None = None
    p_ab_db: float | None = None

    def __post_init__(self):
        if (self.p0 is None) == (self.p_ab_db is None):
            raise ValueError("give exactly one of p0 and p_ab_db")
        if self.p0 is not None and self.p0 <= 0:
            raise ValueError("p0 must be positive")


@dataclass(frozen=True)
class TransmissionPlan:
    f_low: float
    f_high: float
    q: int
    delta: float
    power_policy: EqualizeAtBob | UniformSpectralDensity = field(
        default_factory=lambda: EqualizeAtBob(p_ab_db=35.0))
    quadrature_points: int = 9

    def __post_init__(self):
        if not self.f_low < self.f_high:
            raise ValueError("f_low must be below f_high")
        if self.q < 1:
            raise ValueError("q must be at least 1")
        if not self.delta > 0:
            raise ValueError("detection threshold delta must be positive")
        if self.quadrature_points < 1:
            raise ValueError("need at least one quadrature point")

    @classmethod
    def centered(cls, f_center: float, bandwidth: float, w: float, delta: float, **kwargs) -> TransmissionPlan:
        """Band of width ``bandwidth`` around ``f_center`` sliced into channels of width ``w``."""
        ratio = bandwidth / w
        q = int(round(ratio))
        if q < 1 or abs(ratio - q) > 1e-9 * max(1.0, ratio):
            raise ValueError(f"bandwidth {bandwidth:g} Hz is not a whole number of {w:g} Hz channels")
        return cls(f_center - bandwidth / 2.0, f_center + bandwidth / 2.0, q, delta, **kwargs)

    @property
    def bandwidth(self) -> float:
        return self.f_high - self.f_low

    @property
    def w(self) -> float:
        return (self.f_high - self.f_low) / self.q

    @property
    def f_center(self) -> float:
        return 0.5 * (self.f_low + self.f_high)

    @property
    def threshold(self) -> float:
        """Intensity below which a subchannel is undetectable, delta * w."""
        return self.delta * self.w

    def centers(self) -> np.ndarray:
        return self.f_low + self.w * (np.arange(self.q) + 0.5)

    def replace(self, **changes) -> TransmissionPlan:
        return replace(self, **changes)


@dataclass(frozen=True)
class Location:
    r: float
    theta: float  # radians

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("range must be positive")

    @classmethod
    def from_degrees(cls, r: float, theta_deg: float) -> Location:
        return cls(r, math.radians(theta_deg))


@dataclass(frozen=True)
class FreeSpaceSpherical:
    """Isotropic spreading, gamma(r, f) = 1 / (4 pi r^2); no frequency dependence."""

    kind = "free_space"

    def __call__(self, r, f=None):
        r = np.asarray(r, dtype=float)
        g = 1.0 / (4.0 * np.pi * r * r)
        if f is None:
            return g
        return np.broadcast_to(g, np.broadcast_shapes(np.shape(g), np.shape(f)))


# -- spectral integration ----------------------------------------------------------

def _nodes(centers: np.ndarray, w: float, points: int) -> tuple[np.ndarray, np.ndarray]:
    x, wt = leggauss(points)
    freqs = centers[:, None] + 0.5 * w * x[None, :]
    return freqs, 0.5 * w * wt


def band_integrals(antenna: AntennaModel, centers, w: float, thetas, gain_model, r: float,
                   points: int = 9) -> np.ndarray:
    """Gauss-Legendre estimate of int gamma(r, f) G(f, theta) df over each band.

    Returns an array of shape (len(thetas), len(centers)).
    """
    centers = np.atleast_1d(np.asarray(centers, dtype=float))
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    freqs, weights = _nodes(centers, w, points)
    q, m = freqs.shape
    g = antenna.gain(freqs.reshape(1, -1), thetas[:, None]).reshape(thetas.size, q, m)
    gamma = np.asarray(gain_model(r, freqs), dtype=float)
    acc = np.zeros((thetas.size, q))
    # explicit node loop keeps every cell's reduction order independent of batch shape
    for k in range(m):
        acc += weights[k] * gamma[None, :, k] * g[:, :, k]
    return acc


def channel_integrals(plan: TransmissionPlan, antenna: AntennaModel, gain_model, r: float, thetas) -> np.ndarray:
    return band_integrals(antenna, plan.centers(), plan.w, thetas, gain_model, r, plan.quadrature_points)


# -- power policies -----------------------------------------------------------------

def equalize_power_at_bob(plan: TransmissionPlan, antenna: AntennaModel, gain_model, bob: Location,
                          policy: EqualizeAtBob | None = None) -> np.ndarray:
    """Per-channel transmit density (W/Hz) that lands exactly ``S_Bob`` on Bob in every channel."""
    policy = policy or plan.power_policy
    if not isinstance(policy, EqualizeAtBob):
        raise TypeError("plan does not use an EqualizeAtBob policy")
    integ = channel_integrals(plan, antenna, gain_model, bob.r, [bob.theta])[0]
    mean_gain = integ / (plan.w * np.asarray(gain_model(bob.r, plan.centers()), dtype=float))
    bad = np.flatnonzero(~(mean_gain >= policy.min_gain))
    if bad.size:
        raise PolicyInfeasible(bad.tolist())
    return policy.target(plan) / integ


def uniform_density(plan: TransmissionPlan, antenna: AntennaModel, gain_model, bob: Location,
                    policy: UniformSpectralDensity | None = None) -> np.ndarray:
    policy = policy or plan.power_policy
    if policy.p0 is not None:
        return np.full(plan.q, float(policy.p0))
    ref = band_integrals(antenna, [plan.f_center], plan.w, [bob.theta], gain_model, bob.r,
                         plan.quadrature_points)[0, 0]
    if not ref > 0:
        raise PolicyInfeasible([], "Bob receives nothing at the centre frequency")
    p0 = s_bob_from_p_ab(policy.p_ab_db, plan.delta, plan.w) / ref
    return np.full(plan.q, p0)


def transmit_density(plan: TransmissionPlan, antenna: AntennaModel, gain_model, bob: Location) -> np.ndarray:
    """Resolve the plan's power policy into per-channel transmit densities (W/Hz)."""
    if isinstance(plan.power_policy, EqualizeAtBob):
        return equalize_power_at_bob(plan, antenna, gain_model, bob)
    return uniform_density(plan, antenna, gain_model, bob)


def intensities(plan: TransmissionPlan, antenna: AntennaModel, gain_model, r: float, thetas,
                density: np.ndarray) -> np.ndarray:
    """Received intensity (W/m^2) per (angle, channel) for resolved transmit densities."""
    return channel_integrals(plan, antenna, gain_model, r, thetas) * np.asarray(density)[None, :]


def received_intensity(plan: TransmissionPlan, antenna: AntennaModel, gain_model, loc: Location, i: int,
                       density: np.ndarray | None = None, bob: Location | None = None) -> float:
    """Intensity collected in subchannel ``i`` at ``loc``.

    ``density`` is the per-channel transmit density; when omitted it is
    resolved from the plan's policy, which needs ``bob`` for equalization.
    """
    if not 0 <= i < plan.q:
        raise IndexError(f"channel {i} out of range for q={plan.q}")
    if density is None:
        if bob is None and isinstance(plan.power_policy, EqualizeAtBob):
            raise ValueError("equalized plans need Bob's location or resolved densities")
        density = transmit_density(plan, antenna, gain_model, bob or loc)
    return float(intensities(plan, antenna, gain_model, loc.r, [loc.theta], density)[0, i])


def is_blind(s: np.ndarray, plan: TransmissionPlan) -> np.ndarray:
    return np.asarray(s) < plan.threshold


def blind_mask_at(plan: TransmissionPlan, antenna: AntennaModel, gain_model, loc: Location,
                  density: np.ndarray) -> np.ndarray:
    """Boolean per-channel blindness at one location."""
    return is_blind(intensities(plan, antenna, gain_model, loc.r, [loc.theta], density)[0], plan)


def p_ab(s_bob: float, delta: float, w: float) -> float:
    """Bob's intensity normalized to delta * w, in dB."""
    return 10.0 * math.log10(s_bob / (delta * w))


def s_bob_from_p_ab(p_ab_db: float, delta: float, w: float) -> float:
    return delta * w * 10.0 ** (p_ab_db / 10.0)


# -- blind maps ------------------------------------------------------------------------

@dataclass
class BlindMap:
    grid: AngleGrid
    theta_deg: np.ndarray
    per_channel_blind: np.ndarray  # (q, n) bool
    intensity: np.ndarray  # (n, q)
    threshold: float
    gamma: np.ndarray = field(init=False)

    def __post_init__(self):
        self.gamma = self.per_channel_blind.sum(axis=0).astype(int)

    @property
    def q(self) -> int:
        return self.per_channel_blind.shape[0]

    @property
    def blind_fraction(self) -> float:
        return float(np.count_nonzero(self.gamma > 0)) / self.gamma.size

    def blind_fraction_excluding_lobe(self, theta_bob_deg: float = 0.0) -> float:
        """Blind fraction with Bob's contiguous non-blind lobe removed from the denominator."""
        lobe = main_lobe_mask(self.theta_deg, self.gamma, theta_bob_deg)
        rest = ~lobe
        if not rest.any():
            return 0.0
        return float(np.count_nonzero(self.gamma[rest] > 0)) / np.count_nonzero(rest)


def main_lobe_mask(theta_deg: np.ndarray, gamma: np.ndarray, theta_bob_deg: float = 0.0) -> np.ndarray:
    """Contiguous run of Gamma == 0 samples containing the grid point nearest Bob."""
    mask = np.zeros(gamma.size, dtype=bool)
    i = int(np.argmin(np.abs(theta_deg - theta_bob_deg)))
    if gamma[i] != 0:
        return mask
    lo = i
    while lo > 0 and gamma[lo - 1] == 0:
        lo -= 1
    hi = i
    while hi < gamma.size - 1 and gamma[hi + 1] == 0:
        hi += 1
    mask[lo:hi + 1] = True
    return mask


def compute_blind_map(plan: TransmissionPlan, antenna: AntennaModel, gain_model, eve_range: float,
                      grid: AngleGrid | None = None, bob: Location | None = None,
                      density: np.ndarray | None = None) -> BlindMap:
    """Gamma over an angular grid at range ``eve_range``.

    Bob defaults to boresight at the same range as Eve.
    """
    grid = grid or AngleGrid()
    bob = bob or Location(eve_range, 0.0)
    if density is None:
        density = transmit_density(plan, antenna, gain_model, bob)
    s = intensities(plan, antenna, gain_model, eve_range, grid.radians(), density)
    return BlindMap(grid, grid.degrees(), is_blind(s, plan).T, s, plan.threshold)


@dataclass(frozen=True)
class SweepPoint:
    value: float
    blind_fraction: float
    error: str | None = None


SWEEP_KINDS = ("bandwidth", "w", "p_ab")


def swept_plan(base: TransmissionPlan, kind: str, value: float) -> TransmissionPlan:
    if kind == "bandwidth":
        return TransmissionPlan.centered(base.f_center, value, base.w, base.delta,
                                         power_policy=base.power_policy,
                                         quadrature_points=base.quadrature_points)
    if kind == "w":
        return TransmissionPlan.centered(base.f_center, base.bandwidth, value, base.delta,
                                         power_policy=base.power_policy,
                                         quadrature_points=base.quadrature_points)
    if kind == "p_ab":
        pol = base.power_policy
        if isinstance(pol, EqualizeAtBob):
            return base.replace(power_policy=EqualizeAtBob(p_ab_db=value, min_gain=pol.min_gain))
        return base.replace(power_policy=UniformSpectralDensity(p_ab_db=value))
    raise ValueError(f"unknown sweep kind {kind!r}; choose from {SWEEP_KINDS}")


def blind_fraction_sweep(base_plan: TransmissionPlan, antenna: AntennaModel, kind: str, values: Sequence[float],
                         gain_model=None, grid: AngleGrid | None = None, eve_range: float = 1.0,
                         bob: Location | None = None) -> list[SweepPoint]:
    """Blind fraction for each swept value; a failing point is recorded and skipped."""
    gain_model = gain_model or FreeSpaceSpherical()
    out = []
    for v in values:
        try:
            plan = swept_plan(base_plan, kind, v)
            bm = compute_blind_map(plan, antenna, gain_model, eve_range, grid, bob)
            out.append(SweepPoint(float(v), bm.blind_fraction))
        except (ValueError, PolicyInfeasible) as exc:
            out.append(SweepPoint(float(v), float("nan"), f"{type(exc).__name__}: {exc}"))
    return out


# -- rates and thresholds ------------------------------------------------------------------

def subchannel_capacity(power: float, delta: float, w: float) -> float:
    """Detection-limited capacity (w / 2) ln(1 + P / (delta w)) in nats/s."""
    return 0.5 * w * math.log1p(power / (delta * w))


def subchannel_capacity_bits(power: float, delta: float, w: float) -> float:
    return subchannel_capacity(power, delta, w) / LN2


def total_rate(plan: TransmissionPlan, antenna: AntennaModel, gain_model, bob: Location,
               density: np.ndarray | None = None) -> float:
    """Sum of subchannel capacities at Bob, in bits/s."""
    if density is None:
        density = transmit_density(plan, antenna, gain_model, bob)
    s = intensities(plan, antenna, gain_model, bob.r, [bob.theta], density)[0]
    return sum(subchannel_capacity_bits(float(x), plan.delta, plan.w) for x in s)


THERMAL_DELTA_100GHZ = 0.29e-9 / (1e-4 * 1e9)  # 0.29 nW on 1 cm^2 in 1 GHz


def thermal_threshold_default(f: float) -> float:
    """Room-temperature blackbody detection floor in W/(m^2 Hz), Rayleigh-Jeans f^2 scaling."""
    if not 50e9 <= f <= 1e12:
        raise OutOfRange(f"thermal threshold defined for 50 GHz..1 THz, got {f / 1e9:g} GHz")
    return THERMAL_DELTA_100GHZ * (f / 100e9) ** 2
