"""End-to-end Alice -> {Bob, Eve} transmission over frequency subchannels.

Each subchannel either reaches a receiver intact or is erased, and that
decision is the same threshold test used for blind maps.  No independent
thresholding happens here.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import erfc

from .antennas import AngleGrid, AntennaModel, HornWithBlock
from .blind import (
    BlindMap,
    FreeSpaceSpherical,
    Location,
    TransmissionPlan,
    band_integrals,
    blind_mask_at,
    transmit_density,
)
from .coding import (
    LeakageReport,
    Scheme,
    SecrecyCode,
    certify_leakage,
    decode_stream,
    encode_stream,
    pack_bits,
    unpack_symbols,
    worst_individual_leakage,
)
from .errors import ArityError, BobBlind


@dataclass
class LinkScenario:
    plan: TransmissionPlan
    antenna: AntennaModel
    bob: Location
    eve: Location
    code: SecrecyCode
    gain_model: object = field(default_factory=FreeSpaceSpherical)

    def __post_init__(self):
        if self.code.q != self.plan.q:
            raise ArityError(f"code has {self.code.q} channels but the plan has {self.plan.q}")

    def density(self) -> np.ndarray:
        return transmit_density(self.plan, self.antenna, self.gain_model, self.bob)

    def blind_mask(self, loc: Location, density: np.ndarray | None = None) -> np.ndarray:
        if density is None:
            density = self.density()
        return blind_mask_at(self.plan, self.antenna, self.gain_model, loc, density)


def gamma_at(scenario: LinkScenario, loc: Location, density: np.ndarray | None = None) -> int:
    """Number of subchannels undetectable at ``loc``."""
    return int(scenario.blind_mask(loc, density).sum())


@dataclass
class Transcript:
    input_bits: list[int]
    sent: np.ndarray  # (n, q) codeword symbols
    bob_mask: np.ndarray  # per-channel observed flags
    eve_mask: np.ndarray
    bob_bits: list[int]
    leakage: LeakageReport
    pad_bits: int = 0
    fill_symbols: int = 0
    eve_bits: list[int] | None = None  # only when Eve sees every channel

    @property
    def q(self) -> int:
        return self.bob_mask.size

    @property
    def gamma_bob(self) -> int:
        return int(self.q - self.bob_mask.sum())

    @property
    def gamma_eve(self) -> int:
        return int(self.q - self.eve_mask.sum())

    @property
    def eve_observed(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.eve_mask))

    @property
    def eve_received(self) -> np.ma.MaskedArray:
        return np.ma.masked_array(self.sent, mask=np.broadcast_to(~self.eve_mask, self.sent.shape))

    @property
    def bob_received(self) -> np.ma.MaskedArray:
        return np.ma.masked_array(self.sent, mask=np.broadcast_to(~self.bob_mask, self.sent.shape))

    @property
    def bob_messages(self) -> list[int]:
        return self.bob_bits

    @property
    def bob_decoded(self) -> bool:
        return self.bob_bits == self.input_bits

    @property
    def eve_secure(self) -> bool:
        return self.leakage.joint_factorizes

    @property
    def insecure(self) -> bool:
        return not self.eve_secure

    def summary(self) -> dict:
        return {
            "q": self.q,
            "codewords": int(self.sent.shape[0]),
            "message_bits": len(self.input_bits),
            "gamma_bob": self.gamma_bob,
            "gamma_eve": self.gamma_eve,
            "eve_observed_channels": ",".join(str(i + 1) for i in self.eve_observed) or "none",
            "bob_decoded": self.bob_decoded,
            "eve_leakage": self.leakage.summary(),
            "eve_leakage_bits": self.leakage.mutual_information_bits,
            "eve_secure": self.eve_secure,
        }


def run_link(scenario: LinkScenario, message_bits, rng: np.random.Generator | int | None = None) -> Transcript:
    """Pack, encode, erase per receiver, decode for Bob and certify Eve's leakage."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    code = scenario.code
    density = scenario.density()
    bob_blind = scenario.blind_mask(scenario.bob, density)
    if bob_blind.any():
        raise BobBlind(np.flatnonzero(bob_blind).tolist())
    eve_blind = scenario.blind_mask(scenario.eve, density)

    symbols, pad = pack_bits(message_bits, code.field)
    input_bits = unpack_symbols(symbols, code.field, pad)
    sent, fill = encode_stream(code, symbols, rng)
    bob_bits = unpack_symbols(decode_stream(code, sent, fill), code.field, pad)

    observed = np.flatnonzero(~eve_blind)
    if code.scheme is Scheme.PADDED:
        leakage = certify_leakage(code, observed, 0)
    else:
        leakage = worst_individual_leakage(code, observed)
    eve_bits = None
    if observed.size == code.q:
        eve_bits = unpack_symbols(decode_stream(code, sent, fill), code.field, pad)
    return Transcript(input_bits, sent, ~bob_blind, ~eve_blind, bob_bits, leakage, pad, fill, eve_bits)


# -- on-off keying experiment emulation ---------------------------------------

BER_FLOOR = 1e-12


def ook_ber(snr):
    """0.5 erfc(sqrt(SNR) / (2 sqrt 2)), clamped to [1e-12, 0.5]."""
    snr = np.maximum(np.asarray(snr, dtype=float), 0.0)
    return np.clip(0.5 * erfc(np.sqrt(snr) / (2.0 * np.sqrt(2.0))), BER_FLOOR, 0.5)


@dataclass(frozen=True)
class OokPlan:
    """Widely spaced carriers, each equalized to the same boresight SNR.

    ``w`` is the detection bandwidth integrated around each carrier.
    """

    frequencies: tuple[float, ...] = (100e9, 200e9, 400e9)
    w: float = 0.1e9
    snr_boresight_db: float = 40.0
    quadrature_points: int = 9

    def relative_intensity(self, antenna: AntennaModel, thetas) -> np.ndarray:
        """Band intensity normalized to its boresight value, shape (n, channels)."""
        gm = FreeSpaceSpherical()
        s = band_integrals(antenna, self.frequencies, self.w, thetas, gm, 1.0, self.quadrature_points)
        s0 = band_integrals(antenna, self.frequencies, self.w, [0.0], gm, 1.0, self.quadrature_points)
        return s / s0

    def snr(self, antenna: AntennaModel, thetas) -> np.ndarray:
        return 10.0 ** (self.snr_boresight_db / 10.0) * self.relative_intensity(antenna, thetas)


@dataclass
class BerTable:
    theta_deg: np.ndarray
    frequencies: tuple[float, ...]
    snr: np.ndarray  # (n, channels)
    ber: np.ndarray

    @property
    def per_channel_blind(self) -> np.ndarray:
        # same criterion as the blind map: intensity below delta * w, i.e. SNR < 1
        return (self.snr < 1.0).T

    @property
    def gamma(self) -> np.ndarray:
        return self.per_channel_blind.sum(axis=0)


def ook_ber_vs_angle(plan: OokPlan | None = None, antenna: AntennaModel | None = None,
                     grid: AngleGrid | Sequence[float] | None = None) -> BerTable:
    """BER per carrier versus angle for the horn + beam-block transmitter."""
    plan = plan or OokPlan()
    antenna = antenna or HornWithBlock()
    if grid is None:
        grid = AngleGrid(-20.0, 20.0, 0.01)
    theta_deg = grid.degrees() if isinstance(grid, AngleGrid) else np.asarray(grid, dtype=float)
    snr = plan.snr(antenna, np.radians(theta_deg))
    return BerTable(theta_deg, tuple(plan.frequencies), snr, ook_ber(snr))


def pattern_minimum_angles(plan: OokPlan, antenna: AntennaModel, theta_max_deg: float = 30.0,
                           coarse_step_deg: float = 0.01) -> list[float]:
    """Angle (deg, positive side) of the first intensity minimum for each carrier."""
    coarse = np.arange(0.0, theta_max_deg + coarse_step_deg / 2, coarse_step_deg)
    rel = plan.relative_intensity(antenna, np.radians(coarse))
    out = []
    for ch, f in enumerate(plan.frequencies):
        col = rel[:, ch]
        interior = np.flatnonzero((col[1:-1] <= col[:-2]) & (col[1:-1] <= col[2:])) + 1
        if interior.size == 0:
            out.append(float("nan"))
            continue
        i = int(interior[0])

        def objective(t, _f=f):
            return float(band_integrals(antenna, [_f], plan.w, [np.radians(t)], FreeSpaceSpherical(), 1.0,
                                        plan.quadrature_points)[0, 0])

        res = minimize_scalar(objective, bounds=(coarse[i - 1], coarse[i + 1]), method="bounded",
                              options={"xatol": 1e-10})
        out.append(float(res.x))
    return out


class Interval(NamedTuple):
    start_deg: float
    end_deg: float

    def contains(self, theta_deg: float) -> bool:
        return self.start_deg <= theta_deg <= self.end_deg


def blind_interval_report(source: BlindMap | BerTable, exclude_deg: float | None = None) -> list[Interval]:
    """Maximal runs of grid angles with Gamma >= 1.

    With ``exclude_deg`` set, any interval containing that angle (Bob's lobe
    is never blind, so normally none) is dropped.
    """
    theta = np.asarray(source.theta_deg)
    blind = np.asarray(source.gamma) > 0
    out: list[Interval] = []
    start = None
    for i, b in enumerate(blind):
        if b and start is None:
            start = i
        elif not b and start is not None:
            out.append(Interval(float(theta[start]), float(theta[i - 1])))
            start = None
    if start is not None:
        out.append(Interval(float(theta[start]), float(theta[-1])))
    if exclude_deg is not None:
        out = [iv for iv in out if not iv.contains(exclude_deg)]
    return out
