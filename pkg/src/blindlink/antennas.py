"""H-plane radiation patterns G(f, theta) for the transmit antennas we model.

Every gain function broadcasts over ``f`` (Hz) and ``theta`` (radians) and
returns power gain normalized so that its maximum over theta at each
frequency is 1.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import j1

from .errors import BadGeometry, BelowCutoff

C = 299_792_458.0


def wavelength(f):
    return C / np.asarray(f, dtype=float)


def wavenumber(f):
    return 2.0 * np.pi * np.asarray(f, dtype=float) / C


@dataclass(frozen=True)
class AngleGrid:
    """Uniform angular sampling in degrees, endpoints included."""

    theta_min: float = -90.0
    theta_max: float = 90.0
    step: float = 0.01

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("grid step must be positive")
        if self.theta_max < self.theta_min:
            raise ValueError("theta_max must not be below theta_min")

    @property
    def size(self) -> int:
        return int(round((self.theta_max - self.theta_min) / self.step)) + 1

    def degrees(self) -> np.ndarray:
        # rounded so nominal angles such as 11.8 print as written
        return np.round(np.linspace(self.theta_min, self.theta_max, self.size), 10)

    def radians(self) -> np.ndarray:
        return np.radians(self.degrees())


# -- closed-form patterns -----------------------------------------------------

def phased_array_gain(n_elements: int, spacing: float, f, theta):
    """Array factor power |AF|^2 of a broadside uniform linear array."""
    if n_elements < 2 or spacing <= 0:
        raise BadGeometry("phased array needs at least 2 elements and positive spacing")
    psi = wavenumber(f) * spacing * np.sin(theta)
    half = np.sin(psi / 2.0)
    small = np.abs(half) < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        af = np.sin(n_elements * psi / 2.0) / (n_elements * half)
    return np.where(small, 1.0, af * af)


def parabolic_dish_gain(diameter: float, f, theta):
    """Uniformly illuminated circular aperture (Airy) power pattern."""
    if diameter <= 0:
        raise BadGeometry("dish diameter must be positive")
    u = np.pi * diameter * np.asarray(f, dtype=float) / C * np.sin(theta)
    small = np.abs(u) < 1e-8
    with np.errstate(divide="ignore", invalid="ignore"):
        amp = 2.0 * j1(u) / u
    return np.where(small, 1.0, amp * amp)


def absolute_boresight_gain(diameter: float, f) -> np.ndarray:
    """Aperture gain (pi D / lambda)^2 of the dish, in dBi."""
    return 10.0 * np.log10((np.pi * diameter / wavelength(f)) ** 2)


def leaky_wave_cutoff(plate_separation: float) -> float:
    return C / (2.0 * plate_separation)


def leaky_wave_gain(plate_separation: float, alpha: float, f, theta):
    """Lorentzian line shape in longitudinal wavenumber around the TE1 leaky mode.

    ``alpha`` is the attenuation constant in 1/m.  The peak sits where
    ``k cos(theta) = beta(f)``, i.e. ``sin(theta_peak) = f_c / f``.
    """
    if plate_separation <= 0 or alpha <= 0:
        raise BadGeometry("plate separation and attenuation constant must be positive")
    f = np.asarray(f, dtype=float)
    fc = leaky_wave_cutoff(plate_separation)
    if np.any(f <= fc):
        raise BelowCutoff(f"frequencies must exceed the {fc / 1e9:.6g} GHz cutoff")
    k = wavenumber(f)
    beta = k * np.sqrt(1.0 - (fc / f) ** 2)
    detune = k * np.cos(theta) - beta
    return alpha**2 / (detune * detune + alpha**2)


def leaky_wave_peak_angle(plate_separation: float, f):
    fc = leaky_wave_cutoff(plate_separation)
    f = np.asarray(f, dtype=float)
    if np.any(f <= fc):
        raise BelowCutoff(f"frequencies must exceed the {fc / 1e9:.6g} GHz cutoff")
    return np.arcsin(fc / f)


HORN_WAIST_FACTOR = 0.43


def diagonal_horn_gain(length: float, aperture: float, f, theta):
    """Gaussian-beam far field of a diagonal horn, waist 0.43 x aperture.

    ``length`` does not enter the far-field shape in this model.
    """
    if aperture <= 0 or length <= 0:
        raise BadGeometry("horn length and aperture must be positive")
    w0 = HORN_WAIST_FACTOR * aperture
    x = np.pi * w0 * np.asarray(f, dtype=float) * np.sin(theta) / C
    return np.exp(-2.0 * x * x)


# -- horn focused on a beam block ---------------------------------------------

_GL_NODES_PER_PANEL = 10
_GL_X, _GL_W = leggauss(_GL_NODES_PER_PANEL)
_CHUNK = 16384


def _check_block(waist: float, block_width: float) -> None:
    if waist <= 0 or block_width <= 0:
        raise BadGeometry("beam waist and block width must be positive")
    if block_width / 2.0 >= 6.0 * waist:
        raise BadGeometry("beam block covers the whole integration window")


def horn_block_field(waist: float, block_width: float, f, theta):
    """Normalized (signed) far-field amplitude behind a centred opaque strip.

    The aperture field is a Gaussian of waist ``waist`` with the strip
    ``|x| < block_width / 2`` removed, truncated at ``|x| = 6 waist``.  The
    Fraunhofer integral is real because the aperture is even, so it reduces to
    ``2 * int_{a/2}^{6 w0} exp(-x^2/w0^2) cos(k x sin(theta)) dx`` and is
    evaluated with composite Gauss-Legendre quadrature.  The result is divided
    by its value at theta = 0, which is the global maximum of |E| since the
    aperture field is nonnegative.
    """
    _check_block(waist, block_width)
    f, theta = np.broadcast_arrays(np.asarray(f, dtype=float), np.asarray(theta, dtype=float))
    t = (wavenumber(f) * np.sin(theta)).ravel()
    lo, hi = block_width / 2.0, 6.0 * waist
    # panel count depends on the frequencies only, so a single angle and a
    # whole grid evaluated at the same frequencies give identical values
    phase = float(np.max(wavenumber(f), initial=0.0)) * (hi - lo)
    panels = max(16, math.ceil(phase / np.pi) + 1)
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    wx = (half[:, None] * _GL_W[None, :]).ravel() * np.exp(-(x / waist) ** 2)
    norm = wx.sum()
    out = np.empty_like(t)
    for start in range(0, t.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        out[sl] = (np.cos(np.outer(t[sl], x)) * wx).sum(axis=1)
    return (out / norm).reshape(f.shape)


def horn_block_gain(waist: float, block_width: float, f, theta):
    e = horn_block_field(waist, block_width, f, theta)
    return e * e


# -- model objects --------------------------------------------------------------

class AntennaModel:
    """Common surface for the antenna configurations."""

    kind: str = ""

    def gain(self, f, theta):
        raise NotImplementedError

    def gain_db(self, f, theta, floor_db: float = -300.0):
        g = np.asarray(self.gain(f, theta), dtype=float)
        with np.errstate(divide="ignore"):
            db = 10.0 * np.log10(g)
        return np.maximum(db, floor_db)

    def describe(self) -> dict:
        return {"kind": self.kind, **asdict(self)}


@dataclass(frozen=True)
class PhasedArray(AntennaModel):
    elements: int = 16
    spacing: float = 0.75e-3
    kind = "phased_array"

    def gain(self, f, theta):
        return phased_array_gain(self.elements, self.spacing, f, theta)


@dataclass(frozen=True)
class ParabolicDish(AntennaModel):
    diameter: float = 16e-3
    focal_length: float = 10e-3  # metadata only
    kind = "dish"

    def gain(self, f, theta):
        return parabolic_dish_gain(self.diameter, f, theta)

    def boresight_gain_dbi(self, f):
        return absolute_boresight_gain(self.diameter, f)


@dataclass(frozen=True)
class LeakyWave(AntennaModel):
    plate_separation: float = 1e-3
    alpha: float = 1.0
    kind = "leaky_wave"

    @property
    def cutoff(self) -> float:
        return leaky_wave_cutoff(self.plate_separation)

    def gain(self, f, theta):
        return leaky_wave_gain(self.plate_separation, self.alpha, f, theta)

    def peak_angle(self, f):
        return leaky_wave_peak_angle(self.plate_separation, f)


@dataclass(frozen=True)
class DiagonalHorn(AntennaModel):
    length: float = 20e-3
    aperture: float = 11e-3
    kind = "horn"

    def gain(self, f, theta):
        return diagonal_horn_gain(self.length, self.aperture, f, theta)


@dataclass(frozen=True)
class HornWithBlock(AntennaModel):
    waist: float = 3e-3
    block_width: float = 4e-3
    kind = "horn_block"

    def __post_init__(self):
        _check_block(self.waist, self.block_width)

    def gain(self, f, theta):
        return horn_block_gain(self.waist, self.block_width, f, theta)

    def field(self, f, theta):
        return horn_block_field(self.waist, self.block_width, f, theta)


ANTENNAS = {cls.kind: cls for cls in (PhasedArray, ParabolicDish, LeakyWave, DiagonalHorn, HornWithBlock)}


def make_antenna(kind: str, **geometry) -> AntennaModel:
    try:
        cls = ANTENNAS[kind]
    except KeyError:
        raise ValueError(f"unknown antenna kind {kind!r}; choose from {sorted(ANTENNAS)}") from None
    return cls(**geometry)
