import math
from dataclasses import dataclass

import numpy as np
import pytest

from blindlink.antennas import AngleGrid, AntennaModel, DiagonalHorn, HornWithBlock, LeakyWave, ParabolicDish, \
    PhasedArray, wavelength
from blindlink.blind import (
    EqualizeAtBob,
    FreeSpaceSpherical,
    Location,
    TransmissionPlan,
    UniformSpectralDensity,
    blind_fraction_sweep,
    compute_blind_map,
    equalize_power_at_bob,
    intensities,
    main_lobe_mask,
    p_ab,
    received_intensity,
    s_bob_from_p_ab,
    subchannel_capacity,
    subchannel_capacity_bits,
    thermal_threshold_default,
    total_rate,
    transmit_density,
)
from blindlink.errors import OutOfRange, PolicyInfeasible

GM = FreeSpaceSpherical()
BORESIGHT = Location(1.0, 0.0)
COARSE = AngleGrid(-90.0, 90.0, 0.05)


@dataclass(frozen=True)
class Isotropic(AntennaModel):
    kind = "isotropic"

    def gain(self, f, theta):
        return np.ones(np.broadcast(np.asarray(f), np.asarray(theta)).shape)


def dish_plan(bandwidth=10e9, w=1e9, delta=1e-15, p_ab_db=35.0, **kw):
    return TransmissionPlan.centered(200e9, bandwidth, w, delta, power_policy=EqualizeAtBob(p_ab_db=p_ab_db), **kw)


def test_plan_geometry():
    plan = dish_plan()
    assert (plan.f_low, plan.f_high, plan.q) == (195e9, 205e9, 10)
    assert plan.w == 1e9 and plan.threshold == pytest.approx(1e-6)
    assert plan.centers()[0] == 195.5e9
    with pytest.raises(ValueError):
        TransmissionPlan.centered(200e9, 10e9, 3e9, 1e-15)


def test_free_space_spreading():
    assert GM(1.0) == pytest.approx(1 / (4 * math.pi))
    assert GM(2.0) < GM(1.0)
    with pytest.raises(ValueError):
        Location(0.0, 0.0)


def test_constant_gain_intensity():
    plan = TransmissionPlan(195e9, 205e9, 10, 1e-15, power_policy=UniformSpectralDensity(p0=2e-9))
    for i in range(plan.q):
        s = received_intensity(plan, Isotropic(), GM, Location(3.0, 0.4), i)
        assert s == pytest.approx(2e-9 * 1e9 / (4 * math.pi * 9.0), rel=1e-12)


def test_stationary_null_intensity():
    # a 1 MHz channel is narrow enough that the array null barely moves across it
    f, w = 200e9, 1e6
    plan = TransmissionPlan(f - w / 2, f + w / 2, 1, 1e-15, power_policy=UniformSpectralDensity(p0=1.0))
    null = math.asin(wavelength(f) / (16 * 0.75e-3))
    arr = PhasedArray()
    s_null = received_intensity(plan, arr, GM, Location(1.0, null), 0)
    s_main = received_intensity(plan, arr, GM, BORESIGHT, 0)
    assert s_null < 1e-6 * s_main
    fs = f - w / 2 + w * (np.arange(10**6) + 0.5) / 10**6
    reference = float(np.mean(arr.gain(fs, null))) * w * GM(1.0)
    assert s_null == pytest.approx(reference, rel=1e-4)


def test_equalization_hits_target():
    plan = dish_plan()
    density = equalize_power_at_bob(plan, ParabolicDish(), GM, BORESIGHT)
    s = intensities(plan, ParabolicDish(), GM, 1.0, [0.0], density)[0]
    np.testing.assert_allclose(s, s_bob_from_p_ab(35.0, 1e-15, 1e9), rtol=1e-12)


def test_equalization_infeasible_in_null():
    null = math.asin(wavelength(200e9) / (16 * 0.75e-3))
    with pytest.raises(PolicyInfeasible) as err:
        equalize_power_at_bob(dish_plan(), PhasedArray(), GM, Location(1.0, null))
    assert 4 in err.value.channels or 5 in err.value.channels


def test_p_ab():
    assert p_ab(1000 * 1e-15 * 1e9, 1e-15, 1e9) == pytest.approx(30.0)
    assert p_ab(1e-6, 1e-15, 1e9) == pytest.approx(0.0)
    assert p_ab(10**3.5 * 1e-6, 1e-15, 1e9) == pytest.approx(35.0)


def test_blind_map_extremes():
    for delta, gamma, frac in ((1e-300, 0, 0.0), (1e300, 10, 1.0)):
        plan = TransmissionPlan.centered(200e9, 10e9, 1e9, delta, power_policy=UniformSpectralDensity(p0=1.0))
        bm = compute_blind_map(plan, ParabolicDish(), GM, 1.0, COARSE)
        assert np.all(bm.gamma == gamma) and bm.blind_fraction == frac


def test_dish_reference_map():
    bm = compute_blind_map(dish_plan(), ParabolicDish(), GM, 1.0, AngleGrid())
    assert bm.gamma[np.argmin(np.abs(bm.theta_deg))] == 0
    assert 0.0 < bm.blind_fraction < 1.0
    np.testing.assert_array_equal(bm.gamma, bm.per_channel_blind.sum(axis=0))
    assert bm.blind_fraction_excluding_lobe(0.0) > bm.blind_fraction


def test_main_lobe_mask():
    gamma = np.array([1, 0, 0, 0, 2, 0])
    theta = np.arange(6.0) - 2.0
    assert main_lobe_mask(theta, gamma, 0.0).tolist() == [False, True, True, True, False, False]
    assert not main_lobe_mask(theta, gamma, 2.0).any()


def test_bandwidth_sweep_monotone():
    points = blind_fraction_sweep(dish_plan(), ParabolicDish(), "bandwidth", np.arange(2, 42, 2) * 1e9, grid=COARSE)
    fr = [p.blind_fraction for p in points]
    assert all(b >= a for a, b in zip(fr, fr[1:])) and fr[-1] > fr[0]


def test_width_sweep_non_increasing():
    points = blind_fraction_sweep(dish_plan(bandwidth=12e9), ParabolicDish(), "w", [0.5e9, 1e9, 2e9], grid=COARSE)
    fr = [p.blind_fraction for p in points]
    assert fr[0] >= fr[1] >= fr[2]


def test_horn_sweep_flat():
    points = blind_fraction_sweep(dish_plan(), DiagonalHorn(), "bandwidth", np.arange(2, 42, 2) * 1e9, grid=COARSE)
    fr = [p.blind_fraction for p in points]
    assert max(fr) - min(fr) < 0.02


def test_sweep_records_failures():
    points = blind_fraction_sweep(dish_plan(), ParabolicDish(), "bandwidth", [2e9, 2.5e9], grid=COARSE)
    assert points[0].error is None and points[1].error and math.isnan(points[1].blind_fraction)


def test_delta_monotone():
    rng = np.random.default_rng(3)
    antennas = [ParabolicDish(), PhasedArray(), DiagonalHorn(), HornWithBlock()]
    for _ in range(10):
        ant = antennas[rng.integers(len(antennas))]
        q = int(rng.integers(2, 12))
        density = np.full(q, 1e-6)
        previous = None
        for delta in sorted(10.0 ** rng.uniform(-17, -12, 3)):
            plan = TransmissionPlan.centered(200e9, q * 1e9, 1e9, delta)
            s = intensities(plan, ant, GM, 1.0, COARSE.radians(), density)
            gamma = (s < plan.threshold).sum(axis=1)
            if previous is not None:
                assert np.all(gamma >= previous)
            previous = gamma


@pytest.mark.parametrize("antenna", [ParabolicDish(), PhasedArray(), HornWithBlock()], ids=lambda a: a.kind)
@pytest.mark.parametrize("q1", [5, 10])
def test_more_channels_not_less_blind(antenna, q1):
    base = compute_blind_map(dish_plan(w=10e9 / q1), antenna, GM, 1.0, COARSE).blind_fraction
    finer = compute_blind_map(dish_plan(w=10e9 / (2 * q1)), antenna, GM, 1.0, COARSE).blind_fraction
    assert finer >= base - 1.0 / COARSE.size


@pytest.mark.parametrize("antenna,bob_deg,fc", [
    (ParabolicDish(), 0.0, 200e9), (PhasedArray(), 0.0, 200e9), (HornWithBlock(), 0.0, 200e9),
    (DiagonalHorn(), 0.0, 200e9), (LeakyWave(), 30.0, 300e9)], ids=lambda x: getattr(x, "kind", ""))
def test_bob_never_blind(antenna, bob_deg, fc):
    for p_db in (0.5, 10.0, 35.0):
        plan = TransmissionPlan.centered(fc, 10e9, 1e9, 1e-15, power_policy=EqualizeAtBob(p_ab_db=p_db))
        bob = Location.from_degrees(1.0, bob_deg)
        bm = compute_blind_map(plan, antenna, GM, 1.0, AngleGrid(bob_deg, bob_deg, 1.0), bob)
        assert bm.gamma[0] == 0


@pytest.mark.parametrize("antenna", [ParabolicDish(), PhasedArray(), DiagonalHorn(), HornWithBlock()],
                         ids=lambda a: a.kind)
def test_quadrature_converged(antenna):
    plan = dish_plan()
    a = compute_blind_map(plan, antenna, GM, 1.0, COARSE)
    b = compute_blind_map(plan.replace(quadrature_points=33), antenna, GM, 1.0, COARSE)
    assert np.max(np.abs(a.intensity - b.intensity) / b.intensity) < 1e-6


def test_quadrature_converged_leaky_wave():
    # the narrow leaky-wave line needs more nodes than the default nine
    bob = Location.from_degrees(1.0, 30.0)
    plan = TransmissionPlan.centered(300e9, 10e9, 1e9, 1e-15)
    a = compute_blind_map(plan, LeakyWave(), GM, 1.0, COARSE, bob)
    b = compute_blind_map(plan.replace(quadrature_points=33), LeakyWave(), GM, 1.0, COARSE, bob)
    c = compute_blind_map(plan.replace(quadrature_points=65), LeakyWave(), GM, 1.0, COARSE, bob)
    assert np.max(np.abs(b.intensity - c.intensity) / c.intensity) < 1e-6
    np.testing.assert_array_equal(a.gamma, c.gamma)


def test_capacity_limits():
    delta, w = 1e-15, 1e9
    assert subchannel_capacity(delta * w, delta, w) == pytest.approx(w / 2 * math.log(2))
    assert subchannel_capacity(0.0, delta, w) == 0.0
    power = 1e-9 * delta * 1e12
    wide = 1e12
    assert power / (delta * wide) < 0.01
    assert subchannel_capacity(power, delta, wide) == pytest.approx(power / (2 * delta), rel=0.01)
    assert subchannel_capacity_bits(delta * w, delta, w) == pytest.approx(w / 2)


def test_thermal_threshold():
    assert thermal_threshold_default(100e9) == pytest.approx(2.9e-15, rel=1e-12)
    assert thermal_threshold_default(300e9) == pytest.approx(2.55e-14, rel=0.03)
    assert thermal_threshold_default(200e9) == pytest.approx(1.16e-14, rel=1e-12)
    with pytest.raises(OutOfRange):
        thermal_threshold_default(10e9)


def test_rate_ratios():
    lw, bob = LeakyWave(), Location.from_degrees(1.0, 30.0)
    lw_rates = [total_rate(TransmissionPlan.centered(300e9, b, 1e9, 1e-15,
                                                     power_policy=UniformSpectralDensity(p_ab_db=30.0)), lw, GM, bob)
                for b in (50e9, 100e9)]
    dish_rates = [total_rate(dish_plan(bandwidth=b, p_ab_db=30.0), ParabolicDish(), GM, BORESIGHT)
                  for b in (50e9, 100e9)]
    assert lw_rates[1] / lw_rates[0] < 1.5
    assert dish_rates[1] / dish_rates[0] == pytest.approx(2.0, abs=0.1)


def test_transmit_density_uniform_reference():
    plan = TransmissionPlan.centered(200e9, 10e9, 1e9, 1e-15, power_policy=UniformSpectralDensity(p_ab_db=20.0))
    density = transmit_density(plan, ParabolicDish(), GM, BORESIGHT)
    assert np.all(density == density[0])


def test_total_rate_closed_forms():
    plan = dish_plan(p_ab_db=20.0)
    rate = total_rate(plan, ParabolicDish(), GM, BORESIGHT)
    assert rate == pytest.approx(plan.q * subchannel_capacity(plan.threshold * 100.0, 1e-15, 1e9) / math.log(2),
                                 rel=1e-12)
    single = TransmissionPlan(199.5e9, 200.5e9, 1, 1e-15, power_policy=UniformSpectralDensity(p0=1e-9))
    s = received_intensity(single, ParabolicDish(), GM, BORESIGHT, 0)
    assert total_rate(single, ParabolicDish(), GM, BORESIGHT) == pytest.approx(subchannel_capacity_bits(s, 1e-15, 1e9))
