import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from treepl.errors import (
    BandwidthError,
    DivisionError,
    DomainError,
    EmptyInputError,
    GeometryError,
    ImpulseIndexError,
    InvalidArgumentError,
    MissingReferenceError,
    ShapeError,
)
from treepl.model import LinkGeometry, default_geometry
from treepl.pipeline import (
    CalibrationConstants,
    ImpulseSpectra,
    band_power,
    band_powers,
    correction_coeff,
    ecdf,
    impulse_power,
    mean_band_power,
    mean_power,
    pl_at_angle,
    pl_at_near_angle,
    pl_direct,
    process_dataset,
    relative_powers_db,
)

FS = 2.048e9


def brute_power(row):
    total = 0.0
    for z in row:
        total += z.real**2 + z.imag**2
    return total


def random_spectra(angle=180.0, m=5, n=64, seed=0, fs=FS):
    rng = np.random.default_rng(seed)
    bins = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
    return ImpulseSpectra(angle, bins, fs)


def test_bin_frequencies_even_and_odd():
    even = ImpulseSpectra(0, np.zeros((1, 8)), 8.0)
    assert list(even.freqs_hz()) == [-4, -3, -2, -1, 0, 1, 2, 3]
    odd = ImpulseSpectra(0, np.zeros((1, 7)), 7.0)
    assert list(odd.freqs_hz()) == [-3, -2, -1, 0, 1, 2, 3]


def test_spectra_validation():
    with pytest.raises(ShapeError):
        ImpulseSpectra(0, np.zeros((2, 1)), FS)
    with pytest.raises(InvalidArgumentError):
        ImpulseSpectra(0, np.array([[1, np.nan]]), FS)
    with pytest.raises(InvalidArgumentError):
        ImpulseSpectra(0, np.zeros((1, 4)), 0.0)


def test_impulse_power_trivial():
    bins = np.zeros((2, 8), dtype=complex)
    bins[1, 3] = 3 + 4j
    s = ImpulseSpectra(0, bins, FS)
    assert impulse_power(s, 1) == 0.0
    assert impulse_power(s, 2) == 25.0


def test_impulse_power_brute_force():
    s = random_spectra(m=4, n=33, seed=3)
    for m in range(1, 5):
        assert impulse_power(s, m) == pytest.approx(brute_power(s.bins[m - 1]), rel=1e-13)


@pytest.mark.parametrize("m", [0, 6, -1])
def test_impulse_index_range(m):
    with pytest.raises(ImpulseIndexError):
        impulse_power(random_spectra(), m)


def test_mean_power():
    row = np.zeros(4, dtype=complex)
    row[0] = math.sqrt(2)
    two = ImpulseSpectra(0, np.stack([row, row * math.sqrt(2)]), FS)
    assert mean_power(two) == pytest.approx(3.0, rel=1e-15)
    s = random_spectra(m=7, seed=5)
    oracle = sum(brute_power(r) for r in s.bins) / 7
    assert mean_power(s) == pytest.approx(oracle, rel=1e-13)


def test_mean_of_identical_impulses_is_exact():
    row = random_spectra(m=1, n=50, seed=9).bins
    many = ImpulseSpectra(0, np.repeat(row, 1000, axis=0), FS)
    assert mean_power(many) == impulse_power(ImpulseSpectra(0, row, FS), 1)


def test_band_power_full_band_equals_total():
    s = random_spectra(m=3, n=64)
    for m in (1, 2, 3):
        assert band_power(s, FS, m) == pytest.approx(impulse_power(s, m), rel=1e-14)


def test_band_power_contained_energy():
    # energy only inside +-980 MHz at N = 4096
    n = 4096
    s0 = ImpulseSpectra(0, np.zeros((1, n)), FS)
    inside = np.abs(s0.freqs_hz()) <= 980e6
    bins = np.where(inside, 1.0 + 0.5j, 0.0)[np.newaxis, :]
    s = ImpulseSpectra(0, bins, FS)
    assert band_power(s, 1960e6, 1) == impulse_power(s, 1)
    assert inside.sum() == 3921


def test_band_power_hand_selected_bins():
    # N = 8, fs = 8 Hz: bin frequencies -4..3; band 4 Hz keeps |f| <= 2
    bins = np.zeros((1, 8), dtype=complex)
    bins[0, 1] = 2.0  # -3 Hz, outside
    bins[0, 5] = 1j  # +1 Hz, inside
    s = ImpulseSpectra(0, bins, 8.0)
    assert band_power(s, 4.0, 1) == 1.0


def test_band_edges_inclusive():
    bins = np.zeros((1, 8), dtype=complex)
    bins[0, 2] = 1.0  # -2 Hz
    bins[0, 6] = 1.0  # +2 Hz
    s = ImpulseSpectra(0, bins, 8.0)
    assert band_power(s, 4.0, 1) == 2.0
    assert band_power(s, 3.999, 1) == 0.0


@pytest.mark.parametrize("bw", [0.0, -1.0, 2 * FS, math.nan])
def test_band_power_bad_bandwidth(bw):
    with pytest.raises(BandwidthError):
        band_power(random_spectra(), bw, 1)


@given(st.lists(st.floats(1e6, FS), min_size=2, max_size=6))
@settings(max_examples=40)
def test_band_nesting(bws):
    s = random_spectra(m=2, n=128, seed=11)
    bws = sorted(bws)
    p = [band_powers(s, b) for b in bws]
    for a, b in zip(p, p[1:]):
        assert np.all(b >= a)


def test_correction_coeff():
    assert correction_coeff(5.0, 5.0) == 1.0
    assert correction_coeff(1.0, 10.0) == pytest.approx(0.1)
    with pytest.raises(DivisionError):
        correction_coeff(1.0, 0.0)
    with pytest.raises(DivisionError):
        correction_coeff(1.0, -2.0)


def test_pl_direct():
    assert pl_direct(1.0) == 93.0
    assert pl_direct(100.0) == pytest.approx(113.0, abs=1e-12)
    assert pl_direct(10**0.5, CalibrationConstants(79, 7, 7)) == pytest.approx(98.0, abs=1e-12)
    assert pl_direct(1.0, CalibrationConstants(60, 3, 2)) == 65.0
    with pytest.raises(DomainError):
        pl_direct(0.0)


def test_pl_at_angle():
    assert pl_at_angle(101.5, 1.0) == 101.5
    assert pl_at_angle(100.0, 0.1) == pytest.approx(110.0, abs=1e-12)
    assert pl_at_angle(93.0, 0.25) == pytest.approx(99.0206, abs=5e-5)
    with pytest.raises(DomainError):
        pl_at_angle(93.0, 0.0)


def test_pl_at_near_angle():
    flat = LinkGeometry({21: 15.61, 180: 15.61})
    assert pl_at_near_angle(97.0, 1.0, flat) == 97.0
    g = default_geometry()
    assert pl_at_near_angle(93.0, 1.0, g) == pytest.approx(94.07, abs=0.005)
    # 100 + 10 log10(2) + 20 log10(15.61/13.80)
    oracle = 100 + 10 * math.log10(2) + 20 * math.log10(15.61 / 13.80)
    assert pl_at_near_angle(100.0, 0.5, g) == pytest.approx(oracle, abs=1e-12)
    assert round(oracle, 4) == 104.0808
    with pytest.raises(GeometryError):
        pl_at_near_angle(100.0, 0.5, LinkGeometry({180: 15.61}))


def make_dataset(angles, seed=0, m=6, n=64):
    return [random_spectra(a, m=m, n=n, seed=seed + i) for i, a in enumerate(angles)]


def brute_process(dataset, cal, geometry, bw):
    """Independent re-derivation of the per-angle path loss."""
    out = {}
    means = {}
    for s in dataset:
        keep = np.abs(s.freqs_hz()) <= bw / 2
        means[s.angle_deg] = sum(brute_power(r[keep]) for r in s.bins) / s.n_impulses
    p_ref = means[180.0]
    pl_ref = cal.attenuator_db + cal.tx_antenna_gain_dbi + cal.rx_antenna_gain_dbi + 10 * math.log10(p_ref)
    for a, p in means.items():
        pl = pl_ref - 10 * math.log10(p / p_ref)
        if geometry.has(a) and geometry.distance(a) != geometry.distance(180):
            pl += 20 * math.log10(geometry.distance(180) / geometry.distance(a))
        out[a] = pl
    return out


def test_process_dataset_matches_brute_force():
    ds = make_dataset([21.0, 105.0, 145.0, 180.0])
    cal = CalibrationConstants()
    g = default_geometry()
    res = process_dataset(ds, cal, g, 1e9)
    oracle = brute_process(ds, cal, g, 1e9)
    assert [r.angle_deg for r in res] == [21.0, 105.0, 145.0, 180.0]
    for r in res:
        assert r.pl_db == pytest.approx(oracle[r.angle_deg], abs=1e-10)
    assert [r.near for r in res] == [True, False, False, False]


def test_process_reference_only():
    s = random_spectra(180.0)
    (r,) = process_dataset([s], bandwidth_hz=FS)
    assert r.correction == 1.0
    assert r.pl_db == pl_direct(mean_power(s))


def test_process_reference_identity():
    ds = make_dataset([30.0, 180.0, 60.0])
    res = {r.angle_deg: r for r in process_dataset(ds, bandwidth_hz=1e9)}
    assert res[180.0].correction == 1.0
    assert res[180.0].pl_db == pl_direct(mean_band_power(ds[1], 1e9))


def test_process_halving_amplitudes():
    ds = make_dataset([105.0, 180.0])
    base = {r.angle_deg: r.pl_db for r in process_dataset(ds, bandwidth_hz=FS)}
    halved = [ImpulseSpectra(105.0, ds[0].bins * 0.5, FS), ds[1]]
    new = {r.angle_deg: r.pl_db for r in process_dataset(halved, bandwidth_hz=FS)}
    assert new[105.0] - base[105.0] == pytest.approx(10 * math.log10(4), abs=1e-10)
    assert new[180.0] == base[180.0]


@given(st.floats(1e-3, 1e3))
@settings(max_examples=25, deadline=None)
def test_scale_equivariance(factor):
    ds = make_dataset([21.0, 105.0, 180.0])
    scaled = [ImpulseSpectra(s.angle_deg, s.bins * factor, FS) for s in ds]
    a = process_dataset(ds, bandwidth_hz=FS)
    b = process_dataset(scaled, bandwidth_hz=FS)
    for ra, rb in zip(a, b):
        assert rb.correction == pytest.approx(ra.correction, rel=1e-12)
        assert rb.pl_db - ra.pl_db == pytest.approx(20 * math.log10(factor), abs=1e-9)


def test_duplicated_impulses_match_single():
    single = make_dataset([45.0, 180.0], m=1)
    dup = [ImpulseSpectra(s.angle_deg, np.repeat(s.bins, 1000, axis=0), FS) for s in single]
    a = process_dataset(single, bandwidth_hz=1.5e9)
    b = process_dataset(dup, bandwidth_hz=1.5e9)
    assert [r.pl_db for r in a] == [r.pl_db for r in b]


def test_process_missing_reference():
    with pytest.raises(MissingReferenceError):
        process_dataset(make_dataset([21.0, 105.0]))


def test_process_inconsistent_shapes():
    ds = [random_spectra(180.0, m=4), random_spectra(21.0, m=5)]
    with pytest.raises(ShapeError):
        process_dataset(ds)
    ds = [random_spectra(180.0, n=64), random_spectra(21.0, n=32)]
    with pytest.raises(ShapeError):
        process_dataset(ds)


def test_process_empty():
    with pytest.raises(EmptyInputError):
        process_dataset([])


def test_relative_powers_db():
    s = random_spectra(m=3)
    np.testing.assert_allclose(relative_powers_db(s), [10 * math.log10(brute_power(r)) for r in s.bins])


def test_ecdf_trivial():
    e = ecdf([4.2])
    assert e(4.1) == 0.0 and e(4.2) == 1.0
    e = ecdf([3, 1, 2])
    assert list(e.values) == [1, 2, 3]
    np.testing.assert_allclose(e.probabilities, [1 / 3, 2 / 3, 1])


def test_ecdf_ties_keep_uniform_steps():
    e = ecdf([1, 1, 2, 2, 2])
    np.testing.assert_allclose(e.probabilities, [0.2, 0.4, 0.6, 0.8, 1.0])
    assert e(1) == 0.4


def test_ecdf_errors():
    with pytest.raises(EmptyInputError):
        ecdf([])
    with pytest.raises(InvalidArgumentError):
        ecdf([1.0, math.inf])


@given(st.lists(st.floats(-200, 200), min_size=1, max_size=200))
def test_ecdf_properties(xs):
    e = ecdf(xs)
    assert np.all(np.diff(e.values) >= 0)
    assert e.probabilities[-1] == 1.0
    np.testing.assert_allclose(np.diff(np.concatenate(([0.0], e.probabilities))), 1 / len(xs))


def test_ecdf_normal_ks():
    rng = np.random.default_rng(2023)
    x = rng.normal(38.0, 1.5, size=1000)
    e = ecdf(x)
    cdf = stats.norm(38.0, 1.5).cdf(e.values)
    # two-sided KS distance from the step function
    d = max(np.max(e.probabilities - cdf), np.max(cdf - (e.probabilities - 1 / len(e))))
    assert d == pytest.approx(stats.kstest(x, stats.norm(38.0, 1.5).cdf).statistic, abs=1e-12)
    assert d < 0.05
