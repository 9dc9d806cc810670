import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scwqkd.params import ModulationParams
from scwqkd.scw_state import (
    binary_entropy,
    density_eigenvalues,
    holevo_bound,
    overlap,
    overlap_direct,
    phase_overlap,
    prepare_state,
    shannon_entropy,
    sideband_photon_number,
)

from oracles import bessel_j0_series, binary_entropy_mp, coherent_product_overlap

REF = ModulationParams()
# Bessel-limit values (S -> infinity) computed at 40 digits
OVERLAP_LIMIT = 0.67246511509137387
CHI_LIMIT = 0.64324677145067111


def test_no_modulation_only_carrier():
    st_ = prepare_state(ModulationParams(mu0=4.0, m=0.0, S=16), 1.234)
    amps = st_.amplitudes
    assert amps[16] == pytest.approx(2.0)
    assert np.all(amps[np.arange(33) != 16] == 0)


def test_sideband_photons_reference_point():
    s = prepare_state(REF, 0.0)
    side = np.sum(s.photon_numbers) - s.photon_numbers[s.S]
    assert side == pytest.approx(0.1997, abs=5e-4)
    assert side == pytest.approx(sideband_photon_number(REF), abs=1e-12)
    assert side == pytest.approx(4 * (1 - bessel_j0_series(0.319) ** 2), abs=1e-8)


def test_phase_rotation_preserves_moduli():
    p = ModulationParams(S=256)
    a = prepare_state(p, 0.3)
    b = prepare_state(p, 0.3 + 2 * math.pi / p.M)
    assert np.array_equal(a.photon_numbers, b.photon_numbers)
    assert np.allclose(np.abs(a.amplitudes), np.abs(b.amplitudes), rtol=1e-15, atol=0)
    ks = np.arange(-256, 257)
    rotated = a.amplitudes * np.exp(-1j * 2 * math.pi / p.M * ks)
    assert np.allclose(rotated, b.amplitudes, atol=1e-15)


def test_total_photon_number_conserved():
    for mu0, m in [(4.0, 0.319), (0.5, 1.2), (10.0, 0.05)]:
        s = prepare_state(ModulationParams(mu0=mu0, m=m, S=512), 0.7)
        assert np.sum(s.photon_numbers) == pytest.approx(mu0, abs=1e-10)


def test_overlap_edges():
    assert overlap(ModulationParams(mu0=0.0)) == 1.0
    assert overlap(ModulationParams(mu0=1e4, m=0.319)) < 1e-100


def test_overlap_reference_value():
    s = overlap(REF)
    assert s == pytest.approx(OVERLAP_LIMIT, abs=1e-8)
    assert s == pytest.approx(0.6726, abs=5e-4)


def test_overlap_closed_form_vs_mode_product():
    rng = np.random.default_rng(7)
    for _ in range(20):
        p = ModulationParams(mu0=rng.uniform(0, 8), m=rng.uniform(0, 1.5), S=int(rng.integers(16, 300)),
                             theta1=rng.uniform(0, 6))
        ref = coherent_product_overlap(prepare_state(p, 0.0).amplitudes, prepare_state(p, math.pi).amplitudes)
        assert overlap(p) == pytest.approx(ref, abs=1e-9)
        assert overlap_direct(p) == pytest.approx(ref, abs=1e-12)


def test_phase_overlap_at_pi_matches_overlap():
    assert phase_overlap(REF, [math.pi])[0] == pytest.approx(overlap(REF), abs=1e-12)
    assert phase_overlap(REF, [0.0])[0] == pytest.approx(1.0, abs=1e-15)


def test_density_eigenvalues():
    assert density_eigenvalues(ModulationParams(mu0=0.0)) == (1.0, 0.0)
    l1, l2 = density_eigenvalues(REF)
    assert l1 + l2 == 1.0
    assert (l1, l2) == pytest.approx((0.8363, 0.1637), abs=1e-4)


def test_holevo_reference_value():
    chi = holevo_bound(REF)
    assert chi == pytest.approx(CHI_LIMIT, abs=1e-8)
    assert chi == pytest.approx(binary_entropy_mp(0.5 * (1 - overlap(REF))), abs=1e-13)


def test_holevo_edges():
    assert holevo_bound(ModulationParams(mu0=0.0)) == 0.0
    assert holevo_bound(ModulationParams(mu0=1e4)) == pytest.approx(1.0, abs=1e-12)


def test_holevo_equals_eigenvalue_entropy():
    rng = np.random.default_rng(3)
    for _ in range(20):
        p = ModulationParams(mu0=rng.uniform(0, 8), m=rng.uniform(0, 1.5), S=int(rng.integers(16, 300)))
        assert abs(holevo_bound(p) - shannon_entropy(density_eigenvalues(p))) < 1e-12


def test_holevo_monotone_in_mu0():
    chis = [holevo_bound(ModulationParams(mu0=mu, S=512)) for mu in np.linspace(0.1, 10, 25)]
    assert all(b > a for a, b in zip(chis, chis[1:]))


@pytest.mark.parametrize("x, expected", [(0.0, 0.0), (1.0, 0.0), (0.5, 1.0)])
def test_binary_entropy_exact(x, expected):
    assert binary_entropy(x) == expected


def test_binary_entropy_value():
    assert binary_entropy(0.1637) == pytest.approx(binary_entropy_mp(0.1637), abs=1e-14)
    assert binary_entropy(0.1637) == pytest.approx(0.6431, abs=1e-4)


def test_binary_entropy_domain():
    with pytest.raises(ValueError):
        binary_entropy(1.2)
    with pytest.raises(ValueError):
        binary_entropy(-0.01)


@settings(max_examples=100)
@given(st.floats(0.0, 1.0))
def test_binary_entropy_symmetric_and_bounded(x):
    assert binary_entropy(x) == pytest.approx(binary_entropy(1 - x), abs=1e-12)
    assert 0.0 <= binary_entropy(x) <= 1.0


@settings(max_examples=50)
@given(st.floats(0.0, 0.999), st.floats(0.0, 0.999))
def test_holevo_decreasing_in_overlap(s1, s2):
    if abs(s1 - s2) < 1e-6:
        return
    lo, hi = sorted((s1, s2))
    assert binary_entropy(0.5 * (1 - lo)) > binary_entropy(0.5 * (1 - hi))
