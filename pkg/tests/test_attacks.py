import math

import numpy as np
import pytest

from scwqkd.attacks import (
    IsometryAttack,
    complementary_holevo,
    isometry_holevo,
    isometry_scan,
    usd_attack_viable,
    usd_probability,
)
from scwqkd.params import LinkParams, ModulationParams
from scwqkd.scw_state import binary_entropy, holevo_bound, overlap
from scwqkd.wigner import d_row

from oracles import binary_entropy_mp, explicit_isometry_holevo, usd_eigenvalues_photon_counting

REF = ModulationParams()


def test_complementary_holevo_values():
    assert complementary_holevo(0.4, 1.0) == 0.0
    s = overlap(REF)
    assert complementary_holevo(s, s) == pytest.approx(holevo_bound(REF), abs=1e-15)
    assert complementary_holevo(0.6726, 0.8) == pytest.approx(binary_entropy_mp(0.1), abs=1e-14)
    assert complementary_holevo(0.6726, 0.8) == pytest.approx(0.4690, abs=1e-4)


def test_complementary_holevo_rejects_unphysical():
    with pytest.raises(ValueError):
        complementary_holevo(0.7, 0.6)
    with pytest.raises(ValueError):
        complementary_holevo(1.2, 1.3)


def test_isometry_holevo_matches_explicit_construction():
    rng = np.random.default_rng(11)
    for _ in range(200):
        s = rng.uniform(0, 0.99)
        g = rng.uniform(-0.99, 0.99)
        c = abs(g) + (1 - abs(g)) * rng.uniform()
        atk = IsometryAttack.from_overlaps(s, c, g / c, swap=bool(rng.integers(2)))
        chi, nu, nv, uv = explicit_isometry_holevo(atk.a, atk.b, atk.channel_overlap, atk.ancilla_overlap)
        assert nu == pytest.approx(1.0, abs=1e-12) and nv == pytest.approx(1.0, abs=1e-12)
        assert uv == pytest.approx(s, abs=1e-12)
        assert float(isometry_holevo(atk.a, atk.b, atk.channel_overlap, atk.ancilla_overlap)) == pytest.approx(chi, abs=1e-10)


def test_untangled_isometry_overlap_preservation():
    for s in (0.1, 0.5, 0.9):
        for c in (s, 0.7 * s + 0.3, 1.0):
            atk = IsometryAttack.from_overlaps(s, c, s / c)
            assert atk.a == pytest.approx(1.0) and atk.b == pytest.approx(0.0, abs=1e-15)
            assert atk.joint_overlap == pytest.approx(s, abs=1e-12)


@pytest.mark.parametrize("s", [0.0, 0.05, 0.3, 0.6724651, 0.9, 0.999])
def test_scan_never_exceeds_holevo(s):
    best, arg = isometry_scan(s, 100)
    bound = binary_entropy(0.5 * (1 - s))
    assert best <= bound + 1e-9
    assert best == pytest.approx(bound, abs=1e-12)
    assert arg.a == pytest.approx(1.0, abs=1e-12) and abs(arg.b) < 1e-12
    assert arg.joint_overlap == pytest.approx(s, abs=1e-12)


def test_scan_edges():
    assert isometry_scan(1.0, 100)[0] == 0.0
    assert isometry_scan(0.0, 100)[0] == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        isometry_scan(0.5, 50)


def test_scan_at_reference_point():
    best, _ = isometry_scan(overlap(REF), 120)
    assert best == pytest.approx(0.6431, abs=2e-4)
    assert best <= holevo_bound(REF) + 1e-9


def test_usd_two_states_closed_form():
    model = usd_probability(REF, M=2)
    assert model.p_usd == pytest.approx(1 - overlap(REF), abs=1e-12)
    assert model.p_usd == pytest.approx(0.3274, abs=5e-4)
    assert usd_probability(ModulationParams(mu0=0.0), M=2).p_usd == 0.0


@pytest.mark.parametrize("M", [2, 4, 8, 16])
def test_usd_spectrum_matches_photon_counting(M):
    row = d_row(REF.S_eff, REF.beta)
    ref = np.sort(usd_eigenvalues_photon_counting(REF.mu0 * row.values**2, M))
    got = np.sort(usd_probability(REF, M=M).eigenvalues)
    assert np.allclose(got, ref, rtol=1e-9, atol=1e-14)


def test_usd_gram_is_circulant_hermitian():
    model = usd_probability(REF)
    M = model.M
    G = np.array([[model.overlaps[(l - j) % M] for l in range(M)] for j in range(M)])
    assert np.allclose(G, G.conj().T, atol=1e-15)
    assert np.allclose(np.diag(G), 1.0)
    assert np.allclose(np.sort(np.linalg.eigvalsh(G)), np.sort(model.eigenvalues), atol=1e-12)


def test_usd_decreases_with_number_of_states():
    probs = [usd_probability(REF, M=M).p_usd for M in (2, 4, 8, 16)]
    assert all(b < a for a, b in zip(probs, probs[1:]))


def test_usd_vanishes_with_intensity():
    probs = [usd_probability(ModulationParams(mu0=mu, M=4), M=4).p_usd for mu in (4.0, 1.0, 0.1, 0.01)]
    assert all(b < a for a, b in zip(probs, probs[1:]))


def test_attack_viability():
    assert not usd_attack_viable(REF, LinkParams(), p_usd=0.0)
    assert usd_attack_viable(ModulationParams(M=2), LinkParams(L=50))
    assert not usd_attack_viable(REF, LinkParams(L=0))
