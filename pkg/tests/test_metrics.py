import numpy as np
import pytest

from timnoma import (allocate, allocate_mimo_rate, ber, build_scenario, dof_total, draw_channel,
                     sum_rate_ratio, tdma_rate, user_rate_mimo, user_rate_siso)
from timnoma.metrics import intra_group_interference, rate_record

P_T = 40.0
S3 = np.sqrt(3) / 2
V1 = np.array([0.5, S3])
V2 = np.array([-S3, 0.5])


def logdet2(A):
    return np.log2(np.linalg.det(A).real)


def eq47_50(h, a1, a2, s2):
    """Per-user MIMO-preset rates written out by hand for d = 1..4 km, n = 3."""
    g = np.array([1.0, 1 / 8, 1 / 27, 1 / 64])
    d1, d2 = 0.28, 0.72
    Nt = 2
    P1 = P_T / Nt * a1 * d1
    P2 = P_T / Nt * a2 * d2
    rho1 = np.linalg.norm(np.sqrt(g[2]) * h[2] @ V1) ** 2 * P1
    rho2 = np.linalg.norm(np.sqrt(g[3]) * h[3] @ V2) ** 2 * P2
    hh = [x @ x.conj().T for x in h]
    I = np.eye(2)
    return np.array([
        0.5 * logdet2(I + P_T / (Nt * s2) * a1 * d1 * g[0] * hh[0]),
        0.5 * logdet2(I + P_T / (Nt * s2) * a2 * d2 * g[1] * hh[1]),
        0.5 * logdet2(I + P_T / (Nt * (rho1 + s2)) * (1 - a1) * d1 * g[2] * hh[2]),
        0.5 * logdet2(I + P_T / (Nt * (rho2 + s2)) * (1 - a2) * d2 * g[3] * hh[3]),
    ])


def eq45(d, groups, h, v, user, s2):
    """Scalar SISO rate from distances, with H_k v reduced by hand to sqrt(gamma) h."""
    gam = d**-3.0
    D = np.sum(d**2)
    t = next(i for i, g in enumerate(groups) if user in g)
    interf = sum(gam[user] * abs(h[user]) ** 2 * P_T * d[j] ** 2 / D
                 for j in groups[t] if d[j] < d[user])
    sig = P_T * d[user] ** 2 / D * gam[user] * abs(h[user]) ** 2 * (v[t] @ v[t]) ** 2
    return 0.5 * np.log2(1 + sig / (interf + s2))


class TestMimoRate:
    def test_matches_hand_specialization(self, mimo, rng):
        for _ in range(100):
            a1, a2 = rng.uniform(0.01, 0.49, 2)
            s2 = 10 ** (-rng.uniform(-5, 45) / 10)
            ch = draw_channel(mimo, rng)
            alloc = allocate_mimo_rate(mimo, np.sqrt(P_T), [a1, a2])
            got = [user_rate_mimo(mimo, alloc, ch, k, s2) for k in range(4)]
            np.testing.assert_allclose(got, eq47_50(ch.per_user_fading, a1, a2, s2), rtol=1e-10)

    def test_huge_noise(self, mimo, rng):
        ch = draw_channel(mimo, rng)
        alloc = allocate(mimo, "mimo-sinr", c=0.0255)
        assert user_rate_mimo(mimo, alloc, ch, 0, 1e12) < 1e-9
        assert user_rate_mimo(mimo, alloc, ch, 0, np.inf) == 0.0

    def test_scalar_reduction(self, siso, rng):
        alloc = allocate(siso, "siso-fixed")
        for _ in range(50):
            ch = draw_channel(siso, rng)
            s2 = 10 ** (-rng.uniform(0, 40) / 10)
            for k in range(5):
                assert user_rate_mimo(siso, alloc, ch, k, s2) == pytest.approx(
                    user_rate_siso(siso, alloc, ch, k, s2), rel=1e-10)

    def test_rho_zero_for_nearest_and_monotone(self, siso, rng):
        alloc = allocate(siso, "siso-fixed")
        ch = draw_channel(siso, rng)
        rec = rate_record(siso, alloc, ch, 0.01)
        # users 1 and 2 are the nearest members of their groups and peel everyone else
        assert rec.interference_power[0] == 0.0 and rec.interference_power[1] == 0.0
        assert all(r >= 0 for r in rec.interference_power)
        # per unit receive gain, the load left as noise grows towards the cell edge
        load = [intra_group_interference(siso, alloc, ch, k)
                / (siso.gains[k] * abs(ch.per_user_fading[k, 0, 0]) ** 2) for k in (0, 2, 4)]
        assert load[0] <= load[1] <= load[2]

    def test_monotone_in_noise(self, mimo, rng):
        ch = draw_channel(mimo, rng)
        alloc = allocate(mimo, "mimo-sinr", c=0.0255)
        for k in range(4):
            r = [user_rate_mimo(mimo, alloc, ch, k, s2) for s2 in (1e-3, 1e-2, 1e-1, 1.0)]
            assert all(a > b for a, b in zip(r, r[1:]))


class TestSisoRate:
    def test_matches_scalar_oracle(self, siso, rng):
        alloc = allocate(siso, "siso-fixed")
        d = np.array(siso.distances_km)
        groups = [list(g) for g in siso.groups]
        for _ in range(100):
            ch = draw_channel(siso, rng)
            h = ch.per_user_fading[:, 0, 0]
            s2 = 10 ** (-rng.uniform(0, 40) / 10)
            for k in range(5):
                assert user_rate_siso(siso, alloc, ch, k, s2) == pytest.approx(
                    eq45(d, groups, h, [V1, V2], k, s2), rel=1e-12)

    def test_nearest_denominator_is_noise(self, siso, rng):
        alloc = allocate(siso, "siso-fixed")
        ch = draw_channel(siso, rng)
        g = siso.gains[0] * abs(ch.per_user_fading[0, 0, 0]) ** 2
        expected = 0.5 * np.log2(1 + alloc.powers[0] * g / 0.05)
        assert user_rate_siso(siso, alloc, ch, 0, 0.05) == pytest.approx(expected, rel=1e-13)

    def test_huge_noise(self, siso, rng):
        ch = draw_channel(siso, rng)
        assert user_rate_siso(siso, allocate(siso, "siso-fixed"), ch, 0, 1e15) < 1e-9


class TestTdmaRate:
    def test_zero_power(self, mimo, rng):
        assert tdma_rate(mimo, draw_channel(mimo, rng), 0, 0.1, total_power=0.0) == 0.0

    def test_siso_scalar(self, siso, rng):
        ch = draw_channel(siso, rng)
        for k in range(5):
            g = siso.gains[k] * abs(ch.per_user_fading[k, 0, 0]) ** 2
            assert tdma_rate(siso, ch, k, 0.02) == pytest.approx(0.5 * np.log2(1 + P_T / 0.02 * g), rel=1e-12)

    def test_mimo_formula(self, mimo, rng):
        ch = draw_channel(mimo, rng)
        h = ch.per_user_fading[1]
        expected = 0.5 * logdet2(np.eye(2) + P_T / (2 * 0.1) * (1 / 8) * h @ h.conj().T)
        assert tdma_rate(mimo, ch, 1, 0.1) == pytest.approx(expected, rel=1e-12)

    def test_beats_interference_limited_hybrid(self, siso, rng):
        alloc = allocate(siso, "siso-fixed")
        hyb, tdm = np.zeros(5), np.zeros(5)
        for _ in range(300):
            ch = draw_channel(siso, rng)
            hyb += [user_rate_siso(siso, alloc, ch, k, 1e-3) for k in range(5)]
            tdm += [tdma_rate(siso, ch, k, 1e-3) for k in range(5)]
        assert np.all(tdm > hyb)


class TestDof:
    def test_presets(self):
        assert dof_total(4, 2, 2) == 4
        assert dof_total(5, 1, 2) == 2.5

    def test_single_group(self):
        assert dof_total(7, 3, 1) == 21

    def test_against_tim_half_dof(self):
        # five users at half a DoF each
        assert dof_total(5, 1, 2) == 5 * 0.5


class TestRatioAndBer:
    def test_ratio(self):
        assert sum_rate_ratio(3.0, 3.0) == 1.0
        assert sum_rate_ratio(6.0, 3.0) == 2.0
        assert sum_rate_ratio(0.0, 3.0) == 0.0
        with pytest.raises(ZeroDivisionError):
            sum_rate_ratio(1.0, 0.0)

    def test_ber(self, rng):
        bits = rng.integers(0, 2, 6144)
        assert ber(bits, bits) == 0.0
        assert ber(bits, 1 - bits) == 1.0
        flipped = bits.copy()
        flipped[[5, 100, 6000]] ^= 1
        assert ber(bits, flipped) == 3 / 6144
        with pytest.raises(ValueError):
            ber(bits, bits[:-1])


def test_general_cell_rates_finite(rng):
    sc = build_scenario({"K": 6, "T": 3, "N_t": 3, "N_r": 2, "distances_km": [0.5, 1, 1.5, 2.5, 3.5, 4.5],
                         "groups": [[1, 4], [2, 5], [3, 6]]})
    alloc = allocate(sc, "mimo-rate", splits=[0.2, 0.2, 0.2])
    rec = rate_record(sc, alloc, draw_channel(sc, rng), 0.01)
    assert all(np.isfinite(rec.per_user_rate)) and min(rec.per_user_rate) > 0
    assert rec.ratio > 0
