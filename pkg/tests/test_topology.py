import numpy as np
import pytest
from hypothesis import given, strategies as st

from timnoma import ScenarioError, build_scenario, path_loss, preset, sic_order
from timnoma.topology import PRESETS


class TestPathLoss:
    @pytest.mark.parametrize("d, expected", [(1.0, 1.0), (2.0, 0.125), (0.5, 8.0)])
    def test_examples(self, d, expected):
        assert path_loss(d, 3) == expected

    @pytest.mark.parametrize("d", [0.0, -1.0])
    def test_non_positive_distance(self, d):
        with pytest.raises(ValueError, match="distance"):
            path_loss(d, 3)

    @given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.floats(0.5, 6))
    def test_positive_and_decreasing(self, d1, d2, n):
        g1, g2 = path_loss(d1, n), path_loss(d2, n)
        assert g1 > 0 and g2 > 0
        if d1 < d2:
            assert g1 >= g2


class TestScenario:
    def test_mimo_preset(self, mimo):
        np.testing.assert_allclose(mimo.gains, [1, 0.125, 1 / 27, 1 / 64], rtol=1e-15)
        assert mimo.groups == ((0, 2), (1, 3))
        assert (mimo.K, mimo.T, mimo.N_t, mimo.N_r, mimo.L) == (4, 2, 2, 2, 2)

    def test_siso_preset(self, siso):
        assert siso.K == 5
        assert siso.groups == ((0, 2, 4), (1, 3))
        assert siso.is_siso

    def test_single_group_cell(self):
        sc = build_scenario({"K": 2, "T": 1, "N_t": 1, "N_r": 1,
                             "distances_km": [1, 2], "groups": [[1, 2]]})
        assert sc.groups == ((0, 1),)

    def test_config_round_trip(self, mimo):
        again = build_scenario(mimo.to_config())
        assert again.groups == mimo.groups and again.distances_km == mimo.distances_km

    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_presets_alternate_groups(self, name):
        sc = preset(name)
        labels = [sc.group_of(u) for u in sc.distance_order()]
        assert all(a != b for a, b in zip(labels, labels[1:]))

    @pytest.mark.parametrize("patch, match", [
        ({"groups": [[1, 3], [2]]}, "partition"),
        ({"groups": [[1, 3], [2, 4, 1]]}, "partition"),
        ({"groups": [[1, 2], [3, 4]]}, "interleaving"),
        ({"groups": [[1, 3, 2, 4], []]}, "partition"),
        ({"distances_km": [1, 2, 3, 6]}, "distance"),
        ({"N_t": 1}, "N_t >= N_r"),
        ({"L": 1}, "L must equal N_r"),
        ({"groups": [[1, 3], [2, 5]]}, "partition"),
    ])
    def test_validation_names_invariant(self, patch, match):
        raw = {**PRESETS["paper-mimo-4u"], **patch}
        with pytest.raises(ScenarioError, match=match):
            build_scenario(raw)

    def test_missing_field(self):
        with pytest.raises(ScenarioError, match="distances_km"):
            build_scenario({"K": 1, "T": 1, "N_t": 1, "N_r": 1, "groups": [[1]]})

    def test_immutable(self, mimo):
        with pytest.raises(AttributeError):
            mimo.K = 5


class TestSicOrder:
    def test_mimo_group1(self, mimo):
        # users 3, 1 in 1-based labels
        assert sic_order(mimo, 0) == [2, 0]

    def test_siso_group1(self, siso):
        assert sic_order(siso, 0) == [4, 2, 0]

    def test_single_member(self):
        sc = build_scenario({"K": 2, "T": 2, "N_t": 1, "N_r": 1,
                             "distances_km": [1, 2], "groups": [[1], [2]]})
        assert sic_order(sc, 1) == [1]

    def test_bad_group(self, mimo):
        with pytest.raises(IndexError):
            sic_order(mimo, 2)

    def test_distance_ties_by_index(self):
        sc = build_scenario({"K": 4, "T": 2, "N_t": 1, "N_r": 1,
                             "distances_km": [1, 1, 2, 2], "groups": [[1, 3], [2, 4]]})
        assert sc.distance_order() == [0, 1, 2, 3]
        assert sic_order(sc, 0) == [2, 0]

    @given(st.integers(1, 12), st.integers(1, 4), st.randoms(use_true_random=False))
    def test_permutation_farthest_first(self, K, T, rnd):
        T = min(T, K)
        d = sorted(rnd.uniform(0.1, 5.0) for _ in range(K))
        groups = [[u + 1 for u in range(K) if u % T == t] for t in range(T)]
        sc = build_scenario({"K": K, "T": T, "N_t": 1, "N_r": 1, "distances_km": d, "groups": groups})
        for t in range(T):
            order = sic_order(sc, t)
            assert sorted(order) == sorted(sc.groups[t])
            assert sc.distances_km[order[0]] == max(sc.distances_km[u] for u in sc.groups[t])
            assert sorted(order, key=lambda u: (-sc.distances_km[u], u)) == order
