import itertools
import math

import numpy as np
import pytest

import gusim.gscm as gscm
from gusim.errors import ConfigurationError, SelectionError
from gusim.rx import PowerConfig, sum_rate, zf_weights
from gusim.scheduling import (build_v_matrix, correlation_metric,
                              estimation_load, gus_select, gwc_select,
                              random_select)

from conftest import make_scenario


class TestBuildVMatrix:
    def test_inner_edge_entry(self):
        # user exactly at the inner VR edge with no delay decay: entry is
        # half the path-loss amplitude
        scen = make_scenario(
            users_xy=[(200.0, 0.0)],
            cluster_specs=[(np.array([150.0, 50.0, 20.0]), np.array([230.0, 0.0]))],
            power_decay=0.0,
        )
        v = build_v_matrix(scen)
        lp = gscm.user_pathloss_amplitude(scen, 0)
        assert v[0, 0] == pytest.approx(0.5 * lp, rel=1e-12)

    def test_far_user_row_vanishes(self):
        scen = make_scenario(
            users_xy=[(950.0, 950.0)],
            cluster_specs=[(np.array([100.0, 0.0, 20.0]), np.array([-950.0, -950.0]))],
        )
        v = build_v_matrix(scen)
        lp = gscm.user_pathloss_amplitude(scen, 0)
        assert v[0, 0] < 1e-4 * lp

    def test_matches_factor_composition(self):
        scen = make_scenario(
            users_xy=[(300.0, 100.0), (-250.0, 400.0)],
            cluster_specs=[
                (np.array([200.0, 150.0, 25.0]), np.array([310.0, 90.0])),
                (np.array([-200.0, 350.0, 10.0]), np.array([-260.0, 420.0])),
            ],
        )
        cfg = scen.config
        v = build_v_matrix(scen)
        for i in range(2):
            for j in range(2):
                _, gain = gscm.path_loss_nlos(
                    float(np.linalg.norm(scen.users[i] - scen.bs_position)),
                    cfg.wavelength)
                d_vr = float(np.linalg.norm(
                    scen.users[i, :2] - scen.clusters[j].vr_center))
                a_vr = gscm.vr_gain(d_vr, cfg.vr_radius, cfg.transition_size,
                                    cfg.wavelength)
                a_c = gscm.cluster_attenuation(
                    scen.clusters[j].delay,
                    gscm.user_reference_delay(scen, i),
                    cfg.cutoff_delay, cfg.power_decay)
                assert v[i, j] == pytest.approx(
                    math.sqrt(gain) * a_vr * math.sqrt(a_c), rel=1e-12)

    def test_no_shadowing_in_v(self):
        scen_a = make_scenario(
            users_xy=[(200.0, 0.0)],
            cluster_specs=[(np.array([150.0, 50.0, 20.0]), np.array([210.0, 0.0]))],
        )
        # same geometry, different shadow gain
        cl = scen_a.clusters[0]
        shadowed = gscm.Cluster(cl.position, cl.vr_center, cl.delay, 7.5)
        scen_b = gscm.Scenario(scen_a.config, scen_a.bs_position, scen_a.users,
                               (shadowed,))
        np.testing.assert_array_equal(build_v_matrix(scen_a), build_v_matrix(scen_b))


class TestCorrelationMetric:
    def test_identical_rows(self):
        assert correlation_metric([1.0, 2.0], [1.0, 2.0]) == pytest.approx(1.0)

    def test_orthogonal_rows(self):
        assert correlation_metric([1.0, 0.0], [0.0, 3.0]) == 0.0

    def test_forty_five_degrees(self):
        assert correlation_metric([1.0, 1.0], [1.0, 0.0]) == pytest.approx(
            0.7071067811865475, rel=1e-12)

    def test_symmetric_and_scale_invariant(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            a, b = rng.uniform(0.1, 1.0, size=(2, 4))
            assert correlation_metric(a, b) == pytest.approx(
                correlation_metric(b, a), rel=1e-12)
            assert correlation_metric(3.7 * a, b) == pytest.approx(
                correlation_metric(a, b), rel=1e-12)
            assert 0.0 <= correlation_metric(a, b) <= 1.0

    def test_zero_row_rejected(self):
        with pytest.raises(ConfigurationError):
            correlation_metric([0.0, 0.0], [1.0, 0.0])


class TestGusSelect:
    def test_orthogonal_rows(self):
        v = np.array([[2.0, 0.0], [0.0, 1.0]])
        result = gus_select(v, 2)
        assert result.selected == (0, 1)
        assert result.per_step_scores[0] == pytest.approx(2.0)
        assert result.per_step_scores[1] == pytest.approx(0.0)

    def test_single_slot_max_norm(self):
        v = np.array([[1.0, 0.0], [3.0, 1.0], [0.5, 0.5]])
        assert gus_select(v, 1).selected == (1,)

    def test_hand_enumerated_case(self):
        v = np.array([[1.0, 1.0], [1.0, 0.0], [3.0, 0.0]])
        result = gus_select(v, 2)
        assert result.selected == (2, 0)
        assert result.per_step_scores[0] == pytest.approx(3.0)
        assert result.per_step_scores[1] == pytest.approx(1 / math.sqrt(2), rel=1e-12)

    def test_row_scaling_invariance(self):
        rng = np.random.default_rng(1)
        v = rng.uniform(0.1, 1.0, size=(8, 3))
        base = gus_select(v, 4).selected
        assert gus_select(2.5 * v, 4).selected == base
        # per-row positive scaling keeps the later (correlation) picks
        scales = rng.uniform(0.5, 2.0, size=8)
        first = gus_select(v, 1).selected[0]
        scales[first] = 1.0  # keep the first pick the strongest row
        v2 = v * scales[:, None]
        if gus_select(v2, 1).selected[0] == first:
            assert gus_select(v2, 4).selected == base

    def test_no_duplicates_and_exact_length(self):
        rng = np.random.default_rng(2)
        v = rng.uniform(0.0, 1.0, size=(12, 4))
        result = gus_select(v, 7)
        assert len(result.selected) == 7
        assert len(set(result.selected)) == 7

    def test_avoids_duplicate_cluster_user(self):
        # two users on the same single cluster, one user on a distinct one:
        # the distinct user is preferred for the second slot
        v = np.array([[2.0, 0.0], [1.9, 0.0], [0.1, 0.8]])
        assert gus_select(v, 2).selected == (0, 2)

    def test_zero_rows_warned_and_excluded(self):
        v = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]])
        with pytest.warns(UserWarning, match="zero-norm"):
            result = gus_select(v, 2)
        assert 1 not in result.selected

    def test_infeasible_after_exclusions(self):
        v = np.array([[1.0, 0.0], [0.0, 0.0]])
        with pytest.warns(UserWarning):
            with pytest.raises(SelectionError):
                gus_select(v, 2)

    def test_set_variant_uses_worst_case(self):
        # candidate 3 is orthogonal to the last pick but identical to the
        # first; the set variant must reject it
        v = np.array([
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.2, 0.2, 0.9],
        ])
        assert gus_select(v, 3, variant="last").selected == (0, 1, 2)
        assert gus_select(v, 3, variant="set").selected == (0, 1, 3)


class TestGwcSelect:
    def test_single_slot_max_column_norm(self):
        rng = np.random.default_rng(3)
        h = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))
        power = PowerConfig(4.0, 1, 1e-2)
        pick = gwc_select(h, 1, power).selected[0]
        assert pick == int(np.argmax(np.linalg.norm(h, axis=0)))

    def test_orthogonal_equal_norm_tie_break(self):
        h = np.eye(4, dtype=complex) * 2.0
        power = PowerConfig(4.0, 2, 1e-2)
        assert gwc_select(h, 2, power).selected == (0, 1)

    def test_greedy_near_exhaustive(self):
        rng = np.random.default_rng(4)
        power = PowerConfig(2.0, 2, 1e-1)

        def set_rate(h, members):
            hs = h[:, members]
            return sum_rate(hs, zf_weights(hs), power, mode="physical")

        for _ in range(40):
            h = (rng.standard_normal((4, 5)) + 1j * rng.standard_normal((4, 5)))
            best = max(set_rate(h, list(c)) for c in itertools.combinations(range(5), 2))
            greedy = set_rate(h, list(gwc_select(h, 2, power).selected))
            assert greedy >= 0.9 * best

    def test_objective_recorded_per_step(self):
        rng = np.random.default_rng(5)
        h = rng.standard_normal((8, 6)) + 1j * rng.standard_normal((8, 6))
        power = PowerConfig(3.0, 3, 1e-2)
        result = gwc_select(h, 3, power)
        assert len(result.per_step_scores) == 3
        assert all(np.isfinite(result.per_step_scores))


class TestRandomSelect:
    def test_full_pool(self):
        assert sorted(random_select(5, 5, 0).selected) == [0, 1, 2, 3, 4]

    def test_seed_determinism(self):
        assert random_select(10, 3, 42).selected == random_select(10, 3, 42).selected

    def test_uniform_frequency(self):
        rng = np.random.default_rng(6)
        counts = np.zeros(10)
        n = 10_000
        for _ in range(n):
            counts[random_select(10, 1, rng).selected[0]] += 1
        np.testing.assert_allclose(counts / n, 0.1, atol=0.01)

    def test_oversized_request_rejected(self):
        with pytest.raises(ConfigurationError):
            random_select(3, 4)


class TestEstimationLoad:
    def test_reference_value(self):
        assert estimation_load(200, 10) == 4000

    def test_load_ratio(self):
        assert estimation_load(200, 10) / estimation_load(200, 50) == pytest.approx(0.2)

    def test_invalid_counts(self):
        with pytest.raises(ConfigurationError):
            estimation_load(0, 10)
