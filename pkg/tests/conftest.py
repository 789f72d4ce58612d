import numpy as np
import pytest

from gusim.gscm import Cluster, Scenario, ScenarioConfig, SPEED_OF_LIGHT


def make_scenario(users_xy, cluster_specs, **config_overrides):
    """Hand-built scenario: explicit user xy positions and cluster
    (position, vr_center) pairs; delays follow the single-bounce rule."""
    defaults = dict(
        cell_half_side=1000.0,
        num_users=len(users_xy),
        num_clusters=len(cluster_specs),
        mpcs_per_cluster=6,
        shadowing_sigma_db=0.0,
        rng_seed=0,
    )
    defaults.update(config_overrides)
    cfg = ScenarioConfig(**defaults)
    bs = np.array([0.0, 0.0, cfg.bs_height])
    users = np.array([[x, y, cfg.ms_height] for x, y in users_xy])
    clusters = []
    for pos, vr in cluster_specs:
        pos = np.asarray(pos, dtype=float)
        vr = np.asarray(vr, dtype=float)
        vr3 = np.array([vr[0], vr[1], cfg.ms_height])
        delay = (np.linalg.norm(pos - bs) + np.linalg.norm(vr3 - pos)) / SPEED_OF_LIGHT
        clusters.append(Cluster(position=pos, vr_center=vr, delay=float(delay),
                                shadow_gain=1.0))
    return Scenario(config=cfg, bs_position=bs, users=users,
                    clusters=tuple(clusters))


@pytest.fixture
def small_scenario():
    """One user inside the visibility region of a single cluster."""
    return make_scenario(
        users_xy=[(200.0, 0.0)],
        cluster_specs=[(np.array([150.0, 50.0, 20.0]), np.array([210.0, 0.0]))],
    )
