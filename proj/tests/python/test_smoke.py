import itertools
import math

import pytest

import dtfdd

TINY = """
[topology]
area_m = 1000
bs_positions = 250,500 | 750,500
cell_ue_types = gue,uav | gue,uav
[radio]
subchannels = 2
subframes = 4
[learning]
epochs = 3
steps = 10
"""


def brute_force(n, u):
    count = 0
    for bits in itertools.product((0, 1), repeat=n * u):
        rows = [bits[r * u:(r + 1) * u] for r in range(n)]
        count += all(sum(r) <= 1 for r in rows)
    return count


@pytest.mark.parametrize("n,u", [(1, 1), (2, 2), (3, 2), (4, 3)])
def test_assignment_count_matches_brute_force(n, u):
    assert dtfdd.count_subchannel_assignments(n, u) == brute_force(n, u)
    assert dtfdd.count_subchannel_assignments(n, u) == (u + 1) ** n


def test_action_space_round_trip():
    space = dtfdd.ActionSpace(2, 2, 2)
    assert len(space) == dtfdd.action_space_size(2, 2, 2) == 243
    for i in range(len(space)):
        a = space.decode(i)
        assert space.is_valid(a)
        assert space.encode(a) == i


def test_knn_returns_exact_embedding_first():
    space = dtfdd.ActionSpace(3, 2, 4)
    target = 1234
    assert space.knn(space.embed(target), 1) == [target]


def test_metropolis_weights_doubly_stochastic():
    w = dtfdd.metropolis_weights(4, [(0, 1), (1, 2), (2, 3), (0, 2)])
    assert w.shape == (4, 4)
    for r in range(4):
        assert math.isclose(w[r].sum(), 1.0, abs_tol=1e-12)
        for c in range(4):
            assert w[r, c] == w[c, r]


def test_los_probability_in_unit_interval():
    p = dtfdd.los_probability(300.0, 10.0, 100.0)
    assert 0.0 < p <= 1.0


def test_bad_config_raises():
    with pytest.raises(dtfdd.ConfigError, match="unknown"):
        dtfdd.render_config("[radio]\nnot_a_key = 3\n")


def test_run_is_deterministic_and_reports_each_epoch():
    seen = []
    first = dtfdd.run(TINY, "fwddpg", seed=7, on_epoch=seen.append)
    second = dtfdd.run(TINY, "fwddpg", seed=7)
    assert len(first) == 3 and len(seen) == 3
    assert first == second
    for m in first:
        assert 0.0 <= m["qos_probability"] <= 1.0
        assert len(m["dl_fraction"]) == 2


def test_every_policy_runs():
    for policy in dtfdd.policies():
        rows = dtfdd.run(TINY, policy, seed=1, epochs=1)
        assert len(rows) == 1
