# Copyright 2026 The ddrisk Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
import math

import numpy as np
import pytest

import ddrisk


def test_bounds():
    assert ddrisk.dd_risk_exact(0.1, 0.51083) == pytest.approx(0.5, abs=1e-5)
    assert ddrisk.dd_risk_exact(math.exp(-0.7), 0.7) == 1.0
    assert ddrisk.dd_risk_bound(0.1, 0.5) >= ddrisk.dd_risk_exact(0.1, 0.5)
    v = ddrisk.dd_risk_bound_simplified(0.1, 0.5)
    assert v == pytest.approx((0.5 + math.log(2)) / math.log(10), abs=1e-12)
    assert v == pytest.approx(0.51819, abs=2e-5)
    with pytest.raises(ValueError):
        ddrisk.dd_risk_exact(1.5, 0.1)


def test_entropy():
    assert ddrisk.binned_entropy([2, 2]) == pytest.approx(math.log(2))
    pts = np.random.default_rng(0).random((10000, 2))
    assert 0.0 <= ddrisk.entropy_gap(pts, 100) < 0.65


def test_task_sampling_and_training():
    task = ddrisk.sample_task(7)
    assert task == ddrisk.sample_task(7)
    pts, labels = ddrisk.sample_uniform(task, 300, 1)
    assert pts.shape == (300, 2)
    assert np.array_equal(labels, ddrisk.true_labels(task, pts))

    model, losses = ddrisk.train(pts, labels, epochs=20, hidden=[16, 16], seed=3)
    assert losses[-1] < losses[0]
    assert model.wdl2 > 0.0
    pred = model.predict(pts)
    assert (pred != labels).mean() < 0.2


def test_rebalance_and_adversary():
    task = ddrisk.sample_task(1)
    pts, labels = ddrisk.sample_truncated_gaussian(task, 400, 0.2, 5)
    w = ddrisk.rebalance_weights(pts, labels, density="gmm", seed=2)
    assert len(w) == 400
    assert np.mean(w) == pytest.approx(1.0)

    pool = np.random.default_rng(1).random((5000, 2))
    truth = np.zeros(5000, dtype=int)
    pred = ((pool[:, 0] < 0.3) & (pool[:, 1] < 0.3)).astype(int)
    res = ddrisk.greedy_adversarial(pool, truth, pred, 0.5, 10)
    r = pred.mean()
    assert r <= res["risk"] <= ddrisk.dd_risk_bound(r, 0.5)


def test_single_run():
    rep = ddrisk.run_experiment({
        "experiment": "single", "seeds": 1, "n_values": [80], "gamma_values": [0.5],
        "pool_m": 1000, "learner": {"hidden": [8], "epochs": 2, "min_steps": 0, "max_steps": 0},
    })
    assert rep["valid"]
    assert rep["dd"][0]["dd_risk_greedy"] <= rep["dd"][0]["dd_bound"]
