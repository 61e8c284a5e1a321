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
"""Distributionally diverse risk toolkit."""

import json

from ._ddrisk import (
    DdriskError,
    Model,
    bernoulli_kl,
    binned_entropy,
    dd_risk_bound,
    dd_risk_bound_simplified,
    dd_risk_exact,
    entropy_gap,
    greedy_adversarial,
    is_uniform_risk,
    rebalance_weights,
    train,
    true_density_truncated_gaussian,
)
from . import _ddrisk


def sample_task(seed, component_std=0.15):
    return json.loads(_ddrisk._sample_task(seed, component_std))


def true_labels(task, points):
    return _ddrisk._true_labels(json.dumps(task), points)


def sample_uniform(task, n, seed):
    return _ddrisk._sample_uniform(json.dumps(task), n, seed)


def sample_truncated_gaussian(task, n, sigma, seed):
    return _ddrisk._sample_truncated_gaussian(json.dumps(task), n, sigma, seed)


def run_experiment(config):
    """Runs fig1 / fig3 (CSV text) or single (dict) from a config mapping."""
    out = _ddrisk._run_experiment(json.dumps(config))
    return json.loads(out) if config.get("experiment") == "single" else out


__all__ = [
    "DdriskError",
    "Model",
    "bernoulli_kl",
    "binned_entropy",
    "dd_risk_bound",
    "dd_risk_bound_simplified",
    "dd_risk_exact",
    "entropy_gap",
    "greedy_adversarial",
    "is_uniform_risk",
    "rebalance_weights",
    "run_experiment",
    "sample_task",
    "sample_truncated_gaussian",
    "sample_uniform",
    "train",
    "true_density_truncated_gaussian",
    "true_labels",
]
