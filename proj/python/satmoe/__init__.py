# SPDX-License-Identifier: Apache-2.0
"""Python access to the satmoe core: physics evaluation, training, routing."""

import json as _json
import os as _os

from . import _core
from ._core import (  # noqa: F401
    ConfigError,
    DimensionError,
    DomainError,
    chunk_document,
    clipped_objective,
    cosine_distance,
    default_kb_dir,
    expert_assignments,
    stub_embed,
)

__all__ = [
    "ConfigError",
    "DimensionError",
    "DomainError",
    "bench_method",
    "chunk_document",
    "clipped_objective",
    "cosine_distance",
    "default_kb_dir",
    "default_run_config",
    "desk_scale_ppo",
    "evaluate_action",
    "expert_assignments",
    "retrieval_rate",
    "route",
    "stub_embed",
    "train",
    "validate_run_config",
]


def default_run_config():
    """RunConfig defaults as a dict."""
    return _json.loads(_core.default_run_config())


def desk_scale_ppo():
    """Laptop-scale PPO hyperparameters as a dict."""
    return _json.loads(_core.desk_scale_ppo())


def validate_run_config(cfg):
    """Round-trips `cfg` through the strict parser; returns the completed dict."""
    return _json.loads(_core.validate_run_config(_json.dumps(cfg)))


def evaluate_action(scenario, action, seed=1):
    """Closed-form reward and diagnostics of a raw action on a seeded channel draw."""
    return _json.loads(_core.evaluate_action(_json.dumps(scenario), list(action), seed))


def train(cfg):
    """Trains per `cfg` (a RunConfig dict) and returns the per-episode metrics."""
    return _json.loads(_core.train(_json.dumps(cfg)))


def bench_method(method, cfg, eval_episodes=20):
    """Trains or plays `method` and returns its held-out evaluation averages."""
    return _json.loads(_core.bench_method(method, _json.dumps(cfg), eval_episodes))


_PACKAGED_KB = _os.path.join(_os.path.dirname(__file__), "data", "kb")


def _kb(kb_dir):
    if kb_dir:
        return kb_dir
    return _PACKAGED_KB if _os.path.isdir(_PACKAGED_KB) else ""


def route(query, kb_dir="", k=5, chunk_size=500):
    """Two-layer routing of `query` with the stub embedding."""
    return _json.loads(_core.route(query, _kb(kb_dir), k, chunk_size))


def retrieval_rate(kb_dir="", corpus="", chunk_size=500, k=5):
    """RR of the evaluation corpus (defaults to the shipped one) with the stub embedding."""
    return _core.retrieval_rate(_kb(kb_dir), corpus, chunk_size, k)
