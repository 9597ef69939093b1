# Copyright 2026 The Proofbeam Authors. All Rights Reserved.
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
# ==============================================================================
"""Verifier-in-the-loop proof search over a mock prover."""

import json
from pathlib import Path

from ._proofbeam import (
    FEATURE_DIM,
    PremiseIndex,
    finish_temperature,
    find_holes,
    hole_id,
    jaccard,
    normalize_state,
    parse_script,
    state_fingerprint,
    step_temperature,
    train_logistic,
)
from . import _proofbeam as _core

__all__ = [
    "FEATURE_DIM",
    "PremiseIndex",
    "cli",
    "finish_temperature",
    "find_holes",
    "generate_space",
    "hole_id",
    "jaccard",
    "load_space",
    "normalize_state",
    "parse_script",
    "plan",
    "prove",
    "state_fingerprint",
    "step_temperature",
    "train_logistic",
]


def _space_text(space):
    if isinstance(space, dict):
        return json.dumps(space)
    if isinstance(space, Path) or (isinstance(space, str) and not space.lstrip().startswith("{")):
        return Path(space).read_text()
    return space


def load_space(path):
    """Reads a synthetic space fixture as a dict."""
    return json.loads(Path(path).read_text())


def generate_space(depth, branching, solutions, seed):
    """Deterministic synthetic space as a dict."""
    return json.loads(_core.generate_space(depth, branching, solutions, seed))


def prove(goal, space, proposer=None, **config):
    """Stepwise beam search against a mock prover.

    `space` is a dict, a JSON string or a fixture path. `proposer` is an
    optional callable (system, user, temperature, n) -> str; the default
    proposes the space's true edges. Extra keyword arguments are search
    config keys such as beam_width, max_depth or budget_s.
    """
    return json.loads(_core._prove(goal, _space_text(space), json.dumps(config), proposer))


def plan(goal, space, proposer, **config):
    """Outline or plan-and-fill run; `mode` is "auto" (default) or "outline"."""
    return json.loads(_core._plan(goal, _space_text(space), json.dumps(config), proposer))


def cli(*args):
    """Runs the command-line tool in process; returns (code, stdout, stderr)."""
    return _core._cli([str(a) for a in args])
