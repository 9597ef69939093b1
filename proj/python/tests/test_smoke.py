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

import math
import os
from pathlib import Path

import proofbeam

FIXTURES = Path(os.environ.get("PROOFBEAM_FIXTURES", Path(__file__).resolve().parents[2] / "tests" / "fixtures"))
REV = FIXTURES / "rev_space.json"

OUTLINE = "\n".join([
    'lemma "rev (rev xs) = xs"',
    "proof (induction xs)",
    "  case Nil",
    "  show ?case by simp",
    "next",
    "  case (Cons a xs)",
    "  show ?case sorry",
    "qed",
])


def test_temperatures():
    for s in range(21):
        assert math.isclose(proofbeam.step_temperature(s), min(0.9, 0.5 + 0.1 * s), abs_tol=1e-12)
        assert math.isclose(proofbeam.finish_temperature(s), min(0.6, 0.2 + 0.05 * s), abs_tol=1e-12)


def test_scripts_and_holes():
    lines = proofbeam.parse_script(OUTLINE)
    assert lines[0] == 'lemma "rev (rev xs) = xs"'
    holes = proofbeam.find_holes(OUTLINE)
    assert len(holes) == 1
    assert len(proofbeam.hole_id(OUTLINE, 0)) == 16
    assert proofbeam.normalize_state("a  \t b\n\n c") == "a b\n c"
    assert proofbeam.state_fingerprint("x") == proofbeam.state_fingerprint("x")


def test_prove_default_oracle():
    r = proofbeam.prove("rev (rev xs) = xs", REV, budget_s=10)
    assert r["solved"]
    assert all(c.startswith(("apply ", "by ")) or c == "done" for c in r["commands"])
    assert r["verifier_calls"] > 0


def test_prove_with_python_proposer():
    calls = []

    def silent(system, user, temperature, n):
        calls.append(temperature)
        return ""

    r = proofbeam.prove("rev (rev xs) = xs", proofbeam.load_space(REV), proposer=silent, budget_s=2)
    assert not r["solved"]
    assert calls and all(0.0 <= t <= 0.9 for t in calls)


def test_plan_auto_fills_hole():
    space = proofbeam.load_space(REV)
    edges = {}
    for e in space["edges"]:
        edges.setdefault(e["from"], []).append(e["cmd"])

    def proposer(system, user, temperature, n):
        if "outline" in system:
            return OUTLINE
        goal = user.split("GOAL:", 1)[1].strip().splitlines()[0] if "GOAL:" in user else ""
        if goal == "rev (rev []) = []":
            return "by simp"
        if goal == "rev (rev (a # xs)) = a # xs":
            return "apply simp\nby auto"
        return ""

    r = proofbeam.plan("rev (rev xs) = xs", space, proposer, budget_s=20, temperatures=[0.3], samples_per_temp=1)
    assert r["solved"], r
    assert r["holes_remaining"] == 0
    assert r["script"].startswith('lemma "rev (rev xs) = xs"')
    assert "sorry" not in r["script"]


def test_premises_and_jaccard():
    idx = proofbeam.PremiseIndex()
    idx.add("rev_rev_ident", "rev (rev xs) = xs")
    idx.add("append_Nil", "xs @ [] = xs")
    idx.finalize()
    top = idx.select("rev (rev ys) = ys", 1)
    assert top[0][0] == "rev_rev_ident"
    assert proofbeam.jaccard(["a", "b"], ["b", "c"]) == 1 / 3
    assert proofbeam.jaccard([], []) == 1.0


def test_train_logistic_separable():
    xs = [[1.0] + [0.0] * (proofbeam.FEATURE_DIM - 1), [-1.0] + [0.0] * (proofbeam.FEATURE_DIM - 1)] * 20
    ys = [1, 0] * 20
    w, b = proofbeam.train_logistic(xs, ys)
    assert w[0] > 0


def test_cli_and_generated_space(tmp_path):
    out = tmp_path / "space.json"
    code, _, _ = proofbeam.cli("gen-space", "--depth", 3, "--branching", 2, "--solutions", 1, "--seed", 7, "-o", out)
    assert code == 0
    assert proofbeam.load_space(out) == proofbeam.generate_space(3, 2, 1, 7)
    code, _, err = proofbeam.cli("prove", "--nope")
    assert code == 2 and err
