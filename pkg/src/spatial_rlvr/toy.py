"""Desk-scale SG-RLVR loop: a softmax policy over canned responses.

Each action of the bandit is one fixed response text. Rollouts sample G
actions, score the texts with the real reward engine, standardize the
totals within the group and take one clipped-objective ascent step.

Scenario file (JSON)::

    {"qa": {...QAPair record...},
     "actions": ["<think>...</think><answer>A</answer>", ...],
     "best_action": 0}          # optional; defaults to the top scorer
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Iterator, Sequence

import numpy as np

from .errors import SpatialRLVRError
from .grpo import (
    PolicyState,
    ResponseGroup,
    group_advantages,
    kl_estimate,
    log_probs,
    objective,
    policy_probs,
    train_step,
)
from .parser import parse_response
from .qa import LETTERS, QAPair, qa_from_record, qa_to_record
from .rewards import RewardBreakdown, RewardConfig, score_response

DEFAULT_GROUP_SIZE = 8


@dataclass(frozen=True)
class ToyScenario:
    qa: QAPair
    actions: tuple[str, ...]
    best_action: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"qa": qa_to_record(self.qa), "actions": list(self.actions),
                "best_action": self.best_action}

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "ToyScenario":
        unknown = set(doc) - {"qa", "actions", "best_action"}
        if unknown:
            raise ValueError(f"unknown scenario fields {sorted(unknown)}")
        actions = doc["actions"]
        if not isinstance(actions, list) or len(actions) < 2 or not all(isinstance(a, str) for a in actions):
            raise ValueError("'actions' must be a list of >= 2 response texts")
        return cls(qa_from_record(doc["qa"]), tuple(actions), doc.get("best_action"))


def score_actions(scenario: ToyScenario, cfg: RewardConfig) -> list[RewardBreakdown]:
    m = cfg.map_size
    return [score_response(parse_response(text, m), scenario.qa, cfg) for text in scenario.actions]


def toy_rollout(
    policy: PolicyState,
    qa: QAPair,
    action_table: Sequence[str],
    G: int = DEFAULT_GROUP_SIZE,
    seed: int | np.random.Generator = 0,
    cfg: RewardConfig | None = None,
) -> ResponseGroup:
    """Sample G actions from the current policy and score their responses."""
    if G < 2:
        raise ValueError("group size must be >= 2")
    cfg = cfg or RewardConfig()
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    p = policy_probs(policy.logits_current)
    if len(action_table) != len(p):
        raise ValueError("action table must cover every action")
    actions = rng.choice(len(p), size=G, p=p)
    breakdowns = [score_response(parse_response(action_table[a], cfg.map_size), qa, cfg)
                  for a in actions]
    rewards = [b.total for b in breakdowns]
    return ResponseGroup(
        question_id=qa.id,
        actions=tuple(int(a) for a in actions),
        rewards=tuple(rewards),
        advantages=tuple(group_advantages(rewards)),
        breakdowns=tuple(breakdowns),
    )


def _rollout_cached(policy, totals, G, rng, qa_id) -> ResponseGroup:
    p = policy_probs(policy.logits_current)
    actions = rng.choice(len(p), size=G, p=p)
    rewards = [totals[a] for a in actions]
    return ResponseGroup(qa_id, tuple(int(a) for a in actions), tuple(rewards),
                         tuple(group_advantages(rewards)))


def iter_toy_training(
    scenario: ToyScenario,
    steps: int,
    policy: PolicyState | None = None,
    seed: int = 0,
    G: int = DEFAULT_GROUP_SIZE,
    cfg: RewardConfig | None = None,
) -> Iterator[dict[str, Any]]:
    """Yield one trace record per training step."""
    cfg = cfg or RewardConfig()
    n = len(scenario.actions)
    policy = policy or PolicyState.uniform(n)
    # responses are fixed texts, so each one is scored once up front
    totals = np.array([b.total for b in score_actions(scenario, cfg)])
    best = scenario.best_action if scenario.best_action is not None else int(np.argmax(totals))
    rng = np.random.default_rng(seed)
    for step in range(steps):
        group = _rollout_cached(policy, totals, G, rng, scenario.qa.id)
        fresh = replace(policy, logits_old=policy.logits_current)
        a = np.asarray(group.actions)
        lp = log_probs(fresh.logits_current)[a]
        kl = kl_estimate(lp, log_probs(fresh.logits_ref)[a])
        record = {
            "step": step,
            "expected_reward": float(policy_probs(policy.logits_current) @ totals),
            "objective": objective(fresh.logits_current, fresh, group.actions, group.advantages),
            "mean_kl": float(np.mean(kl)),
            "best_action_prob": float(policy_probs(policy.logits_current)[best]),
        }
        policy = train_step(policy, group, group.actions)
        yield record


def run_toy_training(
    scenario: ToyScenario,
    steps: int,
    policy: PolicyState | None = None,
    seed: int = 0,
    G: int = DEFAULT_GROUP_SIZE,
    cfg: RewardConfig | None = None,
) -> list[dict[str, Any]]:
    return list(iter_toy_training(scenario, steps, policy, seed, G, cfg))


def steps_to_threshold(trace: Sequence[dict[str, Any]], threshold: float = 0.9) -> int | None:
    for rec in trace:
        if rec["best_action_prob"] > threshold:
            return rec["step"]
    return None


# --- the documented four-action spatial QA bandit ----------------------------

def _reasoning(qa: QAPair, words: int) -> str:
    objects = [str(o) for o in qa.meta.get("objects", [])] or ["objects"]
    sentences = []
    k = 0
    while sum(len(s.split()) for s in sentences) < words:
        obj = objects[k % len(objects)]
        sentences.append(
            f"Step {k + 1}: I locate the {obj} in the frames and compare its "
            f"closest surface with the {objects[0]} before moving on.")
        k += 1
    return " ".join(" ".join(sentences).split()[:words])


def default_scenario(seed: int = 0) -> ToyScenario:
    """Four canned responses to one relative-distance question.

    0: correct answer, exact map, think length inside the bonus window
    1: correct answer, short think, no map
    2: wrong answer, exact map
    3: untagged answer (malformed)
    """
    from .generation import gen_relative_distance
    from .synth import random_scene

    qa = None
    for k in range(100):
        try:
            qa = gen_relative_distance(random_scene(seed * 1000 + k), seed)
            break
        except SpatialRLVRError:  # too few unique objects, or a tie
            continue
    if qa is None:
        raise RuntimeError("could not build a toy question")
    right = LETTERS[qa.answer_choice]
    wrong = LETTERS[(qa.answer_choice + 1) % len(qa.options)]
    exact = qa.gt_map.to_json()
    long_think = _reasoning(qa, 400)
    short_think = _reasoning(qa, 40)
    actions = (
        f"<think>{long_think}</think><map>{exact}</map><answer>{right}</answer>",
        f"<think>{short_think}</think><answer>{right}</answer>",
        f"<think>{long_think}</think><map>{exact}</map><answer>{wrong}</answer>",
        f"The answer is {right}.",
    )
    return ToyScenario(qa, actions, best_action=0)


def two_action_scenario(seed: int = 0) -> ToyScenario:
    """Correct well-formed answer vs. malformed answer."""
    base = default_scenario(seed)
    return ToyScenario(base.qa, (base.actions[0], base.actions[3]), best_action=0)
