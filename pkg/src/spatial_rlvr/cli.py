"""Command-line entry point: gen, filter, score, sample, train-toy, stats.

Exit status is 0 on success, 1 on a domain or I/O error and 2 on a usage
error. Settings resolve as flags > ``--config`` file > built-in defaults.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .dataset import (
    corpus_stats,
    difficulty_sample,
    dumps_record,
    export_jsonl,
    grade_scores,
    import_jsonl,
)
from .errors import SpatialRLVRError
from .filters import FilterConfig, apply_filters
from .generation import generate_scene_qa
from .grpo import PolicyState
from .parser import parse_response
from .rewards import RewardConfig, breakdown_record, score_response
from .scene import parse_scene
from .synth import random_scene
from .toy import ToyScenario, default_scenario, run_toy_training, steps_to_threshold

log = logging.getLogger("spatial_rlvr")

POLICY_KEYS = {"step_size", "clip_epsilon", "kl_beta"}


def _load_config(path: str | None) -> dict[str, Any]:
    if not path:
        return {}
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict):
        raise ValueError("config file must hold a JSON object")
    unknown = set(doc) - {"reward", "filter", "policy", "seed"}
    if unknown:
        raise ValueError(f"unknown config sections {sorted(unknown)}")
    return doc


def _build(cls, section: dict[str, Any], overrides: dict[str, Any]):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(section) - names
    if unknown:
        raise ValueError(f"unknown {cls.__name__} keys {sorted(unknown)}")
    values = {**section, **{k: v for k, v in overrides.items() if v is not None}}
    if "thresholds" in values:
        values["thresholds"] = tuple(values["thresholds"])
    if "noisy_categories" in values:
        values["noisy_categories"] = frozenset(values["noisy_categories"])
    return cls(**values)


def _seed(args, conf) -> int:
    if args.seed is not None:
        return args.seed
    return int(conf.get("seed", 0))


def _read_qa(path: str) -> list:
    diags: list[str] = []
    with open(path, encoding="utf-8") as fh:
        pairs = import_jsonl(fh, diags)
    for d in diags:
        print(f"{path}: {d}", file=sys.stderr)
    return pairs


def _read_jsonl(path: str) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                try:
                    out.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc.msg}") from exc
    return out


def _write_lines(path: str | None, lines: Sequence[str]) -> None:
    if path is None or path == "-":
        sys.stdout.writelines(lines)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(lines)


def _scene_files(path: str) -> list[Path]:
    p = Path(path)
    if p.is_dir():
        return sorted(p.glob("*.json"))
    return [p]


def cmd_gen(args, conf) -> int:
    seed = _seed(args, conf)
    if args.synthetic is not None:
        scenes = [random_scene(seed * 100_003 + k) for k in range(args.synthetic)]
    else:
        scenes = [parse_scene(f.read_text(encoding="utf-8")) for f in _scene_files(args.scenes)]
    pairs = []
    for scene in sorted(scenes, key=lambda s: s.scene_id):
        pairs += generate_scene_qa(scene, seed, per_task=args.per_task)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        n = export_jsonl(pairs, fh)
    print(f"wrote {n} QA pairs from {len(scenes)} scenes to {args.out}", file=sys.stderr)
    return 0


def cmd_filter(args, conf) -> int:
    cfg = _build(FilterConfig, conf.get("filter", {}),
                 {"seed": args.seed, "max_qa_per_video": args.max_per_video})
    pairs = _read_qa(args.qa)
    diags: list[str] = []
    kept = apply_filters(pairs, cfg, diags)
    for d in diags:
        print(d, file=sys.stderr)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        export_jsonl(kept, fh)
    return 0


def cmd_score(args, conf) -> int:
    cfg = _build(RewardConfig, conf.get("reward", {}), {})
    qa_by_id = {qa.id: qa for qa in _read_qa(args.qa)}
    lines, unmatched = [], []
    for k, rec in enumerate(_read_jsonl(args.responses)):
        qa = qa_by_id.get(rec.get("qa_id"))
        if qa is None or not isinstance(rec.get("response_text"), str):
            unmatched.append(str(rec.get("qa_id")))
            continue
        b = score_response(parse_response(rec["response_text"], cfg.map_size), qa, cfg)
        lines.append(dumps_record(breakdown_record(str(rec.get("id", f"{qa.id}#{k}")), qa.id, b)) + "\n")
    _write_lines(args.out, lines)
    if unmatched:
        print(f"{len(unmatched)} responses without a matching QA pair: "
              + ", ".join(unmatched[:10]), file=sys.stderr)
    return 0


def cmd_sample(args, conf) -> int:
    split = difficulty_sample(grade_scores(_read_jsonl(args.scores)))
    keep = {s.qa_id for s in split.kept}
    pairs = [qa for qa in _read_qa(args.qa) if qa.id in keep]
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        export_jsonl(pairs, fh)
    report = {"kept": len(split.kept), "dropped_easy": len(split.dropped_easy),
              "dropped_hard": len(split.dropped_hard)}
    print(dumps_record(report), file=sys.stderr)
    return 0


def cmd_train_toy(args, conf) -> int:
    seed = _seed(args, conf)
    rcfg = _build(RewardConfig, conf.get("reward", {}),
                  {"use_map_reward": False if args.no_map else None})
    if args.scenario:
        scenario = ToyScenario.from_dict(json.loads(Path(args.scenario).read_text(encoding="utf-8")))
    else:
        scenario = default_scenario(seed)
    pconf = conf.get("policy", {})
    unknown = set(pconf) - POLICY_KEYS
    if unknown:
        raise ValueError(f"unknown policy keys {sorted(unknown)}")
    overrides = {"step_size": args.step_size, "clip_epsilon": args.clip_epsilon, "kl_beta": args.kl_beta}
    pkw = {**pconf, **{k: v for k, v in overrides.items() if v is not None}}
    policy = PolicyState.uniform(len(scenario.actions), **pkw)
    trace = run_toy_training(scenario, args.steps, policy, seed, args.group_size, rcfg)
    _write_lines(args.out, [dumps_record(r) + "\n" for r in trace])
    hit = steps_to_threshold(trace)
    final = trace[-1]["best_action_prob"] if trace else float("nan")
    print(f"final best-action probability {final:.4f}; "
          f"first step above 0.9: {hit if hit is not None else 'never'}", file=sys.stderr)
    return 0


def cmd_stats(args, conf) -> int:
    stats = corpus_stats(_read_qa(args.qa), args.bins)
    _write_lines(args.out, [json.dumps(stats.to_dict(), indent=2, sort_keys=True) + "\n"])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spatial-rlvr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", help="JSON config file with reward/filter/policy sections")
        p.add_argument("--seed", type=int, help="random seed (default 0)")
        p.set_defaults(func=func)
        return p

    p = add("gen", cmd_gen, "generate spatial QA pairs from scene metadata")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenes", help="scene JSON file or directory of *.json files")
    src.add_argument("--synthetic", type=int, metavar="N", help="use N random synthetic scenes")
    p.add_argument("--out", required=True, help="output QA JSONL")
    p.add_argument("--per-task", type=int, default=1, help="pairs per task type per scene")

    p = add("filter", cmd_filter, "filter and balance a QA corpus")
    p.add_argument("--qa", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-per-video", type=int, help="cap per scene and task type")

    p = add("score", cmd_score, "score responses against QA pairs")
    p.add_argument("--qa", required=True)
    p.add_argument("--responses", required=True, help="JSONL with qa_id and response_text")
    p.add_argument("--out", help="score JSONL (default stdout)")

    p = add("sample", cmd_sample, "keep QA pairs answered partially correctly")
    p.add_argument("--scores", required=True, help="score JSONL from 'score'")
    p.add_argument("--qa", required=True)
    p.add_argument("--out", required=True)

    p = add("train-toy", cmd_train_toy, "run the toy GRPO bandit and write a trace")
    p.add_argument("--scenario", help="toy scenario JSON (default: built-in 4-action bandit)")
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--group-size", type=int, default=8)
    p.add_argument("--step-size", type=float)
    p.add_argument("--clip-epsilon", type=float)
    p.add_argument("--kl-beta", type=float)
    p.add_argument("--no-map", action="store_true", help="zero the map reward")
    p.add_argument("--out", help="trace JSONL (default stdout)")

    p = add("stats", cmd_stats, "corpus statistics report")
    p.add_argument("--qa", required=True)
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--out", help="report JSON (default stdout)")
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        conf = _load_config(args.config)
        return args.func(args, conf)
    except (SpatialRLVRError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
