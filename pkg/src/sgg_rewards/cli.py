"""Command-line entry point: evaluate, reward, advantage, parse-check.

All batch I/O is JSONL (line-oriented, streamable, diffable). Outputs are
deterministic for fixed inputs and config, regardless of worker count; the
evaluation report's timestamp can be suppressed with --no-timestamp.

Exit codes: 0 success, 1 usage or I/O error, 2 empty input, 3 invalid
configuration value.
"""

from __future__ import annotations

import argparse
import csv
import json
import multiprocessing
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator, Optional, TextIO

from .dataset import GroundTruthStore, PromptSpec, load_class_list, render_prompt
from .embedding import EmbeddingTable, load_table
from .evaluation import (
    EmptyCorpusError,
    EvalConfig,
    EvalReport,
    corpus_metrics,
    record_from_prediction,
)
from .grpo import GroupSample, GroupTooSmallError, GrpoConfig, advantages, grpo_objective
from .matching import CostWeights
from .parsing import ParseStatus, parse_response
from .rewards import RewardConfig, RewardVariant, candidate_reward

CONFIG_ENV_VAR = "SGGR_CONFIG"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_EMPTY = 2
EXIT_CONFIG = 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on usage errors; our contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(message, EXIT_USAGE)


def _json_line(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def _iter_lines(path: str) -> Iterator[tuple[int, str]]:
    # open eagerly so unreadable paths fail in the main thread, not in the
    # pool's task-feeder thread
    try:
        handle = open(path, "r", encoding="utf-8", errors="replace")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_USAGE)

    def _lines():
        with handle:
            for lineno, line in enumerate(handle, start=1):
                if line.strip():
                    yield lineno, line

    return _lines()


# Worker-process state, set once per worker by the pool initializer (or
# directly for in-process execution). Read-only afterwards.
_STATE: dict = {}


def _init_state(state: dict) -> None:
    global _STATE
    _STATE = state


def _pool_map(func, items: Iterable, workers: int, state: dict) -> Iterator:
    """Order-preserving map, in-process or across a fork pool."""
    if workers <= 1:
        _init_state(state)
        return map(func, items)
    ctx = multiprocessing.get_context("fork")
    pool = ctx.Pool(workers, initializer=_init_state, initargs=(state,))

    def _results():
        with pool:
            yield from pool.imap(func, items, chunksize=32)

    return _results()


# ---------------------------------------------------------------------------
# reward

def _reward_line(item: tuple[int, str]) -> str:
    lineno, line = item
    store: GroundTruthStore = _STATE["store"]
    config: RewardConfig = _STATE["reward_config"]
    table: Optional[EmbeddingTable] = _STATE["table"]
    try:
        payload = json.loads(line)
        if not isinstance(payload, dict):
            raise ValueError("record is not a JSON object")
    except ValueError as exc:
        return _json_line({"error": f"line {lineno}: {exc}"})
    image_id = payload.get("image_id")
    response = payload.get("response_text")
    if not isinstance(image_id, str) or not isinstance(response, str):
        return _json_line({"error": f"line {lineno}: expected image_id and response_text"})
    record = store.get(image_id)
    if record is None:
        return _json_line({"image_id": image_id, "error": "unknown image_id"})
    breakdown = candidate_reward(response, record.gt, config, table)
    out = {"image_id": image_id}
    out.update(breakdown.to_json_dict())
    return _json_line(out)


def cmd_reward(args: argparse.Namespace, out: TextIO) -> int:
    config = RewardConfig(
        variant=RewardVariant(args.variant or "hard"),
        iou_threshold=_default(args.iou_thresh, 0.5),
        weights=CostWeights(
            _default(args.lambda1, 1.0),
            _default(args.lambda2, 1.0),
            _default(args.lambda3, 1.0),
        ),
        include_format=not args.no_format,
        format_mode=args.parse_mode or "strict",
    )
    state = {
        "store": GroundTruthStore.from_file(args.gt),
        "reward_config": config,
        "table": load_table(args.embeddings) if args.embeddings else None,
    }
    count = 0
    for line in _pool_map(_reward_line, _iter_lines(args.candidates), args.workers, state):
        out.write(line + "\n")
        count += 1
    if count == 0:
        raise CliError(f"no candidate records in {args.candidates}", EXIT_EMPTY)
    return EXIT_OK


# ---------------------------------------------------------------------------
# evaluate

def _eval_line(item: tuple[int, str]):
    lineno, line = item
    store: GroundTruthStore = _STATE["store"]
    cfg: EvalConfig = _STATE["eval_config"]
    try:
        payload = json.loads(line)
        if not isinstance(payload, dict):
            raise ValueError("record is not a JSON object")
    except ValueError as exc:
        return ("skip", f"line {lineno}: {exc}")
    image_id = payload.get("image_id")
    if not isinstance(image_id, str):
        return ("skip", f"line {lineno}: missing image_id")
    record = store.get(image_id)
    if record is None:
        return ("skip", f"line {lineno}: unknown image_id {image_id!r}")
    return ("ok", record_from_prediction(payload, record.gt, cfg))


def cmd_evaluate(args: argparse.Namespace, out: TextIO) -> int:
    cfg = EvalConfig(
        iou_threshold=_default(args.iou_thresh, 0.5),
        top_k=args.top_k,
        parse_mode=args.parse_mode or "lenient",
        predicate_vocabulary=tuple(load_class_list(args.predicates)) if args.predicates else None,
    )
    state = {"store": GroundTruthStore.from_file(args.gt), "eval_config": cfg}
    skipped: list[str] = []

    def _records():
        for kind, value in _pool_map(_eval_line, _iter_lines(args.pred), args.workers, state):
            if kind == "ok":
                yield value
            else:
                skipped.append(value)

    try:
        report = corpus_metrics(_records(), cfg)
    except EmptyCorpusError as exc:
        raise CliError(str(exc), EXIT_EMPTY)
    report.diagnostics.extend(skipped)

    payload = report.to_json_dict()
    if not args.no_timestamp:
        payload["generated_at"] = datetime.now(timezone.utc).isoformat()
    out.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    if args.csv:
        _write_predicate_csv(args.csv, report)
    return EXIT_OK


def _write_predicate_csv(path: str, report: EvalReport) -> None:
    rows = sorted(
        report.per_predicate_recall.items(), key=lambda kv: (-kv[1].gt_count, kv[0])
    )
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["predicate", "gt_count", "recall"])
        for predicate, stats in rows:
            writer.writerow([predicate, stats.gt_count, f"{stats.recall:.4f}"])


# ---------------------------------------------------------------------------
# advantage

def _advantage_line(item: tuple[int, str]) -> str:
    lineno, line = item
    config: GrpoConfig = _STATE["grpo_config"]
    try:
        payload = json.loads(line)
        if not isinstance(payload, dict):
            raise ValueError("record is not a JSON object")
        rewards = payload["rewards"]
        if not isinstance(rewards, list):
            raise ValueError("'rewards' must be a list")
    except (ValueError, KeyError) as exc:
        return _json_line({"error": f"line {lineno}: {exc}"})
    group_id = payload.get("group_id", f"line-{lineno}")
    try:
        advs = advantages([float(r) for r in rewards], config.std_floor)
        result = {"group_id": group_id, "advantages": advs}
        if payload.get("ratios") is not None:
            sample = GroupSample.from_lists(
                rewards, payload.get("ratios"), payload.get("ref_ratios")
            )
            result["objective"] = grpo_objective(sample, config)
        return _json_line(result)
    except (GroupTooSmallError, ValueError, TypeError) as exc:
        return _json_line({"group_id": group_id, "error": str(exc)})


def cmd_advantage(args: argparse.Namespace, out: TextIO) -> int:
    config = GrpoConfig(
        epsilon=_default(args.epsilon, 0.2),
        beta=_default(args.beta, 0.04),
        std_floor=_default(args.group_floor, 1e-6),
    )
    state = {"grpo_config": config}
    count = 0
    for line in _pool_map(_advantage_line, _iter_lines(args.groups), args.workers, state):
        out.write(line + "\n")
        count += 1
    if count == 0:
        raise CliError(f"no group records in {args.groups}", EXIT_EMPTY)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parse-check

def _parse_check_line(item: tuple[int, str]) -> str:
    _, line = item
    mode = _STATE["parse_mode"]
    try:
        payload = json.loads(line)
    except ValueError:
        payload = None
    if isinstance(payload, dict) and isinstance(payload.get("response_text"), str):
        response = payload["response_text"]
    else:
        response = line
    return parse_response(response, mode).status.value


def cmd_parse_check(args: argparse.Namespace, out: TextIO) -> int:
    state = {"parse_mode": args.parse_mode or "lenient"}
    counts = {status.value: 0 for status in ParseStatus}
    total = 0
    for status in _pool_map(_parse_check_line, _iter_lines(args.responses), args.workers, state):
        counts[status] += 1
        total += 1
    out.write(json.dumps({"total": total, "counts": counts}, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# render-prompt

def cmd_render_prompt(args: argparse.Namespace, out: TextIO) -> int:
    spec = PromptSpec(
        with_categories=args.with_categories,
        object_classes=load_class_list(args.object_classes) if args.object_classes else None,
        relation_classes=load_class_list(args.relation_classes) if args.relation_classes else None,
    )
    out.write(render_prompt(spec))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser assembly

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--workers", type=int, default=None,
                        help="worker processes (default: available parallelism)")
    parser.add_argument("--config", default=None,
                        help=f"JSON config file (default from ${CONFIG_ENV_VAR})")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sggr", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="SGDET metrics for a predictions file")
    p.add_argument("--gt", required=True, help="ground-truth JSONL")
    p.add_argument("--pred", required=True, help="predictions JSONL")
    p.add_argument("--iou-thresh", type=float, default=None)
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--parse-mode", choices=["strict", "lenient"], default=None)
    p.add_argument("--predicates", default=None, help="closed predicate vocabulary file")
    p.add_argument("--csv", default=None, help="write per-predicate recall CSV here")
    p.add_argument("--no-timestamp", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("reward", help="per-candidate reward breakdowns")
    p.add_argument("--gt", required=True)
    p.add_argument("--candidates", required=True, help="candidates JSONL")
    p.add_argument("--variant", choices=[v.value for v in RewardVariant], default=None)
    p.add_argument("--iou-thresh", type=float, default=None)
    p.add_argument("--lambda1", type=float, default=None)
    p.add_argument("--lambda2", type=float, default=None)
    p.add_argument("--lambda3", type=float, default=None)
    p.add_argument("--embeddings", default=None, help="word-vector text file")
    p.add_argument("--parse-mode", choices=["strict", "lenient"], default=None)
    p.add_argument("--no-format", action="store_true", help="exclude the format reward")
    _add_common(p)
    p.set_defaults(func=cmd_reward)

    p = sub.add_parser("advantage", help="group-relative advantages and objective")
    p.add_argument("groups", help="groups JSONL: {group_id, rewards, ratios?, ref_ratios?}")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--group-floor", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_advantage)

    p = sub.add_parser("parse-check", help="parse-status summary for a responses file")
    p.add_argument("responses", help="JSONL with response_text fields, or raw text lines")
    p.add_argument("--parse-mode", choices=["strict", "lenient"], default=None)
    _add_common(p)
    p.set_defaults(func=cmd_parse_check)

    p = sub.add_parser("render-prompt", help="render the scene-graph prompt template")
    p.add_argument("--with-categories", action="store_true")
    p.add_argument("--object-classes", default=None, help="file with one object class per line")
    p.add_argument("--relation-classes", default=None, help="file with one predicate per line")
    _add_common(p)
    p.set_defaults(func=cmd_render_prompt)

    return parser


def _default(value, fallback):
    return fallback if value is None else value


def _apply_config_file(args: argparse.Namespace) -> None:
    path = args.config or os.environ.get(CONFIG_ENV_VAR)
    if not path:
        return
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}", EXIT_USAGE)
    except ValueError as exc:
        raise CliError(f"config {path} is not valid JSON: {exc}", EXIT_CONFIG)
    if not isinstance(payload, dict):
        raise CliError(f"config {path} must hold a JSON object", EXIT_CONFIG)
    for key, value in payload.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr) and getattr(args, attr) in (None, False):
            setattr(args, attr, value)


def main(argv: Optional[list[str]] = None, out: Optional[TextIO] = None) -> int:
    out = out if out is not None else sys.stdout
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        _apply_config_file(args)
        if getattr(args, "workers", None) is None:
            args.workers = os.cpu_count() or 1
        try:
            return args.func(args, out)
        except ValueError as exc:
            # invalid configuration values (module invariants)
            raise CliError(str(exc), EXIT_CONFIG)
        except OSError as exc:
            raise CliError(str(exc), EXIT_USAGE)
    except CliError as exc:
        print(f"sggr: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
