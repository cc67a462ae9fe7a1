#!/usr/bin/env python3
"""Generate a synthetic ground-truth corpus plus candidate-response files.

Writes, under --out:
  gt.jsonl          ground truth, one image per line
  pred.jsonl        predictions for `sggr evaluate` (mixed quality)
  candidates.jsonl  candidate responses for `sggr reward`
  groups.jsonl      reward groups for `sggr advantage`
"""

import argparse
import json
import random
from pathlib import Path

from sgg_rewards.synthetic import degraded_response, graph_response, make_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("synthetic_corpus"))
    parser.add_argument("--images", type=int, default=200)
    parser.add_argument("--group-size", type=int, default=8)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--clean-fraction", type=float, default=0.6,
        help="fraction of predictions left undegraded",
    )
    args = parser.parse_args()

    rng = random.Random(args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    records = make_corpus(rng, args.images)

    with open(args.out / "gt.jsonl", "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record.to_json_dict()) + "\n")

    with open(args.out / "pred.jsonl", "w", encoding="utf-8") as handle:
        for record in records:
            if rng.random() < args.clean_fraction:
                response = graph_response(record.gt)
            else:
                response = degraded_response(rng, record.gt)
            handle.write(
                json.dumps({"image_id": record.image_id, "response_text": response}) + "\n"
            )

    with open(args.out / "candidates.jsonl", "w", encoding="utf-8") as handle:
        for record in records:
            for _ in range(args.group_size):
                handle.write(
                    json.dumps(
                        {
                            "image_id": record.image_id,
                            "response_text": degraded_response(rng, record.gt),
                        }
                    )
                    + "\n"
                )

    with open(args.out / "groups.jsonl", "w", encoding="utf-8") as handle:
        for record in records:
            rewards = [round(rng.uniform(0.0, 2.0), 4) for _ in range(args.group_size)]
            handle.write(
                json.dumps({"group_id": record.image_id, "rewards": rewards}) + "\n"
            )

    print(f"wrote {args.images} images under {args.out}/")


if __name__ == "__main__":
    main()
