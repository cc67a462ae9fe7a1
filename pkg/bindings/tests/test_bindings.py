import hashlib
import json
import subprocess
import sys

import pytest

import sggr_bindings as rb
from sggr_bindings import BatchRewardRequest, Engine, ItemError


def run_cli(argv):
    proc = subprocess.run(
        [sys.executable, "-m", "sgg_rewards.cli", *argv],
        capture_output=True,
        check=True,
        text=True,
    )
    return proc.stdout


@pytest.fixture(scope="module")
def soft_engine(golden):
    return Engine(str(golden["gt"]), str(golden["vectors"]), {"variant": "soft"})


class TestBatchReward:
    def test_single_perfect_candidate(self, golden):
        from sgg_rewards.synthetic import graph_response

        engine = Engine(str(golden["gt"]))
        record = golden["records"][0]
        request = BatchRewardRequest.of(
            [graph_response(record.gt)], [record.image_id]
        )
        (result,) = engine.batch_reward(request)
        assert result == (2.0, 1.0, 0.0, 1.0)

    def test_unknown_image_id_marker(self, soft_engine):
        (result,) = soft_engine.batch_reward(BatchRewardRequest.of(["x"], ["ghost"]))
        assert isinstance(result, ItemError)
        assert "ghost" in result.error

    def test_empty_batch(self, soft_engine):
        assert soft_engine.batch_reward(BatchRewardRequest.of([], [])) == []

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            BatchRewardRequest.of(["a", "b"], ["only-one"])

    def test_module_level_requires_init(self, golden):
        rb._engine = None
        with pytest.raises(RuntimeError):
            rb.batch_reward(["x"], ["y"])
        rb.init(str(golden["gt"]))
        (result,) = rb.batch_reward(["garbage"], [golden["records"][0].image_id])
        assert result == (0.0, 0.0, 0.0, 0.0)


class TestBatchAdvantages:
    def test_matches_direct_computation(self, soft_engine):
        groups = [[1.0, 2.0, 3.0], [5.0, 5.0], [1.0]]
        results = soft_engine.batch_advantages(groups)
        assert results[0][2] == pytest.approx(1.2247434, abs=1e-6)
        assert results[1] == [0.0, 0.0]
        assert isinstance(results[2], ItemError)

    def test_grpo_objective_passthrough(self, soft_engine):
        from sgg_rewards import GrpoConfig

        value = soft_engine.grpo_objective(
            [0.0, 1.0], [[1.0], [1.0]], config=GrpoConfig(beta=0.0)
        )
        assert value == pytest.approx(0.0, abs=1e-12)
        with_kl = soft_engine.grpo_objective(
            [0.0, 1.0], [[1.0], [1.0]], [[1.0], [1.0]]
        )
        assert with_kl == pytest.approx(0.0, abs=1e-12)


class TestCliParity:
    """[SECONDARY] acceptance: bindings match the CLI bit-for-bit."""

    def test_batch_reward_parity(self, golden, soft_engine):
        cli_out = run_cli(
            [
                "reward",
                "--gt", str(golden["gt"]),
                "--candidates", str(golden["candidates_path"]),
                "--variant", "soft",
                "--embeddings", str(golden["vectors"]),
                "--workers", "2",
            ]
        )
        cli_lines = [json.loads(line) for line in cli_out.strip().splitlines()]
        request = BatchRewardRequest.of(
            [c["response_text"] for c in golden["candidates"]],
            [c["image_id"] for c in golden["candidates"]],
        )
        ours = soft_engine.batch_reward(request)
        assert len(ours) == len(cli_lines) == 120
        for got, want in zip(ours, cli_lines):
            assert got == (
                want["total"], want["format"], want["node_reward"], want["edge_reward"]
            )
        print("\n[PASS] criterion: bindings batch_reward matches CLI bit-for-bit")

    def test_batch_advantages_parity(self, golden, soft_engine):
        cli_out = run_cli(["advantage", str(golden["groups_path"]), "--workers", "1"])
        cli_lines = [json.loads(line) for line in cli_out.strip().splitlines()]
        ours = soft_engine.batch_advantages([g["rewards"] for g in golden["groups"]])
        for got, want in zip(ours, cli_lines):
            if isinstance(got, ItemError):
                assert "error" in want
            else:
                assert got == want["advantages"]
        print("\n[PASS] criterion: bindings batch_advantages matches CLI bit-for-bit")

    def test_evaluate_parity(self, golden, soft_engine):
        cli_out = run_cli(
            [
                "evaluate",
                "--gt", str(golden["gt"]),
                "--pred", str(golden["candidates_path"]),
                "--no-timestamp",
                "--workers", "2",
            ]
        )
        ours = soft_engine.evaluate(str(golden["candidates_path"]))
        assert json.dumps(ours, sort_keys=True) == json.dumps(
            json.loads(cli_out), sort_keys=True
        )


class TestInitOnceStability:
    """[SECONDARY] acceptance: 10^4 calls on one engine without state drift."""

    def test_ten_thousand_calls_hash_stable(self, golden):
        engine = Engine(str(golden["gt"]), str(golden["vectors"]), {"variant": "soft"})
        candidates = golden["candidates"]
        batches = [
            BatchRewardRequest.of(
                [candidates[i % len(candidates)]["response_text"],
                 candidates[(i + 1) % len(candidates)]["response_text"]],
                [candidates[i % len(candidates)]["image_id"],
                 candidates[(i + 1) % len(candidates)]["image_id"]],
            )
            for i in range(50)
        ]

        def one_pass() -> str:
            digest = hashlib.sha256()
            for call in range(10_000):
                results = engine.batch_reward(batches[call % len(batches)])
                digest.update(repr(results).encode())
            return digest.hexdigest()

        first = one_pass()
        second = one_pass()
        assert first == second
        print("\n[PASS] criterion: init-once engine stable across 2 x 10^4 batch_reward calls")
