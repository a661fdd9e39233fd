import os
import sys
import math
import pytest
import numpy as np

project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
if project_root not in sys.path:
    sys.path.insert(0, project_root)
app_dir = os.path.join(project_root, 'app')
if app_dir not in sys.path:
    sys.path.insert(0, app_dir)

from core_exchange import AgentPool, AlphaMode  # type: ignore
from errors import ConfigError, ContractViolation  # type: ignore
from model_config import (  # type: ignore
    ModelConfig, ModelVariant, ScheduleUnit, allowed_schedule_units, default_bins, default_schedule_unit,
)
from models import attempt_fragmentation, inject_agent, mean_wealth, run_model  # type: ignore


def _run(variant, duration, seed=1, **kwargs):
    config = ModelConfig(variant=variant, duration=duration, seed=seed, **kwargs)
    return run_model(config, np.random.default_rng(seed))


class TestModelConfig:
    """Defaults and validation of ModelConfig."""

    def test_documented_defaults(self):
        config = ModelConfig(variant=ModelVariant.MODEL_A, duration=10_000, seed=1)
        assert config.n0 == 100
        assert config.tau == 10
        assert config.alpha_mode == AlphaMode.fixed(0.5)
        assert config.split_fraction == 0.5
        assert config.bins == 100_000
        assert config.schedule_unit is ScheduleUnit.SWEEP
        assert config.snapshot_times == (10_000,)

    def test_model_b_defaults(self):
        config = ModelConfig(variant=ModelVariant.MODEL_B, duration=1000, seed=1)
        assert config.bins == 10_000
        assert config.schedule_unit is ScheduleUnit.TRANSACTION

    @pytest.mark.parametrize("kwargs,field", [
        ({"tau": 0}, "tau"),
        ({"n0": 1}, "n0"),
        ({"bins": 99}, "bins"),
        ({"split_fraction": 1.0}, "split_fraction"),
        ({"ensembles": 0}, "ensembles"),
        ({"seed": -1}, "seed"),
        ({"seed": 2 ** 64}, "seed"),
        ({"snapshot_times": (20, 10)}, "snapshot_times"),
        ({"snapshot_times": (200,)}, "snapshot_times"),
        ({"snapshot_times": ()}, "snapshot_times"),
        ({"schedule_unit": ScheduleUnit.TRANSACTION}, "schedule_unit"),
    ])
    def test_validation_names_the_field(self, kwargs, field):
        params = {"variant": ModelVariant.MODEL_A, "duration": 100, "seed": 1}
        params.update(kwargs)
        with pytest.raises(ConfigError) as exc_info:
            ModelConfig(**params)
        assert exc_info.value.field == field

    def test_unit_tables(self):
        assert default_schedule_unit(ModelVariant.MODEL_C3) is ScheduleUnit.TRANSACTION
        assert default_schedule_unit(ModelVariant.MODEL_C1) is ScheduleUnit.SWEEP
        assert allowed_schedule_units(ModelVariant.MODEL_C2) == frozenset({ScheduleUnit.SWEEP})
        assert ScheduleUnit.SWEEP in allowed_schedule_units(ModelVariant.MODEL_B)
        assert default_bins(ModelVariant.PURE_YS) == 100_000


class TestInjection:
    """inject_agent appends one agent and keeps the cached total in step."""

    def test_pool_grows_by_one(self):
        rng = np.random.default_rng(3)
        pool = AgentPool.from_uniform(100, rng)
        before = pool.cached_total
        wealth = inject_agent(pool, rng)
        assert len(pool) == 101
        assert 0.0 <= wealth < 1.0
        assert pool.wealths[-1] == wealth
        assert pool.cached_total - before == pytest.approx(wealth, abs=1e-15)

    def test_injected_wealth_mean(self):
        rng = np.random.default_rng(4)
        pool = AgentPool([1.0, 1.0])
        pool.ensure_capacity(200_000)
        total = math.fsum(inject_agent(pool, rng) for _ in range(200_000))
        assert total / 200_000 == pytest.approx(0.5, abs=0.002)

    def test_quenched_injection_draws_fresh_alpha(self):
        rng = np.random.default_rng(12)
        mode = AlphaMode.quenched_per_agent()
        pool = AgentPool([0.5, 0.5], alphas=[0.3, 0.7])
        for _ in range(10):
            inject_agent(pool, rng, mode)
        fresh = pool.alphas[2:]
        assert np.all((fresh > 0.0) & (fresh <= 1.0))
        assert len(set(fresh.tolist()) | {0.3, 0.7}) == 12
        assert list(pool.alphas[:2]) == [0.3, 0.7]


class TestFragmentation:
    """attempt_fragmentation: uniform pick, accept with min(1, x_k)."""

    def test_half_split(self):
        rng = np.random.default_rng(8)
        pool = AgentPool([0.8])
        while not attempt_fragmentation(pool, 0.5, rng):
            assert len(pool) == 1
        assert list(pool.wealths) == [0.4, 0.4]

    def test_unequal_split_conserves_wealth(self):
        rng = np.random.default_rng(8)
        pool = AgentPool([0.9])
        while not attempt_fragmentation(pool, 0.3, rng):
            pass
        assert pool.wealths[0] == pytest.approx(0.27)
        assert pool.wealths.sum() == pytest.approx(0.9, abs=1e-15)

    def test_zero_wealth_never_fragments(self):
        rng = np.random.default_rng(9)
        pool = AgentPool([0.0])
        assert not any(attempt_fragmentation(pool, 0.5, rng) for _ in range(1000))
        assert len(pool) == 1

    def test_wealth_above_one_always_fragments(self):
        rng = np.random.default_rng(10)
        accepted = 0
        for _ in range(10_000):
            pool = AgentPool([2.0])
            accepted += attempt_fragmentation(pool, 0.5, rng)
        assert accepted == 10_000

    def test_quenched_fragment_draws_fresh_alpha(self):
        rng = np.random.default_rng(13)
        mode = AlphaMode.quenched_per_agent()
        pool = AgentPool([2.0], alphas=[0.3])
        assert attempt_fragmentation(pool, 0.5, rng, mode)
        assert pool.alphas[0] == 0.3
        assert 0.0 < pool.alphas[1] <= 1.0
        assert pool.alphas[1] != 0.3
        assert pool.alphas[1] != 1.0

    def test_rejects_bad_split(self):
        with pytest.raises(ContractViolation):
            attempt_fragmentation(AgentPool([1.0]), 1.0, np.random.default_rng(0))


class TestMeanWealth:
    """mean_wealth is total over count."""

    @pytest.mark.parametrize("wealths,expected", [([1.0], 1.0), ([0.2, 0.6], 0.4)])
    def test_examples(self, wealths, expected):
        assert mean_wealth(AgentPool(wealths)) == pytest.approx(expected)

    def test_empty_pool(self):
        with pytest.raises(ContractViolation):
            mean_wealth(AgentPool([]))


class TestRunModel:
    """Scheduler behaviour for every variant."""

    @pytest.mark.parametrize("k", [1, 10, 250])
    def test_model_a_adds_one_agent_per_sweep(self, k):
        snapshot = _run(ModelVariant.MODEL_A, k)[-1]
        assert snapshot.agent_count == 100 + k
        assert snapshot.ledger.injections == k

    def test_model_a_wealth_ledger(self):
        snapshots = _run(ModelVariant.MODEL_A, 500, snapshot_times=(100, 300, 500))
        for s in snapshots:
            assert s.total_wealth == pytest.approx(s.ledger.expected_total, rel=1e-9)

    def test_model_b_conserves_wealth(self):
        snapshots = _run(ModelVariant.MODEL_B, 200_000, snapshot_times=(1_000, 50_000, 200_000))
        initial = snapshots[0].ledger.initial_wealth
        counts = [s.agent_count for s in snapshots]
        assert counts == sorted(counts)
        assert counts[-1] > 100
        for s in snapshots:
            assert s.total_wealth == pytest.approx(initial, rel=1e-9)

    def test_model_b_targets_rich_agents(self):
        """Fragmented agents are richer on average than the population."""
        ledger = _run(ModelVariant.MODEL_B, 500_000)[-1].ledger
        assert ledger.fragmentations > 100
        assert ledger.fragmented_wealth / ledger.fragmentations > \
            ledger.mean_wealth_at_fragmentation / ledger.fragmentations

    def test_model_b_event_count(self):
        ledger = _run(ModelVariant.MODEL_B, 1000, tau=10)[-1].ledger
        assert ledger.fragmentation_attempts == 100

    def test_model_c1_pairs_injections_with_fragmentations(self):
        for s in _run(ModelVariant.MODEL_C1, 300, snapshot_times=(50, 150, 300)):
            assert s.ledger.injections == s.ledger.fragmentations
            assert s.agent_count == 100 + 2 * s.ledger.fragmentations

    def test_model_c2_injects_every_sweep(self):
        ledger = _run(ModelVariant.MODEL_C2, 200)[-1].ledger
        assert ledger.injections == 200
        assert ledger.fragmentation_attempts == 200

    def test_model_c3_events_every_tau(self):
        snapshot = _run(ModelVariant.MODEL_C3, 100_000, tau=10)[-1]
        assert snapshot.ledger.fragmentation_attempts == 10_000
        assert snapshot.ledger.injections < snapshot.ledger.fragmentation_attempts
        assert snapshot.agent_count == 100 + snapshot.ledger.fragmentations + snapshot.ledger.injections
        assert snapshot.total_wealth == pytest.approx(snapshot.ledger.expected_total, rel=1e-9)

    @pytest.mark.parametrize("variant", list(ModelVariant))
    def test_snapshots_are_normalized(self, variant):
        config = ModelConfig(variant=variant, duration=60, seed=5, snapshot_times=(20, 40, 60))
        snapshots = run_model(config, np.random.default_rng(5))
        assert [s.time for s in snapshots] == [20, 40, 60]
        for s in snapshots:
            assert math.fsum(s.normalized_wealths) == pytest.approx(1.0, abs=1e-9)
            assert s.normalized_wealths.min() >= 0.0
            assert s.normalized_wealths.size == s.agent_count

    @pytest.mark.parametrize("variant", list(ModelVariant))
    def test_deterministic(self, variant):
        config = ModelConfig(variant=variant, duration=80, seed=123, snapshot_times=(40, 80),
                             alpha_mode=AlphaMode.quenched_per_agent())
        a = run_model(config, np.random.default_rng(123))
        b = run_model(config, np.random.default_rng(123))
        for x, y in zip(a, b):
            assert x.agent_count == y.agent_count
            assert np.array_equal(x.normalized_wealths, y.normalized_wealths)

    def test_pure_models_keep_population(self):
        for variant in (ModelVariant.PURE_YS, ModelVariant.PURE_TF):
            assert _run(variant, 50)[-1].agent_count == 100


@pytest.mark.slow
class TestLongRuns:
    """Long runs that reproduce qualitative outcomes."""

    def test_pure_ys_condensation(self):
        snapshot = _run(ModelVariant.PURE_YS, 100_000, seed=2)[-1]
        assert snapshot.normalized_wealths.max() > 0.99

    def test_model_c1_mean_wealth_quarter(self):
        snapshot = _run(ModelVariant.MODEL_C1, 10_000, seed=3, bins=100)[-1]
        assert snapshot.total_wealth / snapshot.agent_count == pytest.approx(0.25, abs=0.05)
