import io
import math

import pytest

from mabprune import exhaustive, q_value
from mabprune import experiments as ex
from mabprune.experiments import (CSV_HEADER, ConfigError, ExperimentConfig, MalformedCsv,
                                  MetricsRow)


def small_cfg(tmp_path, **kw):
    base = dict(case="case1", horizons=(1, 2), num_instances=3,
                algorithms=("exhaustive", "rtbss-u", "rtbss-k", "greedy", "pomcp"),
                pomcp_simulations=(10, 50), seed=9, output_path=str(tmp_path / "out.csv"))
    base.update(kw)
    return ExperimentConfig(**base)


def row(**kw):
    base = dict(case="case1", instance_index=0, horizon=2, algorithm="rtbss-k", simulations=0,
                best_action=3, value=1.0, nodes_expanded=10, bound_evaluations=2,
                elapsed_ms=0.5, agrees_with_optimal=True, performance_loss=0.0)
    base.update(kw)
    return MetricsRow(**base)


class TestConfig:
    def test_parse(self):
        cfg = ExperimentConfig.loads(
            "case = case2-fast\nhorizons = 1, 3\nnum_instances = 7\nalgorithms = greedy\n")
        assert (cfg.case, cfg.horizons, cfg.num_instances, cfg.algorithms) == \
            ("case2-fast", (1, 3), 7, ("greedy",))

    def test_shipped_configs_load(self):
        from pathlib import Path
        paths = sorted((Path(__file__).parent.parent / "configs").glob("*.cfg"))
        assert paths
        for p in paths:
            ExperimentConfig.load(str(p))

    @pytest.mark.parametrize("text,match", [
        ("colour = red\n", "unknown config keys"),
        ("horizons = 0\n", "horizons"),
        ("horizons = 9\n", "horizons"),
        ("num_instances = many\n", "num_instances"),
        ("case = case3\n", "case"),
        ("algorithms = rtbss-z\n", "algorithms"),
        ("algorithms = pomcp\npomcp_simulations = 0\n", "pomcp_simulations"),
        ("rollout = heavy\n", "rollout"),
        ("seed = 1\nseed = 2\n", "line 2"),
    ])
    def test_errors(self, text, match):
        with pytest.raises(ConfigError, match=match):
            ExperimentConfig.loads(text)

    def test_overrides(self):
        cfg = ExperimentConfig().with_overrides({"horizons": "5", "seed": "3"})
        assert cfg.horizons == (5,) and cfg.seed == 3
        with pytest.raises(ConfigError):
            ExperimentConfig().with_overrides({"nope": "1"})


class TestRunCell:
    def test_row_accounting(self, tmp_path):
        cfg = small_cfg(tmp_path)
        rows = ex.collect(cfg)
        per_cell = 4 + len(cfg.pomcp_simulations)
        assert len(rows) == cfg.num_instances * len(cfg.horizons) * per_cell
        assert rows == sorted(rows, key=lambda r: r.sort_key)

    def test_rows_consistent_with_library(self, tmp_path):
        cfg = small_cfg(tmp_path, horizons=(3,), num_instances=2)
        for r in ex.collect(cfg):
            model, b = cfg.sampler.sample(r.instance_index)
            ref = exhaustive(b, r.horizon, model)
            assert r.agrees_with_optimal == (r.best_action == ref.best_action)
            expect = ref.value - q_value(b, r.best_action, r.horizon, model)
            assert r.performance_loss == pytest.approx(expect, abs=1e-12)
            if r.algorithm == "exhaustive":
                assert r.nodes_expanded == ref.stats.nodes_expanded

    def test_deterministic_across_jobs(self, tmp_path):
        cfg = small_cfg(tmp_path)
        a = ex.strip_timing(ex.collect(cfg, jobs=1))
        b = ex.strip_timing(ex.collect(cfg, jobs=2))
        assert a == b

    def test_first_instance_offsets(self, tmp_path):
        cfg = small_cfg(tmp_path, first_instance=5, num_instances=1, algorithms=("greedy",))
        assert {r.instance_index for r in ex.collect(cfg)} == {5}

    def test_run_writes_csv(self, tmp_path):
        cfg = small_cfg(tmp_path, num_instances=1)
        rows = ex.run(cfg)
        assert ex.read_csv(cfg.output_path) == rows

    def test_unwritable_output_fails_fast(self, tmp_path):
        cfg = small_cfg(tmp_path, output_path=str(tmp_path / "missing" / "x.csv"))
        with pytest.raises(ConfigError, match="does not exist"):
            ex.run(cfg)


class TestPerformanceLoss:
    def test_optimal_action_has_no_loss(self, case1):
        model, b = case1.sample(0)
        best = exhaustive(b, 3, model).best_action
        assert ex.performance_loss(b, 3, best, model) == 0.0

    def test_suboptimal_action(self, case1):
        model, b = case1.sample(0)
        ref = exhaustive(b, 3, model)
        worst = min(ref.q_values, key=ref.q_values.get)
        loss = ex.performance_loss(b, 3, worst, model)
        assert loss == pytest.approx(ref.value - ref.q_values[worst], abs=1e-15)
        assert loss > 0

    def test_row_invariants(self):
        with pytest.raises(ValueError):
            row(performance_loss=-0.1, agrees_with_optimal=False)
        with pytest.raises(ValueError):
            row(performance_loss=0.1, agrees_with_optimal=True)


class TestCsv:
    def test_round_trip_exact_floats(self):
        rows = [row(value=1 / 3), row(instance_index=1, value=math.pi, agrees_with_optimal=False,
                                      performance_loss=1e-17)]
        buf = io.StringIO()
        ex.write_csv(rows, buf)
        assert ex.read_csv(buf.getvalue(), text=True) == rows

    def test_header_checked(self):
        with pytest.raises(MalformedCsv, match="line 1"):
            ex.read_csv("a,b\n1,2\n", text=True)

    def test_empty(self):
        with pytest.raises(MalformedCsv, match="missing header"):
            ex.read_csv("", text=True)

    @pytest.mark.parametrize("mutate,match", [
        (lambda c: c[:-1], "expected 12 fields"),
        (lambda c: c[:2] + ["two"] + c[3:], "line 3"),
        (lambda c: c[:3] + ["dfs"] + c[4:], "unknown algorithm"),
        (lambda c: c[:6] + ["nan"] + c[7:], "not finite"),
        (lambda c: c[:10] + ["yes"] + c[11:], "true or false"),
    ])
    def test_bad_rows_report_line(self, mutate, match):
        good = ",".join(row().cells())
        bad = ",".join(mutate(row().cells()))
        text = ",".join(CSV_HEADER) + "\n" + good + "\n" + bad + "\n"
        with pytest.raises(MalformedCsv, match=match) as info:
            ex.read_csv(text, text=True)
        assert "line 3" in str(info.value)


class TestSummaries:
    def rows(self):
        return [
            row(algorithm="exhaustive", horizon=2, nodes_expanded=100, elapsed_ms=1.0),
            row(algorithm="exhaustive", horizon=3, nodes_expanded=900, elapsed_ms=9.0),
            row(algorithm="rtbss-k", horizon=2, nodes_expanded=50, elapsed_ms=2.0),
            row(algorithm="rtbss-k", horizon=3, nodes_expanded=70, elapsed_ms=3.0,
                agrees_with_optimal=False, performance_loss=0.25),
            row(algorithm="rtbss-k", horizon=3, instance_index=1, nodes_expanded=30,
                elapsed_ms=5.0),
        ]

    def test_summarize_by_hand(self):
        out = {s.key: s for s in ex.summarize(self.rows(), ("algorithm", "horizon"))}
        s = out[("rtbss-k", 3)]
        assert s.count == 2
        assert s.mean_performance_loss == 0.125 and s.max_performance_loss == 0.25
        assert s.agreement_pct == 50.0
        assert s.mean_nodes_expanded == 50.0 and s.mean_elapsed_ms == 4.0
        assert list(out) == sorted(out)

    def test_unknown_group(self):
        with pytest.raises(ValueError, match="unknown group-by"):
            ex.summarize(self.rows(), ("colour",))

    def test_write_summary(self):
        buf = io.StringIO()
        ex.write_summary(ex.summarize(self.rows(), ("algorithm",)), ("algorithm",), buf)
        lines = buf.getvalue().splitlines()
        assert lines[0].startswith("algorithm,count,")
        assert lines[1].startswith("exhaustive,2,")

    def test_node_pairs(self):
        assert ex.node_pairs(self.rows(), "exhaustive", "rtbss-k") == [
            (0, 2, 100, 50), (0, 3, 900, 70)]

    def test_crossover(self):
        rows = self.rows()
        assert ex.crossover_horizon(rows) == 3
        assert ex.crossover_horizon(rows, "rtbss-u") is None
        assert ex.crossover_report(rows) == [
            "crossover: rtbss-k faster than exhaustive for T >= 3"]

    def test_crossover_never(self):
        rows = [row(algorithm="exhaustive", elapsed_ms=1.0), row(elapsed_ms=2.0)]
        assert ex.crossover_horizon(rows) is None
        assert "never" in ex.crossover_report(rows)[0]
