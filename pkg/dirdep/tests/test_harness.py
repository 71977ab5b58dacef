"""Tests for the Monte Carlo power harness"""

from dataclasses import replace

import numpy as np
import pytest

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from shared.errors import ConfigurationError, InputError, SamplerError
from src import harness, samplers
from src.harness import (
    Mode,
    PowerEntry,
    PowerTable,
    ScenarioConfig,
    emit_table,
    read_table_csv,
    run_power_study,
    run_study,
    warp_speed_rejections,
)


COPY_MODEL = "Mix(VM(0,1),VM(pi,0.1),1)"


def _scenario(model: str = "VM(0,1) x VM(pi,0.1)", statistics=("dcor:energy:1", "dcor:ratio"), **kwargs):
    params = dict(n=10, N=20, B=19, seed=7)
    params.update(kwargs)
    return ScenarioConfig.from_strings(model, statistics, **params)


class TestScenarioConfig:
    """Test suite for ScenarioConfig validation"""

    def test_defaults(self):
        cfg = ScenarioConfig.from_strings("BvM(1)", ["dcor"], n=20)
        assert cfg.label == "BvM(1)"
        assert cfg.alpha == 0.05
        assert cfg.N == 2000
        assert cfg.B == 1000
        assert cfg.mode == Mode.FULL_BOOTSTRAP
        assert cfg.seed == 20240531

    def test_mode_from_string(self):
        cfg = _scenario(mode="warp_speed")
        assert cfg.mode == Mode.WARP_SPEED
        assert cfg.permutations == 1
        assert _scenario().permutations == 19

    @pytest.mark.parametrize("kwargs,match", [
        ({"n": 1}, "n must be at least 2"),
        ({"n": 10.0}, "n must be an integer"),
        ({"N": 0}, "N and B"),
        ({"B": 0}, "N and B"),
        ({"seed": -1}, "nonnegative"),
        ({"alpha": 1.0}, "alpha"),
        ({"mode": "fast"}, "unknown mode"),
        ({"N": True}, "must be an integer"),
    ])
    def test_invalid_values(self, kwargs, match):
        with pytest.raises(ConfigurationError, match=match):
            _scenario(**kwargs)

    def test_empty_statistics(self):
        with pytest.raises(ConfigurationError, match="statistic list is empty"):
            _scenario(statistics=())

    def test_circular_only_statistic_on_linear_data(self):
        with pytest.raises(ConfigurationError, match="circular-circular"):
            _scenario("VMC(1)", statistics=("trig:1",))

    def test_two_sample_statistic_rejected(self):
        with pytest.raises(ConfigurationError, match="two-sample"):
            _scenario(statistics=("nk:ratio",))

    def test_statistics_sharing_a_label_rejected(self):
        with pytest.raises(ConfigurationError, match=r"share the table label\(s\) D_0.25"):
            _scenario(statistics=("dcor:energy:0.25", "dcor:energy:0.2500001"))

    def test_negative_stream_rejected(self):
        with pytest.raises(ConfigurationError, match="stream must be nonnegative"):
            _scenario(stream=-1)


class TestPowerEntry:
    """Test suite for rejection-rate rounding"""

    @pytest.mark.parametrize("rejections,replicates,percent", [
        (95, 2000, 5),
        (10, 2000, 1),
        (9, 2000, 0),
        (2000, 2000, 100),
        (0, 500, 0),
    ])
    def test_percent_rounds_half_up(self, rejections, replicates, percent):
        assert PowerEntry("s", "D_1", rejections, replicates).percent == percent

    def test_rate(self):
        assert PowerEntry("s", "D_1", 95, 2000).rate == pytest.approx(0.0475)


class TestWarpSpeedRule:
    """Test suite for pooled warp-speed rejections"""

    def test_exceeding_every_permuted_value_rejects(self):
        permuted = np.arange(19, dtype=float)
        assert warp_speed_rejections(np.array([100.0, 10.0, 18.0]), permuted, 0.05) == 1

    def test_ties_count_as_exceedances(self):
        permuted = np.arange(19, dtype=float)
        assert warp_speed_rejections(np.array([18.0]), permuted, 0.05) == 0
        assert warp_speed_rejections(np.array([18.0]), permuted, 0.1) == 1

    def test_two_sided_uses_magnitudes(self):
        permuted = np.linspace(-0.5, 0.5, 19)
        assert warp_speed_rejections(np.array([-0.9]), permuted, 0.05, two_sided=True) == 1
        assert warp_speed_rejections(np.array([-0.9]), permuted, 0.05) == 0


class TestRunPowerStudy:
    """Test suite for run_power_study and run_study"""

    def test_entries_follow_statistic_order(self):
        table = run_power_study(_scenario())
        assert [e.statistic for e in table.entries] == ["D_1", "D_k"]
        assert all(e.replicates == 20 for e in table.entries)
        assert all(0.0 <= e.rate <= 1.0 for e in table.entries)

    def test_exact_copy_is_always_rejected(self):
        table = run_power_study(_scenario(COPY_MODEL))
        assert table.rate(COPY_MODEL, "D_1") == 1.0
        assert table.rate(COPY_MODEL, "D_k") == 1.0

    def test_warp_speed_on_exact_copy(self):
        cfg = _scenario(COPY_MODEL, N=40, mode="warp_speed")
        table = run_power_study(cfg)
        assert table.rate(COPY_MODEL, "D_1") == 1.0
        assert table.scenarios[0].mode == "warp_speed"
        assert table.scenarios[0].permutations == 1

    def test_result_independent_of_jobs(self):
        cfg = _scenario("BvM(2)", N=30)
        serial = run_power_study(cfg, jobs=1)
        parallel = run_power_study(cfg, jobs=2)
        assert emit_table(serial, "csv") == emit_table(parallel, "csv")

    def test_same_seed_same_table(self):
        a = run_power_study(_scenario("PB(0.5)"))
        b = run_power_study(_scenario("PB(0.5)"))
        assert a.rates == b.rates

    def test_jobs_zero_rejected(self):
        with pytest.raises(ConfigurationError, match="jobs"):
            run_power_study(_scenario(), jobs=0)

    def test_sampler_failure_names_the_replicate(self, monkeypatch):
        monkeypatch.setattr(samplers, "MAX_PROPOSALS", 5)
        cfg = _scenario("BCvM(0,0,50)", n=50)
        with pytest.raises(SamplerError, match=r"Scenario 'BCvM\(0,0,50\)', replicate 0"):
            run_power_study(cfg)

    def test_study_collects_scenarios_in_order(self):
        table = run_study([_scenario(), _scenario("BvM(2)")], name="tiny")
        assert table.name == "tiny"
        assert [m.label for m in table.scenarios] == ["VM(0,1) x VM(pi,0.1)", "BvM(2)"]
        assert len(table.entries) == 4

    def test_study_rows_use_distinct_streams(self):
        first = _scenario("BvM(2)", label="a")
        second = _scenario("BvM(2)", label="b")
        table = run_study([first, second])
        assert [m.stream for m in table.scenarios] == [0, 1]
        alone = run_power_study(replace(second, stream=1))
        assert alone.rates[("b", "D_1")] == table.rates[("b", "D_1")]
        assert not np.array_equal(
            harness._replicate_sample(replace(first, stream=0), 0).x.points,
            harness._replicate_sample(replace(first, stream=1), 0).x.points
        )

    def test_empty_study(self):
        with pytest.raises(ConfigurationError, match="no scenarios"):
            run_study([])

    def test_duplicate_labels(self):
        with pytest.raises(ConfigurationError, match="Duplicate scenario label"):
            run_study([_scenario(), _scenario()])


class TestEmitTable:
    """Test suite for power table rendering"""

    def setup_method(self):
        self.table = PowerTable(name="t")
        self.table.extend(run_power_study(_scenario(COPY_MODEL, statistics=("dcor:log",))))

    def test_text_shows_percentages(self):
        text = emit_table(self.table)
        lines = text.splitlines()
        assert lines[0].split() == ["Model", "D_l"]
        assert lines[2].split()[-1] == "100"
        assert "mode=full_bootstrap seed=7" in text

    def test_csv_round_trips_rates(self, tmp_path):
        csv_text = emit_table(self.table, "csv")
        assert csv_text.splitlines()[0].startswith("scenario,model,n,statistic,rate")
        path = tmp_path / "table.csv"
        path.write_text(csv_text, encoding="utf-8")
        assert read_table_csv(path) == self.table.rates
        assert read_table_csv(csv_text) == self.table.rates

    def test_empty_table(self):
        with pytest.raises(ConfigurationError, match="empty"):
            emit_table(PowerTable())

    def test_unknown_format(self):
        with pytest.raises(ConfigurationError, match="Unknown table format"):
            emit_table(self.table, "html")

    def test_csv_missing_columns(self):
        with pytest.raises(InputError, match="rate"):
            read_table_csv("scenario,statistic\na,b\n")


def _rates(model: str, statistics, **kwargs):
    cfg = ScenarioConfig.from_strings(model, statistics, **kwargs)
    return {e.statistic: e.rate for e in run_power_study(cfg, jobs=-1).entries}


@pytest.mark.slow
class TestPowerBehaviour:
    """Reduced-replicate checks of size and power"""

    def test_independent_product_holds_level(self):
        rates = _rates("VM(0,1) x VM(pi,0.1)", ["dcor:energy:1"], n=20, N=1000, B=99, seed=3)
        assert 0.03 <= rates["D_1"] <= 0.07

    @pytest.mark.parametrize("model", ["PB(0)", "PN(2,(0.1,0,0))", "VMC(0)"])
    def test_null_models_hold_level(self, model):
        rates = _rates(model, ["dcor:energy:1"], n=20, N=600, B=99, seed=4)
        assert 0.025 <= rates["D_1"] <= 0.085

    def test_parabolic_dependence_is_detected(self):
        cfg = ScenarioConfig.from_strings("PB(0.8)", ["dcor:energy:1"], n=20, N=100, B=99, seed=3)
        table = run_power_study(cfg, jobs=-1)
        assert table.entries[0].rate >= 0.9

    @pytest.mark.parametrize("model,statistic,label,target,tolerance", [
        ("PB(0.2)", "dcor:energy:1", "D_1", 0.10, 0.07),
        ("PB(0.6)", "dcor:energy:1", "D_1", 0.91, 0.08),
        ("BvM(1)", "dcor:energy:1", "D_1", 0.56, 0.12),
        ("Mix(VM(0,1),VM(pi,0.1),0.5)", "dcor:ratio", "D_k", 0.73, 0.10),
        ("vMF((1,0,0),0) x Mix(vMF((1,0,0),0),vMF((1,0,0),2),0.5)", "dcor:energy:1", "D_1", 0.77, 0.10),
    ])
    def test_power_rows(self, model, statistic, label, target, tolerance):
        rates = _rates(model, [statistic], n=20, N=300, B=199, seed=3)
        assert rates[label] == pytest.approx(target, abs=tolerance)

    def test_copula_power_falls_with_the_exponent(self):
        rates = _rates(
            "VMC(2)", ["dcor:energy:0.25", "dcor:energy:1", "dcor:energy:1.75"],
            n=20, N=1000, mode="warp_speed", seed=5
        )
        assert rates["D_0.25"] == pytest.approx(0.90, abs=0.05)
        # D_0.25 and D_1 are level on this construction
        assert rates["D_0.25"] >= rates["D_1"] - 0.03
        assert rates["D_1"] > rates["D_1.75"] + 0.10

    def test_projected_normal_power(self):
        rates = _rates("PN(2,(0.1,0.8,0.3))", ["dcor:energy:1"], n=20, N=1000, mode="warp_speed", seed=6)
        assert rates["D_1"] >= 0.88

    def test_warp_speed_agrees_with_full_bootstrap(self):
        kwargs = dict(n=50, N=400, B=199, seed=9)
        warp = _rates("VMC(1)", ["dcor:energy:0.25"], mode="warp_speed", **kwargs)
        full = _rates("VMC(1)", ["dcor:energy:0.25"], mode="full_bootstrap", **kwargs)
        assert warp["D_0.25"] == pytest.approx(full["D_0.25"], abs=0.08)
