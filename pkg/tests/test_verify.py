import json

import pytest

from biasexpr import ConfigError, VerifyConfig, figure2_rows, verify_all
from biasexpr.verify import quick_config, registered_names

# every in-scope result must have at least one check whose name starts with one of these
IN_SCOPE = [
    "expected_per_query_success",
    "bias_definition",
    "improbability_of_favorable_information_resources",
    "conservation_of_bias",
    "famine_of_favorable_information_resources",
    "futility_of_bias_free_search",
    "famine_of_applicable_targets",
    "famine_of_favorable_biasing_distributions",
    "bias_over_distributions",
    "probability_of_success_under_bias_free_search",
    "proportion_of_successful_problems_under_bias_free_search",
    "geometric_divergence",
    "conservation_of_bias_over_distributions",
    "bias_upper_bound",
    "bias_upper_bound.figure2",
    "difference_between_estimated_and_actual_bias",
    "entropic_expressivity",
    "expressivity_bounded_by_bias",
    "expressivity_ranges_table",
    "bias_expressivity_tradeoff",
    "bias_bound_under_expected_expressivity",
    "lemma1_subset_with_at_most_uniform_mass",
    "lemma2_maximum_mass_over_target_set",
]


@pytest.fixture(scope="module")
def quick_report():
    return verify_all(quick_config(seed=3))


class TestRegistry:
    def test_names_unique(self):
        names = registered_names()
        assert len(names) == len(set(names))

    @pytest.mark.parametrize("prefix", IN_SCOPE)
    def test_in_scope_covered(self, prefix):
        assert any(n == prefix or n.startswith(prefix + ".") for n in registered_names())


class TestQuickRun:
    def test_all_pass(self, quick_report):
        failed = [c.name for c in quick_report.checks if not c.passed]
        assert failed == []

    def test_sorted_and_unique(self, quick_report):
        names = quick_report.names
        assert names == sorted(names) and len(set(names)) == len(names)
        assert set(names) == set(registered_names())

    def test_deterministic(self, quick_report):
        again = verify_all(quick_config(seed=3))
        assert again.to_json(include_elapsed=False) == quick_report.to_json(include_elapsed=False)

    def test_json_shape(self, quick_report):
        doc = json.loads(quick_report.to_json())
        assert doc["seed"] == 3 and doc["all_passed"] is True and "elapsed_ms" in doc
        assert set(doc["checks"][0]) == {"name", "passed", "observed", "bound_or_expected", "tolerance", "detail"}

    def test_csv(self, quick_report):
        lines = quick_report.to_csv().strip().splitlines()
        assert len(lines) == len(quick_report.checks) + 1


class TestFiltering:
    def test_grid_n4(self):
        rep = verify_all(quick_config(grid_n=(4,)))
        assert len(rep.checks) >= 14 and rep.all_passed

    def test_only_conservation(self):
        rep = verify_all(quick_config(only=("conservation",)))
        assert rep.names == ["conservation_of_bias", "conservation_of_bias_over_distributions"]

    def test_only_glob(self):
        rep = verify_all(quick_config(only=("lemma2_*",)))
        assert rep.names and all(n.startswith("lemma2_") for n in rep.names)

    def test_no_match(self):
        with pytest.raises(ConfigError):
            verify_all(quick_config(only=("nothing_like_this",)))

    def test_filter_does_not_change_values(self):
        full = {c.name: c for c in verify_all(quick_config(seed=5)).checks}
        part = verify_all(quick_config(seed=5, only=("geometric",))).checks
        assert all(c == full[c.name] for c in part)

    def test_workers_do_not_change_values(self):
        one = verify_all(quick_config(seed=2, only=("expected_per_query",), workers=1))
        two = verify_all(quick_config(seed=2, only=("expected_per_query",), workers=3))
        assert one.to_json(include_elapsed=False) == two.to_json(include_elapsed=False)


class TestConfig:
    @pytest.mark.parametrize("field, value", [("enum_max_n", 21), ("hoeffding_trials", 0), ("workers", 0)])
    def test_invalid(self, field, value):
        with pytest.raises(ConfigError):
            verify_all(VerifyConfig(**{field: value}))


class TestFigure2:
    def test_example(self):
        (row,) = figure2_rows(-0.5, [0.5])
        assert (row.p, row.m, row.bound) == (0.5, -1.0, 0.5)

    def test_monotone(self):
        rows = figure2_rows(-0.3, [i / 20 for i in range(1, 20)])
        bounds = [r.bound for r in rows]
        assert all(a >= b for a, b in zip(bounds, bounds[1:]))
        assert all(r.m <= 0 and r.bound >= 0 for r in rows)

    def test_zero(self):
        assert all(r.bound == 0 for r in figure2_rows(0.0, [0.1, 0.5, 0.9]))

    def test_near_one(self):
        assert figure2_rows(-0.5, [1 - 1e-9])[0].bound == pytest.approx(0, abs=1e-8)

    @pytest.mark.parametrize("inf_bias, grid", [(0.1, [0.5]), (-0.5, [0.0]), (-0.5, [1.0])])
    def test_invalid(self, inf_bias, grid):
        with pytest.raises(ValueError):
            figure2_rows(inf_bias, grid)
