"""Engine: counter odometer, h-table maintenance, full runs, doubling."""

import math
import random

import pytest

from dimcurse.benchmarks import get_entry, pyramid
from dimcurse.engine import (
    advance,
    recompute_final_tables,
    run,
    run_unknown_horizon,
    step,
    time_index,
    optimizer_configs,
)
from dimcurse.types import (
    BudgetSchedule,
    MetaState,
    NonFiniteEvaluationError,
    ObjectiveSpec,
)
from dimcurse.univariate import OptimizerKind, run_univariate

PS = OptimizerKind.PIYAVSKII_SHUBERT
GRID = OptimizerKind.UNIFORM_GRID


class TestTimeIndex:
    @pytest.mark.parametrize(
        "counters,budgets,expected",
        [
            ((1, 1), (3, 4), 1),
            ((2, 1), (3, 4), 5),
            ((3, 4), (3, 4), 12),
            ((1, 1, 1), (2, 3, 4), 1),
            ((2, 3, 4), (2, 3, 4), 24),
        ],
    )
    def test_examples(self, counters, budgets, expected):
        assert time_index(counters, budgets) == expected

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            time_index((0, 1), (3, 4))
        with pytest.raises(ValueError):
            time_index((4, 1), (3, 4))
        with pytest.raises(ValueError):
            time_index((1, 1, 1), (3, 4))


class TestAdvance:
    def _state(self, counters):
        state = MetaState.initial(len(counters))
        state.counters = list(counters)
        return state

    def test_plain_increment(self):
        state = self._state((1, 1))
        assert advance(state, (2, 2)) == 2
        assert state.counters == [1, 2]

    def test_carry_resets_deep_dimension(self):
        state = self._state((1, 2))
        assert advance(state, (2, 2)) == 1
        assert state.counters == [2, 1]

    @pytest.mark.parametrize("budgets", [(2, 3), (3, 5), (2, 4)])
    def test_saturated_last_dimension_resets(self, budgets):
        state = self._state((1, budgets[1]))
        advance(state, budgets)
        assert state.counters[1] == 1

    def test_cannot_pass_final(self):
        state = self._state((2, 2))
        with pytest.raises(ValueError):
            advance(state, (2, 2))

    def test_cascade(self):
        state = self._state((1, 3, 3))
        assert advance(state, (3, 3, 3)) == 1
        assert state.counters == [2, 1, 1]


class TestHandTrace:
    """d=2, budgets (2,2), envelope optimizer on f(y,z)=|y-0.25|+|z-0.75|."""

    def _run(self):
        entry = get_entry("cone_2")
        return run(entry.objective, BudgetSchedule.with_default_noise((2, 2)), PS)

    def test_points_and_values(self):
        result = self._run()
        assert [r.point for r in result.log.records] == [
            (0.0, 0.0),
            (0.0, 1.0),
            (1.0, 0.0),
            (1.0, 1.0),
        ]
        assert [r.value for r in result.log.records] == [1.0, 0.5, 1.5, 1.0]

    def test_intermediate_states(self):
        entry = get_entry("cone_2")
        schedule = BudgetSchedule.with_default_noise((2, 2))
        configs = optimizer_configs(schedule, PS, entry.objective.lipschitz_constant)
        state = MetaState.initial(2)
        r1 = step(state, entry.objective, schedule, configs)
        assert (r1.point, r1.value) == ((0.0, 0.0), 1.0)
        assert state.table(1) == {0.0: 1.0} and state.table(2) == {0.0: 1.0}
        r2 = step(state, entry.objective, schedule, configs)
        assert (r2.point, r2.value) == ((0.0, 1.0), 0.5)
        assert state.table(1) == {0.0: 0.5} and state.table(2) == {0.0: 1.0, 1.0: 0.5}
        r3 = step(state, entry.objective, schedule, configs)
        assert (r3.point, r3.value) == ((1.0, 0.0), 1.5)
        assert state.counters == [2, 1]
        assert state.table(2) == {0.0: 1.5}  # fresh block overwrote the table
        r4 = step(state, entry.objective, schedule, configs)
        assert (r4.point, r4.value) == ((1.0, 1.0), 1.0)

    def test_final_tables(self):
        result = self._run()
        assert result.final_tables() == [
            {0.0: 0.5, 1.0: 1.0},
            {0.0: 1.5, 1.0: 1.0},
        ]


class TestRun:
    def test_d1_degenerates_to_bare_optimizer(self):
        entry = get_entry("vee")
        result = run(entry.objective, BudgetSchedule.with_default_noise((7,)), PS)
        queries, values, _ = run_univariate(PS, entry.objective, 7)
        assert [r.point[0] for r in result.log.records] == queries
        assert result.log.values() == values

    def test_uniform_grid_visits_centers_row_major(self):
        entry = get_entry("cone_2")
        result = run(entry.objective, BudgetSchedule.with_default_noise((2, 2)), GRID)
        assert [r.point for r in result.log.records] == [
            (0.25, 0.25),
            (0.25, 0.75),
            (0.75, 0.25),
            (0.75, 0.75),
        ]

    def test_evaluation_count_is_exact(self):
        calls = 0

        def counting(p):
            nonlocal calls
            calls += 1
            return abs(p[0] - 0.3) + abs(p[1] - 0.6)

        obj = ObjectiveSpec(2, counting, 2.0)
        result = run(obj, BudgetSchedule.with_default_noise((3, 5)), PS)
        assert calls == 15 == len(result.log.records)

    def test_determinism_bit_exact(self):
        entry = get_entry("pyramid_2")
        schedule = BudgetSchedule.with_default_noise((5, 6))
        a = run(entry.objective, schedule, PS)
        b = run(entry.objective, schedule, PS)
        assert a.log == b.log
        assert a.log.to_csv() == b.log.to_csv()

    def test_dimension_mismatch(self):
        entry = get_entry("vee")
        with pytest.raises(ValueError):
            run(entry.objective, BudgetSchedule.with_default_noise((2, 2)), PS)

    def test_non_finite_aborts_with_diagnostic(self):
        obj = ObjectiveSpec(1, lambda p: math.nan if p[0] > 0.5 else 0.0, 1.0)
        with pytest.raises(NonFiniteEvaluationError) as err:
            run(obj, BudgetSchedule.with_default_noise((4,)), PS)
        assert err.value.record.point == (1.0,)
        assert err.value.record.t == 2

    def test_max_evals_truncates(self):
        entry = get_entry("cone_2")
        result = run(
            entry.objective, BudgetSchedule.with_default_noise((3, 3)), GRID, max_evals=5
        )
        assert len(result.log.records) == 5
        assert [r.t for r in result.log.records] == [1, 2, 3, 4, 5]


class TestEnumerationBijection:
    def test_sample_of_schedules(self):
        rng = random.Random(3)
        for _ in range(25):
            d = rng.randrange(1, 4)
            budgets = tuple(sorted(rng.randrange(1, 7) for _ in range(d)))
            obj = pyramid(tuple(0.3 + 0.1 * i for i in range(d)))
            result = run(obj, BudgetSchedule.with_default_noise(budgets), GRID)
            total = math.prod(budgets)
            assert sorted(r.t for r in result.log.records) == list(range(1, total + 1))
            for record in result.log.records:
                assert time_index(record.counters, budgets) == record.t


class TestHTables:
    @pytest.mark.parametrize("name,budgets", [
        ("cone_2", (3, 5)),
        ("pyramid_2", (4, 4)),
        ("cone_3", (2, 3, 4)),
        ("pyramid_3", (3, 3, 3)),
    ])
    def test_tables_match_log_recomputation(self, name, budgets):
        entry = get_entry(name)
        result = run(entry.objective, BudgetSchedule.with_default_noise(budgets), PS)
        assert [list(v) for v in result.state.cond_min] == recompute_final_tables(
            result.log
        )

    def test_h_noise_is_nonnegative(self):
        # h-values never undercut the exact conditional minimum of the prefix
        for name, budgets in [("cone_2", (4, 5)), ("pyramid_2", (3, 6))]:
            entry = get_entry(name)
            result = run(entry.objective, BudgetSchedule.with_default_noise(budgets), PS)
            state = result.state
            final = result.log.records[-1].point
            for dim in range(1, 3):
                for x, h in zip(state.histories[dim - 1], state.cond_min[dim - 1]):
                    prefix = final[: dim - 1] + (x,)
                    exact = entry.conditional_min(prefix)
                    assert h - exact >= -1e-12


class TestUnknownHorizon:
    def test_single_evaluation(self):
        entry = get_entry("vee")
        epochs = run_unknown_horizon(entry.objective, 1, PS)
        assert len(epochs) == 1
        assert len(epochs[0].result.log.records) == 1

    def test_ten_step_epochs(self):
        entry = get_entry("cone_2")
        epochs = run_unknown_horizon(entry.objective, 10, PS)
        assert [e.epoch_length for e in epochs] == [1, 2, 4, 3]
        assert [e.schedule.budgets for e in epochs] == [(1, 1), (1, 2), (2, 2), (2, 2)]
        assert [len(e.result.log.records) for e in epochs] == [1, 2, 4, 3]

    @pytest.mark.parametrize("total", [1, 2, 3, 13, 64, 100, 257])
    def test_totals_exact(self, total):
        entry = get_entry("pyramid_2")
        epochs = run_unknown_horizon(entry.objective, total, GRID)
        assert sum(len(e.result.log.records) for e in epochs) == total

    def test_custom_noise_bounds(self):
        entry = get_entry("cone_2")
        epochs = run_unknown_horizon(entry.objective, 4, PS, noise_bounds=(0.5, 0.0))
        assert all(e.schedule.noise_bounds == (0.5, 0.0) for e in epochs)
