import numpy as np
import pytest

from clustercap import (
    build_alternative,
    build_basic,
    build_generalized,
    build_serial,
    derive_recipe_rate,
    lp,
    makespan_via_cuts,
    models,
    predict_sizes,
    size_stats,
    solve_capacity,
)
from clustercap.errors import (
    DomainError,
    NotQualifiedError,
    StructurallyInfeasibleError,
)

from conftest import example1_instance, random_instance


def one_tool_instance(chambers, jobs, quals, overrides=(), name="inst"):
    return models.Instance(
        name=name,
        chambers=chambers,
        tools=("t0",),
        jobs=tuple(models.Job(j, d) for j, d in jobs),
        qualifications=tuple(
            models.Qualification(j, "t0", tuple(rates)) for j, rates in quals
        ),
        rate_overrides=tuple(overrides),
    )


class TestRecipeRates:
    def test_two_equal_chambers_double_the_rate(self):
        inst = example1_instance()
        assert derive_recipe_rate(inst, "lot1", "tool1", "AB") == pytest.approx(1 / 3)

    def test_single_chamber_rate(self):
        inst = one_tool_instance(3, [("j0", 1.0)], [("j0", [(2, 0.2)])])
        assert derive_recipe_rate(inst, "j0", "t0", "C") == pytest.approx(0.2)

    def test_override_wins(self):
        inst = one_tool_instance(
            3,
            [("j0", 1.0)],
            [("j0", [(0, 0.1), (1, 0.1)])],
            overrides=[models.RateOverride("j0", "t0", "AB", 0.4)],
        )
        assert derive_recipe_rate(inst, "j0", "t0", "AB") == pytest.approx(0.4)
        assert derive_recipe_rate(inst, "j0", "t0", "A") == pytest.approx(0.1)

    def test_unqualified_chamber_raises(self):
        inst = one_tool_instance(3, [("j0", 1.0)], [("j0", [(0, 0.1)])])
        with pytest.raises(NotQualifiedError):
            derive_recipe_rate(inst, "j0", "t0", "AB")

    def test_unqualified_pair_raises(self):
        inst = example1_instance()
        with pytest.raises(NotQualifiedError):
            derive_recipe_rate(inst, "lot1", "ghost", "A")


class TestInstanceValidation:
    def test_zero_rate_rejected(self):
        with pytest.raises(DomainError, match="rate"):
            one_tool_instance(3, [("j0", 1.0)], [("j0", [(0, 0.0)])])

    def test_negative_demand_rejected(self):
        with pytest.raises(DomainError, match="demand"):
            one_tool_instance(3, [("j0", -1.0)], [("j0", [(0, 0.5)])])

    def test_structural_feasibility_flag(self):
        inst = models.Instance(
            name="lonely",
            chambers=2,
            tools=("t0",),
            jobs=(models.Job("j0", 5.0),),
            qualifications=(),
        )
        assert not inst.structurally_feasible()


class TestBasicModel:
    def test_single_pair(self):
        inst = one_tool_instance(1, [("j0", 10.0)], [("j0", [(0, 2.0)])])
        res = solve_capacity(inst, "basic")
        assert res.rho == pytest.approx(5.0, abs=1e-9)

    def test_two_identical_tools_split(self):
        inst = models.Instance(
            name="two",
            chambers=1,
            tools=("t0", "t1"),
            jobs=(models.Job("j0", 10.0),),
            qualifications=(
                models.Qualification("j0", "t0", ((0, 2.0),)),
                models.Qualification("j0", "t1", ((0, 2.0),)),
            ),
        )
        res = solve_capacity(inst, "basic")
        assert res.rho == pytest.approx(2.5, abs=1e-9)

    def test_unqualified_job_is_a_build_error(self):
        inst = models.Instance(
            name="broken",
            chambers=2,
            tools=("t0",),
            jobs=(models.Job("j0", 5.0),),
            qualifications=(),
        )
        with pytest.raises(StructurallyInfeasibleError, match="j0"):
            build_basic(inst)


class TestSerialModel:
    def test_rate_is_the_minimum(self):
        inst = one_tool_instance(
            3, [("j0", 1.0)], [("j0", [(0, 0.5), (1, 1 / 3), (2, 1 / 6)])]
        )
        res = solve_capacity(inst, "serial")
        # the tool processes at the slowest chamber's rate
        assert res.rho == pytest.approx(1.0 / (1 / 6), abs=1e-8)

    def test_equal_rates_chamber_rows_change_nothing(self):
        inst = one_tool_instance(
            3, [("j0", 12.0)], [("j0", [(0, 0.5), (1, 0.5), (2, 0.5)])]
        )
        built = build_serial(inst)
        res = solve_capacity(inst, "serial")
        # chamber rows coincide with the tool row, so the optimum equals the
        # demand time at the serial rate
        assert res.rho == pytest.approx(24.0, abs=1e-8)
        chamber_rows = [c for c in built.problem.constraints if c.name.startswith("cham_")]
        assert len(chamber_rows) == 3

    def test_distinct_bottlenecks_tighten(self):
        # two jobs, each slow on a different chamber
        inst = one_tool_instance(
            2,
            [("j0", 4.0), ("j1", 4.0)],
            [
                ("j0", [(0, 1.0), (1, 0.25)]),
                ("j1", [(0, 0.25), (1, 1.0)]),
            ],
        )
        serial = solve_capacity(inst, "serial")
        basic_like = 4 / 0.25 + 4 / 0.25  # per-tool total time of the serial demand
        assert serial.rho >= 16.0 - 1e-8
        assert serial.rho <= basic_like + 1e-8


class TestGeneralizedModel:
    def test_reference_instance_reaches_330(self, matrices):
        res = solve_capacity(example1_instance(), "generalized", matrix=matrices[3])
        assert res.status == lp.OPTIMAL
        assert res.rho == pytest.approx(330.0, abs=1e-6)

    def test_single_recipe_binds_chamber_row(self, matrices):
        inst = one_tool_instance(3, [("j0", 7.0)], [("j0", [(0, 1.0)])])
        res = solve_capacity(inst, "generalized", matrix=matrices[3])
        assert res.rho == pytest.approx(7.0, abs=1e-8)

    def test_zero_demand_gives_zero_rho(self, matrices):
        inst = one_tool_instance(3, [("j0", 0.0)], [("j0", [(0, 1.0), (1, 1.0)])])
        res = solve_capacity(inst, "generalized", matrix=matrices[3])
        assert res.rho == pytest.approx(0.0, abs=1e-9)

    def test_requires_reduced_matrix(self, matrices):
        from clustercap import cuts_to_matrix, double_graph, enumerate_minimal_cuts
        from clustercap import build_parallel_graph

        g = build_parallel_graph(3)
        raw = cuts_to_matrix(g, enumerate_minimal_cuts(double_graph(g)))
        with pytest.raises(DomainError, match="reduced"):
            build_generalized(example1_instance(), raw)

    def test_matrix_chamber_count_must_match(self, matrices):
        with pytest.raises(DomainError, match="chambers"):
            build_generalized(example1_instance(), matrices[4])


class TestAlternativeModel:
    def test_reference_instance_reaches_330(self):
        res = solve_capacity(example1_instance(), "alternative")
        assert res.rho == pytest.approx(330.0, abs=1e-6)

    def test_single_recipe_forced(self):
        inst = one_tool_instance(3, [("j0", 7.0)], [("j0", [(0, 1.0)])])
        res = solve_capacity(inst, "alternative")
        assert res.rho == pytest.approx(7.0, abs=1e-8)

    def test_two_disjoint_singles_fully_pair(self):
        inst = one_tool_instance(
            2,
            [("j0", 5.0), ("j1", 5.0)],
            [("j0", [(0, 1.0)]), ("j1", [(1, 1.0)])],
        )
        res = solve_capacity(inst, "alternative")
        assert res.rho == pytest.approx(5.0, abs=1e-8)


class TestModelAgreement:
    def test_small_fuzz(self, matrices, cache_dir):
        rng = np.random.default_rng(2024)
        for _ in range(20):
            n = int(rng.integers(2, 5))
            inst = random_instance(rng, n)
            res_g = solve_capacity(inst, "generalized", matrix=matrices[n])
            res_a = solve_capacity(inst, "alternative")
            assert res_g.status == res_a.status == lp.OPTIMAL
            assert abs(res_g.rho - res_a.rho) <= 1e-6 * max(1.0, abs(res_g.rho))

    def test_demand_scaling(self, matrices):
        rng = np.random.default_rng(5)
        inst = random_instance(rng, 3)
        alpha = 3.7
        scaled = models.Instance(
            name=inst.name,
            chambers=inst.chambers,
            tools=inst.tools,
            jobs=tuple(models.Job(j.id, alpha * j.demand) for j in inst.jobs),
            qualifications=inst.qualifications,
        )
        for kind in ("basic", "serial", "generalized", "alternative"):
            base = solve_capacity(inst, kind, matrix=matrices[3])
            big = solve_capacity(scaled, kind, matrix=matrices[3])
            assert big.rho == pytest.approx(alpha * base.rho, rel=1e-7, abs=1e-7)

    def test_qualification_monotonicity(self, matrices):
        rng = np.random.default_rng(11)
        for _ in range(5):
            inst = random_instance(rng, 3, max_tools=3, max_jobs=3)
            victim = None
            for q in inst.qualifications:
                if len(q.chamber_rates) > 1:
                    victim = q
                    break
            if victim is None:
                continue
            reduced_quals = tuple(
                q
                if q is not victim
                else models.Qualification(q.job, q.tool, q.chamber_rates[1:])
                for q in inst.qualifications
            )
            smaller = models.Instance(
                name=inst.name,
                chambers=inst.chambers,
                tools=inst.tools,
                jobs=inst.jobs,
                qualifications=reduced_quals,
            )
            for kind in ("basic", "generalized", "alternative"):
                before = solve_capacity(inst, kind, matrix=matrices[3])
                after = solve_capacity(smaller, kind, matrix=matrices[3])
                assert after.rho >= before.rho - 1e-7

    def test_basic_is_a_relaxation_on_homogeneous_instances(self, matrices):
        rng = np.random.default_rng(23)
        for _ in range(10):
            inst = random_instance(rng, 3, homogeneous=True)
            basic = solve_capacity(inst, "basic")
            gen = solve_capacity(inst, "generalized", matrix=matrices[3])
            assert basic.rho <= gen.rho + 1e-7

    def test_single_tool_rho_equals_cut_makespan(self, matrices):
        rng = np.random.default_rng(31)
        for _ in range(5):
            inst = random_instance(rng, 3, max_tools=1)
            built = build_generalized(inst, matrices[3])
            sol = lp.solve(built.problem)
            assert sol.status == lp.OPTIMAL
            x = np.array(
                [
                    sol.x[built.agg_cols[(inst.tools[0], label)]]
                    for label in matrices[3].labels
                ]
            )
            assert makespan_via_cuts(x, matrices[3]) == pytest.approx(
                sol.objective, abs=1e-6
            )


class TestResultExtraction:
    def test_assignments_meet_demand(self, matrices):
        res = solve_capacity(example1_instance(), "generalized", matrix=matrices[3])
        produced = {}
        for a in res.assignments:
            produced[a.job] = produced.get(a.job, 0.0) + a.wafers
        assert produced["lot1"] == pytest.approx(90.0, rel=1e-9)
        assert produced["lot2"] == pytest.approx(90.0, rel=1e-9)

    def test_json_shape(self, matrices):
        res = solve_capacity(example1_instance(), "generalized", matrix=matrices[3])
        d = res.to_json_dict()
        assert set(d) == {"model", "status", "rho", "assignments", "utilization"}
        assert all(
            set(a) == {"job", "tool", "recipe", "time", "wafers"} for a in d["assignments"]
        )
        assert all(set(u) == {"tool", "row_kind", "value"} for u in d["utilization"])

    def test_infeasible_status_surfaces(self, matrices):
        # zero-rate impossible demand cannot happen (rates > 0); force
        # infeasibility via an override pushing demand above any capacity is
        # not possible either, so check the structural pre-check instead
        inst = models.Instance(
            name="broken",
            chambers=3,
            tools=("t0",),
            jobs=(models.Job("j0", 5.0),),
            qualifications=(),
        )
        with pytest.raises(StructurallyInfeasibleError):
            solve_capacity(inst, "generalized", matrix=matrices[3])

    def test_unknown_kind_rejected(self):
        with pytest.raises(DomainError, match="unknown model kind"):
            solve_capacity(example1_instance(), "quantum")


class TestSizeFormulas:
    def test_delta_and_gamma_sequences(self, cache_dir):
        deltas = {}
        gammas = {}
        for n in (1, 2, 3, 4):
            pred = predict_sizes("generalized", n, 1, 1, 1, cache_dir=cache_dir)
            deltas[n] = pred.delta_n
            gammas[n] = pred.gamma_n
        assert gammas == {1: 3, 2: 10, 3: 33, 4: 106}
        assert deltas[1] == 0 and deltas[2] == -2 and deltas[4] == 188
        # the reference delta for n=3 is 1; the built matrices give 2 because
        # the reference nonzero tally for n=3 is off by one vs its own table
        assert deltas[3] == 2

    def test_alternative_toy_formula_vs_actual(self, cache_dir, matrices):
        inst = one_tool_instance(
            3, [("j0", 5.0)], [("j0", [(0, 1.0), (1, 1.0), (2, 1.0)])]
        )
        built = build_alternative(inst)
        pred = predict_sizes("alternative", 3, 1, 1, 7, cache_dir=cache_dir)
        assert pred.nonzeros == 48  # reference listing: 2|C| + |I|(1 + 3|R| + 2|E|)
        assert pred.nonzeros_gamma == 47  # reference gamma variant
        # the built row set carries the pairing variables in the makespan row
        # too, hence |E| more entries than the listing
        assert built.stats.nonzeros == 54
        assert built.stats.rows == pred.rows == 16
        assert built.stats.columns == pred.columns == 21

    def test_generalized_toy_counts(self, cache_dir, matrices):
        inst = one_tool_instance(
            3, [("j0", 5.0)], [("j0", [(0, 1.0), (1, 1.0), (2, 1.0)])]
        )
        built = build_generalized(inst, matrices[3])
        pred = predict_sizes("generalized", 3, 1, 1, 7, cache_dir=cache_dir)
        assert built.stats.rows == pred.rows == 13
        # reference column formula counts pairing variables the cut model
        # does not have
        assert pred.columns == 21
        assert built.stats.columns == 15
        assert pred.nonzeros == 50
        assert built.stats.nonzeros == 49  # no per-tool constant offset

    def test_stats_match_problem(self, matrices):
        built = build_generalized(example1_instance(), matrices[3])
        assert built.stats == size_stats(built.problem)

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            predict_sizes("basic", 3, 1, 1, 1)
