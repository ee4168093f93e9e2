"""Capacity-planning LP models for cluster tools with two load locks.

Four model builders share one instance format:

* basic        classical parallel-server load balancing; each job runs its
               full qualified chamber set, load locks ignored.
* serial       every wafer visits all qualified chambers in sequence; the
               slowest chamber sets the tool rate, and each chamber gets its
               own utilization row.
* generalized  per-recipe time variables with one makespan row per reduced
               cut of the doubled recipe graph.
* alternative  per-recipe time variables plus explicit pairing-time variables
               on the parallelization-graph edges.

The generalized and alternative models bound the same quantity and must agree
on the optimal bottleneck utilization.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from . import lp
from .cuts import CutMatrix, build_cut_matrix
from .errors import DomainError, NotQualifiedError, StructurallyInfeasibleError
from .recipes import MAX_CHAMBERS, build_parallel_graph, chamber_letter


@dataclass(frozen=True)
class Job:
    id: str
    demand: float


@dataclass(frozen=True)
class Qualification:
    """Chamber rates for one (job, tool) pair; absent chambers are locked."""

    job: str
    tool: str
    chamber_rates: tuple[tuple[int, float], ...]  # (chamber index, wafers/time)


@dataclass(frozen=True)
class RateOverride:
    job: str
    tool: str
    recipe: str
    rate: float


@dataclass(frozen=True)
class Instance:
    name: str
    chambers: int
    tools: tuple[str, ...]
    jobs: tuple[Job, ...]
    qualifications: tuple[Qualification, ...]
    rate_overrides: tuple[RateOverride, ...] = ()

    def __post_init__(self):
        if not 1 <= self.chambers <= MAX_CHAMBERS:
            raise DomainError(f"chamber count must be in 1..{MAX_CHAMBERS}")
        if len(set(self.tools)) != len(self.tools):
            raise DomainError("duplicate tool id")
        if len({j.id for j in self.jobs}) != len(self.jobs):
            raise DomainError("duplicate job id")
        jobs = {j.id for j in self.jobs}
        tools = set(self.tools)
        for j in self.jobs:
            if j.demand < 0:
                raise DomainError(f"job {j.id}: demand must be >= 0")
        seen = set()
        for q in self.qualifications:
            if q.job not in jobs:
                raise DomainError(f"qualification references unknown job {q.job!r}")
            if q.tool not in tools:
                raise DomainError(f"qualification references unknown tool {q.tool!r}")
            if (q.job, q.tool) in seen:
                raise DomainError(f"duplicate qualification for ({q.job}, {q.tool})")
            seen.add((q.job, q.tool))
            if not q.chamber_rates:
                raise DomainError(f"qualification ({q.job}, {q.tool}) lists no chambers")
            chambers = set()
            for c, rate in q.chamber_rates:
                if not 0 <= c < self.chambers:
                    raise DomainError(f"({q.job}, {q.tool}): chamber index {c} out of range")
                if c in chambers:
                    raise DomainError(f"({q.job}, {q.tool}): duplicate chamber {c}")
                chambers.add(c)
                if rate <= 0:
                    raise DomainError(f"({q.job}, {q.tool}): rate must be > 0")
        qual_index = {(q.job, q.tool): q for q in self.qualifications}
        for ov in self.rate_overrides:
            q = qual_index.get((ov.job, ov.tool))
            if q is None:
                raise DomainError(f"override references unqualified pair ({ov.job}, {ov.tool})")
            have = {chamber_letter(c) for c, _ in q.chamber_rates}
            if not ov.recipe or not set(ov.recipe) <= have:
                raise DomainError(
                    f"override recipe {ov.recipe!r} outside qualified chambers of "
                    f"({ov.job}, {ov.tool})"
                )
            if ov.rate <= 0:
                raise DomainError("override rate must be > 0")

    def qual(self, job: str, tool: str) -> Qualification | None:
        return self._qual_index.get((job, tool))

    @property
    def _qual_index(self) -> dict[tuple[str, str], Qualification]:
        cached = self.__dict__.get("_qual_cache")
        if cached is None:
            cached = {(q.job, q.tool): q for q in self.qualifications}
            self.__dict__["_qual_cache"] = cached
        return cached

    def qualified_mask(self, job: str, tool: str) -> int:
        q = self.qual(job, tool)
        if q is None:
            return 0
        mask = 0
        for c, _ in q.chamber_rates:
            mask |= 1 << c
        return mask

    def structurally_feasible(self) -> bool:
        """Every job reaches at least one (tool, chamber)."""
        qualified = {q.job for q in self.qualifications}
        return all(j.id in qualified for j in self.jobs)


def derive_recipe_rate(inst: Instance, job: str, tool: str, recipe: str) -> float:
    """Wafers per time unit for running `recipe` of (job, tool).

    The triple belongs to the qualification set only when every chamber of
    the recipe is qualified for the pair; otherwise NotQualifiedError.  An
    explicit override wins; the default is the sum of the chamber base rates
    (each chamber of the recipe processes wafers independently).
    """
    q = inst.qual(job, tool)
    if q is None:
        raise NotQualifiedError(f"({job}, {tool}) is not qualified")
    rates = {chamber_letter(c): r for c, r in q.chamber_rates}
    if not recipe or not set(recipe) <= set(rates):
        raise NotQualifiedError(f"({job}, {tool}, {recipe or '?'}) is outside the qualification set")
    for ov in inst.rate_overrides:
        if (ov.job, ov.tool, ov.recipe) == (job, tool, recipe):
            return ov.rate
    return sum(rates[ch] for ch in recipe)


@dataclass(frozen=True)
class BuiltModel:
    kind: str
    problem: lp.LpProblem
    rho_col: int
    x_cols: dict
    agg_cols: dict
    pair_cols: dict
    stats: lp.SizeStats


@dataclass(frozen=True)
class Assignment:
    job: str
    tool: str
    recipe: str
    time: float
    wafers: float


@dataclass(frozen=True)
class UtilizationEntry:
    tool: str
    row_kind: str
    value: float


@dataclass(frozen=True)
class CapacityResult:
    model: str
    status: str
    rho: float | None
    assignments: tuple[Assignment, ...]
    utilization: tuple[UtilizationEntry, ...]
    build_ms: float
    solve_ms: float
    stats: lp.SizeStats

    def to_json_dict(self) -> dict:
        return {
            "model": self.model,
            "status": self.status,
            "rho": self.rho,
            "assignments": [
                {
                    "job": a.job,
                    "tool": a.tool,
                    "recipe": a.recipe,
                    "time": a.time,
                    "wafers": a.wafers,
                }
                for a in self.assignments
            ],
            "utilization": [
                {"tool": u.tool, "row_kind": u.row_kind, "value": u.value}
                for u in self.utilization
            ],
        }


MODEL_KINDS = ("basic", "serial", "generalized", "alternative")


def _require_feasible_jobs(inst: Instance):
    qualified = {q.job for q in inst.qualifications}
    missing = [j.id for j in inst.jobs if j.id not in qualified]
    if missing:
        raise StructurallyInfeasibleError(
            f"jobs without any qualification: {', '.join(missing)}"
        )


def _full_recipe_label(inst: Instance, job: str, tool: str) -> str:
    mask = inst.qualified_mask(job, tool)
    return "".join(chamber_letter(c) for c in range(inst.chambers) if mask >> c & 1)


def build_basic(inst: Instance) -> BuiltModel:
    """Load-lock-free relaxation: one time variable per qualified pair.

    The pair rate is the full qualified-chamber recipe rate; one shared bound
    rho caps every tool's total committed time.
    """
    _require_feasible_jobs(inst)
    build = lp.LpBuilder(f"basic[{inst.name}]", lp.MINIMIZE)
    rho = build.add_var("rho")
    x_cols = {}
    rates = {}
    for ji, job in enumerate(inst.jobs):
        for ti, tool in enumerate(inst.tools):
            if inst.qual(job.id, tool) is None:
                continue
            col = build.add_var(f"x_j{ji}_t{ti}")
            x_cols[(job.id, tool)] = col
            rates[(job.id, tool)] = derive_recipe_rate(
                inst, job.id, tool, _full_recipe_label(inst, job.id, tool)
            )
    build.set_objective([(rho, 1.0)])
    for ji, job in enumerate(inst.jobs):
        coeffs = [
            (x_cols[(job.id, tool)], rates[(job.id, tool)])
            for tool in inst.tools
            if (job.id, tool) in x_cols
        ]
        build.add_constraint(f"dem_j{ji}", coeffs, lp.EQ, job.demand)
    for ti, tool in enumerate(inst.tools):
        coeffs = [(col, 1.0) for (j, t), col in x_cols.items() if t == tool]
        coeffs.append((rho, -1.0))
        build.add_constraint(f"load_t{ti}", coeffs, lp.LE, 0.0)
    problem = build.problem()
    return BuiltModel("basic", problem, rho, x_cols, {}, {}, lp.size_stats(problem))


def build_serial(inst: Instance) -> BuiltModel:
    """Serial-mode model: pair rate is the slowest qualified chamber rate.

    On top of the per-tool rows, each qualified chamber gets a utilization
    row u_{i,v} = sum_j x_{ji} mu_{ji} / mu_{j,(i,v)} <= rho: the wafers sent
    to the tool occupy every chamber for that chamber's own service time.
    """
    _require_feasible_jobs(inst)
    build = lp.LpBuilder(f"serial[{inst.name}]", lp.MINIMIZE)
    rho = build.add_var("rho")
    x_cols = {}
    serial_rate = {}
    for ji, job in enumerate(inst.jobs):
        for ti, tool in enumerate(inst.tools):
            q = inst.qual(job.id, tool)
            if q is None:
                continue
            col = build.add_var(f"x_j{ji}_t{ti}")
            x_cols[(job.id, tool)] = col
            serial_rate[(job.id, tool)] = min(rate for _, rate in q.chamber_rates)
    build.set_objective([(rho, 1.0)])
    for ji, job in enumerate(inst.jobs):
        coeffs = [
            (x_cols[(job.id, tool)], serial_rate[(job.id, tool)])
            for tool in inst.tools
            if (job.id, tool) in x_cols
        ]
        build.add_constraint(f"dem_j{ji}", coeffs, lp.EQ, job.demand)
    for ti, tool in enumerate(inst.tools):
        coeffs = [(col, 1.0) for (j, t), col in x_cols.items() if t == tool]
        coeffs.append((rho, -1.0))
        build.add_constraint(f"load_t{ti}", coeffs, lp.LE, 0.0)
        for c in range(inst.chambers):
            coeffs = []
            for job in inst.jobs:
                q = inst.qual(job.id, tool)
                if q is None:
                    continue
                chamber_rate = dict(q.chamber_rates).get(c)
                if chamber_rate is None:
                    continue
                col = x_cols[(job.id, tool)]
                coeffs.append((col, serial_rate[(job.id, tool)] / chamber_rate))
            if coeffs:
                coeffs.append((rho, -1.0))
                build.add_constraint(f"cham_t{ti}_{chamber_letter(c)}", coeffs, lp.LE, 0.0)
    problem = build.problem()
    return BuiltModel("serial", problem, rho, x_cols, {}, {}, lp.size_stats(problem))


def _recipe_members(inst: Instance, graph_labels: tuple[str, ...]):
    """Qualification-set triples in canonical order with their rates."""
    members = []
    for ji, job in enumerate(inst.jobs):
        for ti, tool in enumerate(inst.tools):
            mask = inst.qualified_mask(job.id, tool)
            if mask == 0:
                continue
            for label in graph_labels:
                label_mask = 0
                for ch in label:
                    label_mask |= 1 << (ord(ch) - ord("A"))
                if label_mask & ~mask:
                    continue
                members.append(
                    (ji, job.id, ti, tool, label, derive_recipe_rate(inst, job.id, tool, label))
                )
    return members


def build_generalized(inst: Instance, matrix: CutMatrix) -> BuiltModel:
    """Cut-row model: per-recipe aggregate times bounded by every reduced cut.

    Requires a reduced matrix for the instance's chamber count.
    """
    if matrix.n != inst.chambers:
        raise DomainError(f"cut matrix is for {matrix.n} chambers, instance has {inst.chambers}")
    if not matrix.reduced:
        raise DomainError("generalized model requires the reduced cut matrix")
    _require_feasible_jobs(inst)
    build = lp.LpBuilder(f"generalized[{inst.name}]", lp.MINIMIZE)
    rho = build.add_var("rho")
    members = _recipe_members(inst, matrix.labels)
    x_cols = {}
    for ji, job, ti, tool, label, rate in members:
        x_cols[(job, tool, label)] = build.add_var(f"x_j{ji}_t{ti}_{label}")
    agg_cols = {}
    for ti, tool in enumerate(inst.tools):
        for label in matrix.labels:
            agg_cols[(tool, label)] = build.add_var(f"agg_t{ti}_{label}")
    build.set_objective([(rho, 1.0)])
    for ji, job in enumerate(inst.jobs):
        coeffs = [
            (x_cols[(job.id, tool, label)], rate)
            for _ji, j, ti, tool, label, rate in members
            if j == job.id
        ]
        build.add_constraint(f"dem_j{ji}", coeffs, lp.EQ, job.demand)
    coeff_rows = matrix.coeff_rows()
    for ti, tool in enumerate(inst.tools):
        for label in matrix.labels:
            coeffs = [(agg_cols[(tool, label)], 1.0)]
            coeffs.extend(
                (x_cols[(j, t, lab)], -1.0)
                for _ji, j, _ti, t, lab, _rate in members
                if t == tool and lab == label
            )
            build.add_constraint(f"bal_t{ti}_{label}", coeffs, lp.EQ, 0.0)
        for k, row in enumerate(coeff_rows):
            coeffs = [
                (agg_cols[(tool, label)], coef)
                for label, coef in zip(matrix.labels, row)
                if coef != 0.0
            ]
            coeffs.append((rho, -1.0))
            build.add_constraint(f"cut_t{ti}_k{k}", coeffs, lp.LE, 0.0)
    problem = build.problem()
    return BuiltModel("generalized", problem, rho, x_cols, agg_cols, {}, lp.size_stats(problem))


def build_alternative(inst: Instance) -> BuiltModel:
    """Edge-variable model: pairing times on the parallelization graph.

    Per tool: availability rows cap each recipe's incident pairing time, and
    one makespan row total-time-minus-paired-time <= rho.
    """
    _require_feasible_jobs(inst)
    g = build_parallel_graph(inst.chambers)
    build = lp.LpBuilder(f"alternative[{inst.name}]", lp.MINIMIZE)
    rho = build.add_var("rho")
    members = _recipe_members(inst, g.labels)
    x_cols = {}
    for ji, job, ti, tool, label, rate in members:
        x_cols[(job, tool, label)] = build.add_var(f"x_j{ji}_t{ti}_{label}")
    agg_cols = {}
    pair_cols = {}
    for ti, tool in enumerate(inst.tools):
        for label in g.labels:
            agg_cols[(tool, label)] = build.add_var(f"agg_t{ti}_{label}")
        for i, j in g.edges:
            pair_cols[(tool, g.labels[i], g.labels[j])] = build.add_var(
                f"pair_t{ti}_{g.labels[i]}_{g.labels[j]}"
            )
    build.set_objective([(rho, 1.0)])
    for ji, job in enumerate(inst.jobs):
        coeffs = [
            (x_cols[(job.id, tool, label)], rate)
            for _ji, j, ti, tool, label, rate in members
            if j == job.id
        ]
        build.add_constraint(f"dem_j{ji}", coeffs, lp.EQ, job.demand)
    for ti, tool in enumerate(inst.tools):
        for label in g.labels:
            coeffs = [(agg_cols[(tool, label)], 1.0)]
            coeffs.extend(
                (x_cols[(j, t, lab)], -1.0)
                for _ji, j, _ti, t, lab, _rate in members
                if t == tool and lab == label
            )
            build.add_constraint(f"bal_t{ti}_{label}", coeffs, lp.EQ, 0.0)
        for r, label in enumerate(g.labels):
            incident = g.incident_edges(r)
            coeffs = [
                (pair_cols[(tool, g.labels[i], g.labels[j])], 1.0)
                for i, j in (g.edges[k] for k in incident)
            ]
            coeffs.append((agg_cols[(tool, label)], -1.0))
            build.add_constraint(f"par_t{ti}_{label}", coeffs, lp.LE, 0.0)
        coeffs = [(agg_cols[(tool, label)], 1.0) for label in g.labels]
        coeffs.extend(
            (pair_cols[(tool, g.labels[i], g.labels[j])], -1.0) for i, j in g.edges
        )
        coeffs.append((rho, -1.0))
        build.add_constraint(f"mk_t{ti}", coeffs, lp.LE, 0.0)
    problem = build.problem()
    return BuiltModel(
        "alternative", problem, rho, x_cols, agg_cols, pair_cols, lp.size_stats(problem)
    )


def build_model(
    inst: Instance,
    kind: str,
    matrix: CutMatrix | None = None,
    cache_dir=None,
) -> BuiltModel:
    if kind == "basic":
        return build_basic(inst)
    if kind == "serial":
        return build_serial(inst)
    if kind == "generalized":
        if matrix is None:
            matrix = build_cut_matrix(inst.chambers, reduce=True, cache_dir=cache_dir)
        return build_generalized(inst, matrix)
    if kind == "alternative":
        return build_alternative(inst)
    raise DomainError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")


def _extract(inst: Instance, model: BuiltModel, sol: lp.LpSolution) -> tuple:
    tol = 1e-9
    assignments = []
    if model.kind in ("basic", "serial"):
        for (job, tool), col in model.x_cols.items():
            t = sol.x[col]
            if t <= tol:
                continue
            label = _full_recipe_label(inst, job, tool)
            if model.kind == "basic":
                rate = derive_recipe_rate(inst, job, tool, label)
            else:
                rate = min(r for _, r in inst.qual(job, tool).chamber_rates)
            assignments.append(Assignment(job, tool, label, t, t * rate))
    else:
        for (job, tool, label), col in model.x_cols.items():
            t = sol.x[col]
            if t <= tol:
                continue
            rate = derive_recipe_rate(inst, job, tool, label)
            assignments.append(Assignment(job, tool, label, t, t * rate))

    utilization = []
    if model.kind == "basic":
        for ti, tool in enumerate(inst.tools):
            v = sum(sol.x[c] for (j, t), c in model.x_cols.items() if t == tool)
            utilization.append(UtilizationEntry(tool, "total_time", v))
    elif model.kind == "serial":
        for ti, tool in enumerate(inst.tools):
            v = sum(sol.x[c] for (j, t), c in model.x_cols.items() if t == tool)
            utilization.append(UtilizationEntry(tool, "total_time", v))
            for c in range(inst.chambers):
                v = 0.0
                present = False
                for job in inst.jobs:
                    q = inst.qual(job.id, tool)
                    if q is None:
                        continue
                    rate_map = dict(q.chamber_rates)
                    if c not in rate_map:
                        continue
                    present = True
                    serial = min(r for _, r in q.chamber_rates)
                    v += sol.x[model.x_cols[(job.id, tool)]] * serial / rate_map[c]
                if present:
                    utilization.append(
                        UtilizationEntry(tool, f"chamber_{chamber_letter(c)}", v)
                    )
    elif model.kind == "generalized":
        for ti, tool in enumerate(inst.tools):
            utilization.append(
                UtilizationEntry(tool, "cut_max", _worst_cut(model, sol, f"cut_t{ti}_"))
            )
    else:
        for ti, tool in enumerate(inst.tools):
            total = sum(
                sol.x[model.agg_cols[(t, lbl)]] for (t, lbl) in model.agg_cols if t == tool
            )
            paired = sum(
                sol.x[c] for (t, l1, l2), c in model.pair_cols.items() if t == tool
            )
            utilization.append(UtilizationEntry(tool, "makespan", total - paired))
    return tuple(assignments), tuple(utilization)


def _worst_cut(model: BuiltModel, sol: lp.LpSolution, prefix: str) -> float:
    worst = 0.0
    for con in model.problem.constraints:
        if not con.name.startswith(prefix):
            continue
        value = sum(v * sol.x[j] for j, v in con.coeffs if j != model.rho_col)
        if value > worst:
            worst = value
    return worst


def solve_capacity(
    inst: Instance,
    kind: str,
    matrix: CutMatrix | None = None,
    cache_dir=None,
) -> CapacityResult:
    """Build and solve one model; wall times are recorded for benchmarking."""
    t0 = time.perf_counter()
    model = build_model(inst, kind, matrix=matrix, cache_dir=cache_dir)
    t1 = time.perf_counter()
    sol = lp.solve(model.problem)
    t2 = time.perf_counter()
    if sol.status != lp.OPTIMAL:
        return CapacityResult(
            model=kind,
            status=sol.status,
            rho=None,
            assignments=(),
            utilization=(),
            build_ms=(t1 - t0) * 1e3,
            solve_ms=(t2 - t1) * 1e3,
            stats=model.stats,
        )
    assignments, utilization = _extract(inst, model, sol)
    return CapacityResult(
        model=kind,
        status=sol.status,
        rho=sol.objective,
        assignments=assignments,
        utilization=utilization,
        build_ms=(t1 - t0) * 1e3,
        solve_ms=(t2 - t1) * 1e3,
        stats=model.stats,
    )


@dataclass(frozen=True)
class SizePrediction:
    """Reference closed-form size formulas next to matrix-derived tallies.

    For the alternative model two reference nonzero counts circulate that
    disagree with each other (the term listing vs gamma_n); both are kept.
    Actual counts from built problems are the ground truth and are reported
    alongside by callers.
    """

    kind: str
    columns: int
    rows: int
    nonzeros: int
    nonzeros_gamma: int | None
    k_rows: int
    coeff_nonzeros: int
    delta_n: int
    gamma_n: int


def gamma_formula(n: int) -> int:
    return (3 ** (n + 1) - 2 ** (n + 1) + 1) // 2


def predict_sizes(
    kind: str, n: int, n_tools: int, n_jobs: int, n_quals: int, cache_dir=None
) -> SizePrediction:
    """Evaluate the closed-form size formulas for one model family.

    k_rows and coeff_nonzeros come from the built reduced matrix (n <= 5 is
    practical), never from a hardcoded table.
    """
    if kind not in ("generalized", "alternative"):
        raise DomainError("size formulas exist for 'generalized' and 'alternative' only")
    matrix = build_cut_matrix(n, reduce=True, cache_dir=cache_dir)
    n_recipes = 2**n - 1
    n_edges = (3**n - 1) // 2 - n_recipes
    k_rows = len(matrix.rows)
    coeff_nz = matrix.nonzeros()
    delta_n = 1 + k_rows + coeff_nz - 3**n
    gamma_n = gamma_formula(n)
    columns = 1 + n_quals + n_tools * (3**n - 1) // 2
    if kind == "generalized":
        rows = n_jobs + n_tools * (n_recipes + k_rows)
        nonzeros = 2 * n_quals + n_tools * (n_recipes + 1 + k_rows + coeff_nz)
        nonzeros_gamma = None
    else:
        rows = n_jobs + n_tools * (1 + 2 * n_recipes)
        nonzeros = 2 * n_quals + n_tools * (1 + 3 * n_recipes + 2 * n_edges)
        nonzeros_gamma = 2 * n_quals + n_tools * gamma_n
    return SizePrediction(
        kind=kind,
        columns=columns,
        rows=rows,
        nonzeros=nonzeros,
        nonzeros_gamma=nonzeros_gamma,
        k_rows=k_rows,
        coeff_nonzeros=coeff_nz,
        delta_n=delta_n,
        gamma_n=gamma_n,
    )
