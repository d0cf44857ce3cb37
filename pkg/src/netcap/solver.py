"""Exact rational LP and MIP solving.

Two-phase primal simplex on a dense Fraction tableau with Bland's rule for
both the entering and leaving choices, so no cycling and no tolerances:
every comparison is an exact rational comparison.  Integer models are solved
by depth-first branch and bound on the first fractional integer variable in
model order, pruning on exact bound comparisons.  Sized for desk-scale
models (a few hundred variables), which is all this package needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping

from .core import Instance
from .errors import MissingBoundError, NetcapError, PreconditionError
from .formulate import (
    LinearConstraint,
    MipModel,
    ModelKind,
    VarRef,
    add_flow_symmetry,
    build_bidirected,
    build_directed,
    build_undirected,
    fix_variables,
)

_ZERO = Fraction(0)
_ONE = Fraction(1)


class SolveStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpSolution:
    status: SolveStatus
    values: Mapping[VarRef, Fraction]
    objective: Fraction | None
    # Certificate plumbing: indices into the deterministic standardization.
    basis_columns: tuple[int, ...] = ()
    kept_rows: tuple[int, ...] = ()


@dataclass(frozen=True)
class MipResult:
    status: SolveStatus
    values: Mapping[VarRef, Fraction]
    objective: Fraction | None
    nodes: int = 0


@dataclass(frozen=True)
class _Standardized:
    """Equality form with nonnegative rhs: A z = b over structural+slack columns."""

    n_structural: int
    n_cols: int
    rows: tuple[tuple[tuple[int, Fraction], ...], ...]  # sparse (col, coef)
    rhs: tuple[Fraction, ...]
    needs_artificial: tuple[bool, ...]
    slack_of_row: tuple[int | None, ...]
    inconsistent: bool  # a constant row was violated


def _standardize(model: MipModel) -> _Standardized:
    index = model.var_index()
    n = len(model.variables)
    rows: list[tuple[tuple[int, Fraction], ...]] = []
    rhs: list[Fraction] = []
    needs_art: list[bool] = []
    slack_of_row: list[int | None] = []
    next_col = n
    for con in model.constraints:
        coeffs = [(index[v], c) for v, c in con.coeffs.items()]
        coeffs.sort()
        b = con.rhs
        sense = con.sense
        if not coeffs:
            ok = (b >= 0) if sense == "<=" else (b <= 0) if sense == ">=" else (b == 0)
            if not ok:
                return _Standardized(n, n, (), (), (), (), True)
            continue
        if b < 0:  # normalize to nonnegative rhs
            coeffs = [(j, -c) for j, c in coeffs]
            b = -b
            sense = {"<=": ">=", ">=": "<=", "=": "="}[sense]
        if sense == "<=":
            coeffs.append((next_col, _ONE))
            slack_of_row.append(next_col)
            needs_art.append(False)
            next_col += 1
        elif sense == ">=":
            coeffs.append((next_col, -_ONE))
            slack_of_row.append(next_col)
            needs_art.append(True)
            next_col += 1
        else:
            slack_of_row.append(None)
            needs_art.append(True)
        rows.append(tuple(coeffs))
        rhs.append(b)
    return _Standardized(
        n_structural=n,
        n_cols=next_col,
        rows=tuple(rows),
        rhs=tuple(rhs),
        needs_artificial=tuple(needs_art),
        slack_of_row=tuple(slack_of_row),
        inconsistent=False,
    )


def _bland_simplex(
    tab: list[list[Fraction]],
    basis: list[int],
    red: list[Fraction],
    width: int,
) -> str:
    """Run simplex to completion on reduced-cost row `red` (minimization).

    Columns at index >= width are blocked from entering.  Returns "optimal"
    or "unbounded".  The reduced-cost row is updated in place.
    """
    m = len(tab)
    while True:
        enter = -1
        for j in range(width):
            if red[j] < 0:
                enter = j
                break
        if enter < 0:
            return "optimal"
        leave = -1
        best: Fraction | None = None
        for i in range(m):
            a = tab[i][enter]
            if a > 0:
                ratio = tab[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            return "unbounded"
        # pivot on (leave, enter); zero cells of the pivot row are skipped,
        # which matters because network tableaus stay sparse
        prow = tab[leave]
        piv = prow[enter]
        if piv != 1:
            inv = _ONE / piv
            tab[leave] = prow = [c * inv if c else c for c in prow]
        support = [j for j, p in enumerate(prow) if p]
        for i in range(m):
            if i == leave:
                continue
            row = tab[i]
            f = row[enter]
            if f:
                for j in support:
                    row[j] -= f * prow[j]
        f = red[enter]
        if f:
            for j in range(len(red)):
                if prow[j]:
                    red[j] -= f * prow[j]
        basis[leave] = enter


def _reduced_costs(
    tab: list[list[Fraction]], basis: list[int], cost: list[Fraction]
) -> list[Fraction]:
    red = list(cost)
    red.append(_ZERO)  # objective cell (negated value)
    for i, b in enumerate(basis):
        cb = cost[b]
        if cb:
            row = tab[i]
            for j in range(len(red)):
                if row[j]:
                    red[j] -= cb * row[j]
    return red


def _solve_standardized(
    std: _Standardized, objective_vec: list[Fraction], feasibility_only: bool = False
) -> tuple[str, list[Fraction], list[int], list[int]]:
    """Two-phase simplex.  Returns (status, values, basis, kept_row_indices)."""
    m = len(std.rows)
    if m == 0:
        if not feasibility_only and any(c < 0 for c in objective_vec):
            return "unbounded", [], [], []
        return "optimal", [_ZERO] * std.n_cols, [], []
    n_art = sum(std.needs_artificial)
    total = std.n_cols + n_art
    tab: list[list[Fraction]] = []
    basis: list[int] = []
    art_col = std.n_cols
    art_cols: list[int] = []
    for r in range(m):
        row = [_ZERO] * (total + 1)
        for j, c in std.rows[r]:
            row[j] = c
        row[-1] = std.rhs[r]
        if std.needs_artificial[r]:
            row[art_col] = _ONE
            basis.append(art_col)
            art_cols.append(art_col)
            art_col += 1
        else:
            basis.append(std.slack_of_row[r])
        tab.append(row)

    kept = list(range(m))
    if n_art:
        phase1_cost = [_ZERO] * total
        for j in art_cols:
            phase1_cost[j] = _ONE
        red = _reduced_costs(tab, basis, phase1_cost)
        _bland_simplex(tab, basis, red, total)  # bounded below by 0, never unbounded
        value = sum((tab[i][-1] for i in range(len(tab)) if basis[i] >= std.n_cols), _ZERO)
        if value > 0:
            return "infeasible", [], [], []
        # Drive leftover artificials out of the basis; all-zero rows are redundant.
        drop: list[int] = []
        for i in range(len(tab)):
            if basis[i] < std.n_cols:
                continue
            pivot_col = -1
            for j in range(std.n_cols):
                if tab[i][j] != 0:
                    pivot_col = j
                    break
            if pivot_col < 0:
                drop.append(i)
                continue
            prow = tab[i]
            piv = prow[pivot_col]
            if piv != 1:
                inv = _ONE / piv
                tab[i] = prow = [c * inv if c else c for c in prow]
            support = [j for j, p in enumerate(prow) if p]
            for r2 in range(len(tab)):
                if r2 == i:
                    continue
                row2 = tab[r2]
                f = row2[pivot_col]
                if f:
                    for j in support:
                        row2[j] -= f * prow[j]
            basis[i] = pivot_col
        for i in reversed(drop):
            del tab[i]
            del basis[i]
            del kept[i]

    if feasibility_only:
        values = [_ZERO] * std.n_cols
        for i, b in enumerate(basis):
            values[b] = tab[i][-1]
        return "optimal", values, basis, kept

    # Phase 2 over real columns only; cost padded across artificial columns
    # so the reduced-cost row stays aligned with the tableau.
    cost = objective_vec + [_ZERO] * (total - len(objective_vec))
    red = _reduced_costs(tab, basis, cost)
    status = _bland_simplex(tab, basis, red, std.n_cols)
    if status == "unbounded":
        return "unbounded", [], [], []
    values = [_ZERO] * std.n_cols
    for i, b in enumerate(basis):
        values[b] = tab[i][-1]
    return "optimal", values, basis, kept


def solve_lp(model: MipModel, *, ignore_integrality: bool = False) -> LpSolution:
    """Solve the model as a pure LP, exactly.

    Models carrying integer variables are rejected unless
    `ignore_integrality` is set, in which case the continuous relaxation is
    solved.  Optimal solutions are re-checked against every original
    constraint before being returned.
    """
    if model.integer and not ignore_integrality:
        raise PreconditionError(
            "model has integer variables; use solve_mip or pass ignore_integrality=True"
        )
    std = _standardize(model)
    if std.inconsistent:
        return LpSolution(SolveStatus.INFEASIBLE, {}, None)
    vidx = model.var_index()
    objective_vec = [_ZERO] * std.n_structural
    for v, c in model.objective.items():
        objective_vec[vidx[v]] = c
    status, values, basis, kept = _solve_standardized(std, objective_vec)
    if status == "infeasible":
        return LpSolution(SolveStatus.INFEASIBLE, {}, None)
    if status == "unbounded":
        return LpSolution(SolveStatus.UNBOUNDED, {}, None)
    assignment = {
        v: values[j] for j, v in enumerate(model.variables) if values[j] != 0
    }
    bad = model.violations(assignment)
    if bad:
        raise NetcapError(f"solver returned an infeasible point; broken rows {bad!r}")
    objective = model.objective_value(assignment)
    return LpSolution(
        SolveStatus.OPTIMAL,
        assignment,
        objective,
        basis_columns=tuple(basis),
        kept_rows=tuple(kept),
    )


def feasible(model: MipModel) -> bool:
    """Phase-1 feasibility of the continuous relaxation."""
    std = _standardize(model)
    if std.inconsistent:
        return False
    status, _, _, _ = _solve_standardized(std, [], feasibility_only=True)
    return status == "optimal"


def optimality_certificate(model: MipModel, solution: LpSolution) -> bool:
    """Independent duality check of an Optimal LP solution.

    Rebuilds the standardization, solves u B = c_B for the returned basis by
    Gaussian elimination, and verifies every reduced cost is nonnegative and
    that u b equals the reported objective.  Exact throughout.
    """
    if solution.status is not SolveStatus.OPTIMAL:
        raise PreconditionError("certificate requires an Optimal solution")
    std = _standardize(model)
    rows = [std.rows[i] for i in solution.kept_rows]
    rhs = [std.rhs[i] for i in solution.kept_rows]
    basis = list(solution.basis_columns)
    m = len(rows)
    if len(basis) != m:
        return False
    cost = [_ZERO] * std.n_cols
    for v, c in model.objective.items():
        cost[model.var_index()[v]] = c

    # Solve u^T B = c_B via Gaussian elimination on B^T u = c_B.
    bt = [[_ZERO] * m for _ in range(m)]
    for r in range(m):
        for j, c in rows[r]:
            if j in solution.basis_columns:
                bt[basis.index(j)][r] = c
    target = [cost[b] for b in basis]
    u = _gauss_solve(bt, target)
    if u is None:
        return False
    # Dual feasibility: reduced cost of every column nonnegative.
    for j in range(std.n_cols):
        reduced = cost[j]
        for r in range(m):
            coef = next((c for col, c in rows[r] if col == j), _ZERO)
            if coef:
                reduced -= u[r] * coef
        if reduced < 0:
            return False
    strong = sum((u[r] * rhs[r] for r in range(m)), _ZERO)
    return strong == solution.objective


def _gauss_solve(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Solve a square exact system; None when singular."""
    n = len(matrix)
    aug = [list(matrix[i]) + [rhs[i]] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        prow = aug[col]
        inv = _ONE / prow[col]
        aug[col] = prow = [c * inv for c in prow]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [c - f * p for c, p in zip(aug[r], prow)]
    return [aug[i][-1] for i in range(n)]


def _bound_rows(model: MipModel, bounds: int | Mapping[VarRef, int]) -> list[LinearConstraint]:
    rows = []
    for v in model.variables:
        if v not in model.integer:
            continue
        if isinstance(bounds, int):
            ub = bounds
        else:
            if v not in bounds:
                raise MissingBoundError(f"no upper bound for integer variable {v.name}")
            ub = bounds[v]
        if not isinstance(ub, int) or ub < 0:
            raise MissingBoundError(f"bound for {v.name} must be a nonnegative integer: {ub!r}")
        rows.append(LinearConstraint(f"ub[{v.name}]", {v: _ONE}, "<=", Fraction(ub)))
    return rows


def solve_mip(model: MipModel, bounds: int | Mapping[VarRef, int]) -> MipResult:
    """Exact branch and bound over the model's integer variables.

    Every integer variable must come with a finite upper bound (a uniform
    int or a per-variable map); lower bounds are zero throughout.  Branching
    picks the first fractional integer variable in model order and explores
    the floor branch first; nodes are pruned when their LP bound cannot beat
    the incumbent, all by exact comparison.
    """
    if not model.integer:
        sol = solve_lp(model)
        return MipResult(sol.status, sol.values, sol.objective, nodes=1)
    base = model.with_constraints(_bound_rows(model, bounds))
    int_order = [v for v in base.variables if v in base.integer]
    incumbent: Mapping[VarRef, Fraction] | None = None
    incumbent_obj: Fraction | None = None
    nodes = 0
    stack: list[tuple[LinearConstraint, ...]] = [()]
    while stack:
        extra = stack.pop()
        nodes += 1
        sol = solve_lp(base.with_constraints(extra), ignore_integrality=True)
        if sol.status is SolveStatus.INFEASIBLE:
            continue
        if sol.status is SolveStatus.UNBOUNDED:
            # Integer variables are boxed, so the ray lives in continuous
            # variables and survives any further branching: the MIP is
            # unbounded iff it is feasible at all.
            probe = solve_mip(model.with_objective({}), bounds)
            if probe.status is SolveStatus.OPTIMAL:
                return MipResult(SolveStatus.UNBOUNDED, {}, None, nodes=nodes)
            return MipResult(SolveStatus.INFEASIBLE, {}, None, nodes=nodes)
        if incumbent_obj is not None and sol.objective >= incumbent_obj:
            continue
        frac = next(
            (v for v in int_order if sol.values.get(v, _ZERO).denominator != 1), None
        )
        if frac is None:
            incumbent = sol.values
            incumbent_obj = sol.objective
            continue
        value = sol.values.get(frac, _ZERO)
        floor = value.numerator // value.denominator
        up = LinearConstraint(f"br>=[{frac.name}]", {frac: _ONE}, ">=", Fraction(floor + 1))
        down = LinearConstraint(f"br<=[{frac.name}]", {frac: _ONE}, "<=", Fraction(floor))
        stack.append(extra + (up,))
        stack.append(extra + (down,))
    if incumbent is None:
        return MipResult(SolveStatus.INFEASIBLE, {}, None, nodes=nodes)
    return MipResult(SolveStatus.OPTIMAL, incumbent, incumbent_obj, nodes=nodes)


# -- feasibility of capacity vectors -----------------------------------------

def _as_cap_refs(
    model: MipModel, capacities: Mapping
) -> dict[VarRef, Fraction]:
    """Normalize a capacity assignment to VarRef keys and check it is total."""
    cap_vars = {v for v in model.variables if v.kind == "capacity"}
    fixed: dict[VarRef, Fraction] = {}
    for key, val in capacities.items():
        if isinstance(key, VarRef):
            ref = key
        else:
            facility, pair = key
            ref = next(
                (
                    v
                    for v in cap_vars
                    if v.facility == facility and (v.edge or v.arc) == tuple(pair)
                ),
                None,
            )
            if ref is None:
                raise PreconditionError(f"capacity key {key!r} matches no model variable")
        if ref not in cap_vars:
            raise PreconditionError(f"capacity key {ref.name} matches no model variable")
        if ref in fixed:
            raise PreconditionError(f"duplicate capacity key {ref.name}")
        fixed[ref] = Fraction(val)
    missing = cap_vars - set(fixed)
    if missing:
        names = sorted(v.name for v in missing)
        raise PreconditionError(f"capacity vector missing entries for {names!r}")
    return fixed


def feasible_with_capacity(model: MipModel, capacities: Mapping) -> bool:
    """Phase-1 feasibility of the flow system once capacities are pinned."""
    fixed = _as_cap_refs(model, capacities)
    res = fix_variables(model, fixed)
    if not res.consistent:
        return False
    return feasible(res.model)


def reduced_commodities(inst: Instance) -> tuple:
    """Commodity pairs carrying any traffic, closed under reversal.

    Dropping both directions of an all-zero pair never changes feasibility:
    a feasible reduced flow extends by zeros, and symmetry rows only couple
    a commodity with its reverse.
    """
    active = set()
    for (o, d), t in inst.traffic.items():
        if t > 0:
            active.add((o, d))
            active.add((d, o))
    return tuple(sorted(active))


def build_for_feasibility(
    inst: Instance,
    kind: ModelKind,
    *,
    symmetrize_flows: bool = False,
    commodities: Iterable | None = None,
) -> MipModel:
    """Build the smallest model equivalent to `kind` for feasibility checks.

    `commodities` widens (or replaces) the reduced commodity set; it must
    stay closed under reversal and cover all positive traffic.
    """
    ks = reduced_commodities(inst) if commodities is None else tuple(commodities)
    if kind is ModelKind.UNDIRECTED:
        model = build_undirected(inst, commodities=ks)
    elif kind is ModelKind.BIDIRECTED:
        model = build_bidirected(inst, commodities=ks)
    else:
        model = build_directed(inst, commodities=ks)
    if symmetrize_flows:
        model = add_flow_symmetry(model)
    return model


def accommodates(
    inst: Instance,
    kind: ModelKind,
    capacities: Mapping,
    *,
    symmetrize_flows: bool = False,
) -> bool:
    """True when the integer capacity vector can route the instance's traffic.

    `capacities` maps (facility index, edge-or-arc pair) or VarRef to the
    installed module count; it must cover the model's capacity variables
    exactly.  With `symmetrize_flows`, feasibility additionally requires a
    direction-symmetric routing (traffic must then be symmetric to stand a
    chance).
    """
    model = build_for_feasibility(inst, kind, symmetrize_flows=symmetrize_flows)
    return feasible_with_capacity(model, capacities)
