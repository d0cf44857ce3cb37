"""Exact LP/MIP solving: pinned optima, certificates, statuses."""

import random
from fractions import Fraction

import pytest

from netcap.core import FacilityMenu, Instance, Network, TrafficMatrix
from netcap.errors import MissingBoundError, PreconditionError
from netcap.formulate import (
    LinearConstraint,
    MipModel,
    ModelKind,
    VarRef,
    build_bidirected,
    build_directed,
    build_undirected,
)
from netcap.randgen import four_node_corollary_instance, triangle_corollary_instance
from netcap.solver import (
    SolveStatus,
    accommodates,
    build_for_feasibility,
    feasible,
    feasible_with_capacity,
    optimality_certificate,
    reduced_commodities,
    solve_lp,
    solve_mip,
)
from netcap.projlab import capacity_bound


def _two_node(menu=(1,), t12=Fraction(1), t21=Fraction(0)):
    net = Network(("1", "2"), (("1", "2"),))
    return Instance(net, FacilityMenu(menu), TrafficMatrix({("1", "2"): t12, ("2", "1"): t21}))


def test_pinned_optima_across_kinds():
    one_way = _two_node(t12=Fraction(1))
    both_ways = _two_node(t12=Fraction(1), t21=Fraction(1))

    assert solve_mip(build_undirected(one_way), 4).objective == 1
    # the summed-direction bound pays for each direction separately
    assert solve_mip(build_undirected(both_ways), 4).objective == 2
    # the per-direction bound pays once
    assert solve_mip(build_bidirected(both_ways), 4).objective == 1

    res = solve_mip(build_directed(one_way), 4)
    assert res.objective == 1
    assert res.values.get(VarRef.cap_arc(1, ("1", "2"))) == 1
    assert res.values.get(VarRef.cap_arc(1, ("2", "1")), Fraction(0)) == 0


def test_fractional_relaxation_value():
    inst = _two_node(t12=Fraction(3, 2))
    sol = solve_lp(build_undirected(inst), ignore_integrality=True)
    assert sol.status is SolveStatus.OPTIMAL
    assert sol.objective == Fraction(3, 2)
    mip = solve_mip(build_undirected(inst), 4)
    assert mip.objective == 2  # rounding up to whole modules


def test_solve_lp_rejects_integer_models():
    inst = _two_node()
    with pytest.raises(PreconditionError):
        solve_lp(build_undirected(inst))


def test_mip_returns_feasible_integral_points():
    rng = random.Random(7)
    for trial in range(8):
        inst = (
            triangle_corollary_instance(rng)
            if trial % 2
            else four_node_corollary_instance(rng)
        )
        model = build_undirected(inst)
        res = solve_mip(model, capacity_bound(inst))
        assert res.status is SolveStatus.OPTIMAL
        assert res.nodes >= 1
        assert model.violations(res.values) == []
        for v in model.integer:
            assert res.values.get(v, Fraction(0)).denominator == 1


def test_optimality_certificate_sweep():
    """Every Optimal LP answer must carry a verifiable dual certificate."""
    rng = random.Random(41)
    for trial in range(10):
        inst = (
            triangle_corollary_instance(rng)
            if trial % 2
            else four_node_corollary_instance(rng)
        )
        for build in (build_undirected, build_bidirected, build_directed):
            model = build(inst)
            sol = solve_lp(model, ignore_integrality=True)
            assert sol.status is SolveStatus.OPTIMAL
            assert optimality_certificate(model, sol)


def test_certificate_requires_optimal():
    inst = _two_node()
    model = build_undirected(inst)
    sol = solve_lp(model, ignore_integrality=True)
    from netcap.solver import LpSolution

    fake = LpSolution(SolveStatus.INFEASIBLE, {}, None)
    with pytest.raises(PreconditionError):
        optimality_certificate(model, fake)
    assert sol.status is SolveStatus.OPTIMAL


def test_infeasible_statuses():
    # no path from 1 to 3: balance rows cannot hold
    net = Network(("1", "2", "3"), (("1", "2"),))
    inst = Instance(net, FacilityMenu((1,)), TrafficMatrix({("1", "3"): 1}))
    model = build_undirected(inst)
    assert not feasible(model)
    assert solve_mip(model, 5).status is SolveStatus.INFEASIBLE

    # positive traffic under a zero capacity budget
    tight = _two_node(t12=Fraction(1))
    assert solve_mip(build_undirected(tight), 0).status is SolveStatus.INFEASIBLE


def _free_variable_model(extra_rows=()):
    x = VarRef.flow(("1", "2"), ("1", "2"))
    y = VarRef.cap_edge(1, ("1", "2"))
    return MipModel(
        kind=ModelKind.UNDIRECTED,
        variables=(x, y),
        integer=frozenset({y}),
        constraints=tuple(extra_rows),
        objective={x: Fraction(-1)},
    ), x, y


def test_unbounded_statuses():
    model, _, y = _free_variable_model()
    assert solve_lp(model, ignore_integrality=True).status is SolveStatus.UNBOUNDED
    assert solve_mip(model, 3).status is SolveStatus.UNBOUNDED

    # same ray, but the integer part is contradictory: infeasible wins
    dead_row = LinearConstraint("dead", {y: Fraction(1)}, "<=", Fraction(-1))
    contradictory, _, _ = _free_variable_model((dead_row,))
    assert solve_mip(contradictory, 3).status is SolveStatus.INFEASIBLE


def test_bound_validation():
    inst = _two_node()
    model = build_undirected(inst)
    y = VarRef.cap_edge(1, ("1", "2"))
    assert solve_mip(model, {y: 2}).status is SolveStatus.OPTIMAL
    with pytest.raises(MissingBoundError):
        solve_mip(model, {})
    with pytest.raises(MissingBoundError):
        solve_mip(model, {y: -1})
    with pytest.raises(MissingBoundError):
        solve_mip(model, {y: Fraction(2)})


def test_capacity_vector_lookup_errors():
    inst = _two_node()
    model = build_undirected(inst)
    e = ("1", "2")
    assert feasible_with_capacity(model, {(1, e): 1})
    with pytest.raises(PreconditionError):
        feasible_with_capacity(model, {(2, e): 1})  # unknown facility
    with pytest.raises(PreconditionError):
        feasible_with_capacity(model, {})  # missing entries
    with pytest.raises(PreconditionError):
        feasible_with_capacity(
            model, {(1, e): 1, VarRef.cap_edge(1, e): 1}  # duplicate key
        )


def test_accommodates_pinned():
    inst = _two_node(t12=Fraction(1), t21=Fraction(1))
    e = ("1", "2")
    assert not accommodates(inst, ModelKind.UNDIRECTED, {(1, e): 1})
    assert accommodates(inst, ModelKind.UNDIRECTED, {(1, e): 2})
    assert accommodates(inst, ModelKind.BIDIRECTED, {(1, e): 1})
    assert accommodates(
        inst, ModelKind.DIRECTED, {(1, ("1", "2")): 1, (1, ("2", "1")): 1}
    )
    assert not accommodates(
        inst, ModelKind.DIRECTED, {(1, ("1", "2")): 2, (1, ("2", "1")): 0}
    )


def test_symmetrized_flows_need_symmetric_traffic():
    lopsided = _two_node(t12=Fraction(1), t21=Fraction(0))
    e = ("1", "2")
    assert not accommodates(
        lopsided, ModelKind.UNDIRECTED, {(1, e): 5}, symmetrize_flows=True
    )
    balanced = _two_node(t12=Fraction(1), t21=Fraction(1))
    assert accommodates(
        balanced, ModelKind.UNDIRECTED, {(1, e): 2}, symmetrize_flows=True
    )


def test_reduced_commodities():
    net = Network(("1", "2", "3"), (("1", "2"), ("1", "3"), ("2", "3")))
    inst = Instance(net, FacilityMenu((1,)), TrafficMatrix({("1", "2"): Fraction(1, 2)}))
    assert reduced_commodities(inst) == (("1", "2"), ("2", "1"))
    empty = Instance(net, FacilityMenu((1,)), TrafficMatrix({}))
    assert reduced_commodities(empty) == ()


def test_build_for_feasibility_matches_full_model():
    """Feasibility over the reduced commodity set agrees with the full set."""
    rng = random.Random(13)
    for _ in range(4):
        inst = triangle_corollary_instance(rng)
        small = build_for_feasibility(inst, ModelKind.UNDIRECTED)
        full = build_undirected(inst)
        e_vars = [v for v in full.variables if v.kind == "capacity"]
        for _ in range(6):
            vec = {v: rng.randint(0, 2) for v in e_vars}
            assert feasible_with_capacity(small, vec) == feasible_with_capacity(full, vec)
