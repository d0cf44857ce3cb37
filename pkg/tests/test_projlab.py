"""Capacity projections: bounds, minimal sets, triangle closed form."""

import random
from fractions import Fraction

import pytest

from netcap.core import (
    FacilityMenu,
    Instance,
    Network,
    TrafficMatrix,
    symmetric_counterpart,
)
from netcap.errors import NoRoutingError, PreconditionError
from netcap.formulate import ModelKind
from netcap.projlab import (
    CapacityVector,
    ProjectionSet,
    capacity_bound,
    project,
    triangle_bidirected_projection,
    verify_corollary,
    verify_triangle_remark,
)
from netcap.randgen import (
    TRIANGLE_NODES,
    pair_preserving_target,
    triangle_corollary_instance,
    triangle_network,
)
from netcap.solver import accommodates

_TRI_TRAFFIC = TrafficMatrix(
    {("1", "2"): Fraction(3, 2), ("2", "1"): Fraction(1, 2), ("1", "3"): Fraction(1)}
)


def _tri_instance(traffic=_TRI_TRAFFIC, menu=(1,)):
    return Instance(triangle_network(), FacilityMenu(menu), traffic)


def test_capacity_bound():
    assert capacity_bound(_tri_instance()) == 3
    assert capacity_bound(_tri_instance(menu=(2, 5))) == 2
    assert capacity_bound(_tri_instance(TrafficMatrix({}))) == 0

    stranded = Instance(
        Network(("1", "2", "3"), (("1", "2"),)),
        FacilityMenu((1,)),
        TrafficMatrix({("1", "3"): Fraction(1)}),
    )
    with pytest.raises(NoRoutingError):
        capacity_bound(stranded)


def test_capacity_vector_semantics():
    vec = CapacityVector.from_mapping({(1, ("1", "2")): 2, (1, ("1", "3")): 0})
    assert vec.get((1, ("1", "2"))) == 2
    assert vec.get((1, ("2", "3"))) == 0
    assert vec.as_dict() == {(1, ("1", "2")): 2, (1, ("1", "3")): 0}
    bigger = CapacityVector.from_mapping({(1, ("1", "2")): 2, (1, ("1", "3")): 1})
    assert bigger.dominates(vec)
    assert not vec.dominates(bigger)
    assert vec.render() == "1|1-2=2 1|1-3=0"
    assert vec.render(directed=True) == "1|1>2=2 1|1>3=0"
    with pytest.raises(PreconditionError):
        CapacityVector.from_mapping({(1, ("1", "2")): -1})
    with pytest.raises(PreconditionError):
        CapacityVector.from_mapping({(1, ("1", "2")): Fraction(1)})


def test_projection_set_membership_is_upward_closure():
    proj = ProjectionSet(
        components=((1, ("1", "2")), (1, ("1", "3"))),
        bound=3,
        minimal=frozenset({(1, 2), (2, 0)}),
    )
    assert proj.member((1, 2))
    assert proj.member((3, 3))
    assert proj.member((2, 1))
    assert not proj.member((1, 1))
    assert not proj.member((0, 3))
    assert proj.member({(1, ("1", "2")): 2, (1, ("1", "3")): 0})
    with pytest.raises(PreconditionError):
        proj.member((1, 2, 3))


def test_pinned_triangle_projection():
    proj = project(_tri_instance(), ModelKind.UNDIRECTED)
    assert proj.bound == 3
    assert proj.components == ((1, ("1", "2")), (1, ("1", "3")), (1, ("2", "3")))
    assert proj.minimal == {(2, 1, 0), (1, 2, 1), (3, 0, 1), (0, 3, 2)}
    rendered = [v.render() for v in proj.minimal_vectors()]
    assert rendered[0] == "1|1-2=2 1|1-3=1 1|2-3=0"


def test_projection_membership_matches_direct_feasibility():
    """Sampled box vectors must agree with a from-scratch model solve."""
    rng = random.Random(61)
    inst = _tri_instance()
    proj = project(inst, ModelKind.UNDIRECTED)
    for _ in range(25):
        vec = tuple(rng.randint(0, 3) for _ in proj.components)
        direct = accommodates(
            inst,
            ModelKind.UNDIRECTED,
            {c: n for c, n in zip(proj.components, vec)},
        )
        assert proj.member(vec) == direct


def test_project_variant_validation():
    inst = _tri_instance()
    with pytest.raises(PreconditionError):
        project(inst, ModelKind.UNDIRECTED, variant="sideways")
    with pytest.raises(PreconditionError):
        project(inst, ModelKind.UNDIRECTED, variant="equalized")
    eq = project(inst, ModelKind.DIRECTED, variant="equalized", bound=2)
    assert len(eq.components) == 6  # one per arc


def test_rerouting_preserves_the_projection():
    """Pairwise-similar traffic matrices have identical undirected projections."""
    rng = random.Random(67)
    for _ in range(3):
        inst = triangle_corollary_instance(rng)
        target = pair_preserving_target(rng, inst.traffic)
        base = project(inst, ModelKind.UNDIRECTED)
        moved = project(inst.with_traffic(target), ModelKind.UNDIRECTED, bound=base.bound)
        assert base.minimal == moved.minimal


def test_verify_corollary_on_random_triangle():
    rng = random.Random(71)
    inst = triangle_corollary_instance(rng)
    report = verify_corollary(inst)
    assert report.equal
    assert report.mismatches() == []
    assert "projections identical" in report.describe()
    labels = [label for label, _ in report.entries]
    assert labels == [
        "undirected/original",
        "undirected/averaged",
        "undirected/averaged/mirror-flows",
        "bidirected/doubled-averaged",
        "bidirected/doubled-averaged/mirror-flows",
    ]


def test_triangle_closed_form_pinned():
    form = triangle_bidirected_projection(_TRI_TRAFFIC)
    assert form.nodes == ("1", "2", "3")
    assert dict(form.node_requirements) == {"1": 3, "2": 2, "3": 1}
    assert form.theta == Fraction(5, 2)
    assert form.total_requirement == 3

    assert form.member({("1", "2"): 2, ("1", "3"): 1, ("2", "3"): 0})
    assert not form.member({("1", "2"): 1, ("1", "3"): 1, ("2", "3"): 1})  # node 1 short
    with pytest.raises(PreconditionError):
        form.member({("1", "9"): 1})


def test_triangle_relay_bound_can_exceed_node_requirements():
    traffic = TrafficMatrix(
        {("1", "2"): Fraction(2), ("1", "3"): Fraction(2), ("2", "3"): Fraction(2)}
    )
    form = triangle_bidirected_projection(traffic)
    assert dict(form.node_requirements) == {"1": 4, "2": 2, "3": 4}
    assert form.theta == 6
    assert form.total_requirement == 6
    # (1, 3, 1) meets every node requirement but totals only five
    assert not form.member({("1", "2"): 1, ("1", "3"): 3, ("2", "3"): 1})
    assert form.member({("1", "2"): 2, ("1", "3"): 3, ("2", "3"): 1})


def test_triangle_form_node_handling():
    with pytest.raises(PreconditionError):
        triangle_bidirected_projection(TrafficMatrix({("1", "2"): Fraction(1)}))
    form = triangle_bidirected_projection(
        TrafficMatrix({("1", "2"): Fraction(1)}), nodes=("3", "1", "2")
    )
    assert form.nodes == ("1", "2", "3")
    with pytest.raises(PreconditionError):
        triangle_bidirected_projection(
            TrafficMatrix({("1", "9"): Fraction(1)}), nodes=TRIANGLE_NODES
        )


def test_verify_triangle_remark_pinned():
    report = verify_triangle_remark(_TRI_TRAFFIC, 3)
    assert report.passed
    assert report.points == 64
    assert report.mismatches == ()
    assert report.ceiling_ok and report.halves_equal
    assert "closed form agrees" in report.describe()


def test_symmetric_counterpart_shares_triangle_bound():
    form = triangle_bidirected_projection(symmetric_counterpart(_TRI_TRAFFIC))
    assert form.total_requirement >= form.theta
