import itertools

from hypothesis import given, strategies as st

from adtsolve import lia


def brute(cons, lo=-8, hi=8):
    vars_ = sorted({v for c in cons for v, _ in c.coeffs})
    for vals in itertools.product(range(lo, hi + 1), repeat=len(vars_)):
        env = dict(zip(vars_, vals))
        if all(_holds(c, env) for c in cons):
            return env
    return None


def _holds(c, env):
    total = c.const + sum(a * env.get(v, 0) for v, a in c.coeffs)
    return total <= 0 if c.op == "le" else total == 0


def test_equality_conflict():
    assert lia.solve([lia.con("eq", {"t": 1}, -1),
                      lia.con("eq", {"t": 1}, -3)]) is None


def test_parity_conflict():
    # 2x = 2y + 1 has no integer solution
    assert lia.solve([lia.con("eq", {"x": 2, "y": -2}, -1)]) is None


def test_parity_via_two_equations():
    # y = 2k and y = 2j + 1
    cons = [lia.con("eq", {"y": 1, "k": -2}, 0),
            lia.con("eq", {"y": 1, "j": -2}, -1)]
    assert lia.solve(cons) is None


def test_gcd_tightening():
    # 1 <= 2x <= 1 forces the impossible x = 1/2
    assert lia.solve([lia.con("le", {"x": 2}, -1),
                      lia.con("le", {"x": -2}, 1)]) is None


def test_no_unit_coefficient_equality():
    model = lia.solve([lia.con("eq", {"x": 3, "y": 5}, -7)])
    assert model is not None
    assert 3 * model["x"] + 5 * model["y"] == 7


def test_difference_system():
    cons = [lia.con("le", {"x": 1, "y": -1}, 1),   # x <= y - 1
            lia.con("le", {"y": 1, "z": -1}, 1),   # y <= z - 1
            lia.con("le", {"z": 1}, -10),          # z <= 10
            lia.con("le", {"x": -1}, 5)]           # x >= 5
    model = lia.solve(cons)
    assert model is not None
    assert model["x"] < model["y"] < model["z"] <= 10
    assert model["x"] >= 5


def test_difference_cycle_infeasible():
    cons = [lia.con("le", {"x": 1, "y": -1}, 1),
            lia.con("le", {"y": 1, "x": -1}, 1)]
    assert lia.solve(cons) is None


@st.composite
def systems(draw):
    nv = draw(st.integers(1, 3))
    vs = [f"v{i}" for i in range(nv)]
    cons = []
    for _ in range(draw(st.integers(1, 4))):
        coeffs = {v: draw(st.integers(-3, 3)) for v in vs}
        op = draw(st.sampled_from(["le", "eq"]))
        cons.append(lia.con(op, coeffs, draw(st.integers(-6, 6))))
    return cons


@given(systems())
def test_against_brute_force(cons):
    got = lia.solve(cons)
    reference = brute(cons)
    if reference is not None:
        assert got is not None, (cons, reference)
    if got is not None:
        assert all(_holds(c, got) for c in cons), (cons, got)
