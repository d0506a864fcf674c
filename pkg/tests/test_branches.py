import pytest
from mpmath import mp, mpf

from giet.branches import (
    AffineBranch,
    CircleDiffeo,
    ComposedBranch,
    MoebiusBranch,
    PerturbedAffineBranch,
    SandwichBranch,
    compose,
)
from giet.errors import GietError

H = mpf("1e-30")


def fd(branch, x):
    return (branch(x + H) - branch(x - H)) / (2 * H)


def fd2(branch, x):
    return (branch.deriv(x + H) - branch.deriv(x - H)) / (2 * H)


def test_affine_branch():
    b = AffineBranch.from_intervals(0, mpf(1) / 3, mpf("0.25"), mpf("0.75"))
    assert b(0) == mpf("0.25")
    assert b(mpf(1) / 3) == mpf("0.75")
    assert b.deriv(0) == mpf("1.5")
    assert b.deriv2(mpf("0.1")) == 0
    assert b.invert(mpf("0.5")) == b.invert(b(mpf(1) / 6))
    assert abs(b.log_deriv(mpf("0.2")) - mp.log(mpf("1.5"))) < mpf("1e-70")
    mo = b.as_moebius()
    assert abs(mo(mpf("0.2")) - b(mpf("0.2"))) < mpf("1e-75")


def test_moebius_branch_calculus():
    mo = MoebiusBranch(((2, 1), (1, 3)))
    x = mpf("0.37")
    assert abs(fd(mo, x) - mo.deriv(x)) < mpf("1e-45")
    assert abs(fd2(mo, x) - mo.deriv2(x)) < mpf("1e-45")
    assert abs(mo.invert(mo(x)) - x) < mpf("1e-75")
    inner = MoebiusBranch(((1, 1), (0, 2)))
    both = mo.compose_with(inner)
    assert isinstance(both, MoebiusBranch)
    assert abs(both(x) - mo(inner(x))) < mpf("1e-75")


def test_perturbed_affine_branch():
    b = PerturbedAffineBranch(0, "1/2", 0, "1/2", "1e-3", beta=-2)
    x = mpf("0.185")
    assert b(mpf(0)) == 0
    assert b(mpf(1) / 2) == mpf(1) / 2
    assert abs(fd(b, x) - b.deriv(x)) < mpf("1e-45")
    assert abs(fd2(b, x) - b.deriv2(x)) < mpf("1e-45")
    assert abs(b.invert(b(x)) - x) < mpf("1e-70")
    # beta = -2 balances the bump: equal log-slopes at both endpoints,
    # hence zero nonlinearity integral for this branch
    assert b.log_deriv(mpf(1) / 2) == b.log_deriv(mpf(0))
    plain = PerturbedAffineBranch(0, "1/2", 0, "1/2", "1e-3", beta=1)
    assert plain.log_deriv(mpf(1) / 2) != plain.log_deriv(mpf(0))


def test_circle_diffeo():
    cd = CircleDiffeo([(1, "0.05", "0.3"), (2, "0.01", "0.9")])
    x = mpf("0.37")
    assert cd(mpf(0)) == 0
    assert cd(mpf(1)) == 1
    assert abs(fd(cd, x) - cd.deriv(x)) < mpf("1e-45")
    assert abs(fd2(cd, x) - cd.deriv2(x)) < mpf("1e-45")
    assert abs(cd.invert(cd(x)) - x) < mpf("1e-70")
    v, dv = cd.value_deriv(x)
    assert v == cd(x) and dv == cd.deriv(x)


def test_circle_diffeo_amplitude_budget():
    with pytest.raises(GietError):
        CircleDiffeo([(1, "0.7", "0"), (2, "0.31", "0")])
    CircleDiffeo([(1, "0.7", "0"), (2, "0.29", "0")])  # inside the budget


def test_sandwich_branch_is_conjugation():
    cd = CircleDiffeo([(1, "0.05", "0.3")])
    core = PerturbedAffineBranch(0, "1/2", 0, "1/2", "1e-3", beta=-2)
    sw = SandwichBranch(cd, core)
    x = mpf("0.11")
    assert abs(sw(x) - cd(core(cd.invert(x)))) < mpf("1e-74")
    assert abs(fd(sw, x) - sw.deriv(x)) < mpf("1e-45")
    assert abs(fd2(sw, x) - sw.deriv2(x)) < mpf("1e-45")
    assert abs(sw.invert(sw(x)) - x) < mpf("1e-70")


def test_compose_dispatch():
    aff1 = AffineBranch.from_intervals(0, "1/3", "1/4", "3/4")
    aff2 = AffineBranch(mpf("0.5"), mpf("0.1"))
    mo = MoebiusBranch(((2, 1), (1, 3)))
    cd = CircleDiffeo([(1, "0.05", "0.3")])
    core = AffineBranch(mpf("0.9"), mpf("0.01"))

    assert isinstance(compose(aff1, aff2), AffineBranch)
    assert isinstance(compose(mo, aff1), MoebiusBranch)
    assert isinstance(compose(aff1, mo), MoebiusBranch)
    sw1 = SandwichBranch(cd, core)
    sw2 = SandwichBranch(cd, aff2)
    collapsed = compose(sw1, sw2)
    assert isinstance(collapsed, SandwichBranch)
    assert collapsed.outer is cd
    generic = compose(cd, aff1)
    assert isinstance(generic, ComposedBranch)

    x = mpf("0.21")
    for b, direct in [
        (compose(aff1, aff2), lambda t: aff1(aff2(t))),
        (compose(mo, aff1), lambda t: mo(aff1(t))),
        (collapsed, lambda t: sw1(sw2(t))),
        (generic, lambda t: cd(aff1(t))),
    ]:
        assert abs(b(x) - direct(x)) < mpf("1e-70")


def test_composed_branch_chain_rule():
    cd = CircleDiffeo([(1, "0.05", "0.3")])
    aff = AffineBranch.from_intervals(0, "1/3", "1/4", "3/4")
    tree = ComposedBranch(cd, aff)
    x = mpf("0.21")
    assert abs(fd(tree, x) - tree.deriv(x)) < mpf("1e-45")
    assert abs(fd2(tree, x) - tree.deriv2(x)) < mpf("1e-45")
    assert abs(tree.log_deriv(x) - mp.log(tree.deriv(x))) < mpf("1e-70")
    assert abs(tree.invert(tree(x)) - x) < mpf("1e-70")
