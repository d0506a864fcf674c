"""Conjugacy diagnostics on the smooth pair: matched endpoint tables, the
psi ladder against literal Birkhoff sums, boundary-derivative estimates,
and the full theorem battery."""

import pytest
from mpmath import mp, mpf

from giet.builtin_maps import (
    GOLDEN_PI,
    _h1,
    _h2,
    golden_iet,
    steady_conjugate,
)
from giet.errors import CombinatoricsMismatch, GietError, PrecisionExhausted
from giet.giem import build_giem, renormalize
from giet.rigidity import (
    build_conjugacy,
    c8_estimate,
    dh_check,
    distortion_ratios,
    entry_time,
    match_sequences,
    matched_points,
    psi_naive,
    psi_series,
    theorem_checks,
)


@pytest.fixture(scope="module")
def table20(brisk_histories):
    hf, hg = brisk_histories
    old = mp.prec
    mp.prec = 256
    try:
        return matched_points(hf, hg, 20)
    finally:
        mp.prec = old


def _mid_pair(table):
    xs = [p for p in table.pairs if mpf("0.3") < p[0] < mpf("0.7")]
    return xs[len(xs) // 2]


def _gap_midpoint(table):
    i = len(table.pairs) // 2
    return (table.pairs[i][0] + table.pairs[i + 1][0]) / 2


def test_match_sequences(brisk_histories):
    hf, hg = brisk_histories
    assert match_sequences(hf, hg) == 100
    assert match_sequences(hf, hg, 30) == 30


def test_mismatch_names_the_step(brisk_histories):
    hf, _ = brisk_histories
    hs = renormalize(steady_conjugate(), 10)
    with pytest.raises(CombinatoricsMismatch, match="step 1") as exc:
        match_sequences(hf, hs)
    assert exc.value.step == 1


def test_matched_points_table(table20):
    assert table20.level == 20
    assert len(table20.pairs) == 1155
    assert table20.pairs[0] == (0, 0)
    assert table20.pairs[-1] == (1, 1)
    for (a, ga), (b, gb) in zip(table20.pairs, table20.pairs[1:]):
        assert a < b and ga < gb


def test_refinement_agrees_on_common_points(brisk_histories, table20):
    hf, hg = brisk_histories
    t25 = matched_points(hf, hg, 25)
    assert len(t25.pairs) == 4757
    d20, d25 = dict(table20.pairs), dict(t25.pairs)
    common = set(d20) & set(d25)
    # deeper floors subdivide the old ones, so only endpoints that are
    # also level-25 floor corners survive; on those the images must agree
    assert len(common) == 240
    assert all(d20[x] == d25[x] for x in common)


def test_pairs_match_closed_form_conjugacy(table20):
    # the pair is built by conjugating one seed with two circle
    # diffeomorphisms, so h = h2 o h1^{-1} is available in closed form
    h1, h2 = _h1(), _h2()
    worst = max(abs(y - h2.value(h1.invert(x))) for x, y in table20.pairs[::37])
    assert worst < mpf(10) ** -70


def test_enclosure(brisk_histories, table20):
    x, y = _mid_pair(table20)
    (a, b), (ga, gb) = table20.enclosure(x)
    assert a == b == x and ga == gb == y
    assert table20.value(x) == y

    xg = _gap_midpoint(table20)
    (a, b), (ga, gb) = table20.enclosure(xg)
    assert a < xg < b and ga < gb
    assert ga < table20.value(xg) < gb

    grid = [mpf(k) / 17 for k in range(1, 17)]
    values = [table20.value(t) for t in grid]
    assert all(u <= v for u, v in zip(values, values[1:]))

    hf, hg = brisk_histories
    t5 = matched_points(hf, hg, 5)
    gap = lambda t: max(gb - ga for (_, ga), (_, gb) in zip(t.pairs, t.pairs[1:]))
    assert gap(table20) < gap(t5) / 10

    with pytest.raises(GietError):
        table20.enclosure(mpf("1.5"))


def test_psi_ladder(brisk_maps, brisk_histories, table20):
    f, g = brisk_maps
    hf, hg = brisk_histories
    x, y = _mid_pair(table20)

    ps = psi_series(hf, hg, x, image=y, depth=20)
    assert not ps.aborted
    levels = [lvl for lvl, _ in ps.increments()]
    assert levels == sorted(levels)
    assert ps.value == ps.partials[-1]

    i, yy = entry_time(f, x, hf[20])
    assert i == ps.entry_times[-1]
    assert yy < hf[20].interval_length
    assert entry_time(f, yy, hf[20]) == (0, yy)
    assert entry_time(f, f.apply(x), hf[20])[0] == i - 1

    # the ladder telescopes the literal Birkhoff sum over the entry orbit
    direct = psi_naive(f, g, x, y, i)
    assert abs(ps.value - direct) < mpf(10) ** -70

    # a zero-width enclosure from the table reproduces the exact-image run
    encl = psi_series(hf, hg, x, conjugacy=table20, depth=20)
    assert not encl.aborted
    assert abs(encl.value - ps.value) < mpf(10) ** -75


def test_psi_guard_and_straddle(brisk_histories, table20):
    hf, hg = brisk_histories
    xg = _gap_midpoint(table20)

    # a coarse enclosure trips the derivative-variation guard early
    ps = psi_series(hf, hg, xg, conjugacy=table20, depth=40)
    assert ps.aborted and ps.abort_level <= 5

    # with the guard disabled the enclosure survives until it straddles a
    # level boundary, which is a precision failure, not a hypothesis one
    with pytest.raises(PrecisionExhausted) as exc:
        psi_series(hf, hg, xg, conjugacy=table20, depth=40, guard=mpf("inf"))
    assert exc.value.safe_depth > 10

    with pytest.raises(GietError):
        psi_series(hf, hg, xg, depth=10)
    with pytest.raises(GietError):
        psi_series(hf, hg, mpf("1.5"), image=mpf("0.5"), depth=10)


def test_boundary_derivative_estimate(brisk_histories):
    hf, hg = brisk_histories
    c8 = c8_estimate(hf, hg, level=48)
    assert c8.level == 48
    assert sorted(c8.per_letter) == ["A", "B", "C"]
    assert c8.spread < mpf(10) ** -6
    closed = _h2().deriv(mpf(0)) / _h1().deriv(mpf(0))
    assert abs(c8.value - closed) < mpf(10) ** -6


def test_dh_check(brisk_histories):
    hf, hg = brisk_histories
    dh = dh_check(hf, hg, samples=50, table_level=25)
    assert len(dh.rows) == 50
    assert max(rel for _, _, _, rel in dh.rows) < mpf(10) ** -2


def test_distortion_ratios(brisk_histories, golden_history):
    # piecewise-affine data has constant branch derivatives at every level
    flat = distortion_ratios(golden_history[5], grid=9)
    assert all(abs(v - 1) < mpf(10) ** -70 for v in flat.values())

    hf, _ = brisk_histories
    bent = distortion_ratios(hf[0], grid=33)
    assert set(bent) == {"A", "B", "C"}
    assert all(v > mpf("1.01") for v in bent.values())


def test_build_conjugacy_caps_table_size(brisk_histories):
    hf, hg = brisk_histories
    conj = build_conjugacy(hf, hg)
    assert conj.level == 25
    assert len(conj.pairs) == 4757

    shallow = build_conjugacy(hf, hg, depth=10)
    assert shallow.level == 10

    small = build_conjugacy(hf, hg, max_points=1200)
    assert small.level < 25
    assert len(small.pairs) <= 1200


def test_theorem_battery_on_conjugate_pair(brisk_maps, brisk_histories):
    f, g = brisk_maps
    hf, hg = brisk_histories
    rep = theorem_checks(f, g, history_f=hf, history_g=hg)
    assert rep.ok
    assert rep.notes == ()
    assert rep.mismatch_step is None
    assert rep.matched_depth == 100
    assert rep.model_length_gap < mpf(10) ** -8
    assert rep.model_slope_gap < mpf(10) ** -8
    assert rep.c2_fit.stretched.rate <= 0.9
    assert rep.psi_fit.plain.rate <= 0.9
    assert rep.c8.spread < mpf(10) ** -6
    assert max(rel for _, _, _, rel in rep.dh.rows) < mpf(10) ** -2


def test_theorem_battery_on_divergent_pair():
    lam = mp.sqrt(2) - 1
    lengths = {"A": lam, "B": 1 - lam}
    spec = {"A": {"family": "affine"}, "B": {"family": "affine"}}
    other = build_giem(GOLDEN_PI, lengths, dict(lengths), spec)
    rep = theorem_checks(golden_iet(), other, depth=12)
    assert not rep.ok
    assert rep.mismatch_step == 3
    assert rep.matched_depth == 2
    assert "split at step 3" in rep.notes[0]
