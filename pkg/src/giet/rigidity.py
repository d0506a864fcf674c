"""Smooth-conjugacy diagnostics for pairs of renormalizable interval maps.

Two maps with the same renormalization itinerary share a combinatorial
model: the floors of their level-n towers correspond one to one, and the
correspondence extends to a candidate conjugacy h on tower endpoints.
This module builds that matching and measures how close h is to being C1:

* ``matched_points`` / ``build_conjugacy``: order-preserving endpoint table
  at a chosen depth, with enclosures for arbitrary points.
* ``psi_series``: the cohomological sum psi(x) evaluated by a level ladder
  (one branch application per level hop instead of a long Birkhoff sum).
* ``c8_estimate``: the common limit of per-letter length ratios, i.e. the
  boundary derivative Dh(0).
* ``dh_check``: finite-difference slopes of h against C8 * exp(psi).
* ``theorem_checks``: one bundle running the whole battery without raising
  on hypothesis failures.

Derivative convention: with h o f = g o h and h increasing,

    ln Dh(x) = ln C8 + psi(x),
    psi(x)   = lim_n  sum_{i < i_n} [ ln Df(f^i x) - ln Dg(h(f^i x)) ],

where i_n is the first-entry time of x into the level-n interval.  The
ladder exploits that a point of I^n \\ I^{n+1} reaches I^{n+1} by a single
application of the level-n branch of the top-last letter.
"""

from dataclasses import dataclass

from mpmath import mp, mpf

from ._num import to_mpf
from .errors import (
    CombinatoricsMismatch,
    GietError,
    HypothesisError,
    PrecisionExhausted,
)
from .rates import rate_fit


def match_sequences(hist_f, hist_g, depth=None):
    """Depth through which the two histories take identical moves.

    Raises CombinatoricsMismatch (with .step set) at the first level where
    type or winner differ.  `depth` caps the comparison; default is the
    deepest level both histories reach.
    """
    if hist_f[0].pi != hist_g[0].pi:
        raise CombinatoricsMismatch("maps start at different permutation data", step=0)
    limit = min(len(hist_f), len(hist_g)) - 1
    if depth is not None:
        limit = min(limit, depth)
    for n in range(1, limit + 1):
        sf, sg = hist_f[n].last_step, hist_g[n].last_step
        if sf.eps != sg.eps or sf.winner != sg.winner:
            raise CombinatoricsMismatch(
                f"renormalization paths split at step {n}: "
                f"type {sf.eps}/{sg.eps}, winner {sf.winner}/{sg.winner}",
                step=n,
            )
    return limit


def entry_time(f, x, state):
    """First-entry time of x into the level interval of `state`, literally.

    Iterates the base map until the orbit drops below the level length; the
    bound max(q) + 1 is a theorem, so exceeding it means broken data.
    Returns (i, f^i(x)).
    """
    L = state.interval_length
    cap = max(state.q.values()) + 1
    y, i = to_mpf(x), 0
    while y >= L:
        y = f.apply(y)
        i += 1
        if i > cap:
            raise GietError(f"no entry into level {state.level} within {cap} steps")
    return i, y


@dataclass(frozen=True)
class MatchedPoints:
    """Tower-floor endpoints of two maps, paired by combinatorial address.

    `pairs` is sorted by the first coordinate and strictly increasing in
    both; it starts at (0, 0) and ends at (1, 1).  Consecutive pairs bound
    corresponding floors, so for x between pairs[i][0] and pairs[i+1][0]
    the conjugacy image h(x) lies between pairs[i][1] and pairs[i+1][1].
    """

    level: int
    pairs: tuple
    addresses: tuple

    def enclosure(self, x):
        """((xf_lo, xf_hi), (xg_lo, xg_hi)) bracketing x and h(x)."""
        x = to_mpf(x)
        if x < 0 or x > 1:
            raise GietError("point outside the unit interval")
        lo, hi = 0, len(self.pairs) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.pairs[mid][0] <= x:
                lo = mid
            else:
                hi = mid
        (a, ga), (b, gb) = self.pairs[lo], self.pairs[hi]
        if x == a:
            return (a, a), (ga, ga)
        if x == b:
            return (b, b), (gb, gb)
        return (a, b), (ga, gb)

    def value(self, x):
        """Midpoint estimate of h(x) from the enclosure."""
        _, (ga, gb) = self.enclosure(x)
        return (ga + gb) / 2


def _floor_endpoints(state):
    """Left endpoints of all tower floors at this level, with addresses.

    Floor (alpha, i) is f^i of the letter-alpha subinterval, 0 <= i < q_alpha;
    its left endpoint is f^i(a_alpha).  The union over all floors tiles [0,1).
    """
    base = state.giem
    out = []
    for alpha in state.pi.alphabet:
        y = state.domain_interval(alpha)[0]
        for i in range(state.q[alpha]):
            out.append((y, (alpha, i)))
            if i + 1 < state.q[alpha]:
                y = base.apply(y)
    return out


def matched_points(hist_f, hist_g, level):
    """Endpoint table pairing the level-`level` towers of two histories."""
    match_sequences(hist_f, hist_g, level)
    sf, sg = hist_f[level], hist_g[level]
    if sf.q != sg.q:
        raise CombinatoricsMismatch("tower heights differ despite matching moves")
    pf = _floor_endpoints(sf)
    pg = dict((addr, y) for y, addr in _floor_endpoints(sg))
    rows = sorted((xf, pg[addr], addr) for xf, addr in pf)
    rows.append((mpf(1), mpf(1), (None, None)))
    for (a, ga, _), (b, gb, _) in zip(rows, rows[1:]):
        if not (a < b and ga < gb):
            raise HypothesisError(
                "matched endpoints are not order-isomorphic; the maps do not "
                "share a conjugacy at this depth"
            )
    return MatchedPoints(
        level=level,
        pairs=tuple((xf, xg) for xf, xg, _ in rows),
        addresses=tuple(addr for _, _, addr in rows),
    )


def build_conjugacy(hist_f, hist_g, depth=None, max_points=5000):
    """Matched-point table at the deepest affordable level.

    The table at level n has sum(q) + 1 rows, which grows like the top
    cocycle eigenvalue, so `max_points` caps the level reached; raise it
    when a finer table is worth the wait.
    """
    limit = match_sequences(hist_f, hist_g, depth)
    level = limit
    while level > 1 and sum(hist_f[level].q.values()) + 1 > max_points:
        level -= 1
    return matched_points(hist_f, hist_g, level)


@dataclass(frozen=True)
class PsiSeries:
    """Ladder evaluation of psi at one point.

    rows: (level, increment, uncertainty) for each level where the orbit
    hopped; partials: running sums; entry_times: i_n per level (length
    depth + 1).  `aborted` marks an early stop because the image enclosure
    got too wide to trust the g-side derivative.
    """

    point: object
    image_lo: object
    image_hi: object
    rows: tuple
    partials: tuple
    entry_times: tuple
    depth: int
    aborted: bool
    abort_level: int

    @property
    def value(self):
        return self.partials[-1] if self.partials else mpf(0)

    def increments(self):
        return [(level, inc) for level, inc, _ in self.rows]


def psi_series(hist_f, hist_g, x, image=None, conjugacy=None, depth=None,
               guard=mpf(10) ** -8):
    """Evaluate psi(x) by the level ladder.

    `image` fixes h(x) exactly (use a matched endpoint); otherwise
    `conjugacy` supplies an enclosure, which is transported through the
    ladder as a pair of endpoints.  If the transported enclosure ever
    straddles a level boundary the hop is undecidable and we raise; if the
    g-side log-derivative varies more than `guard` across it, the series
    stops early and is flagged `aborted`.
    """
    if depth is None:
        depth = min(len(hist_f), len(hist_g)) - 1
    match_sequences(hist_f, hist_g, depth)
    y = to_mpf(x)
    if not 0 <= y < hist_f[0].interval_length:
        raise GietError("sample point outside the base interval")
    if image is not None:
        lo = hi = to_mpf(image)
    elif conjugacy is not None:
        _, (lo, hi) = conjugacy.enclosure(y)
    else:
        raise GietError("need an exact image or a conjugacy table for the g side")

    rows, partials, times = [], [], [0]
    acc, i_n = mpf(0), 0
    aborted, abort_level = False, depth
    # Orbits of matched endpoints can pass within rounding distance of a
    # level boundary (exactly on it, for self-similar data).  Ties resolve
    # to "outside" per the half-open convention, and the g side defers to
    # the f side inside the guard band, so both ladders stay in lockstep.
    tie = mpf(2) ** -(mp.prec // 2)
    for n in range(depth):
        next_f = hist_f[n + 1].interval_length
        next_g = hist_g[n + 1].interval_length
        inside_f = y < next_f and abs(y - next_f) > next_f * tie
        lo_in = lo < next_g
        hi_in = hi < next_g
        if abs(lo - next_g) <= next_g * tie:
            lo_in = inside_f
        if abs(hi - next_g) <= next_g * tie:
            hi_in = inside_f
        if lo_in != hi_in:
            raise PrecisionExhausted(
                f"conjugacy enclosure straddles the level-{n + 1} boundary",
                safe_depth=n,
            )
        if inside_f != lo_in:
            raise HypothesisError(
                f"orbit and image disagree about entering level {n + 1}; "
                "the endpoint table is too coarse or the maps are not conjugate"
            )
        if inside_f:
            times.append(i_n)
            continue
        alpha = hist_f[n].pi.top_last()
        bf = hist_f[n].branches[alpha]
        bg = hist_g[n].branches[alpha]
        unc = abs(bg.log_deriv(hi) - bg.log_deriv(lo)) if hi > lo else mpf(0)
        if unc > guard:
            aborted, abort_level = True, n
            break
        inc = bf.log_deriv(y) - bg.log_deriv((lo + hi) / 2)
        y = bf.value(y)
        lo, hi = bg.value(lo), bg.value(hi)
        if y > next_f * (1 + tie) or hi > next_g * (1 + tie):
            raise GietError(f"ladder hop at level {n} missed the next interval")
        i_n += hist_f[n].q[alpha]
        acc += inc
        rows.append((n, inc, unc))
        partials.append(acc)
        times.append(i_n)
    return PsiSeries(
        point=to_mpf(x),
        image_lo=lo,
        image_hi=hi,
        rows=tuple(rows),
        partials=tuple(partials),
        entry_times=tuple(times),
        depth=depth,
        aborted=aborted,
        abort_level=abort_level,
    )


def psi_naive(f, g, x, image, steps):
    """Birkhoff-sum cross-check: sum of ln Df - ln Dg along literal orbits.

    Exists to validate the ladder on small step counts; cost grows linearly
    in `steps` while the ladder is logarithmic.
    """
    y, z = to_mpf(x), to_mpf(image)
    acc = mpf(0)
    for _ in range(steps):
        y, df = f.apply_with_log_deriv(y)
        z, dg = g.apply_with_log_deriv(z)
        acc += df - dg
    return acc


@dataclass(frozen=True)
class C8Estimate:
    value: object
    per_letter: dict
    spread: object
    level: int


def c8_estimate(hist_f, hist_g, level=None):
    """Boundary derivative Dh(0) from per-letter length ratios.

    h maps each level-n subinterval of f onto the like-named one of g, and
    all of them accumulate at 0, so every ratio |h(I)| / |I| converges to
    Dh(0).  The spread across letters is the self-consistency error.
    """
    if level is None:
        level = min(len(hist_f), len(hist_g)) - 1
    match_sequences(hist_f, hist_g, level)
    sf, sg = hist_f[level], hist_g[level]
    lf, lg = sf.lengths(), sg.lengths()
    ratios = dict((a, lg[a] / lf[a]) for a in sf.pi.alphabet)
    return C8Estimate(
        value=sg.interval_length / sf.interval_length,
        per_letter=ratios,
        spread=max(ratios.values()) - min(ratios.values()),
        level=level,
    )


@dataclass(frozen=True)
class DhCheck:
    """Finite-difference slopes of h against the predicted C8 * exp(psi).

    rows: (x, fd_slope, predicted, relative deviation) per sampled floor.
    """

    rows: tuple
    max_rel_dev: object
    c8: C8Estimate
    table_level: int
    psi_depth: int

    @property
    def samples(self):
        return len(self.rows)


def dh_check(hist_f, hist_g, samples=50, table_level=25, psi_depth=None,
             c8_level=None):
    """Sample floors of the level-`table_level` tower and compare slopes.

    The finite difference across a floor approximates Dh at its left
    endpoint, where psi is computable exactly (the endpoint's image is a
    matched point, so the ladder runs with a zero-width enclosure).
    """
    table = matched_points(hist_f, hist_g, table_level)
    c8 = c8_estimate(hist_f, hist_g, c8_level)
    if psi_depth is None:
        psi_depth = min(len(hist_f), len(hist_g)) - 1
    floors = len(table.pairs) - 1
    take = min(samples, floors)
    idx = sorted({round(k * (floors - 1) / max(take - 1, 1)) for k in range(take)})
    rows = []
    for i in idx:
        (x0, y0), (x1, y1) = table.pairs[i], table.pairs[i + 1]
        fd = (y1 - y0) / (x1 - x0)
        psi = psi_series(hist_f, hist_g, x0, image=y0, depth=psi_depth)
        pred = c8.value * mp.e ** psi.value
        rows.append((x0, fd, pred, abs(fd / pred - 1)))
    return DhCheck(
        rows=tuple(rows),
        max_rel_dev=max(r[3] for r in rows),
        c8=c8,
        table_level=table_level,
        psi_depth=psi_depth,
    )


def distortion_ratios(state, grid=33):
    """Per-letter sup/inf of the level-branch derivative, on a grid.

    Equals 1 for piecewise-affine maps; drifting ratios flag levels where
    zoomed nonlinearity is still visible.
    """
    out = {}
    for alpha in state.pi.alphabet:
        lo, hi = state.domain_interval(alpha)
        b = state.branches[alpha]
        vals = [b.deriv(lo + (hi - lo) * mpf(j) / (grid - 1) * (1 - mpf(2) ** -40))
                for j in range(grid)]
        out[alpha] = max(vals) / min(vals)
    return out


@dataclass(frozen=True)
class RigidityReport:
    matched_depth: int
    mismatch_step: object
    model_length_gap: object
    model_slope_gap: object
    c2_levels: tuple
    c2_distances: tuple
    c2_fit: object
    c8: object
    dh: object
    psi_fit: object
    psi_rows: tuple
    notes: tuple

    @property
    def ok(self):
        return self.mismatch_step is None and not self.notes


def theorem_checks(f, g, depth=46, table_level=20, samples=24, c2_step=4,
                   c2_top=None, history_f=None, history_g=None):
    """Run the full battery and collect outcomes instead of raising.

    Hypothesis failures (diverging itineraries, non-monotone endpoint
    tables, inextractable models) land in `notes`; hard errors still
    propagate, since they mean the inputs are broken rather than merely
    outside the theorem.
    """
    from .affine import strong_model
    from .giem import c2_distance, renormalize

    notes = []
    hist_f = history_f if history_f is not None else renormalize(f, depth)
    hist_g = history_g if history_g is not None else renormalize(g, depth)

    mismatch = None
    try:
        matched = match_sequences(hist_f, hist_g)
    except CombinatoricsMismatch as exc:
        mismatch, matched = exc.step, exc.step - 1
        notes.append(str(exc))

    len_gap = slope_gap = None
    if mismatch is None:
        try:
            mf = strong_model(f, history=hist_f)
            mg = strong_model(g, history=hist_g)
            letters = hist_f[0].pi.alphabet
            len_gap = max(abs(mf.lengths[a] - mg.lengths[a]) for a in letters)
            slope_gap = max(abs(mf.slopes[a] - mg.slopes[a]) for a in letters)
        except (HypothesisError, GietError) as exc:
            notes.append(f"model extraction failed: {exc}")

    c2_levels, c2_dists, c2f = (), (), None
    if mismatch is None:
        top = min(matched, len(hist_f) - 1) if c2_top is None else c2_top
        c2_levels = tuple(range(0, top + 1, c2_step))
        c2_dists = tuple(c2_distance(hist_f[n], hist_g[n]) for n in c2_levels)
        try:
            c2f = rate_fit(c2_levels, c2_dists)
        except (ValueError, ZeroDivisionError):
            notes.append("C2 distances too degenerate to fit a rate")

    c8 = dh = psi_fit = None
    psi_rows = ()
    if mismatch is None:
        try:
            level = min(table_level, matched)
            c8 = c8_estimate(hist_f, hist_g)
            dh = dh_check(hist_f, hist_g, samples=samples, table_level=level)
            table = matched_points(hist_f, hist_g, level)
            x0, y0 = table.pairs[len(table.pairs) // 2]
            psi = psi_series(hist_f, hist_g, x0, image=y0)
            psi_rows = psi.rows
            levels = [n for n, _, _ in psi.rows]
            mags = [abs(inc) for _, inc, _ in psi.rows]
            if len(levels) >= 3:
                psi_fit = rate_fit(levels, mags)
        except (HypothesisError, GietError) as exc:
            notes.append(f"rigidity ladder failed: {exc}")
    return RigidityReport(
        matched_depth=matched,
        mismatch_step=mismatch,
        model_length_gap=len_gap,
        model_slope_gap=slope_gap,
        c2_levels=c2_levels,
        c2_distances=c2_dists,
        c2_fit=c2f,
        c8=c8,
        dh=dh,
        psi_fit=psi_fit,
        psi_rows=psi_rows,
        notes=tuple(notes),
    )
