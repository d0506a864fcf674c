"""Generalized interval exchange maps and map-level renormalization.

A map is stored as combinatorial data, absolute cut points, and one monotone
branch per letter.  Renormalization replaces the map by its first return to
a left-anchored shrinking interval; the state keeps the induced branches as
composition-closed objects so a single step costs one branch evaluation or
one inversion regardless of depth.

Two kinds of length data live side by side and coincide for linear maps:
the geometric cut widths, and the cocycle-transported lengths obtained by
running the length recursion (winner -= loser) from the initial widths.
The conservation identity sum(q * length) = 1 is exact for the transported
lengths by construction; for nonlinear maps the geometric widths drift away
from it, which is a measurement, not a bug.
"""

from dataclasses import dataclass
from bisect import bisect_right
from functools import lru_cache

import numpy as np
from mpmath import mp, mpf

from ._num import to_mpf
from .errors import (
    GietError,
    HypothesisError,
    ConnectionSuspected,
    PrecisionExhausted,
)
from .combinatorics import CombinatorialData, CombinatoricsSequence, rauzy_move
from .branches import (
    AffineBranch,
    MoebiusBranch,
    PerturbedAffineBranch,
    SandwichBranch,
    ComposedBranch,
    compose,
)

MONOTONE_GRID = 1025
C2_GRID = 257


def is_cyclic(pi):
    """Image order is a cyclic shift of the domain order (circle maps)."""
    d = pi.d
    shift = pi.pi1[pi.top[0]] - 1
    return all((pi.pi0[a] - 1 + shift) % d == pi.pi1[a] - 1 for a in pi.alphabet)


class Giem:
    """Quadruple: combinatorics, domain cuts, image cuts, branches."""

    def __init__(self, pi, cuts, branches, label="", check_grid=True):
        self.pi = pi
        self.cuts = tuple(to_mpf(c) for c in cuts)
        self.branches = dict(branches)
        self.label = label
        d = pi.d
        if len(self.cuts) != d + 1:
            raise GietError(f"need {d + 1} cut points, got {len(self.cuts)}")
        if self.cuts[0] != 0:
            raise GietError("domain must start at 0")
        for a, b in zip(self.cuts, self.cuts[1:]):
            if not b > a:
                raise GietError("cut points must be strictly increasing")
        total = self.cuts[-1]
        if abs(total - 1) > mpf(10) ** -30:
            raise GietError("domain lengths must sum to 1")
        if set(self.branches) != set(pi.alphabet):
            raise GietError("need exactly one branch per letter")

        # image cuts in bottom order, from branch values at domain endpoints
        tol = mpf(2) ** (-(mp.prec // 2))
        img = [mpf(0)]
        for letter in pi.bottom:
            lo, hi = self.domain_interval(letter)
            blo, bhi = self.branches[letter].value(lo), self.branches[letter].value(hi)
            if not bhi > blo:
                raise GietError(f"branch of {letter} is not increasing")
            if abs(blo - img[-1]) > tol:
                raise GietError(
                    f"image of {letter} starts at {blo}, expected {img[-1]}: "
                    "image intervals do not tile in the required order"
                )
            img.append(img[-1] + (bhi - blo))
        if abs(img[-1] - total) > tol:
            raise GietError("image lengths do not sum to the domain length")
        self.img_cuts = tuple(img)

        if check_grid:
            for letter in pi.alphabet:
                lo, hi = self.domain_interval(letter)
                step = (hi - lo) / (MONOTONE_GRID - 1)
                for i in range(MONOTONE_GRID):
                    if self.branches[letter].deriv(lo + i * step) <= 0:
                        raise GietError(
                            f"branch of {letter} has nonpositive derivative"
                        )

    @property
    def d(self):
        return self.pi.d

    def domain_interval(self, letter):
        i = self.pi.pi0[letter] - 1
        return self.cuts[i], self.cuts[i + 1]

    def image_interval(self, letter):
        j = self.pi.pi1[letter] - 1
        return self.img_cuts[j], self.img_cuts[j + 1]

    def domain_lengths(self):
        return {a: self.cuts[self.pi.pi0[a]] - self.cuts[self.pi.pi0[a] - 1]
                for a in self.pi.alphabet}

    def image_lengths(self):
        return {a: self.img_cuts[self.pi.pi1[a]] - self.img_cuts[self.pi.pi1[a] - 1]
                for a in self.pi.alphabet}

    def letter_at(self, x):
        """Letter whose domain interval contains x (half-open intervals)."""
        x = to_mpf(x)
        if not 0 <= x < self.cuts[-1]:
            raise GietError(f"{x} outside the domain")
        i = bisect_right(self.cuts, x) - 1
        return self.pi.top[min(i, self.d - 1)]

    def apply(self, x):
        return self.branches[self.letter_at(x)].value(x)

    def apply_with_log_deriv(self, x):
        br = self.branches[self.letter_at(x)]
        return br.value(x), br.log_deriv(x)

    def __repr__(self):
        return f"Giem({self.label or self.pi!r}, d={self.d})"


def _zoomed_family(family, params):
    """Normalized representative of a branch family on [0, 1]."""
    if family == "affine":
        return None  # affine is fully determined by the frame
    if family == "moebius":
        u = params["u"]
        if not -1 < float(u):
            raise GietError("moebius parameter must exceed -1")
        return ("moebius", u)
    if family == "perturbed-affine":
        return ("perturbed-affine", params.get("eps", 0), params.get("beta", 0))
    raise GietError(f"unknown branch family {family!r}")


def _frame_branch(family_spec, a, b, c, d):
    """Concrete branch sending [a, b] onto [c, d] for a zoomed family."""
    if family_spec is None:
        return AffineBranch.from_intervals(a, b, c, d)
    if family_spec[0] == "moebius":
        u = to_mpf(family_spec[1])
        inner = AffineBranch.from_intervals(a, b, 0, 1)
        mid = MoebiusBranch(((1 + u, 0), (u, 1)))
        outer = AffineBranch.from_intervals(0, 1, c, d)
        return compose(outer, compose(mid, inner))
    if family_spec[0] == "perturbed-affine":
        return PerturbedAffineBranch(a, b, c, d, family_spec[1], family_spec[2])
    raise GietError(f"unknown family spec {family_spec!r}")


def build_giem(pi, domain_lengths, image_lengths, branch_specs, label=""):
    """Assemble a map from length vectors (in alphabet order or as dicts)
    and per-letter branch families ``{"family": ..., "params": {...}}``."""
    letters = pi.alphabet
    if not isinstance(domain_lengths, dict):
        domain_lengths = dict(zip(letters, domain_lengths))
    if not isinstance(image_lengths, dict):
        image_lengths = dict(zip(letters, image_lengths))
    for name, lens in (("domain", domain_lengths), ("image", image_lengths)):
        vals = [to_mpf(lens[a]) for a in letters]
        if any(v <= 0 for v in vals):
            raise GietError(f"{name} lengths must be positive")
        if abs(sum(vals) - 1) > mpf(10) ** -12:
            raise GietError(f"{name} lengths must sum to 1")
    if set(branch_specs) != set(letters):
        raise GietError("need exactly one branch spec per letter")
    cuts = [mpf(0)]
    for a in pi.top:
        cuts.append(cuts[-1] + to_mpf(domain_lengths[a]))
    img_cuts = {pi.bottom[0]: mpf(0)}
    acc = mpf(0)
    for a in pi.bottom:
        img_cuts[a] = acc
        acc += to_mpf(image_lengths[a])
    scale = acc  # renormalize tiny drift so both sums agree exactly
    branches = {}
    for a in letters:
        spec = branch_specs[a]
        fam = _zoomed_family(spec["family"], spec.get("params", {}))
        i = pi.pi0[a] - 1
        lo, hi = cuts[i], cuts[i + 1]
        c = img_cuts[a] * cuts[-1] / scale
        d = c + to_mpf(image_lengths[a]) * cuts[-1] / scale
        branches[a] = _frame_branch(fam, lo, hi, c, d)
    return Giem(pi, cuts, branches, label=label)


def conjugate(f, H, label=""):
    """The map H o f o H^{-1} for a circle diffeomorphism H fixing 0."""
    cuts = [H.value(c) for c in f.cuts]
    branches = {a: SandwichBranch(H, f.branches[a]) for a in f.pi.alphabet}
    return Giem(f.pi, cuts, branches, label=label, check_grid=False)


def mean_nonlinearity(f):
    """Integral of D2 f / D f over the domain, in closed form: the sum of
    per-branch increments of log D f."""
    acc = mpf(0)
    for a in f.pi.alphabet:
        lo, hi = f.domain_interval(a)
        br = f.branches[a]
        acc += br.log_deriv(hi) - br.log_deriv(lo)
    return acc


@dataclass(frozen=True)
class RenormState:
    """Immutable snapshot of the induction at one level."""

    giem: object
    level: int
    pi: CombinatorialData
    cuts: tuple
    img_cuts: tuple
    branches: dict
    q: dict
    lin_lengths: dict
    steps: tuple

    @property
    def interval_length(self):
        return self.cuts[-1]

    def domain_interval(self, letter):
        i = self.pi.pi0[letter] - 1
        return self.cuts[i], self.cuts[i + 1]

    def image_interval(self, letter):
        j = self.pi.pi1[letter] - 1
        return self.img_cuts[j], self.img_cuts[j + 1]

    def lengths(self):
        return {a: self.cuts[self.pi.pi0[a]] - self.cuts[self.pi.pi0[a] - 1]
                for a in self.pi.alphabet}

    def image_lengths(self):
        return {a: self.img_cuts[self.pi.pi1[a]] - self.img_cuts[self.pi.pi1[a] - 1]
                for a in self.pi.alphabet}

    def seq(self):
        return CombinatoricsSequence(self.steps)

    def tower_mass(self):
        """sum of return_time * transported_length; exactly 1 up to rounding."""
        return sum(self.q[a] * self.lin_lengths[a] for a in self.pi.alphabet)

    @property
    def last_step(self):
        return self.steps[-1] if self.steps else None


def initial_state(f):
    return RenormState(
        giem=f,
        level=0,
        pi=f.pi,
        cuts=f.cuts,
        img_cuts=f.img_cuts,
        branches=dict(f.branches),
        q={a: 1 for a in f.pi.alphabet},
        lin_lengths=f.domain_lengths(),
        steps=(),
    )


def rv_step(state):
    """One induction step; the type is decided by comparing the rightmost
    domain interval against the rightmost image interval."""
    pi = state.pi
    L = state.interval_length
    if L < mpf(2) ** (-(mp.prec - 64)):
        raise PrecisionExhausted(
            f"interval length {mp.nstr(L, 8)} is below the precision guard",
            safe_depth=state.level,
        )
    a0, a1 = pi.top_last(), pi.bottom_last()
    lam_top = L - state.cuts[-2]
    ell_bot = L - state.img_cuts[-2]
    if abs(lam_top - ell_bot) <= mpf(2) ** (-(mp.prec // 2)) * L:
        raise ConnectionSuspected(
            f"level {state.level}: rightmost domain and image intervals agree "
            f"within the guard; cannot decide a type"
        )
    eps = 0 if lam_top > ell_bot else 1
    step = rauzy_move(pi, eps)
    branches = dict(state.branches)
    q = dict(state.q)
    lin = dict(state.lin_lengths)

    if eps == 0:
        new_L = state.img_cuts[-2]
        cuts = state.cuts[:-1] + (new_L,)
        v = branches[a0].value(new_L)
        p = pi.pi1[a0] - 1
        img_cuts = state.img_cuts[: p + 1] + (v,) + state.img_cuts[p + 1 : -1]
        branches[a1] = compose(branches[a0], branches[a1])
        q[a1] += q[a0]
        lin[a0] -= lin[a1]
    else:
        new_L = state.cuts[-2]
        xstar = branches[a1].invert(new_L)
        i1 = pi.pi0[a1] - 1
        cuts = state.cuts[: i1 + 1] + (xstar,) + state.cuts[i1 + 1 : -1]
        img_cuts = state.img_cuts[:-1] + (new_L,)
        branches[a0] = compose(branches[a0], branches[a1])
        q[a0] += q[a1]
        lin[a1] -= lin[a0]

    return RenormState(
        giem=state.giem,
        level=state.level + 1,
        pi=step.next_pi,
        cuts=cuts,
        img_cuts=img_cuts,
        branches=branches,
        q=q,
        lin_lengths=lin,
        steps=state.steps + (step,),
    )


def renormalize(f, steps):
    """Run the induction, returning the full history of states
    (length steps+1, starting with the level-0 state)."""
    state = initial_state(f) if isinstance(f, Giem) else f
    history = [state]
    for _ in range(steps):
        state = rv_step(state)
        history.append(state)
    return history


def eval_rn(state, x, naive=False):
    """(value, D, D2) of the level-n return map at x in its interval.

    With naive=True the base map is literally iterated with the tower
    structure checked on the way (first return must happen exactly at the
    recorded return time); meant as an oracle at shallow depth.
    """
    x = to_mpf(x)
    L = state.interval_length
    if not 0 <= x < L:
        raise GietError(f"{x} outside the level-{state.level} interval")
    i = min(bisect_right(state.cuts, x) - 1, state.pi.d - 1)
    letter = state.pi.top[i]
    if not naive:
        return state.branches[letter].eval_all(x)
    f = state.giem
    steps = state.q[letter]
    y, d1, d2 = x, mpf(1), mpf(0)
    for j in range(steps):
        if j > 0 and y < L:
            raise GietError(
                f"orbit re-entered the induction interval after {j} < "
                f"{steps} steps: tower inconsistency"
            )
        br = f.branches[f.letter_at(y)]
        v, dv, dv2 = br.eval_all(y)
        d2 = dv2 * d1 * d1 + dv * d2
        d1 = dv * d1
        y = v
    if not 0 <= y < L:
        raise GietError("orbit missed the induction interval at return time")
    return y, d1, d2


eval_Rn = eval_rn


def zoom_branch(state, letter):
    """Level-n branch rescaled to fix 0 and 1."""
    lo, hi = state.domain_interval(letter)
    ilo, ihi = state.image_interval(letter)
    pre = AffineBranch.from_intervals(0, 1, lo, hi)
    post = AffineBranch.from_intervals(ilo, ihi, 0, 1)
    return compose(post, compose(state.branches[letter], pre))


@lru_cache(maxsize=8)
def _gauss_legendre(n, prec):
    """Nodes/weights on [-1, 1] at the given precision: float64 seeds from
    numpy polished by Newton on the Legendre recurrence."""
    seeds, _ = np.polynomial.legendre.leggauss(n)
    with mp.workprec(prec + 16):
        nodes, weights = [], []
        for s in seeds:
            x = mpf(float(s))
            for _ in range(6):
                p0, p1 = mpf(1), x
                for k in range(2, n + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = n * (x * p1 - p0) / (x * x - 1)
                x -= p1 / dp
            p0, p1 = mpf(1), x
            for k in range(2, n + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = n * (x * p1 - p0) / (x * x - 1)
            nodes.append(x)
            weights.append(2 / ((1 - x * x) * dp * dp))
    return tuple(nodes), tuple(weights)


def _tree_log_deriv_f64(branch, xs):
    """Vectorized float64 (value, sum of log-derivatives) over a branch
    composition tree; used for deep trees where mpf would be wasteful."""
    if isinstance(branch, ComposedBranch):
        v, ld = _tree_log_deriv_f64(branch.inner, xs)
        v2, ld2 = _tree_log_deriv_f64(branch.outer, v)
        return v2, ld + ld2
    if isinstance(branch, AffineBranch):
        s, o = float(branch.slope), float(branch.offset)
        return s * xs + o, np.full_like(xs, np.log(s))
    if isinstance(branch, PerturbedAffineBranch):
        a, b = float(branch.a), float(branch.b)
        c, d = float(branch.c), float(branch.d)
        e, be = float(branch.eps), float(branch.beta)
        t = (xs - a) / (b - a)
        v = c + (d - c) * (t + e * t * (1 - t) * (1 + be * t))
        dg = 1 + e * (1 + 2 * (be - 1) * t - 3 * be * t * t)
        return v, np.log((d - c) / (b - a) * dg)
    if isinstance(branch, MoebiusBranch):
        (p, qq), (r, s) = [[float(u) for u in row] for row in branch.mat]
        den = r * xs + s
        return (p * xs + qq) / den, np.log((p * s - qq * r) / (den * den))
    raise GietError(f"no float64 path for {type(branch).__name__}")


def mean_log_derivative(state, nodes=32, method="auto"):
    """Per-letter interval averages of log D of the level-n return map,
    by Gauss-Legendre quadrature.

    method "mpf" evaluates branch log-derivatives at working precision
    (right choice for composition-closed branches); "float64" walks
    composition trees vectorized over the nodes (right choice for literal
    perturbed-affine maps whose trees grow with depth); "auto" picks by
    branch type.
    """
    pi = state.pi
    if method == "auto":
        tree = any(isinstance(b, ComposedBranch) for b in state.branches.values())
        method = "float64" if tree else "mpf"
    xs_nodes, ws = _gauss_legendre(nodes, mp.prec)
    out = {}
    for a in pi.alphabet:
        lo, hi = state.domain_interval(a)
        br = state.branches[a]
        mid, half = (lo + hi) / 2, (hi - lo) / 2
        if method == "mpf":
            acc = mpf(0)
            for t, w in zip(xs_nodes, ws):
                x = mid + half * t
                if not lo <= x <= hi:
                    raise GietError("quadrature node escaped the interval")
                acc += w * br.log_deriv(x)
            out[a] = acc / 2
        else:
            ts = np.array([float(t) for t in xs_nodes])
            wf = np.array([float(w) for w in ws])
            xs = float(mid) + float(half) * ts
            _, ld = _tree_log_deriv_f64(br, xs)
            out[a] = mpf(float(np.dot(wf, ld) / 2))
    return out


def _tree_eval2_f64(branch, xs):
    """Vectorized float64 (value, D, D2) over a branch composition tree."""
    if isinstance(branch, ComposedBranch):
        vi, d1i, d2i = _tree_eval2_f64(branch.inner, xs)
        vo, d1o, d2o = _tree_eval2_f64(branch.outer, vi)
        return vo, d1o * d1i, d2o * d1i * d1i + d1o * d2i
    if isinstance(branch, AffineBranch):
        s, o = float(branch.slope), float(branch.offset)
        zero = np.zeros_like(xs)
        return s * xs + o, zero + s, zero
    if isinstance(branch, PerturbedAffineBranch):
        a, b = float(branch.a), float(branch.b)
        c, d = float(branch.c), float(branch.d)
        e, be = float(branch.eps), float(branch.beta)
        t = (xs - a) / (b - a)
        v = c + (d - c) * (t + e * t * (1 - t) * (1 + be * t))
        dg = 1 + e * (1 + 2 * (be - 1) * t - 3 * be * t * t)
        d2g = e * (2 * (be - 1) - 6 * be * t)
        return v, (d - c) / (b - a) * dg, (d - c) / (b - a) ** 2 * d2g
    if isinstance(branch, MoebiusBranch):
        (p, qq), (r, s) = [[float(u) for u in row] for row in branch.mat]
        den = r * xs + s
        det = p * s - qq * r
        return (p * xs + qq) / den, det / (den * den), -2 * r * det / den ** 3
    raise GietError(f"no float64 path for {type(branch).__name__}")


def _zoom_samples(state_or_giem, letter, grid, method="mpf"):
    """Zoomed branch (value, D, D2) on a uniform grid of [0, 1]."""
    obj = state_or_giem
    lo, hi = obj.domain_interval(letter)
    ilo, ihi = obj.image_interval(letter)
    br = obj.branches[letter]
    dlen, ilen = hi - lo, ihi - ilo
    if method == "float64":
        xs = float(lo) + float(dlen) * np.linspace(0.0, 1.0, grid)
        v, d1, d2 = _tree_eval2_f64(br, xs)
        scale = float(dlen) / float(ilen)
        return (
            [mpf(t) for t in (v - float(ilo)) / float(ilen)],
            [mpf(t) for t in d1 * scale],
            [mpf(t) for t in d2 * float(dlen) * scale],
        )
    vals, d1s, d2s = [], [], []
    for i in range(grid):
        x = lo + dlen * i / (grid - 1)
        v, d1, d2 = br.eval_all(x)
        vals.append((v - ilo) / ilen)
        d1s.append(d1 * dlen / ilen)
        d2s.append(d2 * dlen * dlen / ilen)
    return vals, d1s, d2s


def c2_distance(a, b, grid=C2_GRID, method="auto"):
    """Distance between two maps (or induction states) in zoomed form: max
    over letters of grid sup-norms of the zoomed branch, its first and
    second derivatives, plus L1 distances of the normalized domain and
    image length vectors.

    method "auto" switches to vectorized float64 sampling when either side
    carries branch composition trees, whose node count grows with depth;
    the sampled quantities are zoomed, hence O(1), so double precision
    costs about 1e-12 of absolute accuracy there.
    """
    if isinstance(a, Giem):
        a = initial_state(a)
    if isinstance(b, Giem):
        b = initial_state(b)
    if a.pi.alphabet != b.pi.alphabet:
        raise GietError("alphabet mismatch")
    if method == "auto":
        tree = any(
            isinstance(br, ComposedBranch)
            for st in (a, b)
            for br in st.branches.values()
        )
        method = "float64" if tree else "mpf"
    best = mpf(0)
    for letter in a.pi.alphabet:
        va, d1a, d2a = _zoom_samples(a, letter, grid, method)
        vb, d1b, d2b = _zoom_samples(b, letter, grid, method)
        for xs, ys in ((va, vb), (d1a, d1b), (d2a, d2b)):
            gap = max(abs(x - y) for x, y in zip(xs, ys))
            if gap > best:
                best = gap
    La, Lb = a.interval_length, b.interval_length
    lena, lenb = a.lengths(), b.lengths()
    ilena, ilenb = a.image_lengths(), b.image_lengths()
    l1_dom = sum(abs(lena[x] / La - lenb[x] / Lb) for x in a.pi.alphabet)
    l1_img = sum(abs(ilena[x] / La - ilenb[x] / Lb) for x in a.pi.alphabet)
    return best + l1_dom + l1_img


@dataclass(frozen=True)
class BreakRecord:
    point: object
    ratio: object
    letter: str


def break_points(f, tol=mpf(10) ** -12):
    """One-sided derivative ratios at interior cut points, plus the seam
    point 0 for circle (cyclic) combinatorics.  Ratios within tol of 1 are
    not breaks and are omitted."""
    out = []
    top = f.pi.top
    for i in range(1, f.d):
        x = f.cuts[i]
        left = f.branches[top[i - 1]].deriv(x)
        right = f.branches[top[i]].deriv(x)
        ratio = left / right
        if abs(ratio - 1) > tol:
            out.append(BreakRecord(x, ratio, top[i]))
    if is_cyclic(f.pi):
        left = f.branches[top[-1]].deriv(f.cuts[-1])
        right = f.branches[top[0]].deriv(f.cuts[0])
        ratio = left / right
        if abs(ratio - 1) > tol:
            out.append(BreakRecord(mpf(0), ratio, top[0]))
    return out


def break_at_zero(f):
    """Seam derivative ratio Df(1-)/Df(0+) for circle combinatorics."""
    if not is_cyclic(f.pi):
        raise HypothesisError("seam break needs cyclic (circle) combinatorics")
    left = f.branches[f.pi.top[-1]].deriv(f.cuts[-1])
    right = f.branches[f.pi.top[0]].deriv(f.cuts[0])
    return left / right


@dataclass(frozen=True)
class BreakCheck:
    letter: str
    level: int
    lhs: object
    rhs: object
    diff: object
    base_letter: str
    orbit_steps: int
    exact_telescope: bool


def break_invariance_check(state, letter):
    """Compare the break of the level-n map at the left endpoint of the
    letter's interval with the base-map break its forward orbit lands on.

    The left-hand side divides one-sided derivatives of the induced
    branches; the right-hand side walks the base orbit of the cut point to
    the first base cut and divides one-sided base derivatives there.  The
    two sides agree exactly (pure chain rule) when the flanking letters
    return in step: equal return times make the two orbits run in parallel
    and every factor but the straddled base cut cancels; the flag records
    whether that held.
    """
    pi = state.pi
    pos = pi.pi0[letter] - 1
    if pos == 0:
        raise HypothesisError(
            f"{letter} is leftmost at level {state.level}; its endpoint is "
            "the induction interval edge, not an interior break"
        )
    neighbor = pi.top[pos - 1]
    cut = state.cuts[pos]
    lhs = state.branches[neighbor].deriv(cut) / state.branches[letter].deriv(cut)

    f = state.giem
    guard = mpf(2) ** (-(mp.prec // 2))
    x = cut
    q_bound = max(state.q.values()) + 1
    base_cuts = f.cuts
    for j in range(q_bound):
        hit = None
        for i in range(1, f.d):
            if abs(x - base_cuts[i]) <= guard:
                hit = i
                break
        if hit is not None:
            base_letter = f.pi.top[hit]
            left = f.branches[f.pi.top[hit - 1]].deriv(base_cuts[hit])
            right = f.branches[base_letter].deriv(base_cuts[hit])
            rhs = left / right
            exact = state.q[neighbor] == state.q[letter]
            return BreakCheck(
                letter=letter,
                level=state.level,
                lhs=lhs,
                rhs=rhs,
                diff=lhs - rhs,
                base_letter=base_letter,
                orbit_steps=j,
                exact_telescope=exact,
            )
        x = f.apply(x)
    raise GietError(
        f"orbit of the level-{state.level} cut of {letter} found no base "
        f"cut within {q_bound} steps (connection or depth issue)"
    )
