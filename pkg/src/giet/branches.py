"""Monotone C^2 branch algebra.

A branch is an increasing map given by an explicit formula: affine, Moebius,
affine-with-polynomial-bump, circle diffeomorphism, or a composition of
those.  Branch objects are domain-free formulas; interval bookkeeping lives
with the interval exchange that uses them.  ``compose(f, g)`` means f after
g and stays inside a closed family whenever it can (affine*affine, Moebius*
Moebius, and conjugates sharing the same outer map), so that deeply
renormalized branches keep O(1) evaluation cost.

All arithmetic happens at the ambient mpmath precision; parameters may be
ints, Fractions or mpf and are converted on use.
"""

from fractions import Fraction

from mpmath import mp, mpf

from ._num import to_mpf
from .errors import GietError, ConvergenceError


def _newton_invert(value, deriv, y, lo, hi, max_iter=400):
    """Safeguarded Newton for value(x) = y on the bracket [lo, hi].

    max_iter leaves room for pure bisection to certify the step tolerance
    even when the root hugs a bracket endpoint and every Newton candidate
    gets rejected.
    """
    lo, hi = to_mpf(lo), to_mpf(hi)
    y = to_mpf(y)
    flo = value(lo) - y
    fhi = value(hi) - y
    if flo > 0 or fhi < 0:
        raise GietError("inversion target outside branch image")
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    x = lo + (hi - lo) / 2
    tol = mpf(2) ** (16 - mp.prec)
    for _ in range(max_iter):
        fx = value(x) - y
        if fx > 0:
            hi = x
        elif fx < 0:
            lo = x
        else:
            return x
        dfx = deriv(x)
        xn = None
        if dfx > 0:
            cand = x - fx / dfx
            if lo < cand < hi:
                xn = cand
        if xn is None:
            xn = lo + (hi - lo) / 2
        done = abs(xn - x) < tol
        x = xn
        if done:
            # two polishing steps; quadratic convergence from here
            for _ in range(2):
                d = deriv(x)
                if d > 0:
                    x = x - (value(x) - y) / d
            return x
    raise ConvergenceError("branch inversion did not converge")


class Branch:
    """Common interface; subclasses fill in value/deriv/deriv2/invert."""

    def log_deriv(self, x):
        return mp.log(self.deriv(x))

    def eval_all(self, x):
        """(value, deriv, deriv2) at x, sharing work where a subclass can."""
        return self.value(x), self.deriv(x), self.deriv2(x)

    def __call__(self, x):
        return self.value(x)


class AffineBranch(Branch):
    __slots__ = ("slope", "offset")

    def __init__(self, slope, offset):
        self.slope = slope
        self.offset = offset

    @classmethod
    def from_intervals(cls, a, b, c, d):
        """The increasing affine map sending [a, b] onto [c, d]."""
        a, b, c, d = map(to_mpf, (a, b, c, d))
        slope = (d - c) / (b - a)
        return cls(slope, c - slope * a)

    def value(self, x):
        return to_mpf(self.slope) * to_mpf(x) + to_mpf(self.offset)

    def deriv(self, x):
        return to_mpf(self.slope)

    def deriv2(self, x):
        return mpf(0)

    def log_deriv(self, x):
        return mp.log(to_mpf(self.slope))

    def invert(self, y):
        return (to_mpf(y) - to_mpf(self.offset)) / to_mpf(self.slope)

    def as_moebius(self):
        return MoebiusBranch(((self.slope, self.offset), (0, 1)))

    def __repr__(self):
        return f"AffineBranch(slope={self.slope}, offset={self.offset})"


class MoebiusBranch(Branch):
    """x -> (p x + q) / (r x + s) with positive determinant."""

    __slots__ = ("mat",)

    def __init__(self, mat):
        (p, q), (r, s) = mat
        self.mat = ((p, q), (r, s))

    def _mpmat(self):
        (p, q), (r, s) = self.mat
        return to_mpf(p), to_mpf(q), to_mpf(r), to_mpf(s)

    def _det(self):
        p, q, r, s = self._mpmat()
        return p * s - q * r

    def value(self, x):
        p, q, r, s = self._mpmat()
        x = to_mpf(x)
        return (p * x + q) / (r * x + s)

    def deriv(self, x):
        p, q, r, s = self._mpmat()
        den = r * to_mpf(x) + s
        return (p * s - q * r) / (den * den)

    def deriv2(self, x):
        p, q, r, s = self._mpmat()
        den = r * to_mpf(x) + s
        return -2 * r * (p * s - q * r) / (den * den * den)

    def invert(self, y):
        p, q, r, s = self._mpmat()
        y = to_mpf(y)
        return (s * y - q) / (-r * y + p)

    def compose_with(self, other):
        """self after other, renormalized to unit sup-entry."""
        a = self._mpmat()
        b = other._mpmat()
        p = a[0] * b[0] + a[1] * b[2]
        q = a[0] * b[1] + a[1] * b[3]
        r = a[2] * b[0] + a[3] * b[2]
        s = a[2] * b[1] + a[3] * b[3]
        scale = max(abs(p), abs(q), abs(r), abs(s))
        return MoebiusBranch(((p / scale, q / scale), (r / scale, s / scale)))

    def __repr__(self):
        return f"MoebiusBranch({self.mat})"


class PerturbedAffineBranch(Branch):
    """Affine map of [a, b] onto [c, d] plus an endpoint-preserving cubic
    bump in normalized coordinates: t + eps * t(1-t)(1+beta t).

    Monotone for moderate eps; the constructor rejects parameter choices
    whose derivative is not strictly positive on [0, 1].
    """

    __slots__ = ("a", "b", "c", "d", "eps", "beta")

    def __init__(self, a, b, c, d, eps, beta=0):
        self.a, self.b, self.c, self.d = a, b, c, d
        self.eps, self.beta = eps, beta
        # g'(t) = 1 + eps(1 + 2(beta-1)t - 3 beta t^2); check on a fine grid
        # plus at the parabola vertex, exactly in rationals
        e, be = Fraction(eps), Fraction(beta)
        samples = [Fraction(i, 64) for i in range(65)]
        if be != 0:
            vertex = (be - 1) / (3 * be)
            if 0 < vertex < 1:
                samples.append(vertex)
        for t in samples:
            if 1 + e * (1 + 2 * (be - 1) * t - 3 * be * t * t) <= 0:
                raise GietError("bump parameters break monotonicity")

    def _frame(self):
        a, b = to_mpf(self.a), to_mpf(self.b)
        c, d = to_mpf(self.c), to_mpf(self.d)
        return a, b, c, d

    def _g(self, t):
        e, be = to_mpf(self.eps), to_mpf(self.beta)
        return t + e * t * (1 - t) * (1 + be * t)

    def _dg(self, t):
        e, be = to_mpf(self.eps), to_mpf(self.beta)
        return 1 + e * (1 + 2 * (be - 1) * t - 3 * be * t * t)

    def _d2g(self, t):
        e, be = to_mpf(self.eps), to_mpf(self.beta)
        return e * (2 * (be - 1) - 6 * be * t)

    def value(self, x):
        a, b, c, d = self._frame()
        t = (to_mpf(x) - a) / (b - a)
        return c + (d - c) * self._g(t)

    def deriv(self, x):
        a, b, c, d = self._frame()
        t = (to_mpf(x) - a) / (b - a)
        return (d - c) / (b - a) * self._dg(t)

    def deriv2(self, x):
        a, b, c, d = self._frame()
        t = (to_mpf(x) - a) / (b - a)
        return (d - c) / (b - a) ** 2 * self._d2g(t)

    def invert(self, y):
        a, b, c, d = self._frame()
        s = (to_mpf(y) - c) / (d - c)
        t = _newton_invert(self._g, self._dg, s, 0, 1)
        return a + (b - a) * t

    def __repr__(self):
        return (
            f"PerturbedAffineBranch([{self.a},{self.b}]->[{self.c},{self.d}], "
            f"eps={self.eps}, beta={self.beta})"
        )


class CircleDiffeo(Branch):
    """Circle diffeomorphism fixing 0, as a map of [0, 1] onto itself:

        H(x) = x + sum_j  a_j / (2 pi j) * (sin(2 pi j x + phi_j) - sin phi_j)

    Periodic derivative (so the two one-sided derivatives at the gluing
    point 0 ~ 1 agree); requires sum |a_j| < 1.
    """

    __slots__ = ("terms", "_warm", "_cache")

    def __init__(self, terms):
        terms = tuple((int(j), amp, ph) for j, amp, ph in terms)
        if sum(abs(Fraction(a)) for _, a, _ in terms) >= 1:
            raise GietError("amplitude budget >= 1 breaks monotonicity")
        self.terms = terms
        self._warm = None
        self._cache = None

    def _params(self):
        """Term parameters as mpf at the ambient precision, cached."""
        if self._cache is None or self._cache[0] != mp.prec:
            two_pi = 2 * mp.pi
            rows = tuple(
                (j, to_mpf(a), to_mpf(ph), mp.sin(to_mpf(ph)))
                for j, a, ph in self.terms
            )
            self._cache = (mp.prec, two_pi, rows)
        return self._cache[1], self._cache[2]

    def value(self, x):
        x = to_mpf(x)
        two_pi, rows = self._params()
        acc = x
        for j, a, ph, sph in rows:
            acc += a / (two_pi * j) * (mp.sin(two_pi * j * x + ph) - sph)
        return acc

    def value_deriv(self, x):
        x = to_mpf(x)
        two_pi, rows = self._params()
        v, dv = x, mpf(1)
        for j, a, ph, sph in rows:
            c, s = mp.cos_sin(two_pi * j * x + ph)
            v += a / (two_pi * j) * (s - sph)
            dv += a * c
        return v, dv

    def deriv(self, x):
        x = to_mpf(x)
        two_pi, rows = self._params()
        acc = mpf(1)
        for j, a, ph, _ in rows:
            acc += a * mp.cos(two_pi * j * x + ph)
        return acc

    def deriv2(self, x):
        x = to_mpf(x)
        two_pi, rows = self._params()
        acc = mpf(0)
        for j, a, ph, _ in rows:
            acc -= a * two_pi * j * mp.sin(two_pi * j * x + ph)
        return acc

    def invert(self, y):
        y = to_mpf(y)
        # warm start from the previous inversion; consecutive calls walk
        # monotone grids, so plain Newton usually lands in 2-3 steps
        if self._warm is not None:
            x = self._warm
            tol = mpf(2) ** (16 - mp.prec)
            for _ in range(10):
                v, d = self.value_deriv(x)
                step = (v - y) / d
                x -= step
                if abs(step) < tol:
                    v, d = self.value_deriv(x)
                    x -= (v - y) / d
                    self._warm = x
                    return x
                if not -1 < x < 2:
                    break
        slack = sum(
            abs(to_mpf(a)) / (mp.pi * j) for j, a, _ in self.terms
        )
        lo = max(mpf(0), y - slack)
        hi = min(mpf(1), y + slack)
        x = _newton_invert(self.value, self.deriv, y, lo, hi)
        self._warm = x
        return x

    def __repr__(self):
        return f"CircleDiffeo({self.terms})"


class SandwichBranch(Branch):
    """outer o core o outer^{-1}; composition with a sandwich sharing the
    same outer object collapses onto the cores."""

    __slots__ = ("outer", "core")

    def __init__(self, outer, core):
        self.outer = outer
        self.core = core

    def value(self, x):
        return self.outer.value(self.core.value(self.outer.invert(x)))

    def _parts(self, x):
        u = self.outer.invert(x)
        cu = self.core.value(u)
        return u, cu

    def deriv(self, x):
        u, cu = self._parts(x)
        return self.outer.deriv(cu) * self.core.deriv(u) / self.outer.deriv(u)

    def deriv2(self, x):
        u, cu = self._parts(x)
        Hu, Hcu = self.outer.deriv(u), self.outer.deriv(cu)
        cpu = self.core.deriv(u)
        num = (
            self.outer.deriv2(cu) * cpu * cpu
            + Hcu * self.core.deriv2(u)
            - Hcu * cpu * self.outer.deriv2(u) / Hu
        )
        return num / (Hu * Hu)

    def invert(self, y):
        return self.outer.value(self.core.invert(self.outer.invert(y)))

    def eval_all(self, x):
        u, cu = self._parts(x)
        Hu, Hcu = self.outer.deriv(u), self.outer.deriv(cu)
        cpu = self.core.deriv(u)
        d1 = Hcu * cpu / Hu
        num = (
            self.outer.deriv2(cu) * cpu * cpu
            + Hcu * self.core.deriv2(u)
            - Hcu * cpu * self.outer.deriv2(u) / Hu
        )
        return self.outer.value(cu), d1, num / (Hu * Hu)

    def log_deriv(self, x):
        u, cu = self._parts(x)
        return (
            mp.log(self.outer.deriv(cu))
            + self.core.log_deriv(u)
            - mp.log(self.outer.deriv(u))
        )

    def __repr__(self):
        return f"SandwichBranch(outer={self.outer!r}, core={self.core!r})"


class ComposedBranch(Branch):
    """Generic fallback: outer after inner, kept as a tree."""

    __slots__ = ("outer", "inner")

    def __init__(self, outer, inner):
        self.outer = outer
        self.inner = inner

    def value(self, x):
        return self.outer.value(self.inner.value(x))

    def deriv(self, x):
        y = self.inner.value(x)
        return self.outer.deriv(y) * self.inner.deriv(x)

    def log_deriv(self, x):
        y = self.inner.value(x)
        return self.outer.log_deriv(y) + self.inner.log_deriv(x)

    def deriv2(self, x):
        y = self.inner.value(x)
        di = self.inner.deriv(x)
        return self.outer.deriv2(y) * di * di + self.outer.deriv(y) * self.inner.deriv2(x)

    def invert(self, y):
        return self.inner.invert(self.outer.invert(y))

    def __repr__(self):
        return f"ComposedBranch({self.outer!r}, {self.inner!r})"


def compose(outer, inner):
    """The branch x -> outer(inner(x)), collapsed when a closed family
    contains both factors."""
    if isinstance(outer, AffineBranch) and isinstance(inner, AffineBranch):
        so, si = to_mpf(outer.slope), to_mpf(inner.slope)
        return AffineBranch(so * si, so * to_mpf(inner.offset) + to_mpf(outer.offset))
    if isinstance(outer, (AffineBranch, MoebiusBranch)) and isinstance(
        inner, (AffineBranch, MoebiusBranch)
    ):
        mo = outer.as_moebius() if isinstance(outer, AffineBranch) else outer
        mi = inner.as_moebius() if isinstance(inner, AffineBranch) else inner
        return mo.compose_with(mi)
    if (
        isinstance(outer, SandwichBranch)
        and isinstance(inner, SandwichBranch)
        and outer.outer is inner.outer
    ):
        return SandwichBranch(outer.outer, compose(outer.core, inner.core))
    return ComposedBranch(outer, inner)
