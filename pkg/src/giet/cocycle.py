"""Integer cocycle over sequences of elementary moves, exact cone tests,
and spectral splitting for periodic sequences.

Matrices act on vectors indexed by the sorted alphabet.  The elementary
matrix of a step adds the winner's coordinate to the loser's; products over
windows are kept as exact integer matrices (they are unimodular, so their
inverses are integer matrices too).
"""

from dataclasses import dataclass
from fractions import Fraction
import math
import random

from mpmath import mp, mpf

from . import _exact
from ._num import to_mpf
from .errors import GietError, HypothesisError
from .combinatorics import CombinatoricsSequence, rauzy_class
from .rates import growth_fit


def _index(pi):
    return {a: i for i, a in enumerate(pi.alphabet)}


def omega_matrix(pi):
    """Antisymmetric pairing matrix of the combinatorial datum."""
    idx = _index(pi)
    p0, p1 = pi.pi0, pi.pi1
    d = pi.d
    rows = [[0] * d for _ in range(d)]
    for a in pi.alphabet:
        for b in pi.alphabet:
            if p1[a] > p1[b] and p0[a] < p0[b]:
                rows[idx[a]][idx[b]] = 1
            elif p1[a] < p1[b] and p0[a] > p0[b]:
                rows[idx[a]][idx[b]] = -1
    return tuple(tuple(r) for r in rows)


def genus(pi):
    """Half the rank of the pairing matrix (the rank is always even)."""
    r = _exact.rank(omega_matrix(pi))
    if r % 2:  # antisymmetry forces even rank
        raise GietError("odd rank of an antisymmetric matrix")
    return r // 2


def is_genus_one(pi):
    return genus(pi) == 1


def theta_matrix(step):
    """Elementary transition matrix: identity plus a 1 in (loser, winner)."""
    idx = _index(step.pi)
    d = step.pi.d
    rows = [[1 if i == j else 0 for j in range(d)] for i in range(d)]
    rows[idx[step.loser]][idx[step.winner]] = 1
    return tuple(tuple(r) for r in rows)


def theta_inverse(step):
    idx = _index(step.pi)
    d = step.pi.d
    rows = [[1 if i == j else 0 for j in range(d)] for i in range(d)]
    rows[idx[step.loser]][idx[step.winner]] = -1
    return tuple(tuple(r) for r in rows)


def check_intertwine(step):
    """Exact identity tying the pairing matrices before and after a move."""
    th = theta_matrix(step)
    lhs = _exact.mat_mul(_exact.mat_mul(th, omega_matrix(step.pi)), _exact.transpose(th))
    return lhs == omega_matrix(step.next_pi)


def cocycle_product(seq, start, stop):
    """Product of step matrices over the half-open window [start, stop)."""
    if not 0 <= start <= stop <= len(seq):
        raise GietError(f"window [{start},{stop}) out of range")
    d = seq.start.d
    acc = _exact.identity(d)
    for i in range(start, stop):
        acc = _exact.mat_mul(theta_matrix(seq[i]), acc)
    return acc


def cocycle_inverse(seq, start, stop):
    acc = _exact.identity(seq.start.d)
    for i in range(start, stop):
        acc = _exact.mat_mul(acc, theta_inverse(seq[i]))
    return acc


def _primitive(vec):
    """Scale a rational vector to coprime integers, first nonzero positive."""
    denoms = [f.denominator for f in vec]
    lcm = 1
    for q in denoms:
        lcm = lcm * q // math.gcd(lcm, q)
    ints = [int(f * lcm) for f in vec]
    g = 0
    for v in ints:
        g = math.gcd(g, abs(v))
    if g:
        ints = [v // g for v in ints]
    for v in ints:
        if v:
            if v < 0:
                ints = [-x for x in ints]
            break
    return tuple(ints)


def ker_basis(pi):
    """Primitive integer basis of the kernel of the pairing matrix."""
    basis = _exact.nullspace(omega_matrix(pi))
    return tuple(_primitive(v) for v in basis)


def kernel_meets_positive_cone(pi):
    """Exact test: does the kernel contain a vector with all entries > 0?"""
    basis = ker_basis(pi)
    if not basis:
        return False
    d = pi.d
    cons = [(tuple(Fraction(b[i]) for b in basis), Fraction(0)) for i in range(d)]
    return _exact.strictly_feasible(cons, len(basis))


def tplus_witness(pi):
    """Canonical integer point of the suspension-data cone."""
    return tuple(pi.pi1[a] - pi.pi0[a] for a in pi.alphabet)


def in_cone_tplus(pi, tau):
    """Strict suspension cone: positive top partial sums, negative bottom."""
    idx = _index(pi)
    tau = [Fraction(t) for t in tau]
    for row, sign in ((pi.top, 1), (pi.bottom, -1)):
        acc = Fraction(0)
        for a in row[:-1]:
            acc += tau[idx[a]]
            if sign * acc <= 0:
                return False
    return True


def _solve_with_kernel(mat, rhs):
    """Particular rational solution of mat x = rhs plus a kernel basis,
    or None when inconsistent."""
    x0 = _exact.solve(mat, rhs)
    if x0 is None:
        return None
    return x0, _exact.nullspace(mat)


def in_cone_cs(pi, v):
    """Is v the pairing image of a strictly positive vector?  Exact."""
    om = omega_matrix(pi)
    sol = _solve_with_kernel(om, [Fraction(x) for x in v])
    if sol is None:
        return False
    x0, kern = sol
    d = pi.d
    cons = [
        (tuple(k[i] for k in kern), x0[i])
        for i in range(d)
    ]
    return _exact.strictly_feasible(cons, len(kern))


def in_cone_cu(pi, v):
    """Is v = -(pairing) tau for some tau in the suspension cone?  Exact."""
    om = omega_matrix(pi)
    sol = _solve_with_kernel(om, [-Fraction(x) for x in v])
    if sol is None:
        return False
    tau0, kern = sol
    idx = _index(pi)
    cons = []
    for row, sign in ((pi.top, 1), (pi.bottom, -1)):
        coeff_acc = [Fraction(0)] * len(kern)
        const_acc = Fraction(0)
        for a in row[:-1]:
            i = idx[a]
            const_acc += tau0[i]
            for j, k in enumerate(kern):
                coeff_acc[j] += k[i]
            cons.append((tuple(sign * c for c in coeff_acc), sign * const_acc))
    return _exact.strictly_feasible(cons, len(kern))


def _sup(vec):
    return float(max(abs(Fraction(x)) for x in vec))


@dataclass(frozen=True)
class HyperbolicityProbe:
    mu_unstable: object
    mu_stable: object
    unstable_series: tuple
    stable_series: tuple
    n_range: tuple


def hyperbolicity_probe(seq, n_range=None, samples=3, rng_seed=0):
    """Growth-rate estimates along a finite sequence of moves.

    Expanding directions are pushed forward from the suspension cone;
    contracting ones are measured by pulling positive-cone images at level n
    back to level 0 (their preimages grow at the contraction rate).  All
    linear algebra is exact; only the fitted rates are floating point.
    """
    N = len(seq)
    if n_range is None:
        n_range = (max(2, N // 6), N)
    lo, hi = n_range
    if not 1 <= lo < hi <= N:
        raise GietError(f"n_range {n_range} does not fit a length-{N} sequence")
    rng = random.Random(rng_seed)
    d = seq.start.d
    om0 = omega_matrix(seq.start)

    def jittered_tau():
        base = tplus_witness(seq.start)
        for _ in range(64):
            tau = tuple(
                Fraction(b) + Fraction(rng.randint(-9, 9), 100) for b in base
            )
            if in_cone_tplus(seq.start, tau):
                return tau
        return tuple(Fraction(b) for b in base)

    u_fits, s_fits = [], []
    u_series = s_series = None
    for sample in range(samples):
        if sample == 0:
            tau = tuple(Fraction(t) for t in tplus_witness(seq.start))
            w = tuple(Fraction(1) for _ in range(d))
        else:
            tau = jittered_tau()
            w = tuple(Fraction(1) + Fraction(rng.randint(0, 9), 10) for _ in range(d))
        u = tuple(-x for x in _exact.mat_vec(om0, tau))
        minv = _exact.identity(d)
        us, ss, ns = [], [], []
        for n in range(N + 1):
            if lo <= n <= hi:
                om_n = omega_matrix(seq.pi_at(n))
                stab = _exact.mat_vec(minv, _exact.mat_vec(om_n, w))
                ns.append(n)
                us.append(_sup(u))
                ss.append(_sup(stab))
            if n < N:
                u = _exact.mat_vec(theta_matrix(seq[n]), u)
                minv = _exact.mat_mul(minv, theta_inverse(seq[n]))
        u_fits.append(growth_fit(ns, us))
        s_fits.append(growth_fit(ns, ss))
        if sample == 0:
            u_series, s_series = tuple(us), tuple(ss)
    return HyperbolicityProbe(
        mu_unstable=min(u_fits, key=lambda f: f.rate),
        mu_stable=min(s_fits, key=lambda f: f.rate),
        unstable_series=u_series,
        stable_series=s_series,
        n_range=(lo, hi),
    )


def periodic_central_space(loop):
    """Exact fixed vectors of a loop's period matrix, as primitive integers.

    Empty when the period matrix has no eigenvalue 1 (always the case in
    genus one with a two-letter alphabet).
    """
    if loop.start != loop.end:
        raise GietError("sequence is not a loop")
    M = cocycle_product(loop, 0, len(loop))
    d = loop.start.d
    MI = _exact.mat_sub(M, _exact.identity(d))
    basis = tuple(_primitive(v) for v in _exact.nullspace(MI))
    for v in basis:
        assert _exact.mat_vec(M, v) == tuple(v)
    return basis


def central_space(seq, checkpoints=None):
    """Approximate central direction of a non-periodic sequence.

    Closes the path at several depths back to its start and compares the
    periodic fixed vectors of the closures.  Returns (vector, increments);
    the vector is None when closures disagree in dimension or the increments
    do not settle.
    """
    N = len(seq)
    if checkpoints is None:
        checkpoints = [n for n in range(max(2, N // 2), N + 1, max(1, N // 8))]
    from .combinatorics import close_path

    dirs = []
    for n in checkpoints:
        head = seq[0:n]
        loop = head + close_path(head, seq.start)
        basis = periodic_central_space(loop)
        if len(basis) != 1:
            continue
        v = basis[0]
        sup = max(abs(x) for x in v)
        dirs.append(tuple(Fraction(x, sup) for x in v))
    if not dirs:
        return None, ()
    incs = tuple(
        float(max(abs(a - b) for a, b in zip(u, w)))
        for u, w in zip(dirs, dirs[1:])
    )
    settled = not incs or incs[-1] < 1e-6
    return (dirs[-1] if settled else None), incs


def stable_space(seq, w=None):
    """Pullback approximation of the contracting line at level 0.

    Returns (direction, increments) where direction is a unit-sup tuple of
    Fractions and increments track convergence of the pullbacks.
    """
    d = seq.start.d
    if w is None:
        w = tuple(Fraction(1) for _ in range(d))
    minv = _exact.identity(d)
    dirs = []
    for n in range(len(seq) + 1):
        om_n = omega_matrix(seq.pi_at(n))
        v = _exact.mat_vec(minv, _exact.mat_vec(om_n, w))
        sup = max(abs(x) for x in v)
        if sup:
            v = tuple(Fraction(x, 1) / sup for x in v)
            for x in v:
                if x:
                    if x < 0:
                        v = tuple(-y for y in v)
                    break
            dirs.append(v)
        if n < len(seq):
            minv = _exact.mat_mul(minv, theta_inverse(seq[n]))
    incs = tuple(
        float(max(abs(a - b) for a, b in zip(u, wv)))
        for u, wv in zip(dirs, dirs[1:])
    )
    return dirs[-1], incs


def _power_direction(M, prec, invert=False):
    """Dominant eigendirection by exact integer power iteration."""
    A = _exact.inverse(M) if invert else M
    d = len(A)
    v = tuple(1 for _ in range(d))
    prev = None
    with mp.workprec(prec + 16):
        for it in range(2000):
            v = _exact.mat_vec(A, v)
            if it % 4 == 3:
                sup = max(abs(x) for x in v)
                cur = tuple(mpf(x) / int(sup) for x in v)
                if prev is not None:
                    gap = max(abs(a - b) for a, b in zip(cur, prev))
                    if gap < mpf(2) ** (-(prec + 4)):
                        return cur
                prev = cur
                # renormalize to keep integer growth in check
                g = 0
                for x in v:
                    g = math.gcd(g, abs(x))
                if g > 1:
                    v = tuple(x // g for x in v)
    raise HypothesisError("power iteration did not settle; matrix may not be hyperbolic")


@dataclass(frozen=True)
class SpectralSplit:
    unstable: tuple
    central: tuple
    stable: tuple
    coeffs: tuple
    basis: tuple


def split_vector(loop, x, prec=None):
    """Decompose x along the expanding / fixed / contracting spaces of a
    loop's period matrix.  Components are mpf tuples summing to x."""
    prec = prec or mp.prec
    M = cocycle_product(loop, 0, len(loop)) if isinstance(loop, CombinatoricsSequence) else loop
    d = len(M)
    u = _power_direction(M, prec)
    s = _power_direction(M, prec, invert=True)
    c_basis = [tuple(to_mpf(v) for v in b) for b in _exact.nullspace(
        _exact.mat_sub(M, _exact.identity(d))
    )]
    cols = [u] + c_basis + [s]
    if len(cols) != d:
        raise HypothesisError(
            f"splitting spans {len(cols)} of {d} dimensions; period matrix "
            "is not hyperbolic-plus-fixed"
        )
    with mp.workprec(prec + 16):
        A = mp.matrix(d, d)
        for j, col in enumerate(cols):
            for i in range(d):
                A[i, j] = col[i]
        rhs = mp.matrix([to_mpf(v) for v in x])
        coeffs = mp.lu_solve(A, rhs)
        unst = tuple(coeffs[0] * u[i] for i in range(d))
        stab = tuple(coeffs[d - 1] * s[i] for i in range(d))
        cent = tuple(
            sum(coeffs[1 + j] * c_basis[j][i] for j in range(len(c_basis)))
            if c_basis else mpf(0)
            for i in range(d)
        )
    return SpectralSplit(unst, cent, stab, tuple(coeffs), tuple(cols))


@dataclass(frozen=True)
class QuasiIsometryReport:
    width: int
    positive_fraction: float
    max_band: float


def quasi_isometry_band(seq, width):
    """Sliding-window positivity and entry-ratio band of window products.

    For combinatorics that recycle every letter within k steps, products
    over windows of width about k(2d-3) should be strictly positive with a
    bounded ratio between largest and smallest entry.
    """
    N = len(seq)
    if width > N:
        raise GietError("window wider than the sequence")
    pos = 0
    band = 0.0
    total = 0
    for a in range(0, N - width + 1):
        Q = cocycle_product(seq, a, a + width)
        entries = [e for row in Q for e in row]
        total += 1
        if min(entries) > 0:
            pos += 1
            band = max(band, max(entries) / min(entries))
    return QuasiIsometryReport(width, pos / total, band)
