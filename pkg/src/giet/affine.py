"""Affine interval exchange maps, length-transfer chains, and model
extraction.

The slope vector of an affine map evolves under induction by the same
integer matrices as the height cocycle, while lengths pull back through
slope-weighted transfer matrices.  Running those transfer chains backward
from a deep level contracts the positive cone in the Hilbert projective
metric, which is how model length vectors are produced; slope vectors are
read off the per-letter averages of log D of the renormalized map and
pulled back through exact integer inverses.
"""

from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp, mpf, exp, log

from ._num import to_mpf
from ._exact import identity, mat_mul, mat_vec, inverse
from .errors import GietError, HypothesisError, ConvergenceError
from .combinatorics import CombinatorialData, is_k_bounded
from .cocycle import is_genus_one, cocycle_product, stable_space
from .rates import rate_fit
from . import giem as giem_mod


class AffineIem:
    """Affine map: combinatorics, lengths, per-letter log slopes."""

    def __init__(self, pi, lengths, slopes, tol=mpf(10) ** -12):
        self.pi = pi
        letters = pi.alphabet
        if not isinstance(lengths, dict):
            lengths = dict(zip(letters, lengths))
        if not isinstance(slopes, dict):
            slopes = dict(zip(letters, slopes))
        self.lengths = {a: to_mpf(lengths[a]) for a in letters}
        self.slopes = {a: to_mpf(slopes[a]) for a in letters}
        if any(v <= 0 for v in self.lengths.values()):
            raise GietError("lengths must be positive")
        if abs(sum(self.lengths.values()) - 1) > tol:
            raise GietError("lengths must sum to 1")
        img = {a: exp(self.slopes[a]) * self.lengths[a] for a in letters}
        if abs(sum(img.values()) - 1) > tol:
            raise GietError(
                "image lengths exp(slope)*length must sum to 1 "
                f"(off by {mp.nstr(abs(sum(img.values()) - 1), 5)})"
            )
        self.image_lengths = img
        cuts = [mpf(0)]
        for a in pi.top:
            cuts.append(cuts[-1] + self.lengths[a])
        self.cuts = tuple(cuts)
        img_lo = {}
        acc = mpf(0)
        for a in pi.bottom:
            img_lo[a] = acc
            acc += img[a]
        self.img_lo = img_lo

    @property
    def d(self):
        return self.pi.d

    def translation(self, letter):
        i = self.pi.pi0[letter] - 1
        return self.img_lo[letter] - exp(self.slopes[letter]) * self.cuts[i]

    def apply(self, x):
        x = to_mpf(x)
        for i, a in enumerate(self.pi.top):
            if x < self.cuts[i + 1] or i == self.d - 1:
                return exp(self.slopes[a]) * (x - self.cuts[i]) + self.img_lo[a]
        raise GietError(f"{x} outside the domain")

    def to_giem(self, label=""):
        specs = {a: {"family": "affine"} for a in self.pi.alphabet}
        return giem_mod.build_giem(
            self.pi, self.lengths, self.image_lengths, specs, label=label
        )

    def vectors(self):
        """(lengths, slopes) as tuples in alphabet order."""
        return (
            tuple(self.lengths[a] for a in self.pi.alphabet),
            tuple(self.slopes[a] for a in self.pi.alphabet),
        )

    def __repr__(self):
        lam = [mp.nstr(self.lengths[a], 6) for a in self.pi.alphabet]
        om = [mp.nstr(self.slopes[a], 6) for a in self.pi.alphabet]
        return f"AffineIem({self.pi!r}, lengths={lam}, slopes={om})"


def build_affine(pi, lengths, slopes, tol=mpf(10) ** -10, rescale=False):
    """Validated constructor.  With rescale=True the lengths are scaled to
    unit sum and the slopes are shifted by a common constant so the image
    lengths tile; useful when feeding back numerically extracted data."""
    letters = pi.alphabet
    if not isinstance(lengths, dict):
        lengths = dict(zip(letters, lengths))
    if not isinstance(slopes, dict):
        slopes = dict(zip(letters, slopes))
    lengths = {a: to_mpf(lengths[a]) for a in letters}
    slopes = {a: to_mpf(slopes[a]) for a in letters}
    if rescale:
        s = sum(lengths.values())
        lengths = {a: v / s for a, v in lengths.items()}
        shift = log(sum(exp(slopes[a]) * lengths[a] for a in letters))
        slopes = {a: v - shift for a, v in slopes.items()}
    return AffineIem(pi, lengths, slopes, tol=tol)


def slope_update(step, slopes):
    """Slope vector after one induction step: loser gains the winner."""
    new = dict(slopes)
    new[step.loser] = slopes[step.loser] + slopes[step.winner]
    return new


def hilbert_metric(u, v):
    """Projective distance: log of the spread of coordinate ratios."""
    if isinstance(u, dict):
        keys = sorted(u)
        u = [u[k] for k in keys]
        v = [v[k] for k in keys]
    u = [to_mpf(x) for x in u]
    v = [to_mpf(x) for x in v]
    if len(u) != len(v):
        raise GietError("dimension mismatch")
    if any(x <= 0 for x in u) or any(x <= 0 for x in v):
        raise GietError("projective distance needs strictly positive vectors")
    ratios = [x / y for x, y in zip(u, v)]
    return log(max(ratios) / min(ratios))


d_p = hilbert_metric


def t_matrix(step, slope_entry):
    """Length transfer matrix of one step: maps level-(n+1) lengths to
    level-n lengths.  Identity except in the loser column, which carries
    exp(eps * s) on the diagonal and exp((1 - eps) * s) in the winner row,
    where s is the level-n slope of the bottom-last letter."""
    letters = step.pi.alphabet
    idx = {a: i for i, a in enumerate(letters)}
    s = to_mpf(slope_entry)
    d = len(letters)
    rows = [[mpf(1) if i == j else mpf(0) for j in range(d)] for i in range(d)]
    li, wi = idx[step.loser], idx[step.winner]
    rows[li][li] = exp(step.eps * s)
    rows[wi][li] = exp((1 - step.eps) * s)
    return tuple(tuple(r) for r in rows)


def t_nor(step, slope_entry):
    """t_matrix rescaled to unit sup entry; projective iterations only."""
    m = t_matrix(step, slope_entry)
    top = max(max(row) for row in m)
    return tuple(tuple(x / top for x in row) for row in m)


def _mat_mul_mpf(a, b):
    n, k, m = len(a), len(b), len(b[0])
    return tuple(
        tuple(sum(a[i][t] * b[t][j] for t in range(k)) for j in range(m))
        for i in range(n)
    )


def _slope_orbit(seq, omega, depth):
    orbits = [dict(omega)]
    for n in range(depth):
        orbits.append(slope_update(seq[n], orbits[-1]))
    return orbits


@dataclass
class ModelLengths:
    lengths: dict
    depth_used: int
    gap: object
    trace: list
    kappa_windows: list
    window: int


def affine_model_lengths(seq, omega, window=None, tol=mpf(10) ** -12,
                         min_depth=4):
    """Length vector of the affine map with the given slope vector whose
    induction realizes the sequence: backward transfer chains of increasing
    depth, stopped when the projective gap between successive depths falls
    below tol.

    The trace rows are (depth, gap, kappa_window, normalization_residual)
    with kappa_window filled at window boundaries: the ratio of projective
    diameters across one window of length k(2d-3).
    """
    pi = seq.start
    d = pi.d
    letters = pi.alphabet
    if window is None:
        kmin = next((k for k in range(2, 12) if is_k_bounded(seq, k)), None)
        window = (kmin or 2) * (2 * d - 3)
    max_depth = len(seq)
    if max_depth < min_depth:
        raise GietError("sequence too short for a model-length chain")
    if not isinstance(omega, dict):
        omega = dict(zip(letters, omega))
    orbit = _slope_orbit(seq, omega, max_depth)

    prod = tuple(tuple(mpf(1) if i == j else mpf(0) for j in range(d))
                 for i in range(d))
    ones = tuple(mpf(1) for _ in range(d))
    prev = None
    trace = []
    kappas = []
    gaps_at_windows = {}
    result = None
    for m in range(1, max_depth + 1):
        step = seq[m - 1]
        entry = orbit[m - 1][step.pi.bottom_last()]
        prod = _mat_mul_mpf(prod, t_nor(step, entry))
        v = [sum(prod[i][j] for j in range(d)) for i in range(d)]
        s = sum(v)
        v = tuple(x / s for x in v)
        gap = hilbert_metric(v, prev) if prev is not None else mpf(1)
        prev = v
        resid = abs(sum(exp(omega[a]) * v[i] for i, a in enumerate(letters)) - 1)
        kap = None
        if m % window == 0:
            gaps_at_windows[m] = gap
            if m - window in gaps_at_windows and gaps_at_windows[m - window] > 0:
                kap = gaps_at_windows[m] / gaps_at_windows[m - window]
                kappas.append(kap)
        trace.append((m, gap, kap, resid))
        if len(kappas) >= 3 and all(k >= 1 for k in kappas[-3:]):
            raise ConvergenceError(
                "projective diameters failed to contract over three "
                "consecutive windows"
            )
        if m >= min_depth and gap < tol:
            result = (v, m, gap)
            break
    if result is None:
        result = (prev, max_depth, trace[-1][1])
        if result[2] > tol:
            raise ConvergenceError(
                f"model-length chain did not reach gap {mp.nstr(tol, 3)} "
                f"within {max_depth} steps (gap {mp.nstr(result[2], 3)}); "
                "provide a longer sequence"
            )
    v, depth_used, gap = result
    lengths = {a: v[i] for i, a in enumerate(letters)}
    return ModelLengths(lengths=lengths, depth_used=depth_used, gap=gap,
                        trace=trace, kappa_windows=kappas, window=window)


def transport_residuals(history, lo, hi, method="auto"):
    """Sup-norm residuals of the per-letter log-derivative averages as a
    pseudo-orbit of the slope cocycle: r_n = ||L^{n+1} - Theta_n L^n||."""
    from .cocycle import theta_matrix

    letters = history[0].pi.alphabet
    if hi >= len(history):
        raise GietError("history too short for the requested range")
    seq = history[-1].seq()
    Ls = {n: giem_mod.mean_log_derivative(history[n], method=method)
          for n in range(lo, hi + 1)}
    out = []
    for n in range(lo, hi):
        th = theta_matrix(seq[n])
        cur = [Ls[n][a] for a in letters]
        nxt = [Ls[n + 1][a] for a in letters]
        pred = [sum(th[i][j] * cur[j] for j in range(len(letters)))
                for i in range(len(letters))]
        out.append(max(abs(x - y) for x, y in zip(nxt, pred)))
    return out


@dataclass
class ExtractionResult:
    omega: dict
    depth_used: int
    k: int
    increments: list
    checkpoints: list


def extract_slope_vector(f, depth=100, history=None, k_max=10,
                         nonlinearity_tol=mpf(10) ** -10):
    """Slope vector of the affine model: per-letter averages of log D at a
    deep level, pulled back through the exact inverse of the integer slope
    cocycle.

    Hypotheses checked: genus one, zero mean nonlinearity, k-bounded
    realized combinatorics.  For d=2 the model slope is zero (rotation).
    The pullback recovers the unstable and central components of the slope
    data; the stable component is exact for affine input and is otherwise
    pinned down later by the break normalization of the strong model.
    """
    if isinstance(f, giem_mod.Giem):
        if not is_genus_one(f.pi):
            raise HypothesisError("slope extraction needs genus one")
        mn = giem_mod.mean_nonlinearity(f)
        if abs(mn) > nonlinearity_tol:
            raise HypothesisError(
                f"mean nonlinearity {mp.nstr(mn, 5)} is not zero; the "
                "affine-model hypothesis fails"
            )
        if history is None:
            history = giem_mod.renormalize(f, depth)
    else:
        history = f
    depth = len(history) - 1
    letters = history[0].pi.alphabet
    d = len(letters)
    if d == 2:
        omega = {a: mpf(0) for a in letters}
        return ExtractionResult(omega=omega, depth_used=depth, k=2,
                                increments=[], checkpoints=[])
    seq = history[-1].seq()
    kmin = next((k for k in range(2, k_max + 1) if is_k_bounded(seq, k)), None)
    if kmin is None:
        raise HypothesisError(
            f"realized combinatorics not k-bounded for any k <= {k_max}"
        )

    def pullback(n):
        Ln = giem_mod.mean_log_derivative(history[n])
        Q = cocycle_product(seq, 0, n)
        Qinv = inverse(Q)
        vec = tuple(Ln[a] for a in letters)
        back = mat_vec(tuple(tuple(mpf(x) for x in row) for row in Qinv), vec)
        return {a: back[i] for i, a in enumerate(letters)}

    stride = max(2, depth // 8)
    levels = list(range(max(4, depth - 6 * stride), depth + 1, stride))
    if levels[-1] != depth:
        levels.append(depth)
    checkpoints = [(n, pullback(n)) for n in levels]
    increments = [
        max(abs(b[a] - a_[a]) for a in letters)
        for (_, a_), (_, b) in zip(checkpoints, checkpoints[1:])
    ]
    omega = checkpoints[-1][1]
    return ExtractionResult(omega=omega, depth_used=depth, k=kmin,
                            increments=increments, checkpoints=checkpoints)


def weak_model_family(omega, v_stable, t):
    """Slope vector omega + t * v_stable (the one-parameter family sharing
    unstable and central data)."""
    if not isinstance(omega, dict):
        raise GietError("omega must be a letter-keyed dict")
    if isinstance(v_stable, dict):
        v = v_stable
    else:
        v = dict(zip(sorted(omega), v_stable))
    t = to_mpf(t)
    return {a: omega[a] + t * to_mpf(v[a]) for a in omega}


def _stable_direction(seq):
    direction, _ = stable_space(seq)
    return tuple(to_mpf(x) for x in direction)


def strong_model(f, depth=100, history=None, model_seq=None, details=False):
    """The affine model that additionally matches the derivative break at
    the seam point 0; for piecewise-affine input this returns the input
    map itself (up to rounding).

    `model_seq` extends the realized itinerary for the length chain.  The
    chain wants roughly 95 steps to settle at its default tolerance, which
    maps with expensive branch trees cannot reach directly; when their
    itinerary is eventually periodic, pass the periodic continuation.
    """
    if history is None:
        history = giem_mod.renormalize(f, depth)
    ext = extract_slope_vector(f, depth=depth, history=history)
    realized = history[-1].seq()
    seq = realized if model_seq is None else model_seq
    if seq is not realized and (
        seq.start != realized.start
        or list(seq.eps_list()[: len(realized)]) != list(realized.eps_list())
    ):
        raise HypothesisError("model_seq does not extend the realized itinerary")
    letters = f.pi.alphabet
    bp0 = giem_mod.break_at_zero(f)
    top_first, top_last = f.pi.top[0], f.pi.top[-1]

    vs = _stable_direction(seq)
    vsd = dict(zip(letters, vs))
    denom = vsd[top_last] - vsd[top_first]
    if abs(denom) < mpf(10) ** -20:
        raise HypothesisError(
            "stable direction does not move the seam break; the strong "
            "normalization is degenerate"
        )
    base = ext.omega[top_last] - ext.omega[top_first]
    t0 = (log(bp0) - base) / denom
    omega = weak_model_family(ext.omega, vsd, t0)
    model_len = affine_model_lengths(seq, omega)
    model = build_affine(f.pi, model_len.lengths, omega, rescale=True)
    if details:
        return model, {
            "t0": t0,
            "extraction": ext,
            "model_lengths": model_len,
            "seam_break": bp0,
        }
    return model


def normalization_check(omega, zeta):
    """Residual of the affine tiling identity sum(exp(omega) * zeta) = 1."""
    if isinstance(omega, dict):
        keys = sorted(omega)
        omega = [omega[k] for k in keys]
        zeta = [zeta[k] for k in keys] if isinstance(zeta, dict) else zeta
    return abs(sum(exp(to_mpf(o)) * to_mpf(z) for o, z in zip(omega, zeta)) - 1)


def invariant_masses(g, n_iter=1_000_000, x0=0.5):
    """Birkhoff frequencies of the letter itinerary of one float64 orbit,
    with a convergence gap estimated from the second half of the orbit.
    Statistical accuracy ~ 1/sqrt(n_iter); meant for soft cross-checks."""
    if isinstance(g, AffineIem):
        pi = g.pi
        cuts = [float(c) for c in g.cuts]
        slopes = [float(exp(g.slopes[a])) for a in pi.top]
        offs = [float(g.translation(a)) for a in pi.top]
    else:
        pi = g.pi
        cuts = [float(c) for c in g.cuts]
        slopes = None
    from bisect import bisect_right

    counts_full = {a: 0 for a in pi.alphabet}
    counts_half = {a: 0 for a in pi.alphabet}
    x = float(x0)
    half = n_iter // 2
    for i in range(n_iter):
        j = min(bisect_right(cuts, x) - 1, pi.d - 1)
        a = pi.top[j]
        counts_full[a] += 1
        if i >= half:
            counts_half[a] += 1
        if slopes is not None:
            x = slopes[j] * x + offs[j]
        else:
            x = float(g.apply(x))
        if not 0 <= x < 1:
            x = min(max(x, 0.0), 1.0 - 1e-15)
    masses = {a: counts_full[a] / n_iter for a in pi.alphabet}
    second = {a: counts_half[a] / (n_iter - half) for a in pi.alphabet}
    gap = max(abs(masses[a] - second[a]) for a in pi.alphabet)
    return masses, gap
