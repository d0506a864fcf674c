"""Named example maps used by the CLI and the test suite.

Every constructor honors the ambient mpmath precision and is cached per
(name, precision).  The affine seeds are built on explicitly chosen
periodic itineraries with slope vectors inside the central + stable span
of the period cocycle, so their renormalization stays on the periodic
orbit as long as the length chain was resolved (tolerance 1e-60 buys
roughly a hundred faithful steps; projective length errors grow like the
condition number of the period matrix per period, much faster than the
Perron root alone).

brisk family   loop (1,0,1,0,1,0) on ABC/CAB, Perron root 3 + 2 sqrt(2),
               central vector (1,-1,1), stable (sqrt2-1, sqrt2-1, -1).
steady family  loop (0,1,0,1,0) on ABC/CAB, Perron root 2 + sqrt(3),
               central vector (0,-2,1), stable (sqrt3-1, sqrt3-1, -1);
               not k-bounded for any small k (letter coverage fails), so
               it exercises the negative paths of model extraction.
golden family  two letters, rotation by 1/phi; the moebius variant keeps
               the exact rotation lengths but bends each branch, giving a
               genuinely nonlinear example outside the affine-model class.
bump map       the cyclic three-exchange at the self-similar length vector
               of the brisk loop, with small endpoint-fixing cubic bumps
               of zero mean nonlinearity.  Deep renormalization composes
               bump branches into trees and is much slower than the other
               examples, so it is not part of BUILTIN_MAPS; fetch it with
               builtin("bump").
"""

from mpmath import mp, mpf, sqrt

from .affine import affine_model_lengths, build_affine
from .branches import CircleDiffeo
from .combinatorics import CombinatorialData, CombinatoricsSequence
from .errors import GietError
from .giem import build_giem, conjugate

GOLDEN_PI = CombinatorialData(("A", "B"), ("A", "B"), ("B", "A"))
CYCLIC3_PI = CombinatorialData(("A", "B", "C"), ("A", "B", "C"), ("C", "A", "B"))

BRISK_EPS = (1, 0, 1, 0, 1, 0)
STEADY_EPS = (0, 1, 0, 1, 0)

_CHAIN_TOL_EXP = -60
_cache = {}


def _cached(name, make):
    key = (name, mp.prec)
    if key not in _cache:
        _cache[key] = make()
    return _cache[key]


def _seed(eps, repeats, central, stable_root, c, s):
    seq = CombinatoricsSequence.from_eps(CYCLIC3_PI, list(eps) * repeats)
    r = sqrt(stable_root)
    stable = (r - 1, r - 1, mpf(-1))
    omega = {
        a: mpf(c) * u + mpf(s) * v
        for a, u, v in zip(CYCLIC3_PI.alphabet, central, stable)
    }
    chain = affine_model_lengths(seq, omega, tol=mpf(10) ** _CHAIN_TOL_EXP)
    return build_affine(CYCLIC3_PI, chain.lengths, omega, rescale=True)


def brisk_seed():
    """Piecewise-affine map locked onto the brisk loop for ~100 steps."""
    return _cached("brisk-seed", lambda: _seed(BRISK_EPS, 100, (1, -1, 1), 2, "0.15", "0.05"))


def steady_seed():
    """Piecewise-affine map locked onto the steady loop for ~60 steps."""
    return _cached("steady-seed", lambda: _seed(STEADY_EPS, 120, (0, -2, 1), 3, "0.12", "0.04"))


# Conjugating diffeomorphisms.  Small amplitudes keep the conjugates close
# to their seeds, so boundary-ratio estimates settle well before the depth
# the seeds can track.
def _h1():
    return CircleDiffeo([(1, "0.05", "0.3")])


def _h2():
    return CircleDiffeo([(1, "0.045", "-0.2"), (2, "0.01", "0.9")])


def _h3():
    return CircleDiffeo([(1, "0.04", "1.1")])


def brisk_pair():
    """Two smooth conjugates of the brisk seed; conjugate to each other."""
    def make():
        base = brisk_seed().to_giem()
        return (
            conjugate(base, _h1(), label="brisk-f"),
            conjugate(base, _h2(), label="brisk-g"),
        )
    return _cached("brisk-pair", make)


def steady_conjugate():
    return _cached(
        "steady-f",
        lambda: conjugate(steady_seed().to_giem(), _h3(), label="steady-f"),
    )


def golden_iet():
    """Rotation by 1/phi as a two-letter exchange, exact lengths."""
    def make():
        phi = (1 + sqrt(5)) / 2
        lengths = {"A": 2 - phi, "B": phi - 1}
        spec = {"A": {"family": "affine"}, "B": {"family": "affine"}}
        return build_giem(GOLDEN_PI, lengths, dict(lengths), spec, label="golden")
    return _cached("golden", make)


def golden_moebius():
    """Golden rotation lengths with bent branches; its own itinerary."""
    def make():
        phi = (1 + sqrt(5)) / 2
        lengths = {"A": 2 - phi, "B": phi - 1}
        spec = {
            "A": {"family": "moebius", "params": {"u": "0.08"}},
            "B": {"family": "moebius", "params": {"u": "-0.06"}},
        }
        return build_giem(GOLDEN_PI, lengths, dict(lengths), spec,
                         label="golden-moebius")
    return _cached("golden-moebius", make)


def bump_map():
    """Cyclic three-exchange at the brisk self-similar lengths, with cubic
    bumps on A and C.  The bump sizes are small enough to shadow the brisk
    loop past depth 35 while the transport defect stays measurable."""
    def make():
        r2 = sqrt(2)
        lengths = {"A": (r2 - 1) / 2, "B": mpf(1) / 2, "C": (2 - r2) / 2}
        spec = {
            "A": {"family": "perturbed-affine",
                  "params": {"eps": "1e-4", "beta": -2}},
            "B": {"family": "affine"},
            "C": {"family": "perturbed-affine",
                  "params": {"eps": "2e-4", "beta": -2}},
        }
        return build_giem(CYCLIC3_PI, lengths, dict(lengths), spec, label="bump")
    return _cached("bump", make)


def _registry():
    pair = brisk_pair()
    return {
        "golden": golden_iet(),
        "golden-moebius": golden_moebius(),
        "brisk-seed": brisk_seed().to_giem(),
        "brisk-f": pair[0],
        "brisk-g": pair[1],
        "steady-seed": steady_seed().to_giem(),
        "steady-f": steady_conjugate(),
    }


class _Registry:
    """Mapping view over the named examples, built lazily per precision."""

    def keys(self):
        return _registry().keys()

    def items(self):
        return _registry().items()

    def __iter__(self):
        return iter(_registry())

    def __getitem__(self, name):
        return _registry()[name]

    def __contains__(self, name):
        return name in _registry()

    def __len__(self):
        return len(_registry())


BUILTIN_MAPS = _Registry()


def builtin(name):
    """Look up a named example; includes the slow bump map."""
    reg = _registry()
    if name in reg:
        return reg[name]
    if name == "bump":
        return bump_map()
    raise GietError(
        f"unknown builtin {name!r}; have {sorted(reg)} and 'bump'"
    )
