"""Exact linear algebra over the integers and rationals.

Matrices are tuples of tuples (row major), vectors are tuples.  Everything
here is small (d <= 5-ish, products of a few hundred factors), so plain
Fraction elimination is more than fast enough and keeps the cocycle layer
free of floating point.
"""

from fractions import Fraction


def identity(n):
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def mat_mul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(m)) for j in range(p))
        for i in range(n)
    )


def mat_vec(a, v):
    return tuple(sum(row[k] * v[k] for k in range(len(v))) for row in a)


def transpose(a):
    return tuple(tuple(a[i][j] for i in range(len(a))) for j in range(len(a[0])))


def mat_sub(a, b):
    return tuple(
        tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b)
    )


def _rref(rows):
    """Reduced row echelon form over Fraction.  Returns (rref, pivot cols)."""
    rows = [[Fraction(x) for x in r] for r in rows]
    nrows, ncols = len(rows), len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        pv = rows[r][c]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return rows, pivots


def rank(a):
    return len(_rref(a)[1])


def nullspace(a):
    """Basis of the rational kernel of `a`, as Fraction tuples."""
    rref, pivots = _rref(a)
    ncols = len(a[0])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -rref[r][fc]
        basis.append(tuple(v))
    return basis


def solve(a, b):
    """One exact solution of a x = b, or None when inconsistent."""
    nrows, ncols = len(a), len(a[0])
    aug = [list(a[i]) + [b[i]] for i in range(nrows)]
    rref, pivots = _rref(aug)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for r, pc in enumerate(pivots):
        x[pc] = rref[r][ncols]
    return tuple(x)


def inverse(a):
    """Exact inverse; raises ValueError on singular input.  When the inverse
    is integral (unimodular input) the entries come back as ints."""
    n = len(a)
    aug = [list(a[i]) + [1 if j == i else 0 for j in range(n)] for i in range(n)]
    rref, pivots = _rref(aug)
    if pivots != list(range(n)):
        raise ValueError("matrix is singular")
    inv = []
    for i in range(n):
        row = []
        for j in range(n, 2 * n):
            x = rref[i][j]
            row.append(int(x) if x.denominator == 1 else x)
        inv.append(tuple(row))
    return tuple(inv)


def strictly_feasible(constraints, nvars):
    """Decide whether the open polyhedron {x : c . x + d > 0 for all (c, d)}
    is nonempty, by Fourier-Motzkin elimination over the rationals.

    `constraints` is a list of (coeffs, const) with len(coeffs) == nvars.
    """
    cons = [([Fraction(c) for c in coeffs], Fraction(d)) for coeffs, d in constraints]
    for var in range(nvars - 1, -1, -1):
        pos, neg, rest = [], [], []
        for coeffs, d in cons:
            c = coeffs[var]
            if c > 0:
                pos.append((coeffs, d))
            elif c < 0:
                neg.append((coeffs, d))
            else:
                rest.append((coeffs[:var], d))
        new = list(rest)
        for cp, dp in pos:
            for cn, dn in neg:
                # eliminate: combine with weights |cn[var]| and cp[var]
                wp, wn = -cn[var], cp[var]
                coeffs = [wp * cp[k] + wn * cn[k] for k in range(var)]
                new.append((coeffs, wp * dp + wn * dn))
        cons = [(c, d) for c, d in new]
    return all(d > 0 for _, d in cons)
