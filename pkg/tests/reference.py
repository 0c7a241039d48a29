"""Independent reference computations used to derive frozen test values.

Nothing here imports the package under test. Polynomials are coefficient
lists of Fractions; 2×2 matrices over Z/p are 4-tuples (row-major); additive
maps of M₂(Z/p) are Z/p-linear, so solution counts of linear (or affine) law
systems come from Gaussian elimination: p^(unknowns − rank).
"""
from __future__ import annotations

import itertools
from fractions import Fraction

# ---------------------------------------------------------------------------
# polynomials over Q (lists, lowest degree first)


def ptrim(a):
    a = [Fraction(c) for c in a]
    while a and a[-1] == 0:
        a.pop()
    return a


def padd(a, b):
    n = max(len(a), len(b))
    return ptrim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def pscale(a, c):
    return ptrim([c * x for x in a])


def psub(a, b):
    return padd(a, pscale(b, -1))


def pmul(a, b):
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return ptrim(out)


def pderiv(a):
    return ptrim([i * a[i] for i in range(1, len(a))])


X = [0, 1]


def vec_act(v, r):
    return [pmul(v[0], r), pmul(v[1], r)]


def vec_add(u, v):
    return [padd(u[0], v[0]), padd(u[1], v[1])]


def vec_sub(u, v):
    return [psub(u[0], v[0]), psub(u[1], v[1])]


# maps from the worked examples (p, q exact)
def d1_ex21(v):
    return [pderiv(v[0]), pderiv(v[1])]


def d2_ex21(v, p=1):
    return [padd(pscale(pderiv(v[0]), p), v[0]), ptrim(v[1])]


def delta2(a, q=1):
    return pscale(pderiv(a), q)


def f2(v, p=1, q=1):
    return [pscale(v[0], Fraction(p, q)), pscale(v[1], Fraction(1, q))]


def gamma_mix(v):
    return [padd(pscale(v[0], 2), pscale(v[1], 3)), ptrim(v[0])]


def composite_witness(m, a, p=1, q=1):
    """(lhs, rhs) of the composite law d1d2(ma) = d1d2(m)a + f1f2(m)·δ1δ2(a)."""
    d12 = lambda v: d1_ex21(d2_ex21(v, p))  # noqa: E731
    lhs = d12(vec_act(m, a))
    rhs = vec_add(vec_act(d12(m), a), vec_act(f2(m, p, q), pderiv(delta2(a, q))))
    return lhs, rhs


def encode_q_poly(a):
    return [[c.numerator, c.denominator] for c in ptrim(a)]


# ---------------------------------------------------------------------------
# 2×2 matrices over Z/p


def mat_all(p):
    return [tuple(t) for t in itertools.product(range(p), repeat=4)]


def mmul(a, b, p):
    return ((a[0] * b[0] + a[1] * b[2]) % p, (a[0] * b[1] + a[1] * b[3]) % p,
            (a[2] * b[0] + a[3] * b[2]) % p, (a[2] * b[1] + a[3] * b[3]) % p)


def madd(a, b, p):
    return tuple((x + y) % p for x, y in zip(a, b))


def msc(a, c, p):
    return tuple((c * x) % p for x in a)


def center_size(p):
    els = mat_all(p)
    return sum(1 for z in els if all(mmul(z, a, p) == mmul(a, z, p) for a in els))


def unit(i, p):
    e = [0, 0, 0, 0]
    e[i] = 1
    return tuple(e)


BASIS = range(4)  # E11, E12, E21, E22


def apply_linear(Dm, x, p):
    """Linear map with matrix Dm (Dm[k] = image of basis k) at x."""
    out = (0, 0, 0, 0)
    for k in BASIS:
        out = madd(out, msc(Dm[k], x[k], p), p)
    return out


def rank_mod_p(rows, p):
    rows = [list(r) for r in rows]
    rank, ncols = 0, len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c] % p), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][c], -1, p)
        rows[rank] = [(v * inv) % p for v in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][c] % p:
                fac = rows[i][c]
                rows[i] = [(v - fac * w) % p for v, w in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def _linear_form(fn, p):
    """fn(Dm) -> matrix, linear in Dm; returns (coefficient rows, constants)
    so that fn(Dm) == 0 iff rows · u == consts for every entry."""
    zero = [(0, 0, 0, 0)] * 4
    const = fn(zero)
    rows = []
    for l in range(4):
        row = []
        for u in range(16):
            Dm = [list(z) for z in zero]
            Dm[u // 4][u % 4] = 1
            val = fn([tuple(r) for r in Dm])
            row.append((val[l] - const[l]) % p)
        rows.append(row)
    return rows, [(-c) % p for c in const]


def count_solutions(conditions, p):
    """Number of linear maps Dm satisfying every affine condition fn(Dm) == 0."""
    A, b = [], []
    for fn in conditions:
        rows, consts = _linear_form(fn, p)
        A.extend(rows)
        b.extend(consts)
    r = rank_mod_p(A, p)
    r_aug = rank_mod_p([row + [c] for row, c in zip(A, b)], p)
    if r_aug > r:
        return 0
    return p ** (16 - r)


def inner(B, p):
    return lambda x: madd(mmul(B, x, p), msc(mmul(x, B, p), p - 1, p), p)


def count_derivations(p):
    conds = []
    for a in map(unit, BASIS, [p] * 4):
        for b in map(unit, BASIS, [p] * 4):
            conds.append(lambda Dm, a=a, b=b: madd(apply_linear(Dm, mmul(a, b, p), p),
                                                   msc(madd(mmul(apply_linear(Dm, a, p), b, p),
                                                            mmul(a, apply_linear(Dm, b, p), p), p), p - 1, p), p))
    return count_solutions(conds, p)


def count_df(delta, fscale, p):
    """d(xa) = d(x)a + f(x)δ(a), f = scalar multiplication, over basis pairs."""
    conds = []
    E = [unit(k, p) for k in BASIS]
    for x in E:
        for a in E:
            conds.append(lambda Dm, x=x, a=a: madd(
                apply_linear(Dm, mmul(x, a, p), p),
                msc(madd(mmul(apply_linear(Dm, x, p), a, p), mmul(msc(x, fscale, p), delta(a), p), p), p - 1, p),
                p))
    return count_solutions(conds, p)


def count_jordan(delta, fscale, p):
    """D(x²) = D(x)x + f(x)δ(x) for every x (quadratic in x, linear in D)."""
    conds = []
    for x in mat_all(p):
        conds.append(lambda Dm, x=x: madd(
            apply_linear(Dm, mmul(x, x, p), p),
            msc(madd(mmul(apply_linear(Dm, x, p), x, p), mmul(msc(x, fscale, p), delta(x), p), p), p - 1, p), p))
    return count_solutions(conds, p)


def count_action_law(delta, fscale, p):
    """D(x•y) = D(x)•y + f(x)•δ(y) over basis pairs (bilinear in x, y)."""
    E = [unit(k, p) for k in BASIS]
    jp = lambda a, b: madd(mmul(a, b, p), mmul(b, a, p), p)  # noqa: E731
    conds = []
    for x in E:
        for y in E:
            conds.append(lambda Dm, x=x, y=y: madd(
                apply_linear(Dm, jp(x, y), p),
                msc(madd(jp(apply_linear(Dm, x, p), y), jp(msc(x, fscale, p), delta(y)), p), p - 1, p), p))
    return count_solutions(conds, p)


def count_module_homs(p, bimodule=False):
    E = [unit(k, p) for k in BASIS]
    conds = []
    for x in E:
        for a in E:
            conds.append(lambda Dm, x=x, a=a: madd(apply_linear(Dm, mmul(x, a, p), p),
                                                   msc(mmul(apply_linear(Dm, x, p), a, p), p - 1, p), p))
            if bimodule:
                conds.append(lambda Dm, x=x, a=a: madd(apply_linear(Dm, mmul(a, x, p), p),
                                                       msc(mmul(a, apply_linear(Dm, x, p), p), p - 1, p), p))
    return count_solutions(conds, p)


def is_prime_ring_zn(n):
    """(witness or None) for x·r·y = 0 ∀r with x, y nonzero in Z/n."""
    for x in range(1, n):
        for y in range(1, n):
            if all((x * r * y) % n == 0 for r in range(n)):
                return (x, y)
    return None


def two_torsion_witness(n):
    return next((m for m in range(1, n) if (2 * m) % n == 0), None)
