"""Group structure of E(F_p): the invariant pair (d, e) with Z/d + Z/e.

d is computed prime-by-prime over the primes ell dividing gcd(n, p-1); the
ell-exponent of d is certified from two sides: Weil-pairing witnesses give a
lower bound, sampled point orders give an upper bound (alpha <= v - beta),
and the two meet with overwhelming probability within a few samples.  A
division-polynomial point count is the deterministic fallback; the routine
raises rather than returning an uncertified answer.
"""

from __future__ import annotations

import random
from math import gcd, isqrt
from typing import NamedTuple

from cycloscan.arith import factorize, prime_factors
from cycloscan.curve import (
    KernelFault,
    ReducedCurve,
    _order_from_multiple,
    ec_add,
    ec_neg,
    legendre,
    random_point,
    scalar_mul,
    sqrt_mod,
)
from cycloscan.polynomials import DivisionPolynomials, rational_roots

# Division-polynomial counting is the primary route up to this torsion level
# and the fallback cap beyond which certification failure is a hard fault.
DIVPOLY_PRIMARY = 24
DIVPOLY_CAP = 200
SAMPLE_BUDGET = 40


class PrimeRecord(NamedTuple):
    p: int
    ap: int
    n: int
    dp: int
    ep: int


def check_record(rec: PrimeRecord) -> None:
    """Assert every structural invariant of a record; raises KernelFault."""
    p, ap, n, dp, ep = rec
    ok = (
        n == p + 1 - ap
        and dp * ep == n
        and ep % dp == 0
        and (p - 1) % dp == 0
        and n % (dp * dp) == 0
        and abs(ap) <= isqrt(4 * p)
    )
    if not ok:
        raise KernelFault(f"invariant violation in record {rec}")


def _v_adic(n: int, ell: int) -> int:
    v = 0
    while n % ell == 0:
        n //= ell
        v += 1
    return v


# Weil pairing ----------------------------------------------------------------


def _miller(P, m: int, X, a: int, p: int) -> int:
    """f_{m,P}(X) for P of order dividing m; X outside the support of div(f).

    Raises ZeroDivisionError when X hits a line zero; callers resample the
    auxiliary point.
    """
    if X is None:
        raise ZeroDivisionError("evaluation at infinity")
    xq, yq = X
    f = 1
    T = P
    for bit in bin(m)[3:] + "":
        f = f * f % p
        f = f * _line_eval(T, T, X, a, p) % p
        T = ec_add(T, T, a, p)
        f = f * pow(_vertical_eval(T, X, p), -1, p) % p
        if bit == "1":
            f = f * _line_eval(T, P, X, a, p) % p
            T = ec_add(T, P, a, p)
            f = f * pow(_vertical_eval(T, X, p), -1, p) % p
    if f == 0:
        raise ZeroDivisionError("degenerate Miller value")
    return f


def _line_eval(T, U, X, a: int, p: int) -> int:
    """Line through T and U (tangent if equal) evaluated at affine X."""
    xq, yq = X
    if T is None or U is None:
        return _vertical_eval(T if U is None else U, X, p)
    x1, y1 = T
    x2, y2 = U
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return (xq - x1) % p
        lam = (3 * x1 * x1 + a) * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    return (yq - y1 - lam * (xq - x1)) % p


def _vertical_eval(T, X, p: int) -> int:
    if T is None:
        return 1
    return (X[0] - T[0]) % p


def weil_pairing(P, Q, m: int, curve: ReducedCurve, rng: random.Random) -> int:
    """Weil pairing e_m(P, Q) in mu_m(F_p) for P, Q of order dividing m."""
    p, a = curve.p, curve.a
    if P is None or Q is None:
        return 1
    if P == Q or P == ec_neg(Q, p):
        return 1
    for _ in range(64):
        S = random_point(curve, rng)
        try:
            QS = ec_add(Q, S, a, p)
            PmS = ec_add(P, ec_neg(S, p), a, p)
            if QS is None or PmS is None:
                continue
            num = _miller(P, m, QS, a, p) * pow(_miller(P, m, S, a, p), -1, p) % p
            den = _miller(Q, m, PmS, a, p) * pow(_miller(Q, m, ec_neg(S, p), a, p), -1, p) % p
            return num * pow(den, -1, p) % p
        except (ZeroDivisionError, ValueError):
            continue
    raise KernelFault(f"Weil pairing: no nondegenerate auxiliary point at p={p}")


def _mult_order_exponent(w: int, ell: int, cap: int, p: int) -> int:
    """i such that w has order ell^i in F_p^*."""
    i = 0
    while w != 1:
        w = pow(w, ell, p)
        i += 1
        if i > cap:
            raise KernelFault("pairing value order exceeds torsion level")
    return i


# torsion counting (deterministic route) ---------------------------------------


def torsion_point_count(curve: ReducedCurve, m: int, rng: random.Random) -> int:
    """#E[m](F_p) by division-polynomial root counting."""
    p = curve.p
    dp = DivisionPolynomials(p, curve.a, curve.b)
    g, with_two = dp.torsion_x_poly(m)
    count = 1
    if with_two:
        count += len(rational_roots(dp.f, p, rng))
    for x in rational_roots(g, p, rng):
        if legendre(curve.rhs(x), p) == 1:
            count += 2
    return count


def cubic_root_count(curve: ReducedCurve) -> int:
    """Number of roots of x^3 + a x + b over F_p (0, 1, or 3)."""
    from cycloscan.polynomials import gcd_poly, sub, x_pow_p_mod

    p = curve.p
    f = [curve.b % p, curve.a % p, 0, 1]
    g = gcd_poly(sub(x_pow_p_mod(f, p), [0, 1], p), f, p)
    return len(g) - 1


# Sylow analysis ---------------------------------------------------------------


def _ell_order_exponent(P, ell: int, cap: int, a: int, p: int):
    """(b, chain) where ord(P) = ell^b and chain[i] = ell^i * P."""
    chain = [P]
    b = 0
    while chain[-1] is not None:
        chain.append(scalar_mul(ell, chain[-1], a, p))
        b += 1
        if b > cap:
            raise KernelFault("point order exceeds Sylow bound")
    return b, chain


def _sylow_alpha(curve: ReducedCurve, n: int, ell: int, v: int, amax: int,
                 rng: random.Random) -> int:
    """ell-adic valuation of d, certified.

    Writes the ell-Sylow subgroup as Z/ell^alpha + Z/ell^beta (alpha <= beta,
    alpha + beta = v); returns alpha.
    """
    p, a = curve.p, curve.a
    if ell == 2:
        # 2 | n here, so the cubic has at least one root; it splits completely
        # iff Frobenius is trivial on the roots, i.e. the cubic discriminant
        # -(4a^3 + 27b^2) is a square mod p.
        disc3 = (-4 * curve.a**3 - 27 * curve.b**2) % p
        if legendre(disc3, p) != 1:
            return 0
        alpha_lo = 1
        if amax == 1:
            return 1
    else:
        alpha_lo = 0

    level = ell * ell
    if level <= DIVPOLY_PRIMARY and amax == 1 and alpha_lo == 0:
        # cheap deterministic route for the single undecided level
        return 1 if torsion_point_count(curve, ell, rng) == level else 0

    cof = n // ell**v
    beta_lo = 0
    best = None  # (b, point) of maximal sampled ell-order
    for _ in range(SAMPLE_BUDGET):
        hi = min(amax, v - beta_lo)
        if alpha_lo >= hi:
            return alpha_lo
        R = random_point(curve, rng)
        P = scalar_mul(cof, R, a, p)
        b, chain = _ell_order_exponent(P, ell, v, a, p)
        if b > beta_lo:
            beta_lo = b
        hi = min(amax, v - beta_lo)
        if alpha_lo >= hi:
            return alpha_lo
        if b == 0:
            continue
        if best is None:
            best = (b, P, chain)
            continue
        bb, BP, bchain = best
        j = min(b, bb, hi)
        if j > alpha_lo:
            P1 = bchain[bb - j]
            Q1 = chain[b - j]
            w = weil_pairing(P1, Q1, ell**j, curve, rng)
            got = _mult_order_exponent(w, ell, j, p)
            if got > alpha_lo:
                alpha_lo = got
        if b > bb:
            best = (b, P, chain)
    # deterministic fallback: count torsion at each undecided level
    hi = min(amax, v - beta_lo)
    j = alpha_lo
    while j < hi:
        lvl = ell ** (j + 1)
        if lvl > DIVPOLY_CAP:
            raise KernelFault(
                f"Sylow certification failed at p={p}, ell={ell}: "
                f"sampling inconclusive and level {lvl} beyond fallback cap"
            )
        if torsion_point_count(curve, lvl, rng) == lvl * lvl:
            j += 1
        else:
            break
    return j


def group_structure(curve: ReducedCurve, n: int, rng: random.Random | None = None):
    """(d, e) with E(F_p) isomorphic to Z/d + Z/e, d | e and d | p-1."""
    p = curve.p
    if rng is None:
        rng = random.Random(p)
    d = 1
    g = gcd(n, p - 1)
    if g > 1:
        for ell in prime_factors(g):
            v = _v_adic(n, ell)
            amax = min(_v_adic(p - 1, ell), v // 2)
            if amax == 0:
                continue
            alpha = _sylow_alpha(curve, n, ell, v, amax, rng)
            d *= ell**alpha
    return d, n // d


def brute_force_structure(curve: ReducedCurve) -> tuple[int, int]:
    """Independent oracle: enumerate every point of E(F_p), take the group
    exponent as the lcm of point orders, and set d = n / exponent.

    O(p) point construction plus an order computation per point; meant for
    p up to a few thousand.
    """
    p, a = curve.p, curve.a
    pts = []
    for x in range(p):
        fx = curve.rhs(x)
        if fx == 0:
            pts.append((x, 0))
        elif legendre(fx, p) == 1:
            y = sqrt_mod(fx, p)
            pts.append((x, y))
            pts.append((x, p - y))
    n = len(pts) + 1
    expo = 1
    for P in pts:
        o = _order_from_multiple(n, P, a, p)
        expo = expo * o // gcd(expo, o)
        if expo == n:
            break
    return n // expo, expo


def m_torsion_rational(curve: ReducedCurve, m: int, record: PrimeRecord) -> bool:
    """Whether all m-torsion is F_p-rational, i.e. m | d (complete splitting
    of p in the m-division field)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return record.dp % m == 0


def is_cyclic(record: PrimeRecord) -> bool:
    return record.dp == 1
