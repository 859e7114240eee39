"""Prime-field short-Weierstrass kernel: group law, square roots, point counts.

Points are affine tuples (x, y) with None for the point at infinity.  The
group order is found by enumeration below the naive/BSGS crossover and by a
Shanks-Mestre interval search above it; every order returned is certified
(unique candidate in the Hasse interval), never guessed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from math import gcd, isqrt

from cycloscan.arith import factorize, prime_factors

# BSGS disambiguation via the quadratic twist is guaranteed to terminate for
# p > 457; keep the enumeration crossover safely above that.  The default
# reflects measured constant factors of this implementation, not correctness.
DEFAULT_CROSSOVER = 1000


class KernelFault(RuntimeError):
    """Internal arithmetic fault (Hasse violation, failed certification)."""


Point = "tuple[int, int] | None"


@dataclass(frozen=True)
class BadReduction:
    p: int


@dataclass(frozen=True)
class CurveSpec:
    """A rational curve y^2 = x^3 + a4*x + a6 plus user-supplied metadata.

    conductor, cm_disc, serre_primes and b_constant are arithmetic inputs,
    not derived here; bad_primes defaults to the primes dividing the model
    discriminant -16(4*a4^3 + 27*a6^2) (always includes 2).  Excluding a
    finite superset of the primes of bad reduction changes no density and is
    disclosed in reports.
    """

    a4: int
    a6: int
    label: str = ""
    conductor: int = 0
    bad_primes: frozenset[int] = field(default_factory=frozenset)
    cm_disc: int | None = None
    serre_primes: frozenset[int] | None = None
    b_constant: int | None = None

    def __post_init__(self):
        core = 4 * self.a4**3 + 27 * self.a6**2
        if core == 0:
            raise ValueError("singular model: 4*a4^3 + 27*a6^2 = 0")
        if not self.bad_primes:
            bad = frozenset(prime_factors(abs(core))) | {2}
            object.__setattr__(self, "bad_primes", bad)
        if self.conductor:
            missing = [p for p in prime_factors(self.conductor) if p not in self.bad_primes]
            if missing:
                raise ValueError(f"conductor primes {missing} not in bad_primes")

    @property
    def discriminant(self) -> int:
        return -16 * (4 * self.a4**3 + 27 * self.a6**2)

    @property
    def a_serre(self) -> int:
        """A(E) = 2*3*5 * prod of the exceptional primes outside {2,3,5}."""
        extra = 1
        for ell in sorted(self.serre_primes or ()):
            if ell not in (2, 3, 5):
                extra *= ell
        return 30 * extra

    @property
    def m_serre(self) -> int:
        """M_E: the radical of A(E) * N_E (squarefree by construction)."""
        return _radical(self.a_serre * max(self.conductor, 1))

    def is_good(self, p: int) -> bool:
        return p not in self.bad_primes


def _radical(n: int) -> int:
    r = 1
    for p in prime_factors(n):
        r *= p
    return r


@dataclass(frozen=True)
class ReducedCurve:
    """y^2 = x^3 + a*x + b over F_p (p an odd prime, p not dividing disc)."""

    p: int
    a: int
    b: int

    def rhs(self, x: int) -> int:
        return (x * x % self.p * x + self.a * x + self.b) % self.p

    def is_on(self, P) -> bool:
        if P is None:
            return True
        x, y = P
        return y * y % self.p == self.rhs(x)


def reduce_curve(spec: CurveSpec, p: int):
    """Reduce mod p, or return a BadReduction marker for p in bad_primes."""
    if not spec.is_good(p):
        return BadReduction(p)
    return ReducedCurve(p, spec.a4 % p, spec.a6 % p)


def quadratic_twist(curve: ReducedCurve, d: int) -> ReducedCurve:
    """Twist by d (a non-residue for the genuine twist): y^2 = x^3 + a d^2 x + b d^3."""
    p = curve.p
    return ReducedCurve(p, curve.a * d % p * d % p, curve.b * pow(d, 3, p) % p)


# group law ------------------------------------------------------------------


def ec_neg(P, p: int):
    if P is None:
        return None
    return (P[0], (-P[1]) % p)


def ec_add(P, Q, a: int, p: int):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        lam = (3 * x1 * x1 + a) * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return (x3, (lam * (x1 - x3) - y1) % p)


def ec_double(P, a: int, p: int):
    return ec_add(P, P, a, p)


def scalar_mul(k: int, P, a: int, p: int):
    if P is None or k == 0:
        return None
    if k < 0:
        k, P = -k, ec_neg(P, p)
    R = None
    while k:
        if k & 1:
            R = ec_add(R, P, a, p)
        k >>= 1
        if k:
            P = ec_add(P, P, a, p)
    return R


# quadratic residues ----------------------------------------------------------


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a|p) by Euler's criterion; p an odd prime."""
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) >> 1, p) == 1 else -1


def sqrt_mod(a: int, p: int):
    """A square root of a mod p (Tonelli-Shanks), or None if a is a non-residue."""
    a %= p
    if a == 0:
        return 0
    if legendre(a, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) >> 2, p)
    # p = 1 (mod 4): full Tonelli-Shanks
    q, s = p - 1, 0
    while q % 2 == 0:
        q >>= 1
        s += 1
    z = 2
    while legendre(z, p) != -1:
        z += 1
    c = pow(z, q, p)
    x = pow(a, (q + 1) >> 1, p)
    t = pow(a, q, p)
    m = s
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        x = x * b % p
        c = b * b % p
        t = t * c % p
        m = i
    return x


def random_point(curve: ReducedCurve, rng: random.Random):
    """A uniformly-ish random affine point (never the identity)."""
    p = curve.p
    while True:
        x = rng.randrange(p)
        fx = curve.rhs(x)
        if fx == 0:
            return (x, 0)
        if legendre(fx, p) == 1:
            y = sqrt_mod(fx, p)
            return (x, y if rng.getrandbits(1) else p - y)


# point counting ---------------------------------------------------------------


def point_count_naive(curve: ReducedCurve) -> int:
    """|E(F_p)| by direct enumeration, O(p).  Intended for p below the crossover."""
    p, a, b = curve.p, curve.a, curve.b
    sq = bytearray(p)
    for y in range(p):
        sq[y * y % p] += 1
    n = 1
    for x in range(p):
        n += sq[(x * x % p * x + a * x + b) % p]
    if abs(p + 1 - n) > isqrt(4 * p):
        raise KernelFault(f"Hasse violation at p={p}: n={n}")
    return n


def _order_from_multiple(M: int, P, a: int, p: int) -> int:
    """Exact order of P given a multiple M of it (M*P = O)."""
    o = M
    for ell, e in factorize(M).factors:
        for _ in range(e):
            if o % ell == 0 and scalar_mul(o // ell, P, a, p) is None:
                o //= ell
            else:
                break
    return o


def _bsgs_annihilators(curve: ReducedCurve, P, lo: int, width: int):
    """All n in [lo, lo+width] with n*P = O (baby-step giant-step).

    Returns (candidates, order_hint): order_hint is the exact order of P when
    the baby chain closed early, else None.
    """
    p, a = curve.p, curve.a
    m = isqrt(width) + 1
    baby = {}
    R = None  # j*P
    for j in range(m):
        if R is None and j > 0:
            # chain closed: ord(P) = j, enumerate multiples directly
            o = j
            first = lo + (-lo) % o
            return list(range(first, lo + width + 1, o)), o
        baby[R] = j
        R = ec_add(R, P, a, p)
    G = ec_neg(scalar_mul(m, P, a, p), p)  # -m*P
    W = ec_neg(scalar_mul(lo, P, a, p), p)  # target: k*P = -lo*P
    hits = []
    S = W
    for i in range(width // m + 2):
        j = baby.get(S)
        if j is not None:
            k = i * m + j
            if k <= width:
                hits.append(lo + k)
        S = ec_add(S, G, a, p)
    return sorted(hits), None


def _certified_order_candidates(curve: ReducedCurve, rng, lo: int, width: int, tries: int):
    """Narrow the group-order candidates in [lo, lo+width] using random points.

    Returns the list of multiples of lcm(ord(P_i)) in the interval (length 1
    means certified).
    """
    p, a = curve.p, curve.a
    L = 1
    cands = None
    for _ in range(tries):
        P = random_point(curve, rng)
        hits, order_hint = _bsgs_annihilators(curve, P, lo, width)
        if len(hits) == 1:
            return hits
        o = order_hint if order_hint else _order_from_multiple(hits[0], P, a, p)
        L = L * o // gcd(L, o)
        first = lo + (-lo) % L
        cands = list(range(first, lo + width + 1, L))
        if len(cands) == 1:
            return cands
    return cands if cands is not None else []


def point_count_bsgs(curve: ReducedCurve, rng: random.Random | None = None) -> int:
    """|E(F_p)| as the unique certified order in the Hasse interval.

    Shanks-Mestre: interval search from random points, with quadratic-twist
    disambiguation (n + n_twist = 2p + 2) when a single curve's points do not
    pin the order.  Raises KernelFault rather than returning a guess.
    """
    p = curve.p
    if rng is None:
        rng = random.Random(p)
    T = isqrt(4 * p)
    lo, width = p + 1 - T, 2 * T
    cands = _certified_order_candidates(curve, rng, lo, width, tries=6)
    if len(cands) == 1:
        n = cands[0]
    else:
        d = 2
        while legendre(d, p) != -1:
            d += 1
        twist = quadratic_twist(curve, d)
        tw_cands = _certified_order_candidates(twist, rng, lo, width, tries=40)
        joint = [n for n in cands if (2 * p + 2 - n) in tw_cands]
        if len(joint) != 1:
            raise KernelFault(f"order ambiguity not resolved at p={p}: {joint}")
        n = joint[0]
    if abs(p + 1 - n) > T:
        raise KernelFault(f"Hasse violation at p={p}: n={n}")
    return n


def point_count(curve: ReducedCurve, rng: random.Random | None = None,
                crossover: int = DEFAULT_CROSSOVER) -> int:
    """Group order via enumeration below the crossover, BSGS above."""
    if curve.p <= crossover:
        return point_count_naive(curve)
    return point_count_bsgs(curve, rng)
