"""Dense polynomial arithmetic over F_p and division polynomials.

Coefficient lists are low-to-high and always trimmed.  Sizes stay small
(torsion levels are tiny), so schoolbook multiplication is deliberate.
"""

from __future__ import annotations

import random


def trim(f: list[int]) -> list[int]:
    while f and f[-1] == 0:
        f.pop()
    return f


def add(f, g, p):
    n = max(len(f), len(g))
    out = [0] * n
    for i, c in enumerate(f):
        out[i] = c
    for i, c in enumerate(g):
        out[i] = (out[i] + c) % p
    return trim(out)


def sub(f, g, p):
    n = max(len(f), len(g))
    out = [0] * n
    for i, c in enumerate(f):
        out[i] = c
    for i, c in enumerate(g):
        out[i] = (out[i] - c) % p
    return trim(out)


def mul(f, g, p):
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return trim([c % p for c in out])


def scalar(f, c, p):
    c %= p
    return trim([a * c % p for a in f])


def divmod_poly(f, g, p):
    """(quotient, remainder) of f by g over F_p."""
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    f = list(f)
    dg = len(g) - 1
    inv_lead = pow(g[-1], -1, p)
    q = [0] * max(len(f) - dg, 0)
    while len(f) - 1 >= dg and f:
        k = len(f) - 1 - dg
        c = f[-1] * inv_lead % p
        q[k] = c
        for i, b in enumerate(g):
            f[k + i] = (f[k + i] - c * b) % p
        trim(f)
    return trim(q), f


def mod(f, g, p):
    return divmod_poly(f, g, p)[1]


def divexact(f, g, p):
    q, r = divmod_poly(f, g, p)
    if r:
        raise ArithmeticError("inexact polynomial division")
    return q


def gcd_poly(f, g, p):
    """Monic gcd."""
    while g:
        f, g = g, mod(f, g, p)
    if f:
        f = scalar(f, pow(f[-1], -1, p), p)
    return f


def powmod(base, e: int, m, p):
    """base^e mod m over F_p (square and multiply)."""
    result = [1]
    base = mod(base, m, p)
    while e:
        if e & 1:
            result = mod(mul(result, base, p), m, p)
        e >>= 1
        if e:
            base = mod(mul(base, base, p), m, p)
    return result


def x_pow_p_mod(m, p):
    """x^p mod m over F_p."""
    return powmod([0, 1], p, m, p)


def roots(g, p, rng: random.Random):
    """All roots in F_p of g, assuming g is squarefree and splits completely.

    Callers obtain g as gcd(x^p - x, h), which guarantees both properties.
    Cantor-Zassenhaus equal-degree splitting down to linear factors.
    """
    g = trim(list(g))
    if len(g) <= 1:
        return []
    g = scalar(g, pow(g[-1], -1, p), p)
    out = []
    stack = [g]
    half = (p - 1) >> 1
    while stack:
        h = stack.pop()
        d = len(h) - 1
        if d == 0:
            continue
        if d == 1:
            out.append(-h[0] % p)
            continue
        if h[0] == 0:
            out.append(0)
            stack.append(divexact(h, [0, 1], p))
            continue
        while True:
            c = rng.randrange(p)
            r = powmod([c, 1], half, h, p)
            r = sub(r, [1], p)
            w = gcd_poly(r, h, p)
            if 0 < len(w) - 1 < d:
                stack.append(w)
                stack.append(divexact(h, w, p))
                break
    return sorted(out)


def rational_roots(h, p, rng: random.Random):
    """Roots of an arbitrary h over F_p (distinct roots only)."""
    if len(h) - 1 <= 0:
        return []
    g = gcd_poly(sub(x_pow_p_mod(h, p), [0, 1], p), h, p)
    return roots(g, p, rng)


class DivisionPolynomials:
    """Cached division polynomials for y^2 = x^3 + a x + b over F_p.

    Entry m is a pair (g, parity): psi_m = g(x) * y^parity, with y^2 folded
    into f(x) = x^3 + a x + b.  Odd m have parity 0, even m parity 1.
    """

    def __init__(self, p: int, a: int, b: int):
        self.p = p
        self.f = [b % p, a % p, 0, 1]
        a %= p
        b %= p
        psi3 = trim([(-a * a) % p, 12 * b % p, 6 * a % p, 0, 3 % p])
        psi4 = trim([
            (-32 * b * b - 4 * a**3) % p,
            (-16 * a * b) % p,
            (-20 * a * a) % p,
            80 * b % p,
            20 * a % p,
            0,
            4 % p,
        ])
        self._cache: dict[int, tuple[list[int], int]] = {
            0: ([], 0),
            1: ([1], 0),
            2: ([2 % p], 1),
            3: (psi3, 0),
            4: (psi4, 1),
        }

    def _mul(self, u, v):
        g = mul(u[0], v[0], self.p)
        e = u[1] + v[1]
        if e >= 2:
            g = mul(g, self.f, self.p)
            e -= 2
        return (g, e)

    def _sub(self, u, v):
        if u[1] != v[1]:
            raise ArithmeticError("parity mismatch in division-polynomial recurrence")
        return (sub(u[0], v[0], self.p), u[1])

    def __getitem__(self, m: int) -> tuple[list[int], int]:
        if m not in self._cache:
            k = m // 2
            if m % 2 == 1:
                # psi_{2k+1} = psi_{k+2} psi_k^3 - psi_{k-1} psi_{k+1}^3
                t1 = self._mul(self[k + 2], self._mul(self[k], self._mul(self[k], self[k])))
                t2 = self._mul(self[k - 1], self._mul(self[k + 1], self._mul(self[k + 1], self[k + 1])))
                g, e = self._sub(t1, t2)
                if e:
                    # net parity folds into f; odd psi is a pure x-polynomial
                    g = mul(g, self.f, self.p)
                    e = 0
                self._cache[m] = (g, e)
            else:
                # 2y * psi_{2k} = psi_k (psi_{k+2} psi_{k-1}^2 - psi_{k-2} psi_{k+1}^2)
                t1 = self._mul(self[k + 2], self._mul(self[k - 1], self[k - 1]))
                t2 = self._mul(self[k - 2], self._mul(self[k + 1], self[k + 1]))
                num = self._mul(self[k], self._sub(t1, t2))
                g, e = num
                if e != 0:
                    raise ArithmeticError("even-index recurrence parity fault")
                # num = psi_{2k} * 2y, and psi_{2k} = h*y, so num = 2*h*f
                h = divexact(g, self.f, self.p)
                h = scalar(h, pow(2, -1, self.p), self.p)
                self._cache[m] = (h, 1)
        return self._cache[m]

    def torsion_x_poly(self, m: int) -> tuple[list[int], bool]:
        """(g, include_two_torsion): x-coords of nonzero m-torsion are the
        roots of g, plus the roots of f when the flag is set (even m)."""
        g, parity = self[m]
        return g, parity == 1
