"""Truncated evaluation of the conjectural cyclicity and exponent constants.

Two interchangeable backends:

  exact_generic -- closed-form composite-field degrees under full mod-m
    surjectivity (the determinant of the mod-m image is the cyclotomic
    character, so the cyclotomic intersection is the gcd cyclotomic field).
    Only valid for m coprime to the curve's genericity window A; callers pass
    curve=None for the idealized fully-surjective model (window 1).

  empirical -- per-m densities measured from scan records on a holdout range,
    with binomial standard errors.  The measured fraction absorbs both the
    progression conditioning and the fixed-field indicator, so terms are
    scaled by 1/phi(q) to match the exact normalization.

For curves with fully rational 2-torsion the m-th and 2m-th division fields
coincide, so the series is evaluated in cancelling (k, 2k) pairs; partial
sums vanish identically from M >= 2 (the zero-density criterion).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt, sqrt

from cycloscan.arith import euler_phi, factorize, inner_mu_sum, mobius
from cycloscan.curve import CurveSpec


class GenericityError(ValueError):
    """Raised when the closed-form degree is requested outside its window."""


class InsufficientSample(ValueError):
    pass


class BackendInfeasible(ValueError):
    def __init__(self, kind, ms):
        self.infeasible_ms = ms
        super().__init__(f"{kind}: exact backend infeasible for m in {ms}")


def gl2_order(m: int) -> int:
    """|GL_2(Z/mZ)| = m^4 prod over ell | m of (1 - 1/ell)(1 - 1/ell^2)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    out = 1
    for ell, e in factorize(m).factors:
        out *= ell ** (4 * e - 3) * (ell - 1) * (ell * ell - 1)
    return out


def two_torsion_field_degree(spec: CurveSpec) -> int:
    """[Q(E[2]):Q] in {1, 2, 3, 6} from the factorization of x^3 + a x + b
    over Q (rational roots, then squareness of the cubic discriminant)."""
    a, b = spec.a4, spec.a6
    roots = _integer_cubic_roots(a, b)
    if len(roots) == 3:
        return 1
    if len(roots) == 1:
        return 2
    disc = -4 * a**3 - 27 * b**2
    if disc > 0 and isqrt(disc) ** 2 == disc:
        return 3
    return 6


def has_full_rational_two_torsion(spec: CurveSpec) -> bool:
    return two_torsion_field_degree(spec) == 1


def _integer_cubic_roots(a: int, b: int) -> list[int]:
    """Integer roots of the monic cubic x^3 + a x + b (with multiplicity 1;
    the curves in play are nonsingular so roots are simple)."""
    roots = []
    if b == 0:
        roots.append(0)
    else:
        cands = set()
        d = 1
        while d * d <= abs(b):
            if b % d == 0:
                cands.update((d, -d, b // d, -(b // d)))
            d += 1
        roots.extend(r for r in sorted(cands) if r**3 + a * r + b == 0)
    if roots:
        r = roots[0]
        # remaining quadratic x^2 + r x + (a + r^2)
        disc = -3 * r * r - 4 * a
        if disc >= 0 and isqrt(disc) ** 2 == disc:
            s = isqrt(disc)
            for num in (-r + s, -r - s):
                if num % 2 == 0 and num // 2 != r:
                    roots.append(num // 2)
    return sorted(set(roots))


def generic_degree(m: int, q: int, a: int, a_serre: int | None = None):
    """(degree, gamma) for the composite of the m-division and q-cyclotomic
    fields under full surjectivity:

      degree = |GL_2(Z/m)| * phi(q) / phi(gcd(m, q)),
      gamma  = 1  iff  a = 1 (mod gcd(m, q)).

    When a genericity window a_serre is supplied, m sharing a factor with it
    is refused (the caller must fall back to the empirical backend).
    """
    if m < 1 or q < 1:
        raise ValueError("m and q must be >= 1")
    if a_serre is not None and m > 1 and gcd(m, a_serre) != 1:
        raise GenericityError(f"m={m} shares a factor with the genericity window {a_serre}")
    g = gcd(m, q)
    degree = gl2_order(m) * euler_phi(q) // euler_phi(g)
    gamma = 1 if a % g == 1 % g else 0
    return degree, gamma


def empirical_delta(records, m: int, holdout: tuple[int, int]):
    """(delta_hat, stderr): fraction of holdout-range records with m | d_p.

    holdout is (lo, hi]; requires at least 10^3 records in range.
    """
    lo, hi = holdout
    n = 0
    hits = 0
    for rec in records:
        if lo < rec.p <= hi:
            n += 1
            if rec.dp % m == 0:
                hits += 1
    if n < 1000:
        raise InsufficientSample(f"only {n} records in holdout ({lo}, {hi}]")
    delta = hits / n
    return delta, sqrt(delta * (1.0 - delta) / n)


@dataclass
class DensityTerm:
    m: int
    coefficient: float
    gamma: int | None
    delta: float
    stderr: float
    source: str

    def to_json(self):
        return {
            "m": self.m,
            "coefficient": self.coefficient,
            "gamma": self.gamma,
            "delta": self.delta,
            "stderr": self.stderr,
            "source": self.source,
        }


@dataclass
class DensityEstimate:
    kind: str
    value: float
    truncation: int
    backend: str
    terms: list[DensityTerm] = field(default_factory=list)
    truncation_bound: float = 0.0
    grouping: str = "prefix"

    @property
    def stat_error(self) -> float:
        return sqrt(sum((t.coefficient * t.stderr) ** 2 for t in self.terms))

    def to_json(self):
        return {
            "kind": self.kind,
            "value": self.value,
            "M": self.truncation,
            "backend": self.backend,
            "terms": [t.to_json() for t in self.terms],
            "truncation_bound": self.truncation_bound,
            "grouping": self.grouping,
        }


_TAIL_CUTOFF = 100_000
_tail_suffix: list[float] | None = None


def _phi_tail(M: int) -> float:
    """sum over m > M of 1/phi(m)^2, evaluated to the cutoff plus a safe cap.

    The paper-level tail estimate is sum_{m>X} 1/phi(m)^2 << 1/X; the cutoff
    remainder is covered by 3/cutoff (measured X * tail stays below 2.3).
    """
    global _tail_suffix
    if _tail_suffix is None:
        phi = list(range(_TAIL_CUTOFF + 1))
        for p in range(2, _TAIL_CUTOFF + 1):
            if phi[p] == p:  # p prime
                for k in range(p, _TAIL_CUTOFF + 1, p):
                    phi[k] -= phi[k] // p
        suffix = [0.0] * (_TAIL_CUTOFF + 2)
        for m in range(_TAIL_CUTOFF, 0, -1):
            suffix[m] = suffix[m + 1] + 1.0 / (phi[m] * phi[m])
        _tail_suffix = suffix
    if M >= _TAIL_CUTOFF:
        return 3.0 / M
    return _tail_suffix[M + 1] + 3.0 / _TAIL_CUTOFF


def truncation_bound(M: int) -> float:
    """Envelope for the omitted tail, reported as C/M with C = M * bound."""
    return _phi_tail(M)


def _exact_term_delta(m, q, a, curve):
    """(delta, gamma, source) for the exact backend, or GenericityError.

    curve=None is the idealized fully-surjective model (window 1).  CM curves
    have no GL2-surjective level above 1, so only m = 1 and the rationally
    computable m = 2 division field are exact for them.
    """
    if curve is None:
        degree, gamma = generic_degree(m, q, a, 1)
        return 1.0 / degree, gamma, "exact-generic"
    if curve.cm_disc is None:
        try:
            degree, gamma = generic_degree(m, q, a, curve.a_serre)
            return 1.0 / degree, gamma, "exact-generic"
        except GenericityError:
            pass
    elif m == 1:
        return 1.0 / euler_phi(q), 1, "exact-generic"
    if m == 2:
        deg2 = two_torsion_field_degree(curve)
        if deg2 == 1:
            return 1.0 / euler_phi(q), 1, "exact-2torsion"
        if q == 1:
            return 1.0 / deg2, 1, "exact-2torsion"
    raise GenericityError(f"no exact degree available for m={m}")


def _series(kind, backend, M, q, a, curve, dataset, holdout, weight_fn):
    """Shared assembly for both constants; weight_fn(m) is the signed
    coefficient (mu(m) for cyclicity, the double mu-sum for exponent)."""
    if backend not in ("exact_generic", "empirical", "hybrid"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend in ("empirical", "hybrid") and (dataset is None or holdout is None):
        raise ValueError(f"backend {backend!r} requires dataset and holdout")
    phi_q = euler_phi(q)
    paired = curve is not None and has_full_rational_two_torsion(curve)
    terms: list[DensityTerm] = []
    infeasible: list[int] = []
    value = 0.0

    def emit(m, coeff):
        nonlocal value
        if coeff == 0:
            return
        if backend == "empirical":
            delta, err = empirical_delta(dataset, m, holdout)
            t = DensityTerm(m, coeff / phi_q, None, delta, err, "empirical")
        else:
            try:
                delta, gamma, source = _exact_term_delta(m, q, a, curve)
                t = DensityTerm(m, coeff, gamma, delta, 0.0, source)
            except GenericityError:
                if backend == "exact_generic":
                    infeasible.append(m)
                    return
                delta, err = empirical_delta(dataset, m, holdout)
                t = DensityTerm(m, coeff / phi_q, None, delta, err, "empirical")
        value += t.coefficient * t.delta * (t.gamma if t.gamma is not None else 1)
        terms.append(t)

    if not paired or kind == "exponent":
        for m in range(1, M + 1):
            emit(m, weight_fn(m))
    else:
        # cancelling (k, 2k) pairs: Q(E[2k]) = Q(E[k]) when E[2] is rational,
        # so each complete pair contributes exactly zero.
        if M >= 1:
            emit(1, weight_fn(1))
        if M >= 2:
            emit(2, weight_fn(2))
        for k in range(3, M // 2 + 1, 2):
            ck, c2k = weight_fn(k), weight_fn(2 * k)
            if ck == 0:
                continue
            if backend == "exact_generic":
                terms.append(DensityTerm(k, ck, None, 0.0, 0.0, "paired-cancelled"))
                terms.append(DensityTerm(2 * k, c2k, None, 0.0, 0.0, "paired-cancelled"))
            else:
                emit(k, ck)
                emit(2 * k, c2k)
    if infeasible:
        raise BackendInfeasible(kind, infeasible)
    est = DensityEstimate(
        kind=kind,
        value=value,
        truncation=M,
        backend=backend,
        terms=terms,
        truncation_bound=truncation_bound(M),
        grouping="two-torsion-paired" if (paired and kind == "cyclicity") else "prefix",
    )
    if kind == "cyclicity" and abs(est.value) > 1.0 + 1e-12:
        raise ArithmeticError(f"cyclicity estimate out of range: {est.value}")
    return est


def c_constant(backend: str, M: int, q: int, a: int, curve: CurveSpec | None = None,
               dataset=None, holdout=None) -> DensityEstimate:
    """Truncated cyclicity constant: sum over squarefree m <= M of
    mu(m) * gamma_m * delta_m (delta_m the reciprocal composite degree)."""
    if M < 1:
        raise ValueError("truncation M must be >= 1")
    return _series("cyclicity", backend, M, q, a, curve, dataset, holdout, mobius)


def e_constant(backend: str, M: int, q: int, a: int, curve: CurveSpec | None = None,
               dataset=None, holdout=None, include_mobius_factor: bool = False) -> DensityEstimate:
    """Truncated exponent constant: sum over all m <= M of
    (sum over de | m of mu(d)/e) * gamma_m * delta_m.

    The default follows the derivation (no extra mu(m) factor, all m);
    include_mobius_factor=True evaluates the alternative printed form for
    comparison.  The inner coefficient is the literal double sum, asserted
    against its closed value 1/m.
    """
    if M < 1:
        raise ValueError("truncation M must be >= 1")

    def weight(m: int) -> float:
        w = inner_mu_sum(m)
        if w != Fraction(1, m):
            raise ArithmeticError(f"inner double sum at m={m} is {w}, expected 1/{m}")
        if include_mobius_factor:
            return float(w) * mobius(m)
        return float(w)

    return _series("exponent", backend, M, q, a, curve, dataset, holdout, weight)


def euler_product_gl2(ell_max: int) -> float:
    """Partial product over primes ell <= ell_max of (1 - 1/|GL_2(F_ell)|)."""
    prod = 1.0
    for ell in _primes_upto(ell_max):
        prod *= 1.0 - 1.0 / gl2_order(ell)
    return prod


def euler_product_gl2_mobius(ell_max: int, cutoff: float = 1e-18) -> float:
    """The same partial product, regrouped by inclusion-exclusion: the sum of
    mu(m)/|GL_2(Z/m)| over squarefree m composed of primes <= ell_max, with
    subtrees below the cutoff pruned (their total is below cutoff * count)."""
    primes = _primes_upto(ell_max)
    weights = [1.0 / gl2_order(ell) for ell in primes]
    total = 0.0

    def dfs(i, sign, w):
        nonlocal total
        total += sign * w
        for j in range(i, len(primes)):
            wj = w * weights[j]
            if wj < cutoff:
                break  # weights decrease in j, deeper products only shrink
            dfs(j + 1, -sign, wj)

    dfs(0, 1, 1.0)
    return total


def _primes_upto(n: int) -> list[int]:
    flags = bytearray([1]) * (n + 1)
    out = []
    for i in range(2, n + 1):
        if flags[i]:
            out.append(i)
            flags[i * i :: i] = bytearray(len(flags[i * i :: i]))
    return out
