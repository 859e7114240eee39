"""Numeric evaluation of the error-envelope expressions and residual reports.

Every implied constant in the source estimates is unspecified; all envelopes
here are evaluated as shapes with constant 1 and are compared to observed
residuals through ratios and log-log slopes, never asserted as inequalities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import exp, gcd, log
from typing import Callable, NamedTuple

import numpy as np

from cycloscan.arith import (
    big_H,
    divisors,
    euler_phi,
    log_integral,
    mobius,
    omega,
    prime_factors,
    tau2,
)
from cycloscan.constants import DensityEstimate


@dataclass(frozen=True)
class BoundsInput:
    """Arithmetic inputs to the envelope calculators.

    conductor is N_E; m_serre is the squarefree modulus M_E (radical of
    A(E) * N_E); a_serre is A(E); b_constant is the division-field degree
    slack B_E; siegel_s is the exponent S in L(1, chi) >> (log Q)^{-S}.
    """

    x: float
    q: int = 1
    a: int = 1
    conductor: int = 1
    cm_disc: int | None = None
    m_serre: int = 2
    a_serre: int = 30
    b_constant: int | None = None
    siegel_s: float | None = None

    def __post_init__(self):
        if self.x < 16:
            raise ValueError("x must be >= 16")
        if self.q < 1:
            raise ValueError("q must be >= 1")
        if mobius(self.m_serre) == 0:
            raise ValueError("m_serre must be squarefree")

    @classmethod
    def from_curve(cls, curve, x, q=1, a=1, b_constant=None, siegel_s=None):
        return cls(
            x=x,
            q=q,
            a=a,
            conductor=max(curve.conductor, 1),
            cm_disc=curve.cm_disc,
            m_serre=curve.m_serre,
            a_serre=curve.a_serre,
            b_constant=b_constant if b_constant is not None else curve.b_constant,
            siegel_s=siegel_s,
        )


def q_split(q: int, m_serre: int) -> tuple[int, int]:
    """(q1, q2): q2 is the largest divisor of q coprime to M_E, q1 = q/q2."""
    q2 = q
    g = gcd(q2, m_serre)
    while g > 1:
        q2 //= g
        g = gcd(q2, m_serre)
    return q // q2, q2


def R_E_q1(m_serre: int, q1: int) -> float:
    """sum over d | M_E of phi(gcd(d, q1)) * d^3 / phi(d), exact rational."""
    total = Fraction(0)
    for d in divisors(m_serre):
        total += Fraction(euler_phi(gcd(d, q1)) * d**3, euler_phi(d))
    return float(total)


def G_D_bound(D: int, q: int) -> float:
    """The stated upper bound c * 4^omega(q) * tau2(q) * q^2 (not the exact
    set cardinality), with c = 2 when D = 1, 2 (mod 4) or D = 3 (mod 4) with
    q odd, and c = 49 otherwise."""
    if D < 1:
        raise ValueError("D must be >= 1")
    r = D % 4
    if r in (1, 2) or (r == 3 and q % 2 == 1):
        c = 2
    else:
        c = 49
    return c * 4 ** omega(q) * tau2(q) * q * q


def s_constant(m_serre: int, b_constant: int, d_cap: int = 10**6) -> tuple[float, float]:
    """(S_E truncated at d <= d_cap, tail bound).

    S_E = sum of B_E / (d * phi(d)) over d supported on the primes of M_E;
    the remainder is below B_E * c^2 / d_cap with c = prod ell/(ell-1).
    """
    if b_constant is None:
        raise ValueError("S_E requires the constant B_E")
    primes = prime_factors(m_serre)
    total = Fraction(0)
    stack = [(1, 1, 0)]  # (d, phi(d), index of next prime to consider)
    while stack:
        d, phi_d, i = stack.pop()
        total += Fraction(b_constant, d * phi_d)
        for j in range(i, len(primes)):
            p = primes[j]
            nd, nphi = d * p, phi_d * (p - 1)
            while nd <= d_cap:
                stack.append((nd, nphi, j + 1))
                nd, nphi = nd * p, nphi * p
    c = 1.0
    for p in primes:
        c *= p / (p - 1)
    return float(total), b_constant * c * c / d_cap


# cyclicity envelopes ----------------------------------------------------------


def envelope_cm_grh(inp: BoundsInput) -> float:
    """x^{3/4} (log(q N x))^{1/2} / (log x)^{1/2} + x^{1/4} log N."""
    x, q, N = inp.x, inp.q, inp.conductor
    lqnx = log(q * N * x)
    return x**0.75 * (lqnx / log(x)) ** 0.5 + x**0.25 * log(N)


def envelope_noncm_grh(inp: BoundsInput) -> float:
    """x^{5/6} (log(q N x))^{2/3} / (log x)^{1/3} plus the divisor-weighted
    tail term tau2(q2) log(q N x) / phi(q) * R_{E,q1}."""
    x, q, N = inp.x, inp.q, inp.conductor
    lqnx = log(q * N * x)
    q1, q2 = q_split(q, inp.m_serre)
    lead = x ** (5.0 / 6.0) * lqnx ** (2.0 / 3.0) / log(x) ** (1.0 / 3.0)
    return lead + tau2(q2) * lqnx / euler_phi(q) * R_E_q1(inp.m_serre, q1)


def envelope_ag_cm(inp: BoundsInput) -> float:
    """Four-term CM envelope with the cardinality G_D replaced by its bound."""
    if inp.cm_disc is None:
        raise ValueError("CM envelope requires cm_disc")
    x, q, N = inp.x, inp.q, inp.conductor
    lqnx = log(q * N * x)
    G = G_D_bound(inp.cm_disc, q)
    return (
        x**0.75 * (lqnx * G / q**3) ** 0.5
        + x**0.75 * (lqnx / log(x)) ** 0.5
        + x**0.5 * q * lqnx
        + x**0.5 * (1.0 / q + log(x) / q**2) * G
    )


# exponent envelopes (multiplied by x: the error enters as x * E_e(x)) ---------

EXP_VARIANTS = ("cm-grh", "noncm-grh-1", "noncm-grh-2")


def envelope_exp(inp: BoundsInput, variant: str, d_cap: int = 10**6) -> float:
    x, q, N = inp.x, inp.q, inp.conductor
    lqnx = log(q * N * x)
    if variant == "cm-grh":
        return x * envelope_ag_cm(inp)
    if variant == "noncm-grh-1":
        shape = x ** (5.0 / 6.0) * lqnx ** (2.0 / 3.0) / log(x) ** (1.0 / 3.0) + x**0.5 / q
        return x * shape
    if variant == "noncm-grh-2":
        if inp.b_constant is None:
            raise ValueError("variant noncm-grh-2 requires the constant B_E")
        q1, q2 = q_split(q, inp.m_serre)
        S_E, _ = s_constant(inp.m_serre, inp.b_constant, d_cap)
        phi_q2 = euler_phi(q2)
        shape = (
            x ** (5.0 / 6.0) * (big_H(q) * lqnx**2 / q) ** (1.0 / 3.0)
            + x ** 0.625 * (tau2(q2) * lqnx**3 / (phi_q2 * log(x)) * S_E) ** 0.25
            + x**0.5 * q * lqnx
            + tau2(q2) / (phi_q2 * x**0.5 * log(x)) * S_E
        )
        return x * shape
    raise ValueError(f"unknown exponent-envelope variant {variant!r}; choose from {EXP_VARIANTS}")


class SiegelEnvelope(NamedTuple):
    value: float
    uniformity_bound: float  # largest admissible q*N_E (kappa taken as 1)


def envelope_siegel(inp: BoundsInput) -> SiegelEnvelope:
    """x exp(-c1 (log x)^{1/(2S+4)}) with c1 = 1, plus the uniformity boundary
    exp((log x)^{1/(2S+4)} / (2 kappa)) with kappa = 1 (both disclosed)."""
    if inp.siegel_s is None:
        raise ValueError("Siegel envelope requires the exponent S")
    S = inp.siegel_s
    if S < -1:
        raise ValueError("S must be >= -1")
    expo = (log(inp.x)) ** (1.0 / (2 * S + 4))
    return SiegelEnvelope(inp.x * exp(-expo), exp(expo / 2.0))


# residual comparison ----------------------------------------------------------


@dataclass
class EnvelopeReport:
    kind: str
    rows: list[tuple[int, float, float, float]] = field(default_factory=list)
    slope_fit: float | None = None

    def to_csv_lines(self):
        yield "x,observed,envelope,ratio"
        for x, obs, env, ratio in self.rows:
            yield f"{x},{obs!r},{env!r},{ratio!r}"

    def to_json(self):
        return {
            "kind": self.kind,
            "slope_fit": self.slope_fit,
            "checkpoints": [
                {"x": x, "observed": obs, "envelope": env, "ratio": ratio}
                for x, obs, env, ratio in self.rows
            ],
        }


def residual_report(snapshots, constant: DensityEstimate,
                    envelope_fn: Callable[[float], float]) -> EnvelopeReport:
    """Observed residuals against the main term, envelope ratios, and the
    least-squares slope of log|residual| vs log x.

    For cyclicity the residual is pi_c(x) - c*Li(x); for the exponent sum it
    is pi_e(x) - e*Li(x^2).  A residual that is identically zero leaves the
    slope undefined (reported as None).
    """
    if len(snapshots) < 4:
        raise ValueError("residual_report requires at least 4 checkpoints")
    rows = []
    for snap in snapshots:
        x = snap["x"]
        if constant.kind == "cyclicity":
            observed = snap["cyclic_count"] - constant.value * log_integral(x)
        else:
            observed = int(snap["exponent_sum"]) - constant.value * log_integral(float(x) ** 2)
        env = envelope_fn(x)
        if env <= 0:
            raise ValueError(f"envelope must be positive at x={x}")
        rows.append((x, observed, env, abs(observed) / env))
    pts = [(log(x), log(abs(obs))) for x, obs, _, _ in rows if obs != 0]
    slope = None
    if len(pts) >= 2:
        xs, ys = zip(*pts)
        slope = float(np.polyfit(xs, ys, 1)[0])
    return EnvelopeReport(constant.kind, rows, slope)
