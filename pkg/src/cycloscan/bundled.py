"""Bundled curves used by the test suite and the verification runner.

Conductors and CM discriminants are user-supplied arithmetic metadata.  Where
a conductor is marked as a surrogate it is the absolute model discriminant:
its prime support (which is what drives bad-prime exclusion) is correct, and
the magnitude only enters envelope expressions inside logarithms.  All exact
identities verified by the suite are independent of these values.
"""

from cycloscan.curve import CurveSpec

BUNDLED: dict[str, CurveSpec] = {
    # Generic curve: the 2-division cubic x^3 + x + 1 is irreducible with
    # non-square discriminant -31, so its splitting field has group S3.
    # Conductor 496 = 2^4 * 31 (standard tables for this model).
    "x3+x+1": CurveSpec(
        a4=1, a6=1, label="x3+x+1", conductor=496,
        serre_primes=frozenset({2, 3, 5, 31}),
    ),
    # CM by the Gaussian integers (D = 1), conductor 32, full rational
    # 2-torsion (x^3 - x = x(x-1)(x+1)), hence vanishing cyclicity constant.
    "x3-x": CurveSpec(
        a4=-1, a6=0, label="x3-x", conductor=32, cm_disc=1,
    ),
    # Generic curve with irreducible 2-division cubic (disc -972 non-square);
    # conductor surrogate 15552 = |model discriminant| = 2^6 * 3^5.
    "x3+6x-2": CurveSpec(
        a4=6, a6=-2, label="x3+6x-2", conductor=15552,
        serre_primes=frozenset({2, 3, 5}),
    ),
    # CM by Z[zeta_3] (D = 3), conductor 36, one rational 2-torsion point
    # (x^3 + 1 = (x+1)(x^2 - x + 1)).
    "x3+1": CurveSpec(
        a4=0, a6=1, label="x3+1", conductor=36, cm_disc=3,
    ),
    # CM by the Gaussian integers (D = 1), one rational 2-torsion point
    # (x^3 + 4x = x(x^2 + 4)); conductor surrogate 64 (support {2} correct).
    "x3+4x": CurveSpec(
        a4=4, a6=0, label="x3+4x", conductor=64, cm_disc=1,
    ),
}
