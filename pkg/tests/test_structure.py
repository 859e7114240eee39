"""Group-structure tests: certified (d, e) pairs against enumeration oracles."""

import random
from math import gcd, isqrt

import pytest

from cycloscan.arith import factorize, segmented_primes
from cycloscan.curve import CurveSpec, ReducedCurve, ec_add, point_count_naive, reduce_curve, scalar_mul
from cycloscan.structure import (
    PrimeRecord,
    brute_force_structure,
    check_record,
    group_structure,
    is_cyclic,
    m_torsion_rational,
    torsion_point_count,
    weil_pairing,
)
from cycloscan.curve import KernelFault


def all_points(curve):
    pts = []
    for x in range(curve.p):
        for y in range(curve.p):
            if (y * y - curve.rhs(x)) % curve.p == 0:
                pts.append((x, y))
    return pts


def point_order(P, n, curve):
    """Order of P given the group order n, by divisor descent."""
    o = n
    for ell, e in factorize(n).factors:
        for _ in range(e):
            if o % ell == 0 and scalar_mul(o // ell, P, curve.a, curve.p) is None:
                o //= ell
            else:
                break
    return o


class TestKnownStructures:
    def test_gcd_forces_cyclic_F5(self):
        cur = ReducedCurve(5, 1, 1)
        assert gcd(9, 4) == 1
        assert group_structure(cur, 9) == (1, 9)

    def test_full_two_torsion_F5(self):
        cur = ReducedCurve(5, 4, 0)  # x^3 - x
        # oracle: tabulate the orders of all 8 points
        pts = all_points(cur)
        assert len(pts) == 7
        orders = sorted(point_order(P, 8, cur) for P in pts)
        assert orders == [2, 2, 2, 4, 4, 4, 4]  # Z/2 x Z/4
        assert group_structure(cur, 8) == (2, 4)

    def test_squarefree_order_is_cyclic(self):
        spec = CurveSpec(1, 1, conductor=496)
        for p in segmented_primes(5, 400):
            if not spec.is_good(p):
                continue
            cur = reduce_curve(spec, p)
            n = point_count_naive(cur)
            sqfree = all(e == 1 for _, e in factorize(n).factors)
            d, e = group_structure(cur, n)
            if sqfree:
                assert d == 1
            assert d * e == n


class TestBruteForceOracle:
    def test_hand_checked_cases(self):
        assert brute_force_structure(ReducedCurve(5, 1, 1)) == (1, 9)
        assert brute_force_structure(ReducedCurve(5, 4, 0)) == (2, 4)

    def test_oracle_equivalence_two_curves_to_500(self):
        for spec in (CurveSpec(1, 1, conductor=496), CurveSpec(-1, 0, cm_disc=1)):
            for p in segmented_primes(3, 500):
                if not spec.is_good(p):
                    continue
                cur = reduce_curve(spec, p)
                n = point_count_naive(cur)
                assert group_structure(cur, n) == brute_force_structure(cur), (spec.label, p)


class TestTorsionRationality:
    def test_m_one_always(self):
        rec = PrimeRecord(5, -3, 9, 1, 9)
        assert m_torsion_rational(ReducedCurve(5, 1, 1), 1, rec)

    def test_two_torsion_example(self):
        rec = PrimeRecord(5, -2, 8, 2, 4)
        assert m_torsion_rational(ReducedCurve(5, 4, 0), 2, rec)

    def test_square_not_dividing_order(self):
        rec = PrimeRecord(5, -3, 9, 1, 9)
        for m in (2, 4, 5, 7):
            if 9 % (m * m):
                assert not m_torsion_rational(ReducedCurve(5, 1, 1), m, rec)

    def test_cyclicity_criterion_equivalence(self):
        """d = 1 iff no prime ell <= sqrt(n)+1 has rational ell-torsion."""
        spec = CurveSpec(1, 1, conductor=496)
        for p in segmented_primes(3, 2000):
            if not spec.is_good(p):
                continue
            cur = reduce_curve(spec, p)
            n = point_count_naive(cur)
            d, e = group_structure(cur, n)
            rec = PrimeRecord(p, p + 1 - n, n, d, e)
            no_split = all(
                not m_torsion_rational(cur, ell, rec)
                for ell in segmented_primes(2, isqrt(n) + 1)
            )
            assert is_cyclic(rec) == no_split == (d == 1)


class TestIsCyclic:
    def test_examples(self):
        assert is_cyclic(PrimeRecord(5, -3, 9, 1, 9))
        assert not is_cyclic(PrimeRecord(5, -2, 8, 2, 4))


class TestRecordInvariants:
    def test_check_record_accepts_valid(self):
        check_record(PrimeRecord(5, -2, 8, 2, 4))

    def test_check_record_rejects(self):
        with pytest.raises(KernelFault):
            check_record(PrimeRecord(5, -2, 8, 2, 3))  # d*e != n
        with pytest.raises(KernelFault):
            check_record(PrimeRecord(5, 1, 8, 2, 4))  # n != p+1-a
        with pytest.raises(KernelFault):
            check_record(PrimeRecord(13, -2, 16, 4, 4))  # d does not divide p-1
        with pytest.raises(KernelFault):
            check_record(PrimeRecord(5, -6, 12, 2, 6))  # Hasse violation


class TestTorsionPointCount:
    def test_against_enumeration(self):
        rng = random.Random(5)
        for (p, a, b) in ((5, 4, 0), (13, 2, 3), (17, 1, 1), (37, 5, 7), (101, 3, 8)):
            cur = ReducedCurve(p, a, b)
            if (4 * a**3 + 27 * b**2) % p == 0:
                continue
            pts = all_points(cur)
            n = len(pts) + 1
            for m in (2, 3, 4, 5, 6):
                oracle = 1 + sum(1 for P in pts if scalar_mul(m, P, a, p) is None)
                assert torsion_point_count(cur, m, rng) == oracle, (p, a, b, m)


class TestWeilPairing:
    def test_order_two_pairing(self):
        cur = ReducedCurve(5, 4, 0)
        w = weil_pairing((0, 0), (1, 0), 2, cur, random.Random(1))
        assert w == 4  # -1 mod 5: the two-torsion points are independent

    def test_dependent_points_trivial(self):
        cur = ReducedCurve(5, 4, 0)
        assert weil_pairing((0, 0), (0, 0), 2, cur, random.Random(1)) == 1

    def test_bilinearity_and_order(self):
        # E: y^2 = x^3 + 2x + 3 over F_13: pick independent ell-torsion points
        rng = random.Random(8)
        cur = ReducedCurve(13, 2, 3)
        pts = all_points(cur)
        n = len(pts) + 1
        for m in (2, 3):
            m_tors = [P for P in pts if scalar_mul(m, P, cur.a, cur.p) is None]
            if 1 + len(m_tors) != m * m:
                continue  # full m-torsion not rational on this curve
            found = False
            for P in m_tors:
                for Q in m_tors:
                    w = weil_pairing(P, Q, m, cur, rng)
                    if pow(w, m, 13) != 1:
                        raise AssertionError("pairing value outside mu_m")
                    if w != 1:
                        found = True
                        # bilinearity: e(2P, Q) = e(P, Q)^2
                        P2 = ec_add(P, P, cur.a, cur.p)
                        if P2 is not None:
                            assert weil_pairing(P2, Q, m, cur, rng) == w * w % 13
            assert found or not m_tors
