"""
다항식 서비스 단위 테스트
"""
import itertools
import random

import pytest
import sympy as sp
from sympy import Poly, Rational

from app.core.errors import InputError
from app.services.poly import (
    CycloElement,
    IntPoly,
    LaurentPoly,
    cyclotomic_norm,
    discriminant,
    eval_cyclotomic,
    factor_rational,
    fox_milnor_form,
    is_symmetric,
    min_concordant_degree,
    norm_np,
    normalize_alexander,
    radical,
    reciprocal,
    resultant,
    sturm_isolate,
    t,
    trace_polynomial,
    unit_circle_roots,
)

TREFOIL = IntPoly.of(1, -1, 1)
FIG8 = IntPoly.of(1, -3, 1)
QUARTIC = IntPoly.of(1, -2, 1, -2, 1)
DELTA_818 = IntPoly.of(1, -5, 10, -13, 10, -5, 1)


def random_poly(rng: random.Random, degree: int, bound: int = 5) -> IntPoly:
    """Random integer polynomial with nonzero leading and constant terms."""
    while True:
        coeffs = [rng.randint(-bound, bound) for _ in range(degree + 1)]
        if coeffs[0] and coeffs[-1]:
            return IntPoly(tuple(coeffs))


def has_rational_root(p: IntPoly) -> bool:
    for num in sp.divisors(abs(p.constant)):
        for den in sp.divisors(abs(p.leading)):
            for sign in (1, -1):
                if p.evaluate(Rational(sign * num, den)) == 0:
                    return True
    return False


class TestIntPoly:
    """정수 계수 다항식 기본 연산 테스트"""

    def test_trailing_zeros_stripped(self):
        """최고차 0 계수 제거"""
        assert IntPoly.of(1, 2, 0, 0).coeffs == (1, 2)
        assert IntPoly.of(0, 0).is_zero

    def test_arithmetic(self):
        """덧셈, 곱셈, 거듭제곱"""
        assert TREFOIL * FIG8 == IntPoly.of(1, -4, 5, -4, 1)
        assert TREFOIL**2 == IntPoly.of(1, -2, 3, -2, 1)
        assert TREFOIL - TREFOIL == IntPoly()
        assert TREFOIL * 3 == IntPoly.of(3, -3, 3)

    def test_exact_division(self):
        """나누어떨어지는 경우와 아닌 경우"""
        assert (TREFOIL * FIG8).exact_div(FIG8) == TREFOIL
        assert FIG8.divides(TREFOIL * FIG8)
        with pytest.raises(InputError):
            TREFOIL.exact_div(FIG8)

    def test_primitive_and_reverse(self):
        """원시 부분과 계수 뒤집기"""
        assert IntPoly.of(2, -4, -6).primitive() == IntPoly.of(-1, 2, 3)
        assert IntPoly.of(2, -1).reverse() == IntPoly.of(-1, 2)
        assert reciprocal(IntPoly.of(1, 2, 3)) == IntPoly.of(3, 2, 1)

    def test_evaluate_and_derivative(self):
        """값 계산과 미분"""
        assert DELTA_818.evaluate(1) == -1
        assert FIG8.evaluate(Rational(1, 2)) == Rational(-1, 4)
        assert FIG8.derivative() == IntPoly.of(-3, 2)

    def test_sympy_round_trip(self):
        """sympy 변환"""
        p = IntPoly.from_sympy(t**2 - 3 * t + 1)
        assert p == FIG8
        assert p.to_sympy() == Poly(t**2 - 3 * t + 1, t)
        with pytest.raises(InputError):
            IntPoly.from_sympy(t / 2)

    def test_str(self):
        """문자열 표현"""
        assert str(FIG8) == "t^2 - 3*t + 1"
        assert str(IntPoly()) == "0"


class TestAlexanderNormalisation:
    """알렉산더 다항식 정규화 테스트"""

    def test_laurent_shift_and_sign(self):
        """t 거듭제곱 이동과 부호"""
        p = LaurentPoly.from_pair([-1, 3, -1], -1)
        assert normalize_alexander(p) == FIG8

    def test_leading_zero_terms_removed(self):
        """낮은 차수 0 계수 제거"""
        assert normalize_alexander(IntPoly.of(0, 0, -1, 1, -1)) == TREFOIL

    def test_zero_polynomial_rejected(self):
        """0 다항식은 오류"""
        with pytest.raises(InputError):
            normalize_alexander(LaurentPoly.from_pair([0, 0], 3))

    def test_symmetry(self):
        """대칭성 판정"""
        assert is_symmetric(DELTA_818)
        assert is_symmetric(IntPoly.of(-1, 0, 1))
        assert not is_symmetric(IntPoly.of(-2, 1))


class TestFactorisation:
    """유리수 위 인수분해 테스트"""

    def test_818_factors(self):
        """8_18 알렉산더 다항식 인수분해"""
        fac = factor_rational(DELTA_818)
        assert [(f.poly, f.exponent, f.symmetric) for f in fac.factors] == [
            (FIG8, 1, True),
            (TREFOIL, 2, True),
        ]
        assert fac.expand() == DELTA_818
        assert fac.exponent_of(TREFOIL) == 2
        assert fac.exponent_of(QUARTIC) == 0

    def test_unit_sign(self):
        """음의 상수 단위 복원"""
        fac = factor_rational(-FIG8)
        assert fac.unit == -1
        assert fac.expand() == -FIG8

    def test_reciprocal_pairs(self):
        """비대칭 인수의 역수 짝"""
        p = IntPoly.of(-2, 1) * IntPoly.of(-1, 2)
        fac = factor_rational(p)
        assert [f.symmetric for f in fac.factors] == [False, False]
        assert fac.pairing == {0: 1, 1: 0}
        assert fox_milnor_form(p)

    def test_fox_milnor_form(self):
        """f(t)f(1/t) 형태 판정"""
        assert fox_milnor_form(TREFOIL**2)
        assert fox_milnor_form(TREFOIL**2 * FIG8**2)
        assert not fox_milnor_form(TREFOIL)
        assert not fox_milnor_form(DELTA_818)
        assert not fox_milnor_form(IntPoly.of(-2, 1) * IntPoly.of(-1, 2) ** 2)

    def test_min_concordant_degree(self):
        """장애 집합에 따른 최소 차수"""
        assert min_concordant_degree(DELTA_818) == 2
        assert min_concordant_degree(DELTA_818, [TREFOIL]) == 6
        assert min_concordant_degree(TREFOIL**2) == 0
        with pytest.raises(InputError):
            min_concordant_degree(DELTA_818, [QUARTIC])

    def test_fox_milnor_form_of_products(self, rng):
        """f(t) f(1/t) 곱은 항상 Fox-Milnor 형태"""
        for _ in range(200):
            f = random_poly(rng, rng.randint(1, 4))
            assert fox_milnor_form(f * f.reverse()), f

    def test_min_concordant_degree_is_monotone(self):
        """장애 집합이 커지면 최소 차수도 커진다"""
        for p in (DELTA_818, TREFOIL**2 * QUARTIC**2 * FIG8, TREFOIL**2 * FIG8**2):
            even = [f.poly for f in factor_rational(p).symmetric_factors() if f.exponent % 2 == 0]
            subsets = [set(c) for k in range(len(even) + 1) for c in itertools.combinations(even, k)]
            for small in subsets:
                for large in subsets:
                    if small <= large:
                        assert min_concordant_degree(p, small) <= min_concordant_degree(p, large) <= p.degree

    def test_factorisation_round_trip(self, rng):
        """인수 곱 복원과 유리근 기약성 확인"""
        for _ in range(60):
            p = IntPoly.of(1)
            for _ in range(rng.randint(1, 3)):
                p = p * random_poly(rng, rng.randint(1, 3))
            fac = factor_rational(p)
            assert fac.expand() == p
            for f in fac.factors:
                assert f.poly.degree <= 3
                if f.poly.degree >= 2:
                    assert not has_rational_root(f.poly), f.poly

    def test_radical_and_discriminant(self):
        """근기와 판별식"""
        assert radical(DELTA_818) == FIG8 * TREFOIL
        assert discriminant(TREFOIL) == -3
        assert discriminant(FIG8) == 5


class TestRootIsolation:
    """실근 분리와 단위원 근 테스트"""

    def test_trace_polynomial(self):
        """대각합 치환 u = t + 1/t"""
        assert trace_polynomial(TREFOIL) == IntPoly.of(-1, 1)
        assert trace_polynomial(QUARTIC) == IntPoly.of(-1, -2, 1)
        with pytest.raises(InputError):
            trace_polynomial(IntPoly.of(1, 2))

    def test_sturm_isolate(self):
        """스투름 수열로 근 분리"""
        poly = Poly((t - 1) * (t - 2) * (t + 3), t)
        intervals = sturm_isolate(poly, Rational(-10), Rational(10))
        assert len(intervals) == 3
        for (a, b), root in zip(intervals, (-3, 1, 2), strict=True):
            assert a < root < b

    def test_unit_circle_roots(self):
        """단위원 위 근의 개수"""
        assert len(unit_circle_roots(TREFOIL)) == 1
        assert unit_circle_roots(FIG8) == []
        (lo, hi), = unit_circle_roots(QUARTIC)
        # u = 1 - sqrt(2)
        trace = Poly(t**2 - 2 * t - 1, t)
        assert trace.eval(lo) * trace.eval(hi) < 0
        assert -2 <= lo < hi <= 2

    def test_root_at_one_rejected(self):
        """t = 1 근은 오류"""
        with pytest.raises(InputError):
            unit_circle_roots(IntPoly.of(1, -2, 1))


class TestCyclotomic:
    """원분체 산술 테스트"""

    def test_zeta_relations(self):
        """원시근 관계식"""
        z = CycloElement.zeta(3)
        one = CycloElement.rational(3, 1)
        assert z * z * z == one
        assert z * z + z + one == CycloElement.rational(3, 0)

    def test_conjugate_and_real(self):
        """켤레와 실수 판정"""
        z = CycloElement.zeta(8)
        assert z.conjugate() == CycloElement.zeta(8, 7)
        assert not z.is_real()
        assert (z + z.conjugate()).is_real()

    def test_norm(self):
        """노름 계산"""
        z = CycloElement.zeta(3)
        assert (z * 2 - CycloElement.rational(3, 1)).norm() == 7
        assert z.norm() == 1

    def test_eval_cyclotomic(self):
        """원시 3제곱근에서의 값"""
        assert eval_cyclotomic(QUARTIC, 3) == CycloElement.zeta(3, 2) * 2
        assert cyclotomic_norm(QUARTIC, 3) == 4
        assert cyclotomic_norm(TREFOIL**2, 3) == 16

    def test_norm_np(self):
        """N_3 노름 다항식"""
        assert norm_np(QUARTIC, 3) == IntPoly.of(1, -8, 10, -8, 1)
        assert norm_np(IntPoly.of(-1, 1), 3) == IntPoly.of(-1, 1)
        assert norm_np(IntPoly.of(2), 3) == IntPoly.of(8)

    def test_mixed_fields_rejected(self):
        """다른 원분체 혼합은 오류"""
        with pytest.raises(InputError):
            CycloElement.zeta(3) + CycloElement.zeta(8)

    def test_norm_is_product_with_conjugate(self, rng):
        """Q(zeta_3) 노름은 켤레와의 곱이며 양수"""
        phi3 = IntPoly.of(1, 1, 1)
        checked = 0
        for _ in range(60):
            p = random_poly(rng, rng.randint(1, 4))
            if phi3.divides(p):
                continue
            e = eval_cyclotomic(p, 3)
            n = cyclotomic_norm(p, 3)
            assert e * e.conjugate() == CycloElement.rational(3, n)
            assert n > 0
            checked += 1
        assert checked

    @pytest.mark.parametrize("n", [4, 5, 8])
    def test_norm_positive(self, rng, n):
        """실수 부분체가 아닌 원분체 노름은 양수"""
        phi = IntPoly.from_sympy(Poly(sp.cyclotomic_poly(n, t), t))
        for _ in range(40):
            p = random_poly(rng, rng.randint(1, 4))
            if phi.divides(p):
                assert cyclotomic_norm(p, n) == 0
            else:
                assert cyclotomic_norm(p, n) > 0

    def test_norm_np_roots(self, rng):
        """N_p 의 근은 원래 근의 p 제곱"""
        checked = 0
        for _ in range(30):
            p = random_poly(rng, rng.randint(1, 3))
            if p.degree > 1 and discriminant(p) == 0:
                continue
            for prime in (2, 3):
                norm = norm_np(p, prime)
                expected = [complex(r) ** prime for r in p.to_sympy().nroots(n=30)]
                found = [complex(r) for r in norm.to_sympy().nroots(n=30)]
                assert len(found) == len(expected)
                for z in expected:
                    best = min(found, key=lambda w, z=z: abs(w - z))
                    assert abs(best - z) < 1e-8 * max(1.0, abs(z))
                    found.remove(best)
            checked += 1
        assert checked


class TestResultant:
    """정수 종결식 테스트"""

    def test_cyclotomic_resultant(self):
        """Phi_3 와 세잎 매듭 다항식"""
        assert resultant(IntPoly.of(1, 1, 1), TREFOIL) == 4
        assert resultant(IntPoly.of(1, 1, 1), IntPoly.of(1, 1, 1)) == 0
        assert abs(resultant(IntPoly.of(1, 1), TREFOIL)) == 3

    def test_zero_iff_common_factor(self, rng):
        """종결식 0 과 공통 인수 존재는 동치"""
        for i in range(80):
            p, q = random_poly(rng, rng.randint(1, 3)), random_poly(rng, rng.randint(1, 3))
            if i % 2:
                shared = IntPoly.of(rng.choice([-3, -2, -1, 1, 2, 3]), 1)
                p, q = p * shared, q * shared
            common = sp.gcd(p.to_sympy(), q.to_sympy()).degree() > 0
            assert (resultant(p, q) == 0) == common
            if i % 2:
                assert common
