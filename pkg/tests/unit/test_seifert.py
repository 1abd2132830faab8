"""
Seifert 행렬 서비스 단위 테스트
"""
import json

import pytest
from sympy import Rational

from app.core.errors import InputError, UnknownKnotError
from app.services.poly import IntPoly
from app.services.seifert import (
    CirclePoint,
    alexander,
    connected_sum,
    find_knot,
    ingest,
    invertible_representative,
    isometric_structure,
    lt_signature_at,
    mirror,
    reverse,
    signature,
    signature_profile,
    validate,
)

TREFOIL = [[-1, 1], [0, -1]]
FIG8 = [[-1, 1], [0, 1]]


class TestValidation:
    """Seifert 행렬 검증 테스트"""

    def test_valid_matrix(self):
        """정상 행렬"""
        v = validate(TREFOIL)
        assert v.size == 2
        assert v.genus == 1
        assert v.orientation in (1, -1)

    @pytest.mark.parametrize(
        "rows",
        [
            [[1, 2, 3], [4, 5, 6]],
            [[1]],
            [[1, 0], [0, 1]],
            [[0.5, 1], [0, 1]],
        ],
    )
    def test_invalid_matrices(self, rows):
        """잘못된 행렬 거부"""
        with pytest.raises(InputError, match="not a Seifert matrix"):
            validate(rows)

    def test_empty_matrix_is_unknot(self):
        """빈 행렬은 자명 매듭"""
        v = validate([])
        assert alexander(v) == IntPoly.of(1)
        assert signature(v) == 0


class TestClassicalInvariants:
    """알렉산더 다항식과 부호수 테스트"""

    def test_trefoil(self):
        """세잎 매듭"""
        v = validate(TREFOIL)
        assert alexander(v) == IntPoly.of(1, -1, 1)
        assert signature(v) == -2

    def test_figure_eight(self):
        """8자 매듭"""
        v = validate(FIG8)
        assert alexander(v) == IntPoly.of(1, -3, 1)
        assert signature(v) == 0

    def test_operations(self):
        """연결합, 거울상, 방향 반전"""
        v = validate(TREFOIL)
        assert alexander(connected_sum(v, v)) == IntPoly.of(1, -1, 1) ** 2
        assert signature(connected_sum(v, v)) == -4
        assert signature(mirror(v)) == 2
        assert alexander(mirror(v)) == alexander(v)
        assert signature(reverse(v)) == signature(v)

    def test_fixture_alexander_polynomials(self, knot):
        """번들 매듭의 알렉산더 다항식"""
        trefoil, fig8 = IntPoly.of(1, -1, 1), IntPoly.of(1, -3, 1)
        quartic = IntPoly.of(1, -2, 1, -2, 1)
        assert alexander(knot("6_2").seifert) == IntPoly.of(1, -3, 3, -3, 1)
        assert alexander(knot("8_18").seifert) == trefoil**2 * fig8
        assert alexander(knot("9_40").seifert) == trefoil * fig8**2
        assert alexander(knot("9_42").seifert) == quartic
        assert alexander(knot("10_82").seifert) == quartic * trefoil**2

    def test_fixture_signatures(self, knot):
        """번들 매듭의 부호수 절댓값"""
        expected = {"6_2": 2, "8_18": 0, "9_40": 2, "9_42": 2, "10_82": 2, "6_2#6_2": 4}
        for name, value in expected.items():
            assert abs(signature(knot(name).seifert)) == value, name


class TestSignatureFunction:
    """Levine-Tristram 부호수 함수 테스트"""

    def test_circle_point(self):
        """원 위의 점 매개변수"""
        assert CirclePoint(1).u == 0
        assert CirclePoint.minus_one().u == -2
        with pytest.raises(InputError):
            CirclePoint(0)

    def test_trefoil_values(self):
        """세잎 매듭의 부호수 값"""
        v = validate(TREFOIL)
        # the root of t^2 - t + 1 sits at s^2 = 1/3
        assert lt_signature_at(v, CirclePoint(Rational(1, 10))) == 0
        assert lt_signature_at(v, CirclePoint(1)) == -2
        assert lt_signature_at(v, CirclePoint.minus_one()) == -2

    def test_trefoil_profile(self):
        """세잎 매듭의 부호수 프로파일"""
        profile = signature_profile(validate(TREFOIL))
        assert profile.values == [0, -2]
        assert profile.jumps_for(IntPoly.of(1, -1, 1)) == [-2]
        assert profile.sigma_minus_one == -2
        assert profile.max_abs == 2

    def test_no_unit_roots(self):
        """단위원 근이 없으면 0 함수"""
        profile = signature_profile(validate(FIG8))
        assert profile.is_identically_zero()
        assert profile.jump_map() == {}

    def test_818_profile_vanishes_at_minus_one(self, knot):
        """8_18 은 -1 에서 부호수 0 이지만 도약이 있다"""
        profile = signature_profile(knot("8_18").seifert)
        assert profile.sigma_minus_one == 0
        assert profile.values[0] == 0
        assert profile.values[-1] == 0
        assert profile.jumps_for(IntPoly.of(1, -3, 1)) == []

    def test_connected_sum_doubles_profile(self, knot):
        """연결합 프로파일은 두 배"""
        single = signature_profile(knot("6_2").seifert)
        double = signature_profile(knot("6_2#6_2").seifert)
        assert double.values == [2 * x for x in single.values]


class TestInvertibleRepresentative:
    """가역 대표 행렬 테스트"""

    def test_singular_942_reduced(self, knot):
        """특이한 9_42 행렬 축소"""
        v = knot("9_42").seifert
        assert v.det == 0
        w = invertible_representative(v)
        assert w.det != 0
        assert w.size < v.size
        assert alexander(w) == alexander(v)
        assert signature(w) == signature(v)

    def test_invertible_matrix_unchanged(self):
        """가역 행렬은 그대로"""
        v = validate(TREFOIL)
        assert invertible_representative(v) == v


class TestKnotTable:
    """매듭 테이블 로딩 테스트"""

    def test_bundled_table(self, records):
        """번들 테이블 레코드"""
        assert [r.name for r in records] == ["6_2", "8_18", "9_40", "9_42", "10_82"]
        assert all(2 * r.genus3 >= alexander(r.seifert).degree for r in records)

    def test_mirror_and_sum_names(self, knot):
        """거울상과 연결합 이름"""
        m = knot("-6_2")
        assert m.name == "-6_2"
        assert signature(m.seifert) == -signature(knot("6_2").seifert)
        s = knot("6_2#6_2")
        assert s.seifert.size == 8
        assert s.genus3 == 4

    def test_unknown_and_malformed_names(self, records):
        """존재하지 않거나 잘못된 이름"""
        with pytest.raises(UnknownKnotError):
            find_knot(records, "3_1")
        with pytest.raises(InputError, match="malformed"):
            find_knot(records, "6_2#")

    def test_ingest_text(self):
        """JSON 텍스트 직접 파싱"""
        text = json.dumps([{"name": "3_1", "seifert_matrix": TREFOIL, "genus3": 1}])
        (record,) = ingest(text)
        assert record.name == "3_1"
        assert record.genus3 == 1

    def test_ingest_errors_carry_context(self, tmp_path):
        """파싱 오류에 레코드 정보 포함"""
        with pytest.raises(InputError, match="record 0"):
            ingest(json.dumps([{"name": "x"}]))
        with pytest.raises(InputError, match="record 'x'"):
            ingest(json.dumps([{"name": "x", "seifert_matrix": [[1]]}]))
        with pytest.raises(InputError, match="line 1"):
            ingest("[1,")
        with pytest.raises(InputError, match="cannot read"):
            ingest(tmp_path / "missing.json")

    def test_table_consistency(self):
        """genus 가 deg Delta / 2 보다 작으면 오류"""
        square = [[-1, 1, 0, 0], [0, -1, 0, 0], [0, 0, -1, 1], [0, 0, 0, -1]]
        with pytest.raises(InputError, match="below half"):
            ingest(json.dumps([{"name": "3_1#3_1", "seifert_matrix": square, "genus3": 1}]))


class TestRandomSums:
    """무작위 연결합 테스트"""

    def test_invariants_are_additive(self, rng):
        """부호수는 더해지고 알렉산더 다항식은 곱해진다"""
        pieces = [validate(TREFOIL), mirror(validate(TREFOIL)), validate(FIG8)]
        for _ in range(5):
            chosen = [rng.choice(pieces) for _ in range(rng.randint(1, 3))]
            total = chosen[0]
            expected = alexander(chosen[0])
            for v in chosen[1:]:
                total = connected_sum(total, v)
                expected = expected * alexander(v)
            assert signature(total) == sum(signature(v) for v in chosen)
            assert alexander(total) == expected


class TestIsometricStructureMap:
    """Seifert 행렬에서 등거리 구조로"""

    def test_trefoil_pair(self):
        """Q = V + V^t, T = V^-1 V^t"""
        s = isometric_structure(validate(TREFOIL))
        assert s.Q.tolist() == [[-2, 1], [1, -2]]
        assert s.T.T * s.Q * s.T == s.Q

    def test_singular_matrix_rejected(self, knot):
        """특이 행렬은 오류"""
        with pytest.raises(InputError, match="singular"):
            isometric_structure(knot("9_42").seifert)
