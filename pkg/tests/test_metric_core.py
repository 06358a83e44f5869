import random
from fractions import Fraction

import pytest

from urysphere import sampling
from urysphere.errors import (
    EmptySubset,
    Inadmissible,
    LabelCollision,
    MalformedInput,
    MetricViolation,
    ParseError,
)
from urysphere.metric_core import (
    KatetovFunction,
    distance_of_type,
    extend_with_point,
    format_rational,
    is_katetov,
    parse_rational,
    parse_space,
    restrict_type,
    serialize_space,
    validate_space,
)

from conftest import brute_force_katetov_violations, fr


class TestValidateSpace:
    def test_two_points_half(self):
        s = validate_space(["a", "b"], [[0, "1/2"], ["1/2", 0]])
        assert s.dist("a", "b") == fr("1/2")

    def test_triangle_violation_named_triple(self):
        with pytest.raises(MetricViolation) as err:
            validate_space(
                ["a", "b", "c"],
                [[0, "1/4", "3/4"], ["1/4", 0, "1/4"], ["3/4", "1/4", 0]],
            )
        assert any("triangle" in v and "'a'" in v and "'c'" in v
                   for v in err.value.violations)

    def test_diameter_violation(self):
        with pytest.raises(MetricViolation) as err:
            validate_space(["a", "b"], [[0, "5/4"], ["5/4", 0]])
        assert any("diameter" in v for v in err.value.violations)

    def test_all_violations_reported(self):
        with pytest.raises(MetricViolation) as err:
            validate_space(
                ["a", "b", "c"],
                [[0, "5/4", "0"], ["5/4", 0, "1/4"], ["0", "1/4", 0]],
            )
        text = "\n".join(err.value.violations)
        assert "diameter" in text and "zero or negative" in text

    def test_asymmetry(self):
        with pytest.raises(MetricViolation) as err:
            validate_space(["a", "b"], [[0, "1/2"], ["1/3", 0]])
        assert any("asymmetry" in v for v in err.value.violations)

    def test_malformed_ragged(self):
        with pytest.raises(MalformedInput):
            validate_space(["a", "b"], [[0, "1/2"], ["1/2"]])

    def test_malformed_duplicate_labels(self):
        with pytest.raises(MalformedInput):
            validate_space(["a", "a"], [[0, "1/2"], ["1/2", 0]])


class TestKatetov:
    def test_single_point_any_value(self, two_point):
        base = two_point.restrict(["a"])
        ok, violations = is_katetov(base, {"a": fr(1)})
        assert ok and not violations

    def test_sum_violation(self):
        s = validate_space(["x", "y"], [[0, 1], [1, 0]])
        ok, violations = is_katetov(s, {"x": fr("1/4"), "y": fr("1/4")})
        assert not ok
        assert any("f(x)+f(y)" in v for v in violations)

    def test_lipschitz_violation_matches_brute_force(self, two_point):
        values = {"a": fr("1/8"), "b": fr("3/4")}
        ok, violations = is_katetov(two_point, values)
        oracle = brute_force_katetov_violations(two_point, values)
        assert not ok
        assert len(violations) == 1 == len(oracle)
        assert oracle[0][0] == "lipschitz"

    def test_two_zeros_rejected(self, two_point):
        ok, _ = is_katetov(two_point, {"a": fr(0), "b": fr(0)})
        assert not ok

    def test_equivalence_with_extended_matrix_validation(self):
        # random assignments: admissibility iff the extended matrix validates
        # (zero-free assignments; a zero encodes identification, not a new row)
        rng = random.Random(5)
        for t in range(120):
            den = rng.choice((2, 3, 4, 6, 12))
            space = sampling.random_space(rng, rng.randint(2, 6), den)
            values = {p: Fraction(rng.randint(1, den), den) for p in space.points}
            ok, _ = is_katetov(space, values)
            labels = space.points + ("new",)
            matrix = [
                [space.dist(p, q) for q in space.points] + [values[p]]
                for p in space.points
            ]
            matrix.append([values[p] for p in space.points] + [Fraction(0)])
            try:
                validate_space(labels, matrix)
                extended_ok = True
            except MetricViolation:
                extended_ok = False
            assert ok == extended_ok

    def test_zero_value_means_profile_of_that_point(self):
        rng = random.Random(6)
        space = sampling.random_space(rng, 4, 6)
        x0 = space.points[0]
        profile = {p: space.dist(x0, p) for p in space.points}
        ok, _ = is_katetov(space, profile)
        assert ok
        perturbed = dict(profile)
        other = space.points[1]
        perturbed[other] = perturbed[other] + fr("1/6")
        ok2, _ = is_katetov(space, perturbed)
        assert not ok2


class TestExtendWithPoint:
    def test_single_point_base(self):
        base = validate_space(["a"], [[0]])
        f = KatetovFunction(base, {"a": fr("1/2")})
        out, label = extend_with_point(base, f, "b")
        assert label == "b" and out.dist("a", "b") == fr("1/2")

    def test_zero_identifies(self, two_point):
        f = KatetovFunction(two_point, {"a": fr(0), "b": fr("1/2")})
        out, label = extend_with_point(two_point, f, "c")
        assert out is two_point and label == "a"

    def test_output_passes_validator(self):
        s = validate_space(["a", "b"], [[0, 1], [1, 0]])
        f = KatetovFunction(s, {"a": fr("1/3"), "b": fr(1)})
        out, _ = extend_with_point(s, f, "c")
        validate_space(out.points, out.rows)
        assert len(out) == 3

    def test_label_collision(self, two_point):
        f = KatetovFunction(two_point, {"a": fr("1/2"), "b": fr("1/2")})
        with pytest.raises(LabelCollision):
            extend_with_point(two_point, f, "a")

    def test_random_extensions_validate(self, rng):
        for _ in range(40):
            den = rng.choice((2, 3, 4, 6, 8, 12))
            space = sampling.random_space(rng, rng.randint(2, 6), den)
            f = sampling.random_profile(rng, space, den)
            out, _ = extend_with_point(space, f, "fresh")
            validate_space(out.points, out.rows)


class TestTypes:
    def test_distance_of_constant_one(self, two_point):
        f = KatetovFunction(two_point, {"a": fr(1), "b": fr(1)})
        assert distance_of_type(f) == 1

    def test_distance_is_minimum(self, two_point):
        f = KatetovFunction(two_point, {"a": fr("1/2"), "b": fr("3/4")})
        assert distance_of_type(f) == fr("1/2")

    def test_restrict_full_base_is_identity(self, two_point):
        f = KatetovFunction(two_point, {"a": fr("1/2"), "b": fr("3/4")})
        g = restrict_type(f, ["a", "b"])
        assert g.values == f.values

    def test_restrict_to_single_point(self, two_point):
        f = KatetovFunction(two_point, {"a": fr("1/2"), "b": fr("3/4")})
        g = restrict_type(f, ["a"])
        assert dict(g.items()) == {"a": fr("1/2")}

    def test_restrict_empty_rejected(self, two_point):
        f = KatetovFunction(two_point, {"a": fr("1/2"), "b": fr("3/4")})
        with pytest.raises(EmptySubset):
            restrict_type(f, [])

    def test_restriction_stays_admissible_and_distance_grows(self, rng):
        for _ in range(40):
            den = rng.choice((3, 4, 6, 12))
            space = sampling.random_space(rng, 6, den)
            f = sampling.random_profile(rng, space, den)
            sub = rng.sample(list(space.points), 3)
            g = restrict_type(f, sub)
            ok, violations = is_katetov(g.base, dict(g.items()))
            assert ok, violations
            assert distance_of_type(g) >= distance_of_type(f)

    def test_inadmissible_profile_rejected(self, two_point):
        with pytest.raises(Inadmissible):
            KatetovFunction(two_point, {"a": fr("1/8"), "b": fr("3/4")})


class TestSerialization:
    def test_round_trip_identity(self, rng):
        space = sampling.random_space(rng, 4, 12)
        text = serialize_space(space)
        again = parse_space(text)
        assert serialize_space(again) == text

    def test_normalization_to_lowest_terms(self):
        s = parse_space('{"points": ["a", "b"], "dist": [["0", "3/6"], ["3/6", "0"]]}')
        assert '"1/2"' in serialize_space(s)

    def test_ragged_matrix_parse_error(self):
        with pytest.raises(ParseError) as err:
            parse_space('{"points": ["a", "b"], "dist": [["0", "1/2"], ["1/2"]]}')
        assert "dist[1]" in str(err.value)

    def test_bad_rational_position(self):
        with pytest.raises(ParseError) as err:
            parse_space('{"points": ["a", "b"], "dist": [["0", "x"], ["x", "0"]]}')
        assert "dist[0][1]" in str(err.value)

    def test_invalid_json_position(self):
        with pytest.raises(ParseError) as err:
            parse_space("{not json")
        assert "line 1" in str(err.value)

    def test_metric_violation_passes_through(self):
        with pytest.raises(MetricViolation):
            parse_space('{"points": ["a", "b"], "dist": [["0", "2"], ["2", "0"]]}')


class TestRationals:
    def test_parse_and_format(self):
        assert parse_rational("3/6") == fr("1/2")
        assert format_rational(fr("2/4")) == "1/2"
        assert format_rational(fr(3)) == "3"

    def test_parse_rejects_floats_and_junk(self):
        for bad in ("0.5", "", "1/0", "one"):
            with pytest.raises(ParseError):
                parse_rational(bad)
