import pytest

from absa_eval.ingest import RESTAURANT_CATEGORIES
from absa_eval.types import (
    IMPLICIT_NOT_ALLOWED,
    MISSING_ELEMENT,
    SCHEMAS,
    UNEXPECTED_ELEMENT,
    UNKNOWN_CATEGORY,
    Polarity,
    SentimentTuple,
    Task,
    Term,
    schema_for,
    validate_tuple,
)


def quad(aspect, category, polarity, opinion):
    return SentimentTuple(
        aspect=Term.implicit() if aspect is None else Term(aspect),
        category=category,
        polarity=Polarity.parse(polarity),
        opinion=Term.implicit() if opinion is None else Term(opinion),
    )


class TestPolarity:
    def test_exactly_three_values(self):
        assert {p.value for p in Polarity} == {"positive", "negative", "neutral"}

    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("positive", Polarity.POSITIVE),
            ("POS", Polarity.POSITIVE),
            ("neg", Polarity.NEGATIVE),
            ("Negative", Polarity.NEGATIVE),
            ("NEU", Polarity.NEUTRAL),
            (" neutral ", Polarity.NEUTRAL),
        ],
    )
    def test_synonyms(self, raw, expected):
        assert Polarity.parse(raw) is expected

    def test_objective_not_representable(self):
        with pytest.raises(ValueError):
            Polarity.parse("objective")


class TestTerm:
    def test_explicit_requires_text(self):
        with pytest.raises(ValueError):
            Term.explicit("   ")

    def test_reserved_marker_rejected(self):
        for bad in ("null", "NULL", " Null "):
            with pytest.raises(ValueError):
                Term.explicit(bad)

    def test_implicit_wire_marker(self):
        assert Term.implicit().is_implicit
        assert Term.implicit().wire() == "null"
        assert Term("steak").wire() == "steak"


class TestSchemas:
    def test_wire_order_lengths(self):
        for task, schema in SCHEMAS.items():
            expected = 4 if task in (Task.ASQP, Task.ACOS) else 3
            assert schema.arity == expected
            assert schema.wire_order.count("polarity") == 1

    def test_quad_schema(self):
        for task in (Task.ASQP, Task.ACOS):
            s = SCHEMAS[task]
            assert s.has_category and s.has_opinion and s.implicit_allowed
            assert s.wire_order == ("aspect", "category", "polarity", "opinion")

    def test_tasd_schema(self):
        s = SCHEMAS[Task.TASD]
        assert s.has_category and not s.has_opinion and s.implicit_allowed
        assert s.wire_order == ("aspect", "category", "polarity")

    def test_aste_schema(self):
        s = SCHEMAS[Task.ASTE]
        assert not s.has_category and s.has_opinion and not s.implicit_allowed
        assert s.wire_order == ("aspect", "opinion", "polarity")

    def test_elements_reporting_order(self):
        assert SCHEMAS[Task.ASQP].elements() == ("aspect", "category", "polarity", "opinion")
        assert SCHEMAS[Task.TASD].elements() == ("aspect", "category", "polarity")
        assert SCHEMAS[Task.ASTE].elements() == ("aspect", "polarity", "opinion")

    def test_parse_task(self):
        assert Task.parse("ASQP") is Task.ASQP
        with pytest.raises(ValueError):
            Task.parse("absa")


class TestValidateTuple:
    def test_aste_implicit_aspect_rejected(self):
        t = SentimentTuple(aspect=Term.implicit(), polarity=Polarity.NEGATIVE, opinion=Term("bad"))
        codes = [v.code for v in validate_tuple(t, schema_for("aste"))]
        assert codes == [IMPLICIT_NOT_ALLOWED]

    def test_acos_example_is_clean(self):
        t = quad("sushi", "food prices", "neutral", "is n't the cheapest")
        assert validate_tuple(t, schema_for("acos"), RESTAURANT_CATEGORIES) == []

    def test_tasd_opinion_is_unexpected(self):
        t = SentimentTuple(
            aspect=Term("pizza"), category="food quality", polarity=Polarity.POSITIVE, opinion=Term("good")
        )
        codes = [v.code for v in validate_tuple(t, schema_for("tasd"))]
        assert codes == [UNEXPECTED_ELEMENT]

    def test_unknown_category(self):
        t = quad("sushi", "sushi stuff", "neutral", "fine")
        codes = [v.code for v in validate_tuple(t, schema_for("acos"), RESTAURANT_CATEGORIES)]
        assert codes == [UNKNOWN_CATEGORY]

    def test_missing_elements(self):
        t = SentimentTuple(aspect=Term("pizza"), polarity=Polarity.POSITIVE)
        codes = {v.code for v in validate_tuple(t, schema_for("asqp"))}
        assert codes == {MISSING_ELEMENT}

    def test_pure(self):
        t = quad("sushi", "bad category", "neutral", None)
        schema = schema_for("asqp")
        assert validate_tuple(t, schema, RESTAURANT_CATEGORIES) == validate_tuple(
            t, schema, RESTAURANT_CATEGORIES
        )


class TestWireValues:
    def test_order_and_markers(self):
        t = quad(None, "food quality", "positive", "tasty")
        assert t.wire_values(schema_for("asqp")) == ("null", "food quality", "positive", "tasty")

    def test_aste_order(self):
        t = SentimentTuple(aspect=Term("steak"), polarity=Polarity.POSITIVE, opinion=Term("delicious"))
        assert t.wire_values(schema_for("aste")) == ("steak", "delicious", "positive")
