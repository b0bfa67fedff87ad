import pytest
from hypothesis import given, settings, strategies as st

from absa_promptkit.errors import ValidationError
from absa_promptkit.parsing import (
    ParsedOutput,
    Task,
    parse_mask_output,
    parse_mlm_output,
    parse_sentinel_output,
    parse_traditional_output,
    project_task,
)
from absa_promptkit.prompting import (
    Regime,
    TemplateConfig,
    Verbalizer,
    render_mask_prompt,
    render_sentinel_prompt,
    render_traditional,
)
from absa_promptkit.types import AbsaSentence, AspectCategory, OpinionTriplet, Polarity

FQ = AspectCategory("FOOD", "QUALITY")
SG = AspectCategory("SERVICE", "GENERAL")
CATEGORIES = [
    FQ, SG,
    AspectCategory("FOOD", "PRICES"),
    AspectCategory("AMBIENCE", "GENERAL"),
    AspectCategory("DRINKS", "QUALITY"),
]

V = Verbalizer.english()
CFG = TemplateConfig()


class TestParseTraditional:
    def test_worked_example(self):
        out = parse_traditional_output(
            "Food quality is great, given the expression: steak", CFG, V, CATEGORIES)
        assert out.triplets == [OpinionTriplet(FQ, "steak", Polarity.POSITIVE)]
        assert out.dropped_clauses == 0

    def test_empty_string(self):
        out = parse_traditional_output("", CFG, V, CATEGORIES)
        assert out.triplets == [] and out.dropped_clauses == 0

    def test_unknown_polarity_word_dropped(self):
        out = parse_traditional_output(
            "Food quality is amazing, given the expression: steak", CFG, V, CATEGORIES)
        assert out.triplets == []
        assert out.dropped_clauses == 1
        assert "polarity" in out.diagnostics[0][1]

    def test_unknown_category_dropped(self):
        out = parse_traditional_output(
            "Moon cheese is great, given the expression: steak", CFG, V, CATEGORIES)
        assert out.dropped_clauses == 1
        assert "category" in out.diagnostics[0][1]

    def test_case_insensitive_category(self):
        out = parse_traditional_output(
            "FOOD  Quality is great, given the expression: steak", CFG, V, CATEGORIES)
        assert out.triplets[0].category == FQ

    def test_null_term(self):
        out = parse_traditional_output(
            "Food quality is bad, given the expression: NULL", CFG, V, CATEGORIES)
        assert out.triplets[0].term is None

    def test_garbage_total(self):
        out = parse_traditional_output("wibble; wobble", CFG, V, CATEGORIES)
        assert out.triplets == [] and out.dropped_clauses == 2


class TestParseSentinel:
    def test_single_group(self):
        out = parse_sentinel_output(
            "<extra_id_0> Food quality <extra_id_1> great <extra_id_2> steak <extra_id_3>",
            V, CFG, CATEGORIES)
        assert out.triplets == [OpinionTriplet(FQ, "steak", Polarity.POSITIVE)]

    def test_incomplete_group_dropped(self):
        out = parse_sentinel_output(
            "<extra_id_0> Food quality <extra_id_1> great", V, CFG, CATEGORIES)
        assert out.triplets == []
        assert out.dropped_clauses == 1

    def test_terminal_sentinel_only(self):
        out = parse_sentinel_output("<extra_id_0>", V, CFG, CATEGORIES)
        assert out.triplets == [] and out.dropped_clauses == 0


class TestParseMask:
    def test_missing_separator_fallback(self):
        out = parse_mask_output(
            "Food quality is great, given the expression: steak", V, CFG, CATEGORIES)
        assert len(out.triplets) == 1
        assert ("separator missing" in reason for _, reason in out.diagnostics)

    def test_garbage_suffix(self):
        out = parse_mask_output("text | total nonsense here", V, CFG, CATEGORIES)
        assert out.triplets == []
        assert out.dropped_clauses == 1


class TestProjectTask:
    parsed = ParsedOutput(triplets=[
        OpinionTriplet(FQ, "steak", Polarity.POSITIVE),
        OpinionTriplet(FQ, None, Polarity.NEGATIVE),
    ])

    def test_ate_discards_null(self):
        assert project_task(self.parsed, Task.ATE).items == {"steak"}

    def test_acd_collapses_duplicates(self):
        assert project_task(self.parsed, Task.ACD).items == {"FOOD#QUALITY"}

    def test_tasd_keeps_distinct_triplets(self):
        assert project_task(self.parsed, Task.TASD).items == {
            ("FOOD#QUALITY", "steak", "positive"),
            ("FOOD#QUALITY", None, "negative"),
        }

    def test_acte_pairs(self):
        assert project_task(self.parsed, Task.ACTE).items == {
            ("FOOD#QUALITY", "steak"),
            ("FOOD#QUALITY", None),
        }

    def test_acd_monotonicity(self):
        assert len(project_task(self.parsed, Task.ACD).items) <= len(self.parsed.triplets)

    def test_apd_not_a_projection(self):
        with pytest.raises(ValidationError):
            project_task(self.parsed, Task.APD)


class TestParseMlm:
    def test_czech_words(self):
        v = Verbalizer.czech()
        assert parse_mlm_output("dobrý", v) == Polarity.POSITIVE
        assert parse_mlm_output("ok", v) == Polarity.NEUTRAL
        assert parse_mlm_output("špatný", v) == Polarity.NEGATIVE

    def test_unconstrained_output_error(self):
        with pytest.raises(ValidationError, match="unconstrained"):
            parse_mlm_output("wonderful", Verbalizer.czech())


TERM_ALPHABET = "abcdefghijklmnopqrstuvwxyzáčéěířšůýž "
terms = (
    st.text(alphabet=TERM_ALPHABET, min_size=1, max_size=15)
    .filter(lambda s: s.strip() and s.strip() != "NULL")
)
triplets = st.builds(
    OpinionTriplet,
    category=st.sampled_from(CATEGORIES),
    term=st.one_of(st.none(), terms),
    polarity=st.sampled_from(list(Polarity)),
)
sentences = st.builds(
    AbsaSentence,
    review_id=st.just("r"),
    sentence_id=st.just("s"),
    text=st.text(alphabet=TERM_ALPHABET + ".,!", min_size=1, max_size=40),
    triplets=st.lists(triplets, max_size=4),
)


def _multiset(ts):
    return sorted((t.category.canonical, t.term or "", t.polarity.value) for t in ts)


class TestRoundTrip:
    @settings(max_examples=100)
    @given(example=sentences)
    def test_traditional(self, example):
        r = render_traditional(example, CFG, V)
        out = parse_traditional_output(r.expected_target, CFG, V, CATEGORIES)
        assert out.dropped_clauses == 0
        assert _multiset(out.triplets) == _multiset(example.triplets)

    @settings(max_examples=100)
    @given(example=sentences)
    def test_sentinel(self, example):
        cfg = TemplateConfig(regime=Regime.SENTINEL)
        r = render_sentinel_prompt(example, cfg, V)
        out = parse_sentinel_output(r.expected_target, V, cfg, CATEGORIES)
        assert out.dropped_clauses == 0
        assert _multiset(out.triplets) == _multiset(example.triplets)

    @settings(max_examples=100)
    @given(example=sentences)
    def test_mask(self, example):
        cfg = TemplateConfig(regime=Regime.MASK)
        r = render_mask_prompt(example, cfg, V)
        out = parse_mask_output(r.expected_target, V, cfg, CATEGORIES)
        assert out.dropped_clauses == 0
        assert _multiset(out.triplets) == _multiset(example.triplets)

    @given(raw=st.text(max_size=200))
    def test_parsers_total_and_deterministic(self, raw):
        for parse in (
            lambda r: parse_traditional_output(r, CFG, V, CATEGORIES),
            lambda r: parse_sentinel_output(r, V, CFG, CATEGORIES),
            lambda r: parse_mask_output(r, V, CFG, CATEGORIES),
        ):
            a, b = parse(raw), parse(raw)
            assert a.triplets == b.triplets
            assert a.dropped_clauses == b.dropped_clauses
