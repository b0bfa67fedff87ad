"""Wire conformance checks against the protocol the evaluation harness speaks."""
import pytest

from absa_inference_server import ModelSpec, load_engine
from absa_inference_server.engine import _trim_review_side

SENTINEL_PROMPT = (
    "the steak was very tasty | "
    "<extra_id_0> is <extra_id_1> , given the expression : <extra_id_2>"
)
CANDIDATES = ["dobrý", "ok", "špatný"]


class TestHealth:
    def test_seq2seq(self, seq2seq_client):
        payload = seq2seq_client.get("/health").json()
        assert payload["status"] == "ok"
        assert payload["model"]

    def test_mlm(self, mlm_client):
        payload = mlm_client.get("/health").json()
        assert payload["status"] == "ok"


class TestGenerate:
    def test_returns_output_string(self, seq2seq_client):
        resp = seq2seq_client.post("/generate",
                                   json={"input": SENTINEL_PROMPT, "max_new_units": 20})
        assert resp.status_code == 200
        body = resp.json()
        assert set(body) == {"output"}
        assert isinstance(body["output"], str)

    def test_greedy_deterministic(self, seq2seq_client):
        req = {"input": SENTINEL_PROMPT, "max_new_units": 20}
        a = seq2seq_client.post("/generate", json=req).json()["output"]
        b = seq2seq_client.post("/generate", json=req).json()["output"]
        assert a == b

    def test_output_feeds_primary_parser(self, seq2seq_client):
        from absa_promptkit.parsing import parse_sentinel_output
        from absa_promptkit.prompting import TemplateConfig, Verbalizer
        from absa_promptkit.types import AspectCategory

        raw = seq2seq_client.post(
            "/generate", json={"input": SENTINEL_PROMPT, "max_new_units": 30}).json()["output"]
        parsed = parse_sentinel_output(
            raw, Verbalizer.english(), TemplateConfig(),
            [AspectCategory("FOOD", "QUALITY"), AspectCategory("SERVICE", "GENERAL")])
        # parser totality: triplets + drops account for every attempted group
        assert parsed.dropped_clauses == len(parsed.diagnostics) or parsed.diagnostics

    def test_missing_field_rejected(self, seq2seq_client):
        assert seq2seq_client.post("/generate", json={}).status_code == 422

    def test_wrong_mode_rejected(self, mlm_client):
        resp = mlm_client.post("/generate", json={"input": "x", "max_new_units": 5})
        assert resp.status_code == 400


class TestFillMask:
    def test_scores_exactly_the_candidates(self, mlm_client):
        resp = mlm_client.post("/fill-mask", json={
            "input": "steak byl hrozný . je to [MASK] film .",
            "candidates": CANDIDATES,
        })
        assert resp.status_code == 200
        body = resp.json()
        assert set(body) == {"chosen", "scores"}
        assert set(body["scores"]) == set(CANDIDATES)
        assert body["chosen"] in CANDIDATES

    def test_deterministic(self, mlm_client):
        req = {"input": "je to [MASK] film .", "candidates": CANDIDATES}
        a = mlm_client.post("/fill-mask", json=req).json()
        b = mlm_client.post("/fill-mask", json=req).json()
        assert a == b

    def test_multi_subword_candidate_scored(self, mlm_client):
        # "dobrý" splits into two wordpieces in the tiny vocab
        resp = mlm_client.post("/fill-mask", json={
            "input": "je to [MASK] film .", "candidates": ["dobrý"]})
        assert resp.status_code == 200
        assert resp.json()["chosen"] == "dobrý"

    def test_zero_or_two_slots_rejected(self, mlm_client):
        for bad in ("no slot", "[MASK] a [MASK]"):
            resp = mlm_client.post("/fill-mask",
                                   json={"input": bad, "candidates": CANDIDATES})
            assert resp.status_code == 400

    def test_empty_candidates_rejected(self, mlm_client):
        resp = mlm_client.post("/fill-mask", json={"input": "[MASK]", "candidates": []})
        assert resp.status_code == 422

    def test_wrong_mode_rejected(self, seq2seq_client):
        resp = seq2seq_client.post("/fill-mask",
                                   json={"input": "[MASK]", "candidates": CANDIDATES})
        assert resp.status_code == 400


class TestTruncation:
    def test_review_trimmed_prompt_kept(self, mlm_checkpoint):
        engine = load_engine(ModelSpec(model=mlm_checkpoint, mode="mlm", max_input_length=64))
        suffix = " | je to [MASK] film ."
        long_input = " ".join(["slovo"] * 500) + suffix
        trimmed = _trim_review_side(long_input, engine.tokenizer, 64)
        assert trimmed.endswith(suffix)
        assert len(engine.tokenizer(trimmed)["input_ids"]) <= 64

    def test_fill_mask_survives_overlong_input(self, mlm_client):
        resp = mlm_client.post("/fill-mask", json={
            "input": " ".join(["slovo"] * 600) + " | je to [MASK] film .",
            "candidates": CANDIDATES,
        })
        assert resp.status_code == 200
        assert resp.json()["chosen"] in CANDIDATES
