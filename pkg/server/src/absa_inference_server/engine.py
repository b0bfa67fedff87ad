"""Model engines: greedy seq2seq generation and candidate-restricted mask filling."""
from __future__ import annotations

import threading
from dataclasses import dataclass

import torch
from transformers import AutoModelForMaskedLM, AutoModelForSeq2SeqLM, AutoTokenizer

SEPARATOR = " | "


@dataclass
class ModelSpec:
    model: str
    mode: str  # "seq2seq" | "mlm"
    max_input_length: int = 512
    device: str = "cpu"

    def __post_init__(self):
        if self.mode not in ("seq2seq", "mlm"):
            raise ValueError(f"mode must be seq2seq or mlm, got {self.mode!r}")


def _trim_review_side(text: str, tokenizer, max_length: int) -> str:
    """Drop whole words from the end of the review (the part before the last
    separator) until the tokenized input fits; the prompt suffix is never cut."""
    if len(tokenizer(text)["input_ids"]) <= max_length:
        return text
    idx = text.rfind(SEPARATOR)
    if idx < 0:
        review, suffix = text, ""
    else:
        review, suffix = text[:idx], text[idx:]
    words = review.split()
    lo, hi = 0, len(words)  # max kept words such that it fits
    while lo < hi:
        mid = (lo + hi + 1) // 2
        candidate = " ".join(words[:mid]) + suffix
        if len(tokenizer(candidate)["input_ids"]) <= max_length:
            lo = mid
        else:
            hi = mid - 1
    return " ".join(words[:lo]) + suffix


class Seq2SeqEngine:
    def __init__(self, spec: ModelSpec):
        self.spec = spec
        self.tokenizer = AutoTokenizer.from_pretrained(spec.model)
        self.model = AutoModelForSeq2SeqLM.from_pretrained(spec.model).to(spec.device)
        self.model.eval()
        self._lock = threading.Lock()

    @property
    def name(self) -> str:
        return self.spec.model

    def generate(self, text: str, max_new_units: int) -> str:
        text = _trim_review_side(text, self.tokenizer, self.spec.max_input_length)
        inputs = self.tokenizer(text, return_tensors="pt").to(self.spec.device)
        with self._lock, torch.no_grad():
            output_ids = self.model.generate(
                **inputs,
                max_new_tokens=max_new_units,
                do_sample=False,
                num_beams=1,
            )
        return self.tokenizer.decode(output_ids[0], skip_special_tokens=False,
                                     clean_up_tokenization_spaces=True)


class MlmEngine:
    def __init__(self, spec: ModelSpec):
        self.spec = spec
        self.tokenizer = AutoTokenizer.from_pretrained(spec.model)
        self.model = AutoModelForMaskedLM.from_pretrained(spec.model).to(spec.device)
        self.model.eval()
        self._lock = threading.Lock()

    @property
    def name(self) -> str:
        return self.spec.model

    def _log_probs(self, input_ids: torch.Tensor) -> torch.Tensor:
        with self._lock, torch.no_grad():
            logits = self.model(input_ids=input_ids).logits
        return torch.log_softmax(logits, dim=-1)

    def fill_mask(self, text: str, candidates: list[str]) -> tuple[str, dict[str, float]]:
        """Score each candidate word at the answer slot; single-subword words
        read the logit at the mask position, multi-subword words sum their
        subwords' log-probabilities with the candidate substituted in."""
        if not candidates:
            raise ValueError("fill-mask needs a non-empty candidate list")
        mask_token = self.tokenizer.mask_token
        prepared = text.replace("[MASK]", mask_token) if mask_token != "[MASK]" else text
        if prepared.count(mask_token) != 1:
            raise ValueError("input must contain exactly one answer slot")
        prepared = _trim_review_side(prepared, self.tokenizer, self.spec.max_input_length)

        scores: dict[str, float] = {}
        for word in candidates:
            word_ids = self.tokenizer(word, add_special_tokens=False)["input_ids"]
            if len(word_ids) == 1:
                enc = self.tokenizer(prepared, return_tensors="pt").to(self.spec.device)
                mask_pos = (enc["input_ids"][0] == self.tokenizer.mask_token_id).nonzero()[0].item()
                log_probs = self._log_probs(enc["input_ids"])
                scores[word] = log_probs[0, mask_pos, word_ids[0]].item()
            else:
                filled = prepared.replace(mask_token, word)
                enc = self.tokenizer(filled, return_tensors="pt").to(self.spec.device)
                ids = enc["input_ids"][0].tolist()
                start = self._find_subsequence(ids, word_ids)
                log_probs = self._log_probs(enc["input_ids"])
                scores[word] = sum(
                    log_probs[0, start + j, word_ids[j]].item() for j in range(len(word_ids))
                )
        chosen = max(candidates, key=lambda w: scores[w])  # ties keep candidate order
        return chosen, scores

    @staticmethod
    def _find_subsequence(haystack: list[int], needle: list[int]) -> int:
        for i in range(len(haystack) - len(needle) + 1):
            if haystack[i : i + len(needle)] == needle:
                return i
        raise ValueError("candidate tokens not found in the filled input")


def load_engine(spec: ModelSpec):
    return Seq2SeqEngine(spec) if spec.mode == "seq2seq" else MlmEngine(spec)
