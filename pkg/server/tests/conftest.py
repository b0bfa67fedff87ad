"""Builds tiny random-weight local checkpoints so the wire protocol can be
exercised without network access to a model hub."""
import pytest
import torch
from fastapi.testclient import TestClient
from tokenizers import Tokenizer, models, pre_tokenizers
from transformers import (
    BertConfig,
    BertForMaskedLM,
    BertTokenizerFast,
    PreTrainedTokenizerFast,
    T5Config,
    T5ForConditionalGeneration,
)

from absa_inference_server import ModelSpec, create_app, load_engine

SEQ2SEQ_WORDS = [
    "the", "steak", "was", "very", "tasty", "is", "great", "ok", "bad",
    "given", "expression", "Food", "quality", "Service", "general",
    ",", ":", ".", "|", "NULL",
]


@pytest.fixture(scope="session")
def seq2seq_checkpoint(tmp_path_factory):
    path = tmp_path_factory.mktemp("tiny-t5")
    vocab = {"<unk>": 0, "<pad>": 1, "</s>": 2}
    for w in SEQ2SEQ_WORDS:
        vocab[w] = len(vocab)
    tok = Tokenizer(models.WordLevel(vocab, unk_token="<unk>"))
    tok.pre_tokenizer = pre_tokenizers.Whitespace()
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tok, unk_token="<unk>", pad_token="<pad>", eos_token="</s>")
    fast.add_special_tokens(
        {"additional_special_tokens": [f"<extra_id_{i}>" for i in range(10)]})
    fast.save_pretrained(path)

    torch.manual_seed(0)
    config = T5Config(
        vocab_size=len(fast), d_model=32, d_kv=8, d_ff=64, num_layers=2,
        num_heads=2, pad_token_id=fast.pad_token_id, eos_token_id=fast.eos_token_id,
        decoder_start_token_id=fast.pad_token_id,
    )
    T5ForConditionalGeneration(config).save_pretrained(path)
    return str(path)


MLM_VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "je", "to", "film", ".", ",", ":", "ok", "špatný", "dobr", "##ý",
    "kvalita", "jídla", "dáno", "výrazem", "steak", "byl", "hrozný", "slovo",
]


@pytest.fixture(scope="session")
def mlm_checkpoint(tmp_path_factory):
    path = tmp_path_factory.mktemp("tiny-bert")
    (path / "vocab.txt").write_text("\n".join(MLM_VOCAB) + "\n", encoding="utf-8")
    tokenizer = BertTokenizerFast(
        vocab_file=str(path / "vocab.txt"), do_lower_case=False, strip_accents=False)
    tokenizer.save_pretrained(path)

    torch.manual_seed(0)
    config = BertConfig(
        vocab_size=len(MLM_VOCAB), hidden_size=32, num_hidden_layers=2,
        num_attention_heads=2, intermediate_size=64, max_position_embeddings=512,
        pad_token_id=0,
    )
    BertForMaskedLM(config).save_pretrained(path)
    return str(path)


@pytest.fixture(scope="session")
def seq2seq_client(seq2seq_checkpoint):
    engine = load_engine(ModelSpec(model=seq2seq_checkpoint, mode="seq2seq"))
    return TestClient(create_app(engine))


@pytest.fixture(scope="session")
def mlm_client(mlm_checkpoint):
    engine = load_engine(ModelSpec(model=mlm_checkpoint, mode="mlm"))
    return TestClient(create_app(engine))
