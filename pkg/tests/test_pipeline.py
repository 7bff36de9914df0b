import numpy as np
import pytest

from mmcr.classifier import ReviewModel, TrainConfig, prepare
from mmcr.contrastive import ContrastiveConfig
from mmcr.data import SplitSpec
from mmcr.encoders import CodeEncoderConfig, TextEncoderConfig
from mmcr.pipeline import (
    CodePretrainOptions,
    TextPretrainOptions,
    TransferOptions,
    code_fragments,
    environment_seed,
    load_code_encoder,
    load_model,
    load_text_encoder,
    pretrain_code,
    pretrain_text,
    save_encoder,
    save_model,
    transfer_eval,
)
from mmcr.synthetic import joint_corpus

FAST = ContrastiveConfig(batch_size=8, epochs=1)
CODE = CodePretrainOptions(CodeEncoderConfig(8, 6, 1), FAST, skipgram_epochs=1)
TEXT = TextPretrainOptions(TextEncoderConfig(0, 8, 6), FAST)


@pytest.fixture(scope="module")
def samples():
    return joint_corpus(16, seed=4)


@pytest.fixture(scope="module")
def encoders(samples):
    code, code_hist = pretrain_code(samples, CODE)
    text, text_hist = pretrain_text(samples, TEXT)
    assert len(code_hist) == len(text_hist) == 1
    return code, text


def test_code_fragments_sides(samples):
    assert len(code_fragments(samples)) == 32
    orig = code_fragments(samples, "original")
    assert len(orig) == 16 and orig[0].nodes == samples[0].graph("original").nodes
    with pytest.raises(ValueError):
        code_fragments(samples, "left")


def test_encoder_round_trip(encoders, samples, tmp_path):
    code, text = encoders
    save_encoder(code, tmp_path / "c.npz", "code")
    save_encoder(text, tmp_path / "t.npz", "text")
    code2 = load_code_encoder(tmp_path / "c.npz")
    text2 = load_text_encoder(tmp_path / "t.npz")
    comments = [s.comment.split() for s in samples[:4]]
    np.testing.assert_array_equal(text.encode_batch(comments).data, text2.encode_batch(comments).data)
    graphs = code_fragments(samples[:4], "revised")
    np.testing.assert_array_equal(code.encode_batch(graphs).data, code2.encode_batch(graphs).data)
    assert code2.vocab.itos == code.vocab.itos
    with pytest.raises(ValueError):
        load_text_encoder(tmp_path / "c.npz")
    with pytest.raises(ValueError):
        load_code_encoder(tmp_path / "t.npz")
    with pytest.raises(FileNotFoundError):
        load_code_encoder(tmp_path / "none.npz")


def test_model_round_trip(encoders, samples, tmp_path):
    code, text = encoders
    model = ReviewModel(code, text, seed=2)
    save_model(model, tmp_path / "m.npz", TrainConfig())
    loaded = load_model(tmp_path / "m.npz")
    items = prepare(samples)
    np.testing.assert_array_equal(model.logits(items), loaded.logits(items))
    # the code encoder inside a model checkpoint is reusable on its own
    inner = load_code_encoder(tmp_path / "m.npz")
    for name, t in code.params.items():
        np.testing.assert_array_equal(inner.params[name].data, t.data)


def test_transfer_eval_shapes():
    source = joint_corpus(16, seed=8, project="B")
    target = joint_corpus(20, seed=9)
    opts = TransferOptions(CODE, TEXT, TrainConfig(epochs=1, batch_size=8), SplitSpec(0.75))
    transferred, self_trained = transfer_eval(source, target, opts)
    assert (transferred.label, self_trained.label) == ("transfer", "self")
    assert transferred.evaluation.cm.total == self_trained.evaluation.cm.total == 5


def test_environment_seed(monkeypatch):
    monkeypatch.delenv("MMCR_SEED", raising=False)
    assert environment_seed(3) == 3
    monkeypatch.setenv("MMCR_SEED", "")
    assert environment_seed() == 0
    monkeypatch.setenv("MMCR_SEED", "42")
    assert environment_seed() == 42
    monkeypatch.setenv("MMCR_SEED", "x")
    with pytest.raises(ValueError):
        environment_seed()
