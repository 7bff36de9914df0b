import logging
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from mmcr.autodiff import Tensor
from mmcr.contrastive import ContrastiveConfig, alignment_gap, draw_mask_pair, info_nce_loss, pretrain_encoder
from mmcr.encoders import CodeEncoder, CodeEncoderConfig, TextEncoder, TextEncoderConfig, build_vocab, text_tokens
from mmcr.java import method_graph
from mmcr.pipeline import CodePretrainOptions, pretrain_code
from mmcr.synthetic import distinct_fragments, joint_corpus
from oracles import info_nce_reference, orthonormal_info_nce

rows = hnp.arrays(
    np.float64,
    st.tuples(st.integers(1, 6), st.integers(2, 5)),
    elements=st.floats(-3, 3, allow_nan=False),
).filter(lambda a: (np.linalg.norm(a, axis=1) > 1e-3).all())


def test_single_row_is_zero():
    h = Tensor(np.array([[0.3, -1.0, 2.0]]))
    assert info_nce_loss(h, Tensor(np.array([[5.0, 1.0, 0.0]]))).item() == 0.0


@pytest.mark.parametrize("n", [2, 4, 16])
def test_identical_rows_give_log_n(n):
    h = Tensor(np.tile([[0.2, 0.5, -0.1]], (n, 1)))
    assert info_nce_loss(h, h, 0.05).item() == pytest.approx(math.log(n), abs=1e-9)


def test_orthonormal_closed_form():
    h = Tensor(np.eye(4))
    value = info_nce_loss(h, h, 0.05).item()
    assert value == pytest.approx(orthonormal_info_nce(4, 0.05), rel=1e-6)
    assert value == pytest.approx(6.2e-9, rel=0.01)


def test_errors():
    h = Tensor(np.ones((2, 3)))
    with pytest.raises(ValueError):
        info_nce_loss(h, h, 0.0)
    with pytest.raises(ValueError):
        info_nce_loss(h, Tensor(np.array([[1.0, 0, 0], [0, 0, 0]])))
    with pytest.raises(ValueError):
        info_nce_loss(h, Tensor(np.ones((3, 3))))
    with pytest.raises(ValueError):
        ContrastiveConfig(temperature=-1)


@given(rows, st.floats(0.05, 2.0))
def test_matches_reference_and_nonnegative(h, tau):
    rng = np.random.default_rng(int(abs(h).sum() * 1000) % 2**32)
    hp = h + rng.normal(scale=0.3, size=h.shape)
    if (np.linalg.norm(hp, axis=1) < 1e-3).any():
        return
    value = info_nce_loss(Tensor(h), Tensor(hp), tau).item()
    assert value >= -1e-12
    assert value == pytest.approx(info_nce_reference(h, hp, tau), rel=1e-7, abs=1e-9)


@given(rows, st.floats(0.01, 100.0), st.integers(0, 5))
def test_scale_invariance(h, c, row):
    row = row % h.shape[0]
    hp = np.roll(h, 1, axis=1) + 0.5
    if (np.linalg.norm(hp, axis=1) < 1e-3).any():
        return
    scaled = h.copy()
    scaled[row] *= c
    a = info_nce_loss(Tensor(h), Tensor(hp), 0.1).item()
    b = info_nce_loss(Tensor(scaled), Tensor(hp), 0.1).item()
    assert b == pytest.approx(a, abs=1e-6)


def test_mask_pair_distinct():
    rng = np.random.default_rng(0)
    for _ in range(100):
        z, z2 = draw_mask_pair(rng)
        assert z != z2


@pytest.fixture(scope="module")
def small_graphs():
    return [method_graph(s) for s in distinct_fragments(12, seed=2)]


def _encoder(graphs, seed=0):
    return CodeEncoder(build_vocab([g.nodes for g in graphs]), CodeEncoderConfig(16, 8, 2), seed=seed)


def test_pretraining_deterministic_and_learns(small_graphs):
    cfg = ContrastiveConfig(batch_size=6, epochs=8, lr=3e-3, seed=4)
    r1 = pretrain_encoder(small_graphs, _encoder(small_graphs), cfg)
    r2 = pretrain_encoder(small_graphs, _encoder(small_graphs), cfg)
    assert r1.loss_history == r2.loss_history
    assert len(r1.loss_history) == 8
    assert r1.loss_history[-1] < r1.loss_history[0]


def test_text_pretraining_runs():
    comments = [text_tokens(c) for c in ("fix loop", "tidy names", "adjust bounds", "simplify body")]
    enc = TextEncoder(build_vocab(comments), TextEncoderConfig(embed_dim=8, hidden_dim=4), seed=0)
    result = pretrain_encoder(comments, enc, ContrastiveConfig(batch_size=4, epochs=3))
    assert len(result.loss_history) == 3 and all(np.isfinite(result.loss_history))


def test_degenerate_corpus_warns(small_graphs, caplog):
    same = [small_graphs[0]] * 4
    with caplog.at_level(logging.WARNING):
        result = pretrain_encoder(same, _encoder(small_graphs), ContrastiveConfig(batch_size=4, epochs=1))
    assert "one distinct input" in caplog.text
    assert np.isfinite(result.loss_history).all()


def test_batch_of_one_is_harmless(small_graphs):
    enc = _encoder(small_graphs)
    before = enc.params.state()
    result = pretrain_encoder(small_graphs[:1], enc, ContrastiveConfig(batch_size=1, epochs=2))
    assert result.loss_history == [0.0, 0.0]
    for name, arr in before.items():
        np.testing.assert_array_equal(arr, enc.params[name].data)


def test_empty_corpus_rejected(small_graphs):
    with pytest.raises(ValueError):
        pretrain_encoder([], _encoder(small_graphs))


def test_pretraining_ignores_labels():
    samples = joint_corpus(10, seed=6)
    flipped = [replace(s, label=1 - s.label) for s in samples]
    opts = CodePretrainOptions(
        encoder=CodeEncoderConfig(8, 4, 1), contrastive=ContrastiveConfig(batch_size=5, epochs=1), skipgram_epochs=1
    )
    a, hist_a = pretrain_code(samples, opts)
    b, hist_b = pretrain_code(flipped, opts)
    assert hist_a == hist_b
    for name, t in a.params.items():
        np.testing.assert_array_equal(t.data, b.params[name].data)


def test_alignment_gap_bounds(small_graphs):
    pos, neg = alignment_gap(_encoder(small_graphs), small_graphs)
    assert -1 <= neg <= 1 and -1 <= pos <= 1
