"""Minimal reverse-mode autodiff, optimizer and checkpointing."""

from .checkpoint import CheckpointError, atomic_write_bytes, load_checkpoint, read_checkpoint, save_checkpoint
from .gradcheck import gradcheck
from .params import (
    AdamState,
    DropoutMask,
    ParameterStore,
    adam_step,
    dropout,
    l2_penalty,
    rng_for,
    uniform_init,
)
from .tensor import (
    NonFiniteError,
    ShapeError,
    Tensor,
    add,
    checked,
    clip,
    concat,
    cosine_sim,
    div,
    embedding,
    exp,
    gru,
    index_select,
    l2_normalize,
    log,
    log_softmax,
    matmul,
    mean,
    mul,
    neg,
    relu,
    reshape,
    set_checked,
    sigmoid,
    slice_,
    softmax,
    sqrt,
    sub,
    sum_,
    tanh,
    transpose,
)
