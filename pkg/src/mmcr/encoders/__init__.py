"""Code and comment encoders plus symbol-embedding pretraining."""

from .code import CodeEncoder, CodeEncoderConfig, encode_code
from .skipgram import skipgram_pretrain
from .text import TextEncoder, TextEncoderConfig, encode_text
from .vocab import PAD, UNK, Vocab, build_vocab, text_tokens

__all__ = [
    "CodeEncoder",
    "CodeEncoderConfig",
    "PAD",
    "TextEncoder",
    "TextEncoderConfig",
    "UNK",
    "Vocab",
    "build_vocab",
    "encode_code",
    "encode_text",
    "skipgram_pretrain",
    "text_tokens",
]
