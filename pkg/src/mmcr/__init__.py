"""Contrastive multi-modal code review: Java AST graphs, contrastive encoders, fused accept/reject classifier."""

__version__ = "0.1.0"
