"""Hierarchically compositional kernel learning.

Thin wrapper over the C++ core: kernel ridge regression and classification
with a positive-definite hierarchical kernel (O(n r) storage, O(n r^2)
training), plus Nystrom / random-feature / block-diagonal baselines and
kernel PCA utilities.
"""

from ._core import (
    HckError,
    Model,
    alignment_diff,
    evaluate,
    fit,
    gp_posterior,
    hier_gram,
    kernel_gram,
    kpca_embed,
    levels_to_sizes,
    load_model,
)

__all__ = [
    "HckError",
    "Model",
    "alignment_diff",
    "evaluate",
    "fit",
    "gp_posterior",
    "hier_gram",
    "kernel_gram",
    "kpca_embed",
    "levels_to_sizes",
    "load_model",
]
