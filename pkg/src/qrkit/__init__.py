"""qrkit: fast QR / R-factor updating with an exact flop cost model.

Library layout:

* :mod:`qrkit.linalg` -- Givens/Householder primitives, from-scratch QR,
  triangular solves (the correctness oracles).
* :mod:`qrkit.qr_update` -- full (Q, R) updates for row/column changes.
* :mod:`qrkit.r_update` -- Q-free updates of the p x p triangular factor,
  plus Sherman-Morrison maintenance of (X^T X)^{-1}.
* :mod:`qrkit.counted` / :mod:`qrkit.flops` -- flop-instrumented mirrors of
  every update and the closed-form cost model they are checked against.
* :mod:`qrkit.bayes` -- spike-and-slab reversible-jump variable selection
  built on the thin updates.
* :mod:`qrkit.cli` -- the ``qrkit`` command line front end.
"""

from .counted import FlopCounter
from .flops import CostQuery, Op, cost_grid, measured_cost, predict_cost
from .linalg import (
    GivensRotation,
    HouseholderReflector,
    QrFactors,
    align_column_signs,
    backward_substitution,
    forward_substitution,
    givens,
    householder,
    move_rows_indices,
    qr_factorize,
    thin_r,
)
from .qr_update import (
    qr_add_cols,
    qr_add_rows,
    qr_delete_cols,
    qr_delete_cols_nonadjacent,
    qr_delete_rows,
)
from .r_update import (
    gram_inverse_add_col,
    gram_inverse_delete_col,
    r_add_cols,
    r_add_cols_gram,
    r_add_rows,
    r_delete_cols,
    r_delete_cols_nonadjacent,
    r_delete_rows,
)

__version__ = "0.1.0"

__all__ = [
    "CostQuery",
    "FlopCounter",
    "GivensRotation",
    "HouseholderReflector",
    "Op",
    "QrFactors",
    "align_column_signs",
    "backward_substitution",
    "cost_grid",
    "forward_substitution",
    "givens",
    "gram_inverse_add_col",
    "gram_inverse_delete_col",
    "householder",
    "measured_cost",
    "move_rows_indices",
    "predict_cost",
    "qr_add_cols",
    "qr_add_rows",
    "qr_delete_cols",
    "qr_delete_cols_nonadjacent",
    "qr_delete_rows",
    "qr_factorize",
    "r_add_cols",
    "r_add_cols_gram",
    "r_add_rows",
    "r_delete_cols",
    "r_delete_cols_nonadjacent",
    "r_delete_rows",
    "thin_r",
    "__version__",
]
