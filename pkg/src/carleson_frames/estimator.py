"""scikit-learn style wrapper around the truncated analysis/synthesis pair.

``transform`` maps vectors on the spectrum coordinates to their samples
``<f, D^lambda_k g>``; ``inverse_transform`` recovers vectors from samples by
the minimal-norm least-squares solution. Rows of ``X`` are vectors.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .carleson import make_geometric_real
from .frame_ops import ExponentSet, frame_bounds, reconstruct, synthesis_matrix


def _as_complex_2d(X, n_features, name="X"):
    X = np.asarray(X, dtype=complex)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-d, got shape {X.shape}")
    if X.shape[1] != n_features:
        raise ValueError(f"{name} has {X.shape[1]} features, expected {n_features}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite entries")
    return X


class CarlesonFrame(TransformerMixin, BaseEstimator):
    """Truncated Carleson system ``{D^lambda g}`` as a transformer.

    Parameters
    ----------
    spectrum : CarlesonSpectrum, default=None
        Defaults to the geometric spectrum ``1 - 2**-(j+1)`` with ``n_rows`` points.
    exponents : ExponentSet, default=None
        Defaults to ``0, 1, ..., n_cols - 1``.
    n_rows : int, default=None
        Coordinates kept, starting at ``row_offset``. Defaults to all points.
    n_cols : int, default=400
        Exponents kept.
    row_offset : int, default=0
    rcond : float, default=None
        Relative singular value cutoff used by ``inverse_transform``.
    """

    def __init__(self, spectrum=None, exponents=None, n_rows=None, n_cols=400, row_offset=0,
                 rcond=None):
        self.spectrum = spectrum
        self.exponents = exponents
        self.n_rows = n_rows
        self.n_cols = n_cols
        self.row_offset = row_offset
        self.rcond = rcond

    def fit(self, X=None, y=None):
        spec = self.spectrum
        if spec is None:
            spec = make_geometric_real(0.5, 0.5, self.n_rows or 12)
        n_rows = self.n_rows or len(spec) - self.row_offset
        lam = self.exponents if self.exponents is not None else ExponentSet.naturals(self.n_cols)
        self.synthesis_ = synthesis_matrix(spec, lam, self.row_offset, n_rows, self.n_cols)
        self.bounds_ = frame_bounds(self.synthesis_)
        self.n_features_in_ = n_rows
        if X is not None:
            _as_complex_2d(X, n_rows)
        return self

    @property
    def frame_bounds_(self):
        check_is_fitted(self, "bounds_")
        return self.bounds_.A_hat, self.bounds_.B_hat

    def transform(self, X):
        check_is_fitted(self, "synthesis_")
        X = _as_complex_2d(X, self.n_features_in_)
        return X @ self.synthesis_.entries.conj()

    def inverse_transform(self, S):
        check_is_fitted(self, "synthesis_")
        S = _as_complex_2d(S, self.synthesis_.K_cols, "S")
        return np.vstack([reconstruct(s, self.synthesis_, self.rcond) for s in S])

    def score(self, X, y=None):
        """Negative worst relative round-trip error over the rows of X."""
        X = _as_complex_2d(X, self.n_features_in_)
        Xr = self.inverse_transform(self.transform(X))
        err = np.linalg.norm(Xr - X, axis=1) / np.maximum(np.linalg.norm(X, axis=1), 1e-300)
        return -float(err.max())
