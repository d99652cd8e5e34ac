"""Linear dimensionality reduction via singular value decomposition."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .validation import check_fitted, check_matrix


class PcaReducer(TransformerMixin, BaseEstimator):
    """Project sensory rows onto the top principal directions.

    Centering plus truncated SVD; components carry a deterministic sign
    (largest-magnitude coefficient positive) so refits on the same data
    reproduce the same projection.

    Attributes after fit: ``mean_`` (d,), ``components_`` (k, d) with
    orthonormal rows, ``explained_variance_`` (k,) non-increasing.
    """

    def __init__(self, n_components=2):
        self.n_components = n_components

    @property
    def min_fit_rows(self):
        return self.n_components

    def fit(self, X, y=None):
        X = check_matrix(X, name="X", min_rows=1)
        k = self.n_components
        if not 1 <= k <= min(X.shape):
            raise ValueError(
                f"n_components={k} must lie in [1, min(n_samples, n_features)]"
                f" = [1, {min(X.shape)}]"
            )
        self.mean_ = X.mean(axis=0)
        centered = X - self.mean_
        _, svals, vt = np.linalg.svd(centered, full_matrices=False)
        components = vt[:k].copy()
        for row in components:
            j = int(np.argmax(np.abs(row)))
            if row[j] < 0:
                row *= -1.0
        self.components_ = components
        denom = max(X.shape[0] - 1, 1)
        self.explained_variance_ = (svals[:k] ** 2) / denom
        return self

    def transform(self, X):
        check_fitted(self, ["mean_", "components_"])
        X = check_matrix(X, n_cols=self.mean_.shape[0], name="X")
        return (X - self.mean_) @ self.components_.T

    def inverse_transform(self, Z):
        check_fitted(self, ["mean_", "components_"])
        Z = check_matrix(Z, n_cols=self.components_.shape[0], name="Z")
        return Z @ self.components_ + self.mean_

    def reconstruct(self, X):
        """Project X to the latent space and back."""
        return self.inverse_transform(self.transform(X))
