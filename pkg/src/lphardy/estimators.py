"""scikit-learn style wrappers around the decomposition pipeline.

``fit`` accepts either sample points with values (``X`` of shape ``(M, n)``
and ``y``), a :class:`SampledFunction`, or a :class:`SeparableRational`.
``transform`` returns the per-octant piece values at new points, one column
per octant in lexicographic order with ``+`` first.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .approx import SampledFunction, from_rational, from_samples, telescope
from .decompose import DecomposeConfig, decompose
from .hardy import all_octants, octant_label
from .polyalg import SeparableRational
from .split import SplitParams, default_m, select_phase, split_atom


def _as_function(X, y) -> SampledFunction:
    if isinstance(X, SampledFunction):
        return X
    if isinstance(X, SeparableRational):
        return from_rational(X)
    if y is None:
        raise ValueError("sample points need values: pass y")
    return from_samples(X, y)


def _points(X, n: int) -> np.ndarray:
    Z = np.asarray(X)
    if Z.ndim == 1:
        Z = Z[:, None]
    if Z.shape[1] != n:
        raise ValueError(f"expected points with {n} columns, got {Z.shape[1]}")
    return Z.astype(complex)


class HardyDecomposer(TransformerMixin, BaseEstimator):
    """Split a function into octant Hardy space pieces."""

    def __init__(self, p=0.5, epsilon=0.5, max_atoms=8, seed=42, tol=None):
        self.p = p
        self.epsilon = epsilon
        self.max_atoms = max_atoms
        self.seed = seed
        self.tol = tol

    def fit(self, X, y=None):
        f = _as_function(X, y)
        cfg = DecomposeConfig(epsilon=self.epsilon, max_atoms=self.max_atoms, seed=self.seed, tol=self.tol)
        self.decomposition_ = decompose(f, self.p, config=cfg)
        self.n_features_in_ = f.n
        self.octants_ = list(self.decomposition_.per_octant)
        return self

    def transform(self, X):
        check_is_fitted(self, "decomposition_")
        Z = _points(X, self.n_features_in_)
        cols = []
        for s in self.octants_:
            ser = self.decomposition_.per_octant[s]
            v = np.zeros(len(Z), dtype=complex)
            for a in ser.atoms:
                v += a.evaluate_points(Z, check_poles=False)
            cols.append(v)
        return np.stack(cols, axis=1)

    def predict(self, X):
        return self.transform(X).sum(axis=1)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "octants_")
        return np.array([f"octant_{octant_label(s)}" for s in self.octants_], dtype=object)


class RationalAtomApproximator(BaseEstimator):
    """Telescoping sum of rational atoms approximating a function in L^p."""

    def __init__(self, p=0.5, epsilon=0.5, max_atoms=8, tol=None):
        self.p = p
        self.epsilon = epsilon
        self.max_atoms = max_atoms
        self.tol = tol

    def fit(self, X, y=None):
        f = _as_function(X, y)
        self.series_ = telescope(f, self.p, self.epsilon, self.max_atoms, tol=self.tol)
        self.atoms_ = list(self.series_.atoms)
        self.n_features_in_ = f.n
        return self

    def predict(self, X):
        check_is_fitted(self, "atoms_")
        Z = _points(X, self.n_features_in_)
        out = np.zeros(len(Z), dtype=complex)
        for a in self.atoms_:
            out += a.evaluate_points(Z, check_poles=False)
        return out


class OctantSplitter(TransformerMixin, BaseEstimator):
    """Octant components of one rational atom; ``phi=None`` picks phases on a grid."""

    def __init__(self, p=0.5, m=None, phi=None, grid_per_dim=16, seed=42, tol=None):
        self.p = p
        self.m = m
        self.phi = phi
        self.grid_per_dim = grid_per_dim
        self.seed = seed
        self.tol = tol

    def fit(self, X, y=None):
        if not isinstance(X, SeparableRational):
            raise TypeError("OctantSplitter.fit expects a SeparableRational")
        m = tuple(self.m) if self.m is not None else default_m(X)
        if self.phi is None:
            _, sp = select_phase(X, self.p, m, self.grid_per_dim, self.seed, tol=self.tol)
        else:
            sp = split_atom(X, self.p, SplitParams(m, tuple(self.phi)), tol=self.tol, with_certificates=True)
        self.split_ = sp
        self.n_features_in_ = X.n
        self.octants_ = all_octants(X.n)
        return self

    def transform(self, X):
        check_is_fitted(self, "split_")
        Z = _points(X, self.n_features_in_)
        return np.stack(
            [self.split_.components[s].evaluate_points(Z, check_poles=False) for s in self.octants_], axis=1
        )

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "octants_")
        return np.array([f"octant_{octant_label(s)}" for s in self.octants_], dtype=object)
