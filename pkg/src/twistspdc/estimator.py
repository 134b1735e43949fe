"""scikit-learn transformer mapping ``(beta, t)`` rows to entanglement features."""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import InvalidParams, OutOfRange
from .spdc import EXTRA_FIELDS, ROW_FIELDS, PhaseMatching, evaluate

DEFAULT_WAVELENGTH_M = 400e-9
DEFAULT_SIGMA_M = 50e-6
DEFAULT_LENGTH_M = 1e-2


def check_normalized_points(X) -> np.ndarray:
    """Validate an ``(n_samples, 2)`` array of ``(beta, t)`` rows.

    Raises
    ------
    OutOfRange
        If any beta lies outside (0, 1] or any t outside [0, 1].
    """
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != 2:
        raise ValueError(f"expected 2 columns (beta, t), got {X.shape[1]}")
    beta, t = X[:, 0], X[:, 1]
    if np.any((beta <= 0) | (beta > 1)):
        raise OutOfRange("beta must lie in (0, 1]")
    if np.any((t < 0) | (t > 1)):
        raise OutOfRange("normalized twist must lie in [0, 1]")
    return X


class SPDCEntanglementTransformer(TransformerMixin, BaseEstimator):
    """Entanglement features of TGSM-pumped SPDC at normalized pump points.

    Each input row is ``(beta, t)``: the normalized pump coherence and the
    normalized twist ``|u| k delta^2``.  The output columns follow
    :data:`twistspdc.spdc.ROW_FIELDS` (the sweep CSV columns), optionally
    followed by :data:`twistspdc.spdc.EXTRA_FIELDS`.  Boolean columns come
    out as 0.0 / 1.0.

    Parameters
    ----------
    wavelength_m : float, default=400e-9
        Pump wavelength.
    sigma_m : float, default=50e-6
        Pump beam waist.
    crystal_length_m : float, default=1e-2
    curvature_inv_m : float, default=0.0
        Reciprocal radius of curvature of the pump.
    twist_sign : {1, -1}, default=1
    extra_features : bool, default=False
        Append the OAM and intermediate invariants to the output.

    Attributes
    ----------
    k_ : float
        Pump wavenumber.
    phase_matching_ : PhaseMatching
    n_features_in_ : int
    """

    def __init__(
        self,
        wavelength_m=DEFAULT_WAVELENGTH_M,
        sigma_m=DEFAULT_SIGMA_M,
        crystal_length_m=DEFAULT_LENGTH_M,
        curvature_inv_m=0.0,
        twist_sign=1,
        extra_features=False,
    ):
        self.wavelength_m = wavelength_m
        self.sigma_m = sigma_m
        self.crystal_length_m = crystal_length_m
        self.curvature_inv_m = curvature_inv_m
        self.twist_sign = twist_sign
        self.extra_features = extra_features

    def _validate_params(self):
        for name in ("wavelength_m", "sigma_m", "crystal_length_m"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidParams(f"{name} must be a positive number, got {value}")
        if not math.isfinite(self.curvature_inv_m):
            raise InvalidParams("curvature_inv_m must be finite")
        if self.twist_sign not in (1, -1):
            raise InvalidParams(f"twist_sign must be +1 or -1, got {self.twist_sign}")

    def fit(self, X, y=None):
        self._validate_params()
        X = check_normalized_points(X)
        self.n_features_in_ = X.shape[1]
        self.k_ = 2 * math.pi / self.wavelength_m
        self.phase_matching_ = PhaseMatching(self.crystal_length_m, self.k_)
        return self

    def evaluate(self, X) -> dict:
        """Raw per-row results as a dict of arrays (see ``spdc.evaluate``)."""
        check_is_fitted(self, "k_")
        X = check_normalized_points(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError("feature count differs from fit")
        return evaluate(
            X[:, 0],
            X[:, 1],
            sigma=self.sigma_m,
            k=self.k_,
            L=self.crystal_length_m,
            inv_R=self.curvature_inv_m,
            twist_sign=self.twist_sign,
        )

    def transform(self, X):
        out = self.evaluate(X)
        names = self.get_feature_names_out()
        return np.column_stack([np.asarray(out[name], dtype=float) for name in names])

    def get_feature_names_out(self, input_features=None):
        names = ROW_FIELDS + (EXTRA_FIELDS if self.extra_features else ())
        return np.asarray(names, dtype=object)
