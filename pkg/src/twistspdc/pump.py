"""
Twisted Gaussian Schell-model (TGSM) pump beams.

Infinite coherence length and infinite radius of curvature are stored as
reciprocals (``inv_delta_sq = 0``, ``inv_R = 0``) so that no formula ever
handles a floating-point infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InfeasibleWaist, InvalidParams, OutOfRange, TwistBoundViolation
from .gaussian import williamson

TWIST_BOUND_RTOL = 1e-12
PSD_TOL = 1e-12


@dataclass(frozen=True)
class TgsmParams:
    """Physical description of a rotationally symmetric TGSM beam.

    Parameters
    ----------
    sigma : float
        Beam waist (m).
    inv_delta_sq : float
        ``1 / delta**2`` for transverse coherence length ``delta`` (m^-2);
        0 means a fully coherent beam.
    inv_R : float
        Reciprocal radius of curvature (m^-1); 0 means a flat wavefront.
    u : float
        Signed twist phase (m^-1).
    k : float
        Pump wavenumber (m^-1).
    """

    sigma: float
    inv_delta_sq: float = 0.0
    inv_R: float = 0.0
    u: float = 0.0
    k: float = 2 * math.pi / 400e-9

    def __post_init__(self):
        for name in ("sigma", "inv_delta_sq", "inv_R", "u", "k"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParams(f"{name} must be finite")
        if self.sigma <= 0:
            raise InvalidParams(f"sigma must be > 0, got {self.sigma}")
        if self.k <= 0:
            raise InvalidParams(f"k must be > 0, got {self.k}")
        if self.inv_delta_sq < 0:
            raise InvalidParams("inv_delta_sq must be >= 0")
        bound = self.inv_delta_sq / self.k
        if abs(self.u) > bound * (1 + TWIST_BOUND_RTOL):
            raise TwistBoundViolation(
                f"|u| = {abs(self.u):.6g} exceeds 1/(k delta^2) = {bound:.6g}"
            )

    @classmethod
    def from_delta(cls, sigma, delta=math.inf, inv_R=0.0, u=0.0, k=2 * math.pi / 400e-9):
        """Build from a coherence length in metres (``math.inf`` allowed)."""
        if not delta > 0:
            raise InvalidParams(f"delta must be > 0, got {delta}")
        return cls(sigma=sigma, inv_delta_sq=1.0 / delta**2, inv_R=inv_R, u=u, k=k)

    @property
    def delta(self) -> float:
        if self.inv_delta_sq == 0:
            return math.inf
        return 1.0 / math.sqrt(self.inv_delta_sq)

    @property
    def tau_sq(self) -> float:
        """Wave-vector variance (m^-2)."""
        s2 = self.sigma**2
        return (
            self.inv_delta_sq
            + 0.25 / s2
            + self.k**2 * s2 * (self.inv_R**2 + self.u**2)
        )

    @property
    def beta_sq(self) -> float:
        return 1.0 / (1.0 + 4.0 * self.sigma**2 * self.inv_delta_sq)

    @property
    def normalized_twist(self) -> float:
        if self.inv_delta_sq == 0:
            return 0.0
        return abs(self.u) * self.k / self.inv_delta_sq


@dataclass(frozen=True)
class NormalizedPoint:
    """A point ``(beta, t)`` of the dimensionless parameter plane.

    ``t = |u| k delta^2`` runs over [0, 1]; ``twist_sign`` carries the sign
    of ``u`` separately.
    """

    beta: float
    t: float = 0.0
    twist_sign: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.beta) and 0 < self.beta <= 1):
            raise OutOfRange(f"beta must lie in (0, 1], got {self.beta}")
        if not (math.isfinite(self.t) and 0 <= self.t <= 1):
            raise OutOfRange(f"normalized twist must lie in [0, 1], got {self.t}")
        if self.twist_sign not in (1, -1):
            raise OutOfRange(f"twist_sign must be +1 or -1, got {self.twist_sign}")


@dataclass(frozen=True)
class MixtureModel:
    """Second-moment picture of a beam as an incoherent mixture.

    Every member of the ensemble is a pure Gaussian with covariance
    ``component_cm`` displaced by a mean vector ``(x0, qx0, y0, qy0)`` drawn
    from a zero-mean Gaussian with covariance ``ensemble_cov``.
    """

    component_cm: np.ndarray
    ensemble_cov: np.ndarray
    mode: str = "williamson"
    waist: float | None = None

    @property
    def covariance(self) -> np.ndarray:
        return self.component_cm + self.ensemble_cov


def pump_cm(p: TgsmParams) -> np.ndarray:
    """4x4 covariance matrix of a TGSM beam in (x, q_x, y, q_y) order."""
    return tgsm_matrix(p.sigma, p.inv_delta_sq, p.inv_R, p.u, p.k)


def tgsm_matrix(sigma, inv_delta_sq, inv_R, u, k) -> np.ndarray:
    """TGSM covariance matrix without any parameter validation.

    Lets callers probe matrices beyond the twist bound.
    """
    s2 = sigma**2
    tau2 = inv_delta_sq + 0.25 / s2 + k**2 * s2 * (inv_R**2 + u**2)
    c = -k * s2 * inv_R
    w = k * u * s2
    return np.array(
        [
            [s2, c, 0.0, w],
            [c, tau2, -w, 0.0],
            [0.0, -w, s2, c],
            [w, 0.0, c, tau2],
        ]
    )


def beta_squared(sigma: float, delta: float) -> float:
    """Normalized coherence ``(1 + 4 sigma^2 / delta^2)^-1``."""
    if sigma <= 0 or not delta > 0:
        raise InvalidParams("sigma and delta must be positive")
    return 1.0 / (1.0 + 4.0 * sigma**2 / delta**2)


def _inv_delta_sq_from_beta(beta, sigma):
    # 1/delta^2 = (1 - beta^2) / (4 sigma^2 beta^2), exactly 0 at beta = 1
    return (1.0 - beta**2) / (4.0 * sigma**2 * beta**2)


def delta_from_beta(beta: float, sigma: float) -> float:
    """Coherence length giving normalized coherence ``beta``; inf at beta = 1."""
    if not (math.isfinite(beta) and 0 < beta <= 1):
        raise OutOfRange(f"beta must lie in (0, 1], got {beta}")
    if sigma <= 0:
        raise InvalidParams(f"sigma must be > 0, got {sigma}")
    if beta == 1:
        return math.inf
    return math.sqrt(4.0 * sigma**2 * beta**2 / (1.0 - beta**2))


def max_twist(k: float, delta: float) -> float:
    """Largest admissible ``|u| = 1 / (k delta^2)``; 0 for a coherent beam."""
    if k <= 0 or not delta > 0:
        raise InvalidParams("k and delta must be positive")
    return 1.0 / (k * delta**2)


def params_from_normalized(
    pt: NormalizedPoint, sigma: float, k: float, inv_R: float = 0.0
) -> TgsmParams:
    """Convert a ``(beta, t)`` point into physical TGSM parameters."""
    if sigma <= 0 or k <= 0:
        raise InvalidParams("sigma and k must be positive")
    inv_d2 = _inv_delta_sq_from_beta(pt.beta, sigma)
    u = pt.twist_sign * pt.t * inv_d2 / k
    return TgsmParams(sigma=sigma, inv_delta_sq=inv_d2, inv_R=inv_R, u=u, k=k)


def pump_oam(p: TgsmParams) -> float:
    """Orbital angular momentum per photon, in units of hbar.

    Read off the matrix as ``cov(x, q_y) - cov(y, q_x)``; equals
    ``2 k u sigma^2``.
    """
    V = pump_cm(p)
    return float(V[0, 3] - V[2, 1])


def coherent_cm(waist: float) -> np.ndarray:
    """Round coherent Gaussian beam ``diag(w^2, 1/(4 w^2), w^2, 1/(4 w^2))``."""
    w2 = waist**2
    return np.diag([w2, 0.25 / w2, w2, 0.25 / w2])


def _min_scaled_eigenvalue(M, ref):
    """Smallest eigenvalue of ``M`` after scaling by ``sqrt(diag(ref))``."""
    d = 1.0 / np.sqrt(np.diag(ref))
    return float(np.linalg.eigvalsh(M * d[:, None] * d[None, :])[0])


def mixture_model(
    p: TgsmParams, mode: str = "williamson", waist: float | None = None
) -> MixtureModel:
    """Split the pump CM into a pure component plus a spread of means.

    Parameters
    ----------
    p : TgsmParams
    mode : {"williamson", "symmetric-waist"}
        ``"williamson"`` takes the component ``S S^T / 2`` from the Williamson
        factors ``V = S D S^T``, which always leaves a PSD remainder
        ``S (D - I/2) S^T``.  ``"symmetric-waist"`` uses a round coherent beam
        of waist ``waist`` (default ``p.sigma``) and may be infeasible.
    waist : float, optional

    Raises
    ------
    InfeasibleWaist
        If the symmetric-waist remainder is not positive semidefinite.
    """
    V = pump_cm(p)
    if mode == "williamson":
        f = williamson(V)
        # nu >= 1/2 for a valid pump; round-off can dip just below
        nu = np.where(f.diag - 0.5 <= PSD_TOL, 0.5, f.diag)
        S = f.symplectic
        component = 0.5 * S @ S.T
        excess = np.repeat(nu - 0.5, 2)
        ensemble = (S * excess[None, :]) @ S.T
        ensemble = 0.5 * (ensemble + ensemble.T)
        return MixtureModel(component, ensemble, mode=mode)
    if mode == "symmetric-waist":
        waist = p.sigma if waist is None else float(waist)
        if not waist > 0:
            raise InvalidParams(f"waist must be > 0, got {waist}")
        component = coherent_cm(waist)
        ensemble = V - component
        lo = _min_scaled_eigenvalue(ensemble, V)
        if lo < -PSD_TOL:
            raise InfeasibleWaist(
                f"remainder is not PSD for waist {waist:.6g} m "
                f"(min scaled eigenvalue {lo:.3g})",
                min_eigenvalue=lo,
            )
        return MixtureModel(component, ensemble, mode=mode, waist=waist)
    raise ValueError(f"unknown mixture mode {mode!r}")


def feasible_waists(p: TgsmParams, n_points: int = 200, lower: float = 1e-3):
    """Scan symmetric-waist feasibility over a log grid of ``(lower*sigma, sigma]``.

    Returns
    -------
    waists : ndarray of shape (n_points,)
    feasible : ndarray of bool
    """
    V = pump_cm(p)
    waists = p.sigma * np.logspace(np.log10(lower), 0.0, n_points)
    feasible = np.array(
        [_min_scaled_eigenvalue(V - coherent_cm(w), V) >= -PSD_TOL for w in waists]
    )
    return waists, feasible


def _gaussian_factor(cov):
    """Matrix ``F`` with ``F F^T = cov`` for a PSD ``cov`` of mixed scales."""
    cov = np.asarray(cov, dtype=float)
    d = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    live = d > 0
    F = np.zeros_like(cov)
    if not np.any(live):
        return F
    idx = np.flatnonzero(live)
    corr = cov[np.ix_(idx, idx)] / np.outer(d[idx], d[idx])
    evals, evecs = np.linalg.eigh(corr)
    root = evecs * np.sqrt(np.clip(evals, 0.0, None))
    F[np.ix_(idx, idx)] = d[idx, None] * root
    return F


def sample_component_means(m: MixtureModel, count: int, seed: int = 0) -> np.ndarray:
    """Draw ``count`` ensemble means ``(x0, qx0, y0, qy0)``.

    Deterministic for a given ``seed``.  Returns an array of shape (count, 4).
    """
    count = int(count)
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((count, 4))
    return z @ _gaussian_factor(m.ensemble_cov).T


def covariance_z_scores(samples, target) -> np.ndarray:
    """Entrywise z-scores of the sample covariance of zero-mean ``samples``.

    Uses the Gaussian standard error ``sqrt((S_ij^2 + S_ii S_jj) / N)`` of the
    known-mean estimator.  Entries with zero standard error score 0 when the
    estimate matches and inf otherwise.
    """
    samples = np.asarray(samples, dtype=float)
    target = np.asarray(target, dtype=float)
    n = samples.shape[0]
    emp = samples.T @ samples / n
    d = np.diag(target)
    se = np.sqrt((target**2 + np.outer(d, d)) / n)
    diff = emp - target
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, diff / np.where(se > 0, se, 1.0), np.where(diff == 0, 0.0, np.inf))
    return z

