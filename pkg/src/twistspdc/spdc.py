"""
Two-photon Gaussian model of SPDC pumped by a TGSM beam.

The state is built in the global coordinates
``r+- = (r1 +- r2) / 2``, ``q+- = q1 +- q2`` where it is block diagonal
(pump block, phase-matching block), then mapped to per-photon coordinates by
the constant symplectic transform returned by :func:`coordinate_transform`.
Degenerate photons (``k1 = k2 = k/2``) are assumed throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidParams
from .gaussian import (
    PHYSICAL_TOL,
    SymplecticSpectrum,
    _pt_signs,
    _symplectic_eigs,
    log_negativity_from_spectrum,
    purity,
    symplectic_spectrum,
)
from .pump import TgsmParams, pump_cm

NPT_TOL = 1e-9

ROW_FIELDS = (
    "beta",
    "t_norm",
    "u_inv_m",
    "delta_m",
    "tau2_inv_m2",
    "lambda_minus",
    "lambda_plus",
    "log_negativity",
    "mancini_min",
    "purity",
    "npt_entangled",
    "mancini_violated",
)
EXTRA_FIELDS = ("pump_oam", "photon_oam", "a_plus", "a_minus")


@dataclass(frozen=True)
class PhaseMatching:
    """Double-Gaussian surrogate of the phase-matching function.

    Parameters
    ----------
    L : float
        Crystal length (m).
    k : float
        Pump wavenumber (m^-1).
    """

    L: float
    k: float

    def __post_init__(self):
        if not (math.isfinite(self.L) and self.L > 0):
            raise InvalidParams(f"crystal length must be > 0, got {self.L}")
        if not (math.isfinite(self.k) and self.k > 0):
            raise InvalidParams(f"wavenumber must be > 0, got {self.k}")

    @property
    def sigma_minus_sq(self) -> float:
        return 9.0 * self.L / (10.0 * self.k)

    @property
    def delta_minus_sq(self) -> float:
        return 3.0 * self.k / (2.0 * self.L)


@dataclass(frozen=True)
class TwoPhotonState:
    global_cm: np.ndarray
    photon_cm: np.ndarray
    pump: TgsmParams
    pm: PhaseMatching


@dataclass(frozen=True)
class EntanglementReport:
    """Entanglement figures of merit at one parameter point.

    ``mancini_products`` is ``("+-", "-+")`` = ``(sigma Delta_-, sigma_- tau)``.
    ``cross_twist_diff`` and ``cross_twist_sum`` are
    ``<x1 q_y2> -+ <x2 q_y1>`` read from the photon CM.
    """

    beta: float
    t_norm: float
    u_inv_m: float
    delta_m: float
    tau2_inv_m2: float
    lambda_minus: float
    lambda_plus: float
    log_negativity: float
    mancini_products: tuple
    purity_two_photon: float
    npt_entangled: bool
    mancini_violated: bool
    pump_oam: float
    photon_oam: float
    a_plus: float
    a_minus: float
    cross_twist_diff: float = 0.0
    cross_twist_sum: float = 0.0
    pt_spectrum: np.ndarray = field(default=None, repr=False)

    @property
    def mancini_min(self) -> float:
        return min(self.mancini_products)

    def as_row(self) -> dict:
        """Flat mapping in sweep-column order followed by the extra fields."""
        row = {
            "beta": self.beta,
            "t_norm": self.t_norm,
            "u_inv_m": self.u_inv_m,
            "delta_m": self.delta_m,
            "tau2_inv_m2": self.tau2_inv_m2,
            "lambda_minus": self.lambda_minus,
            "lambda_plus": self.lambda_plus,
            "log_negativity": self.log_negativity,
            "mancini_min": self.mancini_min,
            "purity": self.purity_two_photon,
            "npt_entangled": self.npt_entangled,
            "mancini_violated": self.mancini_violated,
        }
        for name in EXTRA_FIELDS:
            row[name] = getattr(self, name)
        return row


def phase_matching_cm(pm: PhaseMatching) -> np.ndarray:
    """``diag(sigma_-^2, Delta_-^2, sigma_-^2, Delta_-^2)``."""
    s, d = pm.sigma_minus_sq, pm.delta_minus_sq
    return np.diag([s, d, s, d])


def _transform():
    R = np.zeros((8, 8))
    for c in range(4):
        # positions add, momenta average: x1 = x+ + x-, q1 = (q+ + q-)/2
        a = 1.0 if c % 2 == 0 else 0.5
        R[c, c] = R[c, 4 + c] = a
        R[4 + c, c] = a
        R[4 + c, 4 + c] = -a
    R.setflags(write=False)
    return R


_R = _transform()


def coordinate_transform() -> np.ndarray:
    """Matrix mapping global ``(xi_+, xi_-)`` to per-photon ``(xi_1, xi_2)``."""
    return _R.copy()


def two_photon_state(pump: TgsmParams, pm: PhaseMatching) -> TwoPhotonState:
    """Assemble ``G = V+ (+) V-`` and ``V12 = R G R^T``."""
    if not math.isclose(pump.k, pm.k, rel_tol=1e-12):
        raise InvalidParams("pump and phase matching must share the wavenumber k")
    G = np.zeros((8, 8))
    G[:4, :4] = pump_cm(pump)
    G[4:, 4:] = phase_matching_cm(pm)
    V12 = _R @ G @ _R.T
    return TwoPhotonState(global_cm=G, photon_cm=V12, pump=pump, pm=pm)


def _closed_form(tau2, inv_d2, s2, twist_sq, k, sm2, dm2):
    """Vectorized ``(lambda_-, lambda_+, a_+, a_-)``.

    ``twist_sq = u^2 + 1/R^2``.  ``lambda_-`` uses the rearrangement
    ``lambda_-^2 = 2 Dm2 sm2 s2 (1/delta^2 + 1/(4 s2)) / (a_+ + sqrt(disc))``,
    free of the cancellation in ``a_+ - sqrt(disc)`` at small beta.
    """
    a_plus = tau2 * sm2 + dm2 * s2
    a_minus = tau2 * sm2 - dm2 * s2
    root = np.sqrt(4.0 * k**2 * dm2 * sm2 * s2**2 * twist_sq + a_minus**2)
    lam_plus = np.sqrt(0.5 * (a_plus + root))
    lam_minus = np.sqrt(2.0 * dm2 * sm2 * s2 * (inv_d2 + 0.25 / s2) / (a_plus + root))
    return lam_minus, lam_plus, a_plus, a_minus


def closed_form_eigs(pump: TgsmParams, pm: PhaseMatching) -> tuple[float, float]:
    """Two-fold degenerate PT symplectic eigenvalues ``(lambda_-, lambda_+)``."""
    lm, lp, _, _ = _closed_form(
        pump.tau_sq,
        pump.inv_delta_sq,
        pump.sigma**2,
        pump.u**2 + pump.inv_R**2,
        pump.k,
        pm.sigma_minus_sq,
        pm.delta_minus_sq,
    )
    return float(lm), float(lp)


def mancini_products(state: TwoPhotonState) -> tuple[float, float]:
    """Standard-deviation products ``("+-", "-+")`` along x.

    ``"+-"`` is ``std(x+) std(q-x)`` and ``"-+"`` is ``std(x-) std(q+x)``.
    """
    G = state.global_cm
    return (
        float(np.sqrt(G[0, 0] * G[5, 5])),
        float(np.sqrt(G[4, 4] * G[1, 1])),
    )


def mancini_products_y(state: TwoPhotonState) -> tuple[float, float]:
    G = state.global_cm
    return (
        float(np.sqrt(G[2, 2] * G[7, 7])),
        float(np.sqrt(G[6, 6] * G[3, 3])),
    )


def two_photon_purity(pump: TgsmParams, pm: PhaseMatching) -> float:
    """``mu_12 = beta^2 mu_-`` (the purity factorizes over the global blocks)."""
    return pump.beta_sq * purity(phase_matching_cm(pm))


def pt_spectrum_oracle(state: TwoPhotonState, party: int = 2) -> SymplecticSpectrum:
    """Numerical symplectic spectrum of the partially transposed photon CM."""
    signs = _pt_signs(party)
    return symplectic_spectrum(state.photon_cm * signs[:, None] * signs[None, :])


def photon_oam(state: TwoPhotonState) -> float:
    """``cov(x1, q_y1) - cov(y1, q_x1)`` in units of hbar."""
    V = state.photon_cm
    return float(V[0, 3] - V[2, 1])


def evaluate(beta, t, sigma, k, L, inv_R=0.0, twist_sign=1, party=2):
    """Vectorized evaluation of every report quantity over parameter arrays.

    ``beta`` and ``t`` broadcast together; the remaining physical parameters
    are scalars.  Returns a dict of 1-D arrays keyed by ``ROW_FIELDS`` and
    ``EXTRA_FIELDS`` plus ``pt_spectrum`` (shape (n, 4)),
    ``mancini_plus_minus``, ``mancini_minus_plus`` and the two cross-twist
    moments.  This is the single numerical path behind
    :func:`entanglement_report`, the estimator and the sweep.
    """
    beta, t = np.broadcast_arrays(
        np.atleast_1d(np.asarray(beta, dtype=float)),
        np.atleast_1d(np.asarray(t, dtype=float)),
    )
    beta = beta.ravel()
    t = t.ravel()
    inv_d2 = (1.0 - beta**2) / (4.0 * sigma**2 * beta**2)
    u = twist_sign * t * inv_d2 / k
    return _evaluate(beta, t, inv_d2, u, sigma, k, L, inv_R, party)


def _evaluate(beta, t, inv_d2, u, sigma, k, L, inv_R, party):
    n = beta.size
    s2 = sigma**2
    pm = PhaseMatching(L, k)
    sm2, dm2 = pm.sigma_minus_sq, pm.delta_minus_sq
    tau2 = inv_d2 + 0.25 / s2 + k**2 * s2 * (inv_R**2 + u**2)
    with np.errstate(divide="ignore"):
        delta = np.where(inv_d2 > 0, 1.0 / np.sqrt(inv_d2), np.inf)

    lam_minus, lam_plus, a_plus, a_minus = _closed_form(
        tau2, inv_d2, s2, u**2 + inv_R**2, k, sm2, dm2
    )

    c = -k * s2 * inv_R
    w = k * u * s2
    G = np.zeros((n, 8, 8))
    G[:, 0, 0] = G[:, 2, 2] = s2
    G[:, 1, 1] = G[:, 3, 3] = tau2
    G[:, 0, 1] = G[:, 1, 0] = G[:, 2, 3] = G[:, 3, 2] = c
    G[:, 0, 3] = G[:, 3, 0] = w
    G[:, 1, 2] = G[:, 2, 1] = -w
    G[:, 4, 4] = G[:, 6, 6] = sm2
    G[:, 5, 5] = G[:, 7, 7] = dm2
    V12 = _R @ G @ _R.T
    signs = _pt_signs(party)
    pt_nu, _ = _symplectic_eigs(V12 * signs[:, None] * signs[None, :])

    mancini_pm = np.sqrt(s2 * dm2) * np.ones(n)
    mancini_mp = np.sqrt(sm2 * tau2)
    mancini_min = np.minimum(mancini_pm, mancini_mp)
    mu_minus = 1.0 / (4.0 * np.sqrt(sm2 * dm2 * sm2 * dm2))
    return {
        "beta": beta,
        "t_norm": t,
        "u_inv_m": u,
        "delta_m": delta,
        "tau2_inv_m2": tau2,
        "lambda_minus": lam_minus,
        "lambda_plus": lam_plus,
        "log_negativity": log_negativity_from_spectrum(pt_nu),
        "mancini_min": mancini_min,
        "purity": beta**2 * mu_minus,
        "npt_entangled": lam_minus < 0.5 - NPT_TOL,
        "mancini_violated": mancini_min < 0.5,
        "pump_oam": G[:, 0, 3] - G[:, 2, 1],
        "photon_oam": V12[:, 0, 3] - V12[:, 2, 1],
        "a_plus": a_plus,
        "a_minus": a_minus,
        "pt_spectrum": pt_nu,
        "mancini_plus_minus": mancini_pm,
        "mancini_minus_plus": mancini_mp,
        "cross_twist_diff": V12[:, 0, 7] - V12[:, 4, 3],
        "cross_twist_sum": V12[:, 0, 7] + V12[:, 4, 3],
    }


def entanglement_report(pump: TgsmParams, pm: PhaseMatching) -> EntanglementReport:
    """Evaluate every figure of merit for one pump / crystal configuration."""
    if not math.isclose(pump.k, pm.k, rel_tol=1e-12):
        raise InvalidParams("pump and phase matching must share the wavenumber k")
    out = _evaluate(
        np.array([math.sqrt(pump.beta_sq)]),
        np.array([pump.normalized_twist]),
        np.array([pump.inv_delta_sq]),
        np.array([pump.u]),
        pump.sigma,
        pump.k,
        pm.L,
        pump.inv_R,
        party=2,
    )
    f = {key: value[0] for key, value in out.items()}
    return EntanglementReport(
        beta=float(f["beta"]),
        t_norm=float(f["t_norm"]),
        u_inv_m=float(f["u_inv_m"]),
        delta_m=float(f["delta_m"]),
        tau2_inv_m2=float(f["tau2_inv_m2"]),
        lambda_minus=float(f["lambda_minus"]),
        lambda_plus=float(f["lambda_plus"]),
        log_negativity=float(f["log_negativity"]),
        mancini_products=(float(f["mancini_plus_minus"]), float(f["mancini_minus_plus"])),
        purity_two_photon=float(f["purity"]),
        npt_entangled=bool(f["npt_entangled"]),
        mancini_violated=bool(f["mancini_violated"]),
        pump_oam=float(f["pump_oam"]),
        photon_oam=float(f["photon_oam"]),
        a_plus=float(f["a_plus"]),
        a_minus=float(f["a_minus"]),
        cross_twist_diff=float(f["cross_twist_diff"]),
        cross_twist_sum=float(f["cross_twist_sum"]),
        pt_spectrum=np.asarray(f["pt_spectrum"]),
    )


def is_physical_state(state: TwoPhotonState, tol: float = PHYSICAL_TOL) -> bool:
    nu, _ = _symplectic_eigs(state.photon_cm)
    return bool(nu[0] >= 0.5 - tol)

