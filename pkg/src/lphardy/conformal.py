"""Cayley-type maps between the upper half-plane and the unit disc.

``beta`` sends the upper half-plane onto the open unit disc and the real line
onto the unit circle minus ``-1``; ``alpha_map`` is its inverse.
"""

from __future__ import annotations

import numpy as np

from .errors import PoleProximity

TAU_POLE = 1e-12


def beta(z, tau_pole: float = TAU_POLE):
    """``(i - z) / (i + z)``; raises :class:`PoleProximity` near ``z = -i``."""
    z = np.asarray(z, dtype=complex)
    den = 1j + z
    dist = np.abs(den)
    if np.any(dist < tau_pole):
        raise PoleProximity(0, float(dist.min()))
    out = (1j - z) / den
    return complex(out) if out.ndim == 0 else out


def alpha_map(w, tau_pole: float = TAU_POLE):
    """``i (1 - w) / (1 + w)``, the inverse of :func:`beta`."""
    w = np.asarray(w, dtype=complex)
    den = 1.0 + w
    dist = np.abs(den)
    if np.any(dist < tau_pole):
        raise PoleProximity(0, float(dist.min()))
    out = 1j * (1.0 - w) / den
    return complex(out) if out.ndim == 0 else out


def theta_of(x):
    """Phase of ``beta(x)`` for real ``x``, in ``(-pi, pi)``.

    Equals ``arg(i - x) - arg(i + x)``, which simplifies to ``2 * arctan(x)``;
    the two-argument form keeps ``exp(1j * theta)`` consistent with ``beta``
    to rounding.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("theta_of needs finite input")
    # beta(x) = (1 - x^2 + 2ix) / (1 + x^2)
    out = np.arctan2(2.0 * x, 1.0 - x * x)
    return float(out) if out.ndim == 0 else out


def beta_vec(z, tau_pole: float = TAU_POLE) -> np.ndarray:
    """Componentwise :func:`beta` on a point of C^n."""
    return np.atleast_1d(beta(np.asarray(z, dtype=complex), tau_pole))


def alpha_vec(w, tau_pole: float = TAU_POLE) -> np.ndarray:
    return np.atleast_1d(alpha_map(np.asarray(w, dtype=complex), tau_pole))
