"""Exact ground-state quantities of the 1D transverse-field Ising chain.

Model: N spins on a ring with Ising coupling lam (in units of the transverse
field), H = -sum_j [lam sx_j sx_{j+1} + sz_j], N even.  The free-fermion
solution gives the magnetization and the nearest-neighbour correlators as
sums over the momenta phi_q = 2 pi q / N with q running over half-odd
integers -M, ..., M, M = (N-1)/2; the half-odd grid never contains the
gapless mode, so every quantity is finite for all lam >= 0, including the
critical coupling lam = 1.

Two evaluation regimes are provided:

* ``correlators_finite`` -- the exact momentum sums for a chain of N sites,
  with per-mode analytic lam-derivatives (quotient rule on each summand).
* ``correlators_thermo`` -- the N -> infinity limit, where the sums become
  complete elliptic integrals of modulus k = 2 sqrt(lam) / (1 + lam);
  derivatives follow from dK/dk = [E/(1-k^2) - K]/k and dE/dk = (E - K)/k
  via the chain rule.

All momentum sums are accumulated with exact (error-free-transformation)
summation so that even million-mode sums carry no accumulation error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from math import fsum, pi
from numbers import Integral, Real

import numpy as np

from .elliptic import elliptic_e, elliptic_k

__all__ = [
    "ChainSpec",
    "CorrelatorSet",
    "correlators_finite",
    "correlators_thermo",
    "dispersion",
    "log_divergence_coefficient",
    "momentum_grid",
]

# Values of (sz, xx, yy, zz) at the critical coupling in the thermodynamic
# limit: (2/pi, 2/pi, -2/(3 pi), 16/(3 pi^2)).
_CRITICAL_SZ = 2.0 / pi
_CRITICAL_XX = 2.0 / pi
_CRITICAL_YY = -2.0 / (3.0 * pi)
_CRITICAL_ZZ = 16.0 / (3.0 * pi * pi)

# Coefficients of ln N (equivalently of ln 1/|1-lam|) in the divergence of
# the first lam-derivatives at the critical point.
_LOG_COEFFS = {
    "sz": -1.0 / pi,
    "xx": 1.0 / pi,
    "yy": 1.0 / pi,
    "zz": -16.0 / (3.0 * pi * pi),
}


@dataclass(frozen=True)
class ChainSpec:
    """A single evaluation point: chain length and Ising coupling.

    n_sites must be even (so the momentum quantum numbers are half-odd
    integers) and at least 4; lam is dimensionless and non-negative.
    """

    n_sites: int
    lam: float

    def __post_init__(self):
        if not isinstance(self.n_sites, Integral) or isinstance(self.n_sites, bool):
            raise ValueError(f"n_sites must be an integer, got {self.n_sites!r}")
        n = int(self.n_sites)
        if n < 4 or n % 2 != 0:
            raise ValueError(f"n_sites must be even and >= 4, got {n}")
        if not isinstance(self.lam, Real):
            raise ValueError(f"lam must be a real number, got {self.lam!r}")
        lam = float(self.lam)
        if not math.isfinite(lam) or lam < 0.0:
            raise ValueError(f"lam must be finite and >= 0, got {lam}")
        object.__setattr__(self, "n_sites", n)
        object.__setattr__(self, "lam", lam)


@dataclass(frozen=True)
class CorrelatorSet:
    """Magnetization and nearest-neighbour correlators with lam-derivatives.

    sz = <s^z>, xx = <sx_0 sx_1>, yy = <sy_0 sy_1>, zz = <sz_0 sz_1>, and
    d_* are the first derivatives with respect to the coupling.  The zz
    correlator satisfies zz = sz^2 - xx yy identically.  ``regime`` is
    "finite" (with ``n_sites`` set) or "thermodynamic"; at the critical
    coupling in the thermodynamic limit the derivatives diverge and are
    reported as signed infinities with ``derivatives_divergent`` set.
    """

    sz: float
    xx: float
    yy: float
    zz: float
    d_sz: float
    d_xx: float
    d_yy: float
    d_zz: float
    regime: str
    n_sites: int | None = None
    lam: float | None = None
    derivatives_divergent: bool = False

    def __post_init__(self):
        if self.regime not in ("finite", "thermodynamic"):
            raise ValueError(f"unknown regime {self.regime!r}")
        values = (self.sz, self.xx, self.yy, self.zz)
        if any(not math.isfinite(v) or abs(v) > 1.0 + 1e-12 for v in values):
            raise ValueError(f"correlator magnitudes must be <= 1, got {values}")
        if abs(self.zz - (self.sz * self.sz - self.xx * self.yy)) > 1e-12:
            raise ValueError("zz does not satisfy zz = sz^2 - xx*yy")
        if not self.derivatives_divergent:
            derivs = (self.d_sz, self.d_xx, self.d_yy, self.d_zz)
            if any(not math.isfinite(d) for d in derivs):
                raise ValueError(f"non-finite derivatives {derivs} without divergence flag")


def momentum_grid(spec: ChainSpec) -> np.ndarray:
    """Mode angles phi_q = 2 pi q / N for half-odd q in {-M, ..., M}.

    The N angles lie in (-pi, pi), are symmetric under negation, and never
    hit 0 or +-pi (half-odd q excludes the gapless mode).
    """
    n = spec.n_sites
    m = (n - 1) / 2.0
    q = np.arange(-m, m + 1.0)
    return 2.0 * pi * q / n


def dispersion(lam: float, phi):
    """Quasiparticle energy omega(phi) = sqrt(1 + lam^2 - 2 lam cos phi)."""
    return np.sqrt(1.0 + lam * lam - 2.0 * lam * np.cos(phi))


@lru_cache(maxsize=64)
def _mode_tables(n_sites: int):
    """Cached per-size trigonometric tables (cos phi, cos 2phi, sin^2 phi)."""
    phi = momentum_grid(ChainSpec(n_sites, 0.0))
    tables = (np.cos(phi), np.cos(2.0 * phi), np.sin(phi) ** 2)
    for t in tables:
        t.setflags(write=False)
    return tables


def correlators_finite(spec: ChainSpec) -> CorrelatorSet:
    """Exact correlators of an N-site ring at coupling lam.

    Momentum sums (1/N) sum_q f(phi_q):
        sz = (1 - lam cos phi) / omega
        xx = (lam - cos phi) / omega
        yy = (lam cos 2phi - cos phi) / omega
    and zz = sz^2 - xx yy.  Each derivative is the quotient-rule derivative
    of its summand, which reduces to
        d sz = -lam sin^2 phi / omega^3
        d xx = sin^2 phi / omega^3
        d yy = sin^2 phi (2 lam cos phi - 1) / omega^3,
    with d zz from the product rule.  Summands are accumulated with exact
    summation.
    """
    n, lam = spec.n_sites, spec.lam
    cos_phi, cos_2phi, sin_sq = _mode_tables(n)
    omega = np.sqrt(1.0 + lam * lam - 2.0 * lam * cos_phi)
    # Half-odd momenta keep the spectrum gapped for every lam >= 0.
    assert float(np.min(omega)) > 0.0
    inv = 1.0 / omega
    inv3 = inv * inv * inv

    sz = fsum((1.0 - lam * cos_phi) * inv) / n
    xx = fsum((lam - cos_phi) * inv) / n
    yy = fsum((lam * cos_2phi - cos_phi) * inv) / n
    d_sz = fsum(-lam * sin_sq * inv3) / n
    d_xx = fsum(sin_sq * inv3) / n
    d_yy = fsum(sin_sq * (2.0 * lam * cos_phi - 1.0) * inv3) / n

    zz = sz * sz - xx * yy
    d_zz = 2.0 * sz * d_sz - d_xx * yy - xx * d_yy
    return CorrelatorSet(
        sz, xx, yy, zz, d_sz, d_xx, d_yy, d_zz,
        regime="finite", n_sites=n, lam=lam,
    )


def correlators_thermo(lam: float) -> CorrelatorSet:
    """Thermodynamic-limit correlators at coupling lam >= 0.

    With k = 2 sqrt(lam) / (1 + lam) and K = K(k), E = E(k):
        sz = [(1 - lam) K + (1 + lam) E] / pi
        xx = [(lam - 1) K + (1 + lam) E] / (pi lam)
        yy = [K (lam - 1)(2 lam^2 + 1) - E (lam + 1)(2 lam^2 - 1)] / (3 pi lam)
    and zz = sz^2 - xx yy.  Derivatives follow from the standard identities
    dK/dk = [E/(1-k^2) - K]/k and dE/dk = (E - K)/k together with
    dk/dlam = (1 - lam) / (sqrt(lam) (1 + lam)^2).

    k < 1 on both sides of the critical point, so lam < 1 and lam > 1 share
    this code path.  At lam = 1 exactly the correlators take their critical
    values and the derivatives diverge logarithmically; they are returned as
    signed infinities with the divergence flag set.
    """
    lam = float(lam)
    if not math.isfinite(lam) or lam < 0.0:
        raise ValueError(f"lam must be finite and >= 0, got {lam}")
    if lam == 0.0:
        # Fully polarized paramagnet; derivative limits of the sums.
        return CorrelatorSet(
            1.0, 0.0, 0.0, 1.0, 0.0, 0.5, -0.5, 0.0,
            regime="thermodynamic", lam=lam,
        )
    if lam == 1.0:
        return CorrelatorSet(
            _CRITICAL_SZ, _CRITICAL_XX, _CRITICAL_YY, _CRITICAL_ZZ,
            -math.inf, math.inf, math.inf, -math.inf,
            regime="thermodynamic", lam=lam, derivatives_divergent=True,
        )

    sqrt_lam = math.sqrt(lam)
    one_plus = 1.0 + lam
    k = 2.0 * sqrt_lam / one_plus
    kp_sq = ((1.0 - lam) / one_plus) ** 2  # 1 - k^2, cancellation-free
    big_k = elliptic_k(k)
    big_e = elliptic_e(k)
    dk_dlam = (1.0 - lam) / (sqrt_lam * one_plus * one_plus)
    kd = (big_e / kp_sq - big_k) / k * dk_dlam  # dK/dlam
    ed = (big_e - big_k) / k * dk_dlam          # dE/dlam

    sz = ((1.0 - lam) * big_k + one_plus * big_e) / pi
    xx = ((lam - 1.0) * big_k + one_plus * big_e) / (pi * lam)
    p = (lam - 1.0) * (2.0 * lam * lam + 1.0)
    dp = 6.0 * lam * lam - 4.0 * lam + 1.0
    q = one_plus * (2.0 * lam * lam - 1.0)
    dq = 6.0 * lam * lam + 4.0 * lam - 1.0
    yy = (big_k * p - big_e * q) / (3.0 * pi * lam)

    d_sz = (-big_k + (1.0 - lam) * kd + big_e + one_plus * ed) / pi
    d_xx = (big_k + (lam - 1.0) * kd + big_e + one_plus * ed) / (pi * lam) - xx / lam
    d_yy = (kd * p + big_k * dp - ed * q - big_e * dq) / (3.0 * pi * lam) - yy / lam

    zz = sz * sz - xx * yy
    d_zz = 2.0 * sz * d_sz - d_xx * yy - xx * d_yy
    return CorrelatorSet(
        sz, xx, yy, zz, d_sz, d_xx, d_yy, d_zz,
        regime="thermodynamic", lam=lam,
    )


def log_divergence_coefficient(which: str) -> float:
    """Coefficient of ln N (or of ln 1/|1-lam|) in the critical divergence
    of the named correlator derivative: sz -> -1/pi, xx -> +1/pi,
    yy -> +1/pi, zz -> -16/(3 pi^2)."""
    try:
        return _LOG_COEFFS[which]
    except KeyError:
        raise ValueError(
            f"unknown correlator {which!r}; expected one of {sorted(_LOG_COEFFS)}"
        ) from None
