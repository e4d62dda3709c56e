"""Complete elliptic integrals K(k) and E(k) by arithmetic-geometric mean iteration.

Modulus convention: K(k) = int_0^{pi/2} dt / sqrt(1 - k^2 sin^2 t) and
E(k) = int_0^{pi/2} sqrt(1 - k^2 sin^2 t) dt (note: scipy.special uses the
parameter m = k^2 instead).

The AGM converges quadratically, so a handful of iterations reach full
double precision without quadrature nodes.
"""

import math

__all__ = ["elliptic_k", "elliptic_e"]

# Relative gap |a - b| / a at which the AGM iteration stops; one step below
# this the sequence sits at the roundoff floor of (a - b).
_AGM_RTOL = 1e-15


def _agm(k: float) -> tuple[float, float]:
    """Run the AGM for (1, k') and return (agm limit, sum 2^(n-1) c_n^2).

    k' = sqrt(1 - k^2) is computed as sqrt((1-k)(1+k)) to avoid cancellation
    near k = 1.  The c_n = (a_n - b_n)/2 sequence (with c_0 = k) feeds the
    second-kind integral.
    """
    a = 1.0
    b = math.sqrt((1.0 - k) * (1.0 + k))
    c = k
    c_sum = 0.5 * c * c
    weight = 1.0
    while abs(a - b) > _AGM_RTOL * a:
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        weight *= 2.0
        c_sum += 0.5 * weight * c * c
    return a, c_sum


def elliptic_k(k: float) -> float:
    """Complete elliptic integral of the first kind, K(k) = pi / (2 agm(1, k')).

    Requires 0 <= k < 1; K diverges logarithmically as k -> 1.
    """
    if not 0.0 <= k < 1.0:
        raise ValueError(f"elliptic_k requires 0 <= k < 1, got k={k!r}")
    a, _ = _agm(k)
    return math.pi / (2.0 * a)


def elliptic_e(k: float) -> float:
    """Complete elliptic integral of the second kind, E(k) = K(k) (1 - sum 2^(n-1) c_n^2).

    Requires 0 <= k <= 1; E(1) = 1 exactly.
    """
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"elliptic_e requires 0 <= k <= 1, got k={k!r}")
    if k == 1.0:
        return 1.0
    a, c_sum = _agm(k)
    return math.pi / (2.0 * a) * (1.0 - c_sum)
