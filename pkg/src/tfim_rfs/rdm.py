"""Two-neighbouring-site reduced density matrix of the chain's ground state.

In the basis {up-up, down-down, up-down, down-up} the RDM is block diagonal,

    [[u+, z-,  0,  0 ],
     [z-, u-,  0,  0 ],
     [0,  0,   w,  z+],
     [0,  0,   z+, w ]],

with elements fixed by translation invariance:

    u+- = (1 +- 2 sz + zz) / 4,   w = (1 - zz) / 4,   z+- = (xx +- yy) / 4.

The same affine map applied to the correlator derivatives yields the
lam-derivative of every element, carried alongside the values because the
susceptibility formula consumes both.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exact import CorrelatorSet

__all__ = ["ConsistencyError", "TwoSiteRdm", "build_rdm", "rdm_blocks"]

# Positivity slack: generous against exact-summation roundoff, tight enough
# to catch genuine formula bugs.
_PSD_TOL = 1e-10

# Block determinants or traces at or below this are treated as singular
# (the closed-form susceptibility needs det != 0 and tr != 0).
_SINGULAR_TOL = 1e-12


class ConsistencyError(RuntimeError):
    """An internally computed quantity violated a structural invariant."""


@dataclass(frozen=True)
class TwoSiteRdm:
    """Block elements of the two-site RDM and their lam-derivatives.

    ``degenerate`` flags an accepted-but-singular matrix (e.g. the product
    state at lam = 0, where the second block vanishes); the closed-form
    susceptibility rejects such inputs and callers must use the fidelity
    oracle or keep lam away from zero.
    """

    u_plus: float
    u_minus: float
    w: float
    z_plus: float
    z_minus: float
    d_u_plus: float
    d_u_minus: float
    d_w: float
    d_z_plus: float
    d_z_minus: float
    degenerate: bool = False


def build_rdm(c: CorrelatorSet) -> TwoSiteRdm:
    """Assemble the two-site RDM (values and derivatives) from correlators.

    Raises ConsistencyError if the constructed matrix violates trace
    normalization or positive semidefiniteness beyond roundoff tolerance,
    and ValueError for divergent-derivative input (critical thermodynamic
    point), where no finite derivative matrix exists.
    """
    if c.derivatives_divergent:
        raise ValueError(
            "correlator derivatives diverge at this point; "
            "evaluate at finite N or at lam != 1 instead"
        )
    u_plus = (1.0 + 2.0 * c.sz + c.zz) / 4.0
    u_minus = (1.0 - 2.0 * c.sz + c.zz) / 4.0
    w = (1.0 - c.zz) / 4.0
    z_plus = (c.xx + c.yy) / 4.0
    z_minus = (c.xx - c.yy) / 4.0
    d_u_plus = (2.0 * c.d_sz + c.d_zz) / 4.0
    d_u_minus = (-2.0 * c.d_sz + c.d_zz) / 4.0
    d_w = -c.d_zz / 4.0
    d_z_plus = (c.d_xx + c.d_yy) / 4.0
    d_z_minus = (c.d_xx - c.d_yy) / 4.0

    trace = u_plus + u_minus + 2.0 * w
    if abs(trace - 1.0) > 1e-14:
        raise ConsistencyError(f"RDM trace deviates from one by {trace - 1.0:.3e}")
    d_trace = d_u_plus + d_u_minus + 2.0 * d_w
    if abs(d_trace) > 1e-12:
        raise ConsistencyError(f"RDM derivative trace deviates from zero by {d_trace:.3e}")

    det1 = u_plus * u_minus - z_minus * z_minus
    det2 = w * w - z_plus * z_plus
    if min(u_plus, u_minus, w, det1, det2) < -_PSD_TOL:
        raise ConsistencyError(
            "constructed RDM is not positive semidefinite: "
            f"u+={u_plus:.3e} u-={u_minus:.3e} w={w:.3e} det1={det1:.3e} det2={det2:.3e}"
        )

    degenerate = min(det1, det2, u_plus + u_minus, 2.0 * w) <= _SINGULAR_TOL
    return TwoSiteRdm(
        u_plus, u_minus, w, z_plus, z_minus,
        d_u_plus, d_u_minus, d_w, d_z_plus, d_z_minus,
        degenerate=degenerate,
    )


def rdm_blocks(rho: TwoSiteRdm):
    """The two 2x2 blocks, each paired with its derivative block.

    Returns ((block1, d_block1), (block2, d_block2)) with
    block1 = [[u+, z-], [z-, u-]] and block2 = [[w, z+], [z+, w]].
    """
    block1 = np.array([[rho.u_plus, rho.z_minus], [rho.z_minus, rho.u_minus]])
    d_block1 = np.array([[rho.d_u_plus, rho.d_z_minus], [rho.d_z_minus, rho.d_u_minus]])
    block2 = np.array([[rho.w, rho.z_plus], [rho.z_plus, rho.w]])
    d_block2 = np.array([[rho.d_w, rho.d_z_plus], [rho.d_z_plus, rho.d_w]])
    return (block1, d_block1), (block2, d_block2)
