"""First and second order of the hopping expansion around the q = 1/n crystals.

The first-order boundary shift is the kinetic energy of n delocalized
defects, -/+ 2nJ.  At second order every virtual hop contributes the inverse
of a classical energy denominator; all of them reduce to partial lattice
sums plus polygamma expressions, assembled here into mu2 and, for beta = 6,
into a compact closed form.  Each analytic denominator can be cross-checked
against a direct lattice sum over an explicit windowed defect state
(`defect_denominator`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .classical import Filling, PowerLawModel, mu0_closed, mu0_series
from .errors import ConvergenceError, WindowError
from .specfun import polygamma, riemann_zeta

__all__ = [
    "BACKGROUND_POLARIZATION",
    "VIRTUAL_DEFORMATION",
    "TWO_CELL_HOP",
    "DefectHopContext",
    "LobeCurve",
    "mu1",
    "delta_e0",
    "delta_e0_closed",
    "defect_denominator",
    "s_term",
    "mu2_coefficient",
    "mu2_full",
    "mu2_vdw_closed",
    "lobe",
]

BACKGROUND_POLARIZATION = "background_polarization"
VIRTUAL_DEFORMATION = "virtual_deformation"
TWO_CELL_HOP = "two_cell_hop"
_PROCESSES = (BACKGROUND_POLARIZATION, VIRTUAL_DEFORMATION, TWO_CELL_HOP)


@dataclass(frozen=True)
class DefectHopContext:
    """One class of virtual hop near a fractional defect at filling 1/n."""

    n: int
    beta: int
    charge_sign: int  # +1 particle defect, -1 hole defect
    process: str

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n!r}")
        if self.beta < 2:
            raise ValueError(f"beta must be >= 2, got {self.beta!r}")
        if self.charge_sign not in (1, -1):
            raise ValueError(f"charge_sign must be +1 or -1, got {self.charge_sign!r}")
        if self.process not in _PROCESSES:
            raise ValueError(f"unknown process {self.process!r}")


@dataclass(frozen=True)
class LobeCurve:
    """Sampled phase boundary mu+-(J) of the q = 1/n lobe."""

    filling: Filling
    hopping_grid: tuple
    mu_plus: tuple
    mu_minus: tuple
    order: int
    closure_estimate: float | None = None


def mu1(n: int, hopping: float, sign: int) -> float:
    """First-order boundary shift, -2nJ on the particle branch, +2nJ on the hole branch."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n!r}")
    if hopping < 0:
        raise ValueError(f"hopping must be >= 0, got {hopping!r}")
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    return -sign * 2.0 * n * hopping


def _hop_summand(pn: np.ndarray, beta: int) -> np.ndarray:
    return 2.0 * pn**-beta - (pn + 1.0) ** -beta - (pn - 1.0) ** -beta


def delta_e0(n: int, model: PowerLawModel, tol: float = 1e-12, cap: int = 1_000_000) -> float:
    """Classical cost of hopping one particle of the perfect 1/n crystal.

    Direct sum of 2V(pn) - V(pn-1) - V(pn+1); every summand is <= 0 by
    convexity and the result is negative.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n!r}")
    beta = model.beta
    block = 4096
    total = 0.0
    start = 1
    while start <= cap:
        pn = np.arange(start, min(start + block, cap + 1), dtype=np.float64) * n
        total += float(np.sum(_hop_summand(pn, beta)))
        last = pn[-1]
        # tail of the p-sum: |summand| ~ beta(beta+1) (pn)^-(beta+2)
        bound = beta * (beta + 1) * last ** -(beta + 2) * last / (n * (beta + 1))
        if bound < tol:
            return model.coefficient * total
        start += block
    raise ConvergenceError(f"delta_e0(n={n}, beta={beta}) tail bound not below {tol:g}")


def delta_e0_closed(n: int, model: PowerLawModel) -> float:
    """Polygamma form of delta_e0 (cross-check for the lattice sum)."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n!r}")
    beta = model.beta
    nb = float(n) ** beta
    pg = polygamma(beta - 1, (n - 1) / n) + polygamma(beta - 1, (n + 1) / n)
    value = 2.0 * riemann_zeta(float(beta)) / nb
    value -= (-1) ** beta * pg / (nb * math.factorial(beta - 1))
    return model.coefficient * value


# ---------------------------------------------------------------------------
# explicit windowed defect states
# ---------------------------------------------------------------------------

def _window_half_width(n: int, beta: int, j: int) -> int:
    # far-tail of the moved particle's interactions ~ 2 beta (Kn)^-beta
    need = (2.0 * beta * 1e13) ** (1.0 / beta) / n
    return max(120, j + 64, int(math.ceil(need)))


def defect_denominator(
    ctx: DefectHopContext, j: int, direction: str,
    coefficient: float = 1.0, half_width: int | None = None,
) -> float:
    """Energy denominator of one virtual hop, from a direct lattice sum.

    The defect state is built explicitly in a window of >= 200 n sites with
    the defect gap between particles 0 and 1; the paper-free labelling used
    here is that j counts particles to the right of the defect gap, j = 0
    being its right edge.  `direction` is "left" or "right" for the moved
    particle.  Returns E(defect state) - E(hopped state), a negative number.
    """
    if j < 0:
        raise ValueError(f"j must be >= 0, got {j!r}")
    if direction not in ("left", "right"):
        raise ValueError(f"direction must be 'left' or 'right', got {direction!r}")
    _validate_process(ctx, j, direction)
    n, beta, charge = ctx.n, ctx.beta, ctx.charge_sign
    K = half_width if half_width is not None else _window_half_width(n, beta, j)
    if j >= K // 2:
        raise WindowError(f"hop at j={j} too close to window edge (half width {K})")

    idx = np.arange(-K, K + 2, dtype=np.int64)
    pos = idx * n
    shift = 1 if charge > 0 else -1
    pos = np.where(idx >= 1, pos - shift, pos)

    mover = j + 1
    mover_at = int(pos[idx == mover][0])
    target = mover_at + (1 if direction == "right" else -1)
    others = pos[idx != mover]
    if np.any(others == target):
        raise ValueError(
            f"hop of particle j={j} {direction} is blocked at filling 1/{n} "
            f"({'particle' if charge > 0 else 'hole'} branch)"
        )
    d_old = np.abs(others - mover_at).astype(np.float64)
    d_new = np.abs(others - target).astype(np.float64)
    return coefficient * float(np.sum(d_old**-beta - d_new**-beta))


def _validate_process(ctx: DefectHopContext, j: int, direction: str) -> None:
    if ctx.process == BACKGROUND_POLARIZATION:
        if j < 1:
            raise ValueError("background polarization needs j >= 1")
    elif ctx.process == VIRTUAL_DEFORMATION:
        want = "left" if ctx.charge_sign > 0 else "right"
        if j != 0 or direction != want:
            raise ValueError(
                f"virtual deformation is the j=0 {want} hop on this branch"
            )
    else:  # TWO_CELL_HOP
        want = "right" if ctx.charge_sign > 0 else "left"
        if j != 1 or direction != want:
            raise ValueError(f"two-cell hop is the j=1 {want} hop on this branch")


# ---------------------------------------------------------------------------
# analytic denominators and S_j
# ---------------------------------------------------------------------------

def _zeta_shift(beta: int, x: float) -> float:
    # (-1)^beta Psi^(beta-1)(x) / (beta-1)!  ==  zeta(beta, x)
    return (-1) ** beta * polygamma(beta - 1, x) / math.factorial(beta - 1)


def _deformation_denominator(n: int, beta: int, sign: int) -> float:
    nb = float(n) ** beta
    a = (n - sign) / n
    b = (n + sign) / n
    c = (n - 2 * sign) / n
    return (riemann_zeta(float(beta)) + _zeta_shift(beta, a) - _zeta_shift(beta, b) - _zeta_shift(beta, c)) / nb


def _two_cell_denominator(n: int, beta: int) -> float:
    return 2.0 / float(n) ** beta - (n + 1.0) ** -beta - (n - 1.0) ** -beta


def s_term(j: int, n: int, model: PowerLawModel, sign: int) -> float:
    """Background-polarization correction of the particle j cells from the defect.

    Dimensionless; the two reciprocal brackets approach 1/delta_e0 as
    j -> infinity so the terms vanish in that limit.
    """
    if j < 1:
        raise ValueError(f"j must be >= 1, got {j!r}")
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n!r}")
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    beta = model.beta
    pn = np.arange(1, j + 1, dtype=np.float64) * n
    away = float(np.sum(_hop_summand(pn, beta)))
    partial = float(np.sum(pn**-beta - (pn + 1.0) ** -beta - (pn - 1.0) ** -beta))
    nb = float(n) ** beta
    a = (n - sign) / n + j
    b = (n + sign) / n + j
    c = (n - 2 * sign) / n + j
    toward = partial + (
        riemann_zeta(float(beta)) + _zeta_shift(beta, a) - _zeta_shift(beta, b) - _zeta_shift(beta, c)
    ) / nb
    de0 = delta_e0_closed(n, model) / model.coefficient
    for name, val in (("away", away), ("toward", toward), ("delta_e0", de0)):
        if abs(val) < 1e-300:
            raise ZeroDivisionError(f"singular {name} denominator in s_term(j={j}, n={n})")
    return 1.0 / away + 1.0 / toward - 2.0 / de0


def _deformation_weight(n: int, sign: int) -> float:
    delta = 1.0 if n == 2 else 0.0
    return 1.0 - 0.5 * (delta + sign * delta)


@lru_cache(maxsize=None)
def _mu2_brace_cached(n: int, beta: int, sign: int, rel_tol: float, j_floor: int, j_cap: int) -> float:
    model = PowerLawModel(beta)
    total = 0.0
    j = 0
    while j < j_cap:
        j += 1
        term = s_term(j, n, model, sign)
        total += term
        if j >= j_floor and abs(term) < rel_tol * max(abs(total), 1e-30):
            break
    else:
        raise ConvergenceError(f"S_j sum for n={n}, beta={beta} not converged by j={j_cap}")
    de0 = delta_e0_closed(n, model)
    total -= (2.0 - sign / n) / de0
    weight = _deformation_weight(n, sign)
    if weight != 0.0:
        total += weight / _deformation_denominator(n, beta, sign)
    total += 1.0 / _two_cell_denominator(n, beta)
    return total


def mu2_coefficient(n: int, model: PowerLawModel, sign: int,
                    rel_tol: float = 1e-12, j_floor: int = 50, j_cap: int = 100_000) -> float:
    """Dimensionless brace of the second-order shift: mu2 = sign * 2n J^2 / C * brace."""
    if n < 2:
        raise ValueError(f"second order is available for q = 1/n with n >= 2, got n={n!r}")
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    return _mu2_brace_cached(n, model.beta, sign, rel_tol, j_floor, j_cap)


def mu2_full(n: int, model: PowerLawModel, hopping: float, sign: int) -> float:
    """Second-order boundary shift of the q = 1/n lobe."""
    if hopping < 0:
        raise ValueError(f"hopping must be >= 0, got {hopping!r}")
    brace = mu2_coefficient(n, model, sign)
    return sign * 2.0 * n * hopping * hopping / model.coefficient * brace


def mu2_vdw_closed(n: int, hopping: float, sign: int, coefficient: float = 1.0) -> float:
    """Compact beta = 6 form of mu2 with the polarization sum dropped.

    The constants are 16 pi^6 = 2 * 7560 zeta(6) and 8 pi^6 = 7560 zeta(6).
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n!r}")
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    if hopping < 0:
        raise ValueError(f"hopping must be >= 0, got {hopping!r}")
    n6 = float(n) ** 6
    pi6 = math.pi**6
    den1 = 16.0 * pi6 - 63.0 * (polygamma(5, (n - 1) / n) + polygamma(5, (n + 1) / n))
    brace = -7560.0 * n6 * (2.0 - sign / n) / den1
    weight = _deformation_weight(n, sign)
    if weight != 0.0:
        a = (n - sign) / n
        b = (n + sign) / n
        c = (n - 2 * sign) / n
        den2 = 8.0 * pi6 + 63.0 * (polygamma(5, a) - polygamma(5, b) - polygamma(5, c))
        brace += 7560.0 * n6 * weight / den2
    brace += 1.0 / _two_cell_denominator(n, 6)
    return sign * 2.0 * n * hopping * hopping / coefficient * brace


# ---------------------------------------------------------------------------
# lobe assembly
# ---------------------------------------------------------------------------

def _boundary(n: int, model: PowerLawModel, J: float, sign: int, order: int,
              mu0: float, brace: float | None) -> float:
    value = mu0 + mu1(n, J, sign)
    if order >= 2:
        value += sign * 2.0 * n * J * J / model.coefficient * brace
    return value


def lobe(n: int, model: PowerLawModel, hopping_grid, order: int = 2,
         bisect_tol: float | None = None) -> LobeCurve:
    """Phase boundary curves mu+-(J) of the q = 1/n lobe with closure estimate.

    The closure J* solves mu+(J*) = mu-(J*) by bisection on the analytic
    curves and is reported only if the gap changes sign inside the grid span.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order!r}")
    grid = [float(j) for j in hopping_grid]
    if not grid:
        raise ValueError("hopping grid is empty")
    if any(j < 0 for j in grid) or any(a > b for a, b in zip(grid, grid[1:])):
        raise ValueError("hopping grid must be sorted ascending and >= 0")
    mu0p = mu0_closed(n, model, +1)
    mu0m = mu0_closed(n, model, -1)
    bp = mu2_coefficient(n, model, +1) if order >= 2 else None
    bm = mu2_coefficient(n, model, -1) if order >= 2 else None

    def gap(J: float) -> float:
        return (_boundary(n, model, J, +1, order, mu0p, bp)
                - _boundary(n, model, J, -1, order, mu0m, bm))

    mu_plus = tuple(_boundary(n, model, J, +1, order, mu0p, bp) for J in grid)
    mu_minus = tuple(_boundary(n, model, J, -1, order, mu0m, bm) for J in grid)

    closure = None
    lo, hi = 0.0, grid[-1]
    if gap(lo) > 0.0 and gap(hi) <= 0.0:
        tol = bisect_tol if bisect_tol is not None else 1e-10 * model.coefficient
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if gap(mid) > 0.0:
                lo = mid
            else:
                hi = mid
        closure = 0.5 * (lo + hi)

    return LobeCurve(
        filling=Filling(1, n),
        hopping_grid=tuple(grid),
        mu_plus=mu_plus,
        mu_minus=mu_minus,
        order=order,
        closure_estimate=closure,
    )
