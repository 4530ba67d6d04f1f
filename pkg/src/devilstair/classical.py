"""Classical (zero-hopping) limit: crystal ground states and the devil's staircase.

At J = 0 the ground state at rational filling m/n is the maximally uniform
crystal (nearest-neighbour gaps floor(n/m) or ceil(n/m)).  Adding or removing
one particle splits it into n fractionally charged defects; the energy of one
defect times n gives the chemical potentials mu+/mu- bounding the
incompressible step.  Enumerating all reduced fractions assembles the
staircase.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import ConvergenceError, SectorCapError
from .specfun import polygamma, riemann_zeta

__all__ = [
    "Filling",
    "PowerLawModel",
    "CrystalConfiguration",
    "StaircaseStep",
    "potential",
    "check_convex",
    "hubbard_configuration",
    "ring_energy",
    "ring_energy_of_positions",
    "mu0_series",
    "mu0_closed",
    "build_staircase",
    "step_scaling_exponent",
    "brute_force_ring_ground",
]

_BERNOULLI_EVEN = (
    1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66,
    -691.0 / 2730, 7.0 / 6, -3617.0 / 510, 43867.0 / 798, -174611.0 / 330,
)


@dataclass(frozen=True)
class Filling:
    """Reduced rational filling q = m/n <= 1."""

    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1 or self.m > self.n:
            raise ValueError(f"need 1 <= m <= n, got m={self.m}, n={self.n}")
        if math.gcd(self.m, self.n) != 1:
            raise ValueError(f"{self.m}/{self.n} is not reduced")

    @property
    def q(self) -> float:
        return self.m / self.n

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.m, self.n)

    @classmethod
    def parse(cls, text: str) -> "Filling":
        frac = Fraction(text)
        return cls(frac.numerator, frac.denominator)

    def __str__(self) -> str:
        return f"{self.m}/{self.n}"


@dataclass(frozen=True)
class PowerLawModel:
    """Repulsive power-law interaction V(r) = coefficient / r**beta."""

    beta: int
    coefficient: float = 1.0

    def __post_init__(self):
        if self.beta < 2:
            raise ValueError(f"beta must be an integer >= 2, got {self.beta!r}")
        if self.coefficient <= 0:
            raise ValueError(f"coefficient must be positive, got {self.coefficient!r}")


@dataclass(frozen=True)
class CrystalConfiguration:
    """Occupied sites of a crystal pattern on `length` sites (ring geometry)."""

    length: int
    positions: tuple
    gap_sequence: tuple

    def __post_init__(self):
        pos = self.positions
        if any(pos[i] >= pos[i + 1] for i in range(len(pos) - 1)):
            raise ValueError("positions must be strictly increasing")
        if pos and (pos[0] < 0 or pos[-1] >= self.length):
            raise ValueError("positions must lie in [0, length)")


@dataclass(frozen=True)
class StaircaseStep:
    """Stability interval [mu_lo, mu_hi] of one commensurate filling."""

    filling: Filling
    mu_lo: float
    mu_hi: float
    order: int = 0
    hopping: float = 0.0

    @property
    def width(self) -> float:
        return self.mu_hi - self.mu_lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.mu_lo + self.mu_hi)


def potential(model: PowerLawModel, r: int) -> float:
    """Pair energy at separation r >= 1."""
    if r < 1:
        raise ValueError(f"separation must be >= 1, got {r!r}")
    return model.coefficient / float(r) ** model.beta


def check_convex(v: Callable[[int], float], r_max: int) -> bool:
    """True iff v(r+1) + v(r-1) >= 2 v(r) on 2 <= r <= r_max - 1."""
    if r_max < 3:
        raise ValueError(f"need r_max >= 3, got {r_max!r}")
    return all(v(r + 1) + v(r - 1) >= 2.0 * v(r) for r in range(2, r_max))


def hubbard_configuration(filling: Filling, cells: int) -> CrystalConfiguration:
    """Canonical minimal-energy pattern over `cells` unit cells, X_0 = 0.

    Positions are floor(i*n/m); the ring gap sequence (wrap gap included)
    only takes the two values floor(n/m) and ceil(n/m).
    """
    if cells < 1:
        raise ValueError(f"cells must be >= 1, got {cells!r}")
    m, n = filling.m, filling.n
    count = cells * m
    positions = tuple((i * n) // m for i in range(count))
    length = cells * n
    gaps = tuple(positions[i + 1] - positions[i] for i in range(count - 1))
    gaps = gaps + (length - positions[-1],)
    return CrystalConfiguration(length=length, positions=positions, gap_sequence=gaps)


# ---------------------------------------------------------------------------
# ring energies (maximally uniform pattern, O(N) via gap-class counting)
# ---------------------------------------------------------------------------

def ring_energy(length: int, particles: int, model: PowerLawModel) -> float:
    """Exact interaction energy of the maximally uniform N-particle ring pattern.

    Uses the fact that the separation of particles i and i+p in the pattern
    floor(i*L/N) is floor(pL/N) for N - (pL mod N) of the i and one more for
    the rest, so each pair class is a single closed-form count.
    """
    L, N = length, particles
    if not (0 <= N <= L):
        raise ValueError(f"need 0 <= particles <= length, got N={N}, L={L}")
    if N < 2:
        return 0.0
    beta = model.beta
    p = np.arange(1, (N - 1) // 2 + 1, dtype=np.int64)
    lo = (p * L) // N
    k = (p * L) % N
    dlo = np.minimum(lo, L - lo).astype(np.longdouble)
    dhi = np.minimum(lo + 1, L - lo - 1).astype(np.longdouble)
    vals = (N - k) * dlo ** (-beta) + k * dhi ** (-beta)
    total = vals.sum(dtype=np.longdouble)
    if N % 2 == 0:
        half = L // 2 if L % 2 == 0 else (L - 1) // 2
        total += (N // 2) * np.longdouble(half) ** (-beta)
    return float(total) * model.coefficient


def ring_energy_of_positions(
    positions: Sequence[int], length: int, model: PowerLawModel,
    interaction_range: int | None = None,
) -> float:
    """Interaction energy of an arbitrary hard-core pattern on a ring."""
    pos = np.asarray(positions, dtype=np.int64)
    if pos.size < 2:
        return 0.0
    i, j = np.triu_indices(pos.size, 1)
    d = pos[j] - pos[i]
    d = np.minimum(d, length - d)
    if interaction_range is not None:
        d = d[d <= interaction_range]
    return model.coefficient * float(np.sum(d.astype(np.longdouble) ** (-model.beta)))


# ---------------------------------------------------------------------------
# zeroth-order chemical potentials
# ---------------------------------------------------------------------------

def _em_power_tail(terms, n: int, start: int, depth: int = 10) -> float:
    """Euler-Maclaurin tail sum_{p>=start} sum_k c_k (n p + d_k)^(-sigma_k).

    sigma = 1 terms are allowed only in balanced groups (their c_k sum to
    zero), in which case the log integrals combine to a finite value.
    """
    log_balance = math.fsum(c for c, _, s in terms if s == 1)
    if abs(log_balance) > 1e-12:
        raise ValueError("sigma = 1 terms do not cancel; tail diverges")
    total = 0.0
    for c, d, sigma in terms:
        x = float(n * start + d)
        if sigma == 1:
            total += -c * math.log(x) / n
        else:
            total += c * x ** (1.0 - sigma) / (n * (sigma - 1.0))
        total += c * 0.5 * x**-sigma
        rising = float(sigma)
        npow = float(n)
        xpow = x ** (-sigma - 1.0)
        fact = 1.0
        for i in range(1, depth + 1):
            fact *= (2 * i - 1) * (2 * i)
            total += c * _BERNOULLI_EVEN[i - 1] / fact * npow * rising * xpow
            rising *= (sigma + 2 * i - 1) * (sigma + 2 * i)
            npow *= n * n
            xpow /= x * x
    return total


def _mu0_unit_fraction(n: int, beta: int, sign: int, direct_terms: int = 160) -> float:
    """mu0 for q = 1/n in units of the coefficient, defect series + tail.

    The direct part sums the per-particle energy changes of one fractional
    defect literally; the tail reuses the identical summand split into pure
    power terms, e.g. for the particle branch
    p n V(pn-1) - (pn-1) V(pn) = (pn-1)^(1-b) + (pn-1)^(-b) - (pn)^(1-b) + (pn)^(-b).
    """
    p = np.arange(1, direct_terms + 1, dtype=np.float64)
    rp = p * n
    if sign > 0:
        vals = rp * (rp - 1.0) ** -beta - (rp - 1.0) * rp**-beta
        tail_terms = [(1.0, -1, beta - 1), (-1.0, 0, beta - 1), (1.0, -1, beta), (1.0, 0, beta)]
    else:
        vals = (rp + 1.0) * rp**-beta - rp * (rp + 1.0) ** -beta
        tail_terms = [(1.0, 0, beta - 1), (-1.0, 1, beta - 1), (1.0, 0, beta), (1.0, 1, beta)]
    return math.fsum(vals) + _em_power_tail(tail_terms, n, direct_terms + 1)


def _mu0_ring_defect(
    filling: Filling, model: PowerLawModel, sign: int, tol: float,
    start_cells: int = 256, max_cells: int = 65536,
) -> float:
    """mu0 for general m/n from ring differences with Richardson extrapolation.

    One inserted (removed) particle on a commensurate ring splits into n
    defects automatically in the uniform pattern at N +- 1 particles; the
    finite-size error scales as cells^(1-beta).
    """
    m, n, beta = filling.m, filling.n, model.beta
    factor = float(2 ** (beta - 1) - 1)

    def ring_mu(cells: int) -> float:
        L, N = cells * n, cells * m
        e0 = ring_energy(L, N, model)
        if sign > 0:
            return ring_energy(L, N + 1, model) - e0
        return e0 - ring_energy(L, N - 1, model)

    cells = start_cells
    prev_v = prev_rich = None
    while cells <= max_cells:
        v = ring_mu(cells)
        if prev_v is not None:
            rich = v + (v - prev_v) / factor
            if abs(v - prev_v) / factor <= tol * 0.5:
                return rich
            if prev_rich is not None and abs(rich - prev_rich) <= tol * 0.5:
                return rich
            prev_rich = rich
        prev_v = v
        cells *= 2
    raise ConvergenceError(
        f"mu0 ring construction for q={filling} did not reach tol={tol:g} "
        f"within {max_cells} cells"
    )


def mu0_series(filling: Filling, model: PowerLawModel, sign: int, tol: float = 1e-10) -> float:
    """Zeroth-order mu+ (sign=+1) or mu- (sign=-1) at filling m/n.

    Computed as n times the insertion energy of one isolated fractional
    defect in the infinite crystal, summed particle by particle.
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    if filling.m == 1:
        return model.coefficient * _mu0_unit_fraction(filling.n, model.beta, sign)
    return _mu0_ring_defect(filling, model, sign, tol)


def mu0_closed(n: int, model: PowerLawModel, sign: int) -> float:
    """Polygamma closed form of mu0 for q = 1/n.

    For beta = 2 the zeta(beta-1) pair has a removable singularity and is
    evaluated through its digamma limit.
    """
    if n < 2:
        raise ValueError(f"closed form needs n >= 2, got {n!r}")
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    beta = model.beta
    x = (n - sign) / n
    nb = float(n) ** beta
    value = (-1) ** beta * polygamma(beta - 1, x) / (nb * math.factorial(beta - 1))
    value += riemann_zeta(float(beta)) / nb
    if beta == 2:
        bracket = (-polygamma(0, x) + polygamma(0, 1.0)) / n
    else:
        nb1 = float(n) ** (beta - 1)
        bracket = (-1) ** (beta - 1) * polygamma(beta - 2, x) / (nb1 * math.factorial(beta - 2))
        bracket -= riemann_zeta(float(beta - 1)) / nb1
    return model.coefficient * (value + sign * bracket)


def build_staircase(model: PowerLawModel, max_denominator: int, tol: float = 1e-10) -> list:
    """All steps of the J = 0 staircase with denominators up to max_denominator.

    Fillings below one half are computed directly; the rest follow from
    particle-hole symmetry, mu_{+/-}(1 - q) = 2 zeta(beta) - mu_{-/+}(q) in
    units of the coefficient.
    """
    if max_denominator < 2:
        raise ValueError(f"max_denominator must be >= 2, got {max_denominator!r}")
    omega = 2.0 * riemann_zeta(float(model.beta)) * model.coefficient
    steps = []
    for n in range(2, max_denominator + 1):
        for m in range(1, n // 2 + 1):
            if 2 * m > n or math.gcd(m, n) != 1:
                continue
            f = Filling(m, n)
            lo = mu0_series(f, model, -1, tol)
            hi = mu0_series(f, model, +1, tol)
            steps.append(StaircaseStep(f, lo, hi))
            if 2 * m < n:
                steps.append(StaircaseStep(Filling(n - m, n), omega - hi, omega - lo))
    steps.sort(key=lambda s: s.filling.fraction)
    return steps


def step_scaling_exponent(model: PowerLawModel, n_lo: int = 4, n_hi: int = 40) -> float:
    """Least-squares slope of log step midpoint versus log(1/n) over q = 1/n."""
    ns = np.arange(n_lo, n_hi + 1)
    mids = []
    for n in ns:
        f = Filling(1, int(n))
        mids.append(0.5 * (mu0_series(f, model, +1) + mu0_series(f, model, -1)) / model.coefficient)
    slope = np.polyfit(np.log(1.0 / ns), np.log(mids), 1)[0]
    return float(slope)


# ---------------------------------------------------------------------------
# exhaustive classical oracle (ring geometry)
# ---------------------------------------------------------------------------

def brute_force_ring_ground(
    model: PowerLawModel, length: int, particles: int,
    cap: int = 5_000_000, chunk: int = 200_000,
):
    """Exact classical minimum over all C(L, N) ring patterns.

    Returns (energy, configuration); the configuration is the
    lexicographically smallest translate of one minimizer.
    """
    L, N = length, particles
    if not (0 <= N <= L):
        raise ValueError(f"need 0 <= particles <= length, got N={N}, L={L}")
    total = math.comb(L, N)
    if total > cap:
        raise SectorCapError(f"C({L},{N}) = {total} exceeds enumeration cap {cap}")
    if N < 2:
        positions = tuple(range(N))
        gaps = (L,) if N == 1 else ()
        return 0.0, CrystalConfiguration(L, positions, gaps)

    vtable = np.zeros(L + 1)
    d = np.arange(1, L + 1)
    vtable[1:] = model.coefficient / d.astype(float) ** model.beta

    iu, ju = np.triu_indices(N, 1)
    best_energy = math.inf
    best_positions = None
    combos = itertools.combinations(range(L), N)
    while True:
        block = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(combos, chunk)),
            dtype=np.int16,
        )
        if block.size == 0:
            break
        block = block.reshape(-1, N)
        dist = block[:, ju] - block[:, iu]
        np.minimum(dist, L - dist, out=dist)
        energies = vtable[dist].sum(axis=1)
        k = int(np.argmin(energies))
        if energies[k] < best_energy:
            best_energy = float(energies[k])
            best_positions = block[k].astype(int)

    canonical = min(
        tuple(sorted(int(x - s) % L for x in best_positions))
        for s in best_positions
    )
    gaps = tuple(canonical[i + 1] - canonical[i] for i in range(N - 1)) + (L - canonical[-1],)
    exact = ring_energy_of_positions(canonical, L, model)
    return exact, CrystalConfiguration(L, tuple(canonical), gaps)
