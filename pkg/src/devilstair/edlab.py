"""Exact diagonalization of the hard-core chain with truncated power-law repulsion.

Fixed-particle-number sectors are spanned by bit-pattern states ordered by
integer value; the Hamiltonian acts as a diagonal interaction part plus -J
times a hop adjacency matrix, solved by dense diagonalization for small
sectors and an implicitly restarted Lanczos otherwise.  Open boundaries
throughout; finite-size errors are removed by 1/L fits and the perturbative
series is recovered from polynomial fits in J.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as spla

from .classical import Filling, PowerLawModel
from .errors import ConvergenceError, SectorCapError

__all__ = [
    "EDProblem",
    "EDResult",
    "ChemicalPotentialSample",
    "enumerate_states",
    "build_hamiltonian",
    "ground_energy",
    "chemical_potentials",
    "chemical_potential_sweep",
    "extrapolate_inverse_L",
    "fit_polynomial_in_J",
    "exhaustive_open_chain_minimum",
    "WORKERS_ENV",
]

WORKERS_ENV = "DEVILSTAIR_WORKERS"

_DENSE_CUTOFF = 2000
_SEED = 0xD5


@dataclass(frozen=True)
class EDProblem:
    """One fixed-(L, N) sector of the open chain."""

    length: int
    particles: int
    hopping: float
    model: PowerLawModel
    interaction_range: int = 7
    boundary: str = "open"
    sector_cap: int = 5_000_000

    def __post_init__(self):
        if not (0 <= self.particles <= self.length):
            raise ValueError(
                f"need 0 <= particles <= length, got N={self.particles}, L={self.length}"
            )
        if self.interaction_range < 1:
            raise ValueError(f"interaction_range must be >= 1, got {self.interaction_range!r}")
        if self.boundary != "open":
            raise ValueError(f"only open boundaries are supported, got {self.boundary!r}")
        if self.dimension > self.sector_cap:
            raise SectorCapError(
                f"sector C({self.length},{self.particles}) = {self.dimension} "
                f"exceeds cap {self.sector_cap}"
            )

    @property
    def dimension(self) -> int:
        return math.comb(self.length, self.particles)


@dataclass(frozen=True)
class EDResult:
    ground_energy: float
    residual_norm: float
    iterations: int
    dimension: int


@dataclass(frozen=True)
class ChemicalPotentialSample:
    length: int
    hopping: float
    mu_plus: float
    mu_minus: float


def enumerate_states(length: int, particles: int) -> np.ndarray:
    """All C(L, N) bit patterns with N set bits, ascending (Gosper's hack)."""
    L, N = length, particles
    dim = math.comb(L, N)
    out = np.empty(dim, dtype=np.int64)
    if N == 0:
        out[0] = 0
        return out
    v = (1 << N) - 1
    limit = 1 << L
    for i in range(dim):
        out[i] = v
        c = v & -v
        r = v + c
        v = (((r ^ v) >> 2) // c) | r
    if out[-1] >= limit:
        raise AssertionError("state enumeration overflow")
    return out


def _hubbard_state(length: int, particles: int) -> int:
    bits = 0
    for i in range(particles):
        bits |= 1 << ((i * length) // particles)
    return bits


class HamiltonianAction:
    """Matrix action v -> Hv of one sector, H = diag - J * hops."""

    def __init__(self, states: np.ndarray, diagonal: np.ndarray,
                 hops: sparse.csr_matrix, hopping: float):
        self.states = states
        self.diagonal = diagonal
        self.hops = hops
        self.hopping = hopping
        self.dimension = states.size

    def with_hopping(self, hopping: float) -> "HamiltonianAction":
        return HamiltonianAction(self.states, self.diagonal, self.hops, hopping)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diagonal * v
        if self.hopping != 0.0:
            out -= self.hopping * (self.hops @ v)
        return out

    def as_linear_operator(self, counter: list | None = None) -> spla.LinearOperator:
        def mv(v):
            if counter is not None:
                counter[0] += 1
            return self.matvec(v)

        return spla.LinearOperator((self.dimension, self.dimension), matvec=mv, dtype=np.float64)

    def dense(self) -> np.ndarray:
        h = np.diag(self.diagonal) - self.hopping * self.hops.toarray()
        return h


def build_hamiltonian(problem: EDProblem) -> HamiltonianAction:
    """Assemble the sector action in the ranked occupation basis."""
    L, N, r = problem.length, problem.particles, problem.interaction_range
    states = enumerate_states(L, N)
    dim = states.size

    diag = np.zeros(dim)
    for d in range(1, min(r, L - 1) + 1):
        pair_count = np.bitwise_count(states & (states >> d))
        diag += (problem.model.coefficient / float(d) ** problem.model.beta) * pair_count

    rows_parts, cols_parts = [], []
    for i in range(L - 1):
        movable = np.nonzero(((states >> i) & 3) == 1)[0].astype(np.int32)
        if movable.size == 0:
            continue
        partners = states[movable] ^ (3 << i)
        targets = np.searchsorted(states, partners).astype(np.int32)
        rows_parts.append(movable)
        cols_parts.append(targets)
    if rows_parts:
        rows = np.concatenate(rows_parts + cols_parts)
        cols = np.concatenate(cols_parts + rows_parts)
        data = np.ones(rows.size)
        hops = sparse.coo_matrix((data, (rows, cols)), shape=(dim, dim)).tocsr()
    else:
        hops = sparse.csr_matrix((dim, dim))
    return HamiltonianAction(states, diag, hops, problem.hopping)


def _seed_vector(action: HamiltonianAction, length: int, particles: int) -> np.ndarray:
    rng = np.random.RandomState(_SEED)
    v0 = 1e-3 * rng.standard_normal(action.dimension)
    if particles > 0:
        idx = int(np.searchsorted(action.states, _hubbard_state(length, particles)))
        if idx < action.dimension and action.states[idx] == _hubbard_state(length, particles):
            v0[idx] += 1.0
    return v0 / np.linalg.norm(v0)


def ground_energy(problem: EDProblem, iteration_cap: int = 10_000,
                  action: HamiltonianAction | None = None) -> EDResult:
    """Lowest eigenvalue of the sector, dense below 2000 states, Lanczos above."""
    if action is None:
        action = build_hamiltonian(problem)
    elif action.hopping != problem.hopping:
        action = action.with_hopping(problem.hopping)
    dim = action.dimension

    if dim == 1:
        e0 = float(action.diagonal[0])
        return EDResult(e0, 0.0, 0, 1)

    if dim <= _DENSE_CUTOFF:
        h = action.dense()
        vals, vecs = np.linalg.eigh(h)
        e0 = float(vals[0])
        vec = vecs[:, 0]
        residual = float(np.linalg.norm(action.matvec(vec) - e0 * vec))
        return EDResult(e0, residual, 0, dim)

    counter = [0]
    op = action.as_linear_operator(counter)
    v0 = _seed_vector(action, problem.length, problem.particles)
    try:
        vals, vecs = spla.eigsh(
            op, k=1, which="SA", v0=v0, maxiter=iteration_cap,
            ncv=min(dim - 1, 40), tol=0,
        )
    except spla.ArpackNoConvergence as exc:
        raise ConvergenceError(
            f"Lanczos did not converge for L={problem.length}, N={problem.particles}, "
            f"J={problem.hopping}: {exc}"
        ) from exc
    e0 = float(vals[0])
    vec = vecs[:, 0]
    residual = float(np.linalg.norm(action.matvec(vec) - e0 * vec))
    if residual > 1e-10:
        raise ConvergenceError(
            f"residual {residual:.2e} above 1e-10 for L={problem.length}, "
            f"N={problem.particles}, J={problem.hopping}"
        )
    return EDResult(e0, residual, counter[0], dim)


def chemical_potentials(length: int, filling: Filling, hopping: float,
                        model: PowerLawModel, interaction_range: int = 7,
                        sector_cap: int = 5_000_000) -> ChemicalPotentialSample:
    """mu+ = E(N+1) - E(N), mu- = E(N) - E(N-1) at one system size."""
    if (length * filling.m) % filling.n != 0:
        raise ValueError(f"L={length} does not fit filling {filling}")
    minimum = 2 * filling.n**2
    if length < minimum:
        warnings.warn(
            f"L={length} is below the defect-resolving minimum {minimum} for q={filling}",
            stacklevel=2,
        )
    N = (length * filling.m) // filling.n
    energies = {}
    for particles in (N, N + 1, N - 1):
        prob = EDProblem(length, particles, hopping, model, interaction_range,
                         sector_cap=sector_cap)
        energies[particles] = ground_energy(prob).ground_energy
    return ChemicalPotentialSample(
        length=length,
        hopping=hopping,
        mu_plus=energies[N + 1] - energies[N],
        mu_minus=energies[N] - energies[N - 1],
    )


def _sweep_one_length(args) -> list:
    length, filling, hoppings, model, interaction_range, sector_cap = args
    N = (length * filling.m) // filling.n
    samples = []
    # sector-major order so each adjacency matrix is assembled only once
    energies = {J: {} for J in hoppings}
    for particles in (N - 1, N, N + 1):
        prob0 = EDProblem(length, particles, 0.0, model, interaction_range,
                          sector_cap=sector_cap)
        action = build_hamiltonian(prob0)
        for J in hoppings:
            prob = EDProblem(length, particles, J, model, interaction_range,
                             sector_cap=sector_cap)
            energies[J][particles] = ground_energy(prob, action=action).ground_energy
        del action
    for J in hoppings:
        e = energies[J]
        samples.append(ChemicalPotentialSample(length, J, e[N + 1] - e[N], e[N] - e[N - 1]))
    return samples


def default_worker_count() -> int:
    value = os.environ.get(WORKERS_ENV, "")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def chemical_potential_sweep(filling: Filling, model: PowerLawModel,
                             lengths, hoppings, interaction_range: int = 7,
                             sector_cap: int = 5_000_000,
                             workers: int | None = None) -> list:
    """mu+-(L, J) over a grid, parallel over system sizes, deterministically merged."""
    lengths = sorted(set(int(L) for L in lengths))
    hoppings = sorted(set(float(J) for J in hoppings))
    for L in lengths:
        if (L * filling.m) % filling.n != 0:
            raise ValueError(f"L={L} does not fit filling {filling}")
    tasks = [(L, filling, hoppings, model, interaction_range, sector_cap) for L in lengths]
    if workers is None:
        workers = default_worker_count()
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_sweep_one_length, tasks))
    else:
        chunks = [_sweep_one_length(t) for t in tasks]
    samples = [s for chunk in chunks for s in chunk]
    samples.sort(key=lambda s: (s.length, s.hopping))
    return samples


def extrapolate_inverse_L(samples) -> tuple:
    """Least-squares fit value(L) = a + b/L; returns (a, b)."""
    pts = [(int(L), float(v)) for L, v in samples]
    lengths = sorted({L for L, _ in pts})
    if len(lengths) < 2:
        raise ValueError("need at least two distinct system sizes")
    x = np.array([1.0 / L for L, _ in pts])
    y = np.array([v for _, v in pts])
    slope, intercept = np.polyfit(x, y, 1)
    return float(intercept), float(slope)


def fit_polynomial_in_J(samples, degree: int = 2) -> tuple:
    """Least-squares polynomial coefficients (c0, c1, ..., c_degree)."""
    pts = [(float(J), float(v)) for J, v in samples]
    if len({J for J, _ in pts}) < degree + 1:
        raise ValueError(f"need at least {degree + 1} distinct hopping values")
    x = np.array([J for J, _ in pts])
    y = np.array([v for _, v in pts])
    coeffs = np.polynomial.polynomial.polyfit(x, y, degree)
    return tuple(float(c) for c in coeffs)


def exhaustive_open_chain_minimum(length: int, particles: int, model: PowerLawModel,
                                  interaction_range: int | None = None,
                                  cap: int = 5_000_000) -> float:
    """Exact classical minimum over all open-chain patterns (J = 0 oracle)."""
    import itertools

    L, N = length, particles
    if not (0 <= N <= L):
        raise ValueError(f"need 0 <= particles <= length, got N={N}, L={L}")
    if math.comb(L, N) > cap:
        raise SectorCapError(f"C({L},{N}) = {math.comb(L, N)} exceeds enumeration cap {cap}")
    if N < 2:
        return 0.0
    r = interaction_range if interaction_range is not None else L - 1
    vtable = np.zeros(L)
    d = np.arange(1, L)
    v = model.coefficient / d.astype(float) ** model.beta
    v[d > r] = 0.0
    vtable[1:] = v
    iu, ju = np.triu_indices(N, 1)
    best = math.inf
    combos = itertools.combinations(range(L), N)
    while True:
        block = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(combos, 200_000)),
            dtype=np.int16,
        )
        if block.size == 0:
            break
        block = block.reshape(-1, N)
        dist = block[:, ju] - block[:, iu]
        energies = vtable[dist].sum(axis=1)
        best = min(best, float(energies.min()))
    return best
