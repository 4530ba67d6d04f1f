"""Real-argument Riemann/Hurwitz zeta, digamma and polygamma evaluation.

Everything downstream (closed-form chemical potentials, second-order
denominators) is built from hurwitz_zeta; it is evaluated by direct
summation plus an Euler-Maclaurin tail and needs no reflection machinery
because only s > 1 with positive real arguments ever occurs here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "SpecialFunctionConfig",
    "DEFAULT_CONFIG",
    "riemann_zeta",
    "hurwitz_zeta",
    "digamma",
    "polygamma",
]

# B_{2i} for i = 1..15, exact rationals rounded to double.
_BERNOULLI_EVEN = (
    1.0 / 6,
    -1.0 / 30,
    1.0 / 42,
    -1.0 / 30,
    5.0 / 66,
    -691.0 / 2730,
    7.0 / 6,
    -3617.0 / 510,
    43867.0 / 798,
    -174611.0 / 330,
    854513.0 / 138,
    -236364091.0 / 2730,
    8553103.0 / 6,
    -23749461029.0 / 870,
    8615841276005.0 / 14322,
)


@dataclass(frozen=True)
class SpecialFunctionConfig:
    """Accuracy knobs for the zeta/polygamma kernels.

    target_relative_error must lie in (0, 1e-6]; series_acceleration_terms
    is the Euler-Maclaurin correction depth (number of Bernoulli terms).
    """

    target_relative_error: float = 1e-13
    series_acceleration_terms: int = 8

    def __post_init__(self):
        if not (0.0 < self.target_relative_error <= 1e-6):
            raise ValueError(
                "target_relative_error must be in (0, 1e-6], got "
                f"{self.target_relative_error!r}"
            )
        if not (1 <= self.series_acceleration_terms <= len(_BERNOULLI_EVEN)):
            raise ValueError(
                "series_acceleration_terms must be in [1, "
                f"{len(_BERNOULLI_EVEN)}], got {self.series_acceleration_terms!r}"
            )


DEFAULT_CONFIG = SpecialFunctionConfig()


def hurwitz_zeta(s: float, a: float, config: SpecialFunctionConfig = DEFAULT_CONFIG) -> float:
    """zeta(s, a) = sum_{k>=0} (k+a)^-s for s > 1, a > 0."""
    if s <= 1.0:
        raise ValueError(f"hurwitz_zeta requires s > 1, got s={s!r}")
    if a <= 0.0:
        raise ValueError(f"hurwitz_zeta requires a > 0, got a={a!r}")

    depth = config.series_acceleration_terms
    cut = 16
    while True:
        direct = math.fsum((k + a) ** -s for k in range(cut))
        x = cut + a
        tail = x ** (1.0 - s) / (s - 1.0) + 0.5 * x**-s
        rising = s  # s(s+1)...(s+2i-2)
        xpow = x ** (-s - 1.0)
        fact = 1.0
        for i in range(1, depth + 1):
            fact *= (2 * i - 1) * (2 * i)
            tail += _BERNOULLI_EVEN[i - 1] / fact * rising * xpow
            rising *= (s + 2 * i - 1) * (s + 2 * i)
            xpow /= x * x
        value = direct + tail
        # first omitted correction bounds the truncation error
        err = abs(_BERNOULLI_EVEN[depth] / (fact * (2 * depth + 1) * (2 * depth + 2)) * rising * xpow * x)
        if err <= config.target_relative_error * abs(value) or cut >= 4096:
            return value
        cut *= 2


def riemann_zeta(s: float, config: SpecialFunctionConfig = DEFAULT_CONFIG) -> float:
    """zeta(s) for s > 1."""
    if s <= 1.0:
        raise ValueError(f"riemann_zeta requires s > 1, got s={s!r}")
    return hurwitz_zeta(s, 1.0, config)


def digamma(z: float, config: SpecialFunctionConfig = DEFAULT_CONFIG) -> float:
    """Psi(z) = d/dz log Gamma(z) for z > 0, asymptotic series with recurrence."""
    if z <= 0.0:
        raise ValueError(f"digamma requires z > 0, got z={z!r}")
    shift = 0.0
    while z < 16.0:
        shift -= 1.0 / z
        z += 1.0
    value = math.log(z) - 0.5 / z
    z2 = z * z
    zpow = z2
    for i in range(1, config.series_acceleration_terms + 1):
        value -= _BERNOULLI_EVEN[i - 1] / (2 * i * zpow)
        zpow *= z2
    return value + shift


def polygamma(l: int, z: float, config: SpecialFunctionConfig = DEFAULT_CONFIG) -> float:
    """Psi^(l)(z), the l-th derivative of digamma; l = 0 gives digamma itself."""
    if l < 0:
        raise ValueError(f"polygamma order must be >= 0, got {l!r}")
    if z <= 0.0:
        raise ValueError(f"polygamma requires z > 0, got z={z!r}")
    if l == 0:
        return digamma(z, config)
    sign = 1.0 if l % 2 else -1.0
    return sign * math.factorial(l) * hurwitz_zeta(l + 1.0, z, config)
