"""Parameter algebra for the black-hole channel.

Two parameterizations are used throughout the package:

* the physical knobs ``(gamma0, omega_over_t)``: quantum absorption probability
  and mode frequency in units of the Hawking temperature;
* the Hamiltonian couplings ``(g, g_prime)``: the gain of the two-mode squeezer
  (pair creation across the horizon) and the phase of the beamsplitter that
  mixes the late-time mode ``c`` into the outside mode ``a``.

The physical knobs are canonical. Couplings are derived on demand for the
Fock-space simulator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonPositiveFrequencyRatio

__all__ = [
    "BlackHoleParams",
    "CouplingConstants",
    "EarlyTimeParams",
    "couplings_from_params",
    "early_time_coeffs",
    "late_time_coeffs",
    "params_from_couplings",
    "temperature_from_mass",
]


@dataclass(frozen=True)
class BlackHoleParams:
    """Late-time Bogoliubov data for one mode.

    ``alpha2``, ``beta2`` and ``gamma2`` are the squared coefficients of the
    outside annihilator in terms of ``a``, ``b^dagger`` and ``c``. ``Gamma`` is
    the classical absorption probability. The ratio
    ``xi = gamma2 / (alpha2 * beta2)`` is kept as ``log_xi`` because it grows
    like ``exp(omega_over_t)``.
    """

    gamma0: float
    omega_over_t: float
    alpha2: float
    beta2: float
    gamma2: float
    Gamma: float
    log_xi: float

    @property
    def xi(self) -> float:
        try:
            return math.exp(self.log_xi)
        except OverflowError:
            return math.inf

    @property
    def inv_xi(self) -> float:
        """``1/xi``; exactly 0 in the perfect-reflector limit."""
        return math.exp(-self.log_xi)

    @property
    def q(self) -> float:
        """Geometric ratio ``beta2 / (1 + beta2)`` of the outgoing number distributions."""
        return self.beta2 / (1.0 + self.beta2)


@dataclass(frozen=True)
class CouplingConstants:
    """Gains of the late-time Hamiltonian: squeezing ``g`` and beamsplitter ``g_prime``."""

    g: float
    g_prime: float

    def __post_init__(self):
        if not (self.g >= 0.0 and math.isfinite(self.g)):
            raise DomainError(f"squeezing gain must be finite and >= 0, got {self.g}")
        # g' >= g keeps sqrt(g'^2 - g^2) real; allow last-bit rounding from the inversion
        if self.g_prime < self.g * (1.0 - 4 * np.finfo(float).eps):
            raise DomainError(f"need g_prime >= g, got g={self.g}, g_prime={self.g_prime}")


@dataclass(frozen=True)
class EarlyTimeParams:
    """Early-time (pure squeezing) Bogoliubov data; ``cosh(g_k)**2 == alpha2``."""

    omega_over_t: float
    alpha2: float
    beta2: float
    g_k: float

    @property
    def q(self) -> float:
        """Pair-creation ratio ``tanh(g_k)**2 = exp(-omega_over_t)``."""
        return math.exp(-self.omega_over_t)


def _check_ratio(omega_over_t):
    if not omega_over_t > 0.0:
        raise NonPositiveFrequencyRatio(f"omega/T must be > 0, got {omega_over_t}")


def early_time_coeffs(omega_over_t: float) -> EarlyTimeParams:
    """Thermal Bogoliubov coefficients of the early-time squeezer."""
    _check_ratio(omega_over_t)
    x = float(omega_over_t)
    alpha2 = -1.0 / math.expm1(-x)
    beta2 = 1.0 / math.expm1(x) if x < 709.0 else 0.0
    g_k = math.atanh(math.exp(-0.5 * x))
    return EarlyTimeParams(omega_over_t=x, alpha2=alpha2, beta2=beta2, g_k=g_k)


def late_time_coeffs(gamma0: float, omega_over_t: float) -> BlackHoleParams:
    """Late-time coefficients from the quantum absorption probability and omega/T.

    ``gamma0 == 0`` is accepted and gives the perfect reflector, ``xi = inf``.
    """
    if not 0.0 <= gamma0 <= 1.0:
        raise DomainError(f"gamma0 must lie in [0, 1], got {gamma0}")
    if not omega_over_t > 0.0:
        raise DomainError(f"omega/T must be > 0, got {omega_over_t}")
    g0 = float(gamma0)
    x = float(omega_over_t)
    boltz = math.exp(-x)
    alpha2 = g0
    beta2 = g0 * boltz
    Gamma = -g0 * math.expm1(-x)
    # 1 - Gamma without cancellation when gamma0 -> 1 and omega/T is large
    gamma2 = (1.0 - g0) + g0 * boltz
    if g0 == 0.0:
        log_xi = math.inf
    else:
        # log(gamma2) - log(alpha2) - log(beta2), without forming beta2
        log_xi = math.log(gamma2) - 2.0 * math.log(g0) + x
    return BlackHoleParams(
        gamma0=g0,
        omega_over_t=x,
        alpha2=alpha2,
        beta2=beta2,
        gamma2=gamma2,
        Gamma=Gamma,
        log_xi=log_xi,
    )


def couplings_from_params(params: BlackHoleParams) -> CouplingConstants:
    """Invert the coefficient map: find ``(g, g_prime)`` reproducing ``params``.

    With ``theta = sqrt(g'^2 - g^2)`` one has ``alpha2 = cos(theta)**2`` and
    ``beta2 / gamma2 = (g/g')**2``, which fixes both couplings. At
    ``gamma0 == 1`` theta vanishes and the limit ``g = g' = exp(-omega/2T)`` is
    returned.
    """
    g0 = params.gamma0
    if g0 <= 0.0:
        raise DomainError("gamma0 = 0 (perfect reflector) has no finite couplings")
    x = params.omega_over_t
    if g0 == 1.0:
        g = math.exp(-0.5 * x)
        return CouplingConstants(g=g, g_prime=g)
    # atan2 and 1 - r written out keep full precision as gamma0 -> 1
    theta = math.atan2(math.sqrt(1.0 - g0), math.sqrt(g0))
    boltz = g0 * math.exp(-x)
    r = boltz / ((1.0 - g0) + boltz)
    g_prime = theta / math.sqrt((1.0 - g0) / ((1.0 - g0) + boltz))
    return CouplingConstants(g=math.sqrt(r) * g_prime, g_prime=g_prime)


def params_from_couplings(couplings: CouplingConstants) -> BlackHoleParams:
    """Forward map ``(g, g_prime) -> BlackHoleParams``."""
    g, gp = couplings.g, couplings.g_prime
    theta = math.sqrt(max(gp * gp - g * g, 0.0))
    sinc = float(np.sinc(theta / math.pi))  # sin(theta)/theta
    alpha2 = math.cos(theta) ** 2
    beta2 = (g * sinc) ** 2
    gamma2 = (gp * sinc) ** 2
    if beta2 == 0.0 or alpha2 == 0.0:
        raise DomainError("g = 0 or cos(theta) = 0 has no finite omega/T")
    return BlackHoleParams(
        gamma0=alpha2,
        omega_over_t=math.log(alpha2 / beta2),
        alpha2=alpha2,
        beta2=beta2,
        gamma2=gamma2,
        Gamma=1.0 - gamma2,
        log_xi=math.log(gamma2) - math.log(alpha2) - math.log(beta2),
    )


def temperature_from_mass(mass: float) -> float:
    """Hawking temperature ``1/(8 pi M)`` in natural units."""
    if not mass > 0.0:
        raise DomainError(f"mass must be > 0, got {mass}")
    return 1.0 / (8.0 * math.pi * mass)
