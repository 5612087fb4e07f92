"""Physical model of two capacitively coupled current-biased Josephson junctions.

Internally everything is nondimensionalized: energies in units of the
plasma energy ``hbar*omega0`` at the reference bias, times in ``1/omega0``,
and the junction phases ``gamma1, gamma2`` are the bare coordinates. The
reference bias ``j0`` fixes ``omega0`` once; it does not move when the
junctions are detuned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

ECHARGE = 1.602176634e-19  # elementary charge, C
HBAR = 1.054571817e-34  # reduced Planck constant, J s


class ParameterError(ValueError):
    """Invalid or non-finite model parameters."""


class RegimeError(ParameterError):
    """Parameters leave the metastable-well operating regime."""


def _require_finite_positive(name: str, value: float) -> None:
    if not math.isfinite(value) or value <= 0.0:
        raise ParameterError(f"{name} must be finite and positive, got {value!r}")


@dataclass(frozen=True)
class CircuitParams:
    """Junction capacitance, coupling capacitance and critical current (SI)."""

    junction_capacitance: float
    coupling_capacitance: float
    critical_current: float

    def __post_init__(self) -> None:
        _require_finite_positive("junction_capacitance", self.junction_capacitance)
        _require_finite_positive("coupling_capacitance", self.coupling_capacitance)
        _require_finite_positive("critical_current", self.critical_current)
        if self.coupling_capacitance >= self.junction_capacitance:
            raise ParameterError(
                "weak-coupling regime requires coupling_capacitance < junction_capacitance"
            )


# The device of the reference design: C_J = 6 pF, I_c = 21 uA. Used as the
# anchor when parameters are given dimensionlessly as (ns, zeta).
REFERENCE_CJ = 6e-12
REFERENCE_IC = 21e-6


def reference_params(zeta: float) -> CircuitParams:
    """Reference device with the coupling capacitor chosen to realize ``zeta``."""
    if not 0.0 < zeta < 1.0:
        raise ParameterError(f"zeta must lie in (0, 1), got {zeta!r}")
    cc = zeta / (1.0 - zeta) * REFERENCE_CJ
    return CircuitParams(REFERENCE_CJ, cc, REFERENCE_IC)


@dataclass(frozen=True)
class DerivedScales:
    """Energy scales and dimensionless numbers derived from a circuit + bias.

    ``charging_energy``, ``josephson_energy`` and ``plasma_energy`` are in
    joules; ``ej`` and ``ec`` are the same energies in units of
    ``plasma_energy`` and are what the numerics consume.
    """

    charging_energy: float
    josephson_energy: float
    zeta: float
    reference_bias: float
    plasma_energy: float
    level_number: float

    @property
    def ej(self) -> float:
        return self.josephson_energy / self.plasma_energy

    @property
    def ec(self) -> float:
        return self.charging_energy / self.plasma_energy

    @property
    def kinetic_coefficient(self) -> float:
        """Coefficient of k^2 per axis, (4 E_C / hbar omega0) / (1 + zeta)."""
        return 4.0 * self.ec / (1.0 + self.zeta)

    @property
    def omega0(self) -> float:
        """Plasma angular frequency at the reference bias, rad/s."""
        return self.plasma_energy / HBAR

    @property
    def frequency_ghz(self) -> float:
        return self.omega0 / (2.0 * math.pi) / 1e9


def derive_scales(params: CircuitParams, j0: float) -> DerivedScales:
    """Charging/Josephson energies, zeta, plasma energy and N_s at bias j0."""
    if not math.isfinite(j0) or not 0.0 < j0 < 1.0:
        raise ParameterError(f"reference bias j0 must lie in (0, 1), got {j0!r}")
    ec = ECHARGE**2 / (2.0 * params.junction_capacitance)
    ej = HBAR * params.critical_current / (2.0 * ECHARGE)
    zeta = params.coupling_capacitance / (
        params.coupling_capacitance + params.junction_capacitance
    )
    hw0 = math.sqrt(8.0 * ec * ej) * (1.0 - j0**2) ** 0.25
    ns = 2.0**0.75 / 3.0 * math.sqrt(ej / ec) * (1.0 - j0) ** 1.25
    return DerivedScales(
        charging_energy=ec,
        josephson_energy=ej,
        zeta=zeta,
        reference_bias=j0,
        plasma_energy=hw0,
        level_number=ns,
    )


def bias_for_ns(params: CircuitParams, target_ns: float) -> float:
    """Reference bias j0 at which the well holds ``target_ns`` levels.

    N_s = (2^{3/4}/3) sqrt(E_J/E_C) (1-j0)^{5/4} is strictly decreasing in
    j0, so the inversion is a closed form.
    """
    if not math.isfinite(target_ns) or target_ns <= 0.0:
        raise ParameterError(f"target_ns must be positive, got {target_ns!r}")
    ec = ECHARGE**2 / (2.0 * params.junction_capacitance)
    ej = HBAR * params.critical_current / (2.0 * ECHARGE)
    prefactor = 2.0**0.75 / 3.0 * math.sqrt(ej / ec)
    one_minus_j0 = (target_ns / prefactor) ** 0.8
    if one_minus_j0 >= 1.0:
        raise RegimeError(
            f"target_ns={target_ns} is not achievable with j0 in (0, 1) "
            f"for E_J/E_C={ej / ec:.3g}"
        )
    return 1.0 - one_minus_j0


def scales_for_ns(ns: float, zeta: float) -> DerivedScales:
    """Dimensionless entry point: reference device tuned to (ns, zeta)."""
    params = reference_params(zeta)
    return derive_scales(params, bias_for_ns(params, ns))


@dataclass(frozen=True)
class BiasPair:
    """Normalized bias currents of the two junctions."""

    j1: float
    j2: float

    def __post_init__(self) -> None:
        for name, j in (("j1", self.j1), ("j2", self.j2)):
            if not math.isfinite(j) or not 0.0 < j < 1.0:
                raise RegimeError(f"{name} must lie in (0, 1), got {j!r}")

    def swapped(self) -> "BiasPair":
        return BiasPair(self.j2, self.j1)


def detune(j0: float, eps: float) -> BiasPair:
    """Split the biases symmetrically about j0 by the detuning eps.

    sqrt(1-j1) = sqrt(1-j0)(1+eps) and sqrt(1-j2) = sqrt(1-j0)(1-eps).
    """
    if not 0.0 < j0 < 1.0:
        raise ParameterError(f"j0 must lie in (0, 1), got {j0!r}")
    j1 = 1.0 - (1.0 - j0) * (1.0 + eps) ** 2
    j2 = 1.0 - (1.0 - j0) * (1.0 - eps) ** 2
    return BiasPair(j1, j2)


def detuning_of(j1: float, j0: float) -> float:
    """Recover eps from the first junction's bias (inverse of `detune`)."""
    return math.sqrt((1.0 - j1) / (1.0 - j0)) - 1.0


# --- single-junction well geometry -----------------------------------------


def well_minimum(j: float) -> float:
    """Phase of the metastable minimum, arcsin(j)."""
    return math.asin(j)


def cubic_barrier_offset(j: float) -> float:
    """Distance from the minimum to the barrier top of the cubic well."""
    gm = math.asin(j)
    return 2.0 * math.cos(gm) / math.sin(gm)


def cubic_barrier_height(j: float, scales: DerivedScales) -> float:
    """Barrier height of the cubic well, (2/3) E_J cos(gm) cot^2(gm), in hw0."""
    gm = math.asin(j)
    return (2.0 / 3.0) * scales.ej * math.cos(gm) * (math.cos(gm) / math.sin(gm)) ** 2


def plasma_frequency(j: float, scales: DerivedScales) -> float:
    """omega_p(j)/omega0 = ((1-j^2)/(1-j0^2))^{1/4}."""
    return ((1.0 - j**2) / (1.0 - scales.reference_bias**2)) ** 0.25


def ground_width(j: float, scales: DerivedScales) -> float:
    """Harmonic ground-state width sigma of the well at bias j (radians)."""
    a = scales.ej * math.cos(math.asin(j))
    t = scales.kinetic_coefficient
    return math.sqrt(0.5 * math.sqrt(t / (0.5 * a)))


def washboard_1d(gamma, j: float, scales: DerivedScales):
    """Tilted-cosine potential of one junction, -E_J(cos g + j g), in hw0."""
    return -scales.ej * (np.cos(gamma) + j * np.asarray(gamma, dtype=float))


def cubic_1d(gamma, j: float, scales: DerivedScales):
    """Third-order expansion of the washboard about its metastable minimum."""
    gm = math.asin(j)
    d = np.asarray(gamma, dtype=float) - gm
    a = scales.ej * math.cos(gm)
    b = scales.ej * math.sin(gm)
    u0 = -scales.ej * (math.cos(gm) + j * gm)
    return u0 + 0.5 * a * d**2 - b * d**3 / 6.0


def harmonic_1d(gamma, j: float, scales: DerivedScales):
    """Quadratic truncation of the well (cubic term zeroed); for validation."""
    gm = math.asin(j)
    d = np.asarray(gamma, dtype=float) - gm
    a = scales.ej * math.cos(gm)
    u0 = -scales.ej * (math.cos(gm) + j * gm)
    return u0 + 0.5 * a * d**2


POTENTIALS = {
    "cubic": cubic_1d,
    "full": washboard_1d,
    "harmonic": harmonic_1d,
}


def potential_1d(name: str):
    try:
        return POTENTIALS[name]
    except KeyError:
        raise ParameterError(f"unknown potential variant {name!r}") from None


def potential_full(gamma1, gamma2, bias: BiasPair, scales: DerivedScales):
    """Exact two-junction washboard potential on (gamma1, gamma2), in hw0."""
    return washboard_1d(gamma1, bias.j1, scales) + washboard_1d(gamma2, bias.j2, scales)


def potential_cubic(gamma1, gamma2, bias: BiasPair, scales: DerivedScales):
    """Cubic-well approximation of the potential, expanded per junction."""
    return cubic_1d(gamma1, bias.j1, scales) + cubic_1d(gamma2, bias.j2, scales)


def kinetic_spectrum(k1, k2, scales: DerivedScales):
    """Kinetic energy at conjugate wavenumbers (k1, k2), in hw0.

    T = (4 E_C / hw0) (1+zeta)^{-1} (k1^2 + k2^2 + 2 zeta k1 k2); the cross
    term is the capacitive coupling. Positive definite for zeta < 1.
    """
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    t = scales.kinetic_coefficient
    return t * (k1**2 + k2**2 + 2.0 * scales.zeta * k1 * k2)


# --- pulse schedule ---------------------------------------------------------

RAMP_SHAPES = ("raised_cosine", "linear")


@dataclass(frozen=True)
class PulseSchedule:
    """Trapezoidal detuning pulse: eps_a -> eps_b -> hold -> eps_a.

    Times are in units of 1/omega0. ``lead_hold``/``tail_hold`` pad the
    schedule at eps_a before and after the ramps (default 0: the gate is
    defined from the start of the first ramp to the end of the second).
    """

    eps_a: float
    eps_b: float
    ramp_time: float
    interaction_time: float
    lead_hold: float = 0.0
    tail_hold: float = 0.0
    ramp_shape: str = "raised_cosine"

    def __post_init__(self) -> None:
        if self.ramp_shape not in RAMP_SHAPES:
            raise ParameterError(f"ramp_shape must be one of {RAMP_SHAPES}")
        if self.interaction_time < 0 or self.lead_hold < 0 or self.tail_hold < 0:
            raise ParameterError("hold times must be nonnegative")
        if self.ramp_time < 0:
            raise ParameterError("ramp_time must be nonnegative")
        if self.ramp_time == 0 and self.eps_a != self.eps_b:
            raise ParameterError("ramp_time = 0 requires eps_a == eps_b (continuity)")

    @property
    def total_duration(self) -> float:
        return (
            self.lead_hold
            + 2.0 * self.ramp_time
            + self.interaction_time
            + self.tail_hold
        )

    def _ramp(self, s: float) -> float:
        if self.ramp_shape == "raised_cosine":
            s = 0.5 * (1.0 - math.cos(math.pi * s))
        return self.eps_a + (self.eps_b - self.eps_a) * s

    def epsilon_at(self, t: float) -> float:
        if not 0.0 <= t <= self.total_duration * (1.0 + 1e-12) + 1e-12:
            raise ParameterError(
                f"t={t} outside schedule [0, {self.total_duration}]"
            )
        t = min(t, self.total_duration)
        if t < self.lead_hold:
            return self.eps_a
        t -= self.lead_hold
        if t < self.ramp_time:
            return self._ramp(t / self.ramp_time)
        t -= self.ramp_time
        if t < self.interaction_time:
            return self.eps_b
        t -= self.interaction_time
        if t < self.ramp_time:
            return self._ramp(1.0 - t / self.ramp_time)
        return self.eps_a


def epsilon_at(t: float, sched: PulseSchedule) -> float:
    """Detuning at time t under the schedule (plateau-ramp-plateau-ramp)."""
    return sched.epsilon_at(t)
