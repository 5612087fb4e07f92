"""Time-dependent propagation under a detuning schedule.

Strang-split stepping: half potential phase in coordinate space (cubic
wells recomputed from the instantaneous biases, sampled at the step
midpoint), full kinetic phase in momentum space including the capacitive
cross term, half potential phase, then the absorbing mask. Without the
absorber every factor is unimodular, so the step is unitary to machine
precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft
from scipy.optimize import curve_fit

from . import model
from ._core import kernels
from .grids import Grid2D, Wavefunction2D


class EvolutionError(RuntimeError):
    """Propagation failed (instability, bad configuration, bad fit data)."""


@dataclass(frozen=True)
class AbsorberConfig:
    """Multiplicative boundary mask applied once per step.

    cos^exponent profile over the outer ``width_fraction`` of the downhill
    (large-gamma) edge of each axis; that is where tunneling flux exits.
    """

    width_fraction: float = 0.12
    exponent: float = 0.125
    enabled: bool = True


@dataclass(frozen=True)
class PropagationConfig:
    dt: float = 0.01
    snapshot_stride: int = 20
    absorber: AbsorberConfig = field(default_factory=AbsorberConfig)
    wavefunction_stride: int | None = None
    potential: str = "cubic"

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise model.ParameterError("dt must be positive")
        if self.snapshot_stride < 1:
            raise model.ParameterError("snapshot_stride must be >= 1")


@dataclass
class Trajectory:
    """Sampled observables of one propagation run."""

    times: np.ndarray
    norms: np.ndarray
    probabilities: dict[str, np.ndarray]
    snapshots: list[tuple[float, Wavefunction2D]] = field(default_factory=list)


def absorber_mask_1d(n: int, absorber: AbsorberConfig) -> np.ndarray:
    """Per-axis mask row; identity except over the downhill edge."""
    width = int(round(absorber.width_fraction * n))
    if width < 8:
        raise model.ParameterError(
            f"absorber spans {width} points; needs >= 8 (raise width_fraction "
            "or the resolution)"
        )
    mask = np.ones(n)
    s = np.arange(1, width + 1) / width
    mask[n - width :] = np.cos(0.5 * np.pi * s) ** absorber.exponent
    return mask


def propagate(
    psi0: Wavefunction2D,
    sched: model.PulseSchedule,
    scales: model.DerivedScales,
    cfg: PropagationConfig | None = None,
    references: dict[str, Wavefunction2D] | None = None,
) -> tuple[Trajectory, Wavefunction2D]:
    """Integrate the time-dependent Schroedinger equation over the schedule.

    ``references`` are fixed states whose survival probabilities
    |<ref|psi(t)>|^2 are sampled every ``snapshot_stride`` steps. Returns
    the sampled trajectory and the final state.
    """
    cfg = cfg or PropagationConfig()
    grid = psi0.grid
    refs = references or {}
    for ref in refs.values():
        if ref.grid != grid:
            raise EvolutionError("reference state lives on a different grid")

    total = sched.total_duration
    n_steps = max(1, int(round(total / cfg.dt))) if total > 0 else 0
    dt = total / n_steps if n_steps else 0.0

    k1, k2 = np.meshgrid(grid.k1, grid.k2, indexing="ij")
    kin_phase = np.exp(-1j * dt * model.kinetic_spectrum(k1, k2, scales))
    kin_phase = np.ascontiguousarray(kin_phase)

    if cfg.absorber.enabled:
        mask1 = absorber_mask_1d(grid.n1, cfg.absorber)
        mask2 = absorber_mask_1d(grid.n2, cfg.absorber)
    else:
        mask1 = mask2 = None

    j0 = scales.reference_bias
    ax1, ax2 = grid.axis1, grid.axis2
    pot_1d = model.potential_1d(cfg.potential)

    psi = np.ascontiguousarray(psi0.values.copy())
    area = grid.cell_area

    ref_items = list(refs.items())
    times = [0.0]
    norms = [kernels.norm_sq(psi) * area]
    probs: dict[str, list[float]] = {name: [] for name, _ in ref_items}
    for name, ref in ref_items:
        probs[name].append(abs(kernels.overlap(ref.values, psi) * area) ** 2)
    snapshots: list[tuple[float, Wavefunction2D]] = []
    if cfg.wavefunction_stride is not None:
        snapshots.append((0.0, Wavefunction2D(grid, psi.copy())))

    # Plateaus dominate the schedule, so cache the phase rows on eps; the
    # ramps recompute every step as the wells shift.
    phase_cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}

    def half_potential(eps: float) -> tuple[np.ndarray, np.ndarray]:
        hit = phase_cache.get(eps)
        if hit is not None:
            return hit
        pair = model.detune(j0, eps)
        u1 = pot_1d(ax1, pair.j1, scales) - float(
            pot_1d(model.well_minimum(pair.j1), pair.j1, scales)
        )
        u2 = pot_1d(ax2, pair.j2, scales) - float(
            pot_1d(model.well_minimum(pair.j2), pair.j2, scales)
        )
        phases = np.exp(-0.5j * dt * u1), np.exp(-0.5j * dt * u2)
        if eps == sched.eps_a or eps == sched.eps_b:
            phase_cache[eps] = phases
        return phases

    prev_norm = norms[0]
    for step in range(n_steps):
        row, col = half_potential(sched.epsilon_at((step + 0.5) * dt))
        kernels.apply_rank_one(psi, row, col)
        phi = scipy.fft.fft2(psi, overwrite_x=True)
        kernels.apply_field(phi, kin_phase)
        psi = np.ascontiguousarray(scipy.fft.ifft2(phi, overwrite_x=True))
        kernels.apply_rank_one(psi, row, col)
        if mask1 is not None:
            kernels.apply_mask_rank_one(psi, mask1, mask2)

        if (step + 1) % cfg.snapshot_stride == 0 or step == n_steps - 1:
            t = (step + 1) * dt
            n = kernels.norm_sq(psi) * area
            if mask1 is None and n > prev_norm + 1e-9 * cfg.snapshot_stride:
                raise EvolutionError(
                    f"norm grew from {prev_norm} to {n} by t={t}; dt={dt} unstable"
                )
            prev_norm = n
            times.append(t)
            norms.append(n)
            for name, ref in ref_items:
                probs[name].append(abs(kernels.overlap(ref.values, psi) * area) ** 2)
            if cfg.wavefunction_stride is not None and (
                (step + 1) % cfg.wavefunction_stride == 0 or step == n_steps - 1
            ):
                snapshots.append((t, Wavefunction2D(grid, psi.copy())))

    traj = Trajectory(
        times=np.asarray(times),
        norms=np.asarray(norms),
        probabilities={k: np.asarray(v) for k, v in probs.items()},
        snapshots=snapshots,
    )
    return traj, Wavefunction2D(grid, psi)


def survival(traj: Trajectory, reference: Wavefunction2D) -> np.ndarray:
    """P(t) = |<ref|psi(t)>|^2 from stored snapshots."""
    if not traj.snapshots:
        raise EvolutionError(
            "trajectory holds no snapshots; pass the reference to propagate() "
            "or set wavefunction_stride"
        )
    area = reference.grid.cell_area
    out = []
    for _, psi in traj.snapshots:
        if psi.grid != reference.grid:
            raise EvolutionError("snapshot grid does not match the reference")
        out.append(abs(kernels.overlap(reference.values, psi.values) * area) ** 2)
    return np.asarray(out)


@dataclass(frozen=True)
class OscillationFit:
    """Least-squares fit of a + b cos^2(Omega t + phase)."""

    a: float
    b: float
    omega: float
    phase: float

    @property
    def period(self) -> float:
        """Period of the survival oscillation, pi/Omega."""
        return math.pi / self.omega


def fit_oscillation(times, values) -> OscillationFit:
    """Fit a + b cos^2(Omega t + phi0) to a survival-probability segment."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.size < 8:
        raise EvolutionError("too few samples to fit an oscillation")

    span = t[-1] - t[0]
    y0 = y - y.mean()
    amp = y.max() - y.min()
    if amp < 1e-12:
        raise EvolutionError("data is flat; nothing to fit")
    # cos^2 oscillates at 2*Omega; seed Omega from the dominant FFT line.
    freqs = np.fft.rfftfreq(t.size, d=(t[1] - t[0]))
    power = np.abs(np.fft.rfft(y0))
    k = int(np.argmax(power[1:])) + 1
    omega0 = max(np.pi * freqs[k], np.pi / span)

    def f(tt, a, b, om, ph):
        return a + b * np.cos(om * tt + ph) ** 2

    best = None
    for ph0 in (0.0, np.pi / 2):
        try:
            popt, _ = curve_fit(
                f,
                t,
                y,
                p0=[y.min(), amp, omega0, ph0],
                maxfev=20000,
            )
        except RuntimeError:
            continue
        resid = float(np.sqrt(np.mean((f(t, *popt) - y) ** 2)))
        if best is None or resid < best[1]:
            best = (popt, resid)
    if best is None:
        raise EvolutionError("oscillation fit did not converge")
    (a, b, om, ph), resid = best
    om = abs(om)
    if b < 0:
        b = -b
        ph += np.pi / 2
    if om <= 0 or b < max(5.0 * resid, 1e-10):
        raise EvolutionError("no resolvable oscillation in the segment")
    if span * om < np.pi:
        raise EvolutionError("segment shorter than one oscillation period")
    return OscillationFit(a=float(a), b=float(b), omega=float(om), phase=float(ph % np.pi))
