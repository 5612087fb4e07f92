"""Static spectra of the coupled junctions versus detuning.

The two-junction Hamiltonian (cubic-well form) is diagonalized on a
hard-wall boxed grid. Tunneling widths at the operating depths scale like
exp(-36 N_s / 5) ~ 1e-13, far below every tolerance here, so the metastable
resonances are treated as bound states; continuum artifacts of the box are
filtered by an inside-the-barrier probability test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import eig_banded
from scipy.optimize import linear_sum_assignment

from . import model
from .grids import Grid2D, Wavefunction2D, inner

# Relative edge-amplitude threshold for detecting insufficient coverage.
# Applied on the uphill (small-gamma) edges where bound-state tails must
# vanish; the downhill edge carries the genuine open-channel tail.
EDGE_AMPLITUDE_TOL = 1e-6


class SpectrumError(RuntimeError):
    """Eigensolve failed or produced unusable states."""


class CoverageError(SpectrumError):
    """Grid does not contain the requested states."""


class ContinuityError(SpectrumError):
    """Sweep step too coarse to follow levels; refine the eps list."""


def perturbative_eps(ns: float) -> tuple[float, float]:
    """First-order locations of the off-symmetry degeneracies, -+5/(36 ns)."""
    if ns <= 0:
        raise model.ParameterError("ns must be positive")
    e = 5.0 / (36.0 * ns)
    return (-e, e)


def tunneling_scale(ns: float) -> float:
    """Proportionality factor exp(-36 ns / 5) of the metastable decay rates."""
    if ns <= 0:
        raise model.ParameterError("ns must be positive")
    return math.exp(-36.0 * ns / 5.0)


# --- finite-difference stencils ----------------------------------------------


def _d2_band(n: int, h: float) -> np.ndarray:
    """Lower band form of the 4th-order second-derivative stencil."""
    band = np.zeros((3, n))
    band[0, :] = -2.5
    band[1, :-1] = 4.0 / 3.0
    band[2, :-2] = -1.0 / 12.0
    return band / h**2


def _d2_matrix(n: int, h: float) -> sp.dia_matrix:
    o1 = np.full(n - 1, 4.0 / 3.0)
    o2 = np.full(n - 2, -1.0 / 12.0)
    return sp.diags([o2, o1, np.full(n, -2.5), o1, o2], [-2, -1, 0, 1, 2]) / h**2


def _d1_matrix(n: int, h: float) -> sp.dia_matrix:
    """Antisymmetric 4th-order first-derivative stencil (Dirichlet)."""
    o1 = np.full(n - 1, 2.0 / 3.0)
    o2 = np.full(n - 2, -1.0 / 12.0)
    return sp.diags([-o2, -o1, o1, o2], [-2, -1, 1, 2]) / h


def _fix_phase(values: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-|amplitude| entry is real > 0."""
    idx = np.unravel_index(np.argmax(np.abs(values)), values.shape)
    pivot = values[idx]
    if pivot != 0:
        values = values * (abs(pivot) / pivot)
    return values


# --- single junction ----------------------------------------------------------


def solve_1d(
    j: float,
    scales: model.DerivedScales,
    axis: np.ndarray,
    count: int,
    potential: str = "cubic",
) -> tuple[np.ndarray, np.ndarray]:
    """Lowest ``count`` quasi-bound levels of one junction on a grid axis.

    Returns (energies, states): energies are measured from the well bottom
    (units hw0); states are columns, L2-normalized with the real-positive
    phase convention. Box states that live beyond the barrier are filtered
    by requiring more than half the probability uphill of the barrier top.
    """
    axis = np.asarray(axis, dtype=float)
    n = axis.size
    h = axis[1] - axis[0]
    gm = model.well_minimum(j)
    pot = model.potential_1d(potential)
    u = pot(axis, j, scales) - float(pot(gm, j, scales))

    t = scales.kinetic_coefficient
    band = -t * _d2_band(n, h)
    band[0, :] += u
    n_solve = min(n - 1, max(3 * count + 10, 16))
    w, v = eig_banded(
        band, lower=True, select="i", select_range=(0, n_solve), overwrite_a_band=True
    )

    barrier = gm + model.cubic_barrier_offset(j)
    if potential == "harmonic":
        height = math.inf  # no escape channel
    elif potential == "full":
        height = float(
            model.washboard_1d(math.pi - gm, j, scales) - pot(gm, j, scales)
        )
    else:
        height = model.cubic_barrier_height(j, scales)
    inside = axis <= barrier
    energies, states = [], []
    for i in range(w.size):
        if w[i] >= height:
            break
        prob_inside = float(np.sum(np.abs(v[:, i]) ** 2 * inside))
        if prob_inside > 0.5:
            energies.append(w[i])
            col = v[:, i] / math.sqrt(h)
            imax = int(np.argmax(np.abs(col)))
            if col[imax] < 0:
                col = -col
            states.append(col)
        if len(energies) == count:
            break
    if len(energies) < count:
        raise SpectrumError(
            f"well at j={j:.6f} supports only {len(energies)} quasi-bound "
            f"levels on this axis, {count} requested"
        )
    return np.asarray(energies), np.column_stack(states)


@dataclass
class ProductBasis:
    """Uncoupled-junction product states |jk> = |j;J1> x |k;J2| on a grid.

    Junction 1 is biased at J1(eps), junction 2 at J2 = J1(-eps) image.
    """

    eps: float
    grid: Grid2D
    energies1: np.ndarray
    energies2: np.ndarray
    states1: np.ndarray
    states2: np.ndarray

    @property
    def levels_per_axis(self) -> int:
        return self.states1.shape[1]

    def composite(self, j: int, k: int) -> Wavefunction2D:
        return Wavefunction2D(
            self.grid, np.outer(self.states1[:, j], self.states2[:, k])
        )

    def pair_energy(self, j: int, k: int) -> float:
        return float(self.energies1[j] + self.energies2[k])

    def pairs_by_energy(self) -> list[tuple[int, int]]:
        m = self.levels_per_axis
        pairs = [(j, k) for j in range(m) for k in range(m)]
        pairs.sort(key=lambda p: (self.pair_energy(*p), p))
        return pairs


def product_basis(
    eps: float,
    scales: model.DerivedScales,
    grid: Grid2D,
    levels_per_axis: int = 3,
    potential: str = "cubic",
) -> ProductBasis:
    """1D spectra on both axes at detuning eps, as a labeling basis."""
    pair = model.detune(scales.reference_bias, eps)
    e1, s1 = solve_1d(pair.j1, scales, grid.axis1, levels_per_axis, potential)
    e2, s2 = solve_1d(pair.j2, scales, grid.axis2, levels_per_axis, potential)
    return ProductBasis(eps, grid, e1, e2, s1, s2)


# --- coupled system -----------------------------------------------------------


@dataclass
class SpectrumSlice:
    """Eigenpairs of the coupled system at one detuning.

    Energies are measured from the two-well potential minimum (units hw0)
    and sorted ascending; labels are the product-state tags (j, k) assigned
    by maximal squared overlap.
    """

    eps: float
    energies: np.ndarray
    states: list[Wavefunction2D]
    labels: list[tuple[int, int]]
    label_overlaps: np.ndarray

    def state_by_label(self, j: int, k: int) -> Wavefunction2D:
        return self.states[self.labels.index((j, k))]


def _hamiltonian_2d(
    eps: float, scales: model.DerivedScales, grid: Grid2D, potential: str
) -> sp.csc_matrix:
    pair = model.detune(scales.reference_bias, eps)
    ax1, ax2 = grid.axis1, grid.axis2
    t = scales.kinetic_coefficient
    pot = model.potential_1d(potential)
    u1 = pot(ax1, pair.j1, scales) - float(
        pot(model.well_minimum(pair.j1), pair.j1, scales)
    )
    u2 = pot(ax2, pair.j2, scales) - float(
        pot(model.well_minimum(pair.j2), pair.j2, scales)
    )

    d2a = _d2_matrix(grid.n1, grid.d1)
    d2b = _d2_matrix(grid.n2, grid.d2)
    d1a = _d1_matrix(grid.n1, grid.d1)
    d1b = _d1_matrix(grid.n2, grid.d2)
    i1 = sp.identity(grid.n1)
    i2 = sp.identity(grid.n2)
    v = (u1[:, None] + u2[None, :]).ravel()
    # p1 p2 = -d/dg1 d/dg2; D1 is antisymmetric so the kron is symmetric.
    h = (
        -t * (sp.kron(d2a, i2) + sp.kron(i1, d2b))
        - 2.0 * scales.zeta * t * sp.kron(d1a, d1b)
        + sp.diags(v)
    )
    return h.tocsc()


def solve_2d(
    eps: float,
    scales: model.DerivedScales,
    grid: Grid2D,
    count: int = 6,
    extra: int = 8,
    potential: str = "cubic",
    basis: ProductBasis | None = None,
) -> SpectrumSlice:
    """Lowest ``count`` eigenpairs of the coupled system at detuning eps.

    Sparse 4th-order finite differences with the exact antisymmetric
    cross-derivative stencil for the capacitive p1 p2 term; shift-invert
    Lanczos about the potential minimum. Box artifacts are filtered by the
    inside-barrier probability test, and uphill edge amplitude above
    EDGE_AMPLITUDE_TOL (relative) raises CoverageError.
    """
    h = _hamiltonian_2d(eps, scales, grid, potential)
    dim = h.shape[0]
    v0 = np.full(dim, 1.0 / math.sqrt(dim))
    w, v = spla.eigsh(h, k=count + extra, sigma=0.0, which="LM", v0=v0)
    order = np.argsort(w)
    w = w[order]
    v = v[:, order]

    pair = model.detune(scales.reference_bias, eps)
    gb1 = model.well_minimum(pair.j1) + model.cubic_barrier_offset(pair.j1)
    gb2 = model.well_minimum(pair.j2) + model.cubic_barrier_offset(pair.j2)
    inside = ((grid.axis1 <= gb1)[:, None] & (grid.axis2 <= gb2)[None, :]).ravel()

    cell = math.sqrt(grid.cell_area)
    energies, states = [], []
    for i in range(w.size):
        prob_inside = float(np.sum(np.abs(v[:, i]) ** 2 * inside))
        if prob_inside <= 0.5:
            continue
        psi = _fix_phase(v[:, i].reshape(grid.n1, grid.n2) / cell)
        peak = np.abs(psi).max()
        uphill_edge = max(np.abs(psi[0, :]).max(), np.abs(psi[:, 0]).max())
        if uphill_edge > EDGE_AMPLITUDE_TOL * peak:
            raise CoverageError(
                f"state at E={w[i]:.6f} has uphill edge amplitude "
                f"{uphill_edge / peak:.2e} of peak; grid does not cover it"
            )
        energies.append(w[i])
        states.append(Wavefunction2D(grid, psi))
        if len(energies) == count:
            break
    if len(energies) < count:
        raise CoverageError(
            f"only {len(energies)} of {count} requested levels found inside "
            f"the wells at eps={eps}; increase `extra` or the grid"
        )

    if basis is None:
        basis = product_basis(eps, scales, grid, levels_per_axis=3, potential=potential)
    labels, overlaps = _assign_labels(states, basis)
    return SpectrumSlice(
        eps=eps,
        energies=np.asarray(energies),
        states=states,
        labels=labels,
        label_overlaps=np.asarray(overlaps),
    )


def _assign_labels(
    states: list[Wavefunction2D], basis: ProductBasis
) -> tuple[list[tuple[int, int]], list[float]]:
    pairs = basis.pairs_by_energy()
    composites = [basis.composite(j, k) for j, k in pairs]
    labels, overlaps = [], []
    for st in states:
        ov = [abs(inner(c, st)) ** 2 for c in composites]
        best = int(np.argmax(ov))
        # exact ties broken toward the lexicographically smaller pair
        ties = [i for i, o in enumerate(ov) if o == ov[best]]
        if len(ties) > 1:
            best = min(ties, key=lambda i: pairs[i])
        labels.append(pairs[best])
        overlaps.append(float(ov[best]))
    return labels, overlaps


def eigen_residual(
    slc: SpectrumSlice, scales: model.DerivedScales, potential: str = "cubic"
) -> float:
    """Max of ||H psi - E psi|| / ||psi|| over the slice (units hw0)."""
    h = _hamiltonian_2d(slc.eps, scales, slc.states[0].grid, potential)
    worst = 0.0
    for e, st in zip(slc.energies, slc.states):
        vec = st.values.ravel()
        r = np.linalg.norm(h @ vec - e * vec) / np.linalg.norm(vec)
        worst = max(worst, float(r))
    return worst


# --- sweeps and crossings ------------------------------------------------------


@dataclass
class LevelTrack:
    """Level curves over a detuning sweep, continuity-matched by overlap."""

    eps_values: np.ndarray
    energies: np.ndarray  # shape (n_eps, n_levels), track-ordered
    entropies: np.ndarray  # ebits, same shape
    labels: list[list[tuple[int, int]]]
    min_successive_overlap: float
    states: list[list[Wavefunction2D]] | None = None


def sweep(
    eps_values,
    scales: model.DerivedScales,
    grid: Grid2D,
    count: int = 6,
    keep_states: bool = False,
    potential: str = "cubic",
) -> LevelTrack:
    """Solve slices over sorted eps values and join levels into tracks.

    Tracks are matched between consecutive slices by maximal |<prev|cur>|
    (optimal assignment); a best overlap below 0.5 on any track raises
    ContinuityError.
    """
    from .grids import entanglement

    eps_values = np.asarray(sorted(eps_values), dtype=float)
    if eps_values.size == 0:
        raise model.ParameterError("empty sweep list")
    energies = np.zeros((eps_values.size, count))
    entropies = np.zeros_like(energies)
    labels: list[list[tuple[int, int]]] = []
    kept: list[list[Wavefunction2D]] | None = [] if keep_states else None
    prev_states: list[Wavefunction2D] | None = None
    order = np.arange(count)
    min_overlap = 1.0

    for i, eps in enumerate(eps_values):
        slc = solve_2d(eps, scales, grid, count=count, potential=potential)
        if prev_states is not None:
            ov = np.array(
                [
                    [abs(inner(p, c)) for c in slc.states]
                    for p in prev_states
                ]
            )
            row, col = linear_sum_assignment(-ov)
            matched = ov[row, col].min()
            min_overlap = min(min_overlap, float(matched))
            if matched <= 0.5:
                raise ContinuityError(
                    f"track overlap {matched:.3f} <= 0.5 between eps="
                    f"{eps_values[i - 1]:.5f} and eps={eps:.5f}; refine the step"
                )
            new_order = np.empty(count, dtype=int)
            new_order[row] = col
            order = new_order
        else:
            order = np.arange(count)
        energies[i] = slc.energies[order]
        entropies[i] = [entanglement(slc.states[k]).entropy for k in order]
        labels.append([slc.labels[k] for k in order])
        prev_states = [slc.states[k] for k in order]
        if kept is not None:
            kept.append(prev_states)

    return LevelTrack(
        eps_values=eps_values,
        energies=energies,
        entropies=entropies,
        labels=labels,
        min_successive_overlap=min_overlap,
        states=kept,
    )


def find_avoided_crossing(
    scales: model.DerivedScales,
    grid: Grid2D,
    level_a: int,
    level_b: int,
    bracket: tuple[float, float],
    count: int | None = None,
    xtol: float = 1e-4,
    potential: str = "cubic",
) -> tuple[float, float]:
    """Locate the gap minimum of two (energy-ordered) levels by golden section.

    Returns (eps_star, gap). Raises SpectrumError when the bracket holds no
    interior minimum.
    """
    if count is None:
        count = max(level_a, level_b) + 1
    cache: dict[float, float] = {}

    def gap(eps: float) -> float:
        if eps not in cache:
            slc = solve_2d(eps, scales, grid, count=count, potential=potential)
            cache[eps] = float(slc.energies[level_b] - slc.energies[level_a])
        return cache[eps]

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = min(bracket), max(bracket)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = gap(c), gap(d)
    while b - a > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = gap(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = gap(d)
    eps_star = 0.5 * (a + b)
    gap_star = gap(eps_star)
    if gap(min(bracket)) <= gap_star or gap(max(bracket)) <= gap_star:
        raise SpectrumError(
            f"no interior gap minimum of levels ({level_a}, {level_b}) in {bracket}"
        )
    return eps_star, gap_star


def mixing_angle(
    slc: SpectrumSlice,
    basis: ProductBasis | None = None,
    scales: model.DerivedScales | None = None,
    consistency_tol: float = 0.01,
) -> float:
    """Three-state mixing angle theta at the symmetric point.

    theta = arcsin |<11|3>|; the complementary arccos |<11|5>| must agree
    within ``consistency_tol``. Requires a slice at eps = 0 with levels
    3..5 resolved.
    """
    if abs(slc.eps) > 1e-9:
        raise model.ParameterError("mixing angle is defined at eps = 0")
    if len(slc.states) < 6:
        raise SpectrumError("slice must resolve levels 0..5")
    if basis is None:
        if scales is None:
            raise model.ParameterError("need a product basis or scales")
        basis = product_basis(0.0, scales, slc.states[0].grid, levels_per_axis=3)
    p11 = basis.composite(1, 1)
    th_low = math.asin(min(1.0, abs(inner(p11, slc.states[3]))))
    th_high = math.acos(min(1.0, abs(inner(p11, slc.states[5]))))
    if abs(th_low - th_high) > consistency_tol:
        raise SpectrumError(
            f"mixing-angle extraction inconsistent: {th_low:.4f} vs {th_high:.4f} "
            "(labels 3/5 likely mismatched at eps=0)"
        )
    return th_low
