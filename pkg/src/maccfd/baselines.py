"""Comparison schemes: alternating grid search (APO), antenna selection (AS),
fixed antennas (FPA) and an exhaustive grid oracle.

All optimizers take a fitness callable mapping an (M, 8) array of layout
vectors to M values, typically a :class:`~maccfd.system.LinkEvaluator`.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from maccfd.channel import ChannelRealization, SystemParams
from maccfd.system import AntennaLayout, LinkEvaluator, MODES

BRUTE_FORCE_LIMIT = 10_000_000


class BruteForceTooLarge(ValueError):
    def __init__(self, count: int, limit: int = BRUTE_FORCE_LIMIT):
        super().__init__(f"brute force needs {count} layout evaluations (limit {limit})")
        self.count = count


@dataclass(frozen=True)
class GridSpec:
    """Candidate positions inside one D x D region.

    ``anchor="edge"`` gives the points -D/2 + i*spacing that fit in the
    region; ``anchor="center"`` gives the largest lattice with that spacing
    that fits, centered on the origin (odd counts include the origin, and
    the count grows exactly when D crosses a multiple of ``spacing``).
    A spacing larger than the extent leaves the origin as the only point.
    """

    spacing: float
    extent: float
    anchor: str = "edge"

    def __post_init__(self):
        if not self.spacing > 0:
            raise ValueError("grid spacing must be positive")
        if self.extent < 0:
            raise ValueError("grid extent must be >= 0")
        if self.anchor not in ("edge", "center"):
            raise ValueError(f"unknown grid anchor {self.anchor!r}")

    def axis_points(self) -> np.ndarray:
        if self.spacing > self.extent:
            return np.zeros(1)
        # 1e-9 guards exact multiples against float division error
        n = int(math.floor(self.extent / self.spacing + 1e-9)) + 1
        i = np.arange(n, dtype=float)
        if self.anchor == "edge":
            pts = -self.extent / 2 + i * self.spacing
        else:
            pts = (i - (n - 1) / 2) * self.spacing
        pts[np.abs(pts) < 1e-12] = 0.0
        return np.clip(pts, -self.extent / 2, self.extent / 2)

    def points(self) -> np.ndarray:
        """(G, 2) region points, x-major so row order is lexicographic."""
        axis = self.axis_points()
        xx, yy = np.meshgrid(axis, axis, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel()])

    @property
    def size(self) -> int:
        return len(self.axis_points()) ** 2


@dataclass
class BaselineResult:
    layout: AntennaLayout
    fitness: float
    iterations_used: int
    evaluations: int
    mode: Optional[str] = None
    history: List[float] = field(default_factory=list)


def _mode_of(fitness) -> Optional[str]:
    return getattr(fitness, "mode", None)


def mode_adapter(mode: str, chan: ChannelRealization, params: SystemParams) -> LinkEvaluator:
    """Objective for ``mode``: full-duplex min-rate or half-duplex min-rate."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    return LinkEvaluator(chan, params, mode=mode)


def run_fpa(fitness: Callable) -> BaselineResult:
    u = np.zeros(8)
    value = float(np.asarray(fitness(u[None, :]))[0])
    return BaselineResult(AntennaLayout(), value, 0, 1, _mode_of(fitness), [value])


def _locate(point: np.ndarray, candidates: np.ndarray) -> Optional[int]:
    hit = np.flatnonzero(np.all(np.abs(candidates - point) <= 1e-12, axis=1))
    return int(hit[0]) if hit.size else None


def alternating_search(fitness: Callable, candidates: np.ndarray, start, max_rounds: int = 20,
                       tol: float = 1e-6) -> BaselineResult:
    """Per-antenna exhaustive search over ``candidates`` holding the other three fixed.

    Sweeps t_A, r_A, t_B, r_B in that order; a move is taken only on strict
    improvement (first candidate wins ties).  Stops after the first round that
    gains no more than ``tol``, or after ``max_rounds``.  Each antenna sweep
    costs len(candidates) evaluations; one more is spent up front only when
    the start position is not itself a candidate.
    """
    u = np.asarray(start, dtype=float).reshape(8).copy()
    G = candidates.shape[0]
    evaluations = 0
    current = None
    if _locate(u[0:2], candidates) is None:
        current = float(np.asarray(fitness(u[None, :]))[0])
        evaluations += 1
    # history[0] is the starting fitness, history[r] the fitness after round r
    history: List[float] = [] if current is None else [current]
    sweep = fitness.sweeper(candidates) if isinstance(fitness, LinkEvaluator) else None
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        for a in range(4):
            sl = slice(2 * a, 2 * a + 2)
            if sweep is not None:
                values = sweep(u, a)
            else:
                batch = np.repeat(u[None, :], G, axis=0)
                batch[:, sl] = candidates
                values = np.asarray(fitness(batch), dtype=float)
            evaluations += G
            loc = _locate(u[sl], candidates)
            incumbent = -np.inf if loc is None else values[loc]
            if current is None:
                current = float(incumbent)
                history.append(current)
            best = int(np.argmax(values))
            # compare against the incumbent from the same sweep so rounding
            # differences between evaluation paths never count as a gain
            if values[best] > incumbent and values[best] > current:
                u[sl] = candidates[best]
                current = float(values[best])
        gained = current - history[-1]
        history.append(current)
        if gained <= tol:
            break
    value = current
    if isinstance(fitness, LinkEvaluator):
        # reported value from the generic path, not counted as a search call
        value = float(np.minimum(*fitness.rates(u[None, :]))[0])
    return BaselineResult(AntennaLayout.from_vector(u), value, rounds, evaluations,
                          _mode_of(fitness), history)


def run_apo(fitness: Callable, grid: GridSpec, max_rounds: int = 20, tol: float = 1e-6) -> BaselineResult:
    """Alternating position optimization starting from the all-origin layout."""
    return alternating_search(fitness, grid.points(), np.zeros(8), max_rounds, tol)


def antenna_lattice(extent: float, spacing: float = 0.5) -> GridSpec:
    return GridSpec(spacing=spacing, extent=extent, anchor="center")


def run_antenna_selection(fitness: Callable, spacing: float = 0.5, extent: float = 1.0,
                          max_rounds: int = 20, tol: float = 1e-6) -> BaselineResult:
    """Alternating selection among fixed antennas on a centered lattice.

    Starts from the lattice point nearest the origin (the origin itself when
    the per-axis count is odd).
    """
    candidates = antenna_lattice(extent, spacing).points()
    nearest = candidates[int(np.argmin(np.sum(candidates ** 2, axis=1)))]
    return alternating_search(fitness, candidates, np.tile(nearest, 4), max_rounds, tol)


def _brute_separable(ev: LinkEvaluator, pts: np.ndarray):
    """Best grid index tuple using per-link |h|^2 tables (G x G each)."""
    G = pts.shape[0]
    aa = ev.gain_table(("A", "A"), pts, pts)   # [t_a, r_a]
    ab = ev.gain_table(("A", "B"), pts, pts)   # [t_a, r_b]
    ba = ev.gain_table(("B", "A"), pts, pts)   # [t_b, r_a]
    bb = ev.gain_table(("B", "B"), pts, pts)   # [t_b, r_b]
    best_val, best_idx = -np.inf, None
    for ita in range(G):
        # axes: (r_a, t_b, r_b)
        g = {
            ("A", "A"): aa[ita][:, None, None],
            ("A", "B"): ab[ita][None, None, :],
            ("B", "A"): ba.T[:, :, None],
            ("B", "B"): bb[None, :, :],
        }
        rate_a, rate_b = ev.rates_from_gains(g)
        vals = np.minimum(rate_a, rate_b)
        flat = int(np.argmax(vals))
        if vals.flat[flat] > best_val:
            best_val = float(vals.flat[flat])
            best_idx = (ita, *np.unravel_index(flat, vals.shape))
    return best_idx


def _brute_generic(fitness: Callable, pts: np.ndarray):
    G = pts.shape[0]
    rest = np.array(np.meshgrid(np.arange(G), np.arange(G), np.arange(G), indexing="ij")).reshape(3, -1).T
    best_val, best_idx = -np.inf, None
    for ita in range(G):
        batch = np.empty((rest.shape[0], 8))
        batch[:, 0:2] = pts[ita]
        batch[:, 2:4] = pts[rest[:, 0]]
        batch[:, 4:6] = pts[rest[:, 1]]
        batch[:, 6:8] = pts[rest[:, 2]]
        vals = np.asarray(fitness(batch), dtype=float)
        flat = int(np.argmax(vals))
        if vals[flat] > best_val:
            best_val = float(vals[flat])
            best_idx = (ita, *rest[flat])
    return best_idx


def brute_force(fitness: Callable, grid: GridSpec, limit: int = BRUTE_FORCE_LIMIT) -> BaselineResult:
    """Exact maximizer over the product grid (G points per region, G**4 layouts).

    Ties go to the lexicographically first layout in grid-index order.  A
    :class:`LinkEvaluator` is searched through per-link gain tables; any
    other callable is enumerated directly.
    """
    pts = grid.points()
    G = pts.shape[0]
    count = G ** 4
    if count > limit:
        raise BruteForceTooLarge(count, limit)
    if isinstance(fitness, LinkEvaluator):
        idx = _brute_separable(fitness, pts)
        u = np.concatenate([pts[i] for i in idx])
        rate_a, rate_b = fitness.rates(u)
        value = float(min(rate_a[0], rate_b[0]))
        fitness.evaluations += count
    else:
        idx = _brute_generic(fitness, pts)
        u = np.concatenate([pts[i] for i in idx])
        value = float(np.asarray(fitness(u[None, :]))[0])
    return BaselineResult(AntennaLayout.from_vector(u), value, 1, count, _mode_of(fitness), [value])
