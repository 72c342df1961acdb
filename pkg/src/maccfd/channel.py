"""Field-response channel model for the four links of a two-terminal MA link.

Positions are expressed in wavelengths (lambda = 1), so the phase of a path
at displacement ``rho`` from the region origin is simply ``2*pi*rho``.
Powers are linear milliwatts; dB quantities are converted at the boundary.
"""

from dataclasses import dataclass
from typing import Dict, Sequence, Tuple, Union

import numpy as np

from maccfd.seeding import stream

TERMINALS = ("A", "B")
# Fixed order doubles as the per-link random stream id.
LINK_ORDER: Tuple[Tuple[str, str], ...] = (("A", "A"), ("A", "B"), ("B", "A"), ("B", "B"))

Position = Union[Tuple[float, float], np.ndarray]


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def dbm_to_mw(value_dbm: float) -> float:
    return 10.0 ** (value_dbm / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * np.log10(value)


@dataclass(frozen=True)
class PathAngles:
    """Elevation and azimuth of one propagation path, in radians."""

    elevation: float
    azimuth: float

    def __post_init__(self):
        half = np.pi / 2
        if not (-half <= self.elevation <= half and -half <= self.azimuth <= half):
            raise ValueError(f"path angles outside [-pi/2, pi/2]: {self}")


AnglesLike = Union[Sequence[PathAngles], np.ndarray]


def _angles_array(angles: AnglesLike) -> np.ndarray:
    """Return an (L, 2) array of [elevation, azimuth] rows."""
    if isinstance(angles, np.ndarray):
        arr = np.asarray(angles, dtype=float)
    else:
        arr = np.array([[a.elevation, a.azimuth] if isinstance(a, PathAngles) else a
                        for a in angles], dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        arr = arr.reshape(-1, 2)
    return arr


def direction_matrix(angles: AnglesLike) -> np.ndarray:
    """(2, L) projection matrix so that ``pos @ M`` gives every path's rho."""
    arr = _angles_array(angles)
    elev, azim = arr[:, 0], arr[:, 1]
    return np.vstack([np.cos(elev) * np.sin(azim), np.sin(elev)])


def propagation_distance_diff(pos: Position, angles: PathAngles) -> float:
    """Path-length difference (in wavelengths) of ``pos`` relative to the origin.

    The same expression serves the transmit side (angles of departure) and the
    receive side (angles of arrival).
    """
    x, y = float(pos[0]), float(pos[1])
    return x * np.cos(angles.elevation) * np.sin(angles.azimuth) + y * np.sin(angles.elevation)


def field_response(pos: Position, angles_list: AnglesLike) -> np.ndarray:
    """Unit-modulus phase vector, one entry per path.

    ``pos`` may also be an (..., 2) batch, in which case the result has shape
    (..., L).
    """
    arr = _angles_array(angles_list)
    if arr.shape[0] == 0:
        raise ValueError("field_response needs at least one path")
    rho = np.asarray(pos, dtype=float) @ direction_matrix(arr)
    return np.exp(2j * np.pi * rho)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class LinkGeometry:
    """Angles of departure/arrival and path-response matrix of one link.

    ``aods`` is (L_t, 2) and ``aoas`` is (L_r, 2), rows [elevation, azimuth];
    ``sigma`` is the (L_r, L_t) complex path-response matrix.
    """

    aods: np.ndarray
    aoas: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        aods = _angles_array(self.aods)
        aoas = _angles_array(self.aoas)
        sigma = np.atleast_2d(np.asarray(self.sigma, dtype=complex))
        if sigma.shape != (aoas.shape[0], aods.shape[0]):
            raise ValueError(
                f"sigma shape {sigma.shape} does not match "
                f"(L_r, L_t) = ({aoas.shape[0]}, {aods.shape[0]})"
            )
        if not np.all(np.isfinite(sigma)):
            raise ValueError("sigma entries must be finite")
        object.__setattr__(self, "aods", _readonly(aods))
        object.__setattr__(self, "aoas", _readonly(aoas))
        object.__setattr__(self, "sigma", _readonly(sigma))

    @property
    def num_tx_paths(self) -> int:
        return self.aods.shape[0]

    @property
    def num_rx_paths(self) -> int:
        return self.aoas.shape[0]

    @property
    def op_count(self) -> int:
        """Multiply count of one coefficient evaluation: L_t*L_r + L_t."""
        return self.num_tx_paths * self.num_rx_paths + self.num_tx_paths

    def __eq__(self, other):
        if not isinstance(other, LinkGeometry):
            return NotImplemented
        return (
            np.array_equal(self.aods, other.aods)
            and np.array_equal(self.aoas, other.aoas)
            and np.array_equal(self.sigma, other.sigma)
        )


def channel_coefficient(t: Position, r: Position, link: LinkGeometry) -> complex:
    """h = f(r)^H . Sigma . g(t) for a single transmit/receive position pair."""
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    if t.shape != (2,) or r.shape != (2,):
        raise ValueError("channel_coefficient expects two 2-D positions")
    g = field_response(t, link.aods)
    f = field_response(r, link.aoas)
    return complex(np.conj(f) @ link.sigma @ g)


def channel_coefficients(t: np.ndarray, r: np.ndarray, link: LinkGeometry) -> np.ndarray:
    """Batched :func:`channel_coefficient` over (N, 2) position arrays."""
    g = np.exp(2j * np.pi * (np.asarray(t, dtype=float) @ direction_matrix(link.aods)))
    f = np.exp(2j * np.pi * (np.asarray(r, dtype=float) @ direction_matrix(link.aoas)))
    return np.einsum("nr,rt,nt->n", np.conj(f), link.sigma, g)


@dataclass(frozen=True)
class SystemParams:
    """Link-budget and geometry constants, all in linear units.

    Powers in mW, lengths in wavelengths except ``distance_d_pq`` (meters).
    """

    transmit_power: float = 100.0
    noise_power: float = 1e-8
    region_size_d: float = 1.0
    si_loss_rho: float = 1e-9
    soi_pathloss_beta: float = 1e-3
    pathloss_exponent_alpha: float = 2.8
    distance_d_pq: float = 100.0
    num_si_paths: int = 5
    num_soi_paths: int = 10

    def __post_init__(self):
        for name in ("transmit_power", "noise_power", "si_loss_rho", "soi_pathloss_beta",
                     "pathloss_exponent_alpha", "distance_d_pq"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if not self.region_size_d >= 0:
            raise ValueError(f"region_size_d must be >= 0, got {self.region_size_d!r}")
        for name in ("num_si_paths", "num_soi_paths"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")

    @property
    def si_path_variance(self) -> float:
        return self.si_loss_rho / self.num_si_paths

    @property
    def soi_path_variance(self) -> float:
        return (self.soi_pathloss_beta * self.distance_d_pq ** (-self.pathloss_exponent_alpha)
                / self.num_soi_paths)

    def num_paths(self, p: str, q: str) -> int:
        return self.num_si_paths if p == q else self.num_soi_paths

    def path_variance(self, p: str, q: str) -> float:
        return self.si_path_variance if p == q else self.soi_path_variance


@dataclass(frozen=True)
class ChannelRealization:
    """One fading block: geometry of the two SI links and the two SoI links."""

    links: Dict[Tuple[str, str], LinkGeometry]
    seed: int = 0

    def __post_init__(self):
        if set(self.links) != set(LINK_ORDER):
            raise ValueError(f"expected links {LINK_ORDER}, got {sorted(self.links)}")

    def __getitem__(self, key: Tuple[str, str]) -> LinkGeometry:
        return self.links[key]

    @property
    def path_sum(self) -> int:
        """Per-layout multiply count over all four links (L_sum)."""
        return sum(link.op_count for link in self.links.values())


def cscg(u1: np.ndarray, u2: np.ndarray, variance: float) -> np.ndarray:
    """Box-Muller map from two uniform [0, 1) arrays to CN(0, variance) samples."""
    radius = np.sqrt(-2.0 * np.log1p(-u1))
    scale = np.sqrt(variance / 2.0)
    return scale * radius * (np.cos(2 * np.pi * u2) + 1j * np.sin(2 * np.pi * u2))


def sample_link(rng: np.random.Generator, num_paths: int, variance: float) -> LinkGeometry:
    """Draw one diagonal geometry-model link from ``rng``.

    Stream layout: AoD elevations, AoD azimuths, AoA elevations, AoA azimuths
    (``num_paths`` uniforms each), then the Box-Muller radius uniforms and
    the phase uniforms for the diagonal of sigma.
    """
    L = num_paths
    u = rng.random(4 * L)
    angles = np.pi * u - np.pi / 2
    aods = np.column_stack([angles[0:L], angles[L:2 * L]])
    aoas = np.column_stack([angles[2 * L:3 * L], angles[3 * L:4 * L]])
    bm = rng.random(2 * L)
    sigma = np.diag(cscg(bm[:L], bm[L:], variance))
    return LinkGeometry(aods=aods, aoas=aoas, sigma=sigma)


def sample_geometry(seed: int, params: SystemParams) -> ChannelRealization:
    """Sample the four links of one channel realization.

    Each link reads its own random stream keyed by (seed, link index), so the
    SoI links do not change when only the SI path count changes (and vice versa).
    """
    links = {}
    for idx, (p, q) in enumerate(LINK_ORDER):
        rng = stream(seed, idx)
        links[(p, q)] = sample_link(rng, params.num_paths(p, q), params.path_variance(p, q))
    return ChannelRealization(links=links, seed=int(seed))
