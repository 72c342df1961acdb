"""SINR, achievable rates and the max-min fitness of an antenna layout."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from maccfd.channel import ChannelRealization, SystemParams, direction_matrix

CCFD = "CCFD"
HD = "HD"
MODES = (CCFD, HD)


@dataclass(frozen=True)
class AntennaLayout:
    """Positions (in wavelengths) of the four movable antennas."""

    t_a: Tuple[float, float] = (0.0, 0.0)
    r_a: Tuple[float, float] = (0.0, 0.0)
    t_b: Tuple[float, float] = (0.0, 0.0)
    r_b: Tuple[float, float] = (0.0, 0.0)

    def to_vector(self) -> np.ndarray:
        """8-vector ordered [t_A; r_A; t_B; r_B]."""
        return np.array([*self.t_a, *self.r_a, *self.t_b, *self.r_b], dtype=float)

    @classmethod
    def from_vector(cls, u) -> "AntennaLayout":
        u = np.asarray(u, dtype=float).reshape(8)
        pairs = [(float(u[i]), float(u[i + 1])) for i in range(0, 8, 2)]
        return cls(*pairs)

    def in_region(self, d: float) -> bool:
        return bool(np.all(np.abs(self.to_vector()) <= d / 2))


ORIGIN_LAYOUT = AntennaLayout()


@dataclass(frozen=True)
class RatePair:
    rate_a: float
    rate_b: float


def achievable_rate(gamma):
    """log2(1 + SINR); works elementwise on arrays."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0):
        raise ValueError(f"SINR must be non-negative, got {gamma!r}")
    out = np.log2(1.0 + g)
    return float(out) if out.ndim == 0 else out


def sinr_from_gains(soi_gain, si_gain, transmit_power, noise_power):
    return soi_gain * transmit_power / (si_gain * transmit_power + noise_power)


def _as_batch(u) -> np.ndarray:
    if isinstance(u, AntennaLayout):
        u = u.to_vector()
    u = np.asarray(u, dtype=float)
    return u.reshape(-1, 8)


class LinkEvaluator:
    """Vectorized rate/fitness evaluation for one channel realization.

    Calling the evaluator on an (N, 8) array of layout vectors returns N
    fitness values and bumps ``evaluations`` by N and ``ops`` by N*L_sum,
    the multiply count of the four channel coefficients.

    >>> ev = LinkEvaluator(chan, params, mode="CCFD")   # doctest: +SKIP
    >>> ev(np.zeros((3, 8))).shape                       # doctest: +SKIP
    (3,)
    """

    def __init__(self, chan: ChannelRealization, params: SystemParams, mode: str = CCFD):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
        self.chan = chan
        self.params = params
        self.mode = mode
        self.evaluations = 0
        self.ops = 0
        self._tx = {}
        self._rx = {}
        self._diag = {}
        for key, link in chan.links.items():
            self._tx[key] = direction_matrix(link.aods)
            self._rx[key] = direction_matrix(link.aoas)
            diag = np.diagonal(link.sigma)
            square = link.sigma.shape[0] == link.sigma.shape[1]
            self._diag[key] = diag if square and np.array_equal(link.sigma, np.diag(diag)) else None

    def coefficient(self, key, t: np.ndarray, r: np.ndarray) -> np.ndarray:
        g = np.exp(2j * np.pi * (t @ self._tx[key]))
        f = np.exp(2j * np.pi * (r @ self._rx[key]))
        diag = self._diag[key]
        if diag is not None:
            return (np.conj(f) * diag * g).sum(axis=1)
        return np.einsum("nr,rt,nt->n", np.conj(f), self.chan.links[key].sigma, g)

    def sweeper(self, candidates: np.ndarray) -> "AntennaSweeper":
        return AntennaSweeper(self, candidates)

    def gain_table(self, key, t: np.ndarray, r: np.ndarray) -> np.ndarray:
        """|h|^2 for every (transmit point, receive point) pair: shape (len(t), len(r))."""
        g = np.exp(2j * np.pi * (np.asarray(t, float) @ self._tx[key]))
        f = np.exp(2j * np.pi * (np.asarray(r, float) @ self._rx[key]))
        h = np.conj(f) @ self.chan.links[key].sigma @ g.T
        return np.abs(h.T) ** 2

    def gains(self, u) -> dict:
        """|h|^2 of all four links, keyed by (p, q), for a batch of layouts."""
        u = _as_batch(u)
        t_a, r_a, t_b, r_b = u[:, 0:2], u[:, 2:4], u[:, 4:6], u[:, 6:8]
        return {
            ("A", "A"): np.abs(self.coefficient(("A", "A"), t_a, r_a)) ** 2,
            ("A", "B"): np.abs(self.coefficient(("A", "B"), t_a, r_b)) ** 2,
            ("B", "A"): np.abs(self.coefficient(("B", "A"), t_b, r_a)) ** 2,
            ("B", "B"): np.abs(self.coefficient(("B", "B"), t_b, r_b)) ** 2,
        }

    def rates_from_gains(self, g: dict, mode: str = None):
        mode = mode or self.mode
        pt, n0 = self.params.transmit_power, self.params.noise_power
        if mode == HD:
            return (0.5 * np.log2(1.0 + g[("B", "A")] * pt / n0),
                    0.5 * np.log2(1.0 + g[("A", "B")] * pt / n0))
        return (np.log2(1.0 + sinr_from_gains(g[("B", "A")], g[("A", "A")], pt, n0)),
                np.log2(1.0 + sinr_from_gains(g[("A", "B")], g[("B", "B")], pt, n0)))

    def rates(self, u, mode: str = None):
        """(R_A, R_B) arrays for a batch of layouts."""
        return self.rates_from_gains(self.gains(u), mode)

    def __call__(self, u) -> np.ndarray:
        u = _as_batch(u)
        self.evaluations += u.shape[0]
        self.ops += u.shape[0] * self.chan.path_sum
        rate_a, rate_b = self.rates(u)
        return np.minimum(rate_a, rate_b)


# Links touched by moving antenna 0..3 (t_A, r_A, t_B, r_B), and on which side.
_MOVES = (
    ((("A", "A"), "tx"), (("A", "B"), "tx")),
    ((("A", "A"), "rx"), (("B", "A"), "rx")),
    ((("B", "A"), "tx"), (("B", "B"), "tx")),
    ((("A", "B"), "rx"), (("B", "B"), "rx")),
)
# (tx antenna, rx antenna) slots of each link in the 8-vector
_LINK_SLOTS = {("A", "A"): (0, 1), ("A", "B"): (0, 3), ("B", "A"): (2, 1), ("B", "B"): (2, 3)}


class AntennaSweeper:
    """Fitness of every single-antenna move to a fixed candidate set.

    Candidate field responses are computed once; a sweep then recomputes
    only the two links the moving antenna belongs to.  Each sweep counts as
    len(candidates) evaluations on the parent evaluator.
    """

    def __init__(self, ev: LinkEvaluator, candidates: np.ndarray):
        self.ev = ev
        self.candidates = np.asarray(candidates, dtype=float)
        self._resp = {}
        for moves in _MOVES:
            for key, side in moves:
                dirs = ev._tx[key] if side == "tx" else ev._rx[key]
                self._resp[key, side] = np.exp(2j * np.pi * (self.candidates @ dirs))

    def __call__(self, u, antenna: int) -> np.ndarray:
        ev = self.ev
        u = np.asarray(u, dtype=float).reshape(8)
        pos = u.reshape(4, 2)
        gains = {}
        moving = dict(_MOVES[antenna])
        for key, (tx, rx) in _LINK_SLOTS.items():
            sigma = ev.chan.links[key].sigma
            g = np.exp(2j * np.pi * (pos[tx] @ ev._tx[key]))
            f = np.exp(2j * np.pi * (pos[rx] @ ev._rx[key]))
            side = moving.get(key)
            if side == "tx":
                h = (np.conj(f) @ sigma) @ self._resp[key, "tx"].T
            elif side == "rx":
                h = np.conj(self._resp[key, "rx"]) @ (sigma @ g)
            else:
                h = np.conj(f) @ sigma @ g
            gains[key] = np.abs(h) ** 2
        G = self.candidates.shape[0]
        ev.evaluations += G
        ev.ops += G * ev.chan.path_sum
        rate_a, rate_b = ev.rates_from_gains(gains)
        return np.broadcast_to(np.minimum(rate_a, rate_b), (G,))


def sinr(layout: AntennaLayout, chan: ChannelRealization, params: SystemParams) -> Tuple[float, float]:
    """(gamma_A, gamma_B) of the full-duplex link."""
    g = LinkEvaluator(chan, params).gains(layout)
    pt, n0 = params.transmit_power, params.noise_power
    gamma_a = sinr_from_gains(g[("B", "A")], g[("A", "A")], pt, n0)
    gamma_b = sinr_from_gains(g[("A", "B")], g[("B", "B")], pt, n0)
    return float(gamma_a[0]), float(gamma_b[0])


def ccfd_rate(layout: AntennaLayout, chan: ChannelRealization, params: SystemParams) -> RatePair:
    gamma_a, gamma_b = sinr(layout, chan, params)
    return RatePair(achievable_rate(gamma_a), achievable_rate(gamma_b))


def hd_rate(layout: AntennaLayout, chan: ChannelRealization, params: SystemParams) -> RatePair:
    """Half-duplex rates: half the time, no self-interference."""
    rate_a, rate_b = LinkEvaluator(chan, params, mode=HD).rates(layout)
    return RatePair(float(rate_a[0]), float(rate_b[0]))


def min_rate_fitness(layout: AntennaLayout, chan: ChannelRealization, params: SystemParams) -> float:
    """min(R_A, R_B) of the full-duplex link, the quantity being maximized."""
    rates = ccfd_rate(layout, chan, params)
    return min(rates.rate_a, rates.rate_b)
