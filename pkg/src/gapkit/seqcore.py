"""Core domain types: point sequences, intervals, partitions, atomic measures.

All types are immutable after construction and safe to share across threads.
Intervals are half-open (a, b] throughout, so partitions tile exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ParameterError",
    "Interval",
    "PointSequence",
    "Partition",
    "AtomicMeasure",
    "generate",
    "parse_sequence_spec",
    "fourier_eval",
    "load_points",
    "save_points",
]

# Hard cap used when evaluating exp(-i*t*x): beyond this the phase is
# meaningless in double precision.
PHASE_LIMIT = 1e9


class ParameterError(ValueError):
    """Invalid parameters for a generator or estimator."""


@dataclass(frozen=True)
class Interval:
    """Half-open interval (a, b] on the real line."""

    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ParameterError(f"interval needs a < b, got ({self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def dist0(self) -> float:
        """Distance from 0 to the closure of the interval."""
        if self.a <= 0.0 <= self.b:
            return 0.0
        return min(abs(self.a), abs(self.b))

    def contains(self, x: float) -> bool:
        return self.a < x <= self.b

    def __str__(self):
        return f"({self.a:g}, {self.b:g}]"


def _as_sorted_array(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 1:
        raise ParameterError("points must be one-dimensional")
    return arr


@dataclass(frozen=True)
class PointSequence:
    """Sorted finite truncation of a discrete real sequence with its window.

    The window [lo, hi] records which part of the (conceptually infinite)
    sequence this truncation covers; estimators report it alongside results.
    """

    points: np.ndarray
    window: tuple[float, float]
    label: str = ""

    def __post_init__(self):
        arr = _as_sorted_array(self.points)
        arr.setflags(write=False)
        object.__setattr__(self, "points", arr)
        lo, hi = float(self.window[0]), float(self.window[1])
        if not lo <= hi:
            raise ParameterError(f"window [{lo}, {hi}] is empty")
        object.__setattr__(self, "window", (lo, hi))
        if arr.size:
            if np.any(np.diff(arr) <= 0):
                raise ParameterError("points must be strictly increasing")
            if arr[0] < lo or arr[-1] > hi:
                raise ParameterError("all points must lie inside the window")

    def __len__(self):
        return int(self.points.size)

    @property
    def span(self) -> float:
        return self.window[1] - self.window[0]

    def count_in(self, lo: float, hi: float, include_left: bool = False) -> int:
        """Number of points in (lo, hi], or [lo, hi] with include_left."""
        side = "left" if include_left else "right"
        i = np.searchsorted(self.points, lo, side=side)
        j = np.searchsorted(self.points, hi, side="right")
        return int(j - i)

    def slice_in(self, lo: float, hi: float, include_left: bool = False) -> np.ndarray:
        side = "left" if include_left else "right"
        i = np.searchsorted(self.points, lo, side=side)
        j = np.searchsorted(self.points, hi, side="right")
        return self.points[i:j]

    def restrict(self, lo: float, hi: float) -> "PointSequence":
        """Sub-sequence on the intersection of the window with [lo, hi]."""
        wlo, whi = self.window
        lo, hi = max(lo, wlo), min(hi, whi)
        keep = self.points[(self.points >= lo) & (self.points <= hi)]
        return PointSequence(keep, (lo, hi), self.label)

    def translate(self, c: float) -> "PointSequence":
        lo, hi = self.window
        return PointSequence(self.points + c, (lo + c, hi + c), self.label)

    def scale(self, t: float) -> "PointSequence":
        if t <= 0:
            raise ParameterError("scale factor must be positive")
        lo, hi = self.window
        return PointSequence(self.points * t, (lo * t, hi * t), self.label)

    @classmethod
    def from_points(cls, points, label: str = "") -> "PointSequence":
        arr = _as_sorted_array(points)
        if arr.size == 0:
            return cls(arr, (0.0, 0.0), label)
        return cls(arr, (float(arr[0]), float(arr[-1])), label)


@dataclass(frozen=True)
class Partition:
    """Ordered breakpoints ... < a_-1 < a_0 = 0 < a_1 < ... defining (a_n, a_(n+1)].

    Breakpoints must contain 0 exactly; interval indices follow the position
    relative to the zero breakpoint, so interval n >= 0 is (a_n, a_(n+1)].
    """

    breakpoints: np.ndarray

    def __post_init__(self):
        arr = _as_sorted_array(self.breakpoints)
        arr.setflags(write=False)
        object.__setattr__(self, "breakpoints", arr)
        if arr.size < 2:
            raise ParameterError("partition needs at least two breakpoints")
        if np.any(np.diff(arr) <= 0):
            raise ParameterError("breakpoints must be strictly increasing")
        if not np.any(arr == 0.0):
            raise ParameterError("0 must be a breakpoint")

    @property
    def zero_index(self) -> int:
        return int(np.searchsorted(self.breakpoints, 0.0))

    def intervals(self) -> list[tuple[int, Interval]]:
        """(index, interval) pairs with the paper's two-sided indexing."""
        z = self.zero_index
        out = []
        for i in range(len(self.breakpoints) - 1):
            iv = Interval(float(self.breakpoints[i]), float(self.breakpoints[i + 1]))
            out.append((i - z, iv))
        return out

    def cover(self) -> tuple[float, float]:
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    def covers_window(self, window: tuple[float, float]) -> bool:
        lo, hi = self.cover()
        return lo <= window[0] and window[1] <= hi

    def reflect(self) -> "Partition":
        return Partition(-self.breakpoints[::-1])


@dataclass(frozen=True)
class AtomicMeasure:
    """Finite atomic measure sum of w_n * delta_(x_n) with complex weights."""

    positions: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        pos = _as_sorted_array(self.positions)
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        if self.weights is None:
            w = np.ones(pos.size, dtype=complex)
        else:
            w = np.asarray(self.weights, dtype=complex).copy()
        if w.shape != pos.shape:
            raise ParameterError("weights must match positions")
        if pos.size and np.any(np.diff(pos) <= 0):
            raise ParameterError("atom positions must be strictly increasing")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def total_variation(self) -> float:
        return float(np.sum(np.abs(self.weights)))

    def fourier(self, t_grid) -> np.ndarray:
        return fourier_eval(self, t_grid)


def fourier_eval(mu: AtomicMeasure, t_grid) -> np.ndarray:
    """Fourier transform of an atomic measure: sum of w_n * exp(-i*t*x_n).

    Rejects evaluations where |t * x| exceeds the double-precision phase
    budget (1e9 radians).
    """
    t = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if mu.positions.size == 0:
        return np.zeros(t.shape, dtype=complex)
    max_phase = np.max(np.abs(t)) * max(1.0, np.max(np.abs(mu.positions)))
    if max_phase > PHASE_LIMIT:
        raise ParameterError(f"|t*x| = {max_phase:.3g} exceeds phase limit {PHASE_LIMIT:g}")
    phases = np.exp(-1j * np.outer(t, mu.positions))
    return phases @ mu.weights


# ---------------------------------------------------------------------------
# Sequence generators
# ---------------------------------------------------------------------------

def _gen_lattice(h: float, lo: float, hi: float) -> np.ndarray:
    if h <= 0:
        raise ParameterError(f"lattice step must be positive, got {h}")
    kmin = int(np.ceil(lo / h - 1e-12))
    kmax = int(np.floor(hi / h + 1e-12))
    if kmax < kmin:
        return np.empty(0)
    return np.arange(kmin, kmax + 1, dtype=float) * h


def _gen_perturbed(h: float, jitter: float, lo: float, hi: float, rng) -> np.ndarray:
    if h <= 0:
        raise ParameterError(f"lattice step must be positive, got {h}")
    if not 0 <= jitter < h / 2:
        raise ParameterError(f"jitter must lie in [0, h/2), got {jitter}")
    base = _gen_lattice(h, lo + jitter, hi - jitter)
    if base.size == 0:
        return base
    return base + rng.uniform(-jitter, jitter, size=base.size)


def _gen_lacunary(q: float, lo: float, hi: float) -> np.ndarray:
    if q <= 1:
        raise ParameterError(f"lacunary ratio must exceed 1, got {q}")
    if hi <= 0:
        return np.empty(0)
    pts = []
    # walk down from 1 toward lo, then up from q; keeps powers exact for
    # integer ratios instead of round-tripping through logs
    x = 1.0
    while x >= max(lo, 1e-300):
        if lo <= x <= hi:
            pts.append(x)
        x /= q
    x = q
    while x <= hi:
        if x >= lo:
            pts.append(x)
        x *= q
    return np.sort(np.array(pts, dtype=float))


def _gen_poisson(rate: float, lo: float, hi: float, rng) -> np.ndarray:
    if rate <= 0:
        raise ParameterError(f"poisson rate must be positive, got {rate}")
    pts = []
    x = lo + rng.exponential(1.0 / rate)
    while x <= hi:
        pts.append(x)
        x += rng.exponential(1.0 / rate)
    return np.array(pts, dtype=float)


def load_points(path) -> np.ndarray:
    """Read the standard sequence file: one real per line, '#' comments."""
    vals = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            vals.append(float(line))
    arr = np.array(vals, dtype=float)
    if arr.size and np.any(np.diff(arr) <= 0):
        raise ParameterError(f"{path}: points must be strictly increasing")
    return arr


def save_points(path, points, header: str = "") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for x in np.asarray(points, dtype=float):
            fh.write(f"{float(x)!r}\n")


_SPEC_RE = re.compile(r"^([a-z-]+)(?::(.*))?$")


def parse_sequence_spec(text: str):
    """Parse a sequence-law descriptor like 'lattice:1' or 'perturbed:1,0.3'.

    Returns (kind, params) where params is a tuple of floats, or
    ('explicit', path) for file-backed sequences.
    """
    m = _SPEC_RE.match(text.strip())
    if m and m.group(1) in ("lattice", "perturbed", "perturbed-lattice", "lacunary", "poisson"):
        kind = "perturbed" if m.group(1).startswith("perturbed") else m.group(1)
        raw = m.group(2)
        if raw is None or raw == "":
            raise ParameterError(f"spec '{text}' is missing parameters")
        params = tuple(float(p) for p in raw.split(","))
        return kind, params
    if text.startswith("file:"):
        return "explicit", text[5:]
    # bare path fallback
    return "explicit", text


def generate(spec, window: tuple[float, float], seed=None, label=None) -> PointSequence:
    """Materialize a sequence law on a window.

    spec is either a descriptor string (see parse_sequence_spec) or a
    (kind, params) pair. Deterministic given (spec, window, seed).
    """
    if isinstance(spec, str):
        kind, params = parse_sequence_spec(spec)
    else:
        kind, params = spec
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ParameterError(f"window [{lo}, {hi}] is empty")
    rng = np.random.default_rng(seed)
    if kind == "lattice":
        (h,) = params
        pts = _gen_lattice(h, lo, hi)
    elif kind == "perturbed":
        h, jitter = params
        pts = _gen_perturbed(h, jitter, lo, hi, rng)
    elif kind == "lacunary":
        (q,) = params
        pts = _gen_lacunary(q, lo, hi)
    elif kind == "poisson":
        (rate,) = params
        pts = _gen_poisson(rate, lo, hi, rng)
    elif kind == "explicit":
        pts = load_points(params)
        keep = (pts >= lo) & (pts <= hi)
        pts = pts[keep]
    else:
        raise ParameterError(f"unknown sequence law '{kind}'")
    if label is None:
        label = spec if isinstance(spec, str) else f"{kind}{params}"
    return PointSequence(pts, (lo, hi), label=label)
