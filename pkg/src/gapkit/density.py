"""Interior density estimators d1-d4 and the Beurling-Malliavin density.

All estimators work at truncation scale, return witnesses, and re-check
every witness before reporting. Bisection runs on a fixed grid (default
resolution 1e-3) and assumes feasibility is monotone in the target value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .partitions import greedy_density_partition, shortness
from .seqcore import ParameterError, Partition, PointSequence

__all__ = [
    "DensityEstimate",
    "density_lower",
    "density_d3",
    "d3_residual_curve",
    "density_d3_estimate",
    "density_upper_d4",
    "d4_complement_estimate",
    "bm_density",
    "counting_residual",
    "long_family_search",
    "verify_partition_witness",
    "verify_family_witness",
    "density_estimate",
]

GRID_RESOLUTION = 1e-3
# Divergence threshold for "this family is long": accumulated sum of
# |I|^2/(1+dist^2) terms with non-decaying behaviour.
REFUTE_SUM = 10.0
# Flatness threshold for the d3 residual curve: fitted slope of the
# residual against log window size.
D3_FLAT_SLOPE = 0.03


@dataclass(frozen=True)
class DensityEstimate:
    value: float
    method: str
    window: tuple[float, float]
    witness: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "window": list(self.window),
            "witness": self.witness,
        }


def _default_a_max(seq: PointSequence) -> float:
    """Bisection ceiling: 1.5x the densest decile of local spacings, so a
    one-sided or clustered sequence is not capped by an oversized window.
    """
    if len(seq) < 2 or seq.span <= 0:
        return 1.0
    gaps = np.diff(seq.points)
    dense = float(np.percentile(gaps, 10))
    if dense <= 0:
        dense = float(np.min(gaps[gaps > 0])) if np.any(gaps > 0) else 1.0
    return 1.5 / dense + 10 * GRID_RESOLUTION


def _grid_max_feasible(feasible, a_max: float, resolution: float) -> float:
    """Largest grid multiple of `resolution` in (0, a_max] that passes.

    Bisection on grid indices; assumes the predicate is monotone (feasible
    below, infeasible above). Returns 0.0 when nothing passes.
    """
    kmax = max(1, int(round(a_max / resolution)))
    lo, hi = 0, kmax + 1  # predicate(lo) true by convention, predicate(hi) false
    if feasible(kmax * resolution):
        return kmax * resolution
    hi = kmax
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mid == 0:
            break
        if feasible(mid * resolution):
            lo = mid
        else:
            hi = mid
    return lo * resolution


# ---------------------------------------------------------------------------
# d1 / d2: short partitions from the greedy construction
# ---------------------------------------------------------------------------

def verify_partition_witness(seq: PointSequence, a: float, part: Partition,
                             monotone_required: bool) -> bool:
    """Re-check a witness partition: density condition and shortness.

    Counting uses the outward-facing half-open convention that the greedy
    construction itself uses: intervals right of 0 own their right endpoint,
    intervals left of 0 own their left endpoint (the two agree up to one
    point at the origin; see the module notes).
    """
    bks = part.breakpoints
    if len(bks) < 4:
        return False
    z = part.zero_index
    for i in range(len(bks) - 1):
        lo, hi = bks[i], bks[i + 1]
        if i >= z:
            count = seq.count_in(lo, hi)
        else:
            count = seq.count_in(lo, hi, include_left=True) - seq.count_in(hi, hi, include_left=True)
        if count < a * (hi - lo) - 1e-9:
            return False
    if monotone_required:
        lengths = np.diff(bks)
        right = lengths[z:]
        left = lengths[:z][::-1]
        if np.any(np.diff(right) < -1e-12) or np.any(np.diff(left) < -1e-12):
            return False
    return shortness(part).verdict == "short"


def density_lower(seq: PointSequence, method: str = "d1",
                  resolution: float = GRID_RESOLUTION) -> DensityEstimate:
    """Lower (interior) density via greedy short partitions.

    d1 demands a monotone partition, d2 drops the monotonicity constraint.
    Feasibility at level a = greedy construction succeeds and its partition
    is short; the returned witness partition is re-verified.
    """
    if method not in ("d1", "d2"):
        raise ParameterError("method must be 'd1' or 'd2'")
    monotone = method == "d1"
    if len(seq) == 0:
        return DensityEstimate(0.0, method, seq.window)
    witness = {}

    def feasible(a: float) -> bool:
        res = greedy_density_partition(seq, a, monotone=monotone)
        if not res.ok or len(res.partition.breakpoints) < 4:
            return False
        return shortness(res.partition).verdict == "short"

    value = _grid_max_feasible(feasible, _default_a_max(seq), resolution)
    if value > 0:
        res = greedy_density_partition(seq, value, monotone=monotone)
        ok = res.ok and verify_partition_witness(seq, value, res.partition, monotone)
        if not ok:   # witness must reproduce the claim
            value = 0.0
        else:
            witness = {
                "breakpoints": [float(b) for b in res.partition.breakpoints],
                "counts": list(res.counts),
                "verified": True,
            }
    return DensityEstimate(value, method, seq.window, witness)


# ---------------------------------------------------------------------------
# d3: counting-function residual
# ---------------------------------------------------------------------------

def _mismatch_integral(c: float, a: float, u: float, v: float) -> float:
    """Exact integral of |c - a*x| / (1 + x^2) over [u, v]."""

    def F(x):
        return c * math.atan(x) - 0.5 * a * math.log1p(x * x)

    if a == 0.0:
        return abs(c) * (math.atan(v) - math.atan(u))
    xs = c / a
    if u < xs < v:
        return abs(F(xs) - F(u)) + abs(F(v) - F(xs))
    return abs(F(v) - F(u))


def _mismatch_integrals(c: np.ndarray, a: float,
                        u: np.ndarray, v: np.ndarray) -> float:
    """Vectorized sum of the exact segment integrals above."""

    def F(x, cc):
        return cc * np.arctan(x) - 0.5 * a * np.log1p(x * x)

    xs = c / a
    straddle = (u < xs) & (xs < v)
    fu, fv = F(u, c), F(v, c)
    plain = np.abs(fv - fu)
    if np.any(straddle):
        fxs = F(xs[straddle], c[straddle])
        plain[straddle] = (np.abs(fxs - fu[straddle])
                           + np.abs(fv[straddle] - fxs))
    return float(np.sum(plain))


def _greedy_match_side(points: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Match each target to the nearest not-yet-used point, in order.

    Both arrays ascending; points may be skipped (subsequence selection)
    but are used at most once. Returns the matched points.
    """
    matched = []
    i = 0
    n = points.size
    for t in targets:
        if i >= n:
            break
        while i + 1 < n and abs(points[i + 1] - t) <= abs(points[i] - t):
            i += 1
        matched.append(points[i])
        i += 1
    return np.array(matched)


def match_to_ideal_grid(seq: PointSequence, a: float) -> np.ndarray:
    """Greedy subsequence tracking the arithmetic progression of slope a."""
    lo, hi = seq.window
    pts = seq.points
    pos = pts[pts > 0]
    neg = -pts[pts < 0][::-1]
    kmax_r = max(0, int(math.floor(a * hi))) if hi > 0 else 0
    kmax_l = max(0, int(math.floor(a * (-lo)))) if lo < 0 else 0
    right = _greedy_match_side(pos, (np.arange(1, kmax_r + 1)) / a)
    left = _greedy_match_side(neg, (np.arange(1, kmax_l + 1)) / a)
    return np.sort(np.concatenate([-left, right]))


def counting_residual(matched: np.ndarray, a: float,
                      window: tuple[float, float]) -> float:
    """Exact Poisson-weighted L1 mismatch between the two-sided counting
    function of the matched points (anchored n(0) = 0) and the line a*x.
    """
    lo, hi = window
    inner = matched[(matched > lo) & (matched < hi)]
    zero = [0.0] if lo < 0.0 < hi else []
    events = np.unique(np.concatenate([[lo], inner, zero, [hi]]))
    if events.size < 2:
        return 0.0
    u, v = events[:-1], events[1:]
    mids = 0.5 * (u + v)
    # counting value on each open segment between events, anchored n(0) = 0
    zero_before = np.searchsorted(matched, 0.0, side="right")
    c = (np.searchsorted(matched, mids, side="right") - zero_before).astype(float)
    return _mismatch_integrals(c, a, u, v)


def density_d3(seq: PointSequence, a: float) -> float:
    """Truncation residual of the d3 condition at slope a.

    Small and flattening with window size indicates d3 >= a; growth of the
    residual in the window size indicates a genuine slope mismatch.
    """
    if a <= 0:
        raise ParameterError("slope a must be positive")
    matched = match_to_ideal_grid(seq, a) if len(seq) else np.empty(0)
    return counting_residual(matched, a, seq.window)


def d3_residual_curve(seq: PointSequence, a: float,
                      fractions=(0.25, 0.5, 0.75, 1.0)):
    """Residuals on nested sub-windows (one matching on the full window)."""
    matched = match_to_ideal_grid(seq, a) if len(seq) else np.empty(0)
    lo, hi = seq.window
    out = []
    for f in fractions:
        out.append((f, counting_residual(matched, a, (lo * f, hi * f))))
    return out


def _d3_flat(seq: PointSequence, a: float) -> bool:
    curve = d3_residual_curve(seq, a)
    sizes = np.array([max(abs(seq.window[0] * f), abs(seq.window[1] * f), 1.0)
                      for f, _ in curve])
    resid = np.array([r for _, r in curve])
    ls = np.log(sizes)
    ls = ls - ls.mean()
    denom = float(np.sum(ls * ls))
    slope = float(np.sum(ls * (resid - resid.mean())) / denom) if denom else 0.0
    return slope <= D3_FLAT_SLOPE


def density_d3_estimate(seq: PointSequence,
                        resolution: float = GRID_RESOLUTION) -> DensityEstimate:
    """Largest slope whose residual curve stays flat in the window size."""
    if len(seq) == 0:
        return DensityEstimate(0.0, "d3", seq.window)
    value = _grid_max_feasible(lambda a: _d3_flat(seq, a), _default_a_max(seq), resolution)
    witness = {}
    if value > 0:
        witness = {"residual_curve": [[f, r] for f, r in d3_residual_curve(seq, value)]}
    return DensityEstimate(value, "d3", seq.window, witness)


# ---------------------------------------------------------------------------
# Long-family searches: d4 refutation and the Beurling-Malliavin density
# ---------------------------------------------------------------------------

def _counts_open(pts: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return (np.searchsorted(pts, v, side="left")
            - np.searchsorted(pts, u, side="right"))


def _counts_halfopen(pts: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return (np.searchsorted(pts, v, side="right")
            - np.searchsorted(pts, u, side="right"))


def _qualifies(pts, u, v, a, mode) -> bool:
    uu, vv = np.atleast_1d(float(u)), np.atleast_1d(float(v))
    if mode == "below":
        return bool(_counts_open(pts, uu, vv)[0] < a * (v - u))
    return bool(_counts_halfopen(pts, uu, vv)[0] >= a * (v - u))


def _terms_of(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    dist = np.where(u >= 0, u, np.where(v <= 0, -v, 0.0))
    dist = np.abs(dist)
    return (v - u) ** 2 / (1.0 + dist ** 2)


def _term(u: float, v: float) -> float:
    return float(_terms_of(np.array([u]), np.array([v]))[0])


# Wide sparse intervals carry at most this many interior points; longer
# low-density stretches are captured by the dyadic block candidates.
MAX_SPARSE_SPAN = 64


def _sparse_candidates(pts: np.ndarray, a: float):
    """Endpoint-on-point intervals with interior count < a * length: every
    consecutive gap, plus the best widening of each start up to
    MAX_SPARSE_SPAN interior points (vectorized per width offset).
    """
    n = pts.size
    u_list = [pts[:-1]]
    v_list = [pts[1:]]
    best_term = np.full(n - 1, -1.0)
    best_v = pts[1:].copy()
    for w in range(2, min(MAX_SPARSE_SPAN, n - 1) + 1):
        u = pts[: n - w]
        v = pts[w:]
        ok = (w - 1) < a * (v - u)
        t = np.where(ok, _terms_of(u, v), -np.inf)
        upd = t[: n - w] > best_term[: n - w]
        best_term[: n - w][upd] = t[upd]
        best_v[: n - w][upd] = v[upd]
    widened = best_term > 0
    u_list.append(pts[:-1][widened])
    v_list.append(best_v[widened])
    return np.concatenate(u_list), np.concatenate(v_list)


def _block_candidates(pts: np.ndarray):
    """Dyadic-style blocks with endpoints snapped to sequence points.

    Blocks clipped by the window edge to less than 1.5x their anchor are
    dropped: such runts get small shortness terms and only blur the
    long/short classification of the assembled family.
    """
    us, vs = [], []
    for sign in (1.0, -1.0):
        side = np.sort(pts[pts * sign > 0] * sign)
        if side.size < 2:
            continue
        c = max(side[0], 1e-9)
        top = side[-1]
        while c < top:
            i = np.searchsorted(side, c, side="right") - 1
            j = np.searchsorted(side, 2.0 * c, side="right") - 1
            if 0 <= i < j and side[j] >= 1.5 * c:
                u, v = side[i] * sign, side[j] * sign
                us.append(min(u, v))
                vs.append(max(u, v))
            c *= math.sqrt(2.0)
    return np.array(us), np.array(vs)


def _assemble_family(pts: np.ndarray, u: np.ndarray, v: np.ndarray,
                     a: float, mode: str):
    """Greedy disjoint accumulation of qualifying intervals.

    Terms are capped at 1 for the pick order and ties prefer the shorter
    interval: divergence evidence is many modest terms across scales, and
    one window-spanning giant must not crowd out a whole gap family.
    """
    import bisect

    if u.size == 0:
        return []
    keep = (v > u) & ~((u < 0.0) & (v > 0.0))  # origin-straddlers carry no tail evidence
    if mode == "below":
        keep &= _counts_open(pts, u, v) < a * (v - u)
    else:
        keep &= _counts_halfopen(pts, u, v) >= a * (v - u)
    u, v = u[keep], v[keep]
    order = np.lexsort((v - u, -np.minimum(_terms_of(u, v), 1.0)))
    starts: list[float] = []
    ends: list[float] = []
    for idx in order:
        uu, vv = float(u[idx]), float(v[idx])
        pos = bisect.bisect_right(starts, uu)
        if pos > 0 and ends[pos - 1] > uu:
            continue
        if pos < len(starts) and starts[pos] < vv:
            continue
        starts.insert(pos, uu)
        ends.insert(pos, vv)
    return list(zip(starts, ends))


# Evidence rule for "this disjoint family is long" at truncation scale:
# keep only members whose shortness-type term clears an absolute floor,
# cap each term (a genuinely long family, like dyadic blocks at a density
# deficit, carries terms of order 1 each; one near-origin giant must not
# buy divergence on its own), and demand enough capped mass plus reach
# comparable to the window itself. A truncation cannot certify divergence;
# these are the declared thresholds.
LONG_TERM_FLOOR = 0.2
LONG_TERM_CAP = 2.0
LONG_MIN_COUNT = 5
LONG_REACH_FRACTION = 0.125


def _evidence_subfamily(family, extent: float):
    """(long, evidence, total, terms): the non-decaying core of a family."""
    if not family:
        return False, [], 0.0, np.zeros(0)
    u = np.array([f[0] for f in family])
    v = np.array([f[1] for f in family])
    terms = _terms_of(u, v)
    keep = terms >= LONG_TERM_FLOOR
    if not np.any(keep):
        return False, [], 0.0, np.zeros(0)
    u, v, terms = u[keep], v[keep], terms[keep]
    dists = np.where(u >= 0, u, np.where(v <= 0, -v, 0.0))
    dists = np.abs(dists)
    capped = float(np.sum(np.minimum(terms, LONG_TERM_CAP)))
    long = (terms.size >= LONG_MIN_COUNT
            and capped >= REFUTE_SUM
            and float(np.max(dists)) >= LONG_REACH_FRACTION * extent)
    order = np.argsort(dists)
    evidence = [(float(u[i]), float(v[i])) for i in order]
    return long, evidence, capped, terms[order]


def long_family_search(seq: PointSequence, a: float, mode: str):
    """Search for a long disjoint family; mode 'below' wants count < a|I|
    (d4-style refutation), mode 'above' wants count >= a|I| (BM-style).

    Returns (found, evidence family, total, terms). The family is
    re-checkable by verify_family_witness.
    """
    pts = seq.points
    if pts.size < 2:
        return False, [], 0.0, np.zeros(0)
    bu, bv = _block_candidates(pts)
    if mode == "below":
        su, sv = _sparse_candidates(pts, a)
        bu, bv = np.concatenate([bu, su]), np.concatenate([bv, sv])
    family = _assemble_family(pts, bu, bv, a, mode)
    lo, hi = seq.window
    extent = max(abs(lo), abs(hi))
    return _evidence_subfamily(family, extent)


def verify_family_witness(seq: PointSequence, a: float, family, mode: str) -> bool:
    """Disjointness, the per-interval count condition, and longness."""
    fam = sorted(family)
    for i in range(len(fam) - 1):
        if fam[i][1] > fam[i + 1][0]:
            return False
    if not all(_qualifies(seq.points, u, v, a, mode) for u, v in fam):
        return False
    lo, hi = seq.window
    found, _, _, _ = _evidence_subfamily(fam, max(abs(lo), abs(hi)))
    return found


def density_upper_d4(seq: PointSequence, a: float):
    """Try to refute density >= a with a long family of sparse intervals.

    Returns (refuted, witness dict). refuted=True certifies (at truncation
    scale) that the sequence fails the d4 density at level a.
    """
    if a <= 0:
        raise ParameterError("level a must be positive")
    found, family, total, terms = long_family_search(seq, a, "below")
    if found and not verify_family_witness(seq, a, family, "below"):
        found = False
    witness = {
        "intervals": [[u, v] for u, v in family],
        "sum": total,
        "terms": [float(t) for t in terms],
    }
    return found, witness


def d4_complement_estimate(seq: PointSequence,
                           resolution: float = GRID_RESOLUTION) -> DensityEstimate:
    """Infimum of refuted levels minus one grid step (the d4 density)."""
    if len(seq) == 0:
        return DensityEstimate(0.0, "d4", seq.window)
    a_max = _default_a_max(seq)

    def not_refuted(a: float) -> bool:
        refuted, _ = density_upper_d4(seq, a)
        return not refuted

    value = _grid_max_feasible(not_refuted, a_max, resolution)
    refuted, witness = density_upper_d4(seq, value + resolution)
    if not refuted:
        witness = {"note": f"no refutation found below {a_max:.6g}"}
    return DensityEstimate(value, "d4", seq.window, witness)


def bm_density(seq: PointSequence,
               resolution: float = GRID_RESOLUTION) -> DensityEstimate:
    """Beurling-Malliavin density: largest d with a long family carrying
    at least d points per unit length in every member interval.
    """
    if len(seq) == 0:
        return DensityEstimate(0.0, "bm", seq.window)

    def feasible(d: float) -> bool:
        found, family, _, _ = long_family_search(seq, d, "above")
        return found and verify_family_witness(seq, d, family, "above")

    value = _grid_max_feasible(feasible, _default_a_max(seq), resolution)
    witness = {}
    if value > 0:
        _, family, total, terms = long_family_search(seq, value, "above")
        witness = {
            "intervals": [[u, v] for u, v in family],
            "sum": total,
            "verified": verify_family_witness(seq, value, family, "above"),
        }
    return DensityEstimate(value, "bm", seq.window, witness)


def density_estimate(seq: PointSequence, method: str,
                     resolution: float = GRID_RESOLUTION) -> DensityEstimate:
    """Dispatch on method in {d1, d2, d3, d4, bm}."""
    if method in ("d1", "d2"):
        return density_lower(seq, method, resolution)
    if method == "d3":
        return density_d3_estimate(seq, resolution)
    if method == "d4":
        return d4_complement_estimate(seq, resolution)
    if method == "bm":
        return bm_density(seq, resolution)
    raise ParameterError(f"unknown density method '{method}'")
