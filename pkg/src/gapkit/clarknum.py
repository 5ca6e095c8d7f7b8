"""Residue weights of the Krein-shift inner function for a gap sequence.

For breakpoints {a_n} with bounded gaps, the inner function built from the
half-half step function u = 1_E - 1/2 (E the union of left halves of the
gaps) has a Clark measure with atoms beta_n at the gap midpoints b_n. Each
atom factors as beta_n = (delta_n / 2) * A_n where the off-interval sum
behind A_n telescopes into elementary logarithms per gap: the interval
(a_j, a_(j+1)) contributes

    (1/2) * log[ (b_j - b_n)^2 / (|a_j - b_n| * |a_(j+1) - b_n|) ],

a nonnegative quantity, so A_n <= 1 with the global constant fixed to 1.
The two-sided comparison delta_n^2 <~ beta_n <~ delta_n is what the tests
exercise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .seqcore import ParameterError

__all__ = [
    "ResidueRecord",
    "KreinInner",
    "residue_weights",
    "krein_inner",
    "atom_sum_at",
    "tail_estimate",
    "ThetaProfile",
    "theta_derivative_profile",
]


@dataclass(frozen=True)
class ResidueRecord:
    n: int
    a_n: float
    b_n: float
    delta_n: float
    atom_sum: float
    amplitude: float       # A_n = exp(-atom_sum), in (0, 1]
    beta_n: float
    tail_bound: float


@dataclass(frozen=True)
class KreinInner:
    """Breakpoint/midpoint data with residue weights on a report window."""

    breakpoints: np.ndarray
    midpoints: np.ndarray
    deltas: np.ndarray
    betas: np.ndarray
    tail_bounds: np.ndarray
    radius: float

    def records(self):
        return [
            ResidueRecord(n, float(self.breakpoints[n]), float(self.midpoints[n]),
                          float(self.deltas[n]),
                          -math.log(2.0 * self.betas[n] / self.deltas[n]),
                          2.0 * self.betas[n] / self.deltas[n],
                          float(self.betas[n]), float(self.tail_bounds[n]))
            for n in range(self.midpoints.size)
        ]


def _validate(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.size < 2:
        raise ParameterError("need at least two breakpoints")
    if np.any(np.diff(a) <= 0):
        raise ParameterError("breakpoints must be strictly increasing")
    return a


def atom_sum_at(a: np.ndarray, n: int) -> float:
    """Sum over j != n of the closed-form gap contributions at b_n."""
    b = 0.5 * (a[:-1] + a[1:])
    bn = b[n]
    d = b - bn
    e1 = a[:-1] - bn
    e2 = a[1:] - bn
    mask = np.ones(b.size, dtype=bool)
    mask[n] = False
    terms = (np.log(np.abs(d[mask]))
             - 0.5 * np.log(np.abs(e1[mask]))
             - 0.5 * np.log(np.abs(e2[mask])))
    return float(np.sum(terms))


def _outer_gap_scale(a: np.ndarray):
    """Mean gap over the outer tenth on each side (at least one gap)."""
    gaps = np.diff(a)
    k = max(1, gaps.size // 10)
    return float(np.mean(gaps[:k])), float(np.mean(gaps[-k:]))


def tail_estimate(a: np.ndarray, bn: float) -> float:
    """Integral extrapolation of the atom sum beyond the data, assuming the
    boundary gap pattern persists: each far gap contributes about
    delta^2 / (8 d^2) and the gaps arrive at rate 1/delta.
    """
    gl, gr = _outer_gap_scale(a)
    d_left = max(bn - a[0], gl)
    d_right = max(a[-1] - bn, gr)
    return gl / (8.0 * d_left) + gr / (8.0 * d_right)


def residue_weights(a, R: float | None = None, report_width: float | None = None,
                    tail_mode: str = "none"):
    """Residue weights beta_n = (delta_n / 2) * exp(-atom sum) per midpoint.

    R is the data radius used in the per-midpoint tail bound (defaults to
    the span of the provided breakpoints). report_width restricts which
    midpoints are reported (|b_n| <= report_width); edge midpoints see a
    lopsided atom set, so reports should stay well inside the data.
    tail_mode 'persistent' adds the integral extrapolation of the missing
    tail to the atom sum; 'none' uses the truncated sum only (right for
    windows that genuinely end, like an isolated pair of breakpoints).

    Returns a list of ResidueRecord. The undetermined global constant of
    the residue formula is fixed to 1, so only ratios are meaningful.
    """
    if tail_mode not in ("none", "persistent"):
        raise ParameterError("tail_mode must be 'none' or 'persistent'")
    a = _validate(a)
    if R is not None and (a[0] < -R or a[-1] > R):
        raise ParameterError("breakpoints fall outside the declared radius")
    b = 0.5 * (a[:-1] + a[1:])
    deltas = np.diff(a)
    if report_width is None:
        idx = np.arange(b.size)
    else:
        idx = np.nonzero(np.abs(b) <= report_width)[0]
    gl, gr = _outer_gap_scale(a)
    out = []
    for n in idx:
        s = atom_sum_at(a, int(n))
        est = tail_estimate(a, float(b[n])) if b.size > 1 else 0.0
        if tail_mode == "persistent":
            s += est
            d_edge = max(min(b[n] - a[0], a[-1] - b[n]), max(gl, gr))
            bound = est * (0.1 + 4.0 * max(gl, gr) / d_edge)
        else:
            bound = 2.0 * est
        amp = math.exp(-s)
        out.append(ResidueRecord(int(n), float(a[n]), float(b[n]), float(deltas[n]),
                                 s, amp, float(0.5 * deltas[n] * amp), bound))
    return out


def krein_inner(a, R: float | None = None, report_width: float | None = None,
                tail_mode: str = "none") -> KreinInner:
    a = _validate(a)
    recs = residue_weights(a, R, report_width, tail_mode)
    if R is None:
        R = float(max(abs(a[0]), abs(a[-1])))
    return KreinInner(
        breakpoints=np.array([r.a_n for r in recs]),
        midpoints=np.array([r.b_n for r in recs]),
        deltas=np.array([r.delta_n for r in recs]),
        betas=np.array([r.beta_n for r in recs]),
        tail_bounds=np.array([r.tail_bound for r in recs]),
        radius=R,
    )


@dataclass(frozen=True)
class ThetaProfile:
    x: np.ndarray
    estimate: np.ndarray
    tail_bound: float

    def pairs(self):
        return list(zip(self.x.tolist(), self.estimate.tolist()))


def theta_derivative_profile(a, x_grid, R: float | None = None,
                             exclude_nearest: bool = False) -> ThetaProfile:
    """Midpoint-branch profile sum of beta_n / (x - b_n)^2 on a grid.

    Grid points sitting exactly on a midpoint are nudged by 1e-9. With
    exclude_nearest the single closest midpoint term is dropped, exposing
    the regular part of the sum (the quantity that is flat across midpoints
    for translation-invariant breakpoints).
    """
    a = _validate(a)
    recs = residue_weights(a, R)
    b = np.array([r.b_n for r in recs])
    betas = np.array([r.beta_n for r in recs])
    x = np.atleast_1d(np.asarray(x_grid, dtype=float)).copy()
    est = np.empty(x.size)
    for i, xi in enumerate(x):
        d = xi - b
        hit = np.abs(d) < 1e-12
        if np.any(hit):
            xi = xi + 1e-9
            x[i] = xi
            d = xi - b
        terms = betas / (d * d)
        if exclude_nearest and terms.size > 1:
            terms = np.delete(terms, int(np.argmin(np.abs(d))))
        est[i] = float(np.sum(terms))
    # beyond the data the same integral comparison bounds the missing mass:
    # beta <= delta/2 and atoms arrive at rate 1/delta
    gl, gr = _outer_gap_scale(a)
    span_l = max(float(np.min(np.abs(x - a[0]))), gl)
    span_r = max(float(np.min(np.abs(a[-1] - x))), gr)
    tail = 0.5 / span_l + 0.5 / span_r
    return ThetaProfile(x, est, tail)
