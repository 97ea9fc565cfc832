"""Spectral/energy efficiency objectives and the weighted-sum power optimizer.

SE is the Shannon sum rate ``sum_k log2(1 + beta_k)`` and EE divides it by the
total drawn power (transmit plus circuit). The scalarised objective
``theta * SE + (1 - theta) * EE`` is maximised over ``[0, p_max]^K`` by cyclic
coordinate ascent, each coordinate solved with golden-section search.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonConvergenceWarning

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_TOL_W = 1e-6
DEFAULT_MAX_SWEEPS = 100


def se_user(beta):
    if beta < 0:
        raise DomainError(f"SINR must be >= 0, got {beta}")
    return math.log2(1.0 + beta)


def se_total(betas):
    b = np.asarray(betas, dtype=float)
    if np.any(b < 0):
        raise DomainError("every SINR must be >= 0")
    return float(np.sum(np.log2(1.0 + b)))


def ee(se_total_value, alloc: PowerAllocation):
    total = alloc.total_power_w
    if total <= 0:
        raise DomainError("total power must be > 0")
    return se_total_value / total


def sop(se, ee_value, theta):
    if not 0.0 <= theta <= 1.0:
        raise DomainError(f"theta must lie in [0, 1], got {theta}")
    return theta * se + (1.0 - theta) * ee_value


def mop_dominates(a, b):
    """True iff ``a = (se, ee)`` is at least as good as ``b`` in both and strictly better in one."""
    return a[0] >= b[0] and a[1] >= b[1] and (a[0] > b[0] or a[1] > b[1])


@dataclass(frozen=True)
class PowerAllocation:
    powers_w: tuple
    circuit_powers_w: tuple
    p_max_w: float

    def __post_init__(self):
        object.__setattr__(self, "powers_w", tuple(float(p) for p in self.powers_w))
        object.__setattr__(self, "circuit_powers_w", tuple(float(p) for p in self.circuit_powers_w))
        if len(self.powers_w) == 0 or len(self.powers_w) != len(self.circuit_powers_w):
            raise DomainError("powers and circuit powers need equal length K >= 1")
        if self.p_max_w <= 0:
            raise DomainError("p_max must be > 0")
        if any(p < 0 or p > self.p_max_w for p in self.powers_w):
            raise DomainError("every power must lie in [0, p_max]")
        if any(p < 0 for p in self.circuit_powers_w):
            raise DomainError("circuit powers must be >= 0")

    @property
    def total_power_w(self):
        return sum(self.powers_w) + sum(self.circuit_powers_w)


@dataclass(frozen=True)
class ChannelContext:
    """Per-UE link state seen by the optimizer; ``beta_k = p_k * gain_k / (noise_k + interference_k)``."""

    gains: tuple
    noise_w: tuple
    interference_w: tuple

    def __post_init__(self):
        for name in ("gains", "noise_w", "interference_w"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        k = len(self.gains)
        if k == 0 or len(self.noise_w) != k or len(self.interference_w) != k:
            raise DomainError("channel vectors need equal length K >= 1")
        if any(g < 0 for g in self.gains) or any(v < 0 for v in self.interference_w):
            raise DomainError("gains and interference must be >= 0")
        if any(n + i <= 0 for n, i in zip(self.noise_w, self.interference_w)):
            raise DomainError("noise plus interference must be > 0")

    @classmethod
    def from_snr_per_watt(cls, snr_per_w):
        """Context where ``snr_per_w[k]`` is the SINR UE k gets per watt of transmit power."""
        n = len(snr_per_w)
        return cls(tuple(snr_per_w), (1.0,) * n, (0.0,) * n)

    @property
    def size(self):
        return len(self.gains)

    @property
    def snr_per_w(self):
        return tuple(g / (n + i) for g, n, i in zip(self.gains, self.noise_w, self.interference_w))

    def betas(self, powers_w):
        return [p * a for p, a in zip(powers_w, self.snr_per_w)]


@dataclass(frozen=True)
class TradeoffPoint:
    theta: float
    se_bits_hz: float
    ee_bits_hz_w: float
    sop_value: float
    allocation: PowerAllocation
    converged: bool = True
    sweeps: int = 0

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise DomainError("theta must lie in [0, 1]")


def evaluate(theta, ctx: ChannelContext, powers_w, circuit_powers_w, scale=(1.0, 1.0)):
    """(SE, EE, SOP) of an allocation; ``scale`` divides SE and EE before weighting."""
    se = se_total(ctx.betas(powers_w))
    total = sum(powers_w) + sum(circuit_powers_w)
    e = se / total if total > 0 else 0.0
    return se, e, sop(se / scale[0], e / scale[1], theta)


def golden_section_max(f, lo, hi, tol=DEFAULT_TOL_W):
    """Maximiser of a unimodal ``f`` on ``[lo, hi]`` to within ``tol``."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def _coordinate_objective(theta, a_j, se_rest, power_rest, scale):
    w_se = theta / scale[0]
    w_ee = (1.0 - theta) / scale[1]
    log2 = math.log2

    def f(x):
        s = se_rest + log2(1.0 + a_j * x)
        total = power_rest + x
        return w_se * s + (w_ee * s / total if total > 0 else 0.0)
    return f


def _ascent(theta, ctx, circuit, p_max, start, tol, max_sweeps, scale):
    a = ctx.snr_per_w
    p = list(start)
    s_terms = [math.log2(1.0 + ak * pk) for ak, pk in zip(a, p)]
    se_sum = sum(s_terms)
    power_sum = sum(p) + sum(circuit)
    for sweep in range(1, max_sweeps + 1):
        max_delta = 0.0
        for j in range(len(p)):
            se_rest = se_sum - s_terms[j]
            power_rest = power_sum - p[j]
            f = _coordinate_objective(theta, a[j], se_rest, power_rest, scale)
            best_x, best_f = p[j], f(p[j])
            for x in (0.0, p_max, golden_section_max(f, 0.0, p_max, tol)):
                fx = f(x)
                if fx > best_f:
                    best_x, best_f = x, fx
            max_delta = max(max_delta, abs(best_x - p[j]))
            p[j] = best_x
            s_terms[j] = math.log2(1.0 + a[j] * best_x)
            # Re-summing keeps the running totals free of drift.
            se_sum = math.fsum(s_terms)
            power_sum = math.fsum(p) + math.fsum(circuit)
        if max_delta <= tol:
            return p, True, sweep
    return p, False, max_sweeps


def _endpoint_scale(ctx, circuit, p_max, tol, max_sweeps):
    se_ref = se_total(ctx.betas([p_max] * ctx.size))
    p, _, _ = _ascent(0.0, ctx, circuit, p_max, [p_max] * ctx.size, tol, max_sweeps, (1.0, 1.0))
    _, ee_ref, _ = evaluate(0.0, ctx, p, circuit)
    return (se_ref if se_ref > 0 else 1.0, ee_ref if ee_ref > 0 else 1.0)


def optimize_power(theta, ctx: ChannelContext, p_max_w, circuit_powers_w, *, start=None,
                   tol=DEFAULT_TOL_W, max_sweeps=DEFAULT_MAX_SWEEPS, normalize=False, scale=None):
    """Maximise ``theta*SE + (1-theta)*EE`` over ``[0, p_max]^K``.

    ``normalize`` divides SE and EE by their single-objective optima before
    weighting. On hitting ``max_sweeps`` the best allocation found is returned
    with ``converged=False`` and a :class:`NonConvergenceWarning` is issued.
    """
    if not 0.0 <= theta <= 1.0:
        raise DomainError(f"theta must lie in [0, 1], got {theta}")
    if p_max_w <= 0:
        raise DomainError("p_max must be > 0")
    circuit = [float(c) for c in circuit_powers_w]
    if len(circuit) != ctx.size:
        raise DomainError("need one circuit power per UE")
    if scale is None:
        scale = _endpoint_scale(ctx, circuit, p_max_w, tol, max_sweeps) if normalize else (1.0, 1.0)
    if start is None:
        start = [p_max_w] * ctx.size
    start = [min(max(float(x), 0.0), p_max_w) for x in start]

    p, converged, sweeps = _ascent(theta, ctx, circuit, p_max_w, start, tol, max_sweeps, scale)
    if not converged:
        warnings.warn(f"power search did not converge in {max_sweeps} sweeps (theta={theta})",
                      NonConvergenceWarning, stacklevel=2)
    se, e, value = evaluate(theta, ctx, p, circuit, scale)
    alloc = PowerAllocation(tuple(p), tuple(circuit), p_max_w)
    return TradeoffPoint(theta, se, e, value, alloc, converged, sweeps)


def pareto_sweep(theta_grid, ctx: ChannelContext, p_max_w, circuit_powers_w, *, normalize=False,
                 tol=DEFAULT_TOL_W, max_sweeps=DEFAULT_MAX_SWEEPS):
    """One optimised trade-off point per theta, each warm-started from its predecessor."""
    grid = [float(t) for t in theta_grid]
    if not grid:
        raise DomainError("theta grid must not be empty")
    if grid != sorted(grid) or grid[0] < 0.0 or grid[-1] > 1.0:
        raise DomainError("theta grid must be ascending within [0, 1]")
    circuit = [float(c) for c in circuit_powers_w]
    scale = _endpoint_scale(ctx, circuit, p_max_w, tol, max_sweeps) if normalize else (1.0, 1.0)
    points, start = [], None
    for theta in grid:
        pt = optimize_power(theta, ctx, p_max_w, circuit, start=start, tol=tol,
                            max_sweeps=max_sweeps, scale=scale)
        points.append(pt)
        start = pt.allocation.powers_w
    return points


def knee_point(points):
    """The swept point with the highest EE (first one on ties)."""
    if not points:
        raise DomainError("no trade-off points")
    return max(points, key=lambda pt: pt.ee_bits_hz_w)


@dataclass(frozen=True)
class UnimodalityReport:
    theta: float
    unimodal: bool
    argmax_w: float
    max_sop: float
    samples: int


def sop_profile(theta, ctx: ChannelContext, p_max_w, circuit_powers_w, samples):
    """SOP on a uniform power grid for a single-UE context."""
    if ctx.size != 1:
        raise DomainError("scalar scan needs exactly one UE")
    p = np.linspace(0.0, p_max_w, int(samples))
    se = np.log2(1.0 + ctx.snr_per_w[0] * p)
    total = p + float(circuit_powers_w[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        e = np.where(total > 0, se / total, 0.0)
    return p, theta * se + (1.0 - theta) * e


def is_unimodal(values, tol=1e-9):
    rising = True
    for d in np.diff(values):
        if rising and d < -tol:
            rising = False
        elif not rising and d > tol:
            return False
    return True


def unimodality_check(theta, ctx: ChannelContext, p_max_w, circuit_powers_w, samples=10_001):
    """Scan SOP over ``[0, p_max]`` and report whether it rises then falls."""
    p, values = sop_profile(theta, ctx, p_max_w, circuit_powers_w, samples)
    i = int(np.argmax(values))
    return UnimodalityReport(theta, is_unimodal(values), float(p[i]), float(values[i]), int(samples))


TRADEOFF_COLUMNS = ("theta", "se", "ee", "sop")


def write_tradeoff_csv(points, path):
    """Trade-off points with their per-UE powers as ``p_1..p_K`` columns."""
    k = max((len(pt.allocation.powers_w) for pt in points), default=0)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRADEOFF_COLUMNS + tuple(f"p_{i + 1}" for i in range(k)))
        for pt in points:
            w.writerow([format(v, ".9g") for v in
                        (pt.theta, pt.se_bits_hz, pt.ee_bits_hz_w, pt.sop_value, *pt.allocation.powers_w)])
