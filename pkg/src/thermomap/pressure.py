"""Pressure estimation along preimage trees and over separated sets.

The tree estimator averages log-level sums of weighted preimages; the
separated-set estimator greedily packs grid points under the iterated sup
metric and serves as an independent cross-check. The module also houses the
hyperbolicity and bounded-range classifiers, the pressure-curve smoothness
probe, and the four-branch construction separating those two conditions.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import BudgetError, DomainError
from .maps import (
    DEFAULT_NODE_BUDGET,
    IntervalMap,
    iter_preimage_levels,
    pw_linear_map,
)
from .potentials import (
    ConstantPotential,
    PiecewiseLinearPotential,
    Potential,
    potential_range,
)

BREAKPOINT_REJECT_TOL = 1e-12


@dataclass(frozen=True)
class PressureReport:
    """Per-depth pressure estimates with the extrapolated value.

    ``estimate`` is the mean of the last three depth values p_n and
    ``fluctuation`` is the largest deviation |p_n - estimate| over the last
    five depths, so callers always see the residual uncertainty.
    """

    estimate: float
    fluctuation: float
    depths: np.ndarray
    p_values: np.ndarray
    a_values: np.ndarray
    x0: float
    requested_depth: int
    complete: bool
    feasible_depth: Optional[int] = None

    @property
    def value(self) -> float:
        return self.estimate


def _reject_breakpoint(imap: IntervalMap, x0: float) -> None:
    gaps = np.abs(imap.breakpoints - x0)
    if np.min(gaps) <= BREAKPOINT_REJECT_TOL:
        raise DomainError(
            f"base point {x0} sits on a breakpoint; its branch word is ambiguous"
        )


def tree_pressure(
    imap: IntervalMap,
    potential: Optional[Potential],
    x0: float,
    n_max: int,
    n_min: int = 1,
    budget: int = DEFAULT_NODE_BUDGET,
    partial_on_budget: bool = False,
) -> PressureReport:
    """Estimate pressure from weighted preimage counts of depth up to n_max.

    p_n = (1/n) log sum over f^{-n}(x0) of exp(S_n(potential)); the level
    sums are evaluated with max-shifted log-sum-exp. With partial_on_budget
    the report covers the depths that fit in the budget and is flagged
    incomplete instead of raising.
    """
    if n_max < n_min or n_min < 1:
        raise DomainError("need 1 <= n_min <= n_max")
    _reject_breakpoint(imap, x0)
    a_values: list[float] = []
    feasible: Optional[int] = None
    complete = True
    try:
        for level in iter_preimage_levels(imap, potential, x0, n_max, budget):
            if level.depth == 0:
                continue
            a_values.append(float(logsumexp(level.birkhoff)))
    except BudgetError as exc:
        if not partial_on_budget or exc.feasible_depth < n_min:
            raise
        complete = False
        feasible = exc.feasible_depth
    depths = np.arange(1, len(a_values) + 1)
    a_arr = np.asarray(a_values)
    p_all = a_arr / depths
    keep = depths >= n_min
    depths, a_arr, p_vals = depths[keep], a_arr[keep], p_all[keep]
    estimate = float(np.mean(p_vals[-3:]))
    fluctuation = float(np.max(np.abs(p_vals[-5:] - estimate)))
    return PressureReport(
        estimate=estimate,
        fluctuation=fluctuation,
        depths=depths,
        p_values=p_vals,
        a_values=a_arr,
        x0=float(x0),
        requested_depth=n_max,
        complete=complete,
        feasible_depth=feasible,
    )


def topological_entropy(
    imap: IntervalMap,
    x0: float = 0.3,
    n_max: int = 15,
    budget: int = DEFAULT_NODE_BUDGET,
    partial_on_budget: bool = False,
) -> PressureReport:
    """Tree pressure of the zero potential."""
    return tree_pressure(
        imap, None, x0, n_max, budget=budget, partial_on_budget=partial_on_budget
    )


@dataclass(frozen=True)
class SeparatedSetEstimate:
    """Greedy lower bound for the separated-set pressure supremum."""

    value: float
    n: int
    epsilon: float
    points: np.ndarray
    count: int
    grid_size: int
    verified: bool


def separated_pressure(
    imap: IntervalMap,
    potential: Optional[Potential],
    n: int,
    epsilon: float,
    grid_size: int,
) -> SeparatedSetEstimate:
    """Pack grid points whose length-n orbits stay pairwise epsilon-apart.

    Candidates are visited in decreasing Birkhoff weight (stable order) and
    admitted when their iterated sup distance to every admitted point is at
    least epsilon. Distance at iterate 0 already exceeds epsilon for points
    more than epsilon apart in space, so only spatial neighbors are checked.
    The result is a lower bound of the supremum over separated subsets.
    """
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    if grid_size < 10:
        raise DomainError("grid must have at least 10 points")
    if n < 1:
        raise DomainError("n must be at least 1")
    lo, hi = imap.domain
    xs = np.linspace(lo, hi, grid_size)
    orbit = np.empty((n, grid_size))
    cur = xs.copy()
    for i in range(n):
        orbit[i] = cur
        cur = imap.eval(cur)
    if potential is not None:
        weights = np.zeros(grid_size)
        for i in range(n):
            weights += np.asarray(potential(orbit[i]), dtype=float)
    else:
        weights = np.zeros(grid_size)
    order = np.argsort(-weights, kind="stable")
    adm_pos: list[float] = []
    adm_idx: list[int] = []
    for idx in order:
        x = xs[idx]
        left = bisect.bisect_left(adm_pos, x - epsilon)
        right = bisect.bisect_right(adm_pos, x + epsilon)
        ok = True
        if right > left:
            neigh = np.asarray(adm_idx[left:right])
            dist = np.abs(orbit[:, neigh] - orbit[:, idx : idx + 1]).max(axis=0)
            ok = bool(np.all(dist >= epsilon))
        if ok:
            ins = bisect.bisect_left(adm_pos, x)
            adm_pos.insert(ins, x)
            adm_idx.insert(ins, int(idx))
    chosen = np.asarray(adm_idx)
    value = float(logsumexp(weights[chosen]) / n)
    verified = _verify_separated(orbit, np.asarray(adm_pos), chosen, epsilon)
    return SeparatedSetEstimate(
        value=value,
        n=n,
        epsilon=epsilon,
        points=np.asarray(adm_pos),
        count=chosen.size,
        grid_size=grid_size,
        verified=verified,
    )


def _verify_separated(
    orbit: np.ndarray, positions: np.ndarray, indices: np.ndarray, epsilon: float
) -> bool:
    """Exhaustive pairwise check, restricted to spatial neighbor windows."""
    for i in range(positions.size):
        j = i + 1
        while j < positions.size and positions[j] - positions[i] < epsilon:
            d = float(np.max(np.abs(orbit[:, indices[i]] - orbit[:, indices[j]])))
            if d < epsilon:
                return False
            j += 1
    return True


@dataclass(frozen=True)
class HyperbolicityReport:
    verdict: str  # "hyperbolic" | "unknown"
    witness_depth: Optional[int]
    margin: float


def hyperbolicity_check(
    imap: IntervalMap,
    potential: Optional[Potential],
    pressure_estimate: float,
    n_max: int = 20,
    grid_size: int = 4096,
) -> HyperbolicityReport:
    """Search for n with sup over a grid of (1/n) S_n(potential) < pressure.

    One-sided: success certifies the strict inequality at the witness depth;
    failure up to n_max proves nothing and is reported as "unknown".
    """
    lo, hi = imap.domain
    cur = np.linspace(lo, hi, grid_size)
    acc = np.zeros(grid_size)
    for depth in range(1, n_max + 1):
        if potential is not None:
            acc += np.asarray(potential(cur), dtype=float)
        sup_avg = float(acc.max()) / depth
        if sup_avg < pressure_estimate:
            return HyperbolicityReport("hyperbolic", depth, pressure_estimate - sup_avg)
        cur = imap.eval(cur)
    return HyperbolicityReport("unknown", None, 0.0)


def bounded_range_check(phi_range: tuple[float, float], h_top: float) -> bool:
    """Whether the potential's oscillation stays below the entropy."""
    lo, hi = min(phi_range), max(phi_range)
    return (hi - lo) < h_top


@dataclass(frozen=True)
class PressureCurve:
    """Pressure along a one-parameter potential family with smoothness data."""

    ts: np.ndarray
    estimates: np.ndarray
    fluctuations: np.ndarray
    first_diff: np.ndarray
    second_diff: np.ndarray
    fit_residual: float
    fit_window: float
    fit_points: int


def pressure_curve(
    imap: IntervalMap,
    phi: Optional[Potential],
    chi: Potential,
    t_grid: Sequence[float],
    x0: float = 0.3,
    n_max: int = 8,
    budget: int = DEFAULT_NODE_BUDGET,
    fit_window: float = 0.2,
) -> PressureCurve:
    """Tree pressure of phi + t*chi on a uniform t grid.

    Reports central first and second differences (ends are nan) and the RMS
    residual of a least-squares cubic over the points with |t| <= fit_window,
    a purely diagnostic smoothness probe.
    """
    ts = np.asarray(t_grid, dtype=float)
    if ts.size < 5:
        raise DomainError("need at least 5 curve points")
    steps = np.diff(ts)
    if not np.allclose(steps, steps[0], rtol=0, atol=1e-12):
        raise DomainError("t grid must be uniform")
    estimates = np.empty(ts.size)
    fluctuations = np.empty(ts.size)
    for i, t in enumerate(ts):
        pot = chi.scale(float(t))
        if phi is not None:
            pot = phi + pot
        rep = tree_pressure(imap, pot, x0, n_max, budget=budget)
        estimates[i] = rep.estimate
        fluctuations[i] = rep.fluctuation
    dt = float(steps[0])
    first = np.full(ts.size, np.nan)
    second = np.full(ts.size, np.nan)
    first[1:-1] = (estimates[2:] - estimates[:-2]) / (2 * dt)
    second[1:-1] = (estimates[2:] - 2 * estimates[1:-1] + estimates[:-2]) / dt**2
    mask = np.abs(ts) <= fit_window + 1e-12
    if mask.sum() >= 5:
        coeffs = np.polyfit(ts[mask], estimates[mask], 3)
        resid = estimates[mask] - np.polyval(coeffs, ts[mask])
        fit_residual = float(np.sqrt(np.mean(resid**2)))
        fit_points = int(mask.sum())
    else:
        coeffs = np.polyfit(ts, estimates, 3)
        resid = estimates - np.polyval(coeffs, ts)
        fit_residual = float(np.sqrt(np.mean(resid**2)))
        fit_points = int(ts.size)
    return PressureCurve(
        ts=ts,
        estimates=estimates,
        fluctuations=fluctuations,
        first_diff=first,
        second_diff=second,
        fit_residual=fit_residual,
        fit_window=fit_window,
        fit_points=fit_points,
    )


@dataclass(frozen=True)
class AppendixReport:
    """Four-branch construction: hyperbolic potential with oversized range.

    The potential vanishes on [0, 1/2], which contains the invariant Cantor
    set of itineraries confined to the first two branches (entropy log 2),
    and sits below -gap on [3/4, 1], which contains the fixed point 4 - 4x.
    Its oscillation gap + 1/2 exceeds the entropy log 4, so the bounded-range
    condition fails even though the potential is verified hyperbolic.
    """

    imap: IntervalMap
    potential: PiecewiseLinearPotential
    gap: float
    sup_phi: float
    inf_phi: float
    phi_range: float
    pressure: PressureReport
    entropy: PressureReport
    hyperbolic: bool
    hyperbolic_margin: float
    bounded_range: bool
    fixed_point: float
    phi_at_fixed_point: float


def appendix_construct(
    gap: float,
    x0: float = 0.3,
    n_max: int = 11,
    budget: int = DEFAULT_NODE_BUDGET,
) -> AppendixReport:
    if gap <= 0:
        raise DomainError("gap must be positive")
    imap = pw_linear_map(
        [0.0, 0.25, 0.5, 0.75, 1.0],
        [4.0, -4.0, 4.0, -4.0],
        [0.0, 2.0, -2.0, 4.0],
        name="four_branch",
    )
    depth = -(gap + 0.5)
    phi = PiecewiseLinearPotential((0.0, 0.5, 0.75, 1.0), (0.0, 0.0, depth, depth))
    inf_phi, sup_phi = potential_range(phi, imap.domain)
    pressure = tree_pressure(imap, phi, x0, n_max, budget=budget)
    # zero-potential level sums factorize (4^n preimages), so a short tree
    # already gives the entropy exactly
    entropy = topological_entropy(imap, x0, n_max=6, budget=budget)
    hyper = hyperbolicity_check(imap, phi, pressure.estimate, n_max=1)
    fixed_point = 0.8  # solves 4 - 4x = x on the last branch
    return AppendixReport(
        imap=imap,
        potential=phi,
        gap=gap,
        sup_phi=sup_phi,
        inf_phi=inf_phi,
        phi_range=sup_phi - inf_phi,
        pressure=pressure,
        entropy=entropy,
        hyperbolic=hyper.verdict == "hyperbolic",
        hyperbolic_margin=hyper.margin,
        bounded_range=bounded_range_check((inf_phi, sup_phi), entropy.estimate),
        fixed_point=fixed_point,
        phi_at_fixed_point=float(phi(np.asarray(fixed_point))),
    )
