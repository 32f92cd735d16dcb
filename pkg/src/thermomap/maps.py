"""Piecewise-monotone interval maps and preimage-tree expansion.

A map is a finite ordered list of monotone branches over contiguous
subintervals of its domain. Branches are linear or one of the two monotone
halves of the degree-4 logistic family, which keeps inverse branches
closed-form and numerically stable. The preimage tree enumerates f^{-n}(x0)
level by level together with backward Birkhoff sums of a potential, under
an explicit node budget that fails loudly instead of thrashing memory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .errors import BudgetError, DomainError

TOL_CONTINUITY = 1e-9
TOL_COVER = 1e-12
TOL_DEDUP = 1e-12
DEFAULT_NODE_BUDGET = 20_000_000

_GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class Branch:
    """One monotone branch of a piecewise map.

    ``kind`` is ``"linear"`` (uses ``slope`` and ``intercept``) or one of
    ``"logistic_left"`` / ``"logistic_right"`` for the two monotone halves
    of x -> 4x(1-x). The branch domain is the closed interval [lo, hi].
    """

    lo: float
    hi: float
    kind: str = "linear"
    slope: float = 0.0
    intercept: float = 0.0

    def __post_init__(self) -> None:
        if not self.hi > self.lo:
            raise DomainError(f"branch domain [{self.lo}, {self.hi}] is degenerate")
        if self.kind == "linear":
            if self.slope == 0.0:
                raise DomainError("linear branch must have nonzero slope")
        elif self.kind == "logistic_left":
            if self.lo < -TOL_CONTINUITY or self.hi > 0.5 + TOL_CONTINUITY:
                raise DomainError("logistic_left branch domain must lie in [0, 0.5]")
        elif self.kind == "logistic_right":
            if self.lo < 0.5 - TOL_CONTINUITY or self.hi > 1.0 + TOL_CONTINUITY:
                raise DomainError("logistic_right branch domain must lie in [0.5, 1]")
        else:
            raise DomainError(f"unknown branch kind {self.kind!r}")

    @property
    def increasing(self) -> bool:
        if self.kind == "linear":
            return self.slope > 0
        return self.kind == "logistic_left"

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "linear":
            return self.slope * x + self.intercept
        return 4.0 * x * (1.0 - x)

    def image(self) -> tuple[float, float]:
        a = float(self.forward(np.asarray(self.lo)))
        b = float(self.forward(np.asarray(self.hi)))
        return (a, b) if a <= b else (b, a)

    def covers(self, y: np.ndarray, tol: float = TOL_COVER) -> np.ndarray:
        """Mask of values lying in this branch's image (within tol)."""
        lo, hi = self.image()
        y = np.asarray(y, dtype=float)
        return (y >= lo - tol) & (y <= hi + tol)

    def inverse(self, y: np.ndarray) -> np.ndarray:
        """Preimage under this branch; callers must mask with covers first.

        Logistic inverses use the rationalized forms that stay accurate
        near the critical value where 1 - y underflows:
        left  branch: x = y / (2 (1 + sqrt(1 - y)))
        right branch: x = (1 + sqrt(1 - y)) / 2
        """
        y = np.asarray(y, dtype=float)
        if self.kind == "linear":
            x = (y - self.intercept) / self.slope
        else:
            root = np.sqrt(np.clip(1.0 - y, 0.0, None))
            if self.kind == "logistic_left":
                x = np.clip(y, 0.0, None) / (2.0 * (1.0 + root))
            else:
                x = (1.0 + root) / 2.0
        return np.clip(x, self.lo, self.hi)

    def derivative_range(self) -> tuple[float, float]:
        """Range of |f'| over the branch domain."""
        if self.kind == "linear":
            s = abs(self.slope)
            return (s, s)
        # |f'(x)| = |4 - 8x| is monotone on either side of 1/2
        a = abs(4.0 - 8.0 * self.lo)
        b = abs(4.0 - 8.0 * self.hi)
        return (min(a, b), max(a, b))


@dataclass(frozen=True)
class IntervalMap:
    """A piecewise-monotone self-map of a closed interval."""

    branches: tuple[Branch, ...]
    name: str = "map"

    def __post_init__(self) -> None:
        if not self.branches:
            raise DomainError("map needs at least one branch")
        for left, right in zip(self.branches, self.branches[1:]):
            if abs(left.hi - right.lo) > TOL_DEDUP:
                raise DomainError(
                    f"branch domains not contiguous at {left.hi} vs {right.lo}"
                )
        lo, hi = self.domain
        for br in self.branches:
            ilo, ihi = br.image()
            if ilo < lo - TOL_CONTINUITY or ihi > hi + TOL_CONTINUITY:
                raise DomainError(
                    f"branch image [{ilo}, {ihi}] escapes domain [{lo}, {hi}]"
                )

    @property
    def domain(self) -> tuple[float, float]:
        return (self.branches[0].lo, self.branches[-1].hi)

    @property
    def breakpoints(self) -> np.ndarray:
        return np.array([br.lo for br in self.branches] + [self.branches[-1].hi])

    @property
    def interior_breakpoints(self) -> np.ndarray:
        return self.breakpoints[1:-1]

    def branch_index(self, x: np.ndarray) -> np.ndarray:
        """Branch owning each point; breakpoints resolve to the left branch."""
        x = np.asarray(x, dtype=float)
        return np.searchsorted(self.interior_breakpoints, x, side="left")

    def eval(self, x: np.ndarray) -> np.ndarray:
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        lo, hi = self.domain
        if np.any(x_arr < lo - TOL_CONTINUITY) or np.any(x_arr > hi + TOL_CONTINUITY):
            raise DomainError("point outside map domain")
        x_arr = np.clip(x_arr, lo, hi)
        out = np.empty_like(x_arr)
        idx = self.branch_index(x_arr)
        for b, br in enumerate(self.branches):
            mask = idx == b
            if mask.any():
                out[mask] = br.forward(x_arr[mask])
        out = np.clip(out, lo, hi)
        return out if np.ndim(x) else float(out[0])

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.eval(x)

    def orbit(self, x: float, n: int) -> np.ndarray:
        """Forward orbit [x, f(x), ..., f^n(x)] of length n + 1."""
        pts = np.empty(n + 1)
        pts[0] = x
        for i in range(n):
            pts[i + 1] = self.eval(pts[i])
        return pts

    def preimages(self, y: float) -> np.ndarray:
        """All solutions of f(x) = y, ascending, merged at shared breakpoints.

        Empty when no branch image covers y.
        """
        out: list[float] = []
        for br in self.branches:
            if br.covers(np.asarray(y)):
                x = float(br.inverse(np.asarray(y)))
                if out and abs(x - out[-1]) <= TOL_DEDUP:
                    continue
                out.append(x)
        return np.array(out)

    def expansion_range(self) -> tuple[float, float]:
        """Min and max of |f'| over all branch domains."""
        lows, highs = zip(*(br.derivative_range() for br in self.branches))
        return (min(lows), max(highs))

    def turning_points(self) -> np.ndarray:
        """Interior breakpoints where adjacent branches change orientation."""
        pts = []
        for left, right, x in zip(
            self.branches, self.branches[1:], self.interior_breakpoints
        ):
            if left.increasing != right.increasing:
                pts.append(x)
        return np.array(pts)


# ---------------------------------------------------------------------------
# standard constructions


def tent_map() -> IntervalMap:
    return IntervalMap(
        (
            Branch(0.0, 0.5, "linear", 2.0, 0.0),
            Branch(0.5, 1.0, "linear", -2.0, 2.0),
        ),
        name="tent",
    )


def full_linear_map(k: int) -> IntervalMap:
    """Sawtooth with k full branches of slope +-k on [0, 1]."""
    if k < 2:
        raise DomainError("need at least two branches")
    branches = []
    for i in range(k):
        lo, hi = i / k, (i + 1) / k
        if i % 2 == 0:
            branches.append(Branch(lo, hi, "linear", float(k), float(-i)))
        else:
            branches.append(Branch(lo, hi, "linear", float(-k), float(i + 1)))
    return IntervalMap(tuple(branches), name=f"sawtooth{k}")


def pw_linear_map(
    breakpoints: Sequence[float],
    slopes: Sequence[float],
    intercepts: Sequence[float],
    name: str = "pw_linear",
) -> IntervalMap:
    if len(breakpoints) != len(slopes) + 1 or len(slopes) != len(intercepts):
        raise DomainError("breakpoints must outnumber slopes by exactly one")
    branches = tuple(
        Branch(float(a), float(b), "linear", float(s), float(c))
        for a, b, s, c in zip(breakpoints, breakpoints[1:], slopes, intercepts)
    )
    return IntervalMap(branches, name=name)


def logistic4_map() -> IntervalMap:
    return IntervalMap(
        (
            Branch(0.0, 0.5, "logistic_left"),
            Branch(0.5, 1.0, "logistic_right"),
        ),
        name="logistic4",
    )


def golden_tent_map() -> IntervalMap:
    """Tent of slope +-golden ratio, rescaled so the core is exactly [0, 1].

    The kink sits at 2 - beta = 1 / beta**2. The left branch maps [0, 2-beta]
    onto [2-beta, 1] and the right branch maps [2-beta, 1] onto [0, 1], so the
    two cells form a Markov partition with transition matrix [[0, 1], [1, 1]].
    """
    beta = _GOLDEN
    kink = 2.0 - beta
    return IntervalMap(
        (
            Branch(0.0, kink, "linear", beta, kink),
            Branch(kink, 1.0, "linear", -beta, beta),
        ),
        name="golden_tent",
    )


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class MapDiagnostics:
    """What validate() measures: continuity, monotonicity, surjectivity."""

    continuity_residuals: np.ndarray
    max_continuity_defect: float
    monotone_ok: bool
    branch_surjective: tuple[bool, ...]
    turning_points: np.ndarray
    injective: bool


def validate(imap: IntervalMap, samples_per_branch: int = 257) -> MapDiagnostics:
    """Check global continuity and per-branch monotonicity by sampling.

    Raises DomainError when adjacent branch values disagree by more than
    1e-9 at a shared breakpoint; everything else is reported, not enforced.
    """
    lo, hi = imap.domain
    residuals = []
    for left, right, x in zip(
        imap.branches, imap.branches[1:], imap.interior_breakpoints
    ):
        residuals.append(
            abs(float(left.forward(np.asarray(x))) - float(right.forward(np.asarray(x))))
        )
    residuals = np.asarray(residuals)
    defect = float(residuals.max()) if residuals.size else 0.0
    if defect > TOL_CONTINUITY:
        raise DomainError(f"continuity defect {defect} at a breakpoint exceeds 1e-9")
    monotone_ok = True
    surjective = []
    for br in imap.branches:
        xs = np.linspace(br.lo, br.hi, samples_per_branch)
        vals = br.forward(xs)
        diffs = np.diff(vals)
        if br.increasing:
            monotone_ok &= bool(np.all(diffs > -TOL_DEDUP))
        else:
            monotone_ok &= bool(np.all(diffs < TOL_DEDUP))
        ilo, ihi = br.image()
        surjective.append(ilo <= lo + TOL_CONTINUITY and ihi >= hi - TOL_CONTINUITY)
    turning = imap.turning_points()
    return MapDiagnostics(
        continuity_residuals=residuals,
        max_continuity_defect=defect,
        monotone_ok=monotone_ok,
        branch_surjective=tuple(surjective),
        turning_points=turning,
        injective=turning.size == 0 and len(imap.branches) == 1,
    )


def is_topologically_exact(imap: IntervalMap) -> bool:
    """Exactness flag: all branches full, or a primitive Markov witness."""
    diag = validate(imap)
    if all(diag.branch_surjective):
        return True
    report = markov_witness(imap)
    return report.is_markov and report.primitive and report.min_expansion > 1.0


# ---------------------------------------------------------------------------
# Markov structure witness


@dataclass(frozen=True)
class MarkovReport:
    """Checkable witness that the branch partition is Markov."""

    is_markov: bool
    partition: np.ndarray
    transition: np.ndarray
    primitive: bool
    min_expansion: float
    endpoint_defect: float


def markov_witness(imap: IntervalMap, tol: float = TOL_CONTINUITY) -> MarkovReport:
    """Test whether branch images align with the branch partition itself.

    Every branch endpoint must map onto a partition point (within tol);
    monotonicity then forces each branch image to be a union of contiguous
    cells, read off into a 0/1 transition matrix. Primitivity is checked by
    boolean matrix powers up to the Wielandt bound (k-1)**2 + 1.
    """
    pts = imap.breakpoints
    k = len(imap.branches)
    defect = 0.0
    transition = np.zeros((k, k), dtype=int)
    for i, br in enumerate(imap.branches):
        ilo, ihi = br.image()
        for v in (ilo, ihi):
            defect = max(defect, float(np.min(np.abs(pts - v))))
        for j in range(k):
            if pts[j] >= ilo - tol and pts[j + 1] <= ihi + tol:
                transition[i, j] = 1
    is_markov = defect <= tol
    primitive = False
    power = np.eye(k, dtype=bool)
    mat = transition.astype(bool)
    for _ in range((k - 1) ** 2 + 1):
        power = power @ mat
        if power.all():
            primitive = True
            break
    return MarkovReport(
        is_markov=is_markov,
        partition=pts,
        transition=transition,
        primitive=primitive and is_markov,
        min_expansion=imap.expansion_range()[0],
        endpoint_defect=defect,
    )


# ---------------------------------------------------------------------------
# preimage trees with backward Birkhoff sums


@dataclass(frozen=True)
class PreimageLevel:
    """One level of a preimage tree.

    ``points[i]`` satisfies f^depth(points[i]) = x0 and ``birkhoff[i]`` is the
    forward Birkhoff sum of the potential along its orbit down to x0. Points
    are ordered lexicographically by branch word (earliest inverse step most
    significant); ``parent`` indexes the previous level and ``branch`` is the
    branch containing the point.
    """

    depth: int
    points: np.ndarray
    birkhoff: np.ndarray
    parent: np.ndarray
    branch: np.ndarray


def iter_preimage_levels(
    imap: IntervalMap,
    potential: Optional[Callable[[np.ndarray], np.ndarray]],
    x0: float,
    n_max: int,
    budget: int = DEFAULT_NODE_BUDGET,
) -> Iterator[PreimageLevel]:
    """Yield preimage levels 0..n_max, raising BudgetError when too large.

    Candidate preimages produced by adjacent branches that coincide at a
    shared breakpoint (within 1e-12) are merged, keeping the lower branch,
    so each geometric preimage appears exactly once.
    """
    lo, hi = imap.domain
    if not lo - TOL_CONTINUITY <= x0 <= hi + TOL_CONTINUITY:
        raise DomainError(f"base point {x0} outside domain [{lo}, {hi}]")
    k = len(imap.branches)
    pts = np.array([float(np.clip(x0, lo, hi))])
    birk = np.zeros(1)
    sentinel = np.full(1, -1, dtype=np.int64)
    yield PreimageLevel(0, pts, birk, sentinel, sentinel)
    used = 1
    for depth in range(1, n_max + 1):
        p = pts.size
        cand = np.full((p, k), np.nan)
        valid = np.zeros((p, k), dtype=bool)
        for b, br in enumerate(imap.branches):
            mask = br.covers(pts)
            if mask.any():
                cand[mask, b] = br.inverse(pts[mask])
                valid[:, b] = mask
        for b in range(1, k):
            dup = (
                valid[:, b - 1]
                & valid[:, b]
                & (np.abs(cand[:, b] - cand[:, b - 1]) <= TOL_DEDUP)
            )
            valid[dup, b] = False
        idx = np.flatnonzero(valid.ravel())
        if idx.size == 0:
            raise DomainError(f"no preimages at depth {depth}; map is not onto")
        if used + idx.size > budget:
            raise BudgetError(depth - 1, n_max, budget)
        used += idx.size
        parent = idx // k
        branch_id = idx % k
        pts = cand.ravel()[idx]
        if potential is not None:
            birk = np.asarray(potential(pts), dtype=float) + birk[parent]
        else:
            birk = birk[parent]
        yield PreimageLevel(depth, pts, birk, parent, branch_id.astype(np.int64))


@dataclass(frozen=True)
class PreimageTree:
    """All levels of f^{-n}(x0) up to a requested depth."""

    x0: float
    levels: tuple[PreimageLevel, ...] = field(repr=False)

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def level(self, n: int) -> PreimageLevel:
        return self.levels[n]

    def counts(self) -> np.ndarray:
        return np.array([lv.points.size for lv in self.levels])

    def words(self, n: int) -> np.ndarray:
        """Branch words (b_1 .. b_n) for level n, one row per point.

        b_t is the branch containing the ancestor t inverse steps from x0,
        so rows appear in lexicographic order.
        """
        size = self.levels[n].points.size
        out = np.empty((size, n), dtype=np.int64)
        cur = np.arange(size)
        for lev in range(n, 0, -1):
            out[:, lev - 1] = self.levels[lev].branch[cur]
            cur = self.levels[lev].parent[cur]
        return out


def preimage_tree(
    imap: IntervalMap,
    potential: Optional[Callable[[np.ndarray], np.ndarray]],
    x0: float,
    n_max: int,
    budget: int = DEFAULT_NODE_BUDGET,
) -> PreimageTree:
    levels = tuple(iter_preimage_levels(imap, potential, x0, n_max, budget))
    return PreimageTree(x0=float(x0), levels=levels)


def birkhoff_sum(
    imap: IntervalMap,
    potential: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    n: int,
) -> np.ndarray:
    """Forward Birkhoff sum phi(x) + phi(f x) + ... + phi(f^(n-1) x)."""
    cur = np.atleast_1d(np.asarray(x, dtype=float)).copy()
    total = np.zeros_like(cur)
    for _ in range(n):
        total += np.asarray(potential(cur), dtype=float)
        cur = np.atleast_1d(imap.eval(cur))
    return total if np.ndim(x) else float(total[0])
