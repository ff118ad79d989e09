"""Recover the separation ``a`` and an intensity scale from a scanned signal.

The model is ``y(x) ~ scale * f(a, x)``. For fixed ``a`` the best scale is a
closed-form projection, which leaves a one-dimensional objective in ``a``.
That objective is minimized by a coarse grid followed by golden-section
refinement of every grid-local minimum, so periodic aliases are never lost
silently: when several refined minima are statistically tied the result is
flagged ambiguous and carries every bracket.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .analysis import Signal1D, domain_Dn

MIN_GRID = 200
FLAT_RTOL = 1e-9
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class Unidentifiable(ValueError):
    """The objective carries no information about ``a`` on the bounds."""


class AmbiguousFit(RuntimeError):
    """Raised by callers that want ambiguity to be an error; carries the result."""

    def __init__(self, result: "FitResult"):
        super().__init__(f"ambiguous fit: {len(result.brackets)} statistically tied minima")
        self.result = result


def pointwise(forward: Callable[[float, np.ndarray], np.ndarray]):
    """Adapt a scalar ``forward(a, x)`` to the batched interface of :class:`FitProblem`."""
    def many(a_values, x):
        return np.array([np.asarray(forward(float(a), x), dtype=float)
                         for a in np.atleast_1d(a_values)])
    return many


@dataclass(frozen=True)
class FitProblem:
    """A scanned signal plus the model family that explains it.

    ``forward(a_values, x)`` returns the unscaled model for a batch of
    separations, shape ``(len(a_values), len(x))``; wrap scalar models with
    :func:`pointwise`.
    ``prior_domain`` restricts ``a`` to ``D_n / omega_ref`` for the stated
    ``n``; it needs ``chi``. ``noise`` is the relative (multiplicative) noise
    level used to decide when two minima are statistically tied.
    """

    observed: Signal1D
    forward: Callable[[np.ndarray, np.ndarray], np.ndarray]
    bounds: tuple[float, float]
    prior_domain: int | None = None
    chi: float | None = None
    omega_ref: float = 1.0
    noise: float | None = None
    n_grid: int = 400
    threads: int = 1
    label: str = ""

    def __post_init__(self):
        lo, hi = self.bounds
        if not (0 < lo < hi):
            raise ValueError("bounds must be positive and ordered")
        if len(self.observed) == 0:
            raise ValueError("observed signal is empty")
        if self.n_grid < MIN_GRID:
            raise ValueError(f"n_grid must be at least {MIN_GRID}")
        if self.prior_domain is not None and self.chi is None:
            raise ValueError("a prior domain needs the geometry parameter chi")
        if self.noise is not None and self.noise < 0:
            raise ValueError("noise level must be non-negative")
        if self.omega_ref <= 0:
            raise ValueError("omega_ref must be positive")

    def search_interval(self) -> tuple[float, float]:
        lo, hi = self.bounds
        if self.prior_domain is None:
            return lo, hi
        dlo, dhi = domain_Dn(self.chi, self.prior_domain)
        lo, hi = max(lo, dlo / self.omega_ref), min(hi, dhi / self.omega_ref)
        if not lo < hi:
            raise ValueError(f"prior domain D_{self.prior_domain} does not meet the bounds")
        return lo, hi


@dataclass(frozen=True)
class FitResult:
    a_hat: float
    scale_hat: float
    residual_rms: float
    bracket: tuple[float, float]
    iterations: int
    ambiguous: bool = False
    brackets: list = field(default_factory=list)
    candidates: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bracket"] = list(self.bracket)
        d["brackets"] = [list(b) for b in self.brackets]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def profile(problem: FitProblem, a_values) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form scales and residual sums of squares for each ``a``."""
    a_values = np.atleast_1d(np.asarray(a_values, dtype=float))
    y = problem.observed.y
    F = np.asarray(problem.forward(a_values, problem.observed.x), dtype=float)
    if F.shape != (len(a_values), len(y)):
        raise ValueError(f"forward returned shape {F.shape}, expected {(len(a_values), len(y))}")
    ff = np.einsum("ij,ij->i", F, F)
    fy = F @ y
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(ff > 0, np.maximum(fy / ff, 0.0), 0.0)
    r = y[None, :] - scale[:, None] * F
    return scale, np.einsum("ij,ij->i", r, r)


def golden_section(fn, lo, hi, xtol: float = 1e-10, max_iter: int = 200):
    """Minimize ``fn`` on each bracket ``[lo_k, hi_k]`` at once.

    ``fn`` maps an array of abscissae to objective values. All brackets are
    advanced in lockstep, so one call of ``fn`` serves every bracket.
    Returns ``(x, f(x), iterations)`` arrays (scalars for scalar input).
    """
    scalar = np.ndim(lo) == 0
    lo = np.atleast_1d(np.asarray(lo, dtype=float)).copy()
    hi = np.atleast_1d(np.asarray(hi, dtype=float)).copy()
    c = hi - GOLDEN * (hi - lo)
    d = lo + GOLDEN * (hi - lo)
    f = np.asarray(fn(np.concatenate([c, d])), dtype=float)
    fc, fd = f[:len(c)], f[len(c):]
    it = 0
    while it < max_iter and np.any(np.abs(hi - lo) > xtol * np.maximum(1.0, np.abs(c) + np.abs(d))):
        it += 1
        left = fc <= fd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        keep = np.where(left, c, d)
        fkeep = np.where(left, fc, fd)
        new = np.where(left, hi - GOLDEN * (hi - lo), lo + GOLDEN * (hi - lo))
        fnew = np.asarray(fn(new), dtype=float)
        c, fc = np.where(left, new, keep), np.where(left, fnew, fkeep)
        d, fd = np.where(left, keep, new), np.where(left, fkeep, fnew)
    x = np.where(fc <= fd, c, d)
    fx = np.minimum(fc, fd)
    if scalar:
        return float(x[0]), float(fx[0]), it
    return x, fx, it


def _tie_tolerance(problem: FitProblem) -> float:
    y = problem.observed.y
    if problem.noise:
        # two hypotheses are indistinguishable when their chi-square differs by < 4
        return 4.0 * problem.noise**2 * float(np.mean(y * y))
    # noiseless data: only roundoff separates a true tie from a near-alias
    return (1e3 * np.finfo(float).eps) ** 2 * float(y @ y)


def _grid_rss(problem: FitProblem, grid: np.ndarray) -> np.ndarray:
    chunks = np.array_split(grid, max(1, min(problem.threads, len(grid))))
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(lambda g: profile(problem, g)[1], chunks))
    return np.concatenate(parts)


def fit(problem: FitProblem) -> FitResult:
    """Least-squares estimate of ``(a, scale)``; deterministic for any thread count."""
    lo, hi = problem.search_interval()
    grid = np.linspace(lo, hi, problem.n_grid)
    rss = _grid_rss(problem, grid)
    if not np.all(np.isfinite(rss)):
        raise FloatingPointError("forward model produced non-finite values on the grid")
    top = float(rss.max())
    if top == 0.0 or (top - rss.min()) <= FLAT_RTOL * top:
        raise Unidentifiable("objective is flat in a over the search interval")

    n = len(grid)
    idx = [i for i in range(n)
           if (i == 0 or rss[i] <= rss[i - 1]) and (i == n - 1 or rss[i] <= rss[i + 1])]
    # one representative per plateau
    idx = [i for k, i in enumerate(idx) if k == 0 or i != idx[k - 1] + 1]
    idx = np.array(idx)
    blo, bhi = grid[np.maximum(idx - 1, 0)], grid[np.minimum(idx + 1, n - 1)]
    a_ref, r_ref, iterations = golden_section(lambda a: profile(problem, a)[1], blo, bhi)
    # a golden step can only land on a worse point than the node if the basin is not unimodal
    worse = rss[idx] < r_ref
    a_ref = np.where(worse, grid[idx], a_ref)
    r_ref = np.where(worse, rss[idx], r_ref)

    order = np.lexsort((a_ref, r_ref))
    best = order[0]
    tied = [k for k in order if r_ref[k] - r_ref[best] <= _tie_tolerance(problem)]
    scale = float(profile(problem, a_ref[best])[0][0])
    return FitResult(
        a_hat=float(a_ref[best]),
        scale_hat=scale,
        residual_rms=math.sqrt(float(r_ref[best]) / len(problem.observed)),
        bracket=(float(blo[best]), float(bhi[best])),
        iterations=int(iterations),
        ambiguous=len(tied) > 1,
        brackets=[(float(blo[k]), float(bhi[k])) for k in tied],
        candidates=[float(a_ref[k]) for k in tied],
    )


def identifiability_report(problem: FitProblem, a: float | None = None, chi_eff: float | None = None) -> dict:
    """Periodicity aliases ``a + k pi / (2 omega chi_eff)`` that fall inside the bounds.

    ``a`` defaults to the fitted value; ``chi_eff`` to the problem's ``chi``
    (1 for one-photon families).
    """
    chi = chi_eff if chi_eff is not None else (problem.chi if problem.chi is not None else 1.0)
    if a is None:
        a = fit(problem).a_hat
    spacing = math.pi / (2.0 * problem.omega_ref * abs(chi))
    lo, hi = problem.bounds
    kmin, kmax = math.ceil((lo - a) / spacing), math.floor((hi - a) / spacing)
    aliases = [a + k * spacing for k in range(kmin, kmax + 1)]
    return {"a": a, "spacing": spacing, "spacing_x": spacing * problem.omega_ref,
            "aliases": aliases, "unique": len(aliases) <= 1}


def add_noise(y, level: float, rng: np.random.Generator) -> np.ndarray:
    """Multiplicative Gaussian noise, clipped at zero so intensities stay physical."""
    y = np.asarray(y, dtype=float)
    return np.clip(y * (1.0 + level * rng.standard_normal(y.shape)), 0.0, None)
