"""Visibility, extrema spacing and D_n bookkeeping for scanned signals."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

UNITS_NOTE = "units: c = hbar = eps0 = 1; x is dimensionless"
SPREAD_FLAG = 0.10


class ScanError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Signal1D:
    """Samples ``y(x)`` on a strictly increasing grid, with free-form metadata."""

    x: np.ndarray
    y: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if len(x) == 0:
            raise ValueError("empty signal")
        if x.shape != y.shape:
            raise ValueError("x and y lengths differ")
        if np.any(np.diff(x) <= 0):
            raise ValueError("x must be strictly increasing")
        if np.any(y < 0) or not np.all(np.isfinite(y)):
            raise ValueError("signal values must be finite and non-negative")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "metadata", dict(self.metadata))

    def __len__(self):
        return len(self.x)

    def scaled(self, c: float) -> "Signal1D":
        return Signal1D(self.x, c * self.y, self.metadata)

    def window(self, lo: float, hi: float) -> "Signal1D":
        keep = (self.x >= lo) & (self.x <= hi)
        return Signal1D(self.x[keep], self.y[keep], self.metadata)


# ---------------------------------------------------------------------------
# extrema


def _vertex3(x, y):
    """Abscissa and value of the parabola through three points."""
    (x0, x1, x2), (y0, y1, y2) = x, y
    d0, d2 = x0 - x1, x2 - x1
    s0, s2 = (y0 - y1) / d0, (y2 - y1) / d2
    curv = (s2 - s0) / (d2 - d0)
    if curv == 0:
        return x1, y1
    slope = s0 - curv * d0
    u = -slope / (2 * curv)
    u = min(max(u, d0), d2)
    return x1 + u, y1 + slope * u + curv * u * u


def _vertex5(x, y, i):
    """Extremum value of the local quartic through five points around ``i``."""
    xs = x[i - 2:i + 3]
    ys = y[i - 2:i + 3]
    h = xs[-1] - xs[0]
    t = (xs - x[i]) / h
    coef = np.polyfit(t, ys, 4)
    roots = np.roots(np.polyder(coef))
    lo, hi = (x[i - 1] - x[i]) / h, (x[i + 1] - x[i]) / h
    best = ys[2]
    cands = [r.real for r in roots if abs(r.imag) < 1e-9 and lo <= r.real <= hi]
    if not cands:
        return best
    vals = np.polyval(coef, cands)
    return vals


@dataclass(frozen=True)
class Extremum:
    x: float
    value: float
    kind: str  # "max" or "min"
    index: int


def find_extrema(signal: Signal1D) -> list[Extremum]:
    """Interior local extrema, located by 3-point parabolic refinement.

    Runs of equal samples (plateaus) count once, at the run midpoint.
    Endpoints are never reported.
    """
    x, y = signal.x, signal.y
    n = len(y)
    if n < 3:
        return []
    # collapse plateaus into runs
    starts = [0]
    for i in range(1, n):
        if y[i] != y[i - 1]:
            starts.append(i)
    runs = [(s, e - 1) for s, e in zip(starts, starts[1:] + [n])]
    out = []
    for k in range(1, len(runs) - 1):
        s, e = runs[k]
        left, right = y[runs[k - 1][1]], y[runs[k + 1][0]]
        v = y[s]
        if v > left and v > right:
            kind = "max"
        elif v < left and v < right:
            kind = "min"
        else:
            continue
        if s == e:
            xv, yv = _vertex3(x[s - 1:s + 2], y[s - 1:s + 2])
        else:
            xv, yv = 0.5 * (x[s] + x[e]), v
        out.append(Extremum(float(xv), float(yv), kind, s))
    return out


def _refined_extreme_values(signal: Signal1D):
    """Continuum estimates of the largest and smallest value of the signal."""
    x, y = signal.x, signal.y
    hi, lo = float(y.max()), float(y.min())
    for ex in find_extrema(signal):
        i = ex.index
        if 2 <= i <= len(y) - 3 and (y[i] != y[i - 1] and y[i] != y[i + 1]):
            vals = np.atleast_1d(_vertex5(x, y, i))
            if ex.kind == "max":
                hi = max(hi, float(vals.max()))
            else:
                lo = min(lo, float(vals.min()))
    return hi, max(lo, 0.0)


def visibility(signal: Signal1D, refine: bool = True) -> float:
    """(max - min) / (max + min) over the scan; 0 for an identically zero signal.

    With ``refine`` the extreme values are taken from local quartic fits
    around each sampled extremum, approximating the continuum extremes
    rather than the sampled ones.
    """
    y = np.asarray(signal.y)
    if np.any(y < 0):
        raise ValueError("visibility undefined for negative values")
    if refine:
        hi, lo = _refined_extreme_values(signal)
    else:
        hi, lo = float(y.max()), float(y.min())
    if hi + lo == 0:
        return 0.0
    return float(min(1.0, max(0.0, (hi - lo) / (hi + lo))))


# ---------------------------------------------------------------------------
# D_n domains and resolution


def domain_Dn(chi: float, n: int) -> tuple[float, float]:
    """(1/chi) [pi/4 + pi n, 3 pi/4 + pi n], returned with lo < hi."""
    if chi == 0:
        raise ValueError("chi must be nonzero")
    a = (math.pi / 4 + math.pi * n) / chi
    b = (3 * math.pi / 4 + math.pi * n) / chi
    return (min(a, b), max(a, b))


def classify_window(window, chi: float | None, tol: float = 1e-9) -> str:
    """'inside-D_n', 'outside-D_n' or 'not-applicable'."""
    if chi is None or chi == 0:
        return "not-applicable"
    lo, hi = window
    per = math.pi / abs(chi)
    n_lo = math.floor(min(lo, hi) / per) - 1
    for n in range(n_lo, n_lo + int((hi - lo) / per) + 4):
        d_lo, d_hi = domain_Dn(abs(chi), n)
        if lo >= d_lo - tol and hi <= d_hi + tol:
            return "inside-D_n"
        if lo < d_hi - tol and hi > d_lo + tol:
            return "not-applicable"
    return "outside-D_n"


@dataclass(frozen=True)
class SpacingStats:
    mean: float
    spread: float
    n_pairs: int

    @property
    def flagged(self) -> bool:
        return self.spread > SPREAD_FLAG


def spacing_stats(signal: Signal1D, window=None, tol: float | None = None) -> SpacingStats:
    """Mean and relative spread of |x_max - x_min| over adjacent extrema in ``window``.

    Extrema within ``tol`` (default: two grid steps) outside the window
    edges are kept, so extrema sitting exactly on an edge are not lost.
    """
    ext = find_extrema(signal)
    if window is not None:
        lo, hi = window
        if tol is None:
            tol = 2.0 * float(np.max(np.diff(signal.x))) if len(signal) > 1 else 0.0
        ext = [e for e in ext if lo - tol <= e.x <= hi + tol]
    gaps = [abs(b.x - a.x) for a, b in zip(ext, ext[1:]) if a.kind != b.kind]
    if not gaps or not any(e.kind == "max" for e in ext) or not any(e.kind == "min" for e in ext):
        raise ValueError("window holds no adjacent maximum/minimum pair")
    gaps = np.array(gaps)
    mean = float(gaps.mean())
    return SpacingStats(mean, float(gaps.std() / mean), len(gaps))


def extrema_spacing(signal: Signal1D, window=None) -> float:
    return spacing_stats(signal, window).mean


@dataclass(frozen=True)
class ResolutionReport:
    visibility: float
    extrema_spacing: float
    domain: str
    chi: float | None
    spread: float = 0.0

    @property
    def flagged(self) -> bool:
        return self.spread > SPREAD_FLAG


def resolution_report(signal: Signal1D, window=None, chi: float | None = None) -> ResolutionReport:
    sub = signal if window is None else signal.window(*window)
    st = spacing_stats(signal, window)
    dom = classify_window(window, chi) if window is not None else "not-applicable"
    return ResolutionReport(visibility(sub), st.mean, dom, chi, st.spread)


def resolution_cells(signal: Signal1D) -> list[tuple[float, float, float]]:
    """Cells between consecutive minima as ``(lo, hi, spacing)``.

    A cell holds one maximum, so its mean max-min spacing is half its width.
    """
    mins = [e.x for e in find_extrema(signal) if e.kind == "min"]
    return [(a, b, 0.5 * (b - a)) for a, b in zip(mins, mins[1:])]


def resolving_measure(signal: Signal1D, threshold: float) -> float:
    """Total length of the cells whose spacing does not exceed ``threshold``."""
    return float(sum(hi - lo for lo, hi, sp in resolution_cells(signal) if sp <= threshold))


# ---------------------------------------------------------------------------
# scanning and I/O


def scan(fn, x, threads: int = 1, metadata: dict | None = None) -> Signal1D:
    """Evaluate ``fn`` at every grid point; results are ordered and thread-count independent."""
    x = np.asarray(x, dtype=float).ravel()

    def one(xi):
        try:
            return float(fn(xi))
        except Exception as exc:  # re-raised with the offending grid point
            raise ScanError(f"correlator failed at x={float(xi)!r}: {exc}") from exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            y = list(pool.map(one, x))
    else:
        y = [one(xi) for xi in x]
    return Signal1D(x, np.array(y), metadata or {})


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def signal_to_csv(signal: Signal1D) -> str:
    buf = io.StringIO()
    buf.write(f"# {UNITS_NOTE}\n")
    buf.write(f"# metadata {json.dumps(signal.metadata, sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y"])
    for xi, yi in zip(signal.x, signal.y):
        w.writerow([repr(float(xi)), repr(float(yi))])
    return buf.getvalue()


def signal_to_json(signal: Signal1D) -> str:
    return json.dumps({"units": UNITS_NOTE, "metadata": signal.metadata,
                       "x": signal.x.tolist(), "y": signal.y.tolist()}, indent=1, sort_keys=True)


def write_signal(signal: Signal1D, path, fmt: str | None = None) -> None:
    fmt = fmt or ("json" if str(path).endswith(".json") else "csv")
    _atomic_write(path, signal_to_json(signal) if fmt == "json" else signal_to_csv(signal))


def read_signal(path) -> Signal1D:
    """Load a signal written by :func:`write_signal` (format picked from content)."""
    text = Path(path).read_text()
    if not text.strip():
        raise ValueError(f"{path}: empty signal file")
    if text.lstrip().startswith("{"):
        d = json.loads(text)
        try:
            return Signal1D(d["x"], d["y"], d.get("metadata", {}))
        except KeyError as exc:
            raise ValueError(f"{path}: missing field {exc}") from None
    meta = {}
    rows = []
    for line in text.splitlines():
        if line.startswith("# metadata "):
            meta = json.loads(line[len("# metadata "):])
        elif line.startswith("#") or not line.strip():
            continue
        else:
            rows.append(line)
    reader = list(csv.reader(rows))
    if not reader or reader[0][:2] != ["x", "y"]:
        raise ValueError(f"{path}: expected an 'x,y' header")
    data = reader[1:]
    if not data:
        raise ValueError(f"{path}: no samples")
    try:
        arr = np.array([[float(r[0]), float(r[1])] for r in data])
    except (ValueError, IndexError) as exc:
        raise ValueError(f"{path}: malformed row ({exc})") from None
    return Signal1D(arr[:, 0], arr[:, 1], meta)
