"""The fiber maps f0, f1 of the non-contracting IFS on [0, 1].

f1 is the affine flip ``x -> c1 * (1 - x)``.  f0 is a concave C^1 map whose
derivative is piecewise linear: it equals ``beta`` near 0, falls to a plateau
slope ``psi`` (the band where the fundamental domain I0 lives), and falls
again to ``lambda`` through a short knee before 1.  The knee position is
solved so that f0(1) = 1 exactly.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .symbolic import Word, as_word

BISECT_TOL = 1e-12


class ParameterError(ValueError):
    """A parameter lies outside the range where the maps can be built."""


class ConstructionError(RuntimeError):
    """The requested interior shape does not give a monotone C^1 map."""


class DomainError(ValueError):
    """A point lies outside the range of the map being inverted."""


def bisect_monotone(fn, y, lo, hi, increasing=True, tol=BISECT_TOL, max_iter=200):
    """Solve ``fn(x) = y`` on ``[lo, hi]`` for a monotone ``fn`` by bisection.

    Works elementwise on arrays.  The returned point is the midpoint of the
    final bracket, whose width is below ``tol``.
    """
    y = np.asarray(y, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), y.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), y.shape).copy()
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        above = fn(mid) > y
        if not increasing:
            above = ~above
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
        if np.all(hi - lo <= tol):
            break
    out = 0.5 * (lo + hi)
    return out if out.ndim else float(out)


class FiberMap:
    """A monotone C^1 self-map of [0, 1] with analytic derivative."""

    kind: str = ""
    orientation: int = 1

    def __call__(self, x):
        raise NotImplementedError

    def deriv(self, x):
        raise NotImplementedError

    @property
    def image(self) -> tuple[float, float]:
        ends = (float(self(0.0)), float(self(1.0)))
        return (min(ends), max(ends))

    def inverse(self, y):
        """Preimage of ``y`` by bisection, ``|map(x) - y| <= 1e-12``."""
        lo, hi = self.image
        slack = 1e-13
        if type(y) is float or type(y) is int:
            return self._scalar_inverse(float(y), lo, hi, slack)
        ya = np.asarray(y, dtype=float)
        if np.any(ya < lo - slack) or np.any(ya > hi + slack):
            raise DomainError(f"{self.kind}: value outside the range [{lo}, {hi}]")
        ya = np.clip(ya, lo, hi)
        x = bisect_monotone(self, ya, 0.0, 1.0, increasing=self.orientation > 0,
                            tol=1e-15)
        # endpoints of the range are hit exactly
        x = np.where(ya == float(self(0.0)), 0.0, x)
        x = np.where(ya == float(self(1.0)), 1.0, x)
        return x if x.ndim else float(x)

    def _scalar_inverse(self, y: float, lo: float, hi: float, slack: float) -> float:
        # same bisection as the array path, in plain floats
        if y < lo - slack or y > hi + slack:
            raise DomainError(f"{self.kind}: value outside the range [{lo}, {hi}]")
        y = min(max(y, lo), hi)
        if y == self(0.0):
            return 0.0
        if y == self(1.0):
            return 1.0
        a, b = 0.0, 1.0
        up = self.orientation > 0
        for _ in range(200):
            mid = 0.5 * (a + b)
            above = (self(mid) > y) == up
            if above:
                b = mid
            else:
                a = mid
            if b - a <= 1e-15:
                break
        return 0.5 * (a + b)


class KneeMap(FiberMap):
    """f0: increasing, derivative piecewise linear through ``knots``."""

    kind = "f0"
    orientation = 1

    def __init__(self, knots_x: Sequence[float], knots_d: Sequence[float]):
        xs = np.asarray(knots_x, dtype=float)
        ds = np.asarray(knots_d, dtype=float)
        if xs[0] != 0.0 or xs[-1] != 1.0 or np.any(np.diff(xs) <= 0):
            raise ConstructionError("derivative knots must increase from 0 to 1")
        if np.any(ds <= 0):
            raise ConstructionError("f0 must be strictly increasing")
        self.knots_x = xs
        self.knots_d = ds
        widths = np.diff(xs)
        pieces = 0.5 * (ds[:-1] + ds[1:]) * widths
        # forward sums for the head, backward sums for the tail, so that
        # f0(0) = 0 and f0(1) = 1 come out exactly
        fwd = np.concatenate([[0.0], np.cumsum(pieces)])
        bwd = 1.0 - np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
        split = len(xs) // 2
        self._vals = np.where(np.arange(len(xs)) < split, fwd, bwd)
        self._vals[0], self._vals[-1] = 0.0, 1.0
        self.closure_error = float(fwd[-1] - 1.0)
        # plain-float copies for the scalar fast path
        self._xs = [float(v) for v in xs]
        self._ds = [float(v) for v in ds]
        self._vs = [float(v) for v in self._vals]
        self._affine_head = ds[0] == ds[1]
        self._affine_tail = ds[-2] == ds[-1]

    @property
    def beta(self) -> float:
        return float(self.knots_d[0])

    @property
    def lam(self) -> float:
        return float(self.knots_d[-1])

    def _locate(self, x):
        i = np.searchsorted(self.knots_x, x, side="right") - 1
        return np.clip(i, 0, len(self.knots_x) - 2)

    def _scalar(self, x: float) -> float:
        xs = self._xs
        i = min(max(bisect_right(xs, x) - 1, 0), len(xs) - 2)
        if i == 0 and self._affine_head:
            return self._ds[0] * x
        if i == len(xs) - 2 and self._affine_tail:
            return 1.0 - self._ds[-1] * (1.0 - x)
        d0, d1 = self._ds[i], self._ds[i + 1]
        u = x - xs[i]
        return self._vs[i] + d0 * u + 0.5 * (d1 - d0) / (xs[i + 1] - xs[i]) * u * u

    def _scalar_deriv(self, x: float) -> float:
        xs = self._xs
        i = min(max(bisect_right(xs, x) - 1, 0), len(xs) - 2)
        d0, d1 = self._ds[i], self._ds[i + 1]
        return d0 + (d1 - d0) * (x - xs[i]) / (xs[i + 1] - xs[i])

    def __call__(self, x):
        if type(x) is float:
            return self._scalar(x)
        xa = np.asarray(x, dtype=float)
        i = self._locate(xa)
        x0 = self.knots_x[i]
        d0, d1 = self.knots_d[i], self.knots_d[i + 1]
        h = self.knots_x[i + 1] - x0
        u = xa - x0
        val = self._vals[i] + d0 * u + 0.5 * (d1 - d0) / h * u * u
        # affine end pieces evaluated in closed form
        last = len(self.knots_x) - 2
        if self.knots_d[-2] == self.knots_d[-1]:
            val = np.where(i == last, 1.0 - self.lam * (1.0 - xa), val)
        if self.knots_d[0] == self.knots_d[1]:
            val = np.where(i == 0, self.beta * xa, val)
        return val if val.ndim else float(val)

    def deriv(self, x):
        if type(x) is float:
            return self._scalar_deriv(x)
        xa = np.asarray(x, dtype=float)
        i = self._locate(xa)
        x0 = self.knots_x[i]
        d0, d1 = self.knots_d[i], self.knots_d[i + 1]
        h = self.knots_x[i + 1] - x0
        d = d0 + (d1 - d0) * (xa - x0) / h
        return d if d.ndim else float(d)


class AffineFlip(FiberMap):
    """f1: x -> c1 * (1 - x)."""

    kind = "f1"
    orientation = -1

    def __init__(self, c1: float):
        self.c1 = float(c1)

    def __call__(self, x):
        if type(x) is float:
            return self.c1 * (1.0 - x)
        xa = np.asarray(x, dtype=float)
        val = self.c1 * (1.0 - xa)
        return val if val.ndim else float(val)

    def deriv(self, x):
        if type(x) is float:
            return -self.c1
        xa = np.asarray(x, dtype=float)
        d = np.full_like(xa, -self.c1)
        return d if d.ndim else float(d)


@dataclass(frozen=True)
class ShapeControls:
    """Interior shape of f0.

    ``plateau`` is the slope on the band carrying I0; ``head`` is the width
    of [0, head] where f0' = beta; ``head_ramp`` and ``knee`` are the widths
    of the two linear transitions.  ``a0`` pins the left end of I0; when
    ``None`` it is chosen by :func:`derive_params`.
    """

    plateau: float = 1.1
    head: float = 0.02
    head_ramp: float = 0.03
    knee: float = 0.04
    a0: float | None = None

    def knots(self, beta: float, lam: float) -> tuple[list[float], list[float]]:
        psi = self.plateau
        if not lam < psi <= beta:
            raise ConstructionError("plateau slope must lie in (lambda, beta]")
        centre = (1.0 - lam - (beta - psi) * (self.head + 0.5 * self.head_ramp)) / (psi - lam)
        left, right = centre - 0.5 * self.knee, centre + 0.5 * self.knee
        h1 = self.head
        h2 = self.head + self.head_ramp
        if not (0.0 < h1 <= h2 < left < right < 1.0):
            raise ConstructionError(
                f"knots out of order: head {h1}, {h2}, knee [{left:.6g}, {right:.6g}]")
        xs = [0.0, h1, h2, left, right, 1.0]
        ds = [beta, beta, psi, psi, lam, lam]
        # drop a zero-width head ramp
        if h2 == h1:
            del xs[2], ds[2]
        return xs, ds

    def to_dict(self) -> dict:
        return {"plateau": self.plateau, "head": self.head, "head_ramp": self.head_ramp,
                "knee": self.knee, "a0": self.a0}


@dataclass(frozen=True)
class FiberMapParams:
    beta: float
    lam: float
    gamma: float
    gamma_prime: float
    alpha: float
    alpha_bar: float
    N: int
    a0: float
    b0: float
    a1: float
    b1: float
    c1: float

    def standing_ratio(self) -> float:
        """lambda (1 - lambda) / (1 - 1/beta); the family needs this > 1."""
        return self.lam * (1.0 - self.lam) / (1.0 - 1.0 / self.beta)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class FiberMapPair:
    f0: KneeMap
    f1: AffineFlip
    params: FiberMapParams
    shape: ShapeControls = field(default_factory=ShapeControls)

    @property
    def maps(self) -> tuple[FiberMap, FiberMap]:
        return (self.f0, self.f1)

    @property
    def beta(self) -> float:
        return self.params.beta

    @property
    def lam(self) -> float:
        return self.params.lam

    @property
    def c1(self) -> float:
        return self.params.c1

    @property
    def p_hat(self) -> float:
        """Attracting fixed point of f1."""
        return self.c1 / (1.0 + self.c1)

    @property
    def kappa(self) -> float:
        return self.params.alpha_bar * self.params.alpha

    def compose_value(self, word, x):
        """f_[word](x); the first symbol acts first."""
        if isinstance(x, (float, int)):
            out = float(x)
            for b in as_word(word):
                out = self.maps[b](out)
            return out
        out = np.asarray(x, dtype=float)
        for b in as_word(word):
            out = self.maps[b](out)
        return out if np.ndim(out) else float(out)

    def compose_deriv(self, word, x):
        """Signed derivative of f_[word] at x by the chain rule."""
        if isinstance(x, (float, int)):
            return self.compose_both(word, x)[1]
        pt = np.asarray(x, dtype=float)
        d = np.ones_like(pt)
        for b in as_word(word):
            fb = self.maps[b]
            d = d * fb.deriv(pt)
            pt = fb(pt)
        return d if np.ndim(d) else float(d)

    def compose_both(self, word, x):
        """Value and signed derivative of f_[word] at x in one pass."""
        if isinstance(x, (float, int)):
            pt, d = float(x), 1.0
            for b in as_word(word):
                fb = self.maps[b]
                d *= fb.deriv(pt)
                pt = fb(pt)
            return pt, d
        pt = np.asarray(x, dtype=float)
        d = np.ones_like(pt)
        for b in as_word(word):
            fb = self.maps[b]
            d = d * fb.deriv(pt)
            pt = fb(pt)
        return pt, d

    def compose_inverse(self, word, y):
        """Preimage of y under f_[word] (each step must stay in range)."""
        pt = y
        for b in reversed(as_word(word).bits):
            pt = self.maps[b].inverse(pt)
        return pt

    def orbit(self, word, x) -> np.ndarray:
        pts = [float(x)]
        for b in as_word(word):
            pts.append(float(self.maps[b](pts[-1])))
        return np.array(pts)

    def f0_power(self, n: int, x):
        return self.compose_value(Word.zeros(n), x)

    def f0_inverse_power(self, n: int, y):
        for _ in range(n):
            y = self.f0.inverse(y)
        return y

    @property
    def fundamental_domain(self) -> tuple[float, float]:
        """D-hat = [f0^-2(b0), f0^-1(b0)] = [f0^-1(a0), a0]."""
        return (self.f0_inverse_power(2, self.params.b0), self.f0_inverse_power(1, self.params.b0))

    @property
    def band(self) -> tuple[float, float]:
        """The admissible band [f0^-2(b0), b0] for expanding itineraries."""
        return (self.f0_inverse_power(2, self.params.b0), self.params.b0)


def _check_constructible(beta: float, lam: float, c1: float) -> None:
    for name, v in (("beta", beta), ("lambda", lam), ("c1", c1)):
        if not (isinstance(v, (int, float)) and math.isfinite(v)):
            raise ParameterError(f"{name} must be a finite number, got {v!r}")
    if beta <= 0 or lam <= 0:
        raise ParameterError("f0 needs positive endpoint slopes")
    if not 0.0 < c1 <= 1.0:
        raise ParameterError("c1 = f1(0) must lie in (0, 1] for f1 to map into [0, 1]")


def build_pair(params: FiberMapParams, shape: ShapeControls | None = None) -> FiberMapPair:
    """Realise ``params`` with the knee family.

    Only constructibility is enforced here; the open conditions of the family
    (gamma < 1, the standing inequality, ...) are left to :func:`validate` so
    that broken families can still be built and reported on.
    """
    shape = shape or ShapeControls()
    _check_constructible(params.beta, params.lam, params.c1)
    xs, ds = shape.knots(params.beta, params.lam)
    f0 = KneeMap(xs, ds)
    if abs(f0.closure_error) > 1e-12:
        raise ConstructionError(f"f0(1) misses 1 by {f0.closure_error:.3g}")
    return FiberMapPair(f0=f0, f1=AffineFlip(params.c1), params=params, shape=shape)


def _iterate(f0: KneeMap, x: float, n: int) -> float:
    for _ in range(n):
        x = f0(x)
    return x


def _contracting_start(f0: KneeMap) -> float:
    """Smallest x with f0' < 1 on [x, 1]."""
    xs, ds = f0.knots_x, f0.knots_d
    for i in range(len(xs) - 1):
        if ds[i] >= 1.0 > ds[i + 1]:
            return float(xs[i] + (ds[i] - 1.0) / (ds[i] - ds[i + 1]) * (xs[i + 1] - xs[i]))
    return float(xs[-2])


def _expanding_end(f0: KneeMap) -> float:
    """Largest x with f0' > 1 on [0, x]."""
    xs, ds = f0.knots_x, f0.knots_d
    for i in range(len(xs) - 1):
        if ds[i] > 1.0 >= ds[i + 1]:
            return float(xs[i] + (ds[i] - 1.0) / (ds[i] - ds[i + 1]) * (xs[i + 1] - xs[i]))
    return 1.0


def _domain_data(f0: KneeMap, a0: float, lam: float, c1: float, grid: int = 401):
    """N, I1 and the (F0.ii)/(F01) slack for a given left end a0."""
    b0 = f0(a0)
    start = _contracting_start(f0)
    n, a1 = 0, a0
    while a1 < start + 1e-9:
        a1 = f0(a1)
        n += 1
        if n > 10_000:
            raise ConstructionError("f0 orbit of a0 never reaches the contracting region")
    b1 = f0(a1)
    xs = np.linspace(a0, b0, grid)
    d = np.ones_like(xs)
    pt = xs
    for _ in range(n):
        d = d * f0.deriv(pt)
        pt = f0(pt)
    lower = float(lam * d.min())          # alpha must sit below this
    upper_need = 1.0 / c1                  # and above 1/alpha_bar
    slack_alpha = lower / max(1.0, upper_need)
    slack_b = a0 / (c1 * (1.0 - a1))      # (F01)(b): c1 (1 - a1) < a0
    return n, b0, a1, b1, lower, slack_alpha, slack_b


def derive_params(beta: float, lam: float, c1: float,
                  shape: ShapeControls | None = None) -> tuple[FiberMapParams, ShapeControls]:
    """Complete (beta, lambda, c1, shape) into a full parameter set.

    With ``shape.a0 = None`` the left end of I0 is scanned over the plateau and
    the value maximising the smaller of the two (F0.ii)/(F01)(b) slacks is
    kept.  alpha is the geometric mean of its admissible bounds.
    """
    shape = shape or ShapeControls()
    _check_constructible(beta, lam, c1)
    xs, ds = shape.knots(beta, lam)
    f0 = KneeMap(xs, ds)
    if shape.a0 is None:
        lo = xs[2] if len(xs) == 6 else xs[1]
        hi = min(_expanding_end(f0), xs[-3])
        # I0 must fit left of the expanding end: b0 = f0(a0) <= hi
        cands = np.linspace(lo, hi, 400)
        best = None
        for a in cands:
            if f0(a) > hi:
                break
            _, _, _, _, _, sa, sb = _domain_data(f0, float(a), lam, c1, grid=101)
            score = min(sa, sb)
            if best is None or score > best[0]:
                best = (score, float(a))
        if best is None:
            raise ConstructionError("no room for a fundamental domain on the plateau")
        a0 = best[1]
        shape = replace(shape, a0=a0)
    else:
        a0 = float(shape.a0)
    n, b0, a1, b1, lower, _, _ = _domain_data(f0, a0, lam, c1)
    # f1 is affine, so every derivative bound of f1 is c1
    lo_alpha = max(1.0, 1.0 / c1)
    alpha = math.sqrt(lo_alpha * lower) if lower > lo_alpha else lo_alpha
    params = FiberMapParams(beta=beta, lam=lam, gamma=c1, gamma_prime=c1, alpha=alpha,
                            alpha_bar=c1, N=n, a0=a0, b0=b0, a1=a1, b1=b1, c1=c1)
    return params, shape


CANONICAL = {"beta": 1.2, "lambda": 0.5, "c1": 0.38,
             "shape_controls": {"plateau": 1.1, "head": 0.02, "head_ramp": 0.03, "knee": 0.04}}


def canonical_pair() -> FiberMapPair:
    """The certified canonical family used throughout the tests."""
    return pair_from_dict(CANONICAL)


def pair_from_dict(doc: dict) -> FiberMapPair:
    """Build a pair from a family document (keys beta, lambda, c1, shape_controls)."""
    try:
        beta = float(doc["beta"])
        lam = float(doc["lambda"])
        c1 = float(doc["c1"])
    except KeyError as exc:
        raise ParameterError(f"family document is missing {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ParameterError(str(exc)) from None
    sc = doc.get("shape_controls") or {}
    unknown = set(sc) - {"plateau", "head", "head_ramp", "knee", "a0"}
    if unknown:
        raise ParameterError(f"unknown shape controls: {sorted(unknown)}")
    shape = ShapeControls(**sc)
    params, shape = derive_params(beta, lam, c1, shape)
    return build_pair(params, shape)


# ---------------------------------------------------------------- validation

@dataclass(frozen=True)
class ConditionCheck:
    """One condition: ``margin`` is the smallest strict slack found on the grid.

    A negative margin means the condition fails and ``witness`` is a point
    (or parameter value) where it fails worst.
    """

    name: str
    passed: bool
    margin: float
    witness: float | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "margin": self.margin,
                "witness": self.witness, "detail": self.detail}


@dataclass(frozen=True)
class ConditionReport:
    checks: tuple[ConditionCheck, ...]
    resolution: float
    tolerance: float
    recomputed: dict

    # (F_B) is informational and does not enter all_pass
    OPTIONAL = ("F_B",)

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks if c.name not in self.OPTIONAL)

    def __getitem__(self, name: str) -> ConditionCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed and c.name not in self.OPTIONAL]

    def to_dict(self) -> dict:
        return {"all_pass": self.all_pass, "resolution": self.resolution,
                "tolerance": self.tolerance,
                "checks": [c.to_dict() for c in self.checks],
                "recomputed": dict(self.recomputed)}


def _worst(values: np.ndarray, xs: np.ndarray) -> tuple[float, float]:
    i = int(np.argmin(values))
    return float(values[i]), float(xs[i])


def _check(name, margin, witness, tol, detail="") -> ConditionCheck:
    return ConditionCheck(name, bool(margin > tol), float(margin),
                          None if witness is None else float(witness), detail)


def validate(pair: FiberMapPair, resolution: float = 1e-4,
             tolerance: float = 0.0) -> ConditionReport:
    """Check the standing conditions of the pair on a grid of step ``resolution``.

    Strict inequalities pass when their margin exceeds ``tolerance``.
    Non-strict ones (the derivative sandwich, f0 = identity at the ends)
    are allowed a rounding slack of 1e-12.
    """
    if not resolution > 0:
        raise ParameterError("resolution must be positive")
    p = pair.params
    f0, f1 = pair.f0, pair.f1
    slack = 1e-12
    xs = np.linspace(0.0, 1.0, int(math.ceil(1.0 / resolution)) + 1)
    d0 = f0.deriv(xs)
    checks = []

    # (F0.i): endpoints, hyperbolicity, derivative sandwich, no interior fixed point
    inner = xs[1:-1]
    gap = (f0(inner) - inner) / (inner * (1.0 - inner))
    gap_min, gap_at = _worst(gap, inner)
    sandwich = np.minimum(d0 - p.lam, p.beta - d0)
    sand_min, sand_at = _worst(sandwich, xs)
    ends_ok = f0(0.0) == 0.0 and f0(1.0) == 1.0
    slopes_ok = (abs(f0.deriv(0.0) - p.beta) <= slack and abs(f0.deriv(1.0) - p.lam) <= slack)
    margin = min(p.beta - 1.0, 1.0 - p.lam, gap_min, float(d0.min()))
    witness = gap_at if gap_min <= margin else None
    ok = ends_ok and slopes_ok and sand_min >= -slack
    checks.append(ConditionCheck(
        "F0.i", bool(ok and margin > tolerance), float(margin if ok else min(margin, -1.0)),
        witness if ok or sand_min >= -slack else sand_at,
        "fixed points exactly {0, 1}; lambda <= f0' <= beta"))

    # (F0.ii): recompute N and I1, then the expansion inequality on I0
    start = _contracting_start(f0)
    n, a1 = 0, p.a0
    while a1 < start + 1e-9 and n <= 10_000:
        a1 = f0(a1)
        n += 1
    b0 = f0(p.a0)
    b1 = f0(a1)
    consistent = (n == p.N and abs(a1 - p.a1) <= 1e-9 and abs(b0 - p.b0) <= 1e-9
                  and abs(b1 - p.b1) <= 1e-9)
    ni = max(int(math.ceil((b0 - p.a0) / resolution)) + 1, 201)
    xi = np.linspace(p.a0, b0, ni)
    dn = np.asarray(pair.compose_deriv(Word.zeros(p.N), xi))
    exp_min, exp_at = _worst(p.lam * dn / p.alpha - 1.0, xi)
    left = xs[xs <= b0]
    right = xs[xs >= a1]
    e_min, e_at = _worst(f0.deriv(left) - 1.0, left)
    c_min, c_at = _worst(1.0 - f0.deriv(right), right)
    parts = [(exp_min, exp_at), (e_min, e_at), (c_min, c_at), (p.alpha - 1.0, None),
             (b0 - p.a0, None), (a1 - b0, None), (1.0 - b1, None)]
    m, w = min(parts, key=lambda t: t[0])
    if not consistent:
        m, w = min(m, -1.0), p.a0
    checks.append(_check("F0.ii", m, w, tolerance,
                         f"N={n}, lambda*(f0^N)' > alpha on I0, expanding on [0,b0], "
                         "contracting on [a1,1]"))

    # (F1.i): decreasing contraction
    d1 = np.abs(f1.deriv(xs))
    gamma = float(d1.max())
    monotone = bool(np.all(np.asarray(f1.deriv(xs)) < 0))
    m = 1.0 - gamma if monotone else -1.0
    checks.append(_check("F1.i", m, None, tolerance, f"gamma = {gamma:.12g}"))

    # (F1.ii): |f1'| >= alpha_bar > 1/alpha on [f1^2(a1), a1]
    lo = float(f1(f1(a1)))
    seg = np.linspace(min(lo, a1), max(lo, a1), 201)
    floor_min, floor_at = _worst(np.abs(f1.deriv(seg)) - p.alpha_bar, seg)
    m = min(p.alpha_bar * p.alpha - 1.0, floor_min + 1.0 if floor_min >= -slack else -1.0)
    checks.append(_check("F1.ii", m, floor_at if floor_min < -slack else None, tolerance,
                         f"alpha_bar*alpha = {p.alpha_bar * p.alpha:.12g}"))

    # (F01)
    checks.append(ConditionCheck("F01a", f1(1.0) == 0.0, 0.0 - abs(float(f1(1.0))), None,
                                 "f1(1) = 0 exactly"))
    top = float(max(f1(a1), f1(1.0)))
    checks.append(_check("F01b", p.a0 - top, a1, tolerance, "f1([a1,1]) inside [0,a0)"))
    q2 = pair.f0_inverse_power(2, b0)
    rng = pair.f1.image
    checks.append(_check("F01c", rng[1] - q2 + (slack if rng[0] == 0.0 else -1.0), q2,
                         tolerance - slack, "[0, f0^-2(b0)) inside f1([0,1])"))

    # standing inequality
    ratio = p.standing_ratio()
    checks.append(_check("standing", ratio - 1.0, None, tolerance,
                         f"lambda(1-lambda)/(1-1/beta) = {ratio:.12g}"))

    # (F_B), optional
    c = rng[1]
    tail = xs[xs >= c]
    fb_min, fb_at = _worst(np.minimum(1.0 - f0.deriv(tail), f0.deriv(tail)), tail)
    checks.append(_check("F_B", fb_min, fb_at, tolerance, "0 < f0' < 1 on [c1,1]"))

    recomputed = {"N": n, "a0": p.a0, "b0": float(b0), "a1": float(a1), "b1": float(b1),
                  "consistent": consistent, "gamma": gamma, "gamma_prime": float(d1.min())}
    return ConditionReport(tuple(checks), float(resolution), float(tolerance), recomputed)
