"""Picard lattices of iterated blow-ups of the plane and of Hirzebruch
surfaces: intersection form, canonical class, r-class predicate and complete
bounded enumeration, duality, and blow-up bookkeeping.

A surface model is purely numerical: a base (``P2`` or ``F<d>``) plus an
ordered list of orbit sizes of point blow-ups.  The basis is (H, E1..En)
over the plane and (s, h, E1..En) over F_d, with H^2 = 1, E_i^2 = -1,
s^2 = -d, s.h = 1, h^2 = 0 and all mixed products zero.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from math import isqrt
from typing import Iterable, Iterator, Literal

from .errors import InputError, UnsupportedRangeError

DualMode = Literal["AntiCanonical", "TwiceAntiCanonical"]

_BASE_RE = re.compile(r"^(P2|F(\d+))$")


@dataclass(frozen=True)
class DivisorClass:
    """Integer vector in a surface basis; arithmetic is componentwise."""

    coords: tuple[int, ...]

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        return DivisorClass(tuple(a + b for a, b in zip(self.coords, other.coords, strict=True)))

    def __sub__(self, other: "DivisorClass") -> "DivisorClass":
        return DivisorClass(tuple(a - b for a, b in zip(self.coords, other.coords, strict=True)))

    def __neg__(self) -> "DivisorClass":
        return DivisorClass(tuple(-a for a in self.coords))

    def __rmul__(self, k: int) -> "DivisorClass":
        return DivisorClass(tuple(k * a for a in self.coords))

    def is_zero(self) -> bool:
        return not any(self.coords)


@dataclass(frozen=True)
class SurfaceModel:
    base: str
    blowup_orbits: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not _BASE_RE.match(self.base):
            raise InputError(f"unknown base {self.base!r}; expected P2 or F<d>")
        object.__setattr__(self, "blowup_orbits", tuple(int(k) for k in self.blowup_orbits))
        if any(k < 1 for k in self.blowup_orbits):
            raise InputError("orbit sizes must be positive")

    # -- basic shape -------------------------------------------------------

    @cached_property
    def hirzebruch_d(self) -> int | None:
        m = _BASE_RE.match(self.base)
        return int(m.group(2)) if m.group(2) is not None else None

    @cached_property
    def base_rank(self) -> int:
        return 1 if self.hirzebruch_d is None else 2

    @cached_property
    def num_blown(self) -> int:
        return sum(self.blowup_orbits)

    @cached_property
    def picard_rank(self) -> int:
        return self.base_rank + self.num_blown

    @cached_property
    def labels(self) -> tuple[str, ...]:
        head = ("H",) if self.hirzebruch_d is None else ("s", "h")
        return head + tuple(f"E{i + 1}" for i in range(self.num_blown))

    @cached_property
    def gram(self) -> tuple[tuple[int, ...], ...]:
        n = self.picard_rank
        g = [[0] * n for _ in range(n)]
        if self.hirzebruch_d is None:
            g[0][0] = 1
        else:
            g[0][0] = -self.hirzebruch_d
            g[0][1] = g[1][0] = 1
        for i in range(self.base_rank, n):
            g[i][i] = -1
        return tuple(tuple(row) for row in g)

    @cached_property
    def canonical(self) -> DivisorClass:
        ones = (1,) * self.num_blown
        if self.hirzebruch_d is None:
            return DivisorClass((-3,) + ones)
        return DivisorClass((-2, -(2 + self.hirzebruch_d)) + ones)

    @cached_property
    def degree(self) -> int:
        return self.intersect(self.canonical, self.canonical)

    def orbit_ranges(self) -> list[range]:
        out = []
        start = self.base_rank
        for k in self.blowup_orbits:
            out.append(range(start, start + k))
            start += k
        return out

    # -- divisor construction ----------------------------------------------

    def divisor(self, coeffs: Iterable[int]) -> DivisorClass:
        c = tuple(int(x) for x in coeffs)
        if len(c) != self.picard_rank:
            raise InputError(
                f"expected {self.picard_rank} coefficients, got {len(c)}"
            )
        return DivisorClass(c)

    def basis_class(self, label: str) -> DivisorClass:
        if label == "K":
            return self.canonical
        try:
            i = self.labels.index(label)
        except ValueError:
            raise InputError(f"no basis class {label!r} on {self.describe()}") from None
        return DivisorClass(tuple(int(j == i) for j in range(self.picard_rank)))

    def zero_divisor(self) -> DivisorClass:
        return DivisorClass((0,) * self.picard_rank)

    def exceptional_classes(self) -> list[DivisorClass]:
        return [self.basis_class(f"E{i + 1}") for i in range(self.num_blown)]

    def describe(self) -> str:
        if not self.blowup_orbits:
            return self.base
        inner = ",".join(str(k) for k in self.blowup_orbits)
        return f"{self.base}[{inner}]"

    # -- the bilinear form and the r-class predicate ------------------------

    def intersect(self, a: DivisorClass, b: DivisorClass) -> int:
        if len(a.coords) != self.picard_rank or len(b.coords) != self.picard_rank:
            raise InputError("divisor does not live on this surface (length mismatch)")
        g = self.gram
        return sum(
            x * sum(g[i][j] * y for j, y in enumerate(b.coords))
            for i, x in enumerate(a.coords)
        )

    def r_class_value(self, d: DivisorClass) -> int | None:
        self_int = self.intersect(d, d)
        if self_int + self.intersect(d, self.canonical) == -2:
            return self_int
        return None

    def dual_class(self, d: DivisorClass, mode: DualMode = "AntiCanonical") -> DivisorClass:
        if mode == "AntiCanonical":
            return -self.canonical - d
        if mode == "TwiceAntiCanonical":
            return -2 * self.canonical - d
        raise InputError(f"unknown dual mode {mode!r}")

    def blow_up(self, orbit_size: int) -> "SurfaceModel":
        if orbit_size < 1:
            raise InputError("orbit size must be positive")
        return SurfaceModel(self.base, self.blowup_orbits + (orbit_size,))

    # -- enumeration ---------------------------------------------------------

    def enumerate_r_classes(self, r: int) -> set[DivisorClass]:
        if r not in (-2, -1, 0, 1):
            raise InputError(f"r must be one of -2,-1,0,1, got {r}")
        if self.degree < 3 and r >= 0:
            raise UnsupportedRangeError(
                f"complete enumeration of {r}-classes is only supported in degree >= 3 "
                f"(surface {self.describe()} has degree {self.degree})"
            )
        return self._r_classes_any_degree(r)

    def _r_classes_any_degree(self, r: int) -> set[DivisorClass]:
        # Complete bounded search; sound whenever K^2 >= 1, where the
        # Cauchy-Schwarz bound on the exceptional part closes the window.
        if self.degree < 1:
            raise UnsupportedRangeError(
                f"enumeration needs degree >= 1, surface {self.describe()} has {self.degree}"
            )
        c = 2 + r
        n = self.num_blown
        found: set[DivisorClass] = set()
        if self.hirzebruch_d is None:
            if n == 0:
                if c % 3 == 0 and (c // 3) ** 2 == r:
                    found.add(self.divisor((c // 3,)))
                return found
            # D = a.H - sum b_i E_i with sum b = 3a - c, sum b^2 = a^2 - r
            for a in _quad_solutions(9 - n, -6 * c, c * c + n * r):
                s, q = 3 * a - c, a * a - r
                if q < 0:
                    continue
                for b in _vectors_with_sum_and_square(n, s, q):
                    found.add(self.divisor((a,) + tuple(-x for x in b)))
            return found
        d = self.hirzebruch_d
        if n == 0:
            # 2b^2 - c.b + r = 0 factors as (2b - r)(b - 1)
            for beta in {1} | ({r // 2} if r % 2 == 0 else set()):
                num = (d - 2) * beta + c
                if num % 2 == 0:
                    alpha = num // 2
                    cand = self.divisor((beta, alpha))
                    if self.r_class_value(cand) == r:
                        found.add(cand)
            return found
        # D = alpha.h + beta.s - sum b_i E_i
        for beta in _quad_solutions(8 - n, -4 * c, 4 * r):
            a2 = 4
            a1 = -(4 * (d - 2) * beta + 2 * n * beta + 4 * c)
            a0 = ((d - 2) ** 2 + n * d) * beta ** 2 + 2 * (d - 2) * c * beta + c * c + n * r
            for alpha in _quad_solutions(a2, a1, a0):
                s = 2 * alpha - (d - 2) * beta - c
                q = 2 * alpha * beta - d * beta ** 2 - r
                if q < 0:
                    continue
                for b in _vectors_with_sum_and_square(n, s, q):
                    found.add(self.divisor((beta, alpha) + tuple(-x for x in b)))
        return found


def _quad_solutions(a2: int, a1: int, a0: int) -> list[int]:
    """All integers x with a2*x^2 + a1*x + a0 <= 0, for a2 > 0."""
    if a2 <= 0:
        raise ValueError("window is unbounded")
    disc = a1 * a1 - 4 * a2 * a0
    if disc < 0:
        return []
    s = isqrt(disc)
    lo = (-a1 - s) // (2 * a2) - 1
    hi = (-a1 + s) // (2 * a2) + 2
    return [x for x in range(lo, hi + 1) if a2 * x * x + a1 * x + a0 <= 0]


def _vectors_with_sum_and_square(n: int, s: int, q: int) -> Iterator[tuple[int, ...]]:
    """All integer vectors of length n with sum s and sum of squares q."""
    if n == 0:
        if s == 0 and q == 0:
            yield ()
        return
    if n == 1:
        if s * s == q:
            yield (s,)
        return
    # (s - b)^2 <= (n-1)(q - b^2) prunes the head coordinate
    for b in _quad_solutions(n, -2 * s, s * s - (n - 1) * q):
        if b * b > q:
            continue
        for rest in _vectors_with_sum_and_square(n - 1, s - b, q - b * b):
            yield (b,) + rest


# -- operation-style wrappers -------------------------------------------------

def intersect(surface: SurfaceModel, a: DivisorClass, b: DivisorClass) -> int:
    return surface.intersect(a, b)


def canonical_class(surface: SurfaceModel) -> DivisorClass:
    return surface.canonical


def r_class_value(surface: SurfaceModel, d: DivisorClass) -> int | None:
    return surface.r_class_value(d)


def enumerate_r_classes(surface: SurfaceModel, r: int) -> set[DivisorClass]:
    return surface.enumerate_r_classes(r)


def dual_class(surface: SurfaceModel, d: DivisorClass, mode: DualMode = "AntiCanonical") -> DivisorClass:
    return surface.dual_class(d, mode)


def blow_up(surface: SurfaceModel, orbit_size: int) -> SurfaceModel:
    return surface.blow_up(orbit_size)
