"""Mori fibre spaces, their standard decompositions, and the numerical
classification of links between them.

Everything is modeled on the Picard/K lattice: a fibre space is a surface
model plus a base kind (and the fibration 0-class when the base is a
curve), and the standard decomposition is built from enumerated r-classes
or, in the opaque cases, from the solved orthogonality span.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

from .. import intlinalg
from ..errors import InputError, UnsupportedRangeError
from ..ktheory import (
    KClass,
    class_from_vector,
    euler_pairing,
    line_bundle_class,
    structure_class,
)
from ..lattice import DivisorClass, SurfaceModel
from ..mutation import Block, Collection, block_of_classes
from ..textio import render_divisor

BaseKind = Literal["Point", "RationalCurve", "Curve"]

RICH_POINT_DEGREES = (9, 8, 6, 5)
RICH_CURVE_DEGREES = (8, 6, 5)


@dataclass(frozen=True)
class MoriFibreSpace:
    surface: SurfaceModel
    base: BaseKind
    genus: int = 0
    fibration_class: DivisorClass | None = None

    def __post_init__(self) -> None:
        deg = self.surface.degree
        if self.base == "Point":
            if self.fibration_class is not None:
                raise InputError("a point base takes no fibration class")
            if deg == 7 or not 1 <= deg <= 9:
                raise InputError(f"no rank-one fibre space of degree {deg} over a point")
        elif self.base == "RationalCurve":
            if deg == 7 or deg > 8:
                raise InputError(f"no conic bundle of degree {deg} over a rational curve")
            self._check_fibration()
        elif self.base == "Curve":
            if self.genus < 1:
                raise InputError("a Curve base needs genus >= 1; use RationalCurve for genus 0")
            if deg > 8 * (1 - self.genus):
                raise InputError(
                    f"degree {deg} conic bundle impossible over a genus-{self.genus} curve"
                )
            self._check_fibration()
        else:
            raise InputError(f"unknown base kind {self.base!r}")

    def _check_fibration(self) -> None:
        if self.fibration_class is None:
            raise InputError("a conic bundle needs its fibration 0-class")
        if self.surface.r_class_value(self.fibration_class) != 0:
            raise InputError("fibration class must be a 0-class")

    @property
    def degree(self) -> int:
        return self.surface.degree


def birationally_rich(mfs: MoriFibreSpace) -> bool:
    if mfs.base == "Point":
        return mfs.degree in RICH_POINT_DEGREES
    if mfs.base == "RationalCurve":
        return mfs.degree in RICH_CURVE_DEGREES
    return False


# -- orthogonality spans ----------------------------------------------------

def orthogonal_span(
    surface: SurfaceModel,
    left_of: list[KClass],
    right_of: list[KClass],
) -> tuple[KClass, ...]:
    """Basis of the lattice of classes x with chi(x, y) = 0 for y in
    `left_of` and chi(z, x) = 0 for z in `right_of` (x sits to the left of
    the first group and to the right of the second).  Saturated, so the
    span is exactly the K-theory of the orthogonal subcategory."""
    dim = surface.picard_rank + 2
    rows = []
    for y in left_of:
        rows.append([euler_pairing(_unit_vector(surface, i), y) for i in range(dim)])
    for z in right_of:
        rows.append([euler_pairing(z, _unit_vector(surface, i)) for i in range(dim)])
    if not rows:
        rows = [[0] * dim]
    basis = intlinalg.kernel_basis(rows)
    return tuple(class_from_vector(surface, tuple(v)) for v in basis)


def _unit_vector(surface: SurfaceModel, i: int) -> KClass:
    dim = surface.picard_rank + 2
    vec = [0] * dim
    vec[i] = 1
    return class_from_vector(surface, tuple(vec))


def opaque_block_for(
    collection_blocks: list[Block],
    position: int,
    surface: SurfaceModel,
    expected_dim: int | None = None,
) -> Block:
    """Solve for the opaque block at `position` from the surrounding
    blocks' orthogonality constraints."""
    left_of: list[KClass] = []
    right_of: list[KClass] = []
    for q, blk in enumerate(collection_blocks):
        if blk is None:
            continue
        if q < position:
            left_of.extend(o.cls for o in blk.objects)
        elif q > position:
            right_of.extend(o.cls for o in blk.objects)
    span = orthogonal_span(surface, left_of, right_of)
    if expected_dim is not None and len(span) != expected_dim:
        raise InputError(
            f"opaque span has rank {len(span)}, expected {expected_dim}"
        )
    return block_of_classes(span, opaque=True)


# -- standard decompositions -------------------------------------------------

def _sorted_classes(classes) -> list[DivisorClass]:
    return sorted(classes, key=lambda d: d.coords)


def _label_for(surface: SurfaceModel, d: DivisorClass) -> str:
    if not any(d.coords):
        return "O"
    return f"O({render_divisor(surface, -1 * d)})"


def _line_block(surface: SurfaceModel, divisors) -> Block:
    return block_of_classes(
        [line_bundle_class(surface, -1 * d) for d in divisors],
        labels=[_label_for(surface, d) for d in divisors],
    )


def standard_sod(mfs: MoriFibreSpace) -> Collection:
    """The standard decomposition: explicit blocks in the rich cases, an
    opaque orthogonal span in front of the base pieces otherwise."""
    s = mfs.surface
    deg = mfs.degree
    o_block = block_of_classes([structure_class(s)], labels=["O"])
    if mfs.base == "Curve":
        raise UnsupportedRangeError(
            "surface models cover rational surfaces only; no model over a positive-genus curve"
        )
    if mfs.base == "Point":
        if deg == 9:
            h = s.basis_class("H")
            return Collection(
                s,
                (
                    _line_block(s, [2 * h]),
                    _line_block(s, [h]),
                    o_block,
                ),
            )
        if deg == 8:
            zero = _sorted_classes(s.enumerate_r_classes(0))
            if len(zero) != 2:
                raise InputError("a rank-one degree-8 surface over a point carries two rulings")
            h1, h2 = zero
            return Collection(
                s,
                (_line_block(s, [h1 + h2]), _line_block(s, [h1, h2]), o_block),
            )
        if deg == 6:
            ones = _sorted_classes(s.enumerate_r_classes(1))
            zeros = _sorted_classes(s.enumerate_r_classes(0))
            return Collection(
                s,
                (_line_block(s, ones), _line_block(s, zeros), o_block),
            )
        if deg == 5:
            zeros = _sorted_classes(s.enumerate_r_classes(0))
            e_block = block_of_classes([e_bundle_class(s)], labels=["E"])
            return Collection(s, (e_block, _line_block(s, zeros), o_block))
        # degrees 4..1: opaque orthogonal complement of the structure sheaf
        opaque = opaque_block_for([None, o_block], 0, s, s.picard_rank + 1)
        return Collection(s, (opaque, o_block))
    # rational curve base
    f = mfs.fibration_class
    fib_block = _line_block(s, [f])
    if deg == 8:
        if s.base == "P2" or s.num_blown:
            raise InputError("a degree-8 conic bundle is a ruled surface without blown points")
        if f == s.basis_class("h"):
            section = s.basis_class("s")
        elif s.hirzebruch_d == 0 and f == s.basis_class("s"):
            section = s.basis_class("h")
        else:
            raise InputError("fibration class is not a ruling of this surface")
        return Collection(
            s,
            (
                _line_block(s, [section + f]),
                _line_block(s, [section]),
                fib_block,
                o_block,
            ),
        )
    if deg == 6:
        ones = _sorted_classes(s.enumerate_r_classes(1))
        zeros = [z for z in _sorted_classes(s.enumerate_r_classes(0)) if z != f]
        if len(zeros) != 2:
            raise InputError("fibration class is not one of the three rulings")
        return Collection(
            s,
            (_line_block(s, ones), _line_block(s, zeros), fib_block, o_block),
        )
    if deg == 5:
        zeros = [z for z in _sorted_classes(s.enumerate_r_classes(0)) if z != f]
        if len(zeros) != 4:
            raise InputError("fibration class is not one of the five rulings")
        e_block = block_of_classes([e_bundle_class(s)], labels=["E"])
        return Collection(s, (e_block, _line_block(s, zeros), fib_block, o_block))
    # degree <= 4: opaque relative kernel, the pulled-back base pieces, O
    tail = [fib_block, o_block]
    opaque = opaque_block_for([None] + tail, 0, s, s.picard_rank)
    return Collection(s, (opaque, fib_block, o_block))


def e_bundle_class(surface: SurfaceModel) -> KClass:
    """Rank-2 class [O(-H_i)] + [O(-h_i)] on a degree-5 model, computed
    through all five ruling pairs and checked to be pair-independent."""
    if surface.degree != 5:
        raise InputError(f"expected a degree-5 model, got degree {surface.degree}")
    zeros = _sorted_classes(surface.enumerate_r_classes(0))
    k = surface.canonical
    values = []
    for h in zeros:
        big_h = -1 * k - h
        values.append(
            line_bundle_class(surface, -1 * big_h) + line_bundle_class(surface, -1 * h)
        )
    first = values[0]
    if any(v != first for v in values[1:]):
        raise InputError("ruling pairs disagree; the model is not a del Pezzo lattice")
    return first


# -- link classification ------------------------------------------------------

LinkType = Literal["I", "II", "III", "IV"]

TYPE_I_DEGREES = ((9, 8), (9, 5), (8, 6), (4, 3))
TYPE_II_POINT_SYMMETRIC = tuple(
    [(d, 1, d) for d in (9, 8, 6, 5, 4, 3, 2)]
    + [(d, 2, d) for d in (9, 8, 6, 5, 4, 3)]
    + [(9, 6, 9), (9, 3, 9), (8, 4, 8), (6, 4, 6), (6, 3, 6)]
)
TYPE_II_POINT_ASYMMETRIC = ((9, 7, 8), (9, 4, 5), (8, 5, 6), (8, 3, 5))
TYPE_IV_DEGREES = (1, 2, 4, 8)


@dataclass(frozen=True)
class LinkDescriptor:
    link_type: LinkType
    degrees: tuple[int, ...]
    base: Literal["Point", "Curve"] = "Point"


def validate_link(d: LinkDescriptor) -> bool:
    """Membership in the numerical classification of links."""
    t, degs = d.link_type, tuple(d.degrees)
    if t == "I":
        return degs in TYPE_I_DEGREES
    if t == "III":
        return tuple(reversed(degs)) in TYPE_I_DEGREES
    if t == "IV":
        if len(degs) == 1:
            return degs[0] in TYPE_IV_DEGREES
        return len(degs) == 2 and degs[0] == degs[1] and degs[0] in TYPE_IV_DEGREES
    if t == "II":
        if d.base == "Curve":
            if len(degs) == 2:
                return degs[0] == degs[1] and degs[0] <= 8
            if len(degs) == 3:
                return degs[0] == degs[2] and degs[0] <= 8 and degs[1] < degs[0]
            return False
        if len(degs) != 3:
            return False
        if degs in TYPE_II_POINT_SYMMETRIC:
            return True
        return degs in TYPE_II_POINT_ASYMMETRIC or tuple(reversed(degs)) in TYPE_II_POINT_ASYMMETRIC
    return False


def geiser_bertini_involution(degree: int, surface: SurfaceModel) -> list[list[int]]:
    """Matrix (columns act on divisor coordinates) of the involution
    D -> (2(D.K)/degree) K - D; degree 1 or 2 and the surface must have
    that degree."""
    if degree not in (1, 2):
        raise InputError("the involution exists in degrees 1 and 2 only")
    if surface.degree != degree:
        raise InputError(
            f"surface has degree {surface.degree}, the degree-{degree} involution needs {degree}"
        )
    n = surface.picard_rank
    k = surface.canonical
    mat = [[0] * n for _ in range(n)]
    for j in range(n):
        basis = surface.divisor(tuple(1 if i == j else 0 for i in range(n)))
        pairing = surface.intersect(basis, k)
        image = (2 * pairing // degree) * k - basis
        for i in range(n):
            mat[i][j] = image.coords[i]
    # involution sanity: squares to identity, isometry, fixes K
    assert intlinalg.mat_mul(mat, mat) == intlinalg.identity(n)
    assert intlinalg.mat_vec(mat, list(k.coords)) == list(k.coords)
    gram = [list(row) for row in surface.gram]
    assert intlinalg.mat_mul(intlinalg.transpose(mat), intlinalg.mat_mul(gram, mat)) == gram
    return mat


def apply_divisor_matrix(surface: SurfaceModel, mat, d: DivisorClass) -> DivisorClass:
    return surface.divisor(tuple(intlinalg.mat_vec(mat, list(d.coords))))


def sigma_kclass(a: KClass, mat) -> KClass:
    """Push a K-class through a Picard isometry fixing K: rank and
    holomorphic Euler characteristic are untouched."""
    return KClass(a.surface, a.rank, apply_divisor_matrix(a.surface, mat, a.c1), a.chi)
