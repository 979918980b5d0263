"""Finite matrix groups on a Picard lattice.

A group is handed over by generator matrices in the surface basis and closed
by multiplication.  On top of that sit orbit analysis, the rank of the fixed
sublattice, invariance tests for block collections, extraction of atoms from
an orbitwise contraction, a permutation-basis certificate for the K-group,
group cohomology H^1 with lattice coefficients, and the signed G-set sum
attached to a chain of equivariant blow-ups and blow-downs.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import intlinalg
from .catalog.core import MoriFibreSpace, sigma_kclass, standard_sod
from .errors import ActionError, InputError, UnsupportedRangeError, VerificationError
from .ktheory import KClass, torsion_class
from .lattice import DivisorClass, SurfaceModel
from .mutation import Collection
from .textio import render_kclass

Matrix = tuple[tuple[int, ...], ...]

DEFAULT_CLOSURE_CAP = 10_000
DEFAULT_H1_CAP = 48

K_NEF = "K-nef"


def _freeze(mat) -> Matrix:
    return tuple(tuple(int(x) for x in row) for row in mat)


def _identity(n: int) -> Matrix:
    return _freeze(intlinalg.identity(n))


def _apply(mat: Matrix, d: DivisorClass) -> DivisorClass:
    return DivisorClass(tuple(intlinalg.mat_vec(mat, list(d.coords))))


def _close(generators, cap: int) -> tuple[Matrix, ...]:
    """Multiplicative closure by breadth-first products, identity first."""
    if not generators:
        raise InputError("closure needs at least one matrix")
    n = len(generators[0])
    elements = [_identity(n)]
    seen = set(elements)
    frontier = elements[:]
    while frontier:
        nxt = []
        for m in frontier:
            for g in generators:
                p = _freeze(intlinalg.mat_mul(g, m))
                if p not in seen:
                    seen.add(p)
                    elements.append(p)
                    nxt.append(p)
                    if len(elements) > cap:
                        raise ActionError(
                            f"group closure exceeded the cap of {cap} elements"
                        )
        frontier = nxt
    return tuple(elements)


@dataclass(frozen=True)
class GroupAction:
    """Closed matrix group on the Picard lattice of one surface model.

    Built through :func:`group_action`, which checks the generators and
    enumerates the closure; `orders` lists the multiplicative order of each
    element, aligned with `elements`.
    """

    surface: SurfaceModel
    generators: tuple[Matrix, ...]
    elements: tuple[Matrix, ...]
    orders: tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    def identity(self) -> Matrix:
        return self.elements[0]

    def element_order(self, mat) -> int:
        mat = _freeze(mat)
        one = self.identity()
        p, k = mat, 1
        while p != one:
            p = _freeze(intlinalg.mat_mul(mat, p))
            k += 1
            if k > self.order:
                raise ActionError("matrix is not an element of the closed group")
        return k


def group_action(surface: SurfaceModel, generators, cap: int = DEFAULT_CLOSURE_CAP) -> GroupAction:
    n = surface.picard_rank
    gram = [list(row) for row in surface.gram]
    k = surface.canonical
    frozen = []
    for g in generators:
        g = _freeze(g)
        if len(g) != n or any(len(row) != n for row in g):
            raise ActionError(f"generator is not a {n}x{n} matrix")
        gt = intlinalg.transpose(g)
        if intlinalg.mat_mul(gt, intlinalg.mat_mul(gram, list(map(list, g)))) != gram:
            raise ActionError("generator does not preserve the intersection form")
        if _apply(g, k) != k:
            raise ActionError("generator moves the canonical class")
        frozen.append(g)
    elements = _close(frozen, cap) if frozen else (_identity(n),)
    one = elements[0]
    orders = []
    for m in elements:
        p, k = m, 1
        while p != one:
            p = _freeze(intlinalg.mat_mul(m, p))
            k += 1
        orders.append(k)
    return GroupAction(surface, tuple(frozen), elements, tuple(orders))


# -- fixed sublattice and orbits ----------------------------------------------

def invariant_rank(action: GroupAction) -> int:
    """Rank of the common fixed sublattice of all generators."""
    n = action.surface.picard_rank
    rows = []
    for g in action.generators:
        for i in range(n):
            rows.append([g[i][j] - (1 if i == j else 0) for j in range(n)])
    if not rows:
        return n
    return len(intlinalg.kernel_basis(rows))


def orbits(action: GroupAction, classes) -> tuple[tuple[DivisorClass, ...], ...]:
    """Orbit partition of a stable class set, deterministically ordered."""
    pool = sorted(set(classes), key=lambda d: d.coords)
    index = {d: i for i, d in enumerate(pool)}
    for d in pool:
        for g in action.generators:
            if _apply(g, d) not in index:
                raise ActionError(
                    f"class set is not stable: generator moves {d.coords} outside the set"
                )
    assigned = [False] * len(pool)
    parts = []
    for start in pool:
        if assigned[index[start]]:
            continue
        orbit = [start]
        assigned[index[start]] = True
        queue = [start]
        while queue:
            d = queue.pop()
            for g in action.generators:
                e = _apply(g, d)
                if not assigned[index[e]]:
                    assigned[index[e]] = True
                    orbit.append(e)
                    queue.append(e)
        parts.append(tuple(sorted(orbit, key=lambda d: d.coords)))
    return tuple(parts)


def is_invariant_collection(collection: Collection, action: GroupAction) -> bool:
    """Every block setwise stable under every generator.

    Transport of a K-class keeps rank and chi: a form-preserving K-fixing
    matrix leaves the Riemann-Roch value of any (rank, c1) pair alone.
    """
    if collection.surface != action.surface:
        raise InputError("collection and action live on different surface models")
    for block in collection.blocks:
        vectors = [list(c.vector) for c in block.classes()]
        if block.opaque:
            span = intlinalg.hermite_row_form(vectors)
            for g in action.generators:
                moved = [list(sigma_kclass(c, g).vector) for c in block.classes()]
                if intlinalg.hermite_row_form(moved) != span:
                    return False
        else:
            members = {tuple(v) for v in vectors}
            for g in action.generators:
                moved = {sigma_kclass(c, g).vector for c in block.classes()}
                if moved != members:
                    return False
    return True


# -- transitive G-sets and the Burnside sum -----------------------------------

@dataclass(frozen=True)
class TransitiveGSet:
    """A transitive action, recorded as orbit size plus a point stabilizer.

    `group` holds the enumerated elements of the ambient group when known;
    with it the orbit-stabilizer count is checked and equality can test
    stabilizer conjugacy.  Without it, comparison falls back to sizes.
    """

    size: int
    stabilizer: frozenset | None = None
    group: tuple[Matrix, ...] | None = None

    def __post_init__(self) -> None:
        if self.size < 1:
            raise InputError("a transitive G-set has positive size")
        if self.stabilizer is not None and self.group is not None:
            if self.size * len(self.stabilizer) != len(self.group):
                raise InputError("orbit size times stabilizer order must be the group order")


def gsets_equal(a: TransitiveGSet, b: TransitiveGSet) -> bool:
    """Equal sizes and conjugate stabilizers; size-only when data is partial."""
    if a.size != b.size:
        return False
    if a.stabilizer is None or b.stabilizer is None:
        return True
    if a.group is None or a.group != b.group:
        return a.stabilizer == b.stabilizer
    for h in a.group:
        hinv = _freeze(intlinalg.mat_inverse_integer(h))
        conj = frozenset(
            _freeze(intlinalg.mat_mul(h, intlinalg.mat_mul(s, hinv))) for s in a.stabilizer
        )
        if conj == b.stabilizer:
            return True
    return False


def orbit_gset(action: GroupAction, classes) -> TransitiveGSet:
    parts = orbits(action, classes)
    if len(parts) != 1:
        raise ActionError(f"expected a single orbit, found {len(parts)}")
    rep = parts[0][0]
    stab = frozenset(g for g in action.elements if _apply(g, rep) == rep)
    return TransitiveGSet(len(parts[0]), stab, action.elements)


def _reduce_terms(pairs):
    out = []
    for coeff, gset in pairs:
        if coeff == 0:
            continue
        for entry in out:
            if gsets_equal(entry[1], gset):
                entry[0] += coeff
                break
        else:
            out.append([coeff, gset])
    return tuple((c, g) for c, g in out if c != 0)


@dataclass(frozen=True, eq=False)
class BurnsideElement:
    """Signed formal sum of transitive G-sets; construction cancels."""

    terms: tuple = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", _reduce_terms(self.terms))

    def __add__(self, other: "BurnsideElement") -> "BurnsideElement":
        return BurnsideElement(self.terms + other.terms)

    def __neg__(self) -> "BurnsideElement":
        return BurnsideElement(tuple((-c, g) for c, g in self.terms))

    def __sub__(self, other: "BurnsideElement") -> "BurnsideElement":
        return self + (-other)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, BurnsideElement):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self) -> int:
        return hash(tuple(sorted((c, g.size) for c, g in self.terms)))


def burnside_invariant(steps) -> BurnsideElement:
    """Signed orbit sum of a blow-up/blow-down chain.

    Each step is a pair (kind, orbit) with kind "BlowUp" or "BlowDown"; a
    blow-down contributes the orbit positively, a blow-up negatively.
    """
    terms = []
    for kind, orbit in steps:
        if kind == "BlowDown":
            terms.append((1, orbit))
        elif kind == "BlowUp":
            terms.append((-1, orbit))
        else:
            raise InputError(f"unknown step kind {kind!r}; expected BlowUp or BlowDown")
    return BurnsideElement(tuple(terms))


# -- atoms ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Atom:
    """One indivisible equivariant piece of a decomposition.

    kind "permutation" carries a transitive G-set and an optional symbolic
    twist label; kind "opaque" carries a shape label plus the degree of the
    model it sits on.  `classes` is the K-class payload the piece was read
    off from (kept for certificate assembly, ignored by equality).
    """

    kind: str
    gset: TransitiveGSet | None = None
    twist: str | None = None
    shape: str | None = None
    degree: int | None = None
    classes: tuple = ()

    def __post_init__(self) -> None:
        if self.kind == "permutation":
            if self.gset is None:
                raise InputError("permutation atoms need a G-set")
        elif self.kind == "opaque":
            if self.shape is None:
                raise InputError("opaque atoms need a shape label")
        else:
            raise InputError(f"unknown atom kind {self.kind!r}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Atom):
            return NotImplemented
        if self.kind != other.kind:
            return False
        if self.kind == "permutation":
            return self.twist == other.twist and gsets_equal(self.gset, other.gset)
        return self.shape == other.shape and self.degree == other.degree

    def __hash__(self) -> int:
        if self.kind == "permutation":
            return hash(("permutation", self.gset.size, self.twist))
        return hash(("opaque", self.shape, self.degree))


def permutation_atom(gset: TransitiveGSet, twist: str | None = None, classes=()) -> Atom:
    return Atom("permutation", gset=gset, twist=twist, classes=tuple(classes))


def opaque_atom(shape: str, degree: int, classes=()) -> Atom:
    return Atom("opaque", shape=shape, degree=degree, classes=tuple(classes))


def _embedding_columns(surface: SurfaceModel, kept: list[int]) -> list[int]:
    cols = list(range(surface.base_rank))
    ranges = surface.orbit_ranges()
    for i in kept:
        cols.extend(ranges[i])
    return cols


def _pull_class(surface: SurfaceModel, cols: list[int], cls: KClass) -> KClass:
    # Pullback along the contraction: contracted directions get coefficient
    # zero, so both self-intersection and the K-pairing survive and chi
    # carries over unchanged.
    c = [0] * surface.picard_rank
    for small, big in enumerate(cols):
        c[big] = cls.c1.coords[small]
    return KClass(surface, cls.rank, DivisorClass(tuple(c)), cls.chi)


def _class_orbits(action: GroupAction, classes) -> list[list[KClass]]:
    """Orbit partition of a list of K-classes; raises when unstable."""
    vectors = {c.vector: i for i, c in enumerate(classes)}
    parts = []
    assigned = [False] * len(classes)
    for i, start in enumerate(classes):
        if assigned[i]:
            continue
        orbit = [start]
        assigned[i] = True
        queue = [start]
        while queue:
            c = queue.pop()
            for g in action.generators:
                t = sigma_kclass(c, g)
                j = vectors.get(t.vector)
                if j is None:
                    raise ActionError(
                        "minimal-model block is not invariant under the action"
                    )
                if not assigned[j]:
                    assigned[j] = True
                    orbit.append(classes[j])
                    queue.append(classes[j])
        parts.append(orbit)
    return parts


def _kclass_stabilizer(action: GroupAction, cls: KClass) -> frozenset:
    return frozenset(
        g for g in action.elements if sigma_kclass(cls, g).vector == cls.vector
    )


def atom_multiset(surface: SurfaceModel, action: GroupAction, contraction) -> list[Atom]:
    """Atoms of a surface presented by contracting blown orbits to a minimal
    model.

    `contraction` lists indices of the surface's blow-up orbits to contract,
    terminated by the minimal model (a MoriFibreSpace) or the K_NEF marker.
    Each contracted orbit yields one non-twisted permutation atom; the
    minimal model contributes the atoms of its standard decomposition,
    split into orbits under the action, with opaque blocks kept opaque.
    """
    if action.surface != surface:
        raise InputError("action lives on a different surface model")
    steps = list(contraction)
    if not steps:
        raise InputError("contraction must at least name a minimal model or K-nef marker")
    terminal = steps[-1]
    orbit_indices = steps[:-1]
    if not (isinstance(terminal, MoriFibreSpace) or terminal == K_NEF):
        raise InputError("contraction must end in a MoriFibreSpace or the K-nef marker")
    ranges = surface.orbit_ranges()
    chosen = []
    for i in orbit_indices:
        if not isinstance(i, int) or not 0 <= i < len(ranges):
            raise ActionError(f"no blow-up orbit with index {i!r} on {surface.describe()}")
        if i in chosen:
            raise ActionError(f"blow-up orbit {i} contracted twice")
        chosen.append(i)
    blown_atoms = []
    for i in chosen:
        members = [surface.basis_class(f"E{j - surface.base_rank + 1}") for j in ranges[i]]
        parts = orbits(action, members)
        if len(parts) != 1:
            raise ActionError(f"blow-up orbit {i} splits under the action; not one orbit")
        gset = orbit_gset(action, members)
        payload = tuple(torsion_class(surface, e, -1) for e in parts[0])
        blown_atoms.append(permutation_atom(gset, classes=payload))
    kept = [i for i in range(len(ranges)) if i not in chosen]
    residual = SurfaceModel(surface.base, tuple(surface.blowup_orbits[i] for i in kept))
    cols = _embedding_columns(surface, kept)
    atoms: list[Atom] = []
    if terminal == K_NEF:
        atoms.append(opaque_atom(K_NEF, residual.degree))
        return atoms + blown_atoms
    if terminal.surface != residual:
        raise ActionError(
            f"contracting orbits {chosen} of {surface.describe()} leaves "
            f"{residual.describe()}, not {terminal.surface.describe()}"
        )
    sod = standard_sod(terminal)
    for block in sod.blocks:
        pulled = [_pull_class(surface, cols, c) for c in block.classes()]
        if block.opaque:
            atoms.append(opaque_atom("O-perp", terminal.degree, classes=tuple(pulled)))
            continue
        for orbit in _class_orbits(action, pulled):
            stab = _kclass_stabilizer(action, orbit[0])
            gset = TransitiveGSet(len(orbit), stab, action.elements)
            atoms.append(permutation_atom(gset, classes=tuple(orbit)))
    return atoms + blown_atoms


# -- permutation-basis certificate ----------------------------------------------

def permutation_basis_certificate(surface: SurfaceModel, atoms, action: GroupAction) -> dict:
    """Assemble the K-group basis carried by permutation atoms and verify
    every generator permutes it.

    Fails loudly: any opaque or twisted atom, a payload that is not a
    Z-basis, or a generator moving a basis vector off the basis raises
    ActionError.  The certificate lists the basis and one permutation
    (with its matrix) per generator; the trivial action gets the identity
    permutation so the certificate is never empty.
    """
    classes = []
    for atom in atoms:
        if atom.kind != "permutation":
            raise ActionError("permutation basis needs permutation atoms only")
        if atom.twist is not None:
            raise ActionError("permutation basis needs non-twisted atoms")
        if not atom.classes:
            raise ActionError("atom carries no K-class payload to assemble")
        classes.extend(atom.classes)
    want = surface.picard_rank + 2
    if len(classes) != want:
        raise ActionError(f"expected {want} basis objects, got {len(classes)}")
    rows = [list(c.vector) for c in classes]
    if abs(intlinalg.det(rows)) != 1:
        raise ActionError("atom payload is not a Z-basis of the K-group")
    index = {c.vector: i for i, c in enumerate(classes)}
    gens = action.generators or (action.identity(),)
    permutations = []
    matrices = []
    for g in gens:
        perm = []
        for c in classes:
            j = index.get(sigma_kclass(c, g).vector)
            if j is None:
                raise ActionError("a generator moves a basis object off the basis")
            perm.append(j)
        mat = [[0] * want for _ in range(want)]
        for src, dst in enumerate(perm):
            mat[dst][src] = 1
        permutations.append(tuple(perm))
        matrices.append(_freeze(mat))
    return {
        "ok": True,
        "size": want,
        "basis": [render_kclass(c) for c in classes],
        "permutations": permutations,
        "matrices": matrices,
    }


# -- G-minimality, numerically ---------------------------------------------------

def minimality_proxy(action: GroupAction) -> dict:
    """No stable set of pairwise-disjoint (-1)-classes exists.

    A purely lattice-side stand-in for G-minimality: any stable set of
    pairwise-disjoint (-1)-classes contains a single stable orbit with the
    same property, so scanning orbits is exhaustive.  The certificate is
    labeled accordingly; it does not see actual curves.
    """
    surface = action.surface
    classes = sorted(surface.enumerate_r_classes(-1), key=lambda d: d.coords)
    out = {"label": "numerical proxy", "minimal": True, "witness": None}
    if not classes:
        return out
    for orbit in orbits(action, classes):
        if all(
            surface.intersect(a, b) == 0
            for i, a in enumerate(orbit)
            for b in orbit[i + 1 :]
        ):
            out["minimal"] = False
            out["witness"] = [list(d.coords) for d in orbit]
            break
    return out


# -- H^1 with lattice coefficients ------------------------------------------------

def _bar_h1(elements: tuple[Matrix, ...]) -> list[int]:
    """ker d1 / im d0 of the inhomogeneous bar complex, by Smith reduction."""
    n = len(elements[0])
    order = len(elements)
    pos = {m: i for i, m in enumerate(elements)}
    rows = []
    for g in elements:
        for h in elements:
            gh = _freeze(intlinalg.mat_mul(g, h))
            for r in range(n):
                row = [0] * (order * n)
                for k in range(n):
                    row[pos[h] * n + k] += g[r][k]
                row[pos[gh] * n + r] -= 1
                row[pos[g] * n + r] += 1
                rows.append(row)
    kernel = intlinalg.kernel_basis(rows)
    if not kernel:
        return []
    basis_cols = [[kernel[j][i] for j in range(len(kernel))] for i in range(order * n)]
    coords = []
    for k in range(n):
        image = [0] * (order * n)
        for g in elements:
            for r in range(n):
                image[pos[g] * n + r] = g[r][k] - (1 if r == k else 0)
        sol = intlinalg.solve(basis_cols, image)
        if sol is None:
            raise VerificationError("coboundary falls outside the cocycle lattice")
        coords.append(sol)
    factors = intlinalg.abelian_quotient(len(kernel), coords)
    if 0 in factors:
        raise VerificationError("H^1 came out infinite; the input is not a finite group action")
    return [f for f in factors if f > 1]


def h1_lattice(generators, cap: int = DEFAULT_H1_CAP) -> list[int]:
    """Invariant factors of H^1 for a matrix group given by generators.

    Pure lattice arithmetic: no surface, no form or K constraint, so it also
    serves actions that no surface model can host.
    """
    elements = _close([_freeze(g) for g in generators], cap)
    return _bar_h1(elements)


def h1_picard(action: GroupAction, cap: int = DEFAULT_H1_CAP) -> list[int]:
    """Invariant factors of H^1(G, Pic) for an enumerated surface action."""
    if action.order > cap:
        raise UnsupportedRangeError(
            f"group of order {action.order} exceeds the H^1 cap of {cap}"
        )
    return _bar_h1(action.elements)


def h1_cyclic(generator, cap: int = DEFAULT_H1_CAP) -> list[int]:
    """ker(Norm)/im(g - 1) for the cyclic group generated by one matrix.

    Independent route to H^1 for cyclic groups; the bar complex must agree.
    """
    g = _freeze(generator)
    n = len(g)
    one = _identity(n)
    powers = [one]
    p = g
    while p != one:
        powers.append(p)
        p = _freeze(intlinalg.mat_mul(g, p))
        if len(powers) > cap:
            raise UnsupportedRangeError(f"cyclic order exceeds the cap of {cap}")
    norm = [[sum(m[i][j] for m in powers) for j in range(n)] for i in range(n)]
    kernel = intlinalg.kernel_basis(norm)
    if not kernel:
        return []
    basis_cols = [[kernel[j][i] for j in range(len(kernel))] for i in range(n)]
    coords = []
    for k in range(n):
        image = [g[r][k] - (1 if r == k else 0) for r in range(n)]
        sol = intlinalg.solve(basis_cols, image)
        if sol is None:
            raise VerificationError("(g - 1) image falls outside ker(Norm)")
        coords.append(sol)
    factors = intlinalg.abelian_quotient(len(kernel), coords)
    if 0 in factors:
        raise VerificationError("H^1 came out infinite; the matrix has infinite order")
    return [f for f in factors if f > 1]
