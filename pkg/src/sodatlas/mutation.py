"""Mutation engine for numerically exceptional collections.

Everything here happens in the K-theory shadow: an object is its class, a
block is a tuple of classes, and a collection is legal when its Euler-pairing
Gram matrix is unipotent upper triangular outside opaque blocks.  Moves
rewrite collections; scripts replay move lists and log a verifiable record
per step.
"""

from __future__ import annotations

import os
import re
from collections import deque
from dataclasses import dataclass, replace

from . import intlinalg
from .errors import InputError, MoveError, VerificationError
from .ktheory import KClass, euler_pairing, twist
from .lattice import SurfaceModel
from .textio import render_kclass

DEPTH_ENV = "SODATLAS_DEPTH"
DEFAULT_SEARCH_DEPTH = 8


@dataclass(frozen=True)
class ExcObject:
    cls: KClass
    label: str = ""


@dataclass(frozen=True)
class Block:
    objects: tuple[ExcObject, ...]
    opaque: bool = False

    def __post_init__(self) -> None:
        if not self.objects:
            raise InputError("a block needs at least one object")
        object.__setattr__(self, "objects", tuple(self.objects))

    @property
    def size(self) -> int:
        return len(self.objects)

    def classes(self) -> tuple[KClass, ...]:
        return tuple(o.cls for o in self.objects)


@dataclass(frozen=True)
class Collection:
    surface: SurfaceModel
    blocks: tuple[Block, ...]
    full: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if not self.blocks:
            raise InputError("a collection needs at least one block")
        for b in self.blocks:
            for o in b.objects:
                if o.cls.surface != self.surface:
                    raise InputError("object lives on a different surface model")

    def objects(self) -> tuple[ExcObject, ...]:
        return tuple(o for b in self.blocks for o in b.objects)

    def classes(self) -> tuple[KClass, ...]:
        return tuple(o.cls for b in self.blocks for o in b.objects)

    @property
    def num_objects(self) -> int:
        return sum(b.size for b in self.blocks)


def block_of_classes(classes, opaque: bool = False, labels=None) -> Block:
    objs = []
    for i, c in enumerate(classes):
        label = labels[i] if labels else render_kclass(c)
        objs.append(ExcObject(c, label))
    return Block(tuple(objs), opaque=opaque)


def collection_of_classes(surface: SurfaceModel, blocks, full: bool = True) -> Collection:
    built = []
    for b in blocks:
        if isinstance(b, Block):
            built.append(b)
        else:
            built.append(block_of_classes(tuple(b)))
    return Collection(surface, tuple(built), full=full)


# -- legality -------------------------------------------------------------

@dataclass(frozen=True)
class CheckReport:
    ok: bool
    gram: tuple[tuple[int, ...], ...]
    violations: tuple[str, ...]


def _block_index(collection: Collection, flat: int) -> int:
    seen = 0
    for bi, b in enumerate(collection.blocks):
        seen += b.size
        if flat < seen:
            return bi
    raise IndexError(flat)


def check_collection(collection: Collection) -> CheckReport:
    """Gram matrix plus the list of violated constraints.

    Constraints: chi(x, y) = 0 whenever x sits in a strictly later block
    than y; inside a non-opaque block the objects are exceptional and
    pairwise orthogonal; intra-opaque entries are unconstrained.  A full
    collection must also have as many objects as the K-group rank and a
    unimodular Gram matrix.
    """
    objs = collection.objects()
    n = len(objs)
    gram = tuple(
        tuple(euler_pairing(a.cls, b.cls) for b in objs) for a in objs
    )
    violations: list[str] = []
    owner = [_block_index(collection, i) for i in range(n)]
    for i in range(n):
        for j in range(n):
            bi, bj = owner[i], owner[j]
            if bi > bj and gram[i][j] != 0:
                violations.append(
                    f"chi({objs[i].label}, {objs[j].label}) = {gram[i][j]}, expected 0"
                )
            elif bi == bj and not collection.blocks[bi].opaque:
                want = 1 if i == j else 0
                if gram[i][j] != want:
                    violations.append(
                        f"chi({objs[i].label}, {objs[j].label}) = {gram[i][j]}, expected {want}"
                    )
    if collection.full:
        expected = collection.surface.picard_rank + 2
        if n != expected:
            violations.append(f"full collection has {n} objects, lattice needs {expected}")
        elif intlinalg.det([list(c.vector) for c in collection.classes()]) not in (1, -1):
            violations.append("classes do not form a basis of the K-lattice")
    return CheckReport(ok=not violations, gram=gram, violations=tuple(violations))


# -- moves ----------------------------------------------------------------

@dataclass(frozen=True)
class Move:
    """One rewriting step.

    kind: "L" (mutate block `index` left through its neighbour), "R"
    (right), "helix-" (first block twisted by -K to the end), "helix+"
    (last block twisted by K to the front), "swap" (exchange orthogonal
    blocks index, index+1), "merge" (fuse them), "split" (cut block
    `index` into runs of the given sizes), "serre" (apply the N-th power
    of the subcategory Serre matrix to the span of blocks rng[0]..rng[1]).
    Block indices are 1-based, matching script text.
    """

    kind: str
    index: int = 0
    sizes: tuple[int, ...] = ()
    rng: tuple[int, int] = (0, 0)
    power: int = 0


_MOVE_RES = [
    ("L", re.compile(r"^L\s+(\d+)$")),
    ("R", re.compile(r"^R\s+(\d+)$")),
    ("helix-", re.compile(r"^helix\s+-K$")),
    ("helix+", re.compile(r"^helix\s+\+K$")),
    ("swap", re.compile(r"^swap\s+(\d+)$")),
    ("merge", re.compile(r"^merge\s+(\d+)$")),
    ("split", re.compile(r"^split\s+(\d+)((?:\s+\d+)+)$")),
    ("serre", re.compile(r"^serre\s+(\d+)\.\.(\d+)\s+\^(-?\d+)$")),
]


def parse_move(text: str) -> Move:
    text = text.strip()
    for kind, rx in _MOVE_RES:
        m = rx.match(text)
        if not m:
            continue
        if kind in ("L", "R", "swap", "merge"):
            return Move(kind, index=int(m.group(1)))
        if kind in ("helix-", "helix+"):
            return Move(kind)
        if kind == "split":
            sizes = tuple(int(x) for x in m.group(2).split())
            return Move(kind, index=int(m.group(1)), sizes=sizes)
        return Move(kind, rng=(int(m.group(1)), int(m.group(2))), power=int(m.group(3)))
    raise InputError(f"cannot parse move {text!r}")


def render_move(move: Move) -> str:
    if move.kind in ("L", "R"):
        return f"{move.kind} {move.index}"
    if move.kind == "helix-":
        return "helix -K"
    if move.kind == "helix+":
        return "helix +K"
    if move.kind in ("swap", "merge"):
        return f"{move.kind} {move.index}"
    if move.kind == "split":
        return f"split {move.index} " + " ".join(str(s) for s in move.sizes)
    if move.kind == "serre":
        return f"serre {move.rng[0]}..{move.rng[1]} ^{move.power}"
    raise InputError(f"unknown move kind {move.kind!r}")


def parse_script(text: str) -> tuple[Move, ...]:
    moves = []
    for chunk in re.split(r"[;\n]", text):
        chunk = chunk.strip()
        if chunk:
            moves.append(parse_move(chunk))
    return tuple(moves)


def render_script(moves) -> str:
    return "; ".join(render_move(m) for m in moves)


def _relabel(cls: KClass) -> ExcObject:
    return ExcObject(cls, render_kclass(cls))


def _mutate_block(moving: Block, through: Block, side: str) -> Block:
    if through.opaque:
        raise MoveError("cannot mutate through an opaque block")
    new = []
    for obj in moving.objects:
        cls = obj.cls
        for e in through.objects:
            if side == "Left":
                cls = cls - euler_pairing(e.cls, obj.cls) * e.cls
            else:
                cls = cls - euler_pairing(obj.cls, e.cls) * e.cls
        new.append(_relabel(cls))
    return Block(tuple(new), opaque=moving.opaque)


def _orthogonal_blocks(a: Block, b: Block) -> bool:
    return all(
        euler_pairing(x.cls, y.cls) == 0 and euler_pairing(y.cls, x.cls) == 0
        for x in a.objects
        for y in b.objects
    )


def subcategory_serre_matrix(collection: Collection, rng: tuple[int, int] | None = None):
    """Integer matrix of the Serre functor on the span of blocks
    rng[0]..rng[1] (1-based, inclusive; default all), in the coordinates
    given by the listed objects.  Needs a unimodular Gram matrix."""
    blocks = collection.blocks
    if rng is None:
        rng = (1, len(blocks))
    a, b = rng
    if not (1 <= a <= b <= len(blocks)):
        raise InputError(f"block range {a}..{b} out of bounds")
    classes = [o.cls for blk in blocks[a - 1 : b] for o in blk.objects]
    gram = [[euler_pairing(x, y) for y in classes] for x in classes]
    if intlinalg.det(gram) not in (1, -1):
        raise InputError("subcategory Gram matrix is not unimodular")
    inv = intlinalg.mat_inverse_integer(gram)
    return intlinalg.mat_mul(inv, intlinalg.transpose(gram))


def apply_move(collection: Collection, move: Move) -> Collection:
    """One move; raises MoveError on a violated precondition and
    VerificationError if the rewritten collection fails check_collection."""
    blocks = list(collection.blocks)
    n = len(blocks)
    k = move.kind
    if k in ("L", "R", "swap", "merge", "split") and not (1 <= move.index <= n):
        raise MoveError(f"block index {move.index} out of range 1..{n}")
    if k == "L":
        if move.index < 2:
            raise MoveError("left mutation needs a block on the left")
        i = move.index - 1
        moved = _mutate_block(blocks[i], blocks[i - 1], "Left")
        blocks[i - 1], blocks[i] = moved, blocks[i - 1]
    elif k == "R":
        if move.index >= n:
            raise MoveError("right mutation needs a block on the right")
        i = move.index - 1
        moved = _mutate_block(blocks[i], blocks[i + 1], "Right")
        blocks[i], blocks[i + 1] = blocks[i + 1], moved
    elif k == "helix-":
        first = blocks.pop(0)
        mk = -1 * collection.surface.canonical
        blocks.append(Block(tuple(_relabel(twist(o.cls, mk)) for o in first.objects), opaque=first.opaque))
    elif k == "helix+":
        last = blocks.pop()
        pk = collection.surface.canonical
        blocks.insert(0, Block(tuple(_relabel(twist(o.cls, pk)) for o in last.objects), opaque=last.opaque))
    elif k == "swap":
        if move.index >= n:
            raise MoveError("swap needs a block on the right")
        i = move.index - 1
        if not _orthogonal_blocks(blocks[i], blocks[i + 1]):
            raise MoveError("swap blocks are not completely orthogonal")
        blocks[i], blocks[i + 1] = blocks[i + 1], blocks[i]
    elif k == "merge":
        if move.index >= n:
            raise MoveError("merge needs a block on the right")
        i = move.index - 1
        if blocks[i].opaque or blocks[i + 1].opaque:
            raise MoveError("cannot merge opaque blocks")
        if not _orthogonal_blocks(blocks[i], blocks[i + 1]):
            raise MoveError("merge blocks are not completely orthogonal")
        blocks[i : i + 2] = [Block(blocks[i].objects + blocks[i + 1].objects)]
    elif k == "split":
        i = move.index - 1
        blk = blocks[i]
        if blk.opaque:
            raise MoveError("cannot split an opaque block")
        if not move.sizes or any(s < 1 for s in move.sizes) or sum(move.sizes) != blk.size:
            raise MoveError(f"split sizes {move.sizes} do not partition a block of {blk.size}")
        parts, at = [], 0
        for s in move.sizes:
            parts.append(Block(blk.objects[at : at + s]))
            at += s
        blocks[i : i + 1] = parts
    elif k == "serre":
        a, b = move.rng
        if not (1 <= a <= b <= n):
            raise MoveError(f"block range {a}..{b} out of bounds")
        if a != 1 and b != n:
            raise MoveError("serre power needs an initial or terminal block range")
        mat = subcategory_serre_matrix(collection, (a, b))
        power = intlinalg.mat_pow(mat, move.power)
        old = [o.cls for blk in blocks[a - 1 : b] for o in blk.objects]
        zero = KClass(collection.surface, 0, collection.surface.zero_divisor(), 0)
        new_classes = []
        for j in range(len(old)):
            acc = zero
            for i in range(len(old)):
                acc = acc + power[i][j] * old[i]
            new_classes.append(acc)
        at = 0
        for bi in range(a - 1, b):
            size = blocks[bi].size
            blocks[bi] = Block(
                tuple(_relabel(c) for c in new_classes[at : at + size]),
                opaque=blocks[bi].opaque,
            )
            at += size
    else:
        raise InputError(f"unknown move kind {k!r}")
    out = replace(collection, blocks=tuple(blocks))
    report = check_collection(out)
    if not report.ok:
        raise VerificationError(
        "collection broke after move "
        + render_move(move)
        + ": "
        + "; ".join(report.violations)
        )
    return out


# -- comparison -----------------------------------------------------------

def _span_form(block: Block) -> tuple[tuple[int, ...], ...]:
    return intlinalg.hermite_row_form([list(o.cls.vector) for o in block.objects])


def _norm_vectors(block: Block) -> tuple[tuple[int, ...], ...]:
    return tuple(sorted(o.cls.normalized_sign().vector for o in block.objects))


def _sign_normal(col: list[int]) -> tuple[int, ...]:
    for x in col:
        if x:
            return tuple(col) if x > 0 else tuple(-y for y in col)
    return tuple(col)


def collections_equal(a: Collection, b: Collection, mode: str = "Strict") -> bool:
    """Strict: identical block structure and classes in order (exact signs).
    UpToSignAndBlockPerm: blocks stay in order, but inside each non-opaque
    block the classes are compared as multisets up to a sign per class;
    opaque blocks compare by their integer span."""
    if a.surface != b.surface or len(a.blocks) != len(b.blocks):
        return False
    for ba, bb in zip(a.blocks, b.blocks):
        if ba.opaque != bb.opaque or ba.size != bb.size:
            return False
        if mode == "Strict":
            if ba.classes() != bb.classes():
                return False
        elif mode == "UpToSignAndBlockPerm":
            if ba.opaque:
                if _span_form(ba) != _span_form(bb):
                    return False
            elif _norm_vectors(ba) != _norm_vectors(bb):
                return False
        else:
            raise InputError(f"unknown comparison mode {mode!r}")
    return True


def canonical_form(collection: Collection):
    """Hashable key identifying a collection up to the
    UpToSignAndBlockPerm comparison."""
    parts = []
    for b in collection.blocks:
        if b.opaque:
            parts.append(("opaque", _span_form(b)))
        else:
            parts.append(("plain", _norm_vectors(b)))
    return tuple(parts)


# -- scripts and certificates ----------------------------------------------

def _render_blocks(collection: Collection) -> list[dict]:
    out = []
    for b in collection.blocks:
        out.append(
            {
                "opaque": b.opaque,
                "objects": [render_kclass(o.cls) for o in b.objects],
            }
        )
    return out


def run_script(collection: Collection, moves, case: str = ""):
    """Replay `moves`, checking legality after every step.  Returns the
    final collection and one record per step (move, resulting blocks, Gram
    matrix).  Raises VerificationError naming the first bad step."""
    steps = []
    current = collection
    start = check_collection(current)
    if not start.ok:
        raise VerificationError(
            f"{case or 'script'}: starting collection is not semi-orthogonal: "
            + "; ".join(start.violations)
        )
    for idx, move in enumerate(moves, 1):
        try:
            current = apply_move(current, move)
        except (MoveError, VerificationError) as exc:
            raise VerificationError(
                f"{case or 'script'}: step {idx} ({render_move(move)}) failed: {exc}"
            ) from exc
        report = check_collection(current)
        steps.append(
            {
                "step": idx,
                "move": render_move(move),
                "blocks": _render_blocks(current),
                "gram": [list(row) for row in report.gram],
                "ok": report.ok,
            }
        )
    return current, steps


def certificate(case: str, steps, verdict: str) -> dict:
    gram = steps[-1]["gram"] if steps else []
    return {
        "case": case,
        "steps": steps,
        "gram": gram,
        "verdict": verdict,
    }


VERDICT_OK = "equivalent: verified at K-theory level"
VERDICT_FAIL = "mismatch at K-theory level"


# -- search ----------------------------------------------------------------

def _search_depth(max_depth: int | None) -> int:
    if max_depth is not None:
        return max_depth
    env = os.environ.get(DEPTH_ENV)
    if env:
        try:
            return max(0, int(env))
        except ValueError as exc:
            raise InputError(f"{DEPTH_ENV} must be an integer, got {env!r}") from exc
    return DEFAULT_SEARCH_DEPTH


def _candidate_moves(collection: Collection, kinds) -> list[Move]:
    n = len(collection.blocks)
    out = []
    if "L" in kinds:
        out.extend(Move("L", index=i) for i in range(2, n + 1))
    if "R" in kinds:
        out.extend(Move("R", index=i) for i in range(1, n))
    if "helix-" in kinds and n > 1:
        out.append(Move("helix-"))
    if "helix+" in kinds and n > 1:
        out.append(Move("helix+"))
    if "swap" in kinds:
        out.extend(Move("swap", index=i) for i in range(1, n))
    return out


DEFAULT_SEARCH_KINDS = ("L", "R", "helix-", "helix+", "swap")


def search_path(
    start: Collection,
    goal: Collection,
    max_depth: int | None = None,
    kinds=DEFAULT_SEARCH_KINDS,
):
    """Breadth-first search for a move word taking `start` to `goal` up to
    UpToSignAndBlockPerm, or None within the depth bound."""
    depth = _search_depth(max_depth)
    if collections_equal(start, goal, "UpToSignAndBlockPerm"):
        return ()
    seen = {canonical_form(start)}
    frontier = deque([(start, (), 0)])
    while frontier:
        current, path, d = frontier.popleft()
        if d >= depth:
            continue
        for move in _candidate_moves(current, kinds):
            try:
                nxt = apply_move(current, move)
            except (MoveError, VerificationError):
                continue
            key = canonical_form(nxt)
            if key in seen:
                continue
            seen.add(key)
            new_path = path + (move,)
            if collections_equal(nxt, goal, "UpToSignAndBlockPerm"):
                return new_path
            frontier.append((nxt, new_path, d + 1))
    return None


def serre_power_match(
    a: Collection,
    rng_a: tuple[int, int],
    b: Collection,
    rng_b: tuple[int, int],
    max_power: int = 12,
):
    """Smallest |N| with S^N carrying the listed blocks of `a` onto those of
    `b` (per block, up to order and a sign per object), where S is the
    subcategory Serre matrix of the `a` range; None if the block shapes or
    spans differ or no power fits."""
    blocks_a = a.blocks[rng_a[0] - 1 : rng_a[1]]
    blocks_b = b.blocks[rng_b[0] - 1 : rng_b[1]]
    sizes = [blk.size for blk in blocks_a]
    if sizes != [blk.size for blk in blocks_b]:
        return None
    cls_a = [o.cls for blk in blocks_a for o in blk.objects]
    cls_b = [o.cls for blk in blocks_b for o in blk.objects]
    if intlinalg.hermite_row_form([list(c.vector) for c in cls_a]) != intlinalg.hermite_row_form(
        [list(c.vector) for c in cls_b]
    ):
        return None
    basis_t = intlinalg.transpose([list(c.vector) for c in cls_a])
    target = []
    for c in cls_b:
        col = intlinalg.solve(basis_t, list(c.vector))
        if col is None:
            return None
        target.append(_sign_normal(col))
    serre = subcategory_serre_matrix(a, rng_a)
    m = len(cls_a)
    for n_abs in range(0, max_power + 1):
        for n in ({0} if n_abs == 0 else {n_abs, -n_abs}):
            power = intlinalg.mat_pow(serre, n)
            images = [_sign_normal([power[i][j] for i in range(m)]) for j in range(m)]
            at, ok = 0, True
            for size in sizes:
                if sorted(images[at : at + size]) != sorted(target[at : at + size]):
                    ok = False
                    break
                at += size
            if ok:
                return n
    return None
