"""Boundary kernels through first-passage matrices over vertex balls.

For a finite-range walk the Martin kernel along an end can be read off
from products of ball-to-ball passage matrices taken along the prefix.
This module builds those matrices, certifies the uniform positivity
floor that makes the products contract, and assembles the kernel as a
quotient of contracted inner products.  Everything is cross-checked in
the tests against the scalar first-passage closed forms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import ConvergenceError, ValidationError
from .geometry import (
    Alphabet,
    EndPrefix,
    ReducedWord,
    ball,
    distance,
    format_word,
    identity,
    multiply,
    word,
)
from .kernels import KernelValue, meet_length
from .series import FirstPassageSystem, shared_system
from .walks import WalkSpec

__all__ = [
    "BallIndex",
    "PassageVector",
    "PassageMatrix",
    "ContractionResult",
    "ball_index",
    "lambda_z",
    "radial_passage",
    "first_passage_to_ball",
    "passage_matrix",
    "contraction_limit",
    "martin_kernel_matrix",
]


# ---------------------------------------------------------------------------
# Ball coordinates


@dataclass(frozen=True)
class BallIndex:
    """Coordinate system for the passage matrices of one walk.

    ``words`` enumerates the radius-``reach`` ball around the identity;
    matrix rows and columns follow this order.  ``connect_radius`` is
    the smallest radius whose ball carries a positive-probability path
    between every ordered pair of ball points without leaving it, and
    ``block_length`` is the prefix stride between consecutive ball
    centres along an end.
    """

    alphabet: Alphabet
    reach: int
    connect_radius: int
    block_length: int
    words: tuple[ReducedWord, ...]
    _pos: dict = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        object.__setattr__(
            self, "_pos", {w: i for i, w in enumerate(self.words)}
        )

    @property
    def size(self) -> int:
        return len(self.words)

    def coordinate(self, u: ReducedWord) -> int:
        try:
            return self._pos[u]
        except KeyError:
            raise ValidationError(
                f"{format_word(u)} outside the radius-{self.reach} ball"
            ) from None


def _step_pairs(spec: WalkSpec) -> list[tuple[ReducedWord, float]]:
    if spec.mode != "finitely-supported":
        raise ValidationError(
            "ball matrices need an explicit word step law; isotropic walks "
            "can pass through word_twin first"
        )
    return [(w, float(p)) for w, p in spec.step_items() if p > 0]


def ball_index(spec: WalkSpec, radius_cap: int = 6) -> BallIndex:
    """Build the ball coordinates, auto-selecting the connecting radius.

    Candidate radii N = reach, reach+1, ... are accepted once a breadth
    first search inside the radius-N ball reaches every ball point from
    every other one using only positive-probability steps.
    """
    steps = _step_pairs(spec)
    reach = spec.range
    inner = ball(spec.alphabet, reach)
    for n in range(reach, radius_cap + 1):
        big = set(ball(spec.alphabet, n))
        ok = True
        for start in inner:
            seen = {start}
            queue = [start]
            while queue:
                cur = queue.pop()
                for g, _ in steps:
                    nxt = multiply(cur, g)
                    if nxt in big and nxt not in seen:
                        seen.add(nxt)
                        queue.append(nxt)
            if not all(u in seen for u in inner):
                ok = False
                break
        if ok:
            return BallIndex(
                alphabet=spec.alphabet,
                reach=reach,
                connect_radius=n,
                block_length=n + 2 * reach + 1,
                words=tuple(inner),
            )
    raise ValidationError(
        f"no connecting radius up to {radius_cap}: the ball points do not "
        "communicate inside any candidate ball"
    )


# ---------------------------------------------------------------------------
# Positivity floor


def lambda_z(spec: WalkSpec, z: float, index: BallIndex | None = None) -> float:
    """Minimum in-ball passage weight between ball points at weight z.

    The walk is confined to the connecting ball; the floor is the
    smallest first-passage value over ordered pairs of the inner ball.
    Every passage matrix column at this z is either zero or has
    min/max ratio at least this floor.
    """
    if index is None:
        index = ball_index(spec)
    steps = _step_pairs(spec)
    big = ball(spec.alphabet, index.connect_radius)
    pos = {w: i for i, w in enumerate(big)}
    m = len(big)
    P = np.zeros((m, m))
    for i, u in enumerate(big):
        for g, p in steps:
            v = multiply(u, g)
            j = pos.get(v)
            if j is not None:
                P[i, j] += p
    try:
        G = np.linalg.solve(np.eye(m) - z * P, np.eye(m))
    except np.linalg.LinAlgError:
        raise ConvergenceError(
            f"confined chain not invertible at z = {z}"
        ) from None
    floor = math.inf
    for u in index.words:
        i = pos[u]
        for v in index.words:
            j = pos[v]
            f = 1.0 if i == j else G[i, j] / G[j, j]
            if f <= 0.0:
                raise ConvergenceError(
                    f"zero confined passage {format_word(u)} -> "
                    f"{format_word(v)} at z = {z}: increase N"
                )
            floor = min(floor, f)
    return floor


# ---------------------------------------------------------------------------
# First passage into a ball


@dataclass(frozen=True)
class PassageVector:
    """First-entry weights from one vertex into the ball around another.

    ``values[i]`` is the generating-function weight of paths from the
    source that first meet the target ball at centre*words[i].
    """

    index: BallIndex
    source: ReducedWord
    center: ReducedWord
    z: float
    values: np.ndarray
    method: str
    steps: int
    escaped: float
    error_estimate: float

    def support(self) -> list[tuple[ReducedWord, float]]:
        return [
            (w, float(v))
            for w, v in zip(self.index.words, self.values)
            if v > 0.0
        ]


def radial_passage(spec: WalkSpec, k: int, z: float) -> float:
    """First-passage weight across distance k for a uniform NN word walk.

    Watched from the target vertex the distance is a birth-death chain:
    one step in, degree-1 steps out, rest holding.  The one-step weight
    f is the minimal root of (deg-1) mu z f^2 - (1 - mu0 z) f + mu z;
    the quotient form below avoids the root cancellation and stays
    accurate where the discriminant vanishes.  Across distance k the
    weight is f**k.  The tests rerun this as a truncated linear system
    and against the vector fixed point.
    """
    if not spec.is_uniform_nn:
        raise ValidationError(
            "radial passage needs a uniform nearest-neighbour word walk"
        )
    if k < 0:
        raise ValidationError("need k >= 0")
    if k == 0:
        return 1.0
    deg = spec.degree
    mu_map = {w: float(p) for w, p in spec.step_items()}
    stay = mu_map.get(identity(spec.alphabet), 0.0)
    per = next(p for w, p in mu_map.items() if len(w) == 1)
    b = 1.0 - stay * z
    disc = b * b - 4.0 * (deg - 1) * per * per * z * z
    # rounding can push the discriminant a few ulp below zero right at
    # the fold; only a materially negative value means z is past it
    if disc < 0.0:
        if disc > -1e-12 * b * b:
            disc = 0.0
        else:
            raise ValidationError(
                f"radial passage undefined at z = {z}: past the singularity"
            )
    f = 2.0 * per * z / (b + math.sqrt(disc))
    return f**k


def _sparse_passage(
    spec: WalkSpec,
    index: BallIndex,
    x: ReducedWord,
    y: ReducedWord,
    z: float,
    state_radius: int,
    budget: int,
    tol: float,
    state_cap: int,
) -> PassageVector:
    steps = _step_pairs(spec)
    absorb = {multiply(y, u): i for i, u in enumerate(index.words)}
    states: dict[ReducedWord, int] = {x: 0}
    queue = [x]
    while queue:
        cur = queue.pop()
        for g, _ in steps:
            nxt = multiply(cur, g)
            if nxt in states or nxt in absorb:
                continue
            if distance(nxt, y) > state_radius:
                continue
            if len(states) >= state_cap:
                raise ConvergenceError(
                    f"state ball of radius {state_radius} around "
                    f"{format_word(y)} exceeds {state_cap} vertices"
                )
            states[nxt] = len(states)
            queue.append(nxt)
    n = len(states)
    rows, cols, vals = [], [], []
    arow, acol, aval = [], [], []
    leak = np.zeros(n)
    for s, i in states.items():
        for g, p in steps:
            t = multiply(s, g)
            j = absorb.get(t)
            if j is not None:
                arow.append(i)
                acol.append(j)
                aval.append(p)
            elif t in states:
                rows.append(i)
                cols.append(states[t])
                vals.append(p)
            else:
                leak[i] += p
    P = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    A = scipy.sparse.csr_matrix((aval, (arow, acol)), shape=(n, index.size))
    u = np.zeros(n)
    u[0] = 1.0
    got = np.zeros(index.size)
    escaped = 0.0
    small = 0
    for step in range(1, budget + 1):
        new = z * (u @ A)
        got += new
        escaped += z * float(u @ leak)
        u = z * (u @ P)
        inc = float(new.sum())
        total = float(got.sum())
        live = float(u.sum())
        if live == 0.0:
            # everything either absorbed or left the state ball for good
            return PassageVector(
                index, x, y, z, got, "sparse-dp", step, escaped, escaped
            )
        if total > 0.0 and inc < tol * total:
            small += 1
            if small >= 3:
                return PassageVector(
                    index, x, y, z, got, "sparse-dp", step, escaped, escaped
                )
        else:
            small = 0
    raise ConvergenceError(
        f"first-passage budget exhausted after {budget} steps at z = {z}: "
        f"last increment {inc:.3e}, live weight {float(u.sum()):.3e}, "
        f"escaped weight {escaped:.3e}"
    )


def first_passage_to_ball(
    spec: WalkSpec,
    x: ReducedWord,
    y: ReducedWord,
    z: float,
    index: BallIndex | None = None,
    budget: int = 2000,
    tol: float = 1e-12,
    state_radius: int | None = None,
    state_cap: int = 200_000,
    method: str = "auto",
) -> PassageVector:
    """First-entry weight vector from x into the ball around y.

    Uniform nearest-neighbour walks route through the radial chain: the
    tree forces first entry at the unique ball point facing x, so the
    vector has a single positive coordinate.  Other finite-range walks
    run a truncated absorption sweep; the state ball starts at three
    block lengths and doubles once if the sweep cannot settle.  The
    method override forces one engine, mostly so the two can be played
    against each other.
    """
    if index is None:
        index = ball_index(spec)
    if x.alphabet != spec.alphabet or y.alphabet != spec.alphabet:
        raise ValidationError("vertices over a different alphabet")
    if method not in ("auto", "radial", "dp"):
        raise ValidationError("method must be auto, radial or dp")
    w = multiply(y.inverse(), x)
    if len(w) <= index.reach:
        # already inside: first entry is immediate, at x itself
        values = np.zeros(index.size)
        values[index.coordinate(w)] = 1.0
        return PassageVector(index, x, y, z, values, "inside", 0, 0.0, 0.0)
    if method == "radial" and not spec.is_uniform_nn:
        raise ValidationError(
            "radial passage needs a uniform nearest-neighbour word walk"
        )
    if spec.is_uniform_nn and method != "dp":
        path = multiply(x.inverse(), y)
        back = spec.alphabet.inverse_letter(path.letters[-1])
        gate = index.coordinate(word(spec.alphabet, [back]))
        values = np.zeros(index.size)
        values[gate] = radial_passage(spec, len(path) - 1, z)
        return PassageVector(index, x, y, z, values, "radial", 0, 0.0, 1e-18)
    base = state_radius or 3 * index.block_length
    if distance(x, y) > base:
        base = distance(x, y) + index.block_length
    try:
        return _sparse_passage(
            spec, index, x, y, z, base, budget, tol, state_cap
        )
    except ConvergenceError:
        if state_radius is not None:
            raise
        return _sparse_passage(
            spec, index, x, y, z, 2 * base, budget, tol, state_cap
        )


# ---------------------------------------------------------------------------
# Ball-to-ball matrices


@dataclass(frozen=True)
class PassageMatrix:
    """Passage weights from one ball to the next along a length-D block.

    Row u, column v holds the weight of paths from prev*u first meeting
    the next ball at next*v, in the shared coordinates of ``index``.
    Columns are all-zero or all-positive; which ones are zero is a
    geometric fact about the block, not a numerical accident.
    """

    index: BallIndex
    block: ReducedWord
    z: float
    array: np.ndarray

    def __post_init__(self):
        if len(self.block) != self.index.block_length:
            raise ValidationError(
                f"block must have length {self.index.block_length}"
            )
        for j in range(self.index.size):
            col = self.array[:, j]
            if col.max() > 0.0 and col.min() <= 0.0:
                raise ValidationError(
                    f"column {format_word(self.index.words[j])} mixes zero "
                    "and positive passage weights"
                )

    def column_ratio_floor(self) -> float:
        """Worst min/max ratio over positive columns; at least lambda_z."""
        floor = math.inf
        for j in range(self.index.size):
            col = self.array[:, j]
            if col.max() > 0.0:
                floor = min(floor, float(col.min() / col.max()))
        return floor

    def to_json(self) -> str:
        payload = {
            "schema": 1,
            "block": format_word(self.block),
            "z": self.z,
            "ball": [format_word(w) for w in self.index.words],
            "rows": [[float(v) for v in row] for row in self.array],
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ": ")) + "\n"


def passage_matrix(
    spec: WalkSpec,
    block: ReducedWord,
    z: float,
    index: BallIndex | None = None,
    **kwargs,
) -> PassageMatrix:
    """Assemble the ball-to-ball matrix for one prefix block."""
    if index is None:
        index = ball_index(spec)
    arr = np.zeros((index.size, index.size))
    for i, u in enumerate(index.words):
        fpv = first_passage_to_ball(spec, u, block, z, index=index, **kwargs)
        arr[i, :] = fpv.values
    return PassageMatrix(index=index, block=block, z=z, array=arr)


# ---------------------------------------------------------------------------
# Contraction of matrix products


@dataclass(frozen=True)
class ContractionResult:
    direction: np.ndarray
    rate: float
    distances: tuple[float, ...]
    factors: int
    seed_gap: float


def _projected_orbit(mats, seed: np.ndarray) -> tuple[np.ndarray, list[float]]:
    v = seed / seed.sum()
    dists = []
    for a in reversed([m.array if isinstance(m, PassageMatrix) else m for m in mats]):
        nxt = a @ v
        s = nxt.sum()
        if s <= 0.0:
            raise ConvergenceError(
                "not yet contracted: a passage product annihilated the seed"
            )
        nxt = nxt / s
        dists.append(float(np.max(np.abs(nxt - v))))
        v = nxt
    return v, dists


def contraction_limit(
    mats,
    seeds: tuple[np.ndarray, np.ndarray] | None = None,
    tol: float = 1e-10,
) -> ContractionResult:
    """Common projective limit direction of a left product of matrices.

    Two strictly positive seeds are pushed through the product from the
    far end; the limit exists when their projections agree within tol.
    The reported rate is the median decay ratio of successive projected
    distances (0 when the product collapses in one factor, as happens
    for nearest-neighbour blocks).
    """
    mats = list(mats)
    if not mats:
        raise ValidationError("need at least one matrix")
    size = (mats[0].array if isinstance(mats[0], PassageMatrix) else mats[0]).shape[0]
    if seeds is None:
        seeds = (np.ones(size), np.linspace(1.0, 2.0, size))
    v1, d1 = _projected_orbit(mats, np.asarray(seeds[0], dtype=float))
    v2, _ = _projected_orbit(mats, np.asarray(seeds[1], dtype=float))
    gap = float(np.max(np.abs(v1 - v2)))
    if gap > tol:
        raise ConvergenceError(
            f"not yet contracted: seed directions differ by {gap:.3e} "
            f"after {len(mats)} factors"
        )
    ratios = [
        b / a for a, b in zip(d1, d1[1:]) if a > 1e-300 and b > 1e-300
    ]
    rate = float(np.median(ratios)) if ratios else 0.0
    return ContractionResult(
        direction=v1,
        rate=rate,
        distances=tuple(d1),
        factors=len(mats),
        seed_gap=gap,
    )


# ---------------------------------------------------------------------------
# The kernel itself


def _kernel_quotient(
    spec: WalkSpec,
    index: BallIndex,
    x: ReducedWord,
    xi: EndPrefix,
    z: float,
    k: int,
    blocks_to: int,
) -> float:
    d = index.block_length
    u_k = xi.word.prefix(k * d)
    mats = []
    for j in range(k, blocks_to):
        a = xi.word.prefix(j * d)
        b = xi.word.prefix((j + 1) * d)
        mats.append(passage_matrix(spec, multiply(a.inverse(), b), z, index))
    w_inf = contraction_limit(mats).direction
    fb_x = first_passage_to_ball(spec, x, u_k, z, index=index).values
    fb_e = first_passage_to_ball(
        spec, identity(spec.alphabet), u_k, z, index=index
    ).values
    den = float(fb_e @ w_inf)
    if den <= 0.0:
        raise ConvergenceError(
            f"kernel denominator vanished at block {k}; not yet contracted"
        )
    return float(fb_x @ w_inf) / den


def martin_kernel_matrix(
    spec: WalkSpec,
    x: ReducedWord,
    xi: EndPrefix,
    z: float | None = None,
    index: BallIndex | None = None,
) -> KernelValue:
    """Martin kernel at an end via contracted passage-matrix products.

    The first ball centre sits beyond the confluent of x with the end
    and outside the reach of x; the remaining prefix supplies the
    matrix product whose limit direction closes the inner products.
    With enough depth for two start positions the reported error is
    their disagreement, which the start-invariance of the limit drives
    below 1e-8.
    """
    if index is None:
        index = ball_index(spec)
    if z is None:
        if not spec.is_nearest_neighbour:
            raise ValidationError(
                "no certified singularity for this walk; pass z explicitly"
            )
        z = float(shared_system(spec).radius().r)
    d = index.block_length
    m = meet_length(x, xi)
    k = 1
    while k * d <= m or len(x) + k * d - 2 * m <= index.reach:
        k += 1
    blocks = xi.depth // d
    if blocks < k + 1:
        raise ValidationError(
            f"prefix depth {xi.depth} too short for the matrix kernel: "
            f"need at least {(k + 1) * d}"
        )
    value = _kernel_quotient(spec, index, x, xi, z, k, blocks)
    if blocks >= k + 2:
        again = _kernel_quotient(spec, index, x, xi, z, k + 1, blocks)
        err = abs(value - again)
        stab = err < 1e-8
    else:
        err = math.inf
        stab = False
    return KernelValue(
        x=format_word(x),
        y_or_prefix=format_word(xi.word) + "...",
        depth=xi.depth,
        value=value,
        error=err,
        stabilized=stab,
    )
