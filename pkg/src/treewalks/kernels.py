"""Ratio-limit and Martin kernels, Doob transforms, and Green comparisons.

Two kernel families live here.  Isotropic tree walks get kernels through
the radial eigenfunction of the plain step operator; nearest-neighbour
word walks get them through first-passage products and the square-root
expansion data of their generating functions.  Boundary readings always
carry an error estimate (distance of the finite reading at the prefix
word from the limit value) and a stabilization flag (the limit computed
from the prefix truncated by four letters must agree).
"""

from __future__ import annotations

import csv
import io
import json
import math
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from mpmath import mp

from .errors import ConvergenceError, ValidationError
from .geometry import (
    EndPrefix,
    ReducedWord,
    ball,
    distance,
    format_word,
    identity,
    word,
)
from .walks import WalkSpec, nstep, spectral_radius
from .series import FirstPassageSystem

__all__ = [
    "KernelValue",
    "KernelTable",
    "spherical",
    "plain_tree_rho",
    "ratio_kernel_isotropic",
    "martin_kernel_nn",
    "ratio_kernel_nn",
    "ratio_bound",
    "DoobWalk",
    "PlainTreeRows",
    "doob_transform",
    "verify_t_harmonic",
    "doob_green_decay",
    "radial_fold",
    "AnconaReport",
    "ancona_harnack_check",
]

STABILIZE_TOL = 1e-9  # depth-d vs depth-(d-4) agreement for boundary flags


# ---------------------------------------------------------------------------
# Radial eigenfunction


def spherical(q: int, n: int) -> float:
    """Radial eigenfunction of the plain tree step operator, value 1 at 0.

    q = 1 degenerates to the two-regular tree (the integer line), where
    the eigenfunction is constant.
    """
    if q < 1:
        raise ValidationError("need q >= 1")
    if n < 0:
        raise ValidationError("need n >= 0")
    if q == 1:
        return 1.0
    return (1.0 + n * (q - 1) / (q + 1)) * q ** (-n / 2)


def plain_tree_rho(q: int) -> float:
    """Norm of the plain (non-lazy) uniform step operator on the tree."""
    if q < 1:
        raise ValidationError("need q >= 1")
    return 2.0 * math.sqrt(q) / (q + 1)


# ---------------------------------------------------------------------------
# Kernel rows and tables


@dataclass(frozen=True)
class KernelValue:
    x: str
    y_or_prefix: str
    depth: int | None
    value: float
    error: float
    stabilized: bool


@dataclass
class KernelTable:
    kind: str
    rows: list
    meta: dict

    COLUMNS = ("x", "y_or_prefix", "depth", "value", "error", "stabilized")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.COLUMNS)
        for row in self.rows:
            writer.writerow(
                [
                    row.x,
                    row.y_or_prefix,
                    "" if row.depth is None else str(row.depth),
                    repr(row.value),
                    repr(row.error),
                    "true" if row.stabilized else "false",
                ]
            )
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "schema": 1,
            "kind": self.kind,
            "meta": self.meta,
            "rows": [
                {
                    "x": row.x,
                    "y_or_prefix": row.y_or_prefix,
                    "depth": row.depth,
                    "value": row.value,
                    "error": row.error,
                    "stabilized": row.stabilized,
                }
                for row in self.rows
            ],
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ": ")) + "\n"


def _prefix_label(xi: EndPrefix) -> str:
    return format_word(xi.word) + "..."


# ---------------------------------------------------------------------------
# Meet of a vertex with an end prefix


def meet_length(x: ReducedWord, xi: EndPrefix) -> int:
    """Length of the confluent of x with the end behind the prefix.

    Resolvable when the agreement stops before the prefix runs out, or
    when x itself lies on the prefix.
    """
    lx = x.letters
    lw = xi.word.letters
    m = 0
    while m < len(lx) and m < len(lw) and lx[m] == lw[m]:
        m += 1
    if m == len(lx) or m < len(lw):
        return m
    raise ValidationError("prefix too short to resolve confluent")


# ---------------------------------------------------------------------------
# Isotropic kernels


def ratio_kernel_isotropic(spec: WalkSpec, x: ReducedWord, target) -> KernelValue:
    """Ratio-limit kernel of an isotropic tree walk.

    Finite target: ratio of radial eigenfunction values at the relevant
    distances.  EndPrefix target: the boundary limit, exponential in the
    horocycle index; the finite reading at the prefix word supplies the
    error column, and truncating the prefix by four letters must leave
    the limit unchanged for the stabilized flag.
    """
    if spec.mode != "isotropic":
        raise ValidationError("radial projection requires isotropy")
    q = spec.q
    if isinstance(target, EndPrefix):
        m = meet_length(x, target)
        hor = len(x) - 2 * m
        value = float(q) ** (-hor / 2.0)
        finite = spherical(q, distance(x, target.word)) / spherical(
            q, len(target.word)
        )
        err = abs(finite - value)
        try:
            m4 = meet_length(x, target.truncate(max(target.depth - 4, 0)))
            stab = abs(float(q) ** (-(len(x) - 2 * m4) / 2.0) - value) <= STABILIZE_TOL
        except ValidationError:
            stab = False
        return KernelValue(
            format_word(x), _prefix_label(target), target.depth, value, err, stab
        )
    d = distance(x, target)
    value = spherical(q, d) / spherical(q, len(target))
    return KernelValue(format_word(x), format_word(target), None, value, 0.0, True)


# ---------------------------------------------------------------------------
# Nearest-neighbour word-walk kernels


def _letter_products(system: FirstPassageSystem, z=None, values=None):
    if values is not None:
        return values
    sol = system.solve(z)
    return {c: float(sol.values[c]) for c in system.letters}


def _passage_product(values: dict, w: ReducedWord) -> float:
    out = 1.0
    for c in w.letters:
        out *= values[c]
    return out


def _nn_values_at(system: FirstPassageSystem, t: float) -> dict:
    """Letter first-passage values at z = 1/t, fold values at t = rho."""
    cert = system.radius()
    z = 1.0 / t
    if z > cert.hi + 1e-12:
        raise ValidationError(
            f"Martin kernel needs t at or above the walk's decay rate; "
            f"t = {t!r} puts 1/t beyond the singularity"
        )
    if z >= cert.lo - 1e-12:
        fp = system.fold()
        return {c: float(fp.values[c]) for c in system.letters}
    return _letter_products(system, z=z)


def martin_kernel_nn(
    system: FirstPassageSystem, x: ReducedWord, target, t: float
) -> KernelValue:
    """Martin kernel of a nearest-neighbour word walk at time-scale t.

    Quotient of first-passage products evaluated at 1/t.  On a tree the
    quotient telescopes, so the boundary value is exact as soon as the
    prefix resolves the confluent; the error column is exactly zero then.
    """
    values = _nn_values_at(system, t)
    ab = system.spec.alphabet
    if isinstance(target, EndPrefix):
        m = meet_length(x, target)
        num = 1.0
        for c in x.letters[m:][::-1]:
            num *= values[ab.inverse_letter(c)]
        den = 1.0
        for c in target.word.letters[:m]:
            den *= values[c]
        value = num / den
        finite = _passage_product(values, x.inverse() * target.word) / (
            _passage_product(values, target.word)
        )
        err = abs(finite - value)
        try:
            m4 = meet_length(x, target.truncate(max(target.depth - 4, 0)))
            num4 = 1.0
            for c in x.letters[m4:][::-1]:
                num4 *= values[ab.inverse_letter(c)]
            den4 = 1.0
            for c in target.word.letters[:m4]:
                den4 *= values[c]
            stab = abs(num4 / den4 - value) <= STABILIZE_TOL
        except ValidationError:
            stab = False
        return KernelValue(
            format_word(x), _prefix_label(target), target.depth, value, err, stab
        )
    value = _passage_product(values, x.inverse() * target) / _passage_product(
        values, target
    )
    return KernelValue(format_word(x), format_word(target), None, value, 0.0, True)


def ratio_kernel_nn(system: FirstPassageSystem, x: ReducedWord, target) -> KernelValue:
    """Ratio-limit kernel of a nearest-neighbour word walk.

    Finite target: quotient of square-root coefficients of the Green
    functions, assembled from fold values and per-letter expansion data.
    EndPrefix target: the boundary limit, which matches the Martin kernel
    at the decay rate; the finite reading at the prefix word fills the
    error column.
    """
    fp = system.fold()
    rho = 1.0 / float(fp.r)
    gammas = system.gamma_table()

    def gamma_of(w: ReducedWord) -> float:
        out = gammas["green"]
        for c in w.letters:
            out += gammas[c]
        return out

    if isinstance(target, EndPrefix):
        base = martin_kernel_nn(system, x, target, rho)
        wy = target.word
        finite = (
            martin_kernel_nn(system, x, wy, rho).value
            * gamma_of(x.inverse() * wy)
            / gamma_of(wy)
        )
        err = abs(finite - base.value)
        return KernelValue(
            base.x, base.y_or_prefix, base.depth, base.value, err, base.stabilized
        )
    k = martin_kernel_nn(system, x, target, rho).value
    value = k * gamma_of(x.inverse() * target) / gamma_of(target)
    return KernelValue(format_word(x), format_word(target), None, value, 0.0, True)


def ratio_bound(spec: WalkSpec, x: ReducedWord, k_cap: int = 64) -> float:
    """Upper bound sup_y H(x,y) <= 1/(rho^k p^(k)(e,x)), smallest usable k."""
    rho = spectral_radius(spec).value
    for k in range(len(x), k_cap + 1):
        p = nstep(spec, k).probability(x)
        if p > 0:
            return 1.0 / (rho ** k * float(p))
    raise ConvergenceError(f"no positive n-step probability up to {k_cap} steps")


# ---------------------------------------------------------------------------
# Doob transforms
#
# Sources are either a WalkSpec or any object exposing .alphabet and
# .row(x) -> [(y, p)].  The row form admits transition laws that fall
# outside the WalkSpec invariants, like the plain (periodic) tree step.


@dataclass(frozen=True)
class PlainTreeRows:
    """Pointwise row map of the plain uniform neighbour step on the tree."""

    q: int

    @property
    def alphabet(self):
        from .geometry import tree_alphabet

        return tree_alphabet(self.q)

    def row(self, x: ReducedWord) -> list:
        from fractions import Fraction

        ab = self.alphabet
        p = Fraction(1, self.q + 1)
        return [(x * word(ab, [c]), p) for c in ab.letters]


def _row_source(source):
    if isinstance(source, WalkSpec):
        items = source.step_items()

        def row(x: ReducedWord) -> list:
            return [(x * g, p) for g, p in items]

        return source.alphabet, row
    return source.alphabet, source.row


@dataclass
class DoobWalk:
    """Transition law conjugated by a positive t-harmonic function.

    Not group-invariant in general, so rows are exposed pointwise rather
    than as a WalkSpec.
    """

    alphabet: object
    base_row: Callable[[ReducedWord], list]
    t: object
    f: Callable[[ReducedWord], object]

    def row(self, x: ReducedWord) -> list:
        fx = self.f(x)
        return [(y, p * self.f(y) / (self.t * fx)) for y, p in self.base_row(x)]

    def row_sum(self, x: ReducedWord):
        return sum(p for _, p in self.row(x))


def verify_t_harmonic(
    source, f: Callable[[ReducedWord], object], t, radius: int = 3
) -> float:
    """Max relative harmonicity residual of f over the ball of given radius.

    f must be defined out to radius plus the walk's range.
    """
    alphabet, row = _row_source(source)
    worst = 0.0
    for x in ball(alphabet, radius):
        acc = sum(p * f(y) for y, p in row(x))
        target = t * f(x)
        worst = max(worst, abs(float(acc - target) / float(target)))
    return worst


def doob_transform(
    source,
    f: Callable[[ReducedWord], object],
    t,
    radius: int = 3,
    tol: float = 1e-9,
) -> DoobWalk:
    """Conjugate a step law by a positive t-harmonic function.

    Harmonicity is checked pointwise on the ball; the offending vertex is
    named on failure.  Row sums of the result equal one wherever f is
    exactly harmonic.
    """
    alphabet, row = _row_source(source)
    for x in ball(alphabet, radius):
        fx = f(x)
        if not fx > 0:
            raise ValidationError(f"f is not positive at {format_word(x)}")
        acc = sum(p * f(y) for y, p in row(x))
        if abs(float(acc - t * fx) / float(t * fx)) > tol:
            raise ValidationError(f"f is not t-harmonic at {format_word(x)}")
    return DoobWalk(alphabet=alphabet, base_row=row, t=t, f=f)


# ---------------------------------------------------------------------------
# Scalar radial fold and the Dirichlet-decay table


def radial_fold(q: int, prec: int = 120) -> tuple:
    """Fold point of the plain tree walk's radial first-passage function.

    One unknown: F = z/(q+1) + z q F^2/(q+1).  Newton on (F, z) with the
    quadratic's double-root condition appended; no closed form consumed.
    Returns (z_at_fold, F_at_fold, Green_at_fold) as mpf.
    """
    if q < 2:
        raise ValidationError("need q >= 2; the line is recurrent")
    with mp.workprec(prec):
        qq = mp.mpf(q)
        Fv, z = mp.mpf("0.5"), mp.mpf("1.1")
        tol = mp.mpf(2) ** (20 - prec)
        for _ in range(200):
            g1 = z / (qq + 1) + z * qq / (qq + 1) * Fv * Fv - Fv
            g2 = 2 * z * qq / (qq + 1) * Fv - 1
            if max(abs(g1), abs(g2)) <= tol:
                break
            a11 = 2 * z * qq / (qq + 1) * Fv - 1
            a12 = (1 + qq * Fv * Fv) / (qq + 1)
            a21 = 2 * z * qq / (qq + 1)
            a22 = 2 * qq * Fv / (qq + 1)
            det = a11 * a22 - a12 * a21
            if det == 0:
                raise ConvergenceError("radial fold refinement hit a singular step")
            dF = (g1 * a22 - g2 * a12) / det
            dz = (g2 * a11 - g1 * a21) / det
            Fv, z = Fv - dF, z - dz
        else:
            raise ConvergenceError("radial fold refinement did not converge")
        green = 1 / (1 - z * Fv)
        return z, Fv, green


def doob_green_decay(q: int, radii: Iterable[int]) -> list:
    """Green values at argument 1 of the eigenfunction-conjugated walk.

    Builds the conjugated chain through doob_transform (which checks the
    eigenfunction), then uses the conjugation of n-step kernels: the n-step
    law of the transformed chain is the base law times f(y)/(t^n f(x)), so
    its Green value at 1 is the base Green value at the fold, divided by f.
    Radial first-passage multiplicativity supplies the base values.
    """
    t = plain_tree_rho(q)
    doob_transform(
        PlainTreeRows(q), lambda v: spherical(q, len(v)), t, radius=3, tol=1e-12
    )
    z, Fv, green = radial_fold(q)
    out = []
    for k in radii:
        if k < 0:
            raise ValidationError("need radius >= 0")
        base = float(Fv ** k * green)
        out.append((k, base / spherical(q, k)))
    return out


# ---------------------------------------------------------------------------
# Green-comparison report


@dataclass(frozen=True)
class AnconaReport:
    z_values: tuple
    distances: tuple
    triple_min: float
    triple_max: float
    triple_green_gap: float  # max |triple * G(z) - 1| over all samples
    per_distance_spread: tuple  # (distance, max/min - 1) pairs
    harnack_max: float
    quadruple_max: float
    samples: int


def ancona_harnack_check(
    system: FirstPassageSystem,
    n_pairs: int = 20,
    distances: Sequence[int] = (4, 6, 8, 10),
    z_values: Sequence[float] | None = None,
    seed: int = 0,
) -> AnconaReport:
    """Empirical Green-comparison constants on sampled geodesic triples.

    For w on the geodesic from e to y the quotient G(e,y)/(G(e,w)G(w,y))
    is measured across samples, distances and z in [1, r]; its product
    with G(e,e|z) should sit at 1 for a tree.  One-step Green ratios give
    the distance-one growth constant, and boundary-separated quadruples
    give the deviation of the cross-ratio from 1.
    """
    rng = random.Random(seed)
    cert = system.radius()
    if z_values is None:
        z_values = (1.0, 0.5 * (1.0 + cert.lo), cert.lo)
    ab = system.spec.alphabet
    letters = system.letters

    def random_word(n: int) -> ReducedWord:
        out: list[int] = []
        for _ in range(n):
            choices = [
                c for c in letters if not out or c != ab.inverse_letter(out[-1])
            ]
            out.append(rng.choice(choices))
        return word(ab, out)

    e = identity(ab)
    triple_min = math.inf
    triple_max = -math.inf
    green_gap = 0.0
    harnack_max = 0.0
    quad_max = 0.0
    spread = []
    samples = 0
    for z in z_values:
        sol = system.solve(z)
        G = float(sol.green)
        vals = {c: float(sol.values[c]) for c in letters}
        for n in distances:
            lo_n, hi_n = math.inf, -math.inf
            for _ in range(n_pairs):
                y = random_word(n)
                m = rng.randrange(1, n)
                wmid = y.prefix(m)
                g_ey = _passage_product(vals, y) * G
                g_ew = _passage_product(vals, wmid) * G
                g_wy = _passage_product(vals, wmid.inverse() * y) * G
                triple = g_ey / (g_ew * g_wy)
                lo_n, hi_n = min(lo_n, triple), max(hi_n, triple)
                green_gap = max(green_gap, abs(triple * G - 1.0))
                # distance-one growth toward / away from y
                xp = y.prefix(1)
                g_xpy = _passage_product(vals, xp.inverse() * y) * G
                ratio = max(g_xpy / g_ey, g_ey / g_xpy)
                harnack_max = max(harnack_max, ratio)
                # cross-ratio of boundary-separated pairs
                first = y.letters[0]
                side = [
                    c for c in letters if c != first and c != ab.inverse_letter(first)
                ]
                xq = word(ab, [rng.choice(side)])
                yq = random_word(n)
                while yq.letters[0] != first:
                    yq = random_word(n)
                g_xy = _passage_product(vals, xq.inverse() * y) * G
                g_xyq = _passage_product(vals, xq.inverse() * yq) * G
                g_eyq = _passage_product(vals, yq) * G
                quad = abs(g_ey * g_xyq / (g_eyq * g_xy) - 1.0)
                quad_max = max(quad_max, quad)
                samples += 1
            triple_min = min(triple_min, lo_n)
            triple_max = max(triple_max, hi_n)
            spread.append((n, hi_n / lo_n - 1.0))
    # collapse per-distance spreads over z grids: worst per distance
    worst: dict[int, float] = {}
    for n, s in spread:
        worst[n] = max(worst.get(n, 0.0), s)
    return AnconaReport(
        z_values=tuple(float(z) for z in z_values),
        distances=tuple(distances),
        triple_min=triple_min,
        triple_max=triple_max,
        triple_green_gap=green_gap,
        per_distance_spread=tuple(sorted(worst.items())),
        harnack_max=harnack_max,
        quadruple_max=quad_max,
        samples=samples,
    )
