"""Direct and coordinate-switching products of two walks.

A direct product steps both coordinates at once, so n-step laws
factorize exactly.  The switching (cartesian) product moves one
coordinate per step, chosen by a Bernoulli(s) coin, and its n-step law
is the binomial mixture of the factor laws.  Decay parameters combine
in closed form; boundary kernels multiply coordinatewise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import ValidationError
from .geometry import EndPrefix, ReducedWord, format_word
from .kernels import KernelValue, ratio_kernel_isotropic, ratio_kernel_nn
from .series import FirstPassageSystem, shared_system
from .walks import (
    RadialChain,
    WalkSpec,
    lattice_return_sequence,
    nstep,
    spectral_radius,
    word_twin,
)

__all__ = [
    "ProductWalk",
    "ProductBoundaryPoint",
    "direct_product",
    "cartesian_product",
    "factor_kernel",
    "factor_returns",
    "factor_alpha",
    "product_ratio_kernel",
    "product_return_sequence",
    "product_nstep_pair",
    "cartesian_asymptotics",
    "identify_equivalent_boundary",
    "product_report",
]


@dataclass(frozen=True)
class ProductWalk:
    """Two factor walks glued either simultaneously or by a switch coin."""

    left: WalkSpec
    right: WalkSpec
    kind: str
    weight: Fraction = Fraction(1, 2)

    def __post_init__(self):
        if self.kind not in ("direct", "cartesian"):
            raise ValidationError("kind must be direct or cartesian")
        if self.kind == "cartesian" and not 0 < self.weight < 1:
            raise ValidationError("switch weight must lie in (0, 1)")


def direct_product(left: WalkSpec, right: WalkSpec) -> ProductWalk:
    return ProductWalk(left, right, "direct")


def cartesian_product(
    left: WalkSpec, right: WalkSpec, weight: Fraction = Fraction(1, 2)
) -> ProductWalk:
    return ProductWalk(left, right, "cartesian", Fraction(weight))


@dataclass(frozen=True)
class ProductBoundaryPoint:
    """A limit direction of the product: each coordinate is a vertex or
    an end prefix, with at least one genuinely at infinity."""

    left: ReducedWord | EndPrefix
    right: ReducedWord | EndPrefix

    def __post_init__(self):
        if not isinstance(self.left, EndPrefix) and not isinstance(
            self.right, EndPrefix
        ):
            raise ValidationError(
                "a product boundary point needs at least one end coordinate"
            )


# ---------------------------------------------------------------------------
# Per-factor dispatch


def _system_for(spec: WalkSpec) -> FirstPassageSystem:
    return shared_system(spec)


def _signed_length(x: ReducedWord) -> int:
    if not x.letters:
        return 0
    return len(x) if x.letters[0] > 0 else -len(x)


def _lattice_kernel(spec: WalkSpec, x: ReducedWord, target) -> KernelValue:
    # ratio limit of a one-generator word walk: the n-step law tilts by
    # the exponential that minimises the step transform, and the target
    # drops out entirely
    sr = spectral_radius(spec)
    c = sr.details["c"]
    value = math.exp(c * _signed_length(x))
    label = (
        format_word(target.word) + "..."
        if isinstance(target, EndPrefix)
        else format_word(target)
    )
    return KernelValue(format_word(x), label, None, value, 0.0, True)


def factor_kernel(spec: WalkSpec, x: ReducedWord, target) -> KernelValue:
    """Ratio-limit kernel of one factor, routed by walk structure."""
    if spec.mode == "isotropic":
        return ratio_kernel_isotropic(spec, x, target)
    if spec.group.size == 1:
        return _lattice_kernel(spec, x, target)
    if spec.is_nearest_neighbour:
        return ratio_kernel_nn(_system_for(spec), x, target)
    raise ValidationError(
        "no ratio kernel route for this factor; need isotropic, rank-one "
        "or nearest-neighbour structure"
    )


def factor_returns(spec: WalkSpec, n_max: int) -> np.ndarray:
    """Return probabilities p^(n)(e,e), n = 0..n_max, for one factor."""
    if spec.mode == "isotropic":
        return RadialChain(spec).return_sequence(n_max)
    if spec.group.size == 1:
        return lattice_return_sequence(spec, n_max)
    if spec.is_nearest_neighbour:
        from .series import series_coefficients

        ps = series_coefficients(_system_for(spec), None, n_max, exact=False)
        return np.array(ps.floats(), dtype=float)
    raise ValidationError("no return-sequence route for this factor")


def factor_alpha(spec: WalkSpec) -> float:
    """Local-limit power for one factor: 1/2 on the line, 3/2 on trees."""
    if spec.mode == "isotropic":
        return 0.5 if spec.q == 1 else 1.5
    return 0.5 if spec.group.size == 1 else 1.5


# ---------------------------------------------------------------------------
# Kernels on the product


def product_ratio_kernel(
    pw: ProductWalk, x_pair, target_pair
) -> KernelValue:
    """Ratio-limit kernel of the product: factor kernels multiplied.

    Holds for both product kinds; the switch weight cancels from the
    ratio.  Stabilization is the conjunction of the factor flags and
    the error bound is propagated through the product.
    """
    x1, x2 = x_pair
    if isinstance(target_pair, ProductBoundaryPoint):
        t1, t2 = target_pair.left, target_pair.right
    else:
        t1, t2 = target_pair
    k1 = factor_kernel(pw.left, x1, t1)
    k2 = factor_kernel(pw.right, x2, t2)
    value = k1.value * k2.value
    err = (
        abs(k1.value) * k2.error
        + abs(k2.value) * k1.error
        + k1.error * k2.error
    )
    depth = None
    for k in (k1, k2):
        if k.depth is not None:
            depth = k.depth if depth is None else min(depth, k.depth)
    return KernelValue(
        x=f"{k1.x}|{k2.x}",
        y_or_prefix=f"{k1.y_or_prefix}|{k2.y_or_prefix}",
        depth=depth,
        value=value,
        error=err,
        stabilized=k1.stabilized and k2.stabilized,
    )


# ---------------------------------------------------------------------------
# n-step laws


def product_nstep_pair(pw: ProductWalk, n: int, y1: ReducedWord, y2: ReducedWord):
    """Exact n-step probability of reaching (y1, y2) from the origin pair.

    Isotropic factors are rewritten as their word twins so the rational
    convolution applies.
    """
    left, right = pw.left, pw.right
    if left.mode == "isotropic":
        left = word_twin(left)
    if right.mode == "isotropic":
        right = word_twin(right)
    if pw.kind == "direct":
        p1 = nstep(left, n, exact=True).probability(y1)
        p2 = nstep(right, n, exact=True).probability(y2)
        return p1 * p2
    s = pw.weight
    total = Fraction(0)
    for k in range(n + 1):
        p1 = nstep(left, k, exact=True).probability(y1)
        if p1 == 0:
            continue
        p2 = nstep(right, n - k, exact=True).probability(y2)
        if p2 == 0:
            continue
        total += math.comb(n, k) * s**k * (1 - s) ** (n - k) * p1 * p2
    return total


def product_return_sequence(pw: ProductWalk, n_max: int) -> np.ndarray:
    """Return probabilities of the product walk, n = 0..n_max.

    Direct products multiply termwise.  Switching products mix the
    factor sequences binomially; the mixture runs in log space since
    the summands span hundreds of orders of magnitude by n ~ 10^3.
    """
    r1 = factor_returns(pw.left, n_max)
    r2 = factor_returns(pw.right, n_max)
    if pw.kind == "direct":
        return r1 * r2
    s = float(pw.weight)
    with np.errstate(divide="ignore"):
        l1 = np.log(r1)
        l2 = np.log(r2)
    out = np.zeros(n_max + 1)
    out[0] = 1.0
    lg = gammaln(np.arange(n_max + 2))
    for n in range(1, n_max + 1):
        ks = np.arange(n + 1)
        terms = (
            lg[n + 1]
            - lg[ks + 1]
            - lg[n - ks + 1]
            + ks * math.log(s)
            + (n - ks) * math.log(1.0 - s)
            + l1[ks]
            + l2[n - ks]
        )
        finite = terms[np.isfinite(terms)]
        out[n] = math.exp(logsumexp(finite)) if finite.size else 0.0
    return out


# ---------------------------------------------------------------------------
# Asymptotics of the switching product


@dataclass(frozen=True)
class CartesianAsymptotics:
    rho: float
    alpha: float
    coefficient: float
    theta: float


def cartesian_asymptotics(
    pw: ProductWalk,
    fit1: tuple[float, float],
    fit2: tuple[float, float],
) -> CartesianAsymptotics:
    """Combine factor decay fits (rho_i, alpha_i) for the switching product.

    The coin splits time in proportion theta = s rho1 / rho; the decay
    rate interpolates linearly, the powers add, and the constant picks
    up theta^alpha1 (1-theta)^alpha2.
    """
    if pw.kind != "cartesian":
        raise ValidationError("asymptotics combination is for cartesian kind")
    rho1, alpha1 = fit1
    rho2, alpha2 = fit2
    s = float(pw.weight)
    rho = s * rho1 + (1.0 - s) * rho2
    theta = s * rho1 / rho
    coeff = theta**alpha1 * (1.0 - theta) ** alpha2
    return CartesianAsymptotics(
        rho=rho, alpha=alpha1 + alpha2, coefficient=coeff, theta=theta
    )


# ---------------------------------------------------------------------------
# Boundary identification at probe resolution


@dataclass(frozen=True)
class BoundaryClasses:
    """Partition of candidate boundary pairs by kernel agreement.

    Certifies distinctness exactly and sameness only at the given probe
    resolution and tolerance.
    """

    classes: tuple[tuple[int, ...], ...]
    tol: float
    probe_count: int

    def class_of(self, i: int) -> int:
        for c, members in enumerate(self.classes):
            if i in members:
                return c
        raise ValidationError(f"candidate {i} not in any class")


def identify_equivalent_boundary(
    pw: ProductWalk,
    candidates,
    probes,
    tol: float = 1e-7,
) -> BoundaryClasses:
    """Group candidate boundary pairs whose kernels agree on all probes.

    Candidates join the first earlier class whose value vector matches
    within relative tol at every probe; input order fixes the outcome,
    keeping reports deterministic.
    """
    vectors = []
    for cand in candidates:
        vec = np.array(
            [product_ratio_kernel(pw, probe, cand).value for probe in probes]
        )
        vectors.append(vec)
    classes: list[list[int]] = []
    reps: list[np.ndarray] = []
    for i, vec in enumerate(vectors):
        placed = False
        for c, rep in enumerate(reps):
            scale = np.maximum(np.abs(rep), 1e-300)
            if np.max(np.abs(vec - rep) / scale) <= tol:
                classes[c].append(i)
                placed = True
                break
        if not placed:
            classes.append([i])
            reps.append(vec)
    return BoundaryClasses(
        classes=tuple(tuple(c) for c in classes),
        tol=tol,
        probe_count=len(probes),
    )


# ---------------------------------------------------------------------------
# Reporting


def product_report(
    pw: ProductWalk,
    fits: tuple[tuple[float, float], tuple[float, float]] | None = None,
    classes: BoundaryClasses | None = None,
) -> dict:
    """JSON-ready summary: factor parameters, combined asymptotics, classes."""
    if fits is None:
        fits = (
            (spectral_radius(pw.left).value, factor_alpha(pw.left)),
            (spectral_radius(pw.right).value, factor_alpha(pw.right)),
        )
    payload: dict = {
        "schema": 1,
        "kind": pw.kind,
        "factors": [
            {"rho": fits[0][0], "alpha": fits[0][1]},
            {"rho": fits[1][0], "alpha": fits[1][1]},
        ],
    }
    if pw.kind == "cartesian":
        payload["weight"] = float(pw.weight)
        asym = cartesian_asymptotics(pw, fits[0], fits[1])
        payload["combined"] = {
            "rho": asym.rho,
            "alpha": asym.alpha,
            "coefficient": asym.coefficient,
            "theta": asym.theta,
        }
    else:
        payload["combined"] = {
            "rho": fits[0][0] * fits[1][0],
            "alpha": fits[0][1] + fits[1][1],
        }
    if classes is not None:
        payload["classes"] = [list(c) for c in classes.classes]
        payload["class_tol"] = classes.tol
    return payload
