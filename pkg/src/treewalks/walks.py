"""Random walk specifications and n-step machinery on trees and free groups.

Two kinds of step distribution are supported: isotropic walks on the
(q+1)-regular tree, given by radial weights a_d spread uniformly over
spheres, and finitely supported walks on a free group, given by an
explicit probability map on reduced words.  Isotropic walks project to
a Markov chain on distances; that radial chain is the workhorse for
large n.  Finitely supported walks convolve on words, exactly in
rationals for small n and in floating point with mass pruning beyond.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConvergenceError, ValidationError
from .geometry import (
    Alphabet,
    ReducedWord,
    distance,
    free_group,
    identity,
    parse_word,
    sphere_size,
    tree_alphabet,
    format_word,
    word,
)

EXACT_STEP_LIMIT = 64  # exact rational convolution is the default up to here
PRUNE_DEFAULT = Fraction(1, 10**30)


@dataclass(frozen=True)
class WalkSpec:
    """A step distribution, either radial on a tree or explicit on words."""

    mode: str  # 'isotropic' | 'finitely-supported'
    q: int | None = None
    coefficients: tuple[tuple[int, Fraction], ...] = ()
    group: Alphabet | None = None
    mu: tuple[tuple[ReducedWord, Fraction], ...] = ()

    def __post_init__(self) -> None:
        if self.mode == "isotropic":
            self._validate_isotropic()
        elif self.mode == "finitely-supported":
            self._validate_finite()
        else:
            raise ValidationError(f"unknown walk mode {self.mode!r}")

    # -- validation ----------------------------------------------------

    def _validate_isotropic(self) -> None:
        if self.q is None or self.q < 1:
            raise ValidationError("isotropic walk needs q >= 1")
        if not self.coefficients:
            raise ValidationError("isotropic walk needs radial weights")
        total = Fraction(0)
        seen: set[int] = set()
        for d, a in self.coefficients:
            if d < 0 or d in seen:
                raise ValidationError("radial weights must use distinct d >= 0")
            seen.add(d)
            if a < 0:
                raise ValidationError("negative weight")
            total += a
        if total != 1:
            raise ValidationError(f"weights sum to {total}, expected 1")
        degrees = {d for d, a in self.coefficients if a > 0}
        aperiodic = 0 in degrees or (
            any(d % 2 for d in degrees) and any(d % 2 == 0 for d in degrees)
        )
        if not aperiodic:
            raise ValidationError("walk is periodic: need a_0 > 0 or mixed parities")

    def _validate_finite(self) -> None:
        if self.group is None or self.group.kind not in ("free", "involutive"):
            raise ValidationError(
                "finitely supported walks need a free or involutive alphabet"
            )
        if not self.mu:
            raise ValidationError("empty support")
        total = Fraction(0)
        seen: set[tuple[int, ...]] = set()
        for w, p in self.mu:
            if w.alphabet != self.group:
                raise ValidationError("support word over wrong alphabet")
            if w.letters in seen:
                raise ValidationError("duplicate support word")
            seen.add(w.letters)
            if p < 0:
                raise ValidationError("negative probability")
            total += p
        if total != 1:
            raise ValidationError(f"probabilities sum to {total}, expected 1")
        if self.mu_map.get(identity(self.group), Fraction(0)) == 0:
            raise ValidationError("need mu(e) > 0 for aperiodicity")
        self._check_generation()

    def _check_generation(self) -> None:
        # The semigroup generated by the support must cover the whole group;
        # it does once every generator is reachable by iterated steps.
        targets = {(a,) for a in self.group.letters}
        reached: set[tuple[int, ...]] = {()}
        frontier = {w.letters for w, p in self.mu if p > 0}
        for _ in range(2 * self.range + 2):
            reached |= frontier
            if targets <= reached:
                return
            frontier = {
                (word(self.group, u) * word(self.group, s)).letters
                for u in frontier
                for s in ({w.letters for w, p in self.mu if p > 0})
            }
        raise ValidationError("support does not generate the group")

    # -- shared views ---------------------------------------------------

    @property
    def alphabet(self) -> Alphabet:
        if self.mode == "isotropic":
            return tree_alphabet(self.q)
        return self.group

    @property
    def degree(self) -> int:
        return self.alphabet.degree

    @property
    def mu_map(self) -> dict[ReducedWord, Fraction]:
        return dict(self.mu)

    @property
    def coefficient_map(self) -> dict[int, Fraction]:
        return dict(self.coefficients)

    @property
    def range(self) -> int:
        if self.mode == "isotropic":
            return max(d for d, a in self.coefficients if a > 0)
        return max(len(w) for w, p in self.mu if p > 0)

    @property
    def is_nearest_neighbour(self) -> bool:
        return self.range == 1

    @property
    def is_uniform_nn(self) -> bool:
        """True when the step law is lazy uniform nearest-neighbour."""
        if self.mode == "isotropic":
            return self.range == 1
        if self.range != 1:
            return False
        probs = {p for w, p in self.mu if len(w) == 1}
        return len(probs) == 1 and len([w for w, _ in self.mu if len(w) == 1]) == self.degree

    def as_isotropic(self) -> "WalkSpec":
        """Radial weights of a uniform nearest-neighbour word walk."""
        if self.mode == "isotropic":
            return self
        if not self.is_uniform_nn:
            raise ValidationError("radial projection requires isotropy")
        mu = self.mu_map
        e = identity(self.group)
        a0 = mu.get(e, Fraction(0))
        coeffs = [(0, a0), (1, 1 - a0)]
        return isotropic_walk(self.alphabet.q, dict(coeffs))

    def step_items(self) -> list[tuple[ReducedWord, Fraction]]:
        """Support as explicit (word, probability) pairs, any mode."""
        if self.mode == "finitely-supported":
            return [(w, p) for w, p in self.mu if p > 0]
        out: list[tuple[ReducedWord, Fraction]] = []
        from .geometry import sphere

        for d, a in self.coefficients:
            if a == 0:
                continue
            if d == 0:
                out.append((identity(self.alphabet), a))
                continue
            shell = sphere(self.alphabet, d)
            share = a / len(shell)
            out.extend((w, share) for w in shell)
        return out


def isotropic_walk(q: int, weights: Mapping[int, Fraction | int | str]) -> WalkSpec:
    coeffs = tuple(sorted((d, Fraction(a)) for d, a in weights.items()))
    return WalkSpec(mode="isotropic", q=q, coefficients=coeffs)


def finite_walk(
    group: Alphabet, mu: Mapping[ReducedWord, Fraction | int | str]
) -> WalkSpec:
    items = tuple(sorted(((w, Fraction(p)) for w, p in mu.items()), key=lambda t: t[0].letters))
    return WalkSpec(mode="finitely-supported", group=group, mu=items)


def word_twin(spec: WalkSpec) -> WalkSpec:
    """Nearest-neighbour isotropic walk rewritten as an explicit word walk.

    The (q+1)-regular tree is the Cayley graph of q+1 order-two generators,
    so a lazy uniform step law has a word-by-word twin there.  Lets the
    generating-function machinery run on isotropic input.
    """
    if spec.mode != "isotropic" or spec.range > 1:
        raise ValidationError(
            "word twin exists only for nearest-neighbour isotropic walks"
        )
    ab = tree_alphabet(spec.q)
    cm = spec.coefficient_map
    per = cm.get(1, Fraction(0)) / (spec.q + 1)
    mu: dict[ReducedWord, Fraction] = {identity(ab): cm.get(0, Fraction(0))}
    for c in ab.letters:
        mu[word(ab, [c])] = per
    return finite_walk(ab, mu)


# ---------------------------------------------------------------------------
# Radial projection


def sphere_intersection(q: int, k: int, d: int, kp: int) -> int:
    """#\\{y : d(x,y) = d, |y| = kp\\} for any |x| = k on the (q+1)-regular tree.

    Case analysis over the depth m of the confluent x ^ y; each (k, d, kp)
    admits at most one m = (k + kp - d)/2.
    """
    if min(k, d, kp) < 0:
        return 0
    if d == 0:
        return 1 if kp == k else 0
    two_m = k + kp - d
    if two_m < 0 or two_m % 2:
        return 0
    m = two_m // 2
    if m > min(k, kp):
        return 0
    if m == k:
        # y sits below x; from the root every branch is available
        return sphere_size(q, d) if k == 0 else q**d
    t = kp - m  # descent after the climb to the confluent
    if t == 0:
        return 1
    if m == 0:
        return q**t
    return (q - 1) * q ** (t - 1)


@dataclass
class RadialChain:
    """Distance-from-root projection of an isotropic walk."""

    spec: WalkSpec

    def __post_init__(self) -> None:
        if self.spec.mode != "isotropic":
            raise ValidationError("radial projection requires isotropy")
        self.q = self.spec.q
        self._coeffs = [(d, a) for d, a in self.spec.coefficients if a > 0]

    def row(self, k: int) -> dict[int, Fraction]:
        """Exact transition probabilities from distance k."""
        out: dict[int, Fraction] = {}
        for d, a in self._coeffs:
            share = a / sphere_size(self.q, d)
            for kp in range(max(0, k - d), k + d + 1):
                n = sphere_intersection(self.q, k, d, kp)
                if n:
                    out[kp] = out.get(kp, Fraction(0)) + share * n
        return out

    def distribution_exact(self, n: int) -> list[Fraction]:
        """Distribution of |X_n| started at the root, as exact rationals."""
        kmax = n * self.spec.range
        rows = [self.row(k) for k in range(kmax + 1)]
        vec = [Fraction(0)] * (kmax + 1)
        vec[0] = Fraction(1)
        for _ in range(n):
            nxt = [Fraction(0)] * (kmax + 1)
            for k, mass in enumerate(vec):
                if mass == 0:
                    continue
                for kp, p in rows[k].items():
                    if kp <= kmax:
                        nxt[kp] += mass * p
            vec = nxt
        return vec

    def distributions_float(self, n_max: int, collect: Sequence[int] | None = None):
        """Float distributions of |X_n|; yields (n, vector) at requested n.

        Runs one sweep to n_max with vectorised banded updates; adequate
        for n ~ 1e4.  Relative rounding stays tiny because every update
        adds nonnegative terms.
        """
        rng = self.spec.range
        kmax = n_max * rng
        offsets: dict[int, np.ndarray] = {}
        ks = np.arange(kmax + 1)
        for delta in range(-rng, rng + 1):
            col = np.zeros(kmax + 1)
            for k in range(kmax + 1):
                kp = k + delta
                if kp < 0 or kp > kmax:
                    continue
                total = 0.0
                for d, a in self._coeffs:
                    n_int = sphere_intersection(self.q, k, d, kp)
                    if n_int:
                        total += float(a) * n_int / sphere_size(self.q, d)
                col[k] = total
            offsets[delta] = col
        wanted = set(collect) if collect is not None else set(range(n_max + 1))
        vec = np.zeros(kmax + 1)
        vec[0] = 1.0
        if 0 in wanted:
            yield 0, vec.copy()
        for n in range(1, n_max + 1):
            nxt = np.zeros(kmax + 1)
            for delta, col in offsets.items():
                prod = col * vec
                if delta == 0:
                    nxt += prod
                elif delta > 0:
                    nxt[delta:] += prod[:-delta]
                else:
                    nxt[:delta] += prod[-delta:]
            vec = nxt
            if n in wanted:
                yield n, vec.copy()

    def return_sequence(self, n_max: int) -> np.ndarray:
        """p^(n)(e, e) for n = 0..n_max."""
        out = np.zeros(n_max + 1)
        for n, vec in self.distributions_float(n_max):
            out[n] = vec[0]
        return out


# ---------------------------------------------------------------------------
# Rank-one walks: the free group on one generator is the integer line, and
# signed displacement replaces the word table.  Dense vectors keep n ~ 1e4
# affordable where the word engine would drown in dict churn.


def lattice_offsets(spec: WalkSpec) -> dict[int, float]:
    """Step law of a rank-one word walk as signed displacements."""
    if spec.mode != "finitely-supported" or spec.group.size != 1:
        raise ValidationError("lattice view requires a rank-one word walk")
    out: dict[int, float] = {}
    for w, p in spec.mu:
        if p > 0:
            m = len(w) if not w.letters or w.letters[0] > 0 else -len(w)
            out[m] = out.get(m, 0.0) + float(p)
    return out


def lattice_distributions(spec: WalkSpec, n_max: int):
    """Yields (n, origin_index, vector) for a rank-one walk, n = 0..n_max.

    The vector is a live buffer, only valid until the next iteration;
    position m sits at index origin_index + m.
    """
    steps = lattice_offsets(spec)
    rng = max(abs(m) for m in steps)
    half = n_max * rng
    vec = np.zeros(2 * half + 1)
    vec[half] = 1.0
    yield 0, half, vec
    for n in range(1, n_max + 1):
        nxt = np.zeros_like(vec)
        for m, p in steps.items():
            if m == 0:
                nxt += p * vec
            elif m > 0:
                nxt[m:] += p * vec[:-m]
            else:
                nxt[:m] += p * vec[-m:]
        vec = nxt
        yield n, half, vec


def lattice_return_sequence(spec: WalkSpec, n_max: int) -> np.ndarray:
    out = np.zeros(n_max + 1)
    for n, half, vec in lattice_distributions(spec, n_max):
        out[n] = vec[half]
    return out


# ---------------------------------------------------------------------------
# n-step distributions


@dataclass
class NStepResult:
    """Distribution of X_n from the root, with truncation accounting.

    ``pruned`` is total discarded mass; each reported probability p is a
    lower bound with upper bound p + pruned.
    """

    spec: WalkSpec
    n: int
    exact: bool
    radial: list | None = None
    table: dict | None = None
    pruned: Fraction | float = 0

    def probability(self, y: ReducedWord | int):
        """p^(n)(e, y); accepts a distance for isotropic walks."""
        if self.radial is not None:
            k = y if isinstance(y, int) else len(y)
            if k < 0 or k >= len(self.radial):
                return Fraction(0) if self.exact else 0.0
            return self.radial[k] / sphere_size(self.spec.q, k)
        if isinstance(y, int):
            raise ValidationError("word target required for word walks")
        zero = Fraction(0) if self.exact else 0.0
        return self.table.get(y, zero)

    def upper(self, y: ReducedWord | int):
        return self.probability(y) + self.pruned

    def pair(self, x: ReducedWord, y: ReducedWord):
        """p^(n)(x, y) by group invariance."""
        if self.radial is not None:
            return self.probability(distance(x, y))
        return self.probability(x.inverse() * y)


def nstep(
    spec: WalkSpec,
    n: int,
    *,
    exact: bool | None = None,
    prune: Fraction | float | None = None,
) -> NStepResult:
    """Distribution of X_n.  Exact rationals by default for n <= 64."""
    if n < 0:
        raise ValidationError("n must be >= 0")
    if exact is None:
        exact = n <= EXACT_STEP_LIMIT
    if spec.mode == "isotropic":
        chain = RadialChain(spec)
        if exact:
            return NStepResult(spec, n, True, radial=chain.distribution_exact(n))
        for m, vec in chain.distributions_float(n, collect=[n]):
            return NStepResult(spec, n, False, radial=list(vec))
    table, pruned = _convolve_words(spec, n, exact=exact, prune=prune)
    return NStepResult(spec, n, exact, table=table, pruned=pruned)


def _convolve_words(spec, n, *, exact, prune):
    steps = spec.step_items()
    if exact:
        cur: dict[ReducedWord, Fraction] = {identity(spec.alphabet): Fraction(1)}
        pruned = Fraction(0)
        threshold = Fraction(prune) if prune else Fraction(0)
    else:
        cur = {identity(spec.alphabet): 1.0}
        pruned = 0.0
        threshold = float(prune if prune is not None else PRUNE_DEFAULT)
        steps = [(w, float(p)) for w, p in steps]
    for _ in range(n):
        nxt: dict[ReducedWord, object] = {}
        for x, mass in cur.items():
            for g, p in steps:
                y = x * g
                nxt[y] = nxt.get(y, 0) + mass * p
        if threshold:
            kept = {}
            for y, mass in nxt.items():
                if mass < threshold:
                    pruned += mass
                else:
                    kept[y] = mass
            nxt = kept
        cur = nxt
    return cur, pruned


# ---------------------------------------------------------------------------
# Ratio sequences and local limit fits


@dataclass
class RatioSequence:
    """Values p^(n)(x,y)/p^(n)(e,e) with simple convergence diagnostics."""

    ns: list[int]
    values: list[float]
    skipped: list[int]
    last: float
    tail_spread: float

    @property
    def cauchy_tail(self) -> float:
        tail = self.values[-max(2, len(self.values) // 10) :]
        return max(abs(a - b) for a, b in zip(tail, tail[1:])) if len(tail) > 1 else 0.0


def ratio_sequence(
    spec: WalkSpec, x: ReducedWord, y: ReducedWord, n_max: int
) -> RatioSequence:
    """Sequence p^(n)(x,y)/p^(n)(e,e) for n <= n_max.

    Isotropic walks use the radial chain for the whole sweep; word walks
    fall back on truncated convolution and are only practical for small
    n_max.  Zero-denominator entries are skipped and reported.
    """
    ns: list[int] = []
    values: list[float] = []
    skipped: list[int] = []
    if spec.mode == "isotropic":
        d = distance(x, y)
        chain = RadialChain(spec)
        size = sphere_size(spec.q, d)
        for n, vec in chain.distributions_float(n_max):
            ret = vec[0]
            if ret <= 0.0:
                skipped.append(n)
                continue
            num = vec[d] / size if d < len(vec) else 0.0
            ns.append(n)
            values.append(float(num / ret))
    elif spec.group.size == 1:
        tgt = x.inverse() * y
        m = len(tgt) if not tgt.letters or tgt.letters[0] > 0 else -len(tgt)
        for n, half, vec in lattice_distributions(spec, n_max):
            ret = vec[half]
            if ret <= 0.0:
                skipped.append(n)
                continue
            ns.append(n)
            values.append(float(vec[half + m] / ret))
    else:
        target = x.inverse() * y
        e = identity(spec.alphabet)
        cur: dict[ReducedWord, float] = {e: 1.0}
        steps = [(w, float(p)) for w, p in spec.step_items()]
        threshold = float(PRUNE_DEFAULT)
        for n in range(n_max + 1):
            ret = cur.get(e, 0.0)
            if ret <= 0.0:
                skipped.append(n)
            else:
                ns.append(n)
                values.append(cur.get(target, 0.0) / ret)
            if n == n_max:
                break
            nxt: dict[ReducedWord, float] = {}
            for xw, mass in cur.items():
                for g, p in steps:
                    yw = xw * g
                    nxt[yw] = nxt.get(yw, 0.0) + mass * p
            cur = {w: m for w, m in nxt.items() if m >= threshold}
    if not values:
        raise ConvergenceError("no usable ratio values")
    tail = values[-max(2, len(values) // 10) :]
    return RatioSequence(ns, values, skipped, values[-1], max(tail) - min(tail))


@dataclass(frozen=True)
class LocalLimitFit:
    """Fit of p^(n) ~ C rho^n n^(-alpha) on a window, with a stability probe."""

    rho: float
    alpha: float
    log_c: float
    window: tuple[int, int]
    residual_rms: float
    rho_shift: float  # change in rho when the window start doubles
    alpha_shift: float


def fit_local_limit(
    values: Sequence[float], window: tuple[int, int]
) -> LocalLimitFit:
    """Least squares for log p = log C + n log rho - alpha log n.

    ``values`` is indexed by n.  The sensitivity probe refits on
    [2*lo, hi] and reports the drift of both exponents.
    """
    lo, hi = window
    if hi > len(values):
        raise ValidationError("window exceeds available values")

    def _fit(lo_, hi_):
        ns = np.array(
            [n for n in range(lo_, hi_) if n < len(values) and values[n] > 0],
            dtype=float,
        )
        if ns.size < 8:
            raise ValidationError("window shorter than 8 usable points")
        logs = np.log(np.array([values[int(n)] for n in ns], dtype=float))
        design = np.column_stack([ns, np.log(ns), np.ones_like(ns)])
        coef, _, rank, _ = np.linalg.lstsq(design, logs, rcond=None)
        if rank < 3:
            raise ValidationError("degenerate design matrix in local limit fit")
        resid = logs - design @ coef
        return coef, float(np.sqrt(np.mean(resid**2)))

    coef, rms = _fit(lo, hi)
    try:
        coef2, _ = _fit(2 * lo, hi)
        rho_shift = float(abs(math.exp(coef2[0]) - math.exp(coef[0])))
        alpha_shift = float(abs(coef[1] - coef2[1]))
    except ValidationError:
        rho_shift = float("nan")
        alpha_shift = float("nan")
    return LocalLimitFit(
        rho=float(math.exp(coef[0])),
        alpha=float(-coef[1]),
        log_c=float(coef[2]),
        window=(lo, hi),
        residual_rms=rms,
        rho_shift=rho_shift,
        alpha_shift=alpha_shift,
    )


# ---------------------------------------------------------------------------
# Spectral radius


@dataclass(frozen=True)
class SpectralRadius:
    value: float
    method: str
    details: dict = field(default_factory=dict, compare=False)


def spectral_radius(spec: WalkSpec, *, fit_check: bool = False) -> SpectralRadius:
    """Decay rate rho = limsup p^(n)(e,e)^(1/n).

    Isotropic walks use the spherical transform, nearest-neighbour free
    group walks the singularity radius of the first-passage system, and
    rank-one lattice walks the minimising exponential.  Anything else
    falls back on a local limit fit.
    """
    if spec.mode == "isotropic":
        from .kernels import spherical

        val = sum(float(a) * spherical(spec.q, d) for d, a in spec.coefficients)
        out = SpectralRadius(val, "spherical-transform", {"q": spec.q})
    elif spec.is_nearest_neighbour and spec.group.size == 1:
        out = _lattice_spectral_radius(spec)
    elif spec.is_nearest_neighbour:
        from .series import shared_system

        system = shared_system(spec)
        cert = system.radius()
        out = SpectralRadius(
            1.0 / cert.r,
            "singularity-radius",
            {"r": cert.r, "bracket": (cert.lo, cert.hi)},
        )
    else:
        out = _fitted_spectral_radius(spec)
    if fit_check and out.method != "fit":
        fit = _fitted_spectral_radius(spec)
        out = SpectralRadius(out.value, out.method, {**out.details, "fit": fit.value})
    return out


def _lattice_spectral_radius(spec: WalkSpec) -> SpectralRadius:
    # rank-one free group = the integers; rho = min_c sum mu(m) e^(c m)
    from scipy.optimize import brentq

    mu = lattice_offsets(spec)

    def dm(c):
        return sum(m * p * math.exp(c * m) for m, p in mu.items())

    has_pos = any(m > 0 for m in mu)
    has_neg = any(m < 0 for m in mu)
    if not (has_pos and has_neg):
        raise ValidationError("lattice walk must move both ways")
    c_star = brentq(dm, -60.0, 60.0, xtol=1e-15)
    rho = sum(p * math.exp(c_star * m) for m, p in mu.items())
    return SpectralRadius(rho, "lattice-exponential", {"c": c_star})


def _fitted_spectral_radius(spec: WalkSpec) -> SpectralRadius:
    n_max = 400 if spec.mode == "isotropic" else 120
    if spec.mode == "isotropic":
        seq = RadialChain(spec).return_sequence(n_max)
    else:
        e = identity(spec.alphabet)
        seq = np.zeros(n_max + 1)
        cur = {e: 1.0}
        steps = [(w, float(p)) for w, p in spec.step_items()]
        for n in range(n_max + 1):
            seq[n] = cur.get(e, 0.0)
            nxt: dict[ReducedWord, float] = {}
            for xw, mass in cur.items():
                for g, p in steps:
                    yw = xw * g
                    nxt[yw] = nxt.get(yw, 0.0) + mass * p
            cur = {w: m for w, m in nxt.items() if m > 1e-30}
    fit = fit_local_limit(seq, (n_max // 4, n_max + 1))
    return SpectralRadius(fit.rho, "fit", {"alpha": fit.alpha})


# ---------------------------------------------------------------------------
# Text format for walk specifications
#
#   mode isotropic            |  mode finitely-supported
#   q 2                       |  rank 2
#   0 1/2                     |  e 1/5
#   1 1/2                     |  1 1/5
#                             |  -1,2 1/10   (word a1^-1 a2)


def load_walk_spec(text: str) -> WalkSpec:
    lines = [
        ln.strip()
        for ln in text.splitlines()
        if ln.strip() and not ln.strip().startswith("#")
    ]
    if len(lines) < 3:
        raise ValidationError("walk spec needs mode, size and weight lines")
    mode_key, _, mode_val = lines[0].partition(" ")
    if mode_key != "mode":
        raise ValidationError("first line must set the mode")
    size_key, _, size_val = lines[1].partition(" ")
    try:
        size = int(size_val)
    except ValueError as exc:
        raise ValidationError(f"bad size line {lines[1]!r}") from exc
    mode_val = mode_val.strip()
    if mode_val == "isotropic":
        if size_key != "q":
            raise ValidationError("isotropic spec needs a 'q <int>' line")
        weights: dict[int, Fraction] = {}
        for ln in lines[2:]:
            key, _, val = ln.partition(" ")
            weights[int(key)] = Fraction(val.strip())
        return isotropic_walk(size, weights)
    if mode_val == "finitely-supported":
        if size_key != "rank":
            raise ValidationError("finitely supported spec needs a 'rank <int>' line")
        group = free_group(size)
        mu: dict[ReducedWord, Fraction] = {}
        for ln in lines[2:]:
            key, _, val = ln.partition(" ")
            mu[parse_word(group, key)] = Fraction(val.strip())
        return finite_walk(group, mu)
    raise ValidationError(f"unknown mode {mode_val!r}")


def dump_walk_spec(spec: WalkSpec) -> str:
    lines = [f"mode {spec.mode}"]
    if spec.mode == "isotropic":
        lines.append(f"q {spec.q}")
        lines.extend(f"{d} {a}" for d, a in spec.coefficients)
    else:
        lines.append(f"rank {spec.group.size}")
        lines.extend(f"{format_word(w)} {p}" for w, p in spec.mu)
    return "\n".join(lines) + "\n"
