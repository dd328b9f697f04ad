"""Generating functions of nearest-neighbour walks on free groups.

For a nearest-neighbour step law on a free group (or on a free product of
order-two generators, which covers regular trees) every first-passage
generating function factors over the letters of the target word, and the
one-letter functions solve a quadratic fixed-point system with one unknown
per letter.  This module solves that system in multiprecision arithmetic,
locates the shared singularity of all the generating functions, extracts
the square-root expansion data there, produces Taylor coefficients, and
evaluates second-order Green sums.

The minimal nonnegative solution of the fixed-point system is the
probabilistic one.  We reach it by monotone iteration from zero followed by
Newton steps, which for this class of systems stay below the fixed point
and converge even at the fold, where plain iteration slows to a crawl.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction

import numpy as np
from mpmath import mp

from .errors import ConvergenceError, ValidationError
from .geometry import ReducedWord, format_word, identity, word
from .walks import EXACT_STEP_LIMIT, WalkSpec

__all__ = [
    "FirstPassageSystem",
    "SolveResult",
    "RadiusCertificate",
    "FoldPoint",
    "PuiseuxData",
    "PowerSeries",
    "SecondOrderGreen",
    "series_coefficients",
    "green_second_order",
    "derivative_identity",
]

KLEENE_WARMUP = 25
NEWTON_CAP = 400
VALUE_BOUND = 1e9
BRACKET_WIDTH = 1e-13  # bisection stops below the certified 1e-12


@dataclass
class SolveResult:
    """Minimal nonnegative solution of the fixed-point system at one z."""

    z: object
    letters: tuple[int, ...]
    values: dict[int, object]
    green: object | None  # None when the return series diverges
    iterations: int
    residual: object

    def value(self, letter: int):
        return self.values[letter]

    def first_passage(self, target: ReducedWord):
        out = mp.mpf(1)
        for c in target.letters:
            out *= self.values[c]
        return out

    def green_to(self, target: ReducedWord):
        if self.green is None:
            raise ConvergenceError(
                f"Green function diverges at z = {mp.nstr(self.z, 17)}: "
                "the return generating function reaches 1"
            )
        return self.first_passage(target) * self.green


@dataclass(frozen=True)
class RadiusCertificate:
    """Bisection bracket around the shared singularity."""

    r: float
    lo: float  # system still solvable here
    hi: float  # system already unsolvable here
    evaluations: int
    prec: int


@dataclass
class FoldPoint:
    """High-precision singularity data from the augmented (fold) system.

    At the singularity the Jacobian of the fixed-point map has eigenvalue
    one; appending that determinant condition to the system and solving for
    (values, z) jointly recovers both to near working precision.
    """

    r: object
    values: dict[int, object]
    green: object | None
    residual: object
    iterations: int
    prec: int

    def value_at_radius(self, target: ReducedWord):
        if self.green is None:
            raise ConvergenceError(
                "Green function diverges at its singularity; "
                "no finite boundary value there"
            )
        out = self.green
        for c in target.letters:
            out *= self.values[c]
        return out


@dataclass(frozen=True)
class PuiseuxData:
    """Square-root expansion data of one generating function at the fold.

    value(z) = value_at_r - sqrt_coefficient * sqrt(r - z) + O(r - z);
    gamma = sqrt_coefficient / value_at_r.  For word targets the same
    coefficient is also assembled from per-letter gamma data, and the
    relative gap between the two is reported.
    """

    label: str
    radius: float
    value_at_r: float
    sqrt_coefficient: float
    gamma: float
    exponent_estimate: float
    assembled_sqrt_coefficient: float | None
    assembly_gap: float | None
    prec: int


@dataclass(frozen=True)
class PowerSeries:
    """Taylor coefficients at zero; exact rationals or float64."""

    label: str
    coefficients: tuple
    exact: bool

    def floats(self) -> np.ndarray:
        return np.array([float(c) for c in self.coefficients])

    def __len__(self) -> int:
        return len(self.coefficients)


@dataclass(frozen=True)
class SecondOrderGreen:
    """Shell-summed value of sum_v G(x,v|z) G(v,y|z)."""

    value: float
    partial: float
    tail: float
    shells: int
    stabilized: bool
    green_pair: float  # G(x,y|z)
    green_origin: float  # G(e,e|z)

    @property
    def phi(self) -> float:
        return self.value / self.green_pair


class FirstPassageSystem:
    """Solver bundle for the one-letter first-passage functions of a walk.

    Exposes pointwise solves, the singularity bracket, fold refinement,
    and square-root expansion extraction.  All pointwise results are cached
    per evaluation point.
    """

    def __init__(self, spec: WalkSpec, prec: int = 96):
        if spec.mode != "finitely-supported":
            raise ValidationError(
                "first-passage systems need an explicit word step law; "
                "isotropic walks go through the radial chain or a word twin"
            )
        if not spec.is_nearest_neighbour:
            raise ValidationError(
                "first-passage factorization needs a nearest-neighbour step "
                "law; longer-range walks go through the ball matrices"
            )
        if prec < 64:
            raise ValidationError("need at least 64 bits of precision")
        self.spec = spec
        self.prec = int(prec)
        ab = spec.alphabet
        self.letters: tuple[int, ...] = ab.letters
        self.index = {c: k for k, c in enumerate(self.letters)}
        self.inv_index = [
            self.index[ab.inverse_letter(c)] for c in self.letters
        ]
        mu_map = spec.mu_map
        self.mu0_fraction: Fraction = mu_map.get(identity(ab), Fraction(0))
        self.mu_fractions: list[Fraction] = [
            mu_map.get(word(ab, [c]), Fraction(0)) for c in self.letters
        ]
        if self.mu0_fraction <= 0:
            raise ValidationError("need a positive holding probability")
        self._solve_cache: dict = {}
        self._radius_cert: RadiusCertificate | None = None
        self._fold: FoldPoint | None = None
        self._expansion_cache: dict = {}

    # -- fixed-point map -----------------------------------------------

    def _weights(self):
        mu = [
            mp.mpf(p.numerator) / p.denominator for p in self.mu_fractions
        ]
        mu0 = mp.mpf(self.mu0_fraction.numerator) / self.mu0_fraction.denominator
        return mu, mu0

    def _phi(self, f, z, mu, mu0):
        L = len(self.letters)
        s = mp.mpf(0)
        for k in range(L):
            s += mu[k] * f[self.inv_index[k]]
        out = []
        for k in range(L):
            out.append(
                z * (mu[k] + mu0 * f[k] + f[k] * (s - mu[k] * f[self.inv_index[k]]))
            )
        return out, s

    def _jacobian(self, f, z, mu, mu0):
        L = len(self.letters)
        s = mp.mpf(0)
        for k in range(L):
            s += mu[k] * f[self.inv_index[k]]
        J = mp.matrix(L, L)
        for i in range(L):
            ii = self.inv_index[i]
            for k in range(L):
                v = f[i] * mu[self.inv_index[k]]
                if k == i:
                    v += mu0 + s - mu[i] * f[ii]
                if k == ii:
                    v -= mu[i] * f[i]
                J[i, k] = z * v
        return J

    # -- pointwise solve -------------------------------------------------

    def kleene(self, z, steps: int, start=None) -> dict[int, float]:
        """Plain monotone iteration, exposed for minimality experiments.

        start may be a scalar or a per-letter dict; default zero.  Raises
        once iterates pass a divergence bound.
        """
        with mp.workprec(self.prec):
            zz = mp.mpf(z)
            mu, mu0 = self._weights()
            L = len(self.letters)
            if start is None:
                f = [mp.mpf(0)] * L
            elif isinstance(start, dict):
                f = [mp.mpf(start[c]) for c in self.letters]
            else:
                f = [mp.mpf(start)] * L
            for _ in range(steps):
                f, _ = self._phi(f, zz, mu, mu0)
                if max(f) > VALUE_BOUND:
                    raise ConvergenceError(
                        f"iteration escaped its bound at z = {mp.nstr(zz, 17)}"
                    )
            return {c: float(f[self.index[c]]) for c in self.letters}

    def solve(self, z) -> SolveResult:
        key = str(z)
        hit = self._solve_cache.get(key)
        if hit is not None:
            return hit
        with mp.workprec(self.prec):
            zz = mp.mpf(z)
            if zz <= 0:
                raise ValidationError("evaluation point must be positive")
            mu, mu0 = self._weights()
            L = len(self.letters)
            tol = mp.mpf(2) ** (16 - self.prec)
            f = [mp.mpf(0)] * L
            diverged = ConvergenceError(
                f"first-passage solve at z = {mp.nstr(zz, 17)} found no "
                "finite nonnegative fixed point"
            )
            for _ in range(KLEENE_WARMUP):
                f, _ = self._phi(f, zz, mu, mu0)
                if max(f) > VALUE_BOUND:
                    raise diverged
            iterations = KLEENE_WARMUP
            residual = None
            for _ in range(NEWTON_CAP):
                phi, s = self._phi(f, zz, mu, mu0)
                g = [phi[k] - f[k] for k in range(L)]
                residual = max(abs(v) for v in g)
                if residual <= tol:
                    break
                A = mp.eye(L) - self._jacobian(f, zz, mu, mu0)
                try:
                    delta = mp.lu_solve(A, mp.matrix(g))
                except (ZeroDivisionError, ValueError):
                    raise diverged from None
                f = [f[k] + delta[k] for k in range(L)]
                bad = False
                for k in range(L):
                    if mp.isnan(f[k]) or f[k] > VALUE_BOUND:
                        bad = True
                    elif f[k] < 0:
                        f[k] = mp.mpf(0)
                if bad:
                    raise diverged
                iterations += 1
            else:
                raise diverged
            phi, s = self._phi(f, zz, mu, mu0)
            u = zz * (mu0 + s)
            green = 1 / (1 - u) if u < 1 else None
            result = SolveResult(
                z=zz,
                letters=self.letters,
                values={c: f[self.index[c]] for c in self.letters},
                green=green,
                iterations=iterations,
                residual=residual,
            )
        self._solve_cache[key] = result
        return result

    # -- singularity ----------------------------------------------------

    def _solvable(self, z: float) -> bool:
        try:
            self.solve(z)
        except ConvergenceError:
            return False
        return True

    def radius(self) -> RadiusCertificate:
        """Bisection bracket for the shared singularity of the system.

        Works on the solvability predicate directly: below the singularity
        the Newton polish lands on the minimal fixed point, above it there
        is no nonnegative solution to land on.
        """
        if self._radius_cert is not None:
            return self._radius_cert
        lo = 1.0
        hi = min(2.0, float(Fraction(1, 1) / self.mu0_fraction))
        if not self._solvable(lo):
            raise ConvergenceError("first-passage system unsolvable at z = 1")
        if self._solvable(hi):
            raise ConvergenceError(
                "singularity bisection bracket not found in (0, 2]"
            )
        evaluations = 2
        while hi - lo > BRACKET_WIDTH:
            mid = 0.5 * (lo + hi)
            if self._solvable(mid):
                lo = mid
            else:
                hi = mid
            evaluations += 1
        self._radius_cert = RadiusCertificate(
            r=0.5 * (lo + hi), lo=lo, hi=hi, evaluations=evaluations,
            prec=self.prec,
        )
        return self._radius_cert

    def fold(self) -> FoldPoint:
        if self._fold is not None:
            return self._fold
        cert = self.radius()
        prec = max(self.prec + 64, 192)
        L = len(self.letters)
        base = self.solve(cert.lo)
        with mp.workprec(prec):
            mu, mu0 = self._weights()

            def augmented(u):
                f, zv = u[:L], u[L]
                phi, _ = self._phi(f, zv, mu, mu0)
                out = [phi[k] - f[k] for k in range(L)]
                out.append(mp.det(mp.eye(L) - self._jacobian(f, zv, mu, mu0)))
                return out

            u = [mp.mpf(base.values[c]) for c in self.letters]
            u.append(mp.mpf(cert.lo))
            tol = mp.mpf(2) ** (40 - prec)
            h = mp.mpf(2) ** (-(prec // 3))
            residual = None
            iterations = 0
            for _ in range(80):
                g = augmented(u)
                residual = max(abs(v) for v in g)
                if residual <= tol:
                    break
                A = mp.matrix(L + 1, L + 1)
                for j in range(L + 1):
                    up = list(u)
                    up[j] = up[j] + h
                    gj = augmented(up)
                    for i in range(L + 1):
                        A[i, j] = (gj[i] - g[i]) / h
                try:
                    delta = mp.lu_solve(A, mp.matrix(g))
                except (ZeroDivisionError, ValueError):
                    raise ConvergenceError(
                        "fold refinement hit a singular correction step"
                    ) from None
                u = [u[k] - delta[k] for k in range(L + 1)]
                iterations += 1
            else:
                raise ConvergenceError("fold refinement did not converge")
            r = u[L]
            if not (cert.lo - 1e-9 <= float(r) <= cert.hi + 1e-9):
                raise ConvergenceError(
                    "fold refinement left the certified singularity bracket"
                )
            f = u[:L]
            _, s = self._phi(f, r, mu, mu0)
            ret = r * (mu0 + s)
            green = 1 / (1 - ret) if ret < 1 else None
            self._fold = FoldPoint(
                r=r,
                values={c: f[self.index[c]] for c in self.letters},
                green=green,
                residual=residual,
                iterations=iterations,
                prec=prec,
            )
        return self._fold

    # -- square-root expansion data --------------------------------------

    def _target_label(self, target) -> str:
        if target is None:
            return "green"
        if isinstance(target, int):
            return f"letter {target}"
        return format_word(target)

    def _target_value(self, target, sol: SolveResult):
        if target is None:
            return sol.green
        if isinstance(target, int):
            return sol.values[target]
        return sol.green_to(target)

    def _target_fold_value(self, target, fp: FoldPoint):
        if target is None:
            if fp.green is None:
                raise ConvergenceError(
                    "Green function diverges at its singularity; "
                    "no finite boundary value there"
                )
            return fp.green
        if isinstance(target, int):
            return fp.values[target]
        return fp.value_at_radius(target)

    def expansion(self, target=None) -> PuiseuxData:
        """Square-root expansion of one generating function at the fold.

        target: None for the Green function at the identity, a letter, or a
        ReducedWord (meaning the Green function to that word).  The leading
        coefficient comes from two-step differencing with Richardson
        removal of the next fractional order; the measured local exponent
        must sit near one half or the extraction is rejected.
        """
        label = self._target_label(target)
        hit = self._expansion_cache.get(label)
        if hit is not None:
            return hit
        fp = self.fold()
        with mp.workprec(fp.prec):
            r = fp.r
            eps1 = mp.mpf("1e-6")
            eps2 = mp.mpf("1e-8")
            alpha = self._target_fold_value(target, fp)
            v1 = self._target_value(target, self.solve(r - eps1))
            v2 = self._target_value(target, self.solve(r - eps2))
            d1 = alpha - v1
            d2 = alpha - v2
            if not (d1 > 0 and d2 > 0):
                raise ConvergenceError(
                    "not a square-root singularity at requested precision"
                )
            exponent = float(mp.log(d1 / d2) / mp.log(eps1 / eps2))
            if not 0.45 <= exponent <= 0.55:
                raise ConvergenceError(
                    "not a square-root singularity at requested precision"
                )
            s1 = mp.sqrt(eps1)
            s2 = mp.sqrt(eps2)
            b1 = d1 / s1
            b2 = d2 / s2
            beta = (b2 * s1 - b1 * s2) / (s1 - s2)
            gamma = beta / alpha
            assembled = None
            gap = None
            if isinstance(target, ReducedWord):
                g0 = self.expansion(None)
                parts = mp.mpf(g0.gamma)
                for c in target.letters:
                    parts += self.expansion(c).gamma
                assembled_mp = alpha * parts
                assembled = float(assembled_mp)
                gap = float(abs(assembled_mp - beta) / abs(beta)) if beta != 0 else 0.0
            data = PuiseuxData(
                label=label,
                radius=float(r),
                value_at_r=float(alpha),
                sqrt_coefficient=float(beta),
                gamma=float(gamma),
                exponent_estimate=exponent,
                assembled_sqrt_coefficient=assembled,
                assembly_gap=gap,
                prec=fp.prec,
            )
        self._expansion_cache[label] = data
        return data

    def gamma_table(self) -> dict:
        """Per-letter gamma data plus the Green gamma, as floats.

        The sqrt-to-value ratio of a word target is the Green entry plus
        the sum over its letters, which is what boundary kernels consume.
        """
        table = {"green": self.expansion(None).gamma}
        for c in self.letters:
            table[c] = self.expansion(c).gamma
        return table


# ---------------------------------------------------------------------------
# Taylor coefficients


@lru_cache(maxsize=None)
def shared_system(spec: WalkSpec, prec: int = 96) -> FirstPassageSystem:
    """Process-wide solver bundle per (walk, precision).

    Solves, the singularity bracket and the fold all cache inside the
    system, so sharing one instance amortizes them across kernels,
    ball matrices and reports.
    """
    return FirstPassageSystem(spec, prec)


def series_coefficients(
    system: FirstPassageSystem,
    target=None,
    n_max: int = EXACT_STEP_LIMIT,
    exact: bool | None = None,
) -> PowerSeries:
    """Taylor coefficients of a first-passage or Green function at zero.

    target follows the expansion() convention.  The Green coefficients are
    exactly the n-step return probabilities, which makes this the fast
    route to long return sequences on free groups.
    """
    if n_max < 0:
        raise ValidationError("need n_max >= 0")
    if exact is None:
        exact = n_max <= EXACT_STEP_LIMIT
    L = len(system.letters)
    inv = system.inv_index
    if exact:
        mu0 = system.mu0_fraction
        mu = list(system.mu_fractions)
        zero = Fraction(0)
        f = [[zero] * (n_max + 1) for _ in range(L)]
        t = [[zero] * (n_max + 1) for _ in range(L)]
        s = [zero] * (n_max + 1)
        for n in range(1, n_max + 1):
            for i in range(L):
                acc = mu[i] if n == 1 else zero
                acc += mu0 * f[i][n - 1]
                conv = zero
                for a in range(1, n - 1):
                    conv += t[i][a] * f[i][n - 1 - a]
                f[i][n] = acc + conv
            s[n] = sum(mu[k] * f[inv[k]][n] for k in range(L))
            for i in range(L):
                t[i][n] = s[n] - mu[i] * f[inv[i]][n]
        u = [zero] * (n_max + 1)
        for n in range(1, n_max + 1):
            u[n] = s[n - 1] + (mu0 if n == 1 else zero)
        g = [zero] * (n_max + 1)
        g[0] = Fraction(1)
        for n in range(1, n_max + 1):
            g[n] = sum(u[k] * g[n - k] for k in range(1, n + 1))

        def conv_exact(a, b):
            out = [zero] * (n_max + 1)
            for i, ai in enumerate(a):
                if ai == 0:
                    continue
                for j in range(0, n_max + 1 - i):
                    if b[j] != 0:
                        out[i + j] += ai * b[j]
            return out

        if target is None:
            coeffs = g
        elif isinstance(target, int):
            coeffs = f[system.index[target]]
        else:
            coeffs = [Fraction(1)] + [zero] * n_max
            for c in target.letters:
                coeffs = conv_exact(coeffs, f[system.index[c]])
            coeffs = conv_exact(coeffs, g)
        return PowerSeries(system._target_label(target), tuple(coeffs), True)

    mu0 = float(system.mu0_fraction)
    mu = np.array([float(p) for p in system.mu_fractions])
    f = np.zeros((L, n_max + 1))
    t = np.zeros((L, n_max + 1))
    s = np.zeros(n_max + 1)
    for n in range(1, n_max + 1):
        for i in range(L):
            acc = mu[i] if n == 1 else 0.0
            acc += mu0 * f[i, n - 1]
            if n >= 3:
                acc += float(np.dot(t[i, 1 : n - 1], f[i, n - 2 : 0 : -1]))
            f[i, n] = acc
        s[n] = float(np.dot(mu, f[inv, n]))
        t[:, n] = s[n] - mu * f[inv, n]
    u = np.zeros(n_max + 1)
    u[1:] = s[:-1]
    if n_max >= 1:
        u[1] += mu0
    g = np.zeros(n_max + 1)
    g[0] = 1.0
    for n in range(1, n_max + 1):
        g[n] = float(np.dot(u[1 : n + 1], g[n - 1 :: -1]))
    if target is None:
        coeffs = g
    elif isinstance(target, int):
        coeffs = f[system.index[target]]
    else:
        coeffs = np.zeros(n_max + 1)
        coeffs[0] = 1.0
        for c in target.letters:
            coeffs = np.convolve(coeffs, f[system.index[c]])[: n_max + 1]
        coeffs = np.convolve(coeffs, g)[: n_max + 1]
    return PowerSeries(
        system._target_label(target), tuple(float(v) for v in coeffs), False
    )


# ---------------------------------------------------------------------------
# Second-order Green sums


def green_second_order(
    system: FirstPassageSystem,
    x: ReducedWord,
    y: ReducedWord,
    z,
    max_shell: int | None = None,
    tol: float = 1e-12,
) -> SecondOrderGreen:
    """sum_v G(x,v|z) G(v,y|z), summed by shells around the x-to-y geodesic.

    Each summand factors through the projection of v onto the geodesic, so
    the shell sums obey a per-letter transfer recursion; a shell's banned
    first letters keep the projection point exact and the word reduced.
    Three consecutive shell increments below tol times the running total
    stop the sum.  A long non-decreasing stretch of increments is treated
    as divergence.  With an explicit max_shell the partial sum is returned
    together with a geometric tail estimate.
    """
    if tol <= 0:
        raise ValidationError("need tol > 0")
    w = x.inverse() * y
    sol = system.solve(z)
    green = sol.green
    if green is None:
        raise ConvergenceError(
            f"Green function diverges at z = {mp.nstr(sol.z, 17)}: "
            "the return generating function reaches 1"
        )
    letters = system.letters
    L = len(letters)
    inv = np.array(system.inv_index)
    fvals = np.array([float(sol.values[c]) for c in letters])
    om = fvals * fvals[inv]
    path = w.letters
    d = len(path)
    prefactor = float(green) * float(sol.green_to(w))

    T = np.tile(om, (d + 1, 1))
    for m in range(d + 1):
        banned: set[int] = set()
        if d > 0:
            if m == 0:
                banned = {path[0]}
            elif m == d:
                banned = {system.spec.alphabet.inverse_letter(path[d - 1])}
            else:
                banned = {
                    path[m],
                    system.spec.alphabet.inverse_letter(path[m - 1]),
                }
        for c in banned:
            T[m, system.index[c]] = 0.0

    cap = max_shell if max_shell is not None else 200_000
    total = float(d + 1)
    increments: list[float] = []
    stabilized = False
    shells = 0
    for _ in range(cap):
        inc = float(T.sum())
        increments.append(inc)
        total += inc
        shells += 1
        tail_window = increments[-3:]
        if len(increments) >= 3 and all(v <= tol * total for v in tail_window):
            stabilized = True
            break
        if shells >= 30 and inc > tol * total:
            recent = increments[-12:]
            # decay slower than 1e-9 per shell only happens essentially at
            # the singularity, where the sum is divergent
            if len(recent) == 12 and all(
                recent[k + 1] >= recent[k] * (1 - 1e-9) for k in range(11)
            ):
                raise ConvergenceError(
                    f"non-decreasing shell increments at z = "
                    f"{mp.nstr(sol.z, 17)}: second-order Green sum diverges"
                )
        rowsums = T.sum(axis=1)
        T = om[None, :] * (rowsums[:, None] - T[:, inv])
    else:
        if max_shell is None:
            raise ConvergenceError(
                f"second-order Green sum did not stabilize within {cap} "
                f"shells at z = {mp.nstr(sol.z, 17)}"
            )

    tail_raw = 0.0
    if not stabilized and len(increments) >= 2 and increments[-1] > 0:
        ratio = increments[-1] / increments[-2]
        if ratio >= 1.0:
            raise ConvergenceError(
                f"non-decreasing shell increments at z = "
                f"{mp.nstr(sol.z, 17)}: second-order Green sum diverges"
            )
        tail_raw = increments[-1] * ratio / (1.0 - ratio)

    partial = prefactor * total
    tail = prefactor * tail_raw
    return SecondOrderGreen(
        value=partial + tail,
        partial=partial,
        tail=tail,
        shells=shells,
        stabilized=stabilized,
        green_pair=float(sol.green_to(w)),
        green_origin=float(green),
    )


def derivative_identity(system: FirstPassageSystem, x: ReducedWord, z) -> dict:
    """Derivative of z -> G(e,x|z) against its second-order quotients.

    Returns the centered-difference derivative, the shifted quotient
    (second-order sum minus the function, over z), the plain quotient
    (second-order sum over z squared), and the relative residual of each
    against the derivative.
    """
    with mp.workprec(system.prec):
        zz = mp.mpf(z)
        h = zz * mp.mpf("1e-9")
        up = system.solve(zz + h).green_to(x)
        dn = system.solve(zz - h).green_to(x)
        derivative = (up - dn) / (2 * h)
        gval = system.solve(zz).green_to(x)
        g2 = green_second_order(system, identity(system.spec.alphabet), x, zz)
        shifted = (g2.value - gval) / zz
        plain = g2.value / (zz * zz)
        return {
            "derivative": float(derivative),
            "quotient_shifted": float(shifted),
            "quotient_plain": float(plain),
            "residual_shifted": float(
                abs(shifted - derivative) / abs(derivative)
            ),
            "residual_plain": float(abs(plain - derivative) / abs(derivative)),
        }
