"""Named walk instances used across the docs, CLI and acceptance tests."""

from __future__ import annotations

from fractions import Fraction

from .errors import ValidationError
from .geometry import free_group, identity, word
from .products import ProductWalk, cartesian_product
from .walks import WalkSpec, finite_walk, isotropic_walk

__all__ = ["preset", "preset_names"]


def _t3_lazy_iso() -> WalkSpec:
    return isotropic_walk(2, {0: Fraction(1, 2), 1: Fraction(1, 2)})


def _f2_lazy_uniform() -> WalkSpec:
    ab = free_group(2)
    mu = {identity(ab): Fraction(1, 5)}
    for c in ab.letters:
        mu[word(ab, [c])] = Fraction(1, 5)
    return finite_walk(ab, mu)


def _z_lazy() -> WalkSpec:
    ab = free_group(1)
    return finite_walk(
        ab,
        {
            identity(ab): Fraction(1, 2),
            word(ab, [1]): Fraction(1, 4),
            word(ab, [-1]): Fraction(1, 4),
        },
    )


_BUILDERS = {
    "t3-lazy-iso": _t3_lazy_iso,
    "f2-lazy-uniform": _f2_lazy_uniform,
    "z-lazy": _z_lazy,
    "t3xZ": lambda: cartesian_product(_t3_lazy_iso(), _z_lazy()),
    "t3xt3": lambda: cartesian_product(_t3_lazy_iso(), _t3_lazy_iso()),
}


def preset_names() -> tuple[str, ...]:
    return tuple(_BUILDERS)


def preset(name: str) -> WalkSpec | ProductWalk:
    """Look up a named instance; unambiguous prefixes are accepted."""
    if name in _BUILDERS:
        return _BUILDERS[name]()
    hits = [k for k in _BUILDERS if k.startswith(name)]
    if len(hits) == 1:
        return _BUILDERS[hits[0]]()
    raise ValidationError(
        f"unknown preset {name!r}; choose from {', '.join(_BUILDERS)}"
    )
