"""Reference maps used by the demos and the verification suite."""

from .maps import RationalMap


def power_map(degree=2):
    """``z -> z**degree``; its equilibrium measure is arc length on ``|z| = 1``."""
    coef = [0.0] * degree + [1.0]
    return RationalMap.polynomial(coef)


def chebyshev_map():
    """``z -> z**2 - 2``; Julia set ``[-2, 2]`` carrying the arcsine law."""
    return RationalMap.polynomial([-2.0, 0.0, 1.0])


def basilica_map():
    """``z -> z**2 - 1``."""
    return RationalMap.polynomial([-1.0, 0.0, 1.0])


def lattes_map():
    """``z -> (z**2 + 1)**2 / (4 z (z**2 - 1))``, whose Julia set is the whole sphere."""
    return RationalMap([1.0, 0.0, 2.0, 0.0, 1.0], [0.0, -4.0, 0.0, 4.0])


def generic_cubic():
    """A degree-3 rational map with no symmetry and no exceptional points."""
    return RationalMap([0.3j, -0.4, 0.0, 1.0], [1.0, 0.0, 0.6j, 0.25])


REFERENCE_MAPS = {
    "z^2": power_map,
    "z^2-2": chebyshev_map,
    "z^2-1": basilica_map,
    "cubic": generic_cubic,
    "lattes": lattes_map,
}


def reference_map(name):
    try:
        return REFERENCE_MAPS[name]()
    except KeyError:
        raise KeyError(f"unknown reference map {name!r}; choose from {sorted(REFERENCE_MAPS)}") from None
