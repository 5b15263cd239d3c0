"""Built-in example families."""

from __future__ import annotations

import math

from .core_model import (
    FunctionFamily,
    PolynomialSpec,
    RadialBumpSpec,
    linear_family,
)

LN = math.log


def _symmetric(N: int) -> FunctionFamily:
    A = [
        (math.cos(2 * math.pi * (a - 1) / N), math.sin(2 * math.pi * (a - 1) / N))
        for a in range(1, N + 1)
    ]
    return linear_family(A, name=f"symmetric{N}")


def _bump10() -> FunctionFamily:
    params = [(LN(20), LN(8)), (LN(20), LN(2))] + [(LN(2), LN(2))] * 8
    specs = tuple(RadialBumpSpec(a, c, d) for a, (c, d) in enumerate(params, start=1))
    return FunctionFamily(2, specs, "bump10")


def _poly6() -> FunctionFamily:
    def P(*terms):
        return PolynomialSpec(tuple((float(c), tuple(e)) for c, e in terms))

    specs = (
        P((0.0, (0, 0))),
        P((3, (2, 0))),
        P((3, (0, 3))),
        P((1, (1, 0)), (1, (1, 1)), (LN(6), (0, 0))),
        P((2, (1, 0)), (1, (0, 2)), (LN(11), (0, 0))),
        P((1, (1, 0)), (3, (0, 1)), (1, (1, 1)), (LN(4), (0, 0))),
    )
    return FunctionFamily(2, specs, "poly6")


_BUILDERS = {
    "triangle": lambda: linear_family([(0, 0), (1, 0), (0, 1)], name="triangle"),
    "fig1b": lambda: linear_family(
        [(0, 0), (3, 0), (0, 3), (1, 1)], [0, 0, 0, LN(6)], name="fig1b"
    ),
    "symmetric6": lambda: _symmetric(6),
    "symmetric7": lambda: _symmetric(7),
    "degenerate6": lambda: linear_family(
        [(a - 1, 6 - a) for a in range(1, 7)], name="degenerate6"
    ),
    "fig4": lambda: linear_family(
        [(0, 0), (3, 0), (0, 3), (1, 1), (2, 1), (1, 3)],
        [0, 0, 0, LN(6), LN(11), LN(4)],
        name="fig4",
    ),
    "fig5_3d": lambda: linear_family(
        [(0, 0, 0), (3, 0, 0), (0, 3, 0), (2, 0, 1), (2, 1, 1), (0, 3, 1)],
        [0, 0, 0, LN(6), LN(11), LN(4)],
        name="fig5_3d",
    ),
    "superideal3": lambda: linear_family(
        [(1, 0, 0), (0, 1, 0), (0, 0, 1)], name="superideal3"
    ),
    "bump10": _bump10,
    "poly6": _poly6,
    # Z_2({4,5}) = (e^x - e^y)^4: the locus x = y is touched, never crossed
    "touch5": lambda: linear_family(
        [(4, 0), (0, 4), (2, 2), (3, 1), (1, 3)],
        [0, 0, LN(6), LN(4), LN(4)],
        name="touch5",
    ),
}

DESCRIPTIONS = {
    "triangle": "f = (0, x, y); the line 1 + z1 + z2 = 0 in log coordinates",
    "fig1b": "f = (0, 3x, 3y, x+y+ln6); has a bounded 1-stratum component",
    "symmetric6": "f_a = cos(pi(a-1)/3) x + sin(pi(a-1)/3) y; all six 1-loci visible",
    "symmetric7": "seven-fold analogue of symmetric6",
    "degenerate6": "f_a = (a-1) x + (6-a) y; only two 1-loci visible",
    "fig4": "f = (0, 3x, 3y, x+y+ln6, 2x+y+ln11, x+3y+ln4); five visible 1-loci",
    "fig5_3d": "three-dimensional six-term family",
    "superideal3": "f = (x, y, z)",
    "bump10": "ten radial bumps; instability chain D3- in D4- fails",
    "poly6": "six-term polynomial family",
    "touch5": "non-transversal example: the {4,5} locus x = y is a double zero",
}

# Presets whose functions are all affine.
LINEAR_PRESETS = (
    "triangle", "fig1b", "symmetric6", "symmetric7", "degenerate6", "fig4", "fig5_3d", "superideal3", "touch5",
)


def default_bbox(name: str) -> list[tuple[float, float]]:
    n = get_preset(name).n
    half = 5.0 if name == "bump10" else 6.0
    return [(-half, half)] * n


def preset_names() -> list[str]:
    return list(_BUILDERS)


def get_preset(name: str) -> FunctionFamily:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(_BUILDERS)}") from None

