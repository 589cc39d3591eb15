"""Standard immersions with known curvature, used by tests and the CLI docs."""
from __future__ import annotations

import numpy as np

from .geometry import ImmersionSpec


def plane():
    return ImmersionSpec.from_strings("plane", 2, ["u1", "u2", "0"])


def sphere(r=2.0):
    return ImmersionSpec.from_strings(
        "sphere",
        2,
        ["r*cos(u1)*cos(u2)", "r*cos(u1)*sin(u2)", "r*sin(u1)"],
        params={"r": r},
    )


def cylinder(r=1.0):
    return ImmersionSpec.from_strings("cylinder", 2, ["r*cos(u1)", "r*sin(u1)", "u2"], params={"r": r})


def cylinder_in_e4():
    return ImmersionSpec.from_strings("cylinder4", 2, ["cos(u1)", "sin(u1)", "u2", "0"])


def torus(r1=1.0, r2=2.0):
    """Product of circles of radii r1, r2 in C^2, block ordering (x1, x2, y1, y2)."""
    return ImmersionSpec.from_strings(
        "torus",
        2,
        ["r1*cos(u1)", "r2*cos(u2)", "r1*sin(u1)", "r2*sin(u2)"],
        params={"r1": r1, "r2": r2},
        complex_pairing="block",
    )


def monkey_saddle():
    return ImmersionSpec.from_strings("monkey_saddle", 2, ["u1", "u2", "u1^3 - 3*u1*u2^2"])


def polar_plane():
    return ImmersionSpec.from_strings("polar_plane", 2, ["u1*cos(u2)", "u1*sin(u2)", "0"])


def lagrangian_plane():
    """The Lagrangian plane spanned by e_x1 and e_y2 in C^2."""
    return ImmersionSpec.from_strings("lagrangian_plane", 2, ["u1", "0", "0", "u2"], complex_pairing="block")


def cusp():
    return ImmersionSpec.from_strings("cusp", 2, ["u1^2", "u1^3", "u2"])


# generic points away from any symmetry of the fixtures above
SAMPLE_POINTS = {
    "plane": (0.3, -0.7),
    "sphere": (0.4, 1.1),
    "cylinder": (0.7, -0.3),
    "cylinder4": (0.7, -0.3),
    "torus": (0.5, 1.3),
    "monkey_saddle": (0.3, 0.2),
    "polar_plane": (1.5, 0.4),
    "lagrangian_plane": (0.2, 0.1),
}


def graph_a():
    from .lagrangian import gradient_graph_from_string

    return gradient_graph_from_string("u1^3/6 + u1*u2^2/2 + u2^4/12", 2, name="graph_a")


def graph_b():
    from .lagrangian import gradient_graph_from_string

    return gradient_graph_from_string("u1*u2*u3 + (u1^3 - u2^3 + 2*u3^3)/6 + u1^2*u3/4", 3, name="graph_b")


SAMPLE_POINTS["graph_a"] = (0.4, -0.3)
SAMPLE_POINTS["graph_b"] = (0.3, -0.2, 0.5)


def all_fixtures():
    """Name -> (spec, sample point) for every fixture with a regular sample point."""
    specs = [plane(), sphere(), cylinder(), cylinder_in_e4(), torus(), monkey_saddle(), polar_plane(),
             lagrangian_plane(), graph_a(), graph_b()]
    return {s.name: (s, np.array(SAMPLE_POINTS[s.name], dtype=float)) for s in specs}
