"""Shared test systems: two feasible regular chains and an equal-scale IFS."""
import math

import numpy as np

from antoine.chains import RegularChainParams
from antoine.geometry import Circle3, Similarity, SolidTorus
from antoine.ifs import IfsSystem

import oracles

# the only valid cell at 2m = 20 on the default grid, and the smallest-s valid cell at 2m = 28
FEASIBLE_20 = RegularChainParams(1.0, 0.30696969696969695, 10, 0.23454545454545456)
FEASIBLE_28 = RegularChainParams(1.0, 0.16838383838383839, 14, 0.13606060606060608)


def equal_scale_system(k, s, seed=0):
    """``k`` maps of scale ``s`` with random rotations, images centered on the core circle."""
    rng = np.random.default_rng(seed)
    amb = SolidTorus(Circle3((0, 0, 0), (0, 0, 1), 1.0), 0.25)
    maps = []
    for i in range(k):
        a = 2 * math.pi * i / k
        maps.append(Similarity(s, oracles.random_rotation(rng), (math.cos(a), math.sin(a), 0.0)))
    return IfsSystem(amb, maps)
