"""
From a regular chain to a self-similar necklace
===============================================

A regular chain of 2m congruent links, each a scaled copy of the ambient
torus, defines 2m similarities. Iterating them gives nested covers whose
intersection is the necklace.
"""
import numpy as np

from antoine import IfsSystem, RegularChainParams, attractor_sample, iterate_cover, moran_cover_sum
from antoine import regular_chain_from_params, similarity_dimension

# 28 links with scale s = 0.136; 28 s^2 < 1
params = RegularChainParams(1.0, 0.16838383838383839, 14, 0.13606060606060608)
system = IfsSystem.from_chain(regular_chain_from_params(params))
print(f"{system.k} maps, sum of squared scales {system.sum_sq:.4f}, certified: {system.certified}")
print(f"similarity dimension {similarity_dimension(system.scales):.4f}")

for lam in range(4):
    cover = iterate_cover(system, lam)
    ms = moran_cover_sum(system, lam)
    print(f"level {lam}: {len(cover):6d} tori, largest diameter {cover.diameters.max():.5f}, "
          f"sum of squared relative diameters {ms.closed_form:.6f}")

# random words of length 8 applied to a marked point land within diam * s^8 of the necklace
pts = attractor_sample(system, 10_000, 8, seed=0)
print("sample bounding box:", np.round(pts.min(axis=0), 3), np.round(pts.max(axis=0), 3))
