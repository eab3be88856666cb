"""
Shadows of the necklace
=======================

Project the covers and an attractor sample on planes through the ambient
center. The shadow area shrinks like (sum s^2)^lam, the box-counting slope
of the projected sample stays below 2 and the projection is connected.
"""
from antoine import IfsSystem, RegularChainParams, regular_chain_from_params
from antoine.projection import PlaneSweep, SweepConfig, sweep

params = RegularChainParams(1.0, 0.16838383838383839, 14, 0.13606060606060608)
system = IfsSystem.from_chain(regular_chain_from_params(params))
planes = PlaneSweep.fibonacci_sphere(6, system.ambient.center)

for lam in (1, 2, 3):
    cfg = SweepConfig(lam=lam, raster_n=512, n_points=50_000, depth=7)
    for rep in sweep(system, planes, cfg)[:2]:
        print(f"lam {lam} normal {rep.plane.unit_normal.round(3)}: area {rep.raster_area:.4f} "
              f"(envelope {rep.moran_envelope:.4f}), slope {rep.box_count_slope:.3f}, "
              f"components {rep.component_count}")
