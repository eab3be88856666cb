"""
Which regular chains exist?
===========================

Scan tube ratio rho, link scale s and half link count m. A cell is valid when
its regular chain passes every check, and certified when also 2 m s^2 < 1.
"""
from antoine.search import SearchGrid, certified_region_report, scan

grid = SearchGrid((0.05, 0.5, 40), (0.05, 0.4, 40), (9, 10, 11, 14, 20))
cells = scan(grid)
for m, summary in sorted(certified_region_report(cells).items()):
    print(f"2m = {2 * m:2d}: {summary.n_valid:4d} valid, {summary.n_certified:4d} certified, "
          f"smallest valid s {summary.s_min:.4f}")

# the 20-link window is too narrow for this grid; zoom in on it
zoom = scan(SearchGrid((0.28, 0.34, 25), (0.22, 0.245, 26), (10,)))
valid = [c for c in zoom if c.valid]
print(f"2m = 20 zoomed: {len(valid)} valid, s in [{min(c.s for c in valid):.4f}, {max(c.s for c in valid):.4f}], "
      f"certification needs s < {(1 / 20) ** 0.5:.4f}")
