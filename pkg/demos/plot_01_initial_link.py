"""
The initial link
================

Two congruent tori, one lying flat and one standing up, spaced so that their
core circles are linked but the tubes stay apart.
"""
from antoine import build_initial_link, circle_circle_distance, circles_linked, linking_number_gauss

# core radius 4, tube radius 1, centers 5.5 apart
flat, standing = build_initial_link(1.0, 4.0, 5.5)
d = circle_circle_distance(flat.circle, standing.circle)
print(f"core circle distance {d.distance:.12f} at angles {d.argmin}")

# the tubes are disjoint exactly when the cores are more than 2 tube radii apart
print("tube gap:", d.distance - flat.r - standing.r)

# the linking predicate is exact for round circles; the Gauss integral agrees
print("linked:", circles_linked(flat.circle, standing.circle).name)
print("Gauss linking number:", round(linking_number_gauss(flat.circle, standing.circle), 6))

# the admissible spacing is (R + r, 2 (R - r)); the default is its midpoint
print("default spacing:", build_initial_link(1.0, 4.0)[1].center[0])
