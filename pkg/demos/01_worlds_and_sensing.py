"""
Worlds, sensing and the incremental view
========================================

A world is a set of axis-aligned rectangles in [-1, 1]^2. The robot only
knows obstacles inside the discs it has sensed; everything else is assumed
free.
"""

from incplan.world import (
    IncrementalView,
    SensedRegion,
    exit_parameter,
    generate_random_rectangles,
    make_double_enclosure,
    oracle_shortest_path,
    sense,
)
from incplan.geometry import Path

# the Double Enclosure: start and goal each sit in a cup opening away from the other
w = make_double_enclosure()
print(w.name, "obstacles:", len(w.obstacles))
print("full-knowledge shortest path length:", round(oracle_shortest_path(w, w.start, w.goal).length, 6))

# before sensing anything, the straight line looks free
region = sense(SensedRegion(0.05), w.start)
view = IncrementalView(w, region)
straight = Path([w.start, w.goal])
print("straight line valid in the first view:", view.is_motion_valid(w.start, w.goal))
print("straight line valid with full knowledge:", IncrementalView(w).is_motion_valid(w.start, w.goal))

# the robot follows a path only until it reaches the edge of what it has sensed
s = exit_parameter(straight, region)
print("fraction of the straight line followed before replanning:", round(s, 4))
x = straight.interpolate(s)
region = sense(region, x)
# keep stepping along the straight line until the cup wall comes into view
while IncrementalView(w, region).is_motion_valid(x, w.goal):
    rest = Path([x, w.goal])
    x = rest.interpolate(exit_parameter(rest, region))
    region = sense(region, x)
print("wall seen from", tuple(round(c, 4) for c in x), "after", len(region), "looks")

# random-rectangle worlds are seeded and reproducible
r = generate_random_rectangles(3)
print(r.name, len(r.obstacles), "rectangles, start", r.start, "goal", r.goal)
