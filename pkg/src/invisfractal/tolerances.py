"""Central numerical tolerances.

Geometric tolerances scale with the scene diameter so that a body behaves
identically at any size.  Values here are the dimensionless factors; the
absolute values are resolved by the scene that carries the diameter.
"""

UNIT_NORM_TOL = 1e-12  # accepted deviation of a stored unit vector's norm

MIN_ADVANCE_REL = 1e-9  # minimum ray advance between bounces (x diameter)
RIM_PROXIMITY_REL = 1e-9  # rim band reported as a singular hit (x diameter)
GRAZE_DISC_REL = 1e-14  # |discriminant| < factor * diameter**2 is a miss
HIT_TIE_ABS = 1e-12  # nearest-hit ties within this t-gap go to the lowest id

MEMBERSHIP_SURFACE_TOL = 1e-12  # thin arcs count as members within this distance

INVISIBILITY_TOL = 1e-9  # default verdict tolerance
REPORT_GRADE_TOL = 1e-6  # looser secondary grading, reported alongside

SHADING_STEP_REL = 1e-4  # dense sampling step for region intersection tests
REGION_INSET_REL = 1e-9  # inset applied when testing open-region membership
