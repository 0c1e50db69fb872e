"""Constants for facetspace."""

from logging import Logger, getLogger

LOGGER: Logger = getLogger(__package__)

NAME = "facetspace"

# Geometric predicates, scaled by the polytope diameter.
EPS_GEOM = 1e-9
# Relative band for the family equalities and strict inequalities.
EPS_CLASS = 1e-9
# Hand-typed perimeters carry about eight significant digits.
CLI_EPS_CLASS = 1e-6
RANK_RTOL = 1e-10
# Relative to (sum of areas) squared.
EPS_CLOSURE = 1e-9

SOLVER_TOL = 1e-6
SOLVER_MAX_ITER = 10_000
ARMIJO_SLOPE = 1e-4

PROBE_RADIUS = 0.12
PROBE_STEPS = 240
PROBE_MIN_STEPS = 8
MIN_DIRECTION_NORM = 1e-12

WITNESS_STEP = 0.1

SIGNIFICANT_DIGITS = 17

LOG_FORMAT = "%(log_color)s%(levelname)-8s%(reset)s %(name)s: %(message)s"
