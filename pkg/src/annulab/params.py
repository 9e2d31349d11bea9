"""Canonical parameter set used by ``verify``, the acceptance tests and the docs."""
from .geometry import SpaceForm

#: (r0, r1) per geometry for sweeps, the cos beta identity and reflection checks
CANONICAL_RADII = {
    SpaceForm.SPHERICAL: (0.3, 1.0),
    SpaceForm.HYPERBOLIC: (0.3, 1.0),
    SpaceForm.EUCLIDEAN: (0.3, 1.0),
}
#: (r0, r1) per geometry for the concentric oracle comparisons
ORACLE_RADII = {
    SpaceForm.SPHERICAL: (0.3, 1.0),
    SpaceForm.HYPERBOLIC: (0.3, 1.0),
    SpaceForm.EUCLIDEAN: (0.5, 1.0),
}
T_GRID = (0.0, 0.6, 0.1)
T_CHECK = 0.35
LEVEL = 3
DELTA = 1e-3
CONVERGENCE_LEVELS = (2, 3, 4, 5)
IDENTITY_OFFSETS = (0.1, 0.35, 0.6)
IDENTITY_SAMPLES = 1000

# thresholds
ORACLE_TORSION_RTOL = 1e-3
ORACLE_LAMBDA_RTOL = 5e-3
ORDER_RANGE = (1.8, 2.2)
FLUX_MIN_ORDER = 1.5
DERIVATIVE_RTOL = 0.05
GREEN_RTOL = 0.02
EVENNESS_RTOL = 1e-10
ENERGY_RTOL = 1e-9
SOLVE_SECONDS = 10.0


def t_values(start: float, stop: float, step: float) -> list[float]:
    """Inclusive arithmetic grid, rounded to 12 decimals so 0.1 * 3 prints as 0.3."""
    if step <= 0:
        raise ValueError(f"grid step must be positive, got {step}")
    n = int(round((stop - start) / step))
    if n < 0 or abs(start + n * step - stop) > 1e-9 * max(1.0, abs(stop)):
        raise ValueError(f"grid {start}:{stop}:{step} does not reach its stop value")
    return [round(start + k * step, 12) for k in range(n + 1)]
