"""Local Wigner rotations and spin-curvature corrections for particles in Schwarzschild spacetime."""
from __future__ import annotations

__version__ = "0.1.0"

from .errors import (ConfigError, CurvedWignerError, DomainError, FrameMismatch, IntegrationFailure,
                     NoCircularOrbit, NotALorentzTransform, NotAState, OrthogonalityViolation,
                     PhotonSphereError, SingularTetrad, StepTooCoarse)
from .geometry import ChartPoint, SchwarzschildMetric, UserMetric, christoffel, riemann
from .geodesics import circular_orbit_constants, effective_potential_extrema, integrate_geodesic
from .frames import CircularFrame, RadialFrame, StaticFrame, CorrectedRadialFrame, geodetic_precession, spin_connection
from .wigner import accumulate_wigner, exact_wigner, infinitesimal_llt, infinitesimal_wigner
from .dirac_wkb import acceleration_correction, lp_frequency_correction, velocity_correction
from .entanglement import bipartite_state, concurrence, fidelity, pair_wigner_angles, transform_pair
