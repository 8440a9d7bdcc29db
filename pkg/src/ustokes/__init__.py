"""Exact unsteady Stokes flows in spherical geometry.

Scalar fields are finite sums of separable modes R(r) Y_nm(theta, phi) T(t)
with exact derivatives; velocities are built as curl curl(r A) + curl(r B)
and checked against the governing equations by exact algebra and by
independent finite differences.
"""
from .constructors import (FlowSolution, FlowSpec, build_flow, harmonic_pressure_flow, naghdi_hsu,
                           potential_from_pressure, solve_A_for_P, solve_B_for_T, solve_heat_poisson)
from .decompose import Decomposition, recover_AB, sht_analyze, synthesize, vsh_analyze
from .errors import (DomainError, ExtrapolationError, GridTooCoarse, InvalidIndex, MonopoleError,
                     MonopoleFluxError, NotDivergenceFree, PathDependenceError, PreconditionError,
                     QuadratureBudgetError, ResonanceError, SpecError, StokesError, UnsupportedOperation)
from .fields import (BesselJ, BesselY, Constant, Exp, FluidParams, ModifiedI, ModifiedK, Poly, PowerSeries,
                     ScalarField, ScalarMode, SolidDecaying, SolidGrowing, SphIndex, field_of, mode)
from .grid import ShellGrid
from .heatkernel import QuadratureDomain, pressure_from_psi1, psi_integral, split_psi
from .operators import (CurlCurlR, CurlR, GradDr, Gradient, RadialTimes, Sampled, evaluate, vcurl,
                        vdivergence, vlaplacian)
from .verify import (ResidualReport, condition_residual, continuity_residual, momentum_residual,
                     recover_pressure, verify_flow)

__version__ = "0.1.0"
