"""Active return loss of coated patch arrays and WAIM superstrate synthesis."""

from .config import ProblemConfig, load_problem_config, parse_problem_config, resolve_config
from .errors import NonFiniteError, SingularSystemError, ValidationError, WaimError
from .greens import UNCOATED, UniaxialLayer, WaimStack, greens_dyad
from .lattice import ArrayDescriptors, SteeringPoint, floquet_wavevector, reciprocal_lattice
from .moments import ModalBasis, TruncationConfig, active_impedance, active_impedances, active_response
from .objective import FeasibilitySets, Problem, ScanSpec, feasibility_check, tolerance_sweep
from .swarm import StackEncoding, SwarmConfig, optimize
from .synthesis import run_synthesis

__all__ = [
    "ArrayDescriptors", "FeasibilitySets", "ModalBasis", "NonFiniteError", "Problem", "ProblemConfig",
    "ScanSpec", "SingularSystemError", "StackEncoding", "SteeringPoint", "SwarmConfig", "TruncationConfig",
    "UNCOATED", "UniaxialLayer", "ValidationError", "WaimError", "WaimStack", "active_impedance",
    "active_impedances", "active_response", "feasibility_check", "floquet_wavevector", "greens_dyad",
    "load_problem_config", "optimize", "parse_problem_config", "reciprocal_lattice", "resolve_config",
    "run_synthesis", "tolerance_sweep",
]
