"""Simulation and verification workbench for unbounded-error probabilistic
and quantum finite automata."""
from .classical import CENT, DOLLAR, Gfa, RtPfa, classify, run_gfa, run_rtpfa
from .convert import equiprobable_union, rtpfa_to_rtkwqfa, rtpfa_to_rtqfa, rtqfa_to_gfa
from .errors import (AmpEvaluationError, AmpSyntaxError, ConservationError, ConstructionError,
                     DimensionError, InputError, MachineFileError, QfaLabError,
                     WellformednessError)
from .linalg import RunOutcome, accumulate_halting, complete_to_unitary, kron, vec
from .machinefile import dump_machine, load_machine
from .machines import lnh_machine, lys_machine, oracle
from .quantum_rt import RtKwqfa, RtQfa, SuperOp, run_rtkwqfa, run_rtqfa
from .twoway import TwoWayKwqfa, build_config_operator, path_trace, run_twoway

__version__ = "0.1.0"
