"""Wave-packet evolution through free/harmonic schedules via quantum Arnold
transformations, with a split-step integrator as ground truth."""
from .arnold import QatContext, qat_apply, qat_inverse, resample, transform
from .classical import (ClassicalSolutionPair, LsodeSpec, arnold_map,
                        arnold_map_inverse, classical_solutions)
from .errors import *  # noqa: F401,F403
from .grid import (Grid, GridState, edge_density, inner, read_snapshot,
                   suggest_grid, write_snapshot)
from .observables import (EvolutionReport, Moments, ReportRow, capture_phase_residual,
                          excess_kurtosis, moments, report_row, squeeze_parameter)
from .oracle import OracleConfig, fidelity, oracle_evolve, oracle_segment, oracle_trajectory
from .propagate import (Schedule, Segment, chain_evolve_direct, chain_evolve_qat,
                        eigen_phase_evolve, factorized_evolve)
from .runspec import RunSpec, benchmark, execute, load_runspec
from .states import (HGParams, gaussian_packet, hermite_gauss_free, hermite_poly,
                     ho_eigenstate)

__version__ = "0.1.0"
