"""glsim: classical simulation of linear dynamics with geometrically local generators.

The package estimates single entries and inner products of P(A)u for
polynomials P of geometrically local matrices A, using only local matrix
rows and sampling access to the vectors.  On top of that core it simulates
coupled oscillator networks and discretized PDEs, samples sites from
time-evolved states, and builds clock-register matrices whose dynamics
replay reversible (and one-Hadamard) circuits.  Everything is checked
against a dense brute-force oracle in the test suite and the acceptance
criteria in glsim.acceptance.
"""

from .access import (CostCounter, Distribution, LocalityError,
                     LocalMatrixOracle, OracleInconsistencyError,
                     PreconditionError, VectorOracle, induced_distribution,
                     local_matrix_from_dense, local_matrix_from_rows,
                     perturbed_sq_access, read_vector_csv, rng_stream,
                     scale_matrix_oracle, sparse_vector_oracle,
                     sq_access_from_dense, tv_distance, write_vector_csv)
from .acceptance import CriterionResult, DEFAULT_SEED, SUITES, run_criterion, run_suite
from .embeddings import (ClockHamiltonian, EmbeddedRun, Gate, ReadoutScan,
                         ReversibleCircuit, adjacent_transposition_decomposition,
                         classical_output, default_scan_horizon, dilated_gate,
                         find_readout_time, fk_classical, fk_long_local,
                         fk_long_undilated, gate_permutation, gate_unitary,
                         j_matrix, overlap_coefficients, parse_circuit,
                         readout_overlap_curve, run_circuit,
                         simulate_embedded_circuit, step_operator, w_matrix)
from .estimate import EstimateReport, evt_gl_estimate, inner_product_estimate
from .lattice import SiteGraph, chain, general, grid
from .lightcone import (SparseAccumulator, entry_of_poly_apply,
                        poly_apply_query_oracle, row_power)
from .oracle import (DenseMatrix, dense_cap, dense_cos_sqrt_apply,
                     dense_evolve, dense_from_oracle, dense_poly_apply,
                     dense_poly_matrix, dense_sinc_sqrt_apply, spectral_norm)
from .oscillators import (OscillatorState, OscillatorSystem, build_system,
                          estimate_energy, estimate_observable,
                          extended_dimension, load_system, pair_decode,
                          pair_index, psi0, read_state_csv, save_system,
                          system_from_json_dict, system_to_json_dict,
                          total_energy, write_state_csv)
from .pde import (advection_hamiltonian, graph_laplacian_oracle,
                  schrodinger_hamiltonian, wave_to_oscillators)
from .polyapprox import (Polynomial, basis_convert, bessel_j_sequence,
                         constant_poly, divide_out_zero, eval_scalar, exp_poly,
                         mul_by_x, parity_split, scale_poly)
from .sampling import (EvolvedSampler, OversamplerHandle, RejectionResult,
                       lightcone_oversampler, rejection_sample, sample_evolved,
                       tv_error_bound)

__version__ = "0.1.0"

__all__ = [
    "ClockHamiltonian", "CostCounter", "CriterionResult", "DEFAULT_SEED",
    "DenseMatrix", "Distribution", "EmbeddedRun", "EstimateReport",
    "EvolvedSampler", "Gate", "LocalMatrixOracle", "LocalityError",
    "OracleInconsistencyError", "OscillatorState", "OscillatorSystem",
    "OversamplerHandle", "Polynomial", "PreconditionError", "ReadoutScan",
    "RejectionResult", "ReversibleCircuit", "SUITES", "SiteGraph",
    "SparseAccumulator", "VectorOracle",
    "adjacent_transposition_decomposition", "advection_hamiltonian",
    "basis_convert", "bessel_j_sequence", "build_system", "chain",
    "classical_output", "constant_poly", "default_scan_horizon", "dense_cap",
    "dense_cos_sqrt_apply", "dense_evolve", "dense_from_oracle",
    "dense_poly_apply", "dense_poly_matrix", "dense_sinc_sqrt_apply",
    "dilated_gate", "divide_out_zero", "entry_of_poly_apply",
    "estimate_energy", "estimate_observable", "eval_scalar",
    "evt_gl_estimate", "exp_poly", "extended_dimension", "find_readout_time",
    "fk_classical", "fk_long_local", "fk_long_undilated", "gate_permutation",
    "gate_unitary", "general", "graph_laplacian_oracle", "grid",
    "induced_distribution", "inner_product_estimate", "j_matrix",
    "lightcone_oversampler", "load_system", "local_matrix_from_dense",
    "local_matrix_from_rows", "mul_by_x", "overlap_coefficients",
    "pair_decode", "pair_index", "parity_split", "parse_circuit",
    "perturbed_sq_access", "poly_apply_query_oracle", "psi0",
    "read_state_csv", "read_vector_csv", "readout_overlap_curve",
    "rejection_sample", "rng_stream", "row_power", "run_circuit",
    "run_criterion", "run_suite", "sample_evolved", "save_system",
    "scale_matrix_oracle", "scale_poly", "schrodinger_hamiltonian",
    "simulate_embedded_circuit", "sparse_vector_oracle", "spectral_norm",
    "sq_access_from_dense", "step_operator", "system_from_json_dict",
    "system_to_json_dict", "total_energy", "tv_distance", "tv_error_bound",
    "w_matrix", "wave_to_oscillators", "write_state_csv", "write_vector_csv",
]
