"""Robust consensus protocol synthesis for multi-agent systems with agent
attrition, inclusion, switching topologies and parametric uncertainty, by
simultaneous stabilization of a Laplacian-indexed plant family in the
nu-gap metric."""
from .errors import *  # noqa: F401,F403
from .graphs import (EigenvaluePool, Graph, TopologyBank, build_eigenvalue_pool,
                     enumerate_connected_graphs, laplacian, nonzero_laplacian_eigenvalues)
from .numerics import (DEFAULT_SETTINGS, NumericSettings, hankel_norm, hinf_norm,
                       matrix_exponential, solve_care, solve_lyapunov, spectral_abscissa)
from .nugap import central_plant, gap_table, max_nu_gap, nu_gap
from .synthesis import (Controller, MarginReport, PerturbationBox, PlantFamily,
                        build_plant_family, check_conditions, generalized_stability_margin,
                        max_stability_margin, psi, synthesize_controller,
                        verify_simultaneous_stabilization)
from .sysmodel import CoprimeFactors, StateSpace, normalized_coprime_factors
from .simulator import Event, Scenario, SimResult, build_closed_loop, run_case_study, simulate
from .config import Config, load_config, load_default_config

__version__ = "0.1.0"
