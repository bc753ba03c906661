"""Seedable Monte Carlo simulator for the downlink of a cell-free MIMO
network using rate-splitting with multi-branch Tomlinson-Harashima precoding."""

__version__ = "0.1.0"

from .channel import (ChannelSet, complex_normal, conditional_true_channels,
                      corrupt_csit, draw_true_channel, select_aps)
from .linalg import LqFactors, SvdFactors, lq_decompose, solve_lower_triangular, svd
from .metrics import (RateReport, average_rates, effective_channels, esr,
                      instantaneous_report, sinr_common, sinr_private)
from .montecarlo import (AlphaPolicy, ExperimentConfig, ResultRow, run_experiment,
                         seed_stream)
from .multibranch import BranchChoice, BranchPattern, apply_pattern, make_patterns, select_branch
from .precoding import (RsPrecoder, ThpFilters, assemble_private_precoder,
                        build_thp_filters, common_precoder, linear_zf_precoder,
                        make_rs_precoder, modulo, thp_encode)
from .scenario import (Geometry, ScenarioConfig, attenuation_db, noise_variance_w,
                       path_loss_db, sample_scenario, transmit_power_for_snr)

__all__ = [name for name in dir() if not name.startswith("_")]
