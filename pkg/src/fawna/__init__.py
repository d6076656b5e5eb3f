"""Capacity analysis and Monte Carlo checks for quantize-and-forward SIMO fiber links."""
from .model import (AdmissibilityError, CapacityReport, FawnaError, LinkConfig, NumericsError,
                    ParameterError, QuantizerModel, capacity_lower_bound, evaluate, phi,
                    phi_decay_envelope, phi_general, phi_unit_gain, psi, wireless_capacity)
from .optimize import OptimumResult, SweepTable, optimal_bandwidth, optimal_interfaces, sweep
from .quantizer import (TrainedQuantizer, distortion_rate, quantize_complex,
                        train_gaussian_quantizer, verify_quantizer_moments)
from .linksim import SimReport, SimRun, empirical_distortion_vector, simulate_link

__version__ = "0.1.0"
