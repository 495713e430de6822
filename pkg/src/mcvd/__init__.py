"""Performance analysis of diffusive molecular communication with a
fully-absorbing receiver and a Poisson field of interfering transmitters."""

from .ber import (
    BerResult,
    ThresholdTable,
    adaptive_policy_ber,
    alpha_coeffs,
    ber_isi_curve,
    ber_isi_fixed,
    ber_no_isi_curve,
    ber_no_isi_eta1_equiprobable,
    ber_no_isi_fixed,
    ber_no_isi_random,
    ber_no_isi_random_curve,
    best_single_threshold,
    build_threshold_table,
    e_lk,
    epsilon_coeffs,
    isi_field_coeffs,
    optimal_threshold,
    total_ber,
)
from .channel import (
    SlotResponse,
    SystemParams,
    absorb_fraction,
    absorb_fraction_inf,
    hitting_rate,
    slot_response,
    slot_taps,
)
from .detector import AdaptiveThresholdDetector, ThresholdDetector
from .distance import DistanceDistribution
from .exceptions import DivergenceError, DomainError, NumericError
from .expectations import (
    ExpectationBreakdown,
    expected_cci,
    expected_cci_numeric,
    expected_cci_transient,
    expected_isi,
    expected_isi_transient,
    expected_signal,
    expected_total,
    expected_total_transient,
)
from .simulator import (
    McEstimate,
    SimConfig,
    estimate_ber,
    estimate_ber_curve,
    estimate_mean_counts,
    sample_ppp,
    simulate_counts,
    simulate_realization,
)

__version__ = "0.1.0"
