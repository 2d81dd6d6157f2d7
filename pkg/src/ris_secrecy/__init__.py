"""Secrecy-outage toolkit for RIS-aided MISO wiretap systems with a Poisson
field of eavesdroppers: a Monte Carlo system simulator and the closed-form
analytical stack (SNR distributions, outage probability, diversity order),
each cross-validating the other.
"""

from .channel import (
    ChannelRealization,
    EveSample,
    InternalConsistencyError,
    SystemConfig,
    array_response,
    optimal_phase_shifts,
    sample_ppp_disk,
    sample_realization,
    sample_rician_vector,
    snr_eve,
    snr_legit,
)
from .distributions import (
    EveSnrModel,
    LegitSnrModel,
    cdf_gamma_d,
    dirichlet_ratio,
    eve_aggregate_cdf_closed,
    eve_aggregate_cdf_exact,
    eve_aggregate_pdf,
    eve_model,
    eve_pointwise_cdf,
    legit_model,
    pdf_gamma_d,
)
from .montecarlo import (
    EmpiricalCdf,
    McPlan,
    McReport,
    empirical_cdf,
    ks_distance,
    run_mc,
    sample_eve_snr_at_radius,
    sample_gamma_d,
)
from .presets import (
    config_from_dict,
    config_to_dict,
    fig3_config,
    fig7_config,
    load_config,
    save_config,
)
from .sop import (
    RationalExponent,
    SopEngineError,
    SopResult,
    diversity_order_estimate,
    sop_alpha2_freespace,
    sop_alpha4_urban,
    sop_asymptotic,
    sop_closed,
    sop_quadrature,
)
from .special_functions import (
    ConvergenceError,
    MeijerGRestricted,
    bessel_k,
    laguerre_half,
    lower_incomplete_gamma,
    marcum_q1,
    marcum_q1_poly_approx,
    meijer_g_m0_0m,
    meijer_g_m0_0m_log,
    upper_incomplete_gamma,
)

__version__ = "0.1.0"
