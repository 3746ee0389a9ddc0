"""Link-level simulator for I/Q-imbalance effects on terahertz MU-MIMO-OFDM
links with hybrid array-of-subarrays beamforming."""

from .beamforming import (
    analog_beamformers,
    concatenate,
    concatenated_los_channel,
    digital_beamformers,
    effective_channels,
    effective_channels_all,
)
from .channel import (
    ArrayGeometry,
    ChannelSet,
    UserPlacement,
    element_positions,
    los_channel,
    path_loss,
    rayleigh_channel,
    steering_vector,
    subcarrier_frequency,
    subcarrier_indices,
)
from .config import SPEED_OF_LIGHT, SystemConfig
from .experiments import ResultTable, Scenario, place_users, run
from .impairments import (
    IqiParams,
    MismatchMatrices,
    amplitude_from_irr,
    irr_db,
    max_irr_db,
    mismatch_matrices,
    noise_covariance_iqi,
)
from .metrics import (
    NumericalError,
    OracleConvergenceError,
    ebn0_min,
    ebn0_min_iqi,
    numeric_slope_oracle,
    oracle_agreement,
    rate_subcarrier,
    se_approx,
    sinr_iqi,
    sinr_no_iqi,
    sum_rate,
    sum_rate_tin,
    wideband_slope,
    wideband_slope_iqi,
)

__version__ = "0.1.0"
