"""TRP deployment planning for indoor 5G positioning.

Quantifies how radio placement geometry affects downlink TDOA positioning
accuracy and availability via information-bound maps and Monte Carlo
position-estimation campaigns.
"""

from .bounds import (
    BoundGrid,
    FimResult,
    SingularGeometryError,
    bound_grid,
    crlb_rmse_2d,
    crlb_rmse_3d,
    fim,
    gdop_2d,
    tdoa_jacobian,
)
from .campaign import (
    CampaignConfig,
    CampaignResult,
    MeasurementMode,
    densification_step,
    densification_sweep,
    los_histogram,
    percentile,
    run_campaign,
    worst_ue_locations,
)
from .channel import (
    MeasurementSet,
    NoiseModel,
    UeDrop,
    UnavailableFixError,
    filter_los_only,
    form_tdoa,
    los_probability,
    rng_stream,
    sample_los_states,
    synthesize_toa,
    synthesize_toas,
)
from .estimator import FixResult, SolveOptions, initial_guess, residual, solve_tdoa
from .scenario import (
    CarrierMetadata,
    Deployment,
    LayoutTag,
    ScenarioError,
    ScenarioFamily,
    ScenarioSpec,
    Trp,
    densify,
    deployment_from_json,
    deployment_to_json,
    make_edge_deployment,
    make_mixed_deployment,
    make_standard_deployment,
    preset_scenario,
)

__version__ = "0.1.0"
