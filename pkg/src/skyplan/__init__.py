"""Planner and simulator for UAV missions over an integrated GEO-satellite
and terrestrial cellular network: channel and energy models, a grid MDP with
joint motion/association actions, a replay-buffer Q-learning trainer, and an
exact shortest-path planning oracle."""

from .channel import (
    CoverageMap,
    GeoRadioParams,
    MbsSite,
    TerrestrialRadioParams,
    array_gain,
    build_coverage_map,
    element_pattern,
    fspl_db,
    geo_beam_gain_db,
    sinr_mbs_db,
    snr_geo_db,
    terrestrial_pathloss_db,
)
from .config import DEFAULT_CONFIG, load_config
from .dqn import (
    ReplayBuffer,
    TabularConfig,
    TrainerConfig,
    greedy_rollout,
    select_action,
    tabular_q_learning,
    train,
)
from .energy import (
    EnergyBudget,
    MissionInfeasibleError,
    PropulsionParams,
    REFERENCE_ROTOR,
    available_energy_j,
    propulsion_power_w,
    trip_energy_j,
)
from .environment import (
    GEO,
    TERRESTRIAL,
    MdpState,
    PlannerAction,
    PlanningEnv,
    StepOutcome,
    energy_shaping,
    handover_cost,
    resolve_association,
    transition,
    valid_actions,
)
from .geometry import (
    EcefPoint,
    GeodeticPoint,
    GridIndex,
    GridSpec,
    LocalFrame,
    ecef_to_geodetic,
    elevation_azimuth,
    geodetic_to_ecef,
    grid_center,
    off_boresight_angle,
)
from .oracle import NegativeCycleError, OracleResult, exact_optimum
from .qnet import QApproximator, load_checkpoint, save_checkpoint, soft_update
from .runio import RunDirectory, RunRecord, TrajectoryRecord
from .scenario import (
    Scenario,
    generate_scenario,
    scenario_from_json,
    scenario_to_json,
    with_geo_enabled,
)

__version__ = "0.1.0"
