"""styleopt: preference-learned motion style costs for serial-arm planning.

Learn a per-style trajectory cost (linear over hand-designed features, or a
small per-step network) from pairwise preference labels, and plan with it by
adding the learned term to a smoothness objective under fixed start/goal
constraints. Labels come from a synthetic oracle or a human via the HTTP
service and labeling UI.
"""

from ._kernels import BACKEND as kernel_backend
from .costs import (
    FeatureVector,
    FeaturizedCost,
    MlpCost,
    ObjectiveConfig,
    StyleCost,
    cost_from_json,
    cost_to_json,
    extract_features,
    featurized_cost,
    mlp_forward,
    total_objective,
)
from .kinematics import ArmModel, EePose, default_arm, ee_path, forward_kinematics, rotate_base
from .learning import (
    PreferencePair,
    TrainerSettings,
    TrainingReport,
    augment_rotations,
    pair_loss,
    preference_probability,
    update_weights,
)
from .optimizer import OptimizeResult, OptimizerSettings, numeric_gradient, optimize
from .query import (
    Oracle,
    QueryBatch,
    heldout_agreement,
    next_batch,
    oracle_label,
    run_oracle_training,
)
from .store import Session, SessionStore, export_trajectory, new_session, replay_session
from .trajectory import (
    PerturbationSpec,
    Task,
    TimedTrajectory,
    Trajectory,
    linear_interpolation,
    rotate_trajectory,
    smooth_perturbation,
    ssd_cost,
    time_trajectory,
)

__version__ = "0.1.0"
