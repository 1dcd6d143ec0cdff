// JSON shapes served by the styleopt HTTP API.

export interface TrajectoryJson {
    dof: number;
    T: number;
    waypoints: number[][];
}

export interface EePathJson {
    positions: number[][];
    pointings: number[][];
}

export interface TrajectoryPayload {
    trajectory: TrajectoryJson;
    timestamps: number[];
    ee_path: EePathJson;
}

export interface PairJson {
    pair_id: string;
    a: TrajectoryPayload;
    b: TrajectoryPayload;
}

export interface BatchJson {
    batch_id?: string;
    round_index: number;
    style: string;
    pairs: PairJson[];
}

export interface FeaturizedSummary {
    type: "featurized";
    style: string;
    uses_velocity: boolean;
    w: number[];
}

export interface MlpSummary {
    type: "mlp";
    style: string;
    num_parameters: number;
    weight_norm: number;
}

export interface StatusJson {
    session_id: string;
    style: string;
    cost_type: string;
    round_index: number;
    labels_total: number;
    pending_pairs: number;
    last_loss: number | null;
    cost_snapshot_summary: FeaturizedSummary | MlpSummary;
}

export interface LabelResponse {
    remaining_in_batch: number;
    trained: boolean;
    final_loss: number | null;
    round_index: number;
}

export interface PlanJson extends TrajectoryPayload {
    objective_history: number[];
    iterations: number;
    converged: boolean;
}

export interface SessionSettings {
    seed?: number;
    lambda?: number;
    T?: number;
    duration?: number;
    pairs_per_batch?: number;
    uses_velocity?: boolean;
    epochs_per_round?: number;
}

export interface CreateSessionBody {
    style: string;
    cost_type: "featurized" | "mlp";
    settings?: SessionSettings;
}
