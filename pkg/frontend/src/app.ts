// UI controller. All state lives on the server; the controller's job is to
// mirror it into a View and push labels back. A page reload rebuilds the
// exact same state from /status and /queries/pending.

import { ApiError, StyleOptApi } from "./api.js";
import type { BatchJson, PairJson, PlanJson, StatusJson } from "./types.js";

export interface NoticeKind {
    level: "info" | "warn" | "error";
    text: string;
}

export interface View {
    showStatus(status: StatusJson): void;
    showBatch(batch: BatchJson | null): void;
    showNotice(notice: NoticeKind): void;
    showTrained(finalLoss: number | null): void;
    showPlan(learned: PlanJson, baseline: PlanJson): void;
    setBusy(busy: boolean): void;
}

export class LabelerController {
    private pending: PairJson[] = [];
    private batch: BatchJson | null = null;
    private inFlight = false;

    constructor(
        private readonly api: StyleOptApi,
        private readonly view: View,
        readonly sessionId: string,
    ) {}

    get pendingPairs(): readonly PairJson[] {
        return this.pending;
    }

    /** Rebuild the whole view from the server (startup and after reload). */
    async refresh(): Promise<void> {
        const status = await this.api.status(this.sessionId);
        this.view.showStatus(status);
        const pending = await this.api.pendingBatch(this.sessionId);
        this.pending = pending.pairs;
        this.batch = pending.pairs.length > 0 ? pending : null;
        this.view.showBatch(this.batch);
    }

    /** Ask the server for a fresh batch of query pairs. */
    async fetchNext(): Promise<void> {
        if (this.inFlight) return;
        this.setBusy(true);
        try {
            this.batch = await this.api.nextBatch(this.sessionId);
            this.pending = this.batch.pairs.slice();
            this.view.showBatch(this.batch);
        } catch (err) {
            if (err instanceof ApiError && err.code === "batch_pending") {
                this.view.showNotice({ level: "warn", text: "Finish the current batch first." });
                await this.refresh();
            } else {
                this.view.showNotice({ level: "error", text: describe(err) });
            }
        } finally {
            this.setBusy(false);
        }
    }

    /** Send one label; on batch completion surface the training result. */
    async submitLabel(pairId: string, choice: "A" | "B"): Promise<void> {
        if (this.inFlight) return;
        this.setBusy(true);
        try {
            const result = await this.api.submitLabel(this.sessionId, pairId, choice);
            this.pending = this.pending.filter((p) => p.pair_id !== pairId);
            if (this.batch) {
                this.batch = { ...this.batch, pairs: this.pending };
            }
            this.view.showBatch(this.pending.length > 0 ? this.batch : null);
            if (result.trained) {
                this.view.showTrained(result.final_loss);
            }
            this.view.showStatus(await this.api.status(this.sessionId));
        } catch (err) {
            if (err instanceof ApiError && err.code === "already_labeled") {
                this.view.showNotice({ level: "warn", text: "That pair is already labeled." });
                await this.refresh();
            } else {
                this.view.showNotice({ level: "error", text: describe(err) });
            }
        } finally {
            this.setBusy(false);
        }
    }

    /** Plan with the learned cost and the smoothness-only baseline side by side. */
    async previewPlan(start: number[], goal: number[]): Promise<void> {
        if (this.inFlight) return;
        this.setBusy(true);
        try {
            const learned = await this.api.plan(this.sessionId, start, goal);
            const baseline = await this.api.plan(this.sessionId, start, goal, { baselineOnly: true });
            this.view.showPlan(learned, baseline);
        } catch (err) {
            this.view.showNotice({ level: "error", text: describe(err) });
        } finally {
            this.setBusy(false);
        }
    }

    private setBusy(busy: boolean): void {
        this.inFlight = busy;
        this.view.setBusy(busy);
    }
}

export function parseJointVector(text: string, dof: number): number[] {
    const parts = text
        .split(/[\s,]+/)
        .filter((s) => s.length > 0)
        .map(Number);
    if (parts.length !== dof || parts.some((v) => !Number.isFinite(v))) {
        throw new Error(`expected ${dof} finite joint values`);
    }
    return parts;
}

function describe(err: unknown): string {
    if (err instanceof ApiError) return `${err.code}: ${err.message}`;
    return String(err);
}
