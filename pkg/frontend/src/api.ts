// Thin typed client for the styleopt service. Every non-2xx response is
// surfaced as an ApiError carrying the server's machine code, so the UI can
// branch on conditions like batch_pending without string matching.

import type {
    BatchJson,
    CreateSessionBody,
    LabelResponse,
    PlanJson,
    StatusJson,
} from "./types.js";

export class ApiError extends Error {
    constructor(
        public readonly status: number,
        public readonly code: string,
        message: string,
    ) {
        super(message);
        this.name = "ApiError";
    }
}

export class StyleOptApi {
    constructor(private readonly baseUrl: string = "") {}

    private async request<T>(path: string, init?: RequestInit): Promise<T> {
        let response: Response;
        try {
            response = await fetch(`${this.baseUrl}${path}`, {
                headers: { "Content-Type": "application/json" },
                ...init,
            });
        } catch (err) {
            throw new ApiError(0, "network_error", String(err));
        }
        if (!response.ok) {
            let code = "unknown_error";
            let message = `${response.status}`;
            try {
                const body = await response.json();
                code = body.code ?? code;
                message = body.message ?? message;
            } catch {
                // non-JSON error body; keep defaults
            }
            throw new ApiError(response.status, code, message);
        }
        return (await response.json()) as T;
    }

    healthz(): Promise<{ status: string }> {
        return this.request("/healthz");
    }

    createSession(body: CreateSessionBody): Promise<{ session_id: string }> {
        return this.request("/sessions", { method: "POST", body: JSON.stringify(body) });
    }

    nextBatch(sessionId: string): Promise<BatchJson> {
        return this.request(`/sessions/${sessionId}/queries/next`);
    }

    pendingBatch(sessionId: string): Promise<BatchJson> {
        return this.request(`/sessions/${sessionId}/queries/pending`);
    }

    submitLabel(sessionId: string, pairId: string, choice: "A" | "B"): Promise<LabelResponse> {
        return this.request(`/sessions/${sessionId}/labels`, {
            method: "POST",
            body: JSON.stringify({ pair_id: pairId, choice }),
        });
    }

    status(sessionId: string): Promise<StatusJson> {
        return this.request(`/sessions/${sessionId}/status`);
    }

    plan(
        sessionId: string,
        start: number[],
        goal: number[],
        options: { lambda?: number; baselineOnly?: boolean } = {},
    ): Promise<PlanJson> {
        const body: Record<string, unknown> = { start, goal };
        if (options.lambda !== undefined) body.lambda = options.lambda;
        if (options.baselineOnly) body.baseline_only = true;
        return this.request(`/sessions/${sessionId}/plan`, {
            method: "POST",
            body: JSON.stringify(body),
        });
    }
}
