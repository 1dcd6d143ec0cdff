// DOM wiring: build pair cards, run the playback loop, route buttons and
// keyboard shortcuts (1-4 select a card, A/B label it) to the controller.

import { StyleOptApi } from "./api.js";
import { LabelerController, NoticeKind, View, parseJointVector } from "./app.js";
import { drawProjection, drawSparkline, Trace } from "./render.js";
import type { BatchJson, PlanJson, StatusJson } from "./types.js";

const COLORS = { a: "#d9822b", b: "#3a7bd5", learned: "#d9822b", baseline: "#999" };

interface Animated {
    canvas: HTMLCanvasElement;
    traces: Trace[];
    plane: "xy" | "xz";
}

class DomView implements View {
    private animated: Animated[] = [];
    private selectedCard = 0;
    private start = performance.now();

    constructor(private readonly onLabel: (pairId: string, choice: "A" | "B") => void) {
        const tick = () => {
            const elapsed = (performance.now() - this.start) / 1000;
            for (const a of this.animated) {
                const ctx = a.canvas.getContext("2d");
                if (ctx) drawProjection(ctx, a.traces, a.plane, elapsed);
            }
            requestAnimationFrame(tick);
        };
        requestAnimationFrame(tick);
    }

    showStatus(status: StatusJson): void {
        byId("session-label").textContent = `${status.session_id} (${status.cost_type}, style: ${status.style})`;
        byId("stat-round").textContent = String(status.round_index);
        byId("stat-labels").textContent = String(status.labels_total);
        byId("stat-loss").textContent =
            status.last_loss === null ? "-" : status.last_loss.toFixed(4);
        const summary = status.cost_snapshot_summary;
        byId("stat-weights").textContent =
            summary.type === "featurized"
                ? summary.w.map((v) => v.toFixed(3)).join(", ")
                : `network, ${summary.num_parameters} parameters, |w| = ${summary.weight_norm.toFixed(3)}`;
    }

    showBatch(batch: BatchJson | null): void {
        const host = byId("pairs");
        host.innerHTML = "";
        this.animated = this.animated.filter((a) => a.canvas.closest("#plan-canvases"));
        this.selectedCard = 0;
        if (!batch || batch.pairs.length === 0) {
            byId("batch-title").textContent = "No pending pairs";
            return;
        }
        byId("batch-title").textContent =
            `Round ${batch.round_index}: which looks more ${batch.style}?`;
        batch.pairs.forEach((pair, index) => {
            const card = document.createElement("div");
            card.className = "pair-card";
            card.dataset.pairId = pair.pair_id;
            card.tabIndex = 0;
            const title = document.createElement("h3");
            title.textContent = `Pair ${index + 1}`;
            card.appendChild(title);
            const row = document.createElement("div");
            row.className = "canvas-row";
            for (const plane of ["xy", "xz"] as const) {
                const canvas = document.createElement("canvas");
                canvas.width = 180;
                canvas.height = 180;
                row.appendChild(canvas);
                this.animated.push({
                    canvas,
                    plane,
                    traces: [
                        { payload: pair.a, color: COLORS.a, label: "A" },
                        { payload: pair.b, color: COLORS.b, label: "B" },
                    ],
                });
            }
            card.appendChild(row);
            const buttons = document.createElement("div");
            buttons.className = "label-buttons";
            for (const choice of ["A", "B"] as const) {
                const button = document.createElement("button");
                button.textContent = `${choice} looks more ${batch.style}`;
                button.style.borderColor = choice === "A" ? COLORS.a : COLORS.b;
                button.addEventListener("click", () => {
                    button.disabled = true;
                    this.onLabel(pair.pair_id, choice);
                });
                buttons.appendChild(button);
            }
            card.appendChild(buttons);
            host.appendChild(card);
        });
    }

    showNotice(notice: NoticeKind): void {
        const banner = byId("notice");
        banner.textContent = notice.text;
        banner.className = `notice ${notice.level}`;
        banner.hidden = false;
        window.setTimeout(() => (banner.hidden = true), 4000);
    }

    showTrained(finalLoss: number | null): void {
        this.showNotice({
            level: "info",
            text: `Batch complete, model retrained (loss ${finalLoss === null ? "-" : finalLoss.toFixed(4)})`,
        });
    }

    showPlan(learned: PlanJson, baseline: PlanJson): void {
        const host = byId("plan-canvases");
        host.innerHTML = "";
        this.animated = this.animated.filter((a) => !a.canvas.closest("#plan-canvases"));
        for (const plane of ["xy", "xz"] as const) {
            const canvas = document.createElement("canvas");
            canvas.width = 220;
            canvas.height = 220;
            host.appendChild(canvas);
            this.animated.push({
                canvas,
                plane,
                traces: [
                    { payload: baseline, color: COLORS.baseline, label: "baseline" },
                    { payload: learned, color: COLORS.learned, label: "learned" },
                ],
            });
        }
        const spark = byId("plan-sparkline") as HTMLCanvasElement;
        const ctx = spark.getContext("2d");
        if (ctx) drawSparkline(ctx, learned.objective_history);
        byId("plan-summary").textContent =
            `learned objective ${learned.objective_history.at(-1)?.toFixed(4)} in ` +
            `${learned.iterations} iterations (orange) vs smoothness-only baseline (gray)`;
    }

    setBusy(busy: boolean): void {
        document.body.classList.toggle("busy", busy);
        document
            .querySelectorAll<HTMLButtonElement>(".label-buttons button, #controls button")
            .forEach((b) => (b.disabled = busy));
    }

    selectCard(index: number): string | null {
        const cards = document.querySelectorAll<HTMLElement>(".pair-card");
        if (index >= cards.length) return null;
        cards.forEach((c, i) => c.classList.toggle("selected", i === index));
        this.selectedCard = index;
        return cards[index].dataset.pairId ?? null;
    }

    selectedPairId(): string | null {
        const cards = document.querySelectorAll<HTMLElement>(".pair-card");
        if (cards.length === 0) return null;
        const index = Math.min(this.selectedCard, cards.length - 1);
        return cards[index].dataset.pairId ?? null;
    }
}

function byId(id: string): HTMLElement {
    const el = document.getElementById(id);
    if (!el) throw new Error(`missing element #${id}`);
    return el;
}

async function boot(): Promise<void> {
    const api = new StyleOptApi(
        (byId("base-url") as HTMLInputElement).value.replace(/\/$/, ""),
    );
    let controller: LabelerController | null = null;
    const view = new DomView((pairId, choice) => controller?.submitLabel(pairId, choice));

    byId("create-session").addEventListener("click", async () => {
        const style = (byId("style-input") as HTMLInputElement).value.trim() || "sad";
        const costType = (byId("cost-type") as HTMLSelectElement).value as "featurized" | "mlp";
        try {
            const { session_id } = await api.createSession({ style, cost_type: costType });
            (byId("session-input") as HTMLInputElement).value = session_id;
            controller = new LabelerController(api, view, session_id);
            await controller.refresh();
        } catch (err) {
            view.showNotice({ level: "error", text: String(err) });
        }
    });

    byId("attach-session").addEventListener("click", async () => {
        const sessionId = (byId("session-input") as HTMLInputElement).value.trim();
        if (!sessionId) return;
        controller = new LabelerController(api, view, sessionId);
        try {
            await controller.refresh();
        } catch (err) {
            view.showNotice({ level: "error", text: String(err) });
        }
    });

    byId("fetch-batch").addEventListener("click", () => controller?.fetchNext());

    byId("preview-plan").addEventListener("click", async () => {
        if (!controller) return;
        try {
            // both fields must agree in length; the server checks the arm's dof
            const startText = (byId("plan-start") as HTMLInputElement).value;
            const dof = startText.split(/[\s,]+/).filter(Boolean).length;
            const start = parseJointVector(startText, dof);
            const goal = parseJointVector((byId("plan-goal") as HTMLInputElement).value, dof);
            await controller.previewPlan(start, goal);
        } catch (err) {
            view.showNotice({ level: "error", text: String(err) });
        }
    });

    window.addEventListener("keydown", (ev) => {
        if (!controller) return;
        if (ev.key >= "1" && ev.key <= "9") {
            view.selectCard(Number(ev.key) - 1);
        } else if (ev.key === "a" || ev.key === "A" || ev.key === "b" || ev.key === "B") {
            const pairId = view.selectedPairId();
            const choice = ev.key.toUpperCase() as "A" | "B";
            if (pairId) controller.submitLabel(pairId, choice);
        } else if (ev.key === "n" || ev.key === "N") {
            controller.fetchNext();
        }
    });
}

boot().catch((err) => console.error(err));
