// Canvas rendering of end-effector traces: a top-down (xy) and a side (xz)
// projection per card, with a moving dot synchronized to server timestamps.

import {
    Bounds,
    Plane,
    Vec3,
    interpolatePosition,
    loopTime,
    project,
    projectedBounds,
    toCanvas,
} from "./playback.js";
import type { TrajectoryPayload } from "./types.js";

export interface Trace {
    payload: TrajectoryPayload;
    color: string;
    label?: string;
}

const BASE_MARK = 4;

export function drawProjection(
    ctx: CanvasRenderingContext2D,
    traces: Trace[],
    plane: Plane,
    elapsed: number,
): void {
    const { width, height } = ctx.canvas;
    ctx.clearRect(0, 0, width, height);
    const bounds = projectedBounds(
        traces.map((t) => t.payload.ee_path.positions).concat([[[0, 0, 0]]]),
        plane,
    );
    drawBase(ctx, bounds, width, height);
    for (const trace of traces) {
        drawTrace(ctx, trace, plane, bounds, elapsed);
    }
    ctx.fillStyle = "#667";
    ctx.font = "10px sans-serif";
    ctx.fillText(plane === "xy" ? "top view (x,y)" : "side view (x,z)", 6, 12);
}

function drawBase(ctx: CanvasRenderingContext2D, bounds: Bounds, w: number, h: number): void {
    const [bx, by] = toCanvas(project([0, 0, 0], "xy"), bounds, w, h);
    ctx.fillStyle = "#bbb";
    ctx.beginPath();
    ctx.arc(bx, by, BASE_MARK, 0, 2 * Math.PI);
    ctx.fill();
}

function drawTrace(
    ctx: CanvasRenderingContext2D,
    trace: Trace,
    plane: Plane,
    bounds: Bounds,
    elapsed: number,
): void {
    const { positions } = trace.payload.ee_path;
    const timestamps = trace.payload.timestamps;
    const { width, height } = ctx.canvas;
    ctx.strokeStyle = trace.color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    positions.forEach((p, i) => {
        const [x, y] = toCanvas(project(p as Vec3, plane), bounds, width, height);
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
    });
    ctx.stroke();
    const duration = timestamps[timestamps.length - 1];
    const t = loopTime(elapsed, duration);
    const dot = interpolatePosition(timestamps, positions, t);
    const [dx, dy] = toCanvas(project(dot, plane), bounds, width, height);
    ctx.fillStyle = trace.color;
    ctx.beginPath();
    ctx.arc(dx, dy, 3.5, 0, 2 * Math.PI);
    ctx.fill();
}

export function drawSparkline(ctx: CanvasRenderingContext2D, values: number[]): void {
    const { width, height } = ctx.canvas;
    ctx.clearRect(0, 0, width, height);
    if (values.length < 2) return;
    const lo = Math.min(...values);
    const hi = Math.max(...values);
    const span = hi - lo || 1;
    ctx.strokeStyle = "#48f";
    ctx.lineWidth = 1;
    ctx.beginPath();
    values.forEach((v, i) => {
        const x = (i / (values.length - 1)) * (width - 2) + 1;
        const y = height - 2 - ((v - lo) / span) * (height - 4);
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
    });
    ctx.stroke();
}
