// Pure playback and projection math for animating end-effector traces.
// Rendering never recomputes kinematics: it interpolates the positions the
// server sent, synchronized to the server's timestamps.

export type Vec3 = [number, number, number];
export type Plane = "xy" | "xz";

/** Wrap wall-clock time into the trajectory's [0, duration) playback loop. */
export function loopTime(elapsed: number, duration: number): number {
    if (duration <= 0) return 0;
    const t = elapsed % duration;
    return t < 0 ? t + duration : t;
}

/** Linear interpolation of the EE position at time t (clamped to the ends). */
export function interpolatePosition(timestamps: number[], positions: number[][], t: number): Vec3 {
    const n = timestamps.length;
    if (n === 0 || positions.length !== n) {
        throw new Error("timestamps and positions must align");
    }
    if (t <= timestamps[0]) return positions[0].slice(0, 3) as Vec3;
    if (t >= timestamps[n - 1]) return positions[n - 1].slice(0, 3) as Vec3;
    let hi = 1;
    while (timestamps[hi] < t) hi += 1;
    const lo = hi - 1;
    const span = timestamps[hi] - timestamps[lo];
    const alpha = span > 0 ? (t - timestamps[lo]) / span : 0;
    const a = positions[lo];
    const b = positions[hi];
    return [
        a[0] + alpha * (b[0] - a[0]),
        a[1] + alpha * (b[1] - a[1]),
        a[2] + alpha * (b[2] - a[2]),
    ];
}

/** Drop one axis: top-down (xy) or side (xz) view of a world point. */
export function project(p: Vec3, plane: Plane): [number, number] {
    return plane === "xy" ? [p[0], p[1]] : [p[0], p[2]];
}

export interface Bounds {
    xMin: number;
    xMax: number;
    yMin: number;
    yMax: number;
}

/** Shared square bounds of several projected paths, with a margin factor. */
export function projectedBounds(paths: number[][][], plane: Plane, margin = 0.1): Bounds {
    let xMin = Infinity;
    let xMax = -Infinity;
    let yMin = Infinity;
    let yMax = -Infinity;
    for (const path of paths) {
        for (const p of path) {
            const [x, y] = project(p as Vec3, plane);
            xMin = Math.min(xMin, x);
            xMax = Math.max(xMax, x);
            yMin = Math.min(yMin, y);
            yMax = Math.max(yMax, y);
        }
    }
    if (!isFinite(xMin)) {
        return { xMin: -1, xMax: 1, yMin: -1, yMax: 1 };
    }
    // pad to a square region so both projections keep aspect ratio
    const side = Math.max(xMax - xMin, yMax - yMin, 1e-6);
    const pad = side * margin;
    const cx = (xMin + xMax) / 2;
    const cy = (yMin + yMax) / 2;
    const half = side / 2 + pad;
    return { xMin: cx - half, xMax: cx + half, yMin: cy - half, yMax: cy + half };
}

/** Map a projected point into canvas pixels (y axis flipped). */
export function toCanvas(
    point: [number, number],
    bounds: Bounds,
    width: number,
    height: number,
): [number, number] {
    const sx = width / (bounds.xMax - bounds.xMin);
    const sy = height / (bounds.yMax - bounds.yMin);
    return [(point[0] - bounds.xMin) * sx, height - (point[1] - bounds.yMin) * sy];
}
