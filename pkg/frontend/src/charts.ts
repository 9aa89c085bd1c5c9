// Pure chart geometry: report series in, SVG path strings out.

import type { LineSeries, PointSeries, RibbonSeries } from "./types.js";

export interface Viewport {
    width: number;
    height: number;
    marginLeft: number;
    marginRight: number;
    marginTop: number;
    marginBottom: number;
    doseMin: number;
    doseMax: number;
}

export function defaultViewport(doses: number[]): Viewport {
    return {
        width: 560,
        height: 320,
        marginLeft: 42,
        marginRight: 14,
        marginTop: 12,
        marginBottom: 30,
        doseMin: Math.min(...doses),
        doseMax: Math.max(...doses),
    };
}

export function xScale(vp: Viewport, dose: number): number {
    const span = vp.doseMax - vp.doseMin || 1;
    const inner = vp.width - vp.marginLeft - vp.marginRight;
    return vp.marginLeft + ((dose - vp.doseMin) / span) * inner;
}

/** Probabilities and utilities share the fixed [0, 1] vertical scale. */
export function yScale(vp: Viewport, value: number): number {
    const inner = vp.height - vp.marginTop - vp.marginBottom;
    return vp.marginTop + (1 - value) * inner;
}

function toPath(xs: number[], ys: number[]): string {
    return xs
        .map((x, i) => `${i === 0 ? "M" : "L"}${x.toFixed(2)},${ys[i].toFixed(2)}`)
        .join(" ");
}

export function linePath(series: LineSeries, vp: Viewport): string {
    const xs = series.doses.map((d) => xScale(vp, d));
    const ys = series.values.map((v) => yScale(vp, v));
    return toPath(xs, ys);
}

export function curvePath(series: PointSeries, vp: Viewport): string {
    const xs = series.doses.map((d) => xScale(vp, d));
    const ys = series.probs.map((v) => yScale(vp, v));
    return toPath(xs, ys);
}

/** Closed polygon: upper bound left-to-right, lower bound back. */
export function ribbonPath(ribbon: RibbonSeries, vp: Viewport): string {
    const forward = ribbon.doses.map(
        (d, i) => `${xScale(vp, d).toFixed(2)},${yScale(vp, ribbon.upper[i]).toFixed(2)}`,
    );
    const backward = [...ribbon.doses]
        .map((d, i) => `${xScale(vp, d).toFixed(2)},${yScale(vp, ribbon.lower[i]).toFixed(2)}`)
        .reverse();
    return `M${forward.join(" L")} L${backward.join(" L")} Z`;
}

export interface Marker {
    x: number;
    y: number;
}

export function pointMarkers(points: PointSeries, vp: Viewport): Marker[] {
    return points.doses.map((d, i) => ({
        x: xScale(vp, d),
        y: yScale(vp, points.probs[i]),
    }));
}
