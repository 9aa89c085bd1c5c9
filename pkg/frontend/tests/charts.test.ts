// Chart geometry: coincident utility lines under equal weights, ribbons,
// and scale sanity.

import { describe, expect, it } from "vitest";

import {
    defaultViewport,
    linePath,
    pointMarkers,
    ribbonPath,
    xScale,
    yScale,
} from "../src/charts.js";
import { mockReport } from "./fixtures.js";

describe("scales", () => {
    const vp = defaultViewport([1, 2, 3, 4, 5]);

    it("maps the dose range onto the inner plot width", () => {
        expect(xScale(vp, 1)).toBe(vp.marginLeft);
        expect(xScale(vp, 5)).toBe(vp.width - vp.marginRight);
    });

    it("maps probability 1 to the top and 0 to the bottom", () => {
        expect(yScale(vp, 1)).toBe(vp.marginTop);
        expect(yScale(vp, 0)).toBe(vp.height - vp.marginBottom);
    });
});

describe("utility lines", () => {
    it("equal sliders render coincident UM and UWM paths", () => {
        const report = mockReport([2.0, 2.0, 2.0]);
        const vp = defaultViewport(report.dose_levels);
        expect(linePath(report.plot.um_line, vp)).toBe(
            linePath(report.plot.uwm_line, vp),
        );
    });

    it("unequal sliders separate the paths", () => {
        const report = mockReport([0.2, 0.5, 0.3]);
        const vp = defaultViewport(report.dose_levels);
        expect(linePath(report.plot.um_line, vp)).not.toBe(
            linePath(report.plot.uwm_line, vp),
        );
    });

    it("emits one segment per dose", () => {
        const report = mockReport([1, 1, 1]);
        const vp = defaultViewport(report.dose_levels);
        const path = linePath(report.plot.um_line, vp);
        expect(path.startsWith("M")).toBe(true);
        expect(path.split(" ").length).toBe(5);
    });
});

describe("ribbonPath", () => {
    it("builds a closed polygon over the interval bounds", () => {
        const vp = defaultViewport([1, 2, 3]);
        const path = ribbonPath(
            { doses: [1, 2, 3], lower: [0.2, 0.3, 0.4], upper: [0.4, 0.5, 0.6] },
            vp,
        );
        expect(path.startsWith("M")).toBe(true);
        expect(path.endsWith("Z")).toBe(true);
        expect(path.split("L").length).toBe(6); // 3 upper + 3 lower vertices
    });
});

describe("pointMarkers", () => {
    it("places one marker per observed dose", () => {
        const report = mockReport([1, 1, 1]);
        const vp = defaultViewport(report.dose_levels);
        const markers = pointMarkers(report.plot.endpoints[1].points, vp);
        expect(markers.length).toBe(5);
        expect(markers[0].x).toBeLessThan(markers[4].x);
    });
});
