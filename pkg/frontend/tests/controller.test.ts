// Debounce, stale-response discarding, and the explicit bootstrap action.

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { AnalysisController } from "../src/controller.js";
import { configureFromUpload, initialState, setWeight } from "../src/state.js";
import type { AnalysisReport } from "../src/types.js";
import { UPLOAD_RESPONSE, jsonResponse, mockReport } from "./fixtures.js";

function sessionState() {
    return configureFromUpload(initialState(), UPLOAD_RESPONSE);
}

describe("AnalysisController", () => {
    beforeEach(() => {
        vi.useFakeTimers();
    });

    afterEach(() => {
        vi.useRealTimers();
    });

    it("collapses a burst of slider changes into exactly one request", async () => {
        const calls: string[] = [];
        const api = new ApiClient("", async (url, init) => {
            calls.push(String(init?.body ?? ""));
            return jsonResponse(mockReport([1, 1, 1]));
        });
        const reports: AnalysisReport[] = [];
        const controller = new AnalysisController(api, {
            onReport: (r) => reports.push(r),
            onError: () => {
                throw new Error("unexpected error");
            },
        });

        let state = sessionState();
        for (const value of [1.2, 1.7, 2.3, 2.9, 3.4]) {
            state = setWeight(state, "Efficacy", value);
            controller.scheduleRecompute(state);
            vi.advanceTimersByTime(100); // under the 250 ms window each time
        }
        expect(calls.length).toBe(0); // still debouncing

        await vi.advanceTimersByTimeAsync(250);
        expect(calls.length).toBe(1);
        expect(reports.length).toBe(1);
        // the one request carries the final slider value
        expect(JSON.parse(calls[0]).weights.Efficacy).toBeCloseTo(3.4, 10);
    });

    it("fires again for changes after the window closes", async () => {
        let count = 0;
        const api = new ApiClient("", async () => {
            count += 1;
            return jsonResponse(mockReport([1, 1, 1]));
        });
        const controller = new AnalysisController(api, {
            onReport: () => undefined,
            onError: () => undefined,
        });
        const state = sessionState();
        controller.scheduleRecompute(state);
        await vi.advanceTimersByTimeAsync(250);
        controller.scheduleRecompute(state);
        await vi.advanceTimersByTimeAsync(250);
        expect(count).toBe(2);
    });

    it("discards stale responses by sequence number", async () => {
        const gates: Array<() => void> = [];
        const bodies: string[] = [];
        const api = new ApiClient("", (url, init) => {
            bodies.push(String(init?.body ?? ""));
            const index = bodies.length;
            return new Promise((resolve) => {
                gates.push(() =>
                    resolve(jsonResponse(mockReport([index, 1, 1]))),
                );
            });
        });
        const seen: AnalysisReport[] = [];
        const controller = new AnalysisController(api, {
            onReport: (r) => seen.push(r),
            onError: () => undefined,
        });

        let state = sessionState();
        controller.scheduleRecompute(state);
        await vi.advanceTimersByTimeAsync(250);
        state = setWeight(state, "Efficacy", 4.0);
        controller.scheduleRecompute(state);
        await vi.advanceTimersByTimeAsync(250);
        expect(gates.length).toBe(2);

        gates[1]();       // newest response lands first
        await Promise.resolve();
        gates[0]();       // stale response arrives late
        await vi.runAllTimersAsync();

        expect(seen.length).toBe(1);
        expect(seen[0].utility.weights[0]).toBeCloseTo(2 / 4, 10);
    });

    it("runs bootstrap immediately and cancels any pending recompute", async () => {
        const bodies: string[] = [];
        const api = new ApiClient("", async (url, init) => {
            bodies.push(String(init?.body ?? ""));
            return jsonResponse(mockReport([1, 1, 1]));
        });
        const controller = new AnalysisController(api, {
            onReport: () => undefined,
            onError: () => undefined,
        });
        const state = sessionState();
        controller.scheduleRecompute(state);
        await controller.runBootstrap(state);
        await vi.advanceTimersByTimeAsync(500);

        expect(bodies.length).toBe(1);
        const parsed = JSON.parse(bodies[0]);
        expect(parsed.bootstrap).toEqual({ replicates: 1000, alpha: 0.05, seed: 0 });
    });

    it("reports service errors without dropping state", async () => {
        const api = new ApiClient("", async () =>
            jsonResponse({ error: { code: "utility/AllZeroWeights",
                                    message: "at least one endpoint weight must be positive" } },
                         400),
        );
        const errors: unknown[] = [];
        const controller = new AnalysisController(api, {
            onReport: () => {
                throw new Error("should not succeed");
            },
            onError: (e) => errors.push(e),
        });
        controller.scheduleRecompute(sessionState());
        await vi.advanceTimersByTimeAsync(250);
        expect(errors.length).toBe(1);
        expect(String((errors[0] as Error).message)).toContain("positive");
    });
});
