// Slider snapping, upload-driven control configuration, request shaping.

import { describe, expect, it } from "vitest";

import {
    buildAnalyzeRequest,
    configureFromUpload,
    initialState,
    monotoneToggleVisible,
    setModel,
    setMonotone,
    setWeight,
    snapWeight,
} from "../src/state.js";
import { UPLOAD_RESPONSE } from "./fixtures.js";

function sessionState() {
    return configureFromUpload(initialState(), UPLOAD_RESPONSE);
}

describe("snapWeight", () => {
    it("snaps onto the 0.1 grid", () => {
        expect(snapWeight(1.234)).toBeCloseTo(1.2, 12);
        expect(snapWeight(1.25)).toBeCloseTo(1.3, 12);
        expect(snapWeight(3.999)).toBeCloseTo(4.0, 12);
    });

    it("clamps to the 0..5 slider range", () => {
        expect(snapWeight(-2)).toBe(0);
        expect(snapWeight(9.7)).toBe(5);
    });
});

describe("configureFromUpload", () => {
    it("creates one control per detected endpoint with defaults", () => {
        const state = sessionState();
        expect(state.endpoints.map((ep) => ep.name)).toEqual([
            "Toxicity", "Efficacy", "Tolerability",
        ]);
        for (const ep of state.endpoints) {
            expect(ep.weight).toBe(1);
            expect(ep.model).toBe("empirical");
            expect(ep.monotone).toBe(false);
        }
    });

    it("is deterministic for a re-upload of the same file", () => {
        expect(sessionState()).toEqual(sessionState());
    });

    it("round-trips slider state through unrelated changes", () => {
        let state = sessionState();
        state = setWeight(state, "Efficacy", 2.5);
        state = setModel(state, "Tolerability", "logit_linear");
        state = { ...state, metric: "um" };
        const efficacy = state.endpoints.find((ep) => ep.name === "Efficacy");
        expect(efficacy?.weight).toBeCloseTo(2.5, 12);
    });
});

describe("monotone toggle policy", () => {
    it("never shows the toggle for toxicity", () => {
        let state = sessionState();
        state = setModel(state, "Toxicity", "logit_linear");
        const tox = state.endpoints.find((ep) => ep.isToxicity)!;
        expect(monotoneToggleVisible(tox)).toBe(false);
        // attempts to set it are ignored
        state = setMonotone(state, "Toxicity", true);
        expect(state.endpoints.find((ep) => ep.isToxicity)!.monotone).toBe(false);
    });

    it("shows the toggle only for logit models on other endpoints", () => {
        let state = sessionState();
        const eff = () => state.endpoints.find((ep) => ep.name === "Efficacy")!;
        expect(monotoneToggleVisible(eff())).toBe(false); // empirical
        state = setModel(state, "Efficacy", "logit_quadratic");
        expect(monotoneToggleVisible(eff())).toBe(true);
        state = setModel(state, "Efficacy", "emax");
        expect(monotoneToggleVisible(eff())).toBe(false); // inherently monotone
    });
});

describe("buildAnalyzeRequest", () => {
    it("carries weights, models, and the mono suffix", () => {
        let state = sessionState();
        state = setWeight(state, "Efficacy", 2.5);
        state = setModel(state, "Efficacy", "logit_quadratic");
        state = setMonotone(state, "Efficacy", true);
        state = setModel(state, "Toxicity", "exponential");
        const request = buildAnalyzeRequest(state);
        expect(request.dataset_id).toBe("abc123");
        expect(request.models).toEqual({
            Toxicity: "exponential",
            Efficacy: "logit_quadratic:mono",
            Tolerability: "empirical",
        });
        expect(request.weights).toEqual({
            Toxicity: 1, Efficacy: 2.5, Tolerability: 1,
        });
        expect(request.bootstrap).toBeUndefined();
    });

    it("adds the bootstrap block only when asked", () => {
        const state = { ...sessionState(), bootstrapReplicates: 500, bootstrapSeed: 7 };
        const request = buildAnalyzeRequest(state, { bootstrap: true });
        expect(request.bootstrap).toEqual({ replicates: 500, alpha: 0.05, seed: 7 });
    });

    it("refuses to build without a dataset", () => {
        expect(() => buildAnalyzeRequest(initialState())).toThrow(/no dataset/);
    });
});
