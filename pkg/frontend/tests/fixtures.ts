// Hand-built service responses used by the dashboard tests.

import type { AnalysisReport, UploadResponse } from "../src/types.js";

export const UPLOAD_RESPONSE: UploadResponse = {
    dataset_id: "abc123",
    endpoints: [
        { name: "Toxicity", is_toxicity: true },
        { name: "Efficacy", is_toxicity: false },
        { name: "Tolerability", is_toxicity: false },
    ],
    dose_levels: [1, 2, 3, 4, 5],
    per_dose_counts: [30, 30, 30, 30, 30],
    n_total: 150,
};

const DOSES = [1, 2, 3, 4, 5];
const NO_TOX = [0.962, 0.942, 0.894, 0.768, 0.467];
const EFF = [0.022, 0.119, 0.343, 0.568, 0.681];
const TOL = [0.147, 0.206, 0.28, 0.368, 0.466];

function um(j: number): number {
    return (NO_TOX[j] + EFF[j] + TOL[j]) / 3;
}

function uwm(j: number, w: number[]): number {
    return w[0] * NO_TOX[j] + w[1] * EFF[j] + w[2] * TOL[j];
}

export function mockReport(weights: number[]): AnalysisReport {
    const total = weights.reduce((a, b) => a + b, 0);
    const w = weights.map((v) => v / total);
    const umValues = DOSES.map((_, j) => um(j));
    const uwmValues = DOSES.map((_, j) => uwm(j, w));
    const best = uwmValues.indexOf(Math.max(...uwmValues));
    return {
        dose_levels: DOSES,
        endpoints: [
            {
                name: "Toxicity",
                is_toxicity: true,
                model: "empirical",
                converged: true,
                fallback_used: false,
                params: {},
                marginals: NO_TOX,
                raw_event_rates: NO_TOX.map((v) => 1 - v),
                empirical_rates: NO_TOX,
                event_probs: NO_TOX.map((v) => 1 - v),
            },
            {
                name: "Efficacy",
                is_toxicity: false,
                model: "empirical",
                converged: true,
                fallback_used: false,
                params: {},
                marginals: EFF,
                raw_event_rates: EFF,
                empirical_rates: EFF,
            },
            {
                name: "Tolerability",
                is_toxicity: false,
                model: "empirical",
                converged: true,
                fallback_used: false,
                params: {},
                marginals: TOL,
                raw_event_rates: TOL,
                empirical_rates: TOL,
            },
        ],
        utility: {
            marginals: DOSES.map((_, j) => [NO_TOX[j], EFF[j], TOL[j]]),
            um: umValues,
            uwm: uwmValues,
            weights: w,
            metric: "uwm",
            ranking: [...DOSES].sort((a, b) => uwmValues[b - 1] - uwmValues[a - 1]),
            obd: DOSES[best],
            tie: false,
        },
        plot: {
            endpoints: [
                { name: "Toxicity", points: { doses: DOSES, probs: NO_TOX }, curve: null },
                { name: "Efficacy", points: { doses: DOSES, probs: EFF }, curve: null },
                { name: "Tolerability", points: { doses: DOSES, probs: TOL }, curve: null },
            ],
            um_line: { doses: DOSES, values: umValues },
            uwm_line: { doses: DOSES, values: uwmValues },
        },
        bootstrap: null,
    };
}

export function jsonResponse(body: unknown, status = 200): Response {
    return new Response(JSON.stringify(body), {
        status,
        headers: { "content-type": "application/json" },
    });
}
