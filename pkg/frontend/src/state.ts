// Session state: one weight slider and one model choice per endpoint,
// metric toggle, and bootstrap settings.  All statistics come from the
// service; this module only shapes requests.

import type { AnalyzeRequest, UploadResponse } from "./types.js";

export const WEIGHT_MIN = 0;
export const WEIGHT_MAX = 5;
export const WEIGHT_STEP = 0.1;
export const DEFAULT_WEIGHT = 1;

export const MODEL_CHOICES = [
    "empirical",
    "logit_linear",
    "logit_quadratic",
    "emax",
    "exponential",
] as const;

export type ModelChoice = (typeof MODEL_CHOICES)[number];

export interface EndpointSettings {
    name: string;
    isToxicity: boolean;
    weight: number;
    model: ModelChoice;
    monotone: boolean;
}

export interface SessionState {
    datasetId: string | null;
    doseLevels: number[];
    endpoints: EndpointSettings[];
    metric: "um" | "uwm";
    bootstrapReplicates: number;
    bootstrapSeed: number;
}

export function initialState(): SessionState {
    return {
        datasetId: null,
        doseLevels: [],
        endpoints: [],
        metric: "uwm",
        bootstrapReplicates: 1000,
        bootstrapSeed: 0,
    };
}

/** Clamp to [0, 5] and snap onto the 0.1 slider grid. */
export function snapWeight(value: number): number {
    const clamped = Math.min(WEIGHT_MAX, Math.max(WEIGHT_MIN, value));
    return Math.round(clamped * 10) / 10;
}

export function configureFromUpload(state: SessionState, upload: UploadResponse): SessionState {
    return {
        ...state,
        datasetId: upload.dataset_id,
        doseLevels: [...upload.dose_levels],
        endpoints: upload.endpoints.map((ep) => ({
            name: ep.name,
            isToxicity: ep.is_toxicity,
            weight: DEFAULT_WEIGHT,
            model: "empirical",
            monotone: false,
        })),
    };
}

function updateEndpoint(
    state: SessionState,
    name: string,
    change: Partial<EndpointSettings>,
): SessionState {
    return {
        ...state,
        endpoints: state.endpoints.map((ep) =>
            ep.name === name ? { ...ep, ...change } : ep,
        ),
    };
}

export function setWeight(state: SessionState, name: string, value: number): SessionState {
    return updateEndpoint(state, name, { weight: snapWeight(value) });
}

export function setModel(state: SessionState, name: string, model: ModelChoice): SessionState {
    return updateEndpoint(state, name, { model });
}

export function setMonotone(state: SessionState, name: string, monotone: boolean): SessionState {
    const target = state.endpoints.find((ep) => ep.name === name);
    if (!target || target.isToxicity) {
        return state; // toxicity is always constrained server-side
    }
    return updateEndpoint(state, name, { monotone });
}

/** The monotone toggle only applies to logit models on non-toxicity endpoints. */
export function monotoneToggleVisible(ep: EndpointSettings): boolean {
    return !ep.isToxicity && (ep.model === "logit_linear" || ep.model === "logit_quadratic");
}

export function buildAnalyzeRequest(
    state: SessionState,
    options: { bootstrap: boolean } = { bootstrap: false },
): AnalyzeRequest {
    if (!state.datasetId) {
        throw new Error("no dataset uploaded");
    }
    const models: Record<string, string> = {};
    const weights: Record<string, number> = {};
    for (const ep of state.endpoints) {
        const mono = monotoneToggleVisible(ep) && ep.monotone;
        models[ep.name] = mono ? `${ep.model}:mono` : ep.model;
        weights[ep.name] = ep.weight;
    }
    const request: AnalyzeRequest = {
        dataset_id: state.datasetId,
        models,
        weights,
        metric: state.metric,
    };
    if (options.bootstrap) {
        request.bootstrap = {
            replicates: state.bootstrapReplicates,
            alpha: 0.05,
            seed: state.bootstrapSeed,
        };
    }
    return request;
}
