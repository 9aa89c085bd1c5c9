// Debounced reactive recompute with stale-response discarding.
//
// Slider and dropdown changes funnel through scheduleRecompute; one
// analyze request fires after the debounce window.  Responses carry a
// sequence number and anything but the latest is dropped, so a slow
// early response can never overwrite a newer one.  Bootstrap runs only
// through the explicit runBootstrap action.

import type { ApiClient } from "./api.js";
import type { SessionState } from "./state.js";
import { buildAnalyzeRequest } from "./state.js";
import type { AnalysisReport } from "./types.js";

export interface ControllerCallbacks {
    onReport: (report: AnalysisReport) => void;
    onError: (error: unknown) => void;
    onBusy?: (busy: boolean) => void;
}

export const DEFAULT_DEBOUNCE_MS = 250;

export class AnalysisController {
    private readonly api: ApiClient;
    private readonly callbacks: ControllerCallbacks;
    private readonly debounceMs: number;
    private timer: ReturnType<typeof setTimeout> | null = null;
    private sequence = 0;
    requestCount = 0;

    constructor(api: ApiClient, callbacks: ControllerCallbacks,
                debounceMs = DEFAULT_DEBOUNCE_MS) {
        this.api = api;
        this.callbacks = callbacks;
        this.debounceMs = debounceMs;
    }

    /** Queue a recompute; rapid calls collapse into one request. */
    scheduleRecompute(state: SessionState): void {
        if (this.timer !== null) {
            clearTimeout(this.timer);
        }
        this.timer = setTimeout(() => {
            this.timer = null;
            void this.dispatch(state, false);
        }, this.debounceMs);
    }

    /** Run immediately with bootstrap enabled (explicit user action). */
    runBootstrap(state: SessionState): Promise<void> {
        if (this.timer !== null) {
            clearTimeout(this.timer);
            this.timer = null;
        }
        return this.dispatch(state, true);
    }

    private async dispatch(state: SessionState, bootstrap: boolean): Promise<void> {
        const seq = ++this.sequence;
        this.requestCount += 1;
        this.callbacks.onBusy?.(true);
        try {
            const report = await this.api.analyze(
                buildAnalyzeRequest(state, { bootstrap }),
            );
            if (seq === this.sequence) {
                this.callbacks.onReport(report);
            }
        } catch (error) {
            if (seq === this.sequence) {
                this.callbacks.onError(error);
            }
        } finally {
            if (seq === this.sequence) {
                this.callbacks.onBusy?.(false);
            }
        }
    }
}
