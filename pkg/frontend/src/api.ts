// Thin typed client for the JSON service; the fetch implementation is
// injectable so tests can run against a mock.

import type { AnalysisReport, AnalyzeRequest, UploadResponse } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
    readonly code: string;
    readonly status: number;

    constructor(code: string, message: string, status: number) {
        super(message);
        this.code = code;
        this.status = status;
    }
}

async function asJson<T>(response: Response): Promise<T> {
    if (!response.ok) {
        let code = `http/${response.status}`;
        let message = response.statusText;
        try {
            const body = await response.json();
            if (body && body.error) {
                code = body.error.code ?? code;
                message = body.error.message ?? message;
            }
        } catch {
            // non-JSON error body; keep the HTTP status text
        }
        throw new ApiError(code, message, response.status);
    }
    return (await response.json()) as T;
}

export class ApiClient {
    private readonly baseUrl: string;
    private readonly fetchImpl: FetchLike;

    constructor(baseUrl = "", fetchImpl: FetchLike = (...args) => fetch(...args)) {
        this.baseUrl = baseUrl.replace(/\/$/, "");
        this.fetchImpl = fetchImpl;
    }

    async health(): Promise<{ status: string }> {
        return asJson(await this.fetchImpl(`${this.baseUrl}/health`));
    }

    async uploadDataset(csvText: string): Promise<UploadResponse> {
        const response = await this.fetchImpl(`${this.baseUrl}/datasets`, {
            method: "POST",
            headers: { "content-type": "text/csv" },
            body: csvText,
        });
        return asJson<UploadResponse>(response);
    }

    async analyze(request: AnalyzeRequest): Promise<AnalysisReport> {
        const response = await this.fetchImpl(`${this.baseUrl}/analyze`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(request),
        });
        return asJson<AnalysisReport>(response);
    }
}
