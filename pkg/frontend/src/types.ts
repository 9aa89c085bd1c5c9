// Shapes of the JSON service's request and response bodies.

export interface EndpointInfo {
    name: string;
    is_toxicity: boolean;
}

export interface UploadResponse {
    dataset_id: string;
    endpoints: EndpointInfo[];
    dose_levels: number[];
    per_dose_counts: number[];
    n_total: number;
}

export interface PointSeries {
    doses: number[];
    probs: number[];
}

export interface LineSeries {
    doses: number[];
    values: number[];
}

export interface RibbonSeries {
    doses: number[];
    lower: number[];
    upper: number[];
}

export interface EndpointPlot {
    name: string;
    points: PointSeries;
    curve: PointSeries | null;
}

export interface PlotBlock {
    endpoints: EndpointPlot[];
    um_line: LineSeries;
    uwm_line: LineSeries;
    um_ribbon?: RibbonSeries;
    uwm_ribbon?: RibbonSeries;
}

export interface EndpointReport {
    name: string;
    is_toxicity: boolean;
    model: string;
    converged: boolean;
    fallback_used: boolean;
    params: Record<string, number>;
    marginals: number[];
    raw_event_rates: number[];
    empirical_rates: number[];
    event_probs?: number[];
}

export interface UtilityBlock {
    marginals: number[][];
    um: number[];
    uwm: number[];
    weights: number[];
    metric: string;
    ranking: number[];
    obd: number;
    tie: boolean;
}

export interface BootstrapBlock {
    dose_levels: number[];
    um_ci: number[][];
    uwm_ci: number[][];
    pct_obd_um: number[];
    pct_obd_uwm: number[];
    fallback_count: number;
    excluded_count: number;
    n_replicates: number;
    n_included: number;
}

export interface AnalysisReport {
    dose_levels: number[];
    endpoints: EndpointReport[];
    utility: UtilityBlock;
    plot: PlotBlock;
    bootstrap: BootstrapBlock | null;
}

export interface BootstrapRequest {
    replicates: number;
    alpha: number;
    seed: number;
}

export interface AnalyzeRequest {
    dataset_id: string;
    models: Record<string, string>;
    weights: Record<string, number>;
    metric: "um" | "uwm";
    bootstrap?: BootstrapRequest;
    curve_grid_points?: number;
}
