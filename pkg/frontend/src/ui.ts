// DOM wiring: controls on the left, plots and tables on the right.

import { ApiClient } from "./api.js";
import {
    curvePath,
    defaultViewport,
    linePath,
    pointMarkers,
    ribbonPath,
} from "./charts.js";
import { AnalysisController } from "./controller.js";
import {
    MODEL_CHOICES,
    ModelChoice,
    SessionState,
    WEIGHT_MAX,
    WEIGHT_MIN,
    WEIGHT_STEP,
    buildAnalyzeRequest,
    configureFromUpload,
    initialState,
    monotoneToggleVisible,
    setModel,
    setMonotone,
    setWeight,
} from "./state.js";
import { bootstrapRows, obdSummary, utilityRows } from "./tables.js";
import type { AnalysisReport } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const SERIES_COLORS = ["#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"];

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    attrs: Record<string, string> = {},
    text = "",
): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    for (const [key, value] of Object.entries(attrs)) {
        node.setAttribute(key, value);
    }
    if (text) {
        node.textContent = text;
    }
    return node;
}

export class Dashboard {
    private state: SessionState = initialState();
    private readonly controller: AnalysisController;

    constructor(private readonly root: HTMLElement, api: ApiClient) {
        this.controller = new AnalysisController(api, {
            onReport: (report) => this.renderReport(report),
            onError: (error) => this.showError(error),
            onBusy: (busy) => this.setBusy(busy),
        });
        this.renderSkeleton();
        this.bindUpload(api);
    }

    private renderSkeleton(): void {
        this.root.innerHTML = `
          <div class="layout">
            <aside class="panel inputs">
              <h2>Inputs</h2>
              <label class="upload">Trial CSV
                <input type="file" id="csv-file" accept=".csv,text/csv" />
              </label>
              <div id="dataset-info" class="muted"></div>
              <div id="endpoint-controls"></div>
              <div id="metric-control" class="hidden">
                <h3>Selection metric</h3>
                <label><input type="radio" name="metric" value="uwm" checked /> UWM</label>
                <label><input type="radio" name="metric" value="um" /> UM</label>
              </div>
              <div id="bootstrap-control" class="hidden">
                <h3>Bootstrap</h3>
                <label>Replicates <input type="number" id="boot-b" value="1000" min="1" /></label>
                <label>Seed <input type="number" id="boot-seed" value="0" min="0" /></label>
                <button id="boot-run">Run bootstrap</button>
              </div>
              <div id="error-box" class="error hidden"></div>
            </aside>
            <main class="panel outputs">
              <h2>Results <span id="busy" class="muted hidden">computing...</span></h2>
              <div id="obd-banner" class="banner hidden"></div>
              <div id="plots"></div>
              <div id="utility-table"></div>
              <div id="bootstrap-table"></div>
            </main>
          </div>`;
    }

    private query<T extends HTMLElement>(selector: string): T {
        const node = this.root.querySelector(selector);
        if (!node) {
            throw new Error(`missing element ${selector}`);
        }
        return node as T;
    }

    private bindUpload(api: ApiClient): void {
        const input = this.query<HTMLInputElement>("#csv-file");
        input.addEventListener("change", async () => {
            const file = input.files?.[0];
            if (!file) {
                return;
            }
            try {
                const upload = await api.uploadDataset(await file.text());
                this.state = configureFromUpload(this.state, upload);
                this.query("#dataset-info").textContent =
                    `${upload.n_total} patients, doses ${upload.dose_levels.join(", ")}`;
                this.renderControls();
                this.query("#metric-control").classList.remove("hidden");
                this.query("#bootstrap-control").classList.remove("hidden");
                this.hideError();
                this.recompute();
            } catch (error) {
                this.showError(error);
            }
        });

        this.root.querySelectorAll<HTMLInputElement>("input[name=metric]").forEach((radio) => {
            radio.addEventListener("change", () => {
                this.state = { ...this.state, metric: radio.value as "um" | "uwm" };
                this.recompute();
            });
        });
        this.query<HTMLButtonElement>("#boot-run").addEventListener("click", () => {
            this.state = {
                ...this.state,
                bootstrapReplicates:
                    Number(this.query<HTMLInputElement>("#boot-b").value) || 1000,
                bootstrapSeed:
                    Number(this.query<HTMLInputElement>("#boot-seed").value) || 0,
            };
            void this.controller.runBootstrap(this.state);
        });
    }

    private renderControls(): void {
        const host = this.query("#endpoint-controls");
        host.innerHTML = "";
        for (const ep of this.state.endpoints) {
            const block = el("div", { class: "endpoint" });
            block.appendChild(el("h3", {}, ep.name));

            const weightLabel = el("label", {}, `Weight `);
            const weightValue = el("span", { class: "weight-value" }, ep.weight.toFixed(1));
            const slider = el("input", {
                type: "range",
                min: String(WEIGHT_MIN),
                max: String(WEIGHT_MAX),
                step: String(WEIGHT_STEP),
                value: String(ep.weight),
                "data-endpoint": ep.name,
            });
            slider.addEventListener("input", () => {
                this.state = setWeight(this.state, ep.name, Number(slider.value));
                weightValue.textContent = Number(slider.value).toFixed(1);
                this.recompute();
            });
            weightLabel.appendChild(slider);
            weightLabel.appendChild(weightValue);
            block.appendChild(weightLabel);

            const modelLabel = el("label", {}, "Model ");
            const select = el("select", { "data-endpoint": ep.name });
            for (const choice of MODEL_CHOICES) {
                const option = el("option", { value: choice }, choice);
                if (choice === ep.model) {
                    option.setAttribute("selected", "selected");
                }
                select.appendChild(option);
            }
            modelLabel.appendChild(select);
            block.appendChild(modelLabel);

            const monoLabel = el("label", { class: "mono" }, " monotone ");
            const mono = el("input", { type: "checkbox" });
            mono.addEventListener("change", () => {
                this.state = setMonotone(this.state, ep.name, mono.checked);
                this.recompute();
            });
            monoLabel.prepend(mono);
            block.appendChild(monoLabel);

            const syncMonoVisibility = () => {
                const settings = this.state.endpoints.find((e) => e.name === ep.name);
                monoLabel.classList.toggle(
                    "hidden",
                    !settings || !monotoneToggleVisible(settings),
                );
            };
            select.addEventListener("change", () => {
                this.state = setModel(this.state, ep.name, select.value as ModelChoice);
                syncMonoVisibility();
                this.recompute();
            });
            syncMonoVisibility();
            host.appendChild(block);
        }
    }

    private recompute(): void {
        if (!this.state.datasetId) {
            return;
        }
        // throws early if the state cannot form a request
        buildAnalyzeRequest(this.state);
        this.controller.scheduleRecompute(this.state);
    }

    private setBusy(busy: boolean): void {
        this.query("#busy").classList.toggle("hidden", !busy);
    }

    private showError(error: unknown): void {
        const box = this.query("#error-box");
        box.textContent = error instanceof Error ? error.message : String(error);
        box.classList.remove("hidden");
    }

    private hideError(): void {
        this.query("#error-box").classList.add("hidden");
    }

    private renderReport(report: AnalysisReport): void {
        this.hideError();

        const banner = this.query("#obd-banner");
        banner.textContent = obdSummary(report);
        banner.classList.remove("hidden");

        this.renderPlot(report);
        this.renderUtilityTable(report);
        this.renderBootstrapTable(report);
    }

    private renderPlot(report: AnalysisReport): void {
        const host = this.query("#plots");
        host.innerHTML = "";
        const vp = defaultViewport(report.dose_levels);
        const svg = document.createElementNS(SVG_NS, "svg");
        svg.setAttribute("viewBox", `0 0 ${vp.width} ${vp.height}`);
        svg.setAttribute("class", "chart");

        const addPath = (d: string, stroke: string, opts: Record<string, string> = {}) => {
            const path = document.createElementNS(SVG_NS, "path");
            path.setAttribute("d", d);
            path.setAttribute("fill", opts.fill ?? "none");
            path.setAttribute("stroke", stroke);
            for (const [key, value] of Object.entries(opts)) {
                path.setAttribute(key, value);
            }
            svg.appendChild(path);
        };

        if (report.plot.um_ribbon) {
            addPath(ribbonPath(report.plot.um_ribbon, vp), "none",
                    { fill: "rgba(120,120,120,0.18)" });
        }
        if (report.plot.uwm_ribbon) {
            addPath(ribbonPath(report.plot.uwm_ribbon, vp), "none",
                    { fill: "rgba(214,39,40,0.15)" });
        }
        report.plot.endpoints.forEach((ep, index) => {
            const color = SERIES_COLORS[index % SERIES_COLORS.length];
            if (ep.curve) {
                addPath(curvePath(ep.curve, vp), color);
            }
            for (const marker of pointMarkers(ep.points, vp)) {
                const dot = document.createElementNS(SVG_NS, "circle");
                dot.setAttribute("cx", marker.x.toFixed(2));
                dot.setAttribute("cy", marker.y.toFixed(2));
                dot.setAttribute("r", "3");
                dot.setAttribute("fill", color);
                svg.appendChild(dot);
            }
        });
        addPath(linePath(report.plot.um_line, vp), "#555",
                { "stroke-dasharray": "6 3", "stroke-width": "2" });
        addPath(linePath(report.plot.uwm_line, vp), "#d62728", { "stroke-width": "2" });

        const legend = el("div", { class: "legend" });
        report.plot.endpoints.forEach((ep, index) => {
            legend.appendChild(el(
                "span",
                { style: `color:${SERIES_COLORS[index % SERIES_COLORS.length]}` },
                `● ${ep.name}`,
            ));
        });
        legend.appendChild(el("span", { style: "color:#555" }, "— UM"));
        legend.appendChild(el("span", { style: "color:#d62728" }, "— UWM"));
        host.appendChild(svg);
        host.appendChild(legend);
    }

    private renderUtilityTable(report: AnalysisReport): void {
        const rows = utilityRows(report);
        const table = el("table");
        const head = el("tr");
        head.appendChild(el("th", {}, "Dose"));
        for (const cell of rows[0].cells) {
            head.appendChild(el("th", {}, cell.label));
        }
        head.appendChild(el("th", {}, "UM"));
        head.appendChild(el("th", {}, "UWM"));
        table.appendChild(head);
        for (const row of rows) {
            const tr = el("tr", row.isObd ? { class: "obd-row" } : {});
            tr.appendChild(el("td", {}, String(row.dose)));
            for (const cell of row.cells) {
                tr.appendChild(el("td", {}, cell.value));
            }
            tr.appendChild(el("td", {}, row.um));
            tr.appendChild(el("td", {}, row.uwm));
            table.appendChild(tr);
        }
        const host = this.query("#utility-table");
        host.innerHTML = "<h3>Utility by dose</h3>";
        host.appendChild(table);
    }

    private renderBootstrapTable(report: AnalysisReport): void {
        const host = this.query("#bootstrap-table");
        const rows = bootstrapRows(report);
        if (!rows.length) {
            host.innerHTML = "";
            return;
        }
        const table = el("table");
        const head = el("tr");
        for (const label of ["Dose", "UM (95% CI)", "%OBD (UM)", "UWM (95% CI)", "%OBD (UWM)"]) {
            head.appendChild(el("th", {}, label));
        }
        table.appendChild(head);
        for (const row of rows) {
            const tr = el("tr");
            tr.appendChild(el("td", {}, String(row.dose)));
            tr.appendChild(el("td", {}, `${row.um} ${row.umCi}`));
            tr.appendChild(el("td", {}, row.pctObdUm));
            tr.appendChild(el("td", {}, `${row.uwm} ${row.uwmCi}`));
            tr.appendChild(el("td", {}, row.pctObdUwm));
            table.appendChild(tr);
        }
        host.innerHTML = "<h3>Bootstrap summary</h3>";
        host.appendChild(table);
    }
}
