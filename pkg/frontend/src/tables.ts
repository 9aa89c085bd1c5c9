// Row builders for the utility and bootstrap tables.  Values are
// formatted here, straight from the report, so the rendered numbers are
// exactly the service's numbers at display precision.

import type { AnalysisReport } from "./types.js";

export function formatProb(value: number): string {
    return value.toFixed(3);
}

export function formatPct(value: number): string {
    return `${value.toFixed(1)}%`;
}

export interface UtilityRow {
    dose: number;
    cells: { label: string; value: string }[];
    um: string;
    uwm: string;
    isObd: boolean;
}

export function utilityRows(report: AnalysisReport): UtilityRow[] {
    return report.dose_levels.map((dose, j) => {
        const cells: { label: string; value: string }[] = [];
        for (const ep of report.endpoints) {
            if (ep.is_toxicity && ep.event_probs) {
                cells.push({
                    label: `P(${ep.name}=1)`,
                    value: formatProb(ep.event_probs[j]),
                });
                cells.push({
                    label: `1-P(${ep.name}=1)`,
                    value: formatProb(ep.marginals[j]),
                });
            } else {
                cells.push({
                    label: `P(${ep.name}=1)`,
                    value: formatProb(ep.marginals[j]),
                });
            }
        }
        return {
            dose,
            cells,
            um: formatProb(report.utility.um[j]),
            uwm: formatProb(report.utility.uwm[j]),
            isObd: dose === report.utility.obd,
        };
    });
}

export interface BootstrapRow {
    dose: number;
    um: string;
    umCi: string;
    pctObdUm: string;
    uwm: string;
    uwmCi: string;
    pctObdUwm: string;
}

export function bootstrapRows(report: AnalysisReport): BootstrapRow[] {
    const boot = report.bootstrap;
    if (!boot) {
        return [];
    }
    return report.dose_levels.map((dose, j) => ({
        dose,
        um: formatProb(report.utility.um[j]),
        umCi: `(${formatProb(boot.um_ci[j][0])}-${formatProb(boot.um_ci[j][1])})`,
        pctObdUm: formatPct(boot.pct_obd_um[j]),
        uwm: formatProb(report.utility.uwm[j]),
        uwmCi: `(${formatProb(boot.uwm_ci[j][0])}-${formatProb(boot.uwm_ci[j][1])})`,
        pctObdUwm: formatPct(boot.pct_obd_uwm[j]),
    }));
}

export function obdSummary(report: AnalysisReport): string {
    const metric = report.utility.metric.toUpperCase();
    const tie = report.utility.tie ? " (tie broken to the lowest dose)" : "";
    return `Optimal dose by ${metric}: ${report.utility.obd}${tie}`;
}
