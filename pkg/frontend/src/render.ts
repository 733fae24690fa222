/**
 * Server-side SVG rendering of the figure kinds with echarts, embedding the
 * data file's config digest in the SVG metadata so every figure is traceable
 * to the run that produced it.
 */

import { createRequire } from "node:module";

// echarts ships CommonJS-style type declarations (`export =`) alongside its
// ESM entry point; loading the CJS bundle keeps runtime and types aligned.
const requireModule = createRequire(import.meta.url);
const echarts = requireModule("echarts") as typeof import("echarts");

import type { FigureKind } from "./schemas.js";

type Row = Record<string, number | string>;

export interface RenderOptions {
  title?: string;
  width?: number;
  height?: number;
}

function scatterLogLog(
  rows: Row[],
  xKey: string,
  yKey: string,
  xName: string,
  yName: string,
) {
  return {
    xAxis: { type: "log", name: xName },
    yAxis: { type: "log", name: yName },
    series: [
      {
        type: "line",
        symbol: "circle",
        symbolSize: 8,
        data: rows.map((r) => [r[xKey], r[yKey]]),
      },
    ],
  };
}

function buildOption(kind: FigureKind, rows: Row[]): Record<string, unknown> {
  switch (kind) {
    case "mode_spectrum":
      return {
        xAxis: { type: "value", name: "collective shift" },
        yAxis: { type: "log", name: "decay rate" },
        series: [
          {
            type: "scatter",
            symbolSize: 5,
            data: rows
              .filter((r) => (r.rate as number) > 0)
              .map((r) => [r.shift, r.rate]),
          },
        ],
      };
    case "size_scaling":
      return scatterLogLog(rows, "n_perp", "ratio", "atoms per side", "rate ratio");
    case "trajectory":
      return {
        xAxis: { type: "value", name: "time" },
        yAxis: { type: "value", name: "population", min: 0, max: 1 },
        legend: { data: ["array 1", "array 2", "excited"] },
        series: [
          { name: "array 1", type: "line", showSymbol: false, data: rows.map((r) => [r.time, r.pop_s1]) },
          { name: "array 2", type: "line", showSymbol: false, data: rows.map((r) => [r.time, r.pop_s2]) },
          { name: "excited", type: "line", showSymbol: false, data: rows.map((r) => [r.time, r.pop_e]) },
        ],
      };
    case "fidelity_sweep":
      return {
        xAxis: { type: "log", name: "rate ratio" },
        yAxis: { type: "value", name: "transfer fidelity" },
        legend: { data: ["simulated", "closed form"] },
        series: [
          {
            name: "simulated",
            type: "scatter",
            symbolSize: 8,
            data: rows.map((r) => [r.ratio, r.fidelity_sim]),
          },
          {
            name: "closed form",
            type: "line",
            showSymbol: false,
            data: rows.map((r) => [r.ratio, r.fidelity_formula]),
          },
        ],
      };
    case "reflectivity": {
      const schemes = [...new Set(rows.map((r) => String(r.scheme)))];
      return {
        xAxis: { type: "value", name: "probe detuning" },
        yAxis: { type: "value", name: "reflectivity" },
        legend: { data: schemes.flatMap((s) => [s, `${s} (analytic)`]) },
        series: schemes.flatMap((s) => {
          const sub = rows.filter((r) => r.scheme === s);
          return [
            {
              name: s,
              type: "line",
              showSymbol: false,
              data: sub.map((r) => [r.delta, r.reflectivity]),
            },
            {
              name: `${s} (analytic)`,
              type: "line",
              showSymbol: false,
              lineStyle: { type: "dashed" },
              data: sub.map((r) => [r.delta, r.analytic]),
            },
          ];
        }),
      };
    }
    case "defects":
      return {
        xAxis: { type: "value", name: "vacancy fraction" },
        yAxis: { type: "log", name: "dark-mode rate" },
        legend: { data: ["measured", "predicted"] },
        series: [
          {
            name: "measured",
            type: "scatter",
            symbolSize: 8,
            data: rows.map((r) => [r.probability, r.mean_dark]),
          },
          {
            name: "predicted",
            type: "line",
            showSymbol: false,
            data: rows.map((r) => [r.probability, r.predicted_dark]),
          },
        ],
      };
    case "nonmarkov_scan":
      return {
        xAxis: { type: "log", name: "retardation" },
        yAxis: { type: "value", name: "transfer fidelity" },
        series: [
          {
            type: "line",
            symbol: "circle",
            symbolSize: 8,
            data: rows.map((r) => [r.gamma_tau, r.fidelity]),
          },
        ],
      };
    case "field_map": {
      const xs = [...new Set(rows.map((r) => r.x as number))].sort((a, b) => a - b);
      const zs = [...new Set(rows.map((r) => r.z as number))].sort((a, b) => a - b);
      const xi = new Map(xs.map((v, i) => [v, i]));
      const zi = new Map(zs.map((v, i) => [v, i]));
      const amps = rows.map((r) => r.abs_psi as number);
      return {
        xAxis: { type: "category", name: "z", data: zs.map((v) => v.toFixed(2)) },
        yAxis: { type: "category", name: "x", data: xs.map((v) => v.toFixed(2)) },
        visualMap: {
          min: 0,
          max: Math.max(...amps),
          calculable: true,
          orient: "vertical",
          right: 0,
        },
        series: [
          {
            type: "heatmap",
            data: rows.map((r) => [
              zi.get(r.z as number),
              xi.get(r.x as number),
              r.abs_psi,
            ]),
          },
        ],
      };
    }
  }
}

/** Insert a metadata element right after the opening <svg ...> tag. */
export function embedMetadata(svg: string, digest: string): string {
  const end = svg.indexOf(">");
  if (end < 0) {
    throw new Error("renderer did not produce an SVG document");
  }
  const meta = `<metadata id="config-digest">${digest}</metadata>`;
  return svg.slice(0, end + 1) + meta + svg.slice(end + 1);
}

export function renderFigure(
  kind: FigureKind,
  rows: Row[],
  digest: string,
  options: RenderOptions = {},
): string {
  const chart = echarts.init(null, undefined, {
    renderer: "svg",
    ssr: true,
    width: options.width ?? 800,
    height: options.height ?? 520,
  });
  const option = buildOption(kind, rows);
  if (options.title) {
    option.title = { text: options.title, left: "center" };
  }
  option.animation = false;
  chart.setOption(option);
  const svg = chart.renderToSVGString();
  chart.dispose();
  return embedMetadata(svg, digest);
}
