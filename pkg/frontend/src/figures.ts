/**
 * The three figure kinds rendered from harness output files.
 *
 * Overlay parameters (means, sds, fitted slopes, the point estimate) are read
 * from the metadata / slope files and stamped into the figure annotation
 * verbatim via String(value); nothing statistical is recomputed here.
 */

import { SchemaError, Table, numericColumn, readCsv, readJson, stringColumn } from "./csv.js";
import { DEFAULT_FRAME, Frame, SvgBuilder, extent, plotScales, polylinePath } from "./svg.js";

export interface FigureRequest {
  kind: "histogram" | "mse_loglog" | "sensitivity_band";
  input: string;
  metadata?: string;
  slopes?: string;
  output?: string;
  title?: string;
  frame?: Frame;
}

export function renderFigure(request: FigureRequest): string {
  switch (request.kind) {
    case "histogram":
      return renderHistogram(request);
    case "mse_loglog":
      return renderMseLogLog(request);
    case "sensitivity_band":
      return renderSensitivityBand(request);
    default:
      throw new SchemaError(`unknown figure kind '${(request as FigureRequest).kind}'`);
  }
}

const FULL_COLOR = "#c0392b"; // red: interference-aware overlay
const NAIVE_COLOR = "#2e6db4"; // blue: no-interference overlay
const BAR_COLOR = "#9aa7b3";

function gaussianCurve(
  mean: number,
  sd: number,
  totalMass: number,
  xs: number[],
): Array<[number, number]> {
  return xs.map((x) => {
    const z = (x - mean) / sd;
    const density = Math.exp(-0.5 * z * z) / (sd * Math.sqrt(2 * Math.PI));
    return [x, density * totalMass];
  });
}

function linspace(lo: number, hi: number, count: number): number[] {
  const out: number[] = [];
  for (let i = 0; i < count; i++) out.push(lo + ((hi - lo) * i) / (count - 1));
  return out;
}

export function renderHistogram(request: FigureRequest): string {
  const table = readCsv(request.input);
  const left = numericColumn(table, "bin_left");
  const right = numericColumn(table, "bin_right");
  const count = numericColumn(table, "count");
  if (!request.metadata) {
    throw new SchemaError("histogram figures need the overlay metadata JSON");
  }
  const meta = readJson(request.metadata);
  const overlay = meta.overlay ?? null;
  const replicates = Number(meta.replicates ?? count.reduce((a, b) => a + b, 0));

  const frame = request.frame ?? DEFAULT_FRAME;
  const binWidth = right[0] - left[0];
  const mass = replicates * binWidth;
  const xDomain = extent([left[0], right[right.length - 1]], 0.08);
  let yMax = Math.max(...count);
  let curves: Array<{ color: string; points: Array<[number, number]>; label: string }> = [];
  if (overlay) {
    const xs = linspace(xDomain[0], xDomain[1], 160);
    const full = gaussianCurve(Number(overlay.mean), Number(overlay.sd), mass, xs);
    curves.push({ color: FULL_COLOR, points: full, label: "interference-aware" });
    if (overlay.sd_naive !== undefined && overlay.sd_naive !== null) {
      const naive = gaussianCurve(Number(overlay.mean), Number(overlay.sd_naive), mass, xs);
      curves.push({ color: NAIVE_COLOR, points: naive, label: "naive" });
    }
    yMax = Math.max(yMax, ...curves.flatMap((c) => c.points.map((p) => p[1])));
  }

  const { x, y } = plotScales(frame, xDomain, [0, yMax * 1.08]);
  const svg = new SvgBuilder(frame);
  for (let i = 0; i < count.length; i++) {
    const px = x.apply(left[i]);
    const pw = x.apply(right[i]) - px;
    const py = y.apply(count[i]);
    svg.rect(px, py, pw, y.apply(0) - py, BAR_COLOR, 0.85);
  }
  for (const curve of curves) {
    svg.path(polylinePath(curve.points.map(([cx, cy]) => [x.apply(cx), y.apply(cy)])), curve.color, 2.2);
  }
  svg.axes(x, y, `estimate (${meta.estimator ?? "?"})`, "replicates per bin");

  const annotationParts: string[] = [];
  if (overlay) {
    annotationParts.push(`overlay mean=${String(overlay.mean)}`, `sd=${String(overlay.sd)}`);
    if (overlay.sd_naive !== undefined && overlay.sd_naive !== null) {
      annotationParts.push(`naive sd=${String(overlay.sd_naive)}`);
    }
  } else {
    annotationParts.push("no theory overlay in metadata");
  }
  svg.text(frame.margin.left + 6, frame.margin.top + 14, annotationParts.join("  "), {
    size: 11,
    className: "annotation",
  });
  return svg.render(request.title ?? `Estimator histogram (${meta.estimator ?? request.input})`);
}

export function renderMseLogLog(request: FigureRequest): string {
  const table = readCsv(request.input);
  const ns = numericColumn(table, "n");
  const mse = numericColumn(table, "mse");
  const names = stringColumn(table, "estimator");
  if (!request.slopes) {
    throw new SchemaError("mse_loglog figures need the fitted-slope CSV");
  }
  const slopeTable = readCsv(request.slopes);
  const slopeNames = stringColumn(slopeTable, "estimator");
  const slopeValues = stringColumn(slopeTable, "slope"); // verbatim strings
  const intercepts = numericColumn(slopeTable, "intercept");

  const logx = ns.map(Math.log);
  const logy = mse.map((v) => {
    if (v <= 0) throw new SchemaError("mse values must be positive for a log-log figure");
    return Math.log(v);
  });
  const frame = request.frame ?? DEFAULT_FRAME;
  const { x, y } = plotScales(frame, extent(logx), extent(logy));
  const svg = new SvgBuilder(frame);
  svg.axes(x, y, "log n", "log MSE");

  const palette = ["#c0392b", "#2e6db4", "#1e8449", "#8e44ad", "#b7950b"];
  const unique = [...new Set(names)];
  unique.forEach((name, idx) => {
    const color = palette[idx % palette.length];
    const pts: Array<[number, number]> = [];
    for (let i = 0; i < names.length; i++) {
      if (names[i] === name) pts.push([logx[i], logy[i]]);
    }
    pts.sort((a, b) => a[0] - b[0]);
    for (const [px, py] of pts) svg.circle(x.apply(px), y.apply(py), 3.4, color);
    svg.path(polylinePath(pts.map(([px, py]) => [x.apply(px), y.apply(py)])), color, 1.2, "4 3");

    const k = slopeNames.indexOf(name);
    if (k < 0) {
      throw new SchemaError(`missing column 'slope' entry for estimator '${name}'`);
    }
    const slope = Number(slopeValues[k]);
    const fit = pts.map(([px]) => [px, intercepts[k] + slope * px] as [number, number]);
    svg.path(polylinePath(fit.map(([px, py]) => [x.apply(px), y.apply(py)])), color, 2.0);
    svg.text(
      frame.margin.left + 6,
      frame.margin.top + 14 + 15 * idx,
      `${name}: fitted slope=${slopeValues[k]}`,
      { size: 11, fill: color, className: "annotation" },
    );
  });
  return svg.render(request.title ?? "MSE vs sample size (log-log)");
}

export function renderSensitivityBand(request: FigureRequest): string {
  const table = readCsv(request.input);
  const alpha = numericColumn(table, "alpha");
  const lo = numericColumn(table, "lo");
  const hi = numericColumn(table, "hi");
  if (!request.metadata) {
    throw new SchemaError("sensitivity_band figures need the metadata JSON");
  }
  const meta = readJson(request.metadata);
  const tauHat = meta.input?.tau_hat;
  if (tauHat === undefined) {
    throw new SchemaError("metadata lacks input.tau_hat for the reference line");
  }

  const order = alpha.map((_, i) => i).sort((a, b) => alpha[a] - alpha[b]);
  const frame = request.frame ?? DEFAULT_FRAME;
  const { x, y } = plotScales(frame, extent(alpha), extent([...lo, ...hi, Number(tauHat)]));
  const svg = new SvgBuilder(frame);
  svg.axes(x, y, "significance level alpha", "direct-effect bound");
  svg.path(
    polylinePath(order.map((i) => [x.apply(alpha[i]), y.apply(lo[i])])),
    FULL_COLOR,
    2.0,
  );
  svg.path(
    polylinePath(order.map((i) => [x.apply(alpha[i]), y.apply(hi[i])])),
    FULL_COLOR,
    2.0,
  );
  const py = y.apply(Number(tauHat));
  svg.line(frame.margin.left, py, frame.width - frame.margin.right, py, "#222", 1.4, "6 4");
  svg.text(frame.margin.left + 6, frame.margin.top + 14, `tau_hat=${String(tauHat)}`, {
    size: 11,
    className: "annotation",
  });
  return svg.render(request.title ?? "Interval endpoints by significance level");
}
