// Minimal deterministic SVG line charts: no DOM, no timestamps, just
// string assembly. Enough for time-series rate and delay figures.

export interface Series {
  label: string;
  points: [number, number][];
  color: string;
  dashed?: boolean;
  step?: boolean; // piecewise-constant (capacity staircase)
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  width?: number;
  height?: number;
  yMax?: number;
}

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"];

const MARGIN = { top: 36, right: 24, bottom: 46, left: 64 };

export function niceTicks(max: number, count = 5): number[] {
  if (max <= 0) {
    return [0, 1];
  }
  const rawStep = max / count;
  const mag = 10 ** Math.floor(Math.log10(rawStep));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * mag);
  const step = candidates.find((c) => c >= rawStep) ?? candidates[candidates.length - 1];
  const ticks: number[] = [];
  for (let v = 0; v <= max + step * 1e-9; v += step) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

function escapeXml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function fmt(value: number): string {
  return Number(value.toFixed(2)).toString();
}

export function lineChart(spec: ChartSpec): string {
  const width = spec.width ?? 800;
  const height = spec.height ?? 480;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  const allPoints = spec.series.flatMap((s) => s.points);
  if (allPoints.length === 0) {
    throw new Error(`chart "${spec.title}" has no data points`);
  }
  const xMax = Math.max(...allPoints.map(([x]) => x), 1e-9);
  const yMax = spec.yMax ?? Math.max(...allPoints.map(([, y]) => y), 1e-9) * 1.05;

  const sx = (x: number) => MARGIN.left + (x / xMax) * plotW;
  const sy = (y: number) => MARGIN.top + plotH - (Math.min(y, yMax) / yMax) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="12">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${width / 2}" y="20" text-anchor="middle" font-size="15">${escapeXml(spec.title)}</text>`,
  );

  for (const tick of niceTicks(yMax)) {
    const y = sy(tick);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${width - MARGIN.right}" y2="${fmt(y)}" ` +
        `stroke="#dddddd" stroke-width="1"/>`,
      `<text x="${MARGIN.left - 6}" y="${fmt(y + 4)}" text-anchor="end">${fmt(tick)}</text>`,
    );
  }
  for (const tick of niceTicks(xMax, 8)) {
    const x = sx(tick);
    parts.push(
      `<line x1="${fmt(x)}" y1="${MARGIN.top + plotH}" x2="${fmt(x)}" y2="${MARGIN.top + plotH + 4}" stroke="#333333"/>`,
      `<text x="${fmt(x)}" y="${MARGIN.top + plotH + 18}" text-anchor="middle">${fmt(tick)}</text>`,
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" ` +
      `fill="none" stroke="#333333"/>`,
    `<text x="${MARGIN.left + plotW / 2}" y="${height - 10}" text-anchor="middle">${escapeXml(spec.xLabel)}</text>`,
    `<text x="16" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 16 ${MARGIN.top + plotH / 2})">${escapeXml(spec.yLabel)}</text>`,
  );

  for (const series of spec.series) {
    const pts: string[] = [];
    let prev: [number, number] | null = null;
    for (const [x, y] of series.points) {
      if (series.step && prev !== null) {
        pts.push(`${fmt(sx(x))},${fmt(sy(prev[1]))}`);
      }
      pts.push(`${fmt(sx(x))},${fmt(sy(y))}`);
      prev = [x, y];
    }
    const dash = series.dashed ? ' stroke-dasharray="6 4"' : "";
    parts.push(
      `<polyline points="${pts.join(" ")}" fill="none" stroke="${series.color}" ` +
        `stroke-width="1.5"${dash}/>`,
    );
  }

  spec.series.forEach((series, i) => {
    const y = MARGIN.top + 14 + i * 16;
    const x = MARGIN.left + 10;
    const dash = series.dashed ? ' stroke-dasharray="6 4"' : "";
    parts.push(
      `<line x1="${x}" y1="${y - 4}" x2="${x + 22}" y2="${y - 4}" stroke="${series.color}" stroke-width="1.5"${dash}/>`,
      `<text x="${x + 28}" y="${y}">${escapeXml(series.label)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
