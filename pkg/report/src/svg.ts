/**
 * Minimal static SVG plotting: log-log scatter with reference slopes,
 * grouped per-k bars, and refinement curves.  Axis geometry is computed
 * here; every annotated number is a verbatim CSV string passed in by the
 * caller.
 */

const W = 640;
const H = 440;
const M = { l: 70, r: 20, t: 40, b: 55 };

export interface Series {
  label: string;
  points: Array<{ x: number; y: number }>;
  color: string;
  line?: boolean;
}

function scale(vals: number[], lo: number, hi: number, log: boolean) {
  const xs = log ? vals.map(Math.log10) : vals;
  const mn = Math.min(...xs);
  const mx = Math.max(...xs);
  const span = mx - mn || 1;
  return (v: number) => {
    const t = ((log ? Math.log10(v) : v) - mn) / span;
    return lo + t * (hi - lo);
  };
}

function frame(title: string, xlabel: string, ylabel: string): string[] {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" font-family="monospace" font-size="12">`,
    `<rect width="${W}" height="${H}" fill="white"/>`,
    `<text x="${W / 2}" y="20" text-anchor="middle" font-size="14">${title}</text>`,
    `<text x="${W / 2}" y="${H - 12}" text-anchor="middle">${xlabel}</text>`,
    `<text x="16" y="${H / 2}" text-anchor="middle" transform="rotate(-90 16 ${H / 2})">${ylabel}</text>`,
    `<rect x="${M.l}" y="${M.t}" width="${W - M.l - M.r}" height="${H - M.t - M.b}" fill="none" stroke="#444"/>`,
  ];
}

export function scatterPlot(
  title: string,
  xlabel: string,
  ylabel: string,
  series: Series[],
  annotations: string[] = [],
  loglog = true,
): string {
  const xs = series.flatMap((s) => s.points.map((p) => p.x));
  const ys = series.flatMap((s) => s.points.map((p) => p.y)).filter((y) => !loglog || y > 0);
  const sx = scale(xs, M.l, W - M.r, loglog);
  const sy = scale(ys, H - M.b, M.t, loglog);
  const out = frame(title, xlabel, ylabel);
  series.forEach((s, si) => {
    const pts = s.points.filter((p) => !loglog || p.y > 0);
    if (s.line !== false) {
      const path = pts.map((p, i) => `${i ? "L" : "M"}${sx(p.x).toFixed(1)},${sy(p.y).toFixed(1)}`).join(" ");
      out.push(`<path d="${path}" fill="none" stroke="${s.color}" stroke-width="1.5"/>`);
    }
    for (const p of pts) {
      out.push(`<circle cx="${sx(p.x).toFixed(1)}" cy="${sy(p.y).toFixed(1)}" r="3" fill="${s.color}"/>`);
    }
    out.push(
      `<text x="${W - M.r - 8}" y="${M.t + 16 + 16 * si}" text-anchor="end" fill="${s.color}">${s.label}</text>`,
    );
  });
  annotations.forEach((a, i) => {
    out.push(`<text x="${M.l + 10}" y="${M.t + 16 + 16 * i}" fill="#222">${a}</text>`);
  });
  out.push("</svg>");
  return out.join("\n");
}

export function barPlot(
  title: string,
  xlabel: string,
  groups: Array<{ x: string; value: number; bound: number; pass: string }>,
): string {
  const out = frame(title, xlabel, "value (log scale)");
  const all = groups.flatMap((g) => [g.value, g.bound]).filter((v) => v > 0);
  const sy = scale(all, H - M.b, M.t, true);
  const bw = (W - M.l - M.r) / groups.length;
  groups.forEach((g, i) => {
    const x0 = M.l + i * bw;
    const color = g.pass === "true" ? "#2a7" : "#c33";
    if (g.value > 0) {
      out.push(
        `<rect x="${(x0 + bw * 0.15).toFixed(1)}" y="${sy(g.value).toFixed(1)}" width="${(bw * 0.4).toFixed(1)}" height="${(H - M.b - sy(g.value)).toFixed(1)}" fill="${color}"/>`,
      );
    }
    if (g.bound > 0) {
      out.push(
        `<line x1="${(x0 + bw * 0.1).toFixed(1)}" x2="${(x0 + bw * 0.9).toFixed(1)}" y1="${sy(g.bound).toFixed(1)}" y2="${sy(g.bound).toFixed(1)}" stroke="#222" stroke-dasharray="4 2"/>`,
      );
    }
    out.push(
      `<text x="${(x0 + bw / 2).toFixed(1)}" y="${H - M.b + 16}" text-anchor="middle">${g.x}</text>`,
    );
  });
  out.push(`<text x="${W - M.r - 8}" y="${M.t + 16}" text-anchor="end">dashed = bound</text>`);
  out.push("</svg>");
  return out.join("\n");
}
