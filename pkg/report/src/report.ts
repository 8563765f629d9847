/**
 * Render the verification battery CSVs into figures plus summary.md.
 *
 * Usage: node dist/report.js --input-dir <battery csvs> --out-dir <dir>
 *
 * The tool never recomputes science: every number in the figures and the
 * summary table is a verbatim string from the input CSVs.
 */

import fs from "node:fs";
import path from "node:path";

import { FIT_SCHEMA, Row, SchemaError, num, readCsv } from "./csv.js";
import { barPlot, scatterPlot } from "./svg.js";

interface Args {
  inputDir: string;
  outDir: string;
  figures: string[];
}

const ALL_FIGURES = ["scaling", "bounds", "time_reg", "kernels"];

export function parseArgs(argv: string[]): Args {
  const args: Args = { inputDir: "", outDir: "report_out", figures: [...ALL_FIGURES] };
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--input-dir") args.inputDir = argv[++i];
    else if (argv[i] === "--out-dir") args.outDir = argv[++i];
    else if (argv[i] === "--figures") args.figures = argv[++i].split(",");
    else throw new Error(`unknown argument ${argv[i]}`);
  }
  if (!args.inputDir) throw new Error("--input-dir is required");
  for (const f of args.figures) {
    if (!ALL_FIGURES.includes(f)) throw new Error(`unknown figure kind ${f}`);
  }
  return args;
}

const CRITERION_LABELS: Record<string, string> = {
  char_gaussians: "1: Gaussian characteristic identities vs Monte-Carlo",
  kernel_identities: "2: kernel closed forms vs quadrature",
  g0_oracle_vs_mc: "3: oracle vs Monte-Carlo damped energy (g = 0)",
  lambda_slope_g0: "4: damping exponent -1/2",
  thm21_suite: "5: four estimate shapes under frozen constants",
  det_contrast: "6: deterministic averaging contrast",
  general_field: "7: nonlinear velocity curve (alpha = 3)",
  time_reg: "8: stochastic time regularity",
  det_time_reg: "9: deterministic time regularity",
  div_case: "10: divergence-form source balancing",
  pathwise: "11: pathwise L1/Linf inequalities",
};

function figScaling(inputDir: string): string {
  const rows = readCsv(path.join(inputDir, "lambda_slope_g0.csv"));
  const fits = readCsv(path.join(inputDir, "fits.csv"), FIT_SCHEMA);
  const mk = (est: string, color: string) => ({
    label: est,
    color,
    points: rows
      .filter((r) => r.estimator === est)
      .map((r) => ({ x: num(r.lambda), y: num(r.value) })),
  });
  const ann = fits
    .filter((f) => f.sweep_id.startsWith("lambda_slope_g0"))
    .map((f) => `${f.sweep_id}: slope ${f.exponent} (expected ${f.expected_exponent})`);
  return scatterPlot(
    "damped energy vs lambda at |k| = 16",
    "lambda",
    "E int e^{-2 lam t} |rho|^2 dt",
    [mk("oracle", "#16c"), mk("mc", "#c61")],
    ann,
  );
}

function figBounds(inputDir: string): string {
  const rows = readCsv(path.join(inputDir, "div_case.csv")).filter(
    (r) => r.case === "div_sim_bound",
  );
  return barPlot(
    "simulated divergence-source energy under the assembled bound",
    "|k|",
    rows.map((r) => ({ x: r.k_mag, value: num(r.value), bound: num(r.bound), pass: r.pass })),
  );
}

function figTimeReg(inputDir: string): string {
  const rows = readCsv(path.join(inputDir, "det_time_reg.csv")).filter(
    (r) => r.case === "gagliardo_ladder",
  );
  const kmags = [...new Set(rows.map((r) => r.k_mag))];
  const colors = ["#16c", "#c61", "#2a7", "#a2c"];
  const series = kmags.flatMap((km, i) => {
    const sub = rows.filter((r) => r.k_mag === km);
    return [
      {
        label: `Brownian E, |k|=${km}`,
        color: colors[(2 * i) % colors.length],
        points: sub.map((r) => ({ x: 2 ** num(r.k_index), y: num(r.value) })),
      },
      {
        label: `linear path, |k|=${km}`,
        color: colors[(2 * i + 1) % colors.length],
        points: sub.map((r) => ({ x: 2 ** num(r.k_index), y: num(r.bound) })),
      },
    ];
  });
  return scatterPlot(
    "discrete Gagliardo seminorm vs time refinement (beta = 0.49)",
    "n_t",
    "seminorm",
    series,
  );
}

function figKernels(inputDir: string): string {
  const rows = readCsv(path.join(inputDir, "kernel_identities.csv"));
  const cases = [...new Set(rows.map((r) => r.case))];
  return barPlot(
    "kernel identity residuals against their tolerances",
    "identity family (worst case)",
    cases.map((c) => {
      const sub = rows.filter((r) => r.case === c);
      const worst = sub.reduce((a, b) => (num(a.value) >= num(b.value) ? a : b));
      return { x: c.slice(0, 12), value: num(worst.value), bound: num(worst.bound), pass: worst.pass };
    }),
  );
}

function summaryTable(inputDir: string): string {
  const summary = readCsv(path.join(inputDir, "battery_summary.csv"));
  const fits = readCsv(path.join(inputDir, "fits.csv"), FIT_SCHEMA);
  const lines = [
    "# Verification battery summary",
    "",
    "Every numeric cell below is copied verbatim from the battery CSVs.",
    "",
    "| criterion | experiment | pass |",
    "|---|---|---|",
  ];
  for (const row of summary) {
    const label = CRITERION_LABELS[row.experiment_id] ?? row.experiment_id;
    lines.push(`| ${label} | ${row.experiment_id} | ${row.pass} |`);
  }
  lines.push("", "## Fitted exponents", "");
  lines.push("| sweep | exponent | half width | r2 | expected | pass |");
  lines.push("|---|---|---|---|---|---|");
  for (const f of fits) {
    lines.push(
      `| ${f.sweep_id} | ${f.exponent} | ${f.half_width} | ${f.r2} | ${f.expected_exponent} | ${f.pass} |`,
    );
  }
  lines.push("");
  return lines.join("\n");
}

export function render(args: Args): void {
  fs.mkdirSync(args.outDir, { recursive: true });
  const makers: Record<string, (d: string) => string> = {
    scaling: figScaling,
    bounds: figBounds,
    time_reg: figTimeReg,
    kernels: figKernels,
  };
  for (const fig of args.figures) {
    const svg = makers[fig](args.inputDir);
    fs.writeFileSync(path.join(args.outDir, `${fig}.svg`), svg);
  }
  fs.writeFileSync(path.join(args.outDir, "summary.md"), summaryTable(args.inputDir));
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("report.js") || entry.endsWith("report.ts")) {
  try {
    render(parseArgs(process.argv.slice(2)));
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
    } else {
      console.error(String(err instanceof Error ? err.message : err));
    }
    process.exit(1);
  }
}
