/**
 * Per-figure-kind row schemas. A CSV is accepted for a kind only if its
 * header carries every required column and each row coerces cleanly.
 */

import { z } from "zod";

// strict numeric column (NaN rejected) and one where NaN marks "not defined"
const finite = z.coerce.number();
const num = z.preprocess((v) => Number(v), z.number().or(z.nan()));

export const FIGURE_KINDS = [
  "mode_spectrum",
  "size_scaling",
  "trajectory",
  "fidelity_sweep",
  "reflectivity",
  "defects",
  "nonmarkov_scan",
  "field_map",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

export const ROW_SCHEMAS: Record<FigureKind, z.ZodTypeAny> = {
  mode_spectrum: z.object({
    mode: finite,
    rate: finite,
    shift: finite,
    qbar: num,
    parity: finite,
    ipr: num,
  }),
  size_scaling: z.object({
    n_perp: finite,
    gamma_d: finite,
    gamma_b: finite,
    ratio: finite,
  }),
  trajectory: z.object({
    time: finite,
    pop_s1: finite,
    pop_s2: finite,
    pop_e: finite,
  }),
  fidelity_sweep: z.object({
    ratio: finite,
    fidelity_sim: finite,
    fidelity_formula: finite,
  }),
  reflectivity: z.object({
    scheme: z.string().min(1),
    delta: finite,
    reflectivity: finite,
    analytic: finite,
  }),
  defects: z.object({
    probability: finite,
    mean_dark: finite,
    stderr_dark: finite,
    predicted_dark: finite,
  }),
  nonmarkov_scan: z.object({
    gamma_tau: finite,
    omega_opt: finite,
    fidelity: finite,
    t_at_max: finite,
  }),
  field_map: z.object({
    x: finite,
    z: finite,
    abs_psi: finite,
  }),
};

export class SchemaError extends Error {}

export function validateRows(
  kind: FigureKind,
  header: string[],
  rows: Record<string, string>[],
): Record<string, number | string>[] {
  const schema = ROW_SCHEMAS[kind];
  const required = Object.keys((schema as z.ZodObject<z.ZodRawShape>).shape);
  const missing = required.filter((c) => !header.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(
      `CSV does not match figure kind '${kind}': missing column(s) ${missing.join(", ")}`,
    );
  }
  return rows.map((row, i) => {
    const result = schema.safeParse(row);
    if (!result.success) {
      throw new SchemaError(
        `row ${i + 1} does not match figure kind '${kind}': ${result.error.issues[0].message}`,
      );
    }
    return result.data as Record<string, number | string>;
  });
}
