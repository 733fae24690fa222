#!/usr/bin/env node
/**
 * Figure renderer command line. A recipe is a small JSON file:
 *
 *   { "kind": "<figure kind>", "csv": "<data file>", "out": "<svg file>",
 *     "title": "optional" }
 *
 * Paths are resolved relative to the recipe's own directory. The CSV must
 * carry a config_digest metadata line (written by the simulator); the digest
 * is embedded in the SVG so the figure stays traceable to its run.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import yargs from "yargs";
import { z } from "zod";

import { CsvError, parseDataFile } from "./csv.js";
import { renderFigure } from "./render.js";
import { FIGURE_KINDS, SchemaError, validateRows } from "./schemas.js";

const RecipeSchema = z.object({
  kind: z.enum(FIGURE_KINDS),
  csv: z.string().min(1),
  out: z.string().min(1),
  title: z.string().optional(),
  width: z.number().int().positive().optional(),
  height: z.number().int().positive().optional(),
});

export type Recipe = z.infer<typeof RecipeSchema>;

export function renderRecipe(recipePath: string): string {
  let rawRecipe: unknown;
  try {
    rawRecipe = JSON.parse(fs.readFileSync(recipePath, "utf8"));
  } catch (err) {
    throw new Error(`cannot read recipe ${recipePath}: ${(err as Error).message}`);
  }
  const parsed = RecipeSchema.safeParse(rawRecipe);
  if (!parsed.success) {
    throw new SchemaError(
      `invalid recipe ${recipePath}: ${parsed.error.issues[0].path.join(".")} ${parsed.error.issues[0].message}`,
    );
  }
  const recipe = parsed.data;
  const base = path.dirname(path.resolve(recipePath));
  const csvPath = path.resolve(base, recipe.csv);
  const outPath = path.resolve(base, recipe.out);

  const data = parseDataFile(fs.readFileSync(csvPath, "utf8"));
  const digest = data.metadata["config_digest"];
  if (!digest) {
    throw new SchemaError(`${csvPath}: missing config_digest metadata line`);
  }
  const rows = validateRows(recipe.kind, data.header, data.rows);
  const svg = renderFigure(recipe.kind, rows, digest, {
    title: recipe.title,
    width: recipe.width,
    height: recipe.height,
  });
  fs.mkdirSync(path.dirname(outPath), { recursive: true });
  fs.writeFileSync(outPath, svg);
  return outPath;
}

export async function run(argv: string[]): Promise<number> {
  let code = 0;
  await yargs(argv)
    .scriptName("darklattice-figures")
    .command(
      "render",
      "render one figure from a recipe",
      (y) =>
        y.option("recipe", {
          type: "string",
          demandOption: true,
          describe: "path to a recipe JSON file",
        }),
      (args) => {
        try {
          const out = renderRecipe(args.recipe);
          console.log(out);
        } catch (err) {
          console.error(`error: ${(err as Error).message}`);
          code =
            err instanceof SchemaError || err instanceof CsvError ? 2 : 1;
        }
      },
    )
    .demandCommand(1)
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      console.error(`error: ${msg ?? err?.message}`);
      code = 1;
    })
    .parseAsync();
  return code;
}

const isMain =
  process.argv[1] !== undefined &&
  path.resolve(process.argv[1]) === fileURLToPath(import.meta.url);

if (isMain) {
  run(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
