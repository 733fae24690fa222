/**
 * Reader for the simulator's CSV dialect: '#'-prefixed `key = value`
 * metadata lines, then a header row, then numeric rows.
 */

import Papa from "papaparse";

export interface DataFile {
  metadata: Record<string, string>;
  header: string[];
  rows: Record<string, string>[];
}

export class CsvError extends Error {}

export function parseDataFile(text: string): DataFile {
  const metadata: Record<string, string> = {};
  const bodyLines: string[] = [];
  for (const line of text.split(/\r?\n/)) {
    if (line.startsWith("#")) {
      const stripped = line.slice(1).trim();
      const eq = stripped.indexOf(" = ");
      if (eq > 0) {
        metadata[stripped.slice(0, eq)] = stripped.slice(eq + 3);
      }
    } else if (line.trim() !== "") {
      bodyLines.push(line);
    }
  }
  if (bodyLines.length === 0) {
    throw new CsvError("no header row: the CSV body is empty");
  }
  const parsed = Papa.parse<Record<string, string>>(bodyLines.join("\n"), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new CsvError(`CSV parse failed: ${parsed.errors[0].message}`);
  }
  if (parsed.data.length === 0) {
    throw new CsvError("CSV contains a header but no data rows");
  }
  return {
    metadata,
    header: parsed.meta.fields ?? [],
    rows: parsed.data,
  };
}
