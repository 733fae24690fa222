import { describe, expect, it } from "vitest";

import { CsvError, parseDataFile } from "../src/csv.js";

const SAMPLE = `# tool = darklattice 0.1.0
# command = spectrum
# config_digest = sha256:abc123
# config = {"lattice": {"n_perp": 3}}
mode,rate,shift
0,0.5,-0.1
1,1.5,0.1
`;

describe("parseDataFile", () => {
  it("separates metadata from the table", () => {
    const data = parseDataFile(SAMPLE);
    expect(data.metadata.command).toBe("spectrum");
    expect(data.metadata.config_digest).toBe("sha256:abc123");
    expect(data.metadata.config).toBe('{"lattice": {"n_perp": 3}}');
    expect(data.header).toEqual(["mode", "rate", "shift"]);
    expect(data.rows).toHaveLength(2);
    expect(data.rows[1].rate).toBe("1.5");
  });

  it("rejects a file with no table", () => {
    expect(() => parseDataFile("# only = metadata\n")).toThrow(CsvError);
  });

  it("rejects a header without rows", () => {
    expect(() => parseDataFile("a,b\n")).toThrow(CsvError);
  });
});
