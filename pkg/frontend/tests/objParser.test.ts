import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { ObjParseError, parseObj } from "../src/objParser.js";

const here = dirname(fileURLToPath(import.meta.url));
const GOLDEN_SPHERE = readFileSync(join(here, "..", "fixtures", "sphere.obj"), "utf-8");

describe("parseObj", () => {
  it("parses a single vertex", () => {
    const cloud = parseObj("v 0 0 0\n");
    expect(cloud.count).toBe(1);
    expect(Array.from(cloud.vertices)).toEqual([0, 0, 0]);
  });

  it("ignores comments and blank lines", () => {
    const cloud = parseObj("# point cloud\n\nv 1 2 3\nv -0.5 0.25 9\n");
    expect(cloud.count).toBe(2);
    expect(cloud.vertices[3]).toBeCloseTo(-0.5);
  });

  it("parses the golden sphere fixture with the exact vertex count", () => {
    const vLines = GOLDEN_SPHERE.split("\n").filter((l) => l.startsWith("v ")).length;
    const cloud = parseObj(GOLDEN_SPHERE);
    expect(cloud.count).toBe(vLines);
    expect(cloud.count).toBe(992); // frozen from the fixture's generator
    // every vertex of the sphere fixture sits at radius ~1
    for (let i = 0; i < cloud.count; i++) {
      const r = Math.hypot(
        cloud.vertices[3 * i]!,
        cloud.vertices[3 * i + 1]!,
        cloud.vertices[3 * i + 2]!,
      );
      expect(Math.abs(r - 1)).toBeLessThan(1e-2);
    }
  });

  it("rejects face lines with a clear message", () => {
    expect(() => parseObj("v 0 0 0\nf 1 2 3\n")).toThrowError(ObjParseError);
    expect(() => parseObj("v 0 0 0\nf 1 2 3\n")).toThrowError(/face data is not supported/);
  });

  it("rejects other record types", () => {
    expect(() => parseObj("vn 0 0 1\n")).toThrowError(/unsupported OBJ record/);
  });

  it("rejects malformed vertices", () => {
    expect(() => parseObj("v 1 2\n")).toThrowError(/exactly 3 coordinates/);
    expect(() => parseObj("v a b c\n")).toThrowError(/not a number/);
  });

  it("handles the empty export (comment header only)", () => {
    const cloud = parseObj("# point cloud\n");
    expect(cloud.count).toBe(0);
  });
});
