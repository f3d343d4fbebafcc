/** Parser for the vertex-only OBJ dialect the reconstruction endpoint emits.
 *
 * Accepts comment lines and "v x y z" records, nothing else. Face data in
 * particular is rejected loudly: this viewer renders point clouds, not
 * meshes.
 */

export interface ParsedCloud {
  vertices: Float32Array; // xyz triples
  count: number;
}

export class ObjParseError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ObjParseError";
  }
}

export function parseObj(text: string): ParsedCloud {
  const coords: number[] = [];
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = (lines[i] ?? "").trim();
    if (line === "" || line.startsWith("#")) continue;
    const parts = line.split(/\s+/);
    const keyword = parts[0];
    if (keyword === "f") {
      throw new ObjParseError(
        `line ${i + 1}: face data is not supported — expected a vertex-only point cloud`,
      );
    }
    if (keyword !== "v") {
      throw new ObjParseError(`line ${i + 1}: unsupported OBJ record "${keyword}"`);
    }
    if (parts.length !== 4) {
      throw new ObjParseError(`line ${i + 1}: vertex needs exactly 3 coordinates`);
    }
    for (let k = 1; k <= 3; k++) {
      const value = Number(parts[k]);
      if (!Number.isFinite(value)) {
        throw new ObjParseError(`line ${i + 1}: coordinate "${parts[k]}" is not a number`);
      }
      coords.push(value);
    }
  }
  return { vertices: Float32Array.from(coords), count: coords.length / 3 };
}
