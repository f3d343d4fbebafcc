/** Orbit camera over a point cloud: drag to orbit, wheel to zoom, secondary
 * drag to pan. Pure math, no DOM. */

export interface CameraState {
  azimuth: number; // radians, about the world y axis
  elevation: number; // radians, clamped to avoid pole flip
  zoom: number; // multiplier on the fitted scale
  panX: number; // screen-space offset in scene units
  panY: number;
}

const ELEVATION_LIMIT = Math.PI / 2 - 1e-3;

export class OrbitCamera {
  state: CameraState = { azimuth: 0, elevation: 0, zoom: 1, panX: 0, panY: 0 };

  orbit(dAzimuth: number, dElevation: number): void {
    this.state.azimuth += dAzimuth;
    this.state.elevation = Math.min(
      ELEVATION_LIMIT,
      Math.max(-ELEVATION_LIMIT, this.state.elevation + dElevation),
    );
  }

  zoomBy(factor: number): void {
    this.state.zoom = Math.min(50, Math.max(0.02, this.state.zoom * factor));
  }

  pan(dx: number, dy: number): void {
    this.state.panX += dx;
    this.state.panY += dy;
  }

  reset(): void {
    this.state = { azimuth: 0, elevation: 0, zoom: 1, panX: 0, panY: 0 };
  }

  /** Rotate a world point into view space (orthographic; z kept for shading). */
  viewTransform(x: number, y: number, z: number): [number, number, number] {
    const ca = Math.cos(this.state.azimuth);
    const sa = Math.sin(this.state.azimuth);
    const ce = Math.cos(this.state.elevation);
    const se = Math.sin(this.state.elevation);
    // azimuth about y, then elevation about x
    const x1 = ca * x + sa * z;
    const z1 = -sa * x + ca * z;
    const y2 = ce * y - se * z1;
    const z2 = se * y + ce * z1;
    return [x1, y2, z2];
  }
}

export interface ProjectedPoint {
  x: number;
  y: number;
  depth: number;
}

/** Project xyz triples to canvas pixels, fitting the cloud's bounding radius. */
export function projectPoints(
  vertices: Float32Array,
  camera: OrbitCamera,
  width: number,
  height: number,
): ProjectedPoint[] {
  const count = vertices.length / 3;
  if (count === 0) return [];
  let radius = 1e-6;
  for (let i = 0; i < count; i++) {
    const r = Math.hypot(vertices[3 * i]!, vertices[3 * i + 1]!, vertices[3 * i + 2]!);
    if (r > radius) radius = r;
  }
  const scale = (camera.state.zoom * Math.min(width, height)) / (2.2 * radius);
  const out: ProjectedPoint[] = [];
  for (let i = 0; i < count; i++) {
    const [vx, vy, vz] = camera.viewTransform(
      vertices[3 * i]!,
      vertices[3 * i + 1]!,
      vertices[3 * i + 2]!,
    );
    out.push({
      x: width / 2 + (vx + camera.state.panX) * scale,
      y: height / 2 - (vy + camera.state.panY) * scale,
      depth: vz / radius,
    });
  }
  return out;
}
