/** Canvas renderer + pointer bindings for the orbit viewer. */

import { OrbitCamera, projectPoints } from "./camera.js";
import { ParsedCloud } from "./objParser.js";

export class PointCloudViewer {
  readonly camera = new OrbitCamera();
  private cloud: ParsedCloud | null = null;
  private dragging: "orbit" | "pan" | null = null;
  private lastX = 0;
  private lastY = 0;

  constructor(private readonly canvas: HTMLCanvasElement) {
    canvas.addEventListener("pointerdown", (e) => {
      this.dragging = e.button === 2 || e.shiftKey ? "pan" : "orbit";
      this.lastX = e.clientX;
      this.lastY = e.clientY;
      canvas.setPointerCapture(e.pointerId);
    });
    canvas.addEventListener("pointermove", (e) => {
      if (!this.dragging) return;
      const dx = e.clientX - this.lastX;
      const dy = e.clientY - this.lastY;
      this.lastX = e.clientX;
      this.lastY = e.clientY;
      if (this.dragging === "orbit") {
        this.camera.orbit(dx * 0.01, dy * 0.01);
      } else {
        this.camera.pan(dx * 0.005, -dy * 0.005);
      }
      this.render();
    });
    canvas.addEventListener("pointerup", () => (this.dragging = null));
    canvas.addEventListener("wheel", (e) => {
      e.preventDefault();
      this.camera.zoomBy(e.deltaY < 0 ? 1.1 : 1 / 1.1);
      this.render();
    });
    canvas.addEventListener("contextmenu", (e) => e.preventDefault());
  }

  setCloud(cloud: ParsedCloud): void {
    this.cloud = cloud;
    this.camera.reset();
    this.render();
  }

  render(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.fillStyle = "#10141a";
    ctx.fillRect(0, 0, width, height);
    if (!this.cloud || this.cloud.count === 0) return;
    const projected = projectPoints(this.cloud.vertices, this.camera, width, height);
    for (const p of projected) {
      const shade = Math.round(150 + 90 * Math.max(-1, Math.min(1, -p.depth)));
      ctx.fillStyle = `rgb(${shade * 0.55}, ${shade * 0.85}, ${shade})`;
      ctx.fillRect(p.x, p.y, 2, 2);
    }
  }
}
