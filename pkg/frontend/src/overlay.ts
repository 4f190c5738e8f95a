/** Canvas rendering of the editor scene: preview bitmap, grid lines,
 * vertex handles, rejected-cell flash, read-only banner. */

import type { EditorState } from "./controller.js";

export const HANDLE_RADIUS = 5;
export const GRID_COLOR = "rgba(80, 200, 255, 0.85)";
export const HANDLE_COLOR = "#ffd34d";
export const SELECTED_COLOR = "#ff5d5d";
export const REJECT_FILL = "rgba(255, 60, 60, 0.35)";

export class OverlayView {
  private previewImg: HTMLImageElement | null = null;
  private previewUrl: string | null = null;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly ctx: CanvasRenderingContext2D,
  ) {}

  /** display px per mesh px for a mesh of the given frame size */
  scaleFor(meshWidth: number, meshHeight: number): number {
    return Math.min(this.canvas.width / meshWidth, this.canvas.height / meshHeight);
  }

  draw(state: EditorState): void {
    const ctx = this.ctx;
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    const mesh = state.localMesh;
    if (!mesh) {
      ctx.fillStyle = "#888";
      ctx.fillText("open an image to start", 16, 24);
      return;
    }
    const s = this.scaleFor(mesh.width, mesh.height);

    if (state.preview && this.previewUrl !== state.preview.url) {
      this.previewUrl = state.preview.url;
      const img = new Image();
      img.onload = () => {
        this.previewImg = img;
        this.draw(state);
      };
      img.src = state.preview.url;
    }
    if (this.previewImg) {
      ctx.drawImage(this.previewImg, 0, 0, mesh.width * s, mesh.height * s);
    }

    ctx.fillStyle = REJECT_FILL;
    for (const [u, v] of state.rejectedCells) {
      const quad = [
        mesh.vertices[v][u],
        mesh.vertices[v][u + 1],
        mesh.vertices[v + 1][u + 1],
        mesh.vertices[v + 1][u],
      ];
      ctx.beginPath();
      ctx.moveTo(quad[0][0] * s, quad[0][1] * s);
      for (const [m, n] of quad.slice(1)) ctx.lineTo(m * s, n * s);
      ctx.closePath();
      ctx.fill();
    }

    ctx.strokeStyle = GRID_COLOR;
    ctx.lineWidth = 1;
    for (let j = 0; j <= mesh.rows; j++) {
      ctx.beginPath();
      for (let i = 0; i <= mesh.cols; i++) {
        const [m, n] = mesh.vertices[j][i];
        if (i === 0) ctx.moveTo(m * s, n * s);
        else ctx.lineTo(m * s, n * s);
      }
      ctx.stroke();
    }
    for (let i = 0; i <= mesh.cols; i++) {
      ctx.beginPath();
      for (let j = 0; j <= mesh.rows; j++) {
        const [m, n] = mesh.vertices[j][i];
        if (j === 0) ctx.moveTo(m * s, n * s);
        else ctx.lineTo(m * s, n * s);
      }
      ctx.stroke();
    }

    for (let j = 0; j <= mesh.rows; j++) {
      for (let i = 0; i <= mesh.cols; i++) {
        const [m, n] = mesh.vertices[j][i];
        const sel = state.selected && state.selected[0] === i && state.selected[1] === j;
        ctx.fillStyle = sel ? SELECTED_COLOR : HANDLE_COLOR;
        ctx.beginPath();
        ctx.arc(m * s, n * s, HANDLE_RADIUS, 0, 2 * Math.PI);
        ctx.fill();
      }
    }

    if (state.readOnly) {
      ctx.fillStyle = "rgba(0,0,0,0.6)";
      ctx.fillRect(0, 0, this.canvas.width, 28);
      ctx.fillStyle = "#fff";
      ctx.fillText("connection lost: read-only", 12, 18);
    }
  }
}
