/** Browser bootstrap: wires DOM events to the controller and the canvas
 * overlay.  Deployable as static files next to the edit service (same
 * origin), or point `baseUrl` at a remote service. */

import { EditorApi } from "./api.js";
import { EditorController } from "./controller.js";
import { OverlayView } from "./overlay.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function fileToBase64(file: File): Promise<string> {
  const buf = new Uint8Array(await file.arrayBuffer());
  let binary = "";
  for (const b of buf) binary += String.fromCharCode(b);
  return btoa(binary);
}

document.addEventListener("DOMContentLoaded", () => {
  const canvas = el<HTMLCanvasElement>("editor-canvas");
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("canvas 2d context unavailable");
  const view = new OverlayView(canvas, ctx);
  const api = new EditorApi("");
  const controller = new EditorController(api);
  const status = el<HTMLSpanElement>("status");

  controller.onChange((state) => {
    if (state.localMesh) {
      controller.displayScale = view.scaleFor(state.localMesh.width, state.localMesh.height);
    }
    view.draw(state);
    const bits = [];
    if (state.sessionId) bits.push(`rev ${state.serverRevision}`);
    if (state.preview) bits.push(`preview rev ${state.preview.revision}`);
    if (state.exporting) bits.push("exporting...");
    if (state.lastExportPath) bits.push(`exported: ${state.lastExportPath}`);
    if (state.readOnly) bits.push("READ-ONLY (connection lost)");
    status.textContent = bits.join("  |  ");
  });

  el<HTMLInputElement>("file-input").addEventListener("change", async (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    await controller.open(await fileToBase64(file));
  });

  const pos = (ev: PointerEvent): [number, number] => {
    const r = canvas.getBoundingClientRect();
    return [
      ((ev.clientX - r.left) * canvas.width) / r.width,
      ((ev.clientY - r.top) * canvas.height) / r.height,
    ];
  };
  canvas.addEventListener("pointerdown", (ev) => {
    canvas.setPointerCapture(ev.pointerId);
    const [x, y] = pos(ev);
    controller.pointerDown(x, y);
  });
  canvas.addEventListener("pointermove", (ev) => {
    const [x, y] = pos(ev);
    controller.pointerMove(x, y);
  });
  canvas.addEventListener("pointerup", () => controller.pointerUp());

  document.addEventListener("keydown", (ev) => {
    const step = 1;
    if (ev.key === "ArrowLeft") controller.nudge(-step, 0);
    else if (ev.key === "ArrowRight") controller.nudge(step, 0);
    else if (ev.key === "ArrowUp") controller.nudge(0, -step);
    else if (ev.key === "ArrowDown") controller.nudge(0, step);
    else return;
    ev.preventDefault();
  });

  el<HTMLButtonElement>("undo-btn").addEventListener("click", () => void controller.undo());
  el<HTMLButtonElement>("redo-btn").addEventListener("click", () => void controller.redo());
  el<HTMLButtonElement>("export-btn").addEventListener("click", () => void controller.exportSession());
});
