/** Editor state machine: optimistic local mesh, throttled server moves,
 * coalesced previews, snap-back on rejection.
 *
 * Invariants kept here:
 *  - the local mesh diverges from the server mesh only during an active
 *    drag; rejection or drop reconciles it back to the confirmed state;
 *  - at most one move-vertex request and one preview request are in flight
 *    at any time; move sends are rate-limited (default 15/s) and coalesce
 *    to the latest pointer position;
 *  - the displayed preview revision never exceeds the server revision, and
 *    after quiescence it converges to it;
 *  - any transport failure parks the editor in a read-only banner state.
 */

import { EditorApi } from "./api.js";
import { throttle, type Throttled } from "./throttle.js";
import { cloneMesh, type MeshJson } from "./types.js";

export interface EditorState {
  sessionId: string | null;
  serverMesh: MeshJson | null;
  localMesh: MeshJson | null;
  serverRevision: number;
  selected: [number, number] | null;
  dragging: boolean;
  preview: { url: string; revision: number } | null;
  previewInFlight: boolean;
  moveInFlight: boolean;
  rejectedCells: [number, number][];
  readOnly: boolean;
  exporting: boolean;
  lastExportPath: string | null;
}

export interface ControllerOptions {
  moveRateHz?: number;
  previewMaxDim?: number;
  hitRadiusPx?: number;
  /** Converts preview bytes to a displayable URL; injectable for tests. */
  makePreviewUrl?: (blob: Blob) => string;
}

export type StateListener = (state: EditorState) => void;

interface PendingMove {
  i: number;
  j: number;
  m: number;
  n: number;
}

export class EditorController {
  readonly state: EditorState = {
    sessionId: null,
    serverMesh: null,
    localMesh: null,
    serverRevision: -1,
    selected: null,
    dragging: false,
    preview: null,
    previewInFlight: false,
    moveInFlight: false,
    rejectedCells: [],
    readOnly: false,
    exporting: false,
    lastExportPath: null,
  };

  private readonly previewMaxDim: number;
  private readonly hitRadiusPx: number;
  private readonly makeUrl: (blob: Blob) => string;
  private readonly sendThrottled: Throttled;
  private pendingMove: PendingMove | null = null;
  private previewDirty = false;
  private listeners: StateListener[] = [];
  /** display px per mesh px; set by the view on layout */
  displayScale = 1;

  constructor(
    private readonly api: EditorApi,
    opts: ControllerOptions = {},
  ) {
    this.previewMaxDim = opts.previewMaxDim ?? 512;
    this.hitRadiusPx = opts.hitRadiusPx ?? 8;
    this.makeUrl = opts.makePreviewUrl ?? ((blob) => URL.createObjectURL(blob));
    const hz = opts.moveRateHz ?? 15;
    this.sendThrottled = throttle(() => this.sendMove(), 1000 / hz);
  }

  onChange(listener: StateListener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const l of this.listeners) l(this.state);
  }

  private fail(): void {
    this.state.readOnly = true;
    this.state.dragging = false;
    this.sendThrottled.cancel();
    this.pendingMove = null;
    this.emit();
  }

  async open(imageBase64: string, meshText?: string): Promise<void> {
    try {
      const info = await this.api.createSession(imageBase64, meshText);
      this.state.sessionId = info.id;
      this.state.serverMesh = info.mesh;
      this.state.localMesh = cloneMesh(info.mesh);
      this.state.serverRevision = info.revision;
      this.state.rejectedCells = [];
      this.state.readOnly = false;
      this.emit();
      this.schedulePreview();
    } catch {
      this.fail();
    }
  }

  /** Nearest vertex within the hit radius, in display coordinates. */
  hitTest(xDisp: number, yDisp: number): [number, number] | null {
    const mesh = this.state.localMesh;
    if (!mesh) return null;
    const r2 = this.hitRadiusPx * this.hitRadiusPx;
    let best: [number, number] | null = null;
    let bestD = r2;
    for (let j = 0; j <= mesh.rows; j++) {
      for (let i = 0; i <= mesh.cols; i++) {
        const [m, n] = mesh.vertices[j][i];
        const dx = m * this.displayScale - xDisp;
        const dy = n * this.displayScale - yDisp;
        const d = dx * dx + dy * dy;
        if (d <= bestD) {
          bestD = d;
          best = [i, j];
        }
      }
    }
    return best;
  }

  pointerDown(xDisp: number, yDisp: number): void {
    if (this.state.readOnly || !this.state.localMesh) return;
    const hit = this.hitTest(xDisp, yDisp);
    this.state.selected = hit;
    this.state.dragging = hit !== null;
    this.state.rejectedCells = [];
    this.emit();
  }

  pointerMove(xDisp: number, yDisp: number): void {
    if (!this.state.dragging || this.state.readOnly) return;
    const sel = this.state.selected;
    const mesh = this.state.localMesh;
    if (!sel || !mesh) return;
    const m = Math.min(Math.max(xDisp / this.displayScale, 0), mesh.width);
    const n = Math.min(Math.max(yDisp / this.displayScale, 0), mesh.height);
    mesh.vertices[sel[1]][sel[0]] = [m, n];
    this.pendingMove = { i: sel[0], j: sel[1], m, n };
    this.emit();
    this.sendThrottled();
  }

  pointerUp(): void {
    if (!this.state.dragging) return;
    this.state.dragging = false;
    // the final position must reach the server even mid-throttle-window
    this.sendThrottled.flush();
    this.reconcileIfIdle();
    this.emit();
  }

  /** 1 px nudge of the selected vertex (fine adjustment). */
  nudge(dxPx: number, dyPx: number): void {
    const sel = this.state.selected;
    const mesh = this.state.localMesh;
    if (!sel || !mesh || this.state.readOnly) return;
    const [m, n] = mesh.vertices[sel[1]][sel[0]];
    mesh.vertices[sel[1]][sel[0]] = [m + dxPx, n + dyPx];
    this.pendingMove = { i: sel[0], j: sel[1], m: m + dxPx, n: n + dyPx };
    this.emit();
    this.sendThrottled();
  }

  private sendMove(): void {
    if (this.state.moveInFlight || !this.pendingMove) return;
    const sid = this.state.sessionId;
    if (!sid) return;
    const move = this.pendingMove;
    this.pendingMove = null;
    this.state.moveInFlight = true;
    this.api
      .moveVertex(sid, move.i, move.j, move.m, move.n)
      .then((res) => {
        this.state.moveInFlight = false;
        if (res.accepted) {
          this.state.serverRevision = res.revision;
          if (this.state.serverMesh) {
            this.state.serverMesh.vertices[move.j][move.i] = [move.m, move.n];
          }
          this.state.rejectedCells = [];
          this.schedulePreview();
        } else {
          this.state.rejectedCells = res.invalid_cells ?? [];
          this.reconcileIfIdle();
        }
        this.emit();
        if (this.pendingMove) this.sendThrottled();
      })
      .catch(() => this.fail());
  }

  /** Outside a drag the local mesh must equal the server-confirmed mesh. */
  private reconcileIfIdle(): void {
    if (this.state.dragging || this.state.moveInFlight || this.pendingMove) return;
    if (this.state.serverMesh) {
      this.state.localMesh = cloneMesh(this.state.serverMesh);
    }
  }

  schedulePreview(): void {
    this.previewDirty = true;
    this.maybeFetchPreview();
  }

  private maybeFetchPreview(): void {
    if (this.state.previewInFlight || !this.previewDirty) return;
    const sid = this.state.sessionId;
    if (!sid) return;
    this.previewDirty = false;
    this.state.previewInFlight = true;
    this.api
      .preview(sid, this.previewMaxDim)
      .then((res) => {
        this.state.previewInFlight = false;
        if (this.state.preview && this.state.preview.url.startsWith("blob:")) {
          try {
            URL.revokeObjectURL(this.state.preview.url);
          } catch {
            // non-browser URL implementations may not support revoke
          }
        }
        this.state.preview = { url: this.makeUrl(res.blob), revision: res.revision };
        if (res.revision < this.state.serverRevision) {
          this.previewDirty = true; // stale render, fetch again
        }
        this.emit();
        this.maybeFetchPreview();
      })
      .catch(() => this.fail());
  }

  async undo(): Promise<void> {
    await this.undoRedo("undo");
  }

  async redo(): Promise<void> {
    await this.undoRedo("redo");
  }

  private async undoRedo(which: "undo" | "redo"): Promise<void> {
    const sid = this.state.sessionId;
    if (!sid || this.state.readOnly || this.state.dragging) return;
    try {
      const res = which === "undo" ? await this.api.undo(sid) : await this.api.redo(sid);
      this.state.serverRevision = res.revision;
      this.state.serverMesh = res.mesh;
      this.state.localMesh = cloneMesh(res.mesh);
      this.state.rejectedCells = [];
      this.emit();
      this.schedulePreview();
    } catch {
      this.fail();
    }
  }

  async exportSession(): Promise<string | null> {
    const sid = this.state.sessionId;
    if (!sid || this.state.readOnly) return null;
    this.state.exporting = true;
    this.emit();
    try {
      const res = await this.api.exportSession(sid);
      this.state.exporting = false;
      this.state.lastExportPath = res.image_path;
      this.emit();
      return res.image_path;
    } catch {
      this.fail();
      return null;
    }
  }
}
