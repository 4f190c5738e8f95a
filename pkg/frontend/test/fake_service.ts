/** In-memory stand-in for the edit service, faithful to the protocol:
 * monotone revisions, atomic rejection, snapshot preview revisions.  Keeps
 * a full request log plus a concurrent-preview high-water mark so tests can
 * assert the client's traffic shape. */

import type { FetchLike } from "../src/api.js";
import { cloneMesh, type MeshJson } from "../src/types.js";

export function rigidMesh(width: number, height: number, cols = 8, rows = 6): MeshJson {
  const vertices: number[][][] = [];
  for (let j = 0; j <= rows; j++) {
    const row: number[][] = [];
    for (let i = 0; i <= cols; i++) row.push([(i * width) / cols, (j * height) / rows]);
    vertices.push(row);
  }
  return { cols, rows, width, height, vertices };
}

export interface LoggedRequest {
  method: string;
  path: string;
  body?: unknown;
}

export class FakeService {
  log: LoggedRequest[] = [];
  revision = 0;
  mesh: MeshJson;
  undoStack: MeshJson[] = [];
  redoStack: MeshJson[] = [];
  latencyMs = 4;
  previewLatencyMs = 12;
  rejectNextMove = false;
  failNextRequest = false;
  previewInFlight = 0;
  maxPreviewInFlight = 0;
  previewsServed = 0;

  constructor(width = 512, height = 384) {
    this.mesh = rigidMesh(width, height);
  }

  get fetch(): FetchLike {
    return (url, init) => this.handle(String(url), init);
  }

  private delay(ms: number): Promise<void> {
    return new Promise((resolve) => setTimeout(resolve, ms));
  }

  private json(body: unknown, headers: Record<string, string> = {}): Response {
    return new Response(JSON.stringify(body), {
      status: 200,
      headers: { "content-type": "application/json", ...headers },
    });
  }

  private async handle(url: string, init?: RequestInit): Promise<Response> {
    const method = init?.method ?? "GET";
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    this.log.push({ method, path, body });

    if (this.failNextRequest) {
      this.failNextRequest = false;
      throw new Error("network down");
    }

    if (method === "POST" && path === "/sessions") {
      await this.delay(this.latencyMs);
      return this.json({
        id: "s1",
        revision: this.revision,
        width: this.mesh.width,
        height: this.mesh.height,
        mesh: cloneMesh(this.mesh),
      });
    }

    if (path.endsWith("/move-vertex")) {
      await this.delay(this.latencyMs);
      const { i, j, m, n } = body as { i: number; j: number; m: number; n: number };
      if (this.rejectNextMove) {
        this.rejectNextMove = false;
        return this.json({
          accepted: false,
          revision: this.revision,
          invalid_cells: [
            [Math.max(0, i - 1), Math.max(0, j - 1)],
            [Math.min(this.mesh.cols - 1, i), Math.min(this.mesh.rows - 1, j)],
          ],
        });
      }
      this.undoStack.push(cloneMesh(this.mesh));
      this.redoStack = [];
      this.mesh.vertices[j][i] = [m, n];
      this.revision += 1;
      return this.json({ accepted: true, revision: this.revision });
    }

    if (path.endsWith("/undo")) {
      await this.delay(this.latencyMs);
      const prev = this.undoStack.pop();
      if (!prev) return this.json({ undone: false, revision: this.revision, mesh: cloneMesh(this.mesh) });
      this.redoStack.push(cloneMesh(this.mesh));
      this.mesh = prev;
      this.revision += 1;
      return this.json({ undone: true, revision: this.revision, mesh: cloneMesh(this.mesh) });
    }

    if (path.endsWith("/redo")) {
      await this.delay(this.latencyMs);
      const next = this.redoStack.pop();
      if (!next) return this.json({ redone: false, revision: this.revision, mesh: cloneMesh(this.mesh) });
      this.undoStack.push(cloneMesh(this.mesh));
      this.mesh = next;
      this.revision += 1;
      return this.json({ redone: true, revision: this.revision, mesh: cloneMesh(this.mesh) });
    }

    if (path.includes("/preview")) {
      const snapshotRevision = this.revision; // server renders a snapshot
      this.previewInFlight += 1;
      this.maxPreviewInFlight = Math.max(this.maxPreviewInFlight, this.previewInFlight);
      await this.delay(this.previewLatencyMs);
      this.previewInFlight -= 1;
      this.previewsServed += 1;
      return new Response(new Blob([new Uint8Array([0x89, 0x50, 0x4e, 0x47])]), {
        status: 200,
        headers: { "x-revision": String(snapshotRevision) },
      });
    }

    if (path.endsWith("/export")) {
      await this.delay(this.latencyMs);
      return this.json({
        revision: this.revision,
        image_path: `/data/exports/s1/rev${this.revision}/corrected.png`,
        mesh_path: `/data/exports/s1/rev${this.revision}/mesh.txt`,
        flow_path: `/data/exports/s1/rev${this.revision}/flow.twfl`,
      });
    }

    if (path.endsWith("/mesh")) {
      await this.delay(this.latencyMs);
      return this.json({ revision: this.revision, mesh: cloneMesh(this.mesh) });
    }

    return new Response(JSON.stringify({ detail: `no route ${path}` }), { status: 404 });
  }

  moveRequests(): LoggedRequest[] {
    return this.log.filter((r) => r.path.endsWith("/move-vertex"));
  }

  previewRequests(): LoggedRequest[] {
    return this.log.filter((r) => r.path.includes("/preview"));
  }
}
