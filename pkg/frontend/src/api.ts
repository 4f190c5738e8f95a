/** Thin typed client over the edit-service HTTP protocol.
 *
 * The fetch implementation is injectable so tests can run against a fake
 * transport and record the request log.
 */

import type {
  ExportResult,
  MeshResponse,
  MoveResult,
  PreviewResult,
  SessionInfo,
  UndoRedoResult,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = `${resp.status}`;
    try {
      const body = (await resp.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // keep the status code
    }
    throw new Error(`request failed: ${detail}`);
  }
  return (await resp.json()) as T;
}

export class EditorApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private post(path: string, body?: unknown): Promise<Response> {
    return this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
  }

  async createSession(imageBase64: string, meshText?: string): Promise<SessionInfo> {
    const body: Record<string, string> = { image: imageBase64 };
    if (meshText !== undefined) body.mesh = meshText;
    return asJson(await this.post("/sessions", body));
  }

  async getMesh(id: string): Promise<MeshResponse> {
    return asJson(await this.fetchFn(`${this.baseUrl}/sessions/${id}/mesh`));
  }

  async moveVertex(id: string, i: number, j: number, m: number, n: number): Promise<MoveResult> {
    return asJson(await this.post(`/sessions/${id}/move-vertex`, { i, j, m, n }));
  }

  async undo(id: string): Promise<UndoRedoResult> {
    return asJson(await this.post(`/sessions/${id}/undo`));
  }

  async redo(id: string): Promise<UndoRedoResult> {
    return asJson(await this.post(`/sessions/${id}/redo`));
  }

  async preview(id: string, maxDim: number): Promise<PreviewResult> {
    const resp = await this.fetchFn(`${this.baseUrl}/sessions/${id}/preview?max_dim=${maxDim}`);
    if (!resp.ok) throw new Error(`preview failed: ${resp.status}`);
    const revision = Number(resp.headers.get("x-revision") ?? "-1");
    return { revision, blob: await resp.blob() };
  }

  async exportSession(id: string): Promise<ExportResult> {
    return asJson(await this.post(`/sessions/${id}/export`));
  }
}
