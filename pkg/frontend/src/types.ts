/** Wire types of the edit-service protocol (docs/PROTOCOL.md). */

export interface MeshJson {
  cols: number;
  rows: number;
  width: number;
  height: number;
  /** vertices[j][i] = [m, n] position of grid vertex (column i, row j). */
  vertices: number[][][];
}

export interface SessionInfo {
  id: string;
  revision: number;
  width: number;
  height: number;
  mesh: MeshJson;
}

export interface MeshResponse {
  revision: number;
  mesh: MeshJson;
}

export interface MoveResult {
  accepted: boolean;
  revision: number;
  invalid_cells?: [number, number][];
}

export interface UndoRedoResult {
  undone?: boolean;
  redone?: boolean;
  revision: number;
  mesh: MeshJson;
}

export interface ExportResult {
  revision: number;
  image_path: string;
  mesh_path: string;
  flow_path: string;
}

export interface PreviewResult {
  revision: number;
  blob: Blob;
}

export function cloneMesh(mesh: MeshJson): MeshJson {
  return {
    cols: mesh.cols,
    rows: mesh.rows,
    width: mesh.width,
    height: mesh.height,
    vertices: mesh.vertices.map((row) => row.map((v) => [v[0], v[1]])),
  };
}
