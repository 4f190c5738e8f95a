/** End-to-end editor behavior against the fake service: the drag loop,
 * request throttling, preview convergence, rejection snap-back, export. */

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { EditorApi } from "../src/api.js";
import { EditorController } from "../src/controller.js";
import { FakeService } from "./fake_service.js";

let svc: FakeService;
let controller: EditorController;
let urlCounter = 0;

function makeController(opts = {}): EditorController {
  return new EditorController(new EditorApi("", svc.fetch), {
    makePreviewUrl: () => `fake-url-${urlCounter++}`,
    ...opts,
  });
}

async function settle(ms = 3000): Promise<void> {
  await vi.advanceTimersByTimeAsync(ms);
}

beforeEach(() => {
  vi.useFakeTimers();
  svc = new FakeService(512, 384);
  controller = makeController();
});

afterEach(() => {
  vi.useRealTimers();
});

describe("session open", () => {
  it("loads the server mesh and fetches an initial preview", async () => {
    const opened = controller.open("cGxhY2Vob2xkZXI=");
    await settle();
    await opened;
    expect(controller.state.sessionId).toBe("s1");
    expect(controller.state.localMesh?.vertices[0][0]).toEqual([0, 0]);
    expect(controller.state.preview?.revision).toBe(0);
    expect(svc.previewRequests().length).toBe(1);
  });

  it("optional mesh text is forwarded", async () => {
    const opened = controller.open("aW1n", "tiltwarp-mesh 1\n...");
    await settle();
    await opened;
    const create = svc.log.find((r) => r.path === "/sessions");
    expect((create?.body as { mesh?: string }).mesh).toContain("tiltwarp-mesh");
  });
});

describe("drag loop", () => {
  it("drags a vertex 20 px, converges preview to the final revision, exports", async () => {
    const opened = controller.open("aW1n");
    await settle();
    await opened;
    controller.displayScale = 1; // display px == mesh px for the test

    // vertex (4, 3) sits at (256, 192); drag it 20 px right in 10 steps
    controller.pointerDown(256, 192);
    expect(controller.state.selected).toEqual([4, 3]);
    expect(controller.state.dragging).toBe(true);
    for (let step = 1; step <= 10; step++) {
      controller.pointerMove(256 + 2 * step, 192);
      await vi.advanceTimersByTimeAsync(30);
    }
    controller.pointerUp();
    await settle();

    const moves = svc.moveRequests();
    expect(moves.length).toBeGreaterThanOrEqual(1);
    expect(svc.mesh.vertices[3][4]).toEqual([276, 192]);
    expect(controller.state.localMesh?.vertices[3][4]).toEqual([276, 192]);

    // preview settled at the server revision, never more than one in flight
    expect(controller.state.preview?.revision).toBe(svc.revision);
    expect(controller.state.serverRevision).toBe(svc.revision);
    expect(svc.maxPreviewInFlight).toBeLessThanOrEqual(1);

    const path = await (async () => {
      const p = controller.exportSession();
      await settle();
      return p;
    })();
    expect(path).toContain("corrected.png");
    expect(svc.log.some((r) => r.path.endsWith("/export"))).toBe(true);
  });

  it("throttles move requests to the configured rate", async () => {
    const opened = controller.open("aW1n");
    await settle();
    await opened;
    controller.displayScale = 1;

    controller.pointerDown(256, 192);
    // 200 pointer moves over exactly one second of fake time
    for (let k = 0; k < 200; k++) {
      controller.pointerMove(256 + 0.1 * (k + 1), 192);
      await vi.advanceTimersByTimeAsync(5);
    }
    const during = svc.moveRequests().length;
    expect(during).toBeLessThanOrEqual(16); // 15/s cap plus the leading call
    expect(during).toBeGreaterThanOrEqual(10);

    controller.pointerUp();
    await settle();
    // trailing flush delivered the final pointer position
    expect(svc.mesh.vertices[3][4][0]).toBeCloseTo(276, 6);
  });

  it("rejected moves flash the cells and snap the handle back", async () => {
    const opened = controller.open("aW1n");
    await settle();
    await opened;
    controller.displayScale = 1;

    svc.rejectNextMove = true;
    controller.pointerDown(256, 192);
    controller.pointerMove(400, 300); // locally diverges while dragging
    expect(controller.state.localMesh?.vertices[3][4]).toEqual([400, 300]);
    controller.pointerUp();
    await settle();

    expect(controller.state.rejectedCells.length).toBeGreaterThan(0);
    // snap-back: local mesh reconciled to the unchanged server mesh
    expect(controller.state.localMesh?.vertices[3][4]).toEqual([256, 192]);
    expect(svc.revision).toBe(0);
    expect(controller.state.serverRevision).toBe(0);
  });

  it("keyboard nudge moves the selected vertex by 1 px", async () => {
    const opened = controller.open("aW1n");
    await settle();
    await opened;
    controller.displayScale = 1;
    controller.pointerDown(256, 192);
    controller.pointerUp();
    await settle();
    controller.nudge(1, 0);
    await settle();
    expect(svc.mesh.vertices[3][4]).toEqual([257, 192]);
  });
});

describe("preview discipline", () => {
  it("keeps at most one preview in flight under racing mutations", async () => {
    svc.previewLatencyMs = 80;
    const opened = controller.open("aW1n");
    await settle();
    await opened;
    controller.displayScale = 1;

    controller.pointerDown(256, 192);
    for (let k = 1; k <= 8; k++) {
      controller.pointerMove(256 + 3 * k, 192);
      await vi.advanceTimersByTimeAsync(70); // move cadence beats the preview latency
    }
    controller.pointerUp();
    await settle(5000);

    expect(svc.maxPreviewInFlight).toBe(1);
    expect(controller.state.preview?.revision).toBe(svc.revision);
    // coalescing: strictly fewer previews than accepted moves + initial
    expect(svc.previewsServed).toBeLessThanOrEqual(svc.moveRequests().length + 1);
  });

  it("refetches when the served preview is stale", async () => {
    svc.previewLatencyMs = 100;
    const opened = controller.open("aW1n");
    await settle();
    await opened;
    controller.displayScale = 1;

    // two quick accepted moves: the first preview snapshot is stale by the
    // time it arrives, so the client must fetch again
    controller.pointerDown(256, 192);
    controller.pointerMove(260, 192);
    await vi.advanceTimersByTimeAsync(90);
    controller.pointerMove(264, 192);
    controller.pointerUp();
    await settle(5000);

    expect(controller.state.preview?.revision).toBe(svc.revision);
    expect(svc.previewsServed).toBeGreaterThanOrEqual(2);
    expect(svc.maxPreviewInFlight).toBe(1);
  });
});

describe("undo/redo and failure handling", () => {
  it("undo restores the previous mesh and refreshes the preview", async () => {
    const opened = controller.open("aW1n");
    await settle();
    await opened;
    controller.displayScale = 1;
    controller.pointerDown(256, 192);
    controller.pointerMove(270, 200);
    controller.pointerUp();
    await settle();
    expect(svc.mesh.vertices[3][4]).toEqual([270, 200]);

    const undone = controller.undo();
    await settle();
    await undone;
    expect(controller.state.localMesh?.vertices[3][4]).toEqual([256, 192]);
    expect(controller.state.preview?.revision).toBe(svc.revision);

    const redone = controller.redo();
    await settle();
    await redone;
    expect(controller.state.localMesh?.vertices[3][4]).toEqual([270, 200]);
  });

  it("a transport failure parks the editor read-only", async () => {
    const opened = controller.open("aW1n");
    await settle();
    await opened;
    controller.displayScale = 1;

    svc.failNextRequest = true;
    controller.pointerDown(256, 192);
    controller.pointerMove(260, 192);
    controller.pointerUp();
    await settle();

    expect(controller.state.readOnly).toBe(true);
    // further edits are ignored in the banner state
    const before = svc.log.length;
    controller.pointerDown(256, 192);
    controller.pointerMove(280, 192);
    controller.pointerUp();
    await settle();
    expect(svc.log.length).toBe(before);
  });

  it("local mesh diverges from the server mesh only while dragging", async () => {
    const opened = controller.open("aW1n");
    await settle();
    await opened;
    controller.displayScale = 1;

    controller.pointerDown(256, 192);
    controller.pointerMove(300, 192);
    expect(controller.state.localMesh?.vertices[3][4]).toEqual([300, 192]);
    controller.pointerUp();
    await settle();
    // after quiescence both sides agree
    expect(controller.state.localMesh?.vertices[3][4]).toEqual(svc.mesh.vertices[3][4]);
  });
});
