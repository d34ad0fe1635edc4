// Input discipline: one accepted keypress issues exactly one act; presses
// during a pending act are dropped; protocol errors surface non-fatally
// and trigger a state resync.

import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { Controller } from "../src/input.js";
import type { ActResponse, HumanAction, Snapshot, Transport } from "../src/protocol.js";
import { ProtocolError } from "../src/protocol.js";
import { GameStore } from "../src/store.js";

const golden = JSON.parse(
  readFileSync(new URL("./fixtures/golden_session.json", import.meta.url), "utf-8"),
);
const createSnap: Snapshot = JSON.parse(golden.create);
const responses: ActResponse[] = golden.responses.map((r: string) => JSON.parse(r));

class FakeTransport implements Transport {
  actCalls: HumanAction[] = [];
  stateCalls = 0;
  failNext: Error | null = null;
  private queue: ActResponse[] = [...responses];
  private release: (() => void) | null = null;

  hold(): void {
    // next act blocks until releaseHeld() is called
    this.release = () => {};
  }

  releaseHeld(): void {
    const r = this.pendingResolve;
    this.pendingResolve = null;
    this.release = null;
    if (r) r();
  }

  private pendingResolve: (() => void) | null = null;

  listLevels(): Promise<string[]> {
    return Promise.resolve([golden.level]);
  }

  createSession(): Promise<Snapshot> {
    return Promise.resolve(createSnap);
  }

  getState(): Promise<Snapshot> {
    this.stateCalls += 1;
    return Promise.resolve(this.queue.length === responses.length ? createSnap : responses[responses.length - this.queue.length - 1].state);
  }

  async act(_sessionId: string, action: HumanAction): Promise<ActResponse> {
    this.actCalls.push(action);
    if (this.failNext) {
      const err = this.failNext;
      this.failNext = null;
      throw err;
    }
    if (this.release) {
      await new Promise<void>((resolve) => {
        this.pendingResolve = resolve;
      });
    }
    const next = this.queue.shift();
    if (!next) throw new ProtocolError("session-finished", "no more fixture steps");
    return next;
  }
}

function freshGame() {
  const transport = new FakeTransport();
  const store = new GameStore();
  store.applySnapshot(createSnap);
  const controller = new Controller(transport, store);
  return { transport, store, controller };
}

describe("input loop", () => {
  it("maps arrows, space and period to the protocol actions", async () => {
    const { transport, controller } = freshGame();
    for (const key of ["ArrowUp", "ArrowDown", "ArrowRight", "ArrowLeft", ".", " "]) {
      await controller.press(key);
    }
    expect(transport.actCalls).toEqual(["N", "S", "E", "W", "STAY", "SHOOT"]);
  });

  it("ignores unmapped keys entirely", async () => {
    const { transport, controller } = freshGame();
    expect(await controller.press("x")).toBe(false);
    expect(await controller.press("Enter")).toBe(false);
    expect(transport.actCalls).toEqual([]);
  });

  it("one keypress issues at most one act; mashing during a pending act is dropped", async () => {
    const { transport, store, controller } = freshGame();
    transport.hold();
    const first = controller.press("ArrowRight"); // blocks inside transport
    await Promise.resolve(); // let press reach the transport
    expect(store.view.pending).toBe(true);

    const mash: Promise<boolean>[] = [];
    for (let i = 0; i < 5; i++) mash.push(controller.press(" "));
    expect((await Promise.all(mash)).every((issued) => !issued)).toBe(true);

    transport.releaseHeld();
    expect(await first).toBe(true);
    expect(transport.actCalls).toEqual(["E"]);
    expect(store.view.pending).toBe(false);
    expect(store.view.snapshot!.step).toBe(responses[0].state.step); // advanced by exactly 1
  });

  it("step counter advances by exactly one per accepted press", async () => {
    const { store, controller } = freshGame();
    let expected = createSnap.step;
    for (const key of ["ArrowRight", "ArrowRight", "ArrowUp"]) {
      await controller.press(key);
      expected += 1;
      expect(store.view.snapshot!.step).toBe(expected);
    }
  });

  it("protocol errors surface non-fatally and resync state", async () => {
    const { transport, store, controller } = freshGame();
    transport.failNext = new ProtocolError("act-in-flight", "busy");
    expect(await controller.press("ArrowUp")).toBe(true);
    expect(transport.stateCalls).toBe(1); // resynced
    expect(store.view.pending).toBe(false);
    expect(store.view.snapshot).not.toBeNull();
  });

  it("connection loss resyncs and keeps playing", async () => {
    const { transport, store, controller } = freshGame();
    transport.failNext = new TypeError("fetch failed");
    await controller.press("ArrowUp");
    expect(transport.stateCalls).toBe(1);
    await controller.press("ArrowRight");
    expect(transport.actCalls).toEqual(["N", "E"]);
    expect(store.view.snapshot!.step).toBe(responses[0].state.step);
  });

  it("input stays disabled once the session has ended", async () => {
    const { transport, store, controller } = freshGame();
    const ended: Snapshot = { ...createSnap, status: "timed-out" };
    store.applySnapshot(ended);
    expect(await controller.press("ArrowUp")).toBe(false);
    expect(transport.actCalls).toEqual([]);
  });
});
