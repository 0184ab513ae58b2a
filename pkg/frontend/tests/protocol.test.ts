import { describe, expect, it } from "vitest";

import {
  LiveChannel,
  ProtocolError,
  SessionClient,
  TileStore,
  type Diff,
  type LiveSocket,
  type Transport,
} from "../src/protocol.js";

const tile = (x: number, y: number, terrain = "floor", objects: string[] = []) => ({
  x,
  y,
  terrain,
  objects: objects.map((kind) => ({ kind, blocking: false })),
});

const diff = (overrides: Partial<Diff>): Diff => ({
  player: [1, 1],
  facing: [0, -1],
  phase: "Exploring",
  tiles_added: [],
  tiles_removed: [],
  ...overrides,
});

describe("TileStore", () => {
  it("applies diffs to exactly mirror the server's lit set", () => {
    const store = new TileStore();
    store.applyDiff(diff({ tiles_added: [tile(1, 1), tile(2, 1)] }));
    expect(store.isLit(2, 1)).toBe(true);
    store.applyDiff(diff({ tiles_removed: [[2, 1]] }));
    expect(store.isLit(2, 1)).toBe(false);
    // The tile is remembered even though it is no longer lit.
    expect(store.tileAt(2, 1)?.terrain).toBe("floor");
    expect(store.litCount()).toBe(1);
    expect(store.discoveredCount()).toBe(2);
  });

  it("resync replaces the lit set wholesale", () => {
    const store = new TileStore();
    store.applyDiff(diff({ tiles_added: [tile(1, 1), tile(2, 1)] }));
    store.applyView({
      game: "Station",
      phase: "Exploring",
      player: [5, 5],
      facing: [1, 0],
      visible: [tile(5, 5)],
      discovered_count: 3,
    });
    expect(store.isLit(1, 1)).toBe(false);
    expect(store.isLit(5, 5)).toBe(true);
    expect(store.player).toEqual([5, 5]);
  });
});

const scriptedTransport = (
  responses: Array<{ status: number; json: unknown }>,
  log: Array<{ path: string; body: unknown }> = [],
): Transport => ({
  async post(path, body) {
    log.push({ path, body });
    const next = responses.shift();
    if (!next) {
      throw new Error("transport exhausted");
    }
    return next;
  },
});

describe("SessionClient", () => {
  it("creates a session and applies the initial view", async () => {
    const client = new SessionClient(
      scriptedTransport([
        {
          status: 200,
          json: {
            session_id: "abc",
            seed: 7,
            game: "Station",
            ttl_seconds: 1800,
            view: {
              game: "Station",
              phase: "Exploring",
              player: [3, 3],
              facing: [0, -1],
              visible: [tile(3, 3)],
              discovered_count: 1,
            },
          },
        },
      ]),
    );
    const created = await client.create("station", 7);
    expect(created.seed).toBe(7);
    expect(client.id).toBe("abc");
    expect(client.store.isLit(3, 3)).toBe(true);
  });

  it("serializes commands: one in flight, order preserved", async () => {
    const log: Array<{ path: string; body: unknown }> = [];
    let inFlight = 0;
    let maxInFlight = 0;
    const transport: Transport = {
      async post(path, body) {
        log.push({ path, body });
        inFlight += 1;
        maxInFlight = Math.max(maxInFlight, inFlight);
        await new Promise((resolve) => setTimeout(resolve, 5));
        inFlight -= 1;
        return { status: 200, json: { ok: true, moved: true, diff: diff({}) } };
      },
    };
    const client = new SessionClient(transport);
    await Promise.all([client.move("n"), client.move("e"), client.move("s")]);
    expect(maxInFlight).toBe(1);
    expect(log.map((c) => (c.body as { direction: string }).direction)).toEqual(
      ["n", "e", "s"],
    );
  });

  it("raises ProtocolError with the server's status", async () => {
    const client = new SessionClient(
      scriptedTransport([{ status: 409, json: { detail: "already submitted" } }]),
    );
    await expect(client.report({})).rejects.toMatchObject({
      status: 409,
      message: "already submitted",
    });
  });

  it("never stores fields beyond the documented tile payload", async () => {
    const client = new SessionClient(
      scriptedTransport([
        {
          status: 200,
          json: {
            ok: true,
            moved: true,
            diff: diff({ tiles_added: [tile(4, 4, "floor", ["body"])] }),
          },
        },
      ]),
    );
    await client.move("n");
    const stored = client.store.tileAt(4, 4);
    expect(Object.keys(stored ?? {}).sort()).toEqual([
      "objects",
      "terrain",
      "x",
      "y",
    ]);
  });
});

describe("LiveChannel", () => {
  const fakeSocket = (): LiveSocket & { sent: string[] } => {
    const socket = {
      sent: [] as string[],
      onmessage: null as ((event: { data: string }) => void) | null,
      onclose: null as (() => void) | null,
      send(data: string) {
        socket.sent.push(data);
      },
      close() {
        socket.onclose?.();
      },
    };
    return socket;
  };

  it("matches responses to commands in order", async () => {
    const socket = fakeSocket();
    const channel = new LiveChannel(socket, () => undefined);
    const first = channel.command({ cmd: "move", direction: "n" });
    const second = channel.command({ cmd: "resync" });
    socket.onmessage?.({ data: JSON.stringify({ ok: true, moved: true }) });
    socket.onmessage?.({ data: JSON.stringify({ ok: true, view: null }) });
    await expect(first).resolves.toMatchObject({ moved: true });
    await expect(second).resolves.toMatchObject({ ok: true });
    expect(socket.sent).toHaveLength(2);
  });

  it("rejects error frames with their code", async () => {
    const socket = fakeSocket();
    const channel = new LiveChannel(socket, () => undefined);
    const pending = channel.command({ cmd: "dance" });
    socket.onmessage?.({
      data: JSON.stringify({ ok: false, error: "unknown command: dance", code: 400 }),
    });
    await expect(pending).rejects.toBeInstanceOf(ProtocolError);
  });

  it("rejects all pending commands and signals on close", async () => {
    const socket = fakeSocket();
    let dropped = false;
    const channel = new LiveChannel(socket, () => {
      dropped = true;
    });
    const pending = channel.command({ cmd: "resync" });
    socket.close();
    await expect(pending).rejects.toThrow("channel closed");
    expect(dropped).toBe(true);
  });
});
