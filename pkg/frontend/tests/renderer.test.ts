import { describe, expect, it } from "vitest";

import { TileStore, type Diff, type TilePayload } from "../src/protocol.js";
import {
  GridRenderer,
  computeCells,
  facingFromCursor,
  glyphFor,
  hoverTarget,
  type DrawSurface,
} from "../src/renderer.js";

const tile = (
  x: number,
  y: number,
  terrain = "floor",
  objects: string[] = [],
): TilePayload => ({
  x,
  y,
  terrain,
  objects: objects.map((kind) => ({ kind, blocking: false })),
});

const litStore = (...tiles: TilePayload[]): TileStore => {
  const store = new TileStore();
  const diff: Diff = {
    player: [0, 0],
    facing: [0, -1],
    phase: "Exploring",
    tiles_added: tiles,
    tiles_removed: [],
  };
  store.applyDiff(diff);
  return store;
};

describe("glyphs", () => {
  it("draws the topmost object, else the terrain", () => {
    expect(glyphFor(tile(0, 0, "wall"))).toBe("#");
    expect(glyphFor(tile(0, 0, "floor", ["terminal"]))).toBe("!");
    expect(glyphFor(tile(0, 0, "floor", ["scorch-mark", "body"]))).toBe("&");
  });
});

describe("facingFromCursor", () => {
  it("buckets the cursor angle to 8 directions", () => {
    expect(facingFromCursor(100, 100, 150, 100)).toBe("e");
    expect(facingFromCursor(100, 100, 100, 50)).toBe("n");
    expect(facingFromCursor(100, 100, 100, 150)).toBe("s");
    expect(facingFromCursor(100, 100, 50, 100)).toBe("w");
    expect(facingFromCursor(100, 100, 150, 50)).toBe("ne");
    expect(facingFromCursor(100, 100, 50, 150)).toBe("sw");
  });

  it("yields nothing when the cursor sits on the player", () => {
    expect(facingFromCursor(100, 100, 100, 100)).toBeNull();
  });
});

describe("hoverTarget", () => {
  it("shows tooltips only for lit tiles with objects", () => {
    const store = litStore(tile(1, 1, "floor", ["desk"]), tile(2, 1));
    expect(hoverTarget(store, 1, 1)?.objects[0].kind).toBe("desk");
    // Lit but empty: no tooltip.
    expect(hoverTarget(store, 2, 1)).toBeNull();
  });

  it("never surfaces an unlit tile", () => {
    const store = litStore(tile(1, 1, "floor", ["desk"]));
    store.applyDiff({
      player: [0, 0],
      facing: [1, 0],
      phase: "Exploring",
      tiles_added: [],
      tiles_removed: [[1, 1]],
    });
    // Still discovered (drawn dimmed), but hover yields nothing.
    expect(store.tileAt(1, 1)).toBeDefined();
    expect(hoverTarget(store, 1, 1)).toBeNull();
  });
});

describe("GridRenderer", () => {
  const recordingSurface = () => {
    const calls: Array<{ op: string; args: unknown[] }> = [];
    const surface: DrawSurface = {
      fillStyle: "",
      font: "",
      textAlign: "",
      textBaseline: "",
      fillRect: (...args) => calls.push({ op: "rect", args }),
      fillText: (...args) => calls.push({ op: "text", args }),
    };
    return { surface, calls };
  };

  it("draws every discovered cell plus the player glyph", () => {
    const store = litStore(tile(0, 0), tile(1, 0, "wall"));
    const { surface, calls } = recordingSurface();
    new GridRenderer(10).renderFrame(surface, 100, 100, store);
    const texts = calls.filter((c) => c.op === "text");
    expect(texts).toHaveLength(3); // two tiles + "@"
    expect(texts[texts.length - 1].args[0]).toBe("@");
  });

  it("dims remembered-but-unlit cells", () => {
    const store = litStore(tile(0, 0));
    store.applyDiff({
      player: [5, 5],
      facing: [0, 1],
      phase: "Exploring",
      tiles_added: [],
      tiles_removed: [[0, 0]],
    });
    const styles: string[] = [];
    const surface: DrawSurface = {
      set fillStyle(value: string) {
        styles.push(value);
      },
      get fillStyle() {
        return styles[styles.length - 1] ?? "";
      },
      font: "",
      textAlign: "",
      textBaseline: "",
      fillRect: () => undefined,
      fillText: () => undefined,
    } as DrawSurface;
    new GridRenderer(10).renderFrame(surface, 100, 100, store);
    expect(styles.some((s) => s.startsWith("rgb("))).toBe(true);
  });

  it("maps pixels back to cells", () => {
    const renderer = new GridRenderer(18);
    expect(renderer.cellAt(0, 0)).toEqual([0, 0]);
    expect(renderer.cellAt(37, 19)).toEqual([2, 1]);
  });
});

describe("computeCells", () => {
  it("marks lit and remembered cells", () => {
    const store = litStore(tile(0, 0), tile(1, 0));
    store.applyDiff({
      player: [0, 0],
      facing: [0, -1],
      phase: "Exploring",
      tiles_added: [],
      tiles_removed: [[1, 0]],
    });
    const byPos = new Map(computeCells(store).map((c) => [`${c.x},${c.y}`, c]));
    expect(byPos.get("0,0")?.lit).toBe(true);
    expect(byPos.get("1,0")?.lit).toBe(false);
  });
});
