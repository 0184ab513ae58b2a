// Canvas glyph-grid renderer with a torch-lighting overlay. Cell
// layout is computed as plain data so it can be tested without a DOM;
// the draw step is a thin immediate-mode pass over those cells.

import type { TilePayload, TileStore, Vec2 } from "./protocol.js";

export const TERRAIN_GLYPHS: Record<string, string> = {
  sand: ",",
  floor: ".",
  road: "=",
  water: "~",
  wall: "#",
  rubble: "%",
  door: "+",
  snow: "*",
};

export const OBJECT_GLYPHS: Record<string, string> = {
  plaque: "P",
  "statue-fragment": "s",
  pew: "n",
  altar: "A",
  engraving: "E",
  fence: "f",
  table: "t",
  chair: "h",
  cutlery: "c",
  toy: "y",
  perfume: "p",
  crop: "v",
  weed: '"',
  "cattle-skeleton": "k",
  "predator-skeleton": "K",
  desk: "D",
  "lab-bench": "L",
  "specimen-rig": "R",
  "fuel-barrel": "B",
  "mess-table": "T",
  counter: "C",
  bunk: "b",
  footlocker: "l",
  "weapons-locker": "W",
  crate: "x",
  "coat-rack": "r",
  terminal: "!",
  body: "&",
  "scorch-mark": "^",
};

export const TERRAIN_COLORS: Record<string, string> = {
  sand: "#b9a57c",
  floor: "#9a9a9a",
  road: "#8a7a5a",
  water: "#4a7ab5",
  wall: "#d8d8d8",
  rubble: "#77625a",
  door: "#c8a050",
  snow: "#e8eef5",
};

export interface Cell {
  x: number;
  y: number;
  glyph: string;
  color: string;
  lit: boolean;
}

export const glyphFor = (tile: TilePayload): string => {
  const top = tile.objects[tile.objects.length - 1];
  if (top) {
    return OBJECT_GLYPHS[top.kind] ?? "?";
  }
  return TERRAIN_GLYPHS[tile.terrain] ?? "?";
};

/**
 * Every discovered tile as a drawable cell. Currently lit tiles draw
 * at full strength; remembered-but-dark tiles are dimmed by the
 * renderer and never show tooltips.
 */
export const computeCells = (store: TileStore): Cell[] =>
  store.discovered().map((tile) => ({
    x: tile.x,
    y: tile.y,
    glyph: glyphFor(tile),
    color: TERRAIN_COLORS[tile.terrain] ?? "#999999",
    lit: store.isLit(tile.x, tile.y),
  }));

export const DIRECTIONS: Array<{ name: string; vec: Vec2 }> = [
  { name: "e", vec: [1, 0] },
  { name: "se", vec: [1, 1] },
  { name: "s", vec: [0, 1] },
  { name: "sw", vec: [-1, 1] },
  { name: "w", vec: [-1, 0] },
  { name: "nw", vec: [-1, -1] },
  { name: "n", vec: [0, -1] },
  { name: "ne", vec: [1, -1] },
];

/**
 * Facing follows the cursor: the angle from the player's cell to the
 * pointer, bucketed to the nearest of the eight directions. Screen y
 * grows downward, matching world y growing southward.
 */
export const facingFromCursor = (
  playerPx: number,
  playerPy: number,
  cursorX: number,
  cursorY: number,
): string | null => {
  const dx = cursorX - playerPx;
  const dy = cursorY - playerPy;
  if (dx === 0 && dy === 0) {
    return null;
  }
  const angle = Math.atan2(dy, dx);
  const bucket = Math.round(angle / (Math.PI / 4));
  return DIRECTIONS[(bucket + 8) % 8].name;
};

/**
 * Hover target for tooltips: only currently lit tiles with at least
 * one object qualify — unlit or empty tiles yield nothing, so the
 * client can never surface information the torch does not.
 */
export const hoverTarget = (
  store: TileStore,
  x: number,
  y: number,
): TilePayload | null => {
  if (!store.isLit(x, y)) {
    return null;
  }
  const tile = store.tileAt(x, y);
  return tile && tile.objects.length > 0 ? tile : null;
};

export interface DrawSurface {
  fillStyle: string | CanvasGradient | CanvasPattern;
  font: string;
  textAlign: string;
  textBaseline: string;
  fillRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
}

export class GridRenderer {
  public constructor(
    private readonly tileSize = 18,
    private readonly dimAlpha = 0.35,
  ) {}

  public renderFrame(
    surface: DrawSurface,
    width: number,
    height: number,
    store: TileStore,
  ): void {
    surface.fillStyle = "#101014";
    surface.fillRect(0, 0, width, height);
    surface.font = `${this.tileSize - 2}px monospace`;
    surface.textAlign = "center";
    surface.textBaseline = "middle";
    for (const cell of computeCells(store)) {
      surface.fillStyle = cell.lit
        ? cell.color
        : dim(cell.color, this.dimAlpha);
      surface.fillText(
        cell.glyph,
        (cell.x + 0.5) * this.tileSize,
        (cell.y + 0.5) * this.tileSize,
      );
    }
    const [px, py] = store.player;
    surface.fillStyle = "#ffd75f";
    surface.fillText("@", (px + 0.5) * this.tileSize, (py + 0.5) * this.tileSize);
  }

  public cellAt(pixelX: number, pixelY: number): Vec2 {
    return [
      Math.floor(pixelX / this.tileSize),
      Math.floor(pixelY / this.tileSize),
    ];
  }
}

const dim = (hex: string, alpha: number): string => {
  const value = parseInt(hex.slice(1), 16);
  const r = Math.round(((value >> 16) & 0xff) * alpha);
  const g = Math.round(((value >> 8) & 0xff) * alpha);
  const b = Math.round((value & 0xff) * alpha);
  return `rgb(${r},${g},${b})`;
};
