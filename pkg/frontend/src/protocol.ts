// Protocol client for the forensica session service (docs/protocol.md).
// All game semantics live server-side; this module only tracks what the
// server has shown us and never invents or caches anything else.

export type Vec2 = [number, number];

export interface TileObject {
  kind: string;
  blocking: boolean;
}

export interface TilePayload {
  x: number;
  y: number;
  terrain: string;
  objects: TileObject[];
}

export interface Diff {
  player: Vec2;
  facing: Vec2;
  phase: string;
  tiles_added: TilePayload[];
  tiles_removed: Vec2[];
}

export interface TerminalMessage {
  sender: string;
  timestamp: string;
  kind: string;
  body: string;
  reply: string | null;
}

export interface ClientView {
  game: string;
  phase: string;
  player: Vec2;
  facing: Vec2;
  visible: TilePayload[];
  discovered_count: number;
  crew_manifest?: string[];
  bodies_found?: string[];
  score?: number;
  ground_truth?: unknown;
}

export interface CreateResponse {
  session_id: string;
  seed: number;
  game: string;
  ttl_seconds: number;
  view: ClientView;
}

export interface CommandResponse {
  ok: boolean;
  moved?: boolean;
  text?: string;
  message?: TerminalMessage;
  score?: number;
  ground_truth?: unknown;
  view?: ClientView;
  summary?: Record<string, number>;
  diff?: Diff;
}

export class ProtocolError extends Error {
  public constructor(
    public readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ProtocolError";
  }
}

const tileKey = (x: number, y: number): string => `${x},${y}`;

/**
 * The client's picture of the world: every tile the torch currently
 * lights plus everything seen before (kept dimmed). Applying each diff
 * in order reproduces the server's visible set exactly; `resync`
 * replaces it wholesale after a lost channel.
 */
export class TileStore {
  private readonly tiles = new Map<string, TilePayload>();
  private readonly lit = new Set<string>();
  public player: Vec2 = [0, 0];
  public facing: Vec2 = [0, -1];
  public phase = "Exploring";

  public applyView(view: ClientView): void {
    this.lit.clear();
    this.player = view.player;
    this.facing = view.facing;
    this.phase = view.phase;
    for (const tile of view.visible) {
      const key = tileKey(tile.x, tile.y);
      this.tiles.set(key, tile);
      this.lit.add(key);
    }
  }

  public applyDiff(diff: Diff): void {
    this.player = diff.player;
    this.facing = diff.facing;
    this.phase = diff.phase;
    for (const tile of diff.tiles_added) {
      const key = tileKey(tile.x, tile.y);
      this.tiles.set(key, tile);
      this.lit.add(key);
    }
    for (const [x, y] of diff.tiles_removed) {
      this.lit.delete(tileKey(x, y));
    }
  }

  public isLit(x: number, y: number): boolean {
    return this.lit.has(tileKey(x, y));
  }

  public tileAt(x: number, y: number): TilePayload | undefined {
    return this.tiles.get(tileKey(x, y));
  }

  public litCount(): number {
    return this.lit.size;
  }

  public discoveredCount(): number {
    return this.tiles.size;
  }

  public discovered(): TilePayload[] {
    return [...this.tiles.values()];
  }
}

export interface Transport {
  post(path: string, body: unknown): Promise<{ status: number; json: unknown }>;
}

export const fetchTransport = (baseUrl: string): Transport => ({
  async post(path, body) {
    const response = await fetch(baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return { status: response.status, json: await response.json() };
  },
});

/**
 * One session against the service. Commands are serialized: user input
 * is debounced to a single in-flight request, and later calls queue
 * behind it in order.
 */
export class SessionClient {
  public readonly store = new TileStore();
  private sessionId = "";
  private queue: Promise<unknown> = Promise.resolve();

  public constructor(private readonly transport: Transport) {}

  public get id(): string {
    return this.sessionId;
  }

  public async create(game: string, seed?: number): Promise<CreateResponse> {
    const { status, json } = await this.transport.post("/session", {
      game,
      seed: seed ?? null,
    });
    if (status !== 200) {
      throw new ProtocolError(status, `create failed: ${JSON.stringify(json)}`);
    }
    const created = json as CreateResponse;
    this.sessionId = created.session_id;
    this.store.applyView(created.view);
    return created;
  }

  private enqueue<T>(work: () => Promise<T>): Promise<T> {
    const next = this.queue.then(work, work);
    this.queue = next.catch(() => undefined);
    return next;
  }

  public command(payload: Record<string, unknown>): Promise<CommandResponse> {
    return this.enqueue(async () => {
      const { status, json } = await this.transport.post(
        `/session/${this.sessionId}/cmd`,
        payload,
      );
      if (status !== 200) {
        const detail = (json as { detail?: string }).detail ?? "command failed";
        throw new ProtocolError(status, detail);
      }
      const response = json as CommandResponse;
      if (response.diff) {
        this.store.applyDiff(response.diff);
      }
      if (response.view) {
        this.store.applyView(response.view);
      }
      return response;
    });
  }

  public move(direction: string): Promise<CommandResponse> {
    return this.command({ cmd: "move", direction });
  }

  public face(direction: string): Promise<CommandResponse> {
    return this.command({ cmd: "face", direction });
  }

  public inspect(x: number, y: number): Promise<CommandResponse> {
    return this.command({ cmd: "inspect", x, y });
  }

  public read(x: number, y: number): Promise<CommandResponse> {
    return this.command({ cmd: "read", x, y });
  }

  public report(
    entries: Record<string, { name: string; cause: string }>,
  ): Promise<CommandResponse> {
    return this.command({ cmd: "report", entries });
  }

  public resync(): Promise<CommandResponse> {
    return this.command({ cmd: "resync" });
  }
}

export interface LiveSocket {
  send(data: string): void;
  close(): void;
  onmessage: ((event: { data: string }) => void) | null;
  onclose: (() => void) | null;
}

/**
 * WebSocket mirror of the command endpoint. Responses come back in
 * send order; on close the owner should reconnect and `resync`.
 */
export class LiveChannel {
  private readonly pending: Array<{
    resolve: (value: CommandResponse) => void;
    reject: (error: Error) => void;
  }> = [];

  public constructor(
    private readonly socket: LiveSocket,
    private readonly onDrop: () => void,
  ) {
    socket.onmessage = (event) => this.receive(event.data);
    socket.onclose = () => this.drop();
  }

  public command(payload: Record<string, unknown>): Promise<CommandResponse> {
    return new Promise((resolve, reject) => {
      this.pending.push({ resolve, reject });
      this.socket.send(JSON.stringify(payload));
    });
  }

  private receive(data: string): void {
    const frame = JSON.parse(data) as CommandResponse & {
      error?: string;
      code?: number;
    };
    const waiter = this.pending.shift();
    if (!waiter) {
      return;
    }
    if (frame.ok === false) {
      waiter.reject(new ProtocolError(frame.code ?? 0, frame.error ?? "error"));
    } else {
      waiter.resolve(frame);
    }
  }

  private drop(): void {
    while (this.pending.length > 0) {
      this.pending.shift()?.reject(new ProtocolError(0, "channel closed"));
    }
    this.onDrop();
  }
}
