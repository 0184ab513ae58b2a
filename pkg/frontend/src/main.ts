// Browser entry point: wires the protocol client, renderer, notebook,
// and report form into the page. All game knowledge arrives over the
// session protocol; this file is DOM plumbing only.

import { Notebook } from "./notebook.js";
import {
  LiveChannel,
  ProtocolError,
  SessionClient,
  fetchTransport,
} from "./protocol.js";
import { GridRenderer, facingFromCursor, hoverTarget } from "./renderer.js";
import { CAUSES, ReportDraft } from "./report.js";

const TILE = 18;

const el = <T extends HTMLElement>(id: string): T => {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
};

const feed = (text: string): void => {
  const log = el<HTMLDivElement>("feed");
  const line = document.createElement("div");
  line.textContent = text;
  log.prepend(line);
  while (log.childElementCount > 60) {
    log.lastElementChild?.remove();
  }
};

const boot = async (): Promise<void> => {
  const base = window.location.origin;
  const client = new SessionClient(fetchTransport(base));
  const params = new URLSearchParams(window.location.search);
  const game = params.get("game") ?? "station";
  const seedParam = params.get("seed");
  const created = await client.create(
    game,
    seedParam !== null ? Number(seedParam) : undefined,
  );
  feed(`Session ${created.session_id.slice(0, 8)} — ${created.game}, seed ${created.seed}`);

  const canvas = el<HTMLCanvasElement>("grid");
  const surface = canvas.getContext("2d");
  if (!surface) {
    throw new Error("canvas 2d context unavailable");
  }
  const renderer = new GridRenderer(TILE);
  const draw = (): void =>
    renderer.renderFrame(surface, canvas.width, canvas.height, client.store);

  // Live channel with HTTP fallback: on drop we reconnect and resync.
  let live: LiveChannel | null = null;
  const connectLive = (): void => {
    const ws = new WebSocket(
      `${base.replace(/^http/, "ws")}/session/${client.id}/live`,
    );
    const adapter = {
      send: (data: string) => ws.send(data),
      close: () => ws.close(),
      onmessage: null as ((event: { data: string }) => void) | null,
      onclose: null as (() => void) | null,
    };
    ws.onmessage = (event) => adapter.onmessage?.({ data: String(event.data) });
    ws.onclose = () => adapter.onclose?.();
    ws.addEventListener("open", () => {
      live = new LiveChannel(adapter, () => {
        live = null;
        setTimeout(() => {
          connectLive();
          void client.resync().then(draw);
        }, 500);
      });
    });
  };
  connectLive();

  const send = async (payload: Record<string, unknown>) => {
    const response = live
      ? await live.command(payload).then((r) => {
          if (r.diff) {
            client.store.applyDiff(r.diff);
          }
          if (r.view) {
            client.store.applyView(r.view);
          }
          return r;
        })
      : await client.command(payload);
    draw();
    return response;
  };

  // -- movement and facing -------------------------------------------------
  const MOVE_KEYS: Record<string, string> = {
    w: "n",
    a: "w",
    s: "s",
    d: "e",
    ArrowUp: "n",
    ArrowLeft: "w",
    ArrowDown: "s",
    ArrowRight: "e",
  };
  document.addEventListener("keydown", (event) => {
    const direction = MOVE_KEYS[event.key];
    if (!direction || draft.isSubmitted) {
      return;
    }
    event.preventDefault();
    void send({ cmd: "move", direction }).then((r) => {
      if (r.text) {
        feed(r.text);
      }
    });
  });

  let lastFacing = "";
  let facingInFlight = false;
  canvas.addEventListener("mousemove", (event) => {
    const rect = canvas.getBoundingClientRect();
    const [px, py] = client.store.player;
    const name = facingFromCursor(
      (px + 0.5) * TILE,
      (py + 0.5) * TILE,
      event.clientX - rect.left,
      event.clientY - rect.top,
    );
    if (name && name !== lastFacing && !facingInFlight) {
      lastFacing = name;
      facingInFlight = true;
      void send({ cmd: "face", direction: name }).finally(() => {
        facingInFlight = false;
      });
    }
    const [cx, cy] = renderer.cellAt(
      event.clientX - rect.left,
      event.clientY - rect.top,
    );
    const target = hoverTarget(client.store, cx, cy);
    const tooltip = el<HTMLDivElement>("tooltip");
    if (target) {
      tooltip.textContent = target.objects.map((o) => o.kind).join(", ");
      tooltip.style.left = `${event.clientX + 12}px`;
      tooltip.style.top = `${event.clientY + 12}px`;
      tooltip.style.display = "block";
    } else {
      tooltip.style.display = "none";
    }
  });

  // -- inspect / read ------------------------------------------------------
  canvas.addEventListener("click", (event) => {
    const rect = canvas.getBoundingClientRect();
    const [x, y] = renderer.cellAt(
      event.clientX - rect.left,
      event.clientY - rect.top,
    );
    const tile = client.store.tileAt(x, y);
    const isTerminal = tile?.objects.some((o) => o.kind === "terminal");
    const payload = isTerminal
      ? { cmd: "read", x, y }
      : { cmd: "inspect", x, y };
    void send(payload)
      .then((r) => {
        if (r.message) {
          const modal = el<HTMLDivElement>("terminal-modal");
          el<HTMLDivElement>("terminal-meta").textContent =
            `${r.message.timestamp} — ${r.message.sender} (${r.message.kind})`;
          el<HTMLDivElement>("terminal-body").textContent =
            r.message.body + (r.message.reply ? `\n\n— ${r.message.reply}` : "");
          modal.style.display = "block";
        } else if (r.text) {
          feed(r.text);
        }
        refreshReportForm();
      })
      .catch((error: unknown) => {
        if (error instanceof ProtocolError) {
          feed(error.message);
        }
      });
  });
  el<HTMLButtonElement>("terminal-close").addEventListener("click", () => {
    el<HTMLDivElement>("terminal-modal").style.display = "none";
  });

  // -- notebook ------------------------------------------------------------
  const notebook = new Notebook(
    window.localStorage,
    `forensica.notebook.${created.seed}`,
  );
  const renderNotebook = (): void => {
    const list = el<HTMLUListElement>("notebook-list");
    list.replaceChildren(
      ...notebook.list().map((entry, index) => {
        const item = document.createElement("li");
        item.textContent = entry.text;
        item.addEventListener("dblclick", () => {
          notebook.remove(index);
          renderNotebook();
        });
        return item;
      }),
    );
  };
  el<HTMLButtonElement>("notebook-add").addEventListener("click", () => {
    const input = el<HTMLTextAreaElement>("notebook-input");
    notebook.add(input.value);
    input.value = "";
    renderNotebook();
  });
  renderNotebook();

  // -- report form ---------------------------------------------------------
  const draft = new ReportDraft(
    window.localStorage,
    `forensica.report.${created.seed}`,
  );
  const refreshReportForm = (): void => {
    const manifest = created.view.crew_manifest ?? [];
    el<HTMLDivElement>("manifest").textContent =
      manifest.length > 0 ? `Crew manifest: ${manifest.join(", ")}` : "";
  };
  el<HTMLButtonElement>("report-add").addEventListener("click", () => {
    const bodyId = el<HTMLInputElement>("report-body").value.trim();
    const name = el<HTMLInputElement>("report-name").value.trim();
    const cause = el<HTMLSelectElement>("report-cause").value;
    if (bodyId) {
      draft.setEntry(bodyId, { name, cause });
      feed(`Draft: ${bodyId} = ${name || "?"}, ${cause || "?"}`);
    }
  });
  const submitButton = el<HTMLButtonElement>("report-submit");
  submitButton.addEventListener("click", () => {
    submitButton.disabled = true;
    draft
      .submit(client)
      .then((r) => {
        el<HTMLDivElement>("score").textContent = `Score: ${r.score}`;
        el<HTMLPreElement>("truth").textContent = JSON.stringify(
          r.ground_truth,
          null,
          2,
        );
        el<HTMLDivElement>("score-overlay").style.display = "block";
        draw();
      })
      .catch((error: unknown) => {
        submitButton.disabled = false;
        feed(error instanceof Error ? error.message : String(error));
      });
  });

  const causeSelect = el<HTMLSelectElement>("report-cause");
  causeSelect.replaceChildren(
    new Option("— cause —", ""),
    ...CAUSES.map((cause) => new Option(cause, cause)),
  );

  refreshReportForm();
  draw();
};

void boot().catch((error: unknown) => {
  feed(error instanceof Error ? error.message : String(error));
});
