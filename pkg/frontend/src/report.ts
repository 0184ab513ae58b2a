// Fate-report draft: one row per discovered body, free-text name plus
// a cause dropdown. The draft persists across page reloads in local
// storage; submission goes through the session client exactly once.

import type { KeyValueStorage } from "./notebook.js";
import type { CommandResponse, SessionClient } from "./protocol.js";

export const CAUSES = [
  "BurnedByAnomaly",
  "Fire",
  "Exposure",
  "Explosion",
] as const;

export interface DraftEntry {
  name: string;
  cause: string;
}

export class ReportDraft {
  private entries: Record<string, DraftEntry> = {};
  private submitted = false;

  public constructor(
    private readonly storage: KeyValueStorage,
    private readonly key: string,
  ) {
    const raw = storage.getItem(key);
    if (raw !== null) {
      try {
        this.entries = JSON.parse(raw) as Record<string, DraftEntry>;
      } catch {
        this.entries = {};
      }
    }
  }

  public get isSubmitted(): boolean {
    return this.submitted;
  }

  public entryFor(bodyId: string): DraftEntry {
    return this.entries[bodyId] ?? { name: "", cause: "" };
  }

  public setEntry(bodyId: string, entry: DraftEntry): void {
    this.entries[bodyId] = entry;
    this.storage.setItem(this.key, JSON.stringify(this.entries));
  }

  public filledEntries(): Record<string, DraftEntry> {
    const filled: Record<string, DraftEntry> = {};
    for (const [bodyId, entry] of Object.entries(this.entries)) {
      if (entry.name !== "" || entry.cause !== "") {
        filled[bodyId] = entry;
      }
    }
    return filled;
  }

  public async submit(client: SessionClient): Promise<CommandResponse> {
    if (this.submitted) {
      throw new Error("report already submitted");
    }
    const response = await client.report(this.filledEntries());
    this.submitted = true;
    return response;
  }
}
