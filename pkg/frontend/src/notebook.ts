// Player notebook: free-form notes kept entirely client-side. The
// server never sees notebook content and the notebook never receives
// server data — it exists so players can write their own case file.

export interface KeyValueStorage {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export interface NotebookEntry {
  createdAt: number;
  text: string;
}

export class Notebook {
  private entries: NotebookEntry[] = [];

  public constructor(
    private readonly storage: KeyValueStorage,
    private readonly key: string,
    private readonly now: () => number = Date.now,
  ) {
    const raw = storage.getItem(key);
    if (raw !== null) {
      try {
        this.entries = JSON.parse(raw) as NotebookEntry[];
      } catch {
        this.entries = [];
      }
    }
  }

  public list(): readonly NotebookEntry[] {
    return this.entries;
  }

  public add(text: string): void {
    const trimmed = text.trim();
    if (trimmed.length === 0) {
      return;
    }
    this.entries.push({ createdAt: this.now(), text: trimmed });
    this.persist();
  }

  public remove(index: number): void {
    this.entries.splice(index, 1);
    this.persist();
  }

  private persist(): void {
    this.storage.setItem(this.key, JSON.stringify(this.entries));
  }
}
