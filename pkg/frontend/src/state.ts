import type { Decision, QueueItem, QueuePage, Stats } from "./types.js";

export interface Banner {
  kind: "conflict" | "rejected" | "offline" | "info";
  message: string;
}

/** Client-side view model. Never authoritative: every mutation mirrors an
 * acknowledged service response, so a reload reconstructs the same state. */
export class ReviewState {
  items: QueueItem[] = [];
  index = 0;
  nextCursor: string | null = null;
  stats: Stats | null = null;
  decidedThisSession = 0;
  banner: Banner | null = null;
  private corrected = new Map<string, string>();

  current(): QueueItem | null {
    return this.items[this.index] ?? null;
  }

  isDrained(): boolean {
    return this.items.length === 0 && this.nextCursor === null;
  }

  loadPage(page: QueuePage): void {
    const known = new Set(this.items.map((item) => item.id));
    this.items.push(...page.items.filter((item) => !known.has(item.id)));
    this.nextCursor = page.next_cursor;
  }

  setStats(stats: Stats): void {
    this.stats = stats;
  }

  next(): void {
    if (this.index < this.items.length - 1) this.index++;
  }

  prev(): void {
    if (this.index > 0) this.index--;
  }

  correctedText(id: string): string {
    return this.corrected.get(id) ?? "";
  }

  setCorrectedText(id: string, text: string): void {
    this.corrected.set(id, text);
  }

  /** mark_contrastive needs a manually derived correct variant that actually
   * differs from the machine reference; other decisions are always valid. */
  canSubmit(decision: Decision): boolean {
    const item = this.current();
    if (item === null) return false;
    if (decision !== "mark_contrastive") return true;
    const text = this.correctedText(item.id).trim();
    return text.length > 0 && text !== item.machine_reference.trim();
  }

  /** Remove the acknowledged item and advance to the next card. */
  completeCurrent(): void {
    const item = this.current();
    if (item === null) return;
    this.corrected.delete(item.id);
    this.items.splice(this.index, 1);
    if (this.index >= this.items.length && this.index > 0) this.index--;
    this.decidedThisSession++;
    if (this.stats !== null && this.stats.pending > 0) this.stats.pending--;
    this.banner = null;
  }

  /** A 409 told us someone decided first (or the record moved on). If the
   * record is still pending we keep the card with its fresh version;
   * otherwise it leaves the queue. */
  applyConflict(
    id: string,
    currentVersion: number | null,
    currentStatus: string | null,
  ): void {
    const position = this.items.findIndex((item) => item.id === id);
    if (position < 0) return;
    if (currentStatus === "NEEDS_REVIEW" && currentVersion !== null) {
      this.items[position] = { ...this.items[position], version: currentVersion };
      this.banner = {
        kind: "conflict",
        message: `Record ${id} changed underneath you (now version ${currentVersion}); review it again.`,
      };
    } else {
      this.items.splice(position, 1);
      if (this.index >= this.items.length && this.index > 0) this.index--;
      this.banner = {
        kind: "conflict",
        message: `Record ${id} was already resolved elsewhere (${currentStatus ?? "unknown state"}).`,
      };
    }
  }

  setBanner(banner: Banner | null): void {
    this.banner = banner;
  }
}
