import { AnnotationApi, ConflictError } from "./api.js";
import { LearningCurve } from "./curve.js";
import { SessionQuery, SessionStatus } from "./types.js";

/** Annotation flow state machine.
 *
 * Holds the current query plus a draft label per token, pre-filled with the
 * ensemble suggestions.  Every mutation validates against the server's
 * declared label set, so the UI can never submit an invented tag.  Drafts
 * are kept per sentence id: a conflict (stale query) refetches the next
 * query without losing edits made to other sentences.
 */
export class AnnotationController {
  query: SessionQuery | null = null;
  status: SessionStatus | null = null;
  draft: string[] = [];
  exhausted = false;
  readonly curve = new LearningCurve();
  private readonly savedDrafts = new Map<string, string[]>();

  constructor(private readonly api: AnnotationApi) {}

  get palette(): string[] {
    return this.query ? this.query.labels : [];
  }

  async refreshStatus(): Promise<SessionStatus> {
    this.status = await this.api.status();
    this.curve.record(this.status);
    return this.status;
  }

  async loadNext(): Promise<SessionQuery | null> {
    const query = await this.api.next();
    if (query === null) {
      this.query = null;
      this.draft = [];
      this.exhausted = true;
      return null;
    }
    this.query = query;
    this.draft =
      this.savedDrafts.get(query.sentence_id) ??
      query.tokens.map((t) => t.suggestion);
    return query;
  }

  private checkTag(tag: string): void {
    if (!this.query) throw new Error("no query loaded");
    if (!this.query.labels.includes(tag)) {
      throw new Error(`tag ${JSON.stringify(tag)} not in the label set`);
    }
  }

  setLabel(index: number, tag: string): void {
    this.checkTag(tag);
    if (index < 0 || index >= this.draft.length) {
      throw new Error(`token index ${index} out of range`);
    }
    this.draft[index] = tag;
  }

  /** Click-to-cycle: advance one token to the next tag in the palette. */
  cycleLabel(index: number): string {
    if (!this.query) throw new Error("no query loaded");
    const current = this.draft[index];
    if (current === undefined) {
      throw new Error(`token index ${index} out of range`);
    }
    const palette = this.query.labels;
    const next = palette[(palette.indexOf(current) + 1) % palette.length]!;
    this.draft[index] = next;
    return next;
  }

  /** Span drag: one tag across an inclusive token range (flat tag scheme:
   * all tokens of a phrase share the tag). */
  applySpan(start: number, end: number, tag: string): void {
    this.checkTag(tag);
    if (start > end || start < 0 || end >= this.draft.length) {
      throw new Error(`bad span [${start}, ${end}]`);
    }
    for (let i = start; i <= end; i++) this.draft[i] = tag;
  }

  /** Token indices where the draft differs from the server suggestion. */
  diffFromSuggestions(): number[] {
    if (!this.query) return [];
    return this.query.tokens
      .map((t, i) => (this.draft[i] === t.suggestion ? -1 : i))
      .filter((i) => i >= 0);
  }

  /** Submission is enabled only when every token carries a known tag. */
  canSubmit(): boolean {
    return (
      this.query !== null &&
      this.draft.length === this.query.tokens.length &&
      this.draft.every((tag) => this.query!.labels.includes(tag))
    );
  }

  /** Submit the draft; returns true when the labels were accepted.
   * On conflict the stale draft is parked and the next query is fetched. */
  async submit(): Promise<boolean> {
    if (!this.query || !this.canSubmit()) {
      throw new Error("nothing submittable");
    }
    const id = this.query.sentence_id;
    try {
      await this.api.label(id, [...this.draft]);
    } catch (err) {
      if (err instanceof ConflictError) {
        this.savedDrafts.set(id, [...this.draft]);
        await this.loadNext();
        return false;
      }
      throw err;
    }
    this.savedDrafts.delete(id);
    this.query = null;
    this.draft = [];
    await this.refreshStatus();
    return true;
  }
}
