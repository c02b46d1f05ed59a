import {
  LabelResponse,
  LabelResponseSchema,
  QuerySchema,
  RetrainResponse,
  RetrainResponseSchema,
  SessionQuery,
  SessionStatus,
  StatusSchema,
} from "./types.js";

/** The outstanding query changed under us (another submission won). */
export class ConflictError extends Error {}

/** The server rejected the submission as malformed; the pool is untouched. */
export class RejectedError extends Error {}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

/** Typed client for the annotation protocol.
 *
 * Submissions are idempotent by (sentence_id, labels): a network failure is
 * retried with the identical payload and a duplicate acceptance is treated
 * as success.
 */
export class AnnotationApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
    private readonly retries = 2,
  ) {}

  async status(): Promise<SessionStatus> {
    const resp = await this.fetchFn(`${this.baseUrl}/session/status`);
    return StatusSchema.parse(await resp.json());
  }

  /** Next queried sentence, or null when the unlabeled pool is exhausted. */
  async next(): Promise<SessionQuery | null> {
    const resp = await this.fetchFn(`${this.baseUrl}/session/next`);
    if (resp.status === 404) return null;
    return QuerySchema.parse(await resp.json());
  }

  async label(sentenceId: string, labels: string[]): Promise<LabelResponse> {
    const body = JSON.stringify({ sentence_id: sentenceId, labels });
    let lastError: unknown;
    for (let attempt = 0; attempt <= this.retries; attempt++) {
      let resp;
      try {
        resp = await this.fetchFn(`${this.baseUrl}/session/label`, {
          method: "POST",
          headers: { "Content-Type": "application/json" },
          body,
        });
      } catch (err) {
        lastError = err; // network failure: retry the identical payload
        continue;
      }
      if (resp.status === 409) {
        throw new ConflictError(`stale query for ${sentenceId}`);
      }
      if (resp.status >= 400) {
        throw new RejectedError(`submission rejected (${resp.status})`);
      }
      return LabelResponseSchema.parse(await resp.json());
    }
    throw lastError instanceof Error ? lastError : new Error(String(lastError));
  }

  async retrain(): Promise<RetrainResponse> {
    const resp = await this.fetchFn(`${this.baseUrl}/session/retrain`, {
      method: "POST",
    });
    return RetrainResponseSchema.parse(await resp.json());
  }
}
