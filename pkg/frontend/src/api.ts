/** REST client for the pipeline service, with an offline retry queue.
 *
 * Every mutating call carries an idempotency key minted once per logical
 * submission; a retry after a network failure reuses the same key, so the
 * server records one logical score/decision no matter how many attempts
 * the network forced.
 */

import type {
  DecisionPayload,
  DecisionResponse,
  ExpertItem,
  PairOut,
  ScorePayload,
  ScoreResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiRequestError extends Error {
  constructor(
    message: string,
    readonly code: string,
    readonly status: number,
  ) {
    super(message);
  }
}

/** Network-level failure (offline, refused, timed out): retriable. */
export class NetworkError extends Error {}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new NetworkError(String(err));
    }
    const text = await response.text();
    const parsed = text ? JSON.parse(text) : null;
    if (!response.ok) {
      const code = parsed?.error?.code ?? "http_error";
      const message = parsed?.error?.message ?? `HTTP ${response.status}`;
      throw new ApiRequestError(message, code, response.status);
    }
    return parsed as T;
  }

  async reviewNext(annotator: string): Promise<PairOut | null> {
    const body = await this.request<{ pair: PairOut | null }>(
      "GET",
      `/review/next?annotator=${encodeURIComponent(annotator)}`,
    );
    return body.pair;
  }

  submitScore(payload: ScorePayload): Promise<ScoreResponse> {
    return this.request<ScoreResponse>("POST", "/review/score", payload);
  }

  async expertNext(operator: string, experiment?: string): Promise<ExpertItem | null> {
    const params = new URLSearchParams({ operator });
    if (experiment) {
      params.set("experiment", experiment);
    }
    const body = await this.request<{ item: ExpertItem | null }>(
      "GET",
      `/expert/next?${params.toString()}`,
    );
    return body.item;
  }

  submitDecision(payload: DecisionPayload): Promise<DecisionResponse> {
    return this.request<DecisionResponse>("POST", "/expert/decision", payload);
  }
}

interface Pending<T> {
  send: () => Promise<T>;
  resolve: (value: T) => void;
  reject: (err: unknown) => void;
}

/** FIFO queue of submissions that survived a network failure.
 *
 * A submission is enqueued with its already-minted idempotency key baked
 * into `send`; `flush()` replays in order and stops at the first failure
 * so ordering is preserved across reconnects.
 */
export class SubmissionQueue {
  private pending: Pending<unknown>[] = [];

  get size(): number {
    return this.pending.length;
  }

  /** Try now; on NetworkError park the submission and resolve later. */
  async submit<T>(send: () => Promise<T>): Promise<{ acked: T | null; queued: boolean }> {
    if (this.pending.length === 0) {
      try {
        return { acked: await send(), queued: false };
      } catch (err) {
        if (!(err instanceof NetworkError)) {
          throw err;
        }
      }
    }
    // already backed up, or the attempt above failed: park it
    const parked = new Promise<T>((resolve, reject) => {
      this.pending.push({ send, resolve, reject } as Pending<unknown>);
    });
    void parked.catch(() => undefined); // surfaced via flush()
    return { acked: null, queued: true };
  }

  /** Replay pending submissions; returns how many were acknowledged. */
  async flush(): Promise<number> {
    let acked = 0;
    while (this.pending.length > 0) {
      const head = this.pending[0]!;
      let value: unknown;
      try {
        value = await head.send();
      } catch (err) {
        if (err instanceof NetworkError) {
          return acked; // still offline; keep the queue intact
        }
        this.pending.shift();
        head.reject(err);
        throw err;
      }
      this.pending.shift();
      head.resolve(value);
      acked += 1;
    }
    return acked;
  }
}

export function randomKey(): string {
  const anyCrypto = globalThis.crypto as { randomUUID?: () => string } | undefined;
  if (anyCrypto?.randomUUID) {
    return anyCrypto.randomUUID();
  }
  return `k-${Date.now()}-${Math.random().toString(36).slice(2)}`;
}
