import type { DecisionAck, DecisionRequest, QueuePage, Stats } from "./types.js";

/** Stale expected_version: carries the record's current state from the service. */
export class ConflictError extends Error {
  constructor(
    public readonly currentVersion: number | null,
    public readonly currentStatus: string | null,
    message: string,
  ) {
    super(message);
    this.name = "ConflictError";
  }
}

/** 401/422: the request itself was rejected; show inline, do not retry as-is. */
export class RejectedError extends Error {
  constructor(public readonly status: number, message: string) {
    super(message);
    this.name = "RejectedError";
  }
}

/** Service unreachable or 5xx: safe to retry, nothing was lost. */
export class UnavailableError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "UnavailableError";
  }
}

async function getJson<T>(url: string): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url);
  } catch (e) {
    throw new UnavailableError(`cannot reach review service: ${e}`);
  }
  if (!response.ok) {
    throw new UnavailableError(`${url} failed with ${response.status}`);
  }
  return (await response.json()) as T;
}

export function fetchQueue(cursor = "", limit = 20): Promise<QueuePage> {
  const params = new URLSearchParams({ cursor, limit: String(limit) });
  return getJson<QueuePage>(`/api/queue?${params}`);
}

export function fetchStats(): Promise<Stats> {
  return getJson<Stats>("/api/stats");
}

export async function postDecision(
  body: DecisionRequest,
  secret: string,
): Promise<DecisionAck> {
  let response: Response;
  try {
    response = await fetch("/api/decisions", {
      method: "POST",
      headers: {
        "content-type": "application/json",
        "X-Review-Secret": secret,
      },
      body: JSON.stringify(body),
    });
  } catch (e) {
    throw new UnavailableError(`cannot reach review service: ${e}`);
  }
  if (response.status === 409) {
    const conflict = await response.json();
    throw new ConflictError(
      conflict.current_version ?? null,
      conflict.current_status ?? null,
      conflict.error ?? "decision conflicts with a newer version",
    );
  }
  if (response.status === 401 || response.status === 422 || response.status === 404) {
    let detail = `decision rejected (${response.status})`;
    try {
      const body = await response.json();
      if (typeof body.detail === "string") detail = body.detail;
    } catch {
      /* keep the generic message */
    }
    throw new RejectedError(response.status, detail);
  }
  if (!response.ok) {
    throw new UnavailableError(`decision failed with ${response.status}`);
  }
  return (await response.json()) as DecisionAck;
}
