// Typed client for the engine's REST surface.

import type {
  InstructionOutcome,
  Logs,
  Metrics,
  ResultOutcome,
  Snapshot,
  WrongPhaseDetail,
} from './types.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(typeof detail === 'string' ? detail : JSON.stringify(detail));
    this.name = 'ApiError';
  }

  /** The structured 409 payload, when the engine rejected an out-of-turn call. */
  get wrongPhase(): WrongPhaseDetail | null {
    const d = this.detail as WrongPhaseDetail | null;
    if (this.status === 409 && d && d.error === 'WrongPhase') return d;
    return null;
  }
}

export interface ExchangeReply<T> {
  outcome: T;
  snapshot: Snapshot;
}

export class EngineClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {
    this.baseUrl = baseUrl.replace(/\/$/, '');
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      // non-JSON error bodies fall through with body = null
    }
    if (!response.ok) {
      const detail = (body as { detail?: unknown } | null)?.detail ?? body;
      throw new ApiError(response.status, detail);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(payload),
    });
  }

  health(): Promise<{ status: string }> {
    return this.request('/healthz');
  }

  createSession(body: {
    flags_total?: number;
    session_id?: string;
    lambda_override?: number;
  } = {}): Promise<Snapshot> {
    return this.post('/sessions', body);
  }

  listSessions(): Promise<{ sessions: Snapshot[] }> {
    return this.request('/sessions');
  }

  getSession(sessionId: string): Promise<Snapshot> {
    return this.request(`/sessions/${sessionId}`);
  }

  submitInstruction(sessionId: string, q: string): Promise<ExchangeReply<InstructionOutcome>> {
    return this.post(`/sessions/${sessionId}/instruction`, { q });
  }

  submitResult(sessionId: string, o: string): Promise<ExchangeReply<ResultOutcome>> {
    return this.post(`/sessions/${sessionId}/result`, { o });
  }

  getLogs(sessionId: string): Promise<Logs> {
    return this.request(`/sessions/${sessionId}/logs`);
  }

  getMetrics(sessionId: string): Promise<Metrics> {
    return this.request(`/sessions/${sessionId}/metrics`);
  }

  getRecord(sessionId: string, recordId: string): Promise<Record<string, unknown>> {
    return this.request(`/sessions/${sessionId}/knowledge/${recordId}`);
  }

  eventsUrl(sessionId: string, since = 0): string {
    return `${this.baseUrl}/sessions/${sessionId}/events?since=${since}`;
  }
}
