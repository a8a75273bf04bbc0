/** Typed fetch wrapper over the annotation service API (bearer-token auth). */

import type { AnnotationRecord, EvalItem, ProgressView, TaskId } from './types.js';

export interface Session {
  baseUrl: string;
  assessorId: string;
  token: string;
}

const SESSION_KEY = 'itersum_session';

export function saveSession(session: Session): void {
  sessionStorage.setItem(SESSION_KEY, JSON.stringify(session));
}

export function loadSession(): Session | null {
  const raw = sessionStorage.getItem(SESSION_KEY);
  if (!raw) return null;
  try {
    return JSON.parse(raw) as Session;
  } catch {
    return null;
  }
}

export function clearSession(): void {
  sessionStorage.removeItem(SESSION_KEY);
}

export class SessionExpired extends Error {
  constructor() {
    super('session expired or token rejected');
  }
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

/** Submission outcomes the UI must distinguish; none of these throw. */
export type SubmitResult =
  | { kind: 'accepted' }
  | { kind: 'duplicate'; reason: string }
  | { kind: 'validation'; message: string };

export class ApiClient {
  constructor(
    private readonly session: Session,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private headers(): Record<string, string> {
    return {
      Authorization: `Bearer ${this.session.token}`,
      'Content-Type': 'application/json',
    };
  }

  private url(path: string): string {
    return this.session.baseUrl.replace(/\/$/, '') + path;
  }

  private async checkAuth(response: Response): Promise<void> {
    if (response.status === 401) {
      throw new SessionExpired();
    }
  }

  async listPending(task: TaskId): Promise<EvalItem[]> {
    const response = await this.fetchImpl(
      this.url(`/api/tasks/${task}/pending?assessor=${encodeURIComponent(this.session.assessorId)}`),
      { headers: this.headers() },
    );
    await this.checkAuth(response);
    if (!response.ok) {
      const body = await response.json().catch(() => ({}));
      throw new ApiError(response.status, body.error ?? 'Unknown', body.message ?? response.statusText);
    }
    return (await response.json()) as EvalItem[];
  }

  async submit(record: AnnotationRecord): Promise<SubmitResult> {
    const response = await this.fetchImpl(this.url('/api/annotations'), {
      method: 'POST',
      headers: this.headers(),
      body: JSON.stringify(record),
    });
    await this.checkAuth(response);
    const body = await response.json().catch(() => ({}));
    if (response.status === 409) {
      return { kind: 'duplicate', reason: body.reason ?? 'already submitted' };
    }
    if (response.status === 400 && body.error === 'ValidationError') {
      // surfaced verbatim so the assessor sees the server's own wording
      return { kind: 'validation', message: body.message ?? 'invalid selection' };
    }
    if (!response.ok) {
      throw new ApiError(response.status, body.error ?? 'Unknown', body.message ?? response.statusText);
    }
    return { kind: 'accepted' };
  }

  async progress(): Promise<ProgressView> {
    const response = await this.fetchImpl(
      this.url(`/api/progress?assessor=${encodeURIComponent(this.session.assessorId)}`),
      { headers: this.headers() },
    );
    await this.checkAuth(response);
    if (!response.ok) {
      const body = await response.json().catch(() => ({}));
      throw new ApiError(response.status, body.error ?? 'Unknown', body.message ?? response.statusText);
    }
    return (await response.json()) as ProgressView;
  }
}
