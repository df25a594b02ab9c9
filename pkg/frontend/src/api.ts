import type { DashboardData, SessionRecord, TurnResult } from './types.js';

export class UnauthorizedError extends Error {
  constructor() {
    super('unauthorized');
  }
}

export class BusyError extends Error {
  constructor() {
    super('a turn is already in flight');
  }
}

export class ProviderFailure extends Error {
  constructor() {
    super('the tutor is temporarily unavailable');
  }
}

/**
 * Thin fetch wrapper for the engine API. Every call carries the bearer
 * token; a 401 invokes onUnauthorized (the app redirects to login).
 */
export class ApiClient {
  constructor(
    private baseUrl: string,
    private token: string | null = null,
    private onUnauthorized: () => void = () => {},
  ) {}

  setToken(token: string) {
    this.token = token;
  }

  private async request(method: string, path: string, body?: unknown): Promise<Response> {
    const headers: Record<string, string> = { 'Content-Type': 'application/json' };
    if (this.token) headers['Authorization'] = `Bearer ${this.token}`;
    const response = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (response.status === 401) {
      this.onUnauthorized();
      throw new UnauthorizedError();
    }
    if (response.status === 409) throw new BusyError();
    if (response.status === 502) throw new ProviderFailure();
    if (!response.ok) throw new Error(`request failed: ${response.status}`);
    return response;
  }

  async login(email: string): Promise<{ token: string; learner_id: string }> {
    const response = await this.request('POST', '/auth/login', { email });
    const body = await response.json();
    this.token = body.token;
    return body;
  }

  async createSession(): Promise<string> {
    const response = await this.request('POST', '/sessions');
    return (await response.json()).session_id;
  }

  async sendMessage(sessionId: string, text: string): Promise<TurnResult> {
    const response = await this.request('POST', `/sessions/${sessionId}/messages`, { text });
    return response.json();
  }

  async endSession(sessionId: string): Promise<{ summary: string }> {
    const response = await this.request('POST', `/sessions/${sessionId}/end`);
    return response.json();
  }

  async getSession(sessionId: string): Promise<SessionRecord> {
    const response = await this.request('GET', `/sessions/${sessionId}`);
    return response.json();
  }

  async getDashboard(): Promise<DashboardData> {
    const response = await this.request('GET', '/dashboard');
    return response.json();
  }

  /** Raw transcript body, passed through unmodified for download. */
  async downloadTranscript(sessionId: string, format: 'json' | 'text'): Promise<string> {
    const response = await this.request(
      'GET',
      `/sessions/${sessionId}/transcript?format=${format}`,
    );
    return response.text();
  }
}
