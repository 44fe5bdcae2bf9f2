// Typed client for the play-service JSON API. All game logic is
// server-side; this file only shapes requests and surfaces errors verbatim.

export interface BoundaryPayload {
  m_left: number;
  m_right: number;
  n_left: number;
  n_right: number;
}

export interface TurnEntry {
  turn: number;
  human_stake: number;
  bot_stake: number;
  winner: 'maxine' | 'mina';
  vertex: number;
}

export interface Payoffs {
  human: number;
  bot: number;
  human_receipt: number;
  bot_receipt: number;
}

export interface SessionState {
  id: string;
  trail: [number, number];
  boundary: BoundaryPayload;
  start: number;
  human_side: 'mina' | 'maxine';
  opponent: { kind: string; [key: string]: unknown };
  seed: number;
  stake_cap: number;
  series: string | null;
  vertex: number;
  turn: number;
  status: 'awaiting_stake' | 'finished';
  terminal: 'mina_win' | 'maxine_win' | null;
  history: TurnEntry[];
  costs: { human: number; bot: number };
  payoffs: Payoffs | null;
  hint?: number | null;
}

export interface NewSessionRequest {
  trail: [number, number];
  boundary?: BoundaryPayload | 'standard_symmetric';
  start?: number;
  human_side?: 'mina' | 'maxine';
  opponent?: string | { kind: string; [key: string]: unknown };
  seed?: number;
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class PlayClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  url(path: string): string {
    return this.baseUrl.replace(/\/$/, '') + path;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.url(path), init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const message =
        typeof body === 'object' && body !== null && 'error' in body
          ? String((body as { error: unknown }).error)
          : `request failed with status ${response.status}`;
      throw new ApiError(response.status, message);
    }
    return body as T;
  }

  createSession(request: NewSessionRequest): Promise<SessionState> {
    return this.request<SessionState>('/sessions', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(request),
    });
  }

  submitStake(sessionId: string, amount: number): Promise<SessionState> {
    return this.request<SessionState>(`/sessions/${sessionId}/stake`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ amount }),
    });
  }

  getState(sessionId: string, withHint = false): Promise<SessionState> {
    const suffix = withHint ? '?hint=1' : '';
    return this.request<SessionState>(`/sessions/${sessionId}${suffix}`);
  }

  listOpponents(): Promise<{ opponents: Record<string, string> }> {
    return this.request<{ opponents: Record<string, string> }>('/opponents');
  }
}
