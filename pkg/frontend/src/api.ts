// Typed client for the sense-tracking session API.  One function per
// endpoint; errors carry the HTTP status so the app can tell a dead
// session (404 -> reconnect) from everything else.

export interface SessionHandle {
  id: string;
  created_at: number;
  config: Record<string, unknown>;
  turn: number;
}

export type Confidences = Record<string, Record<string, number>>;

export interface UtteranceResult {
  turn: number;
  confidences: Confidences;
  best: Record<string, string>;
}

export interface Particle2D {
  x: number;
  y: number;
  weight: number;
}

export interface SnapshotParticle {
  weight: number;
  context: number[];
  assignments: Record<string, string>;
}

export interface SessionState {
  handle: SessionHandle;
  snapshot: { particles: SnapshotParticle[]; [k: string]: unknown };
  particles_2d: Particle2D[];
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const res = await fetch(url, init);
  if (!res.ok) {
    let detail = res.statusText;
    try {
      detail = (await res.json()).detail ?? detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(res.status, detail);
  }
  return res.json() as Promise<T>;
}

export class SessionClient {
  constructor(
    private base: string,
    public sessionId: string | null = null,
  ) {}

  async create(targets: string[], inventory = "default"): Promise<SessionHandle> {
    const handle = await request<SessionHandle>(`${this.base}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ targets, inventory }),
    });
    this.sessionId = handle.id;
    return handle;
  }

  async postUtterance(role: "own" | "other", text: string): Promise<UtteranceResult> {
    return request<UtteranceResult>(
      `${this.base}/sessions/${this.sessionId}/utterances`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ role, text }),
      },
    );
  }

  async state(): Promise<SessionState> {
    return request<SessionState>(`${this.base}/sessions/${this.sessionId}/state`);
  }

  async confidences(label?: string): Promise<{ turn: number; confidences: Confidences }> {
    const suffix = label ? `?label=${encodeURIComponent(label)}` : "";
    return request(`${this.base}/sessions/${this.sessionId}/confidences${suffix}`);
  }

  async close(): Promise<void> {
    await request(`${this.base}/sessions/${this.sessionId}`, { method: "DELETE" });
    this.sessionId = null;
  }
}
