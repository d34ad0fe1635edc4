// Wire types and the HTTP transport for the capir session protocol.
// Bodies are plain JSON; errors come back as {code, message} with 4xx.

export interface GridInfo {
  width: number;
  height: number;
  walls: number[][]; // [x, y] pairs
}

export interface GhostInfo {
  pos: number[]; // [x, y]
  alive: boolean;
}

export type Status = "active" | "won" | "timed-out";

export interface Snapshot {
  session_id: string;
  seed: number;
  grid: GridInfo;
  human: number[];
  assistant: number[];
  ghosts: GhostInfo[];
  belief: number[]; // live subtasks, ascending ghost index
  step: number;
  status: Status;
}

export interface KillEvent {
  kind: "kill";
  ghost: number;
}

export interface ActResponse {
  assistant_action: string;
  state: Snapshot;
  events: KillEvent[];
  diagnostics: { belief: number[]; likelihoods: number[]; latency_ms: number };
}

export interface ErrorBody {
  code: string;
  message: string;
}

export class ProtocolError extends Error {
  constructor(
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export const HUMAN_ACTIONS = ["N", "S", "E", "W", "STAY", "SHOOT"] as const;
export type HumanAction = (typeof HUMAN_ACTIONS)[number];

export interface Transport {
  listLevels(): Promise<string[]>;
  createSession(levelId: string, seed?: number): Promise<Snapshot>;
  getState(sessionId: string): Promise<Snapshot>;
  act(sessionId: string, action: HumanAction): Promise<ActResponse>;
}

async function parseOrThrow<T>(resp: Response): Promise<T> {
  const body = await resp.json();
  if (!resp.ok) {
    const err = body as ErrorBody;
    throw new ProtocolError(err.code ?? `http-${resp.status}`, err.message ?? resp.statusText);
  }
  return body as T;
}

export class HttpTransport implements Transport {
  constructor(readonly baseUrl: string = "") {}

  async listLevels(): Promise<string[]> {
    const resp = await fetch(`${this.baseUrl}/levels`);
    const body = await parseOrThrow<{ levels: string[] }>(resp);
    return body.levels;
  }

  async createSession(levelId: string, seed?: number): Promise<Snapshot> {
    const payload: Record<string, unknown> = { level_id: levelId };
    if (seed !== undefined) payload.seed = seed;
    const resp = await fetch(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
    return parseOrThrow<Snapshot>(resp);
  }

  async getState(sessionId: string): Promise<Snapshot> {
    const resp = await fetch(`${this.baseUrl}/sessions/${sessionId}`);
    return parseOrThrow<Snapshot>(resp);
  }

  async act(sessionId: string, action: HumanAction): Promise<ActResponse> {
    const resp = await fetch(`${this.baseUrl}/act`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ session_id: sessionId, action }),
    });
    return parseOrThrow<ActResponse>(resp);
  }
}
