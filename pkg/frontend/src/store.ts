// Client game state: a mirror of the last server snapshot plus transient
// UI flags. The client never simulates game dynamics; every field below
// comes verbatim from the server, and each act response replaces the
// snapshot wholesale.

import type { ActResponse, Snapshot } from "./protocol.js";

export interface ClientGameView {
  snapshot: Snapshot | null;
  pending: boolean; // an act awaits its response; input is disabled
  error: string | null; // non-fatal banner text, cleared on next success
  lastKills: number[]; // ghosts killed by the most recent act
  lastAssistantAction: string | null;
}

export function validateSnapshot(snap: unknown): string | null {
  const s = snap as Snapshot;
  if (!s || typeof s !== "object") return "snapshot is not an object";
  if (!s.grid || typeof s.grid.width !== "number" || typeof s.grid.height !== "number")
    return "snapshot has no grid";
  if (!Array.isArray(s.grid.walls)) return "snapshot has no wall list";
  if (!Array.isArray(s.human) || s.human.length !== 2) return "bad human position";
  if (!Array.isArray(s.assistant) || s.assistant.length !== 2) return "bad assistant position";
  if (!Array.isArray(s.ghosts)) return "bad ghost list";
  for (const g of s.ghosts) {
    if (!g || !Array.isArray(g.pos) || g.pos.length !== 2 || typeof g.alive !== "boolean")
      return "bad ghost entry";
  }
  if (!Array.isArray(s.belief)) return "bad belief vector";
  const live = s.ghosts.filter((g) => g.alive).length;
  if (s.belief.length !== live) return "belief dimension disagrees with live ghosts";
  if (typeof s.step !== "number") return "bad step counter";
  if (!["active", "won", "timed-out"].includes(s.status)) return "bad status";
  return null;
}

export class GameStore {
  view: ClientGameView = {
    snapshot: null,
    pending: false,
    error: null,
    lastKills: [],
    lastAssistantAction: null,
  };

  applySnapshot(snap: Snapshot): void {
    const problem = validateSnapshot(snap);
    if (problem) {
      this.view.error = `malformed snapshot: ${problem}`;
      return;
    }
    this.view.snapshot = snap;
    this.view.error = null;
  }

  applyActResponse(resp: ActResponse): void {
    const problem = validateSnapshot(resp.state);
    if (problem) {
      this.view.error = `malformed snapshot: ${problem}`;
      return;
    }
    this.view.snapshot = resp.state;
    this.view.lastKills = resp.events.filter((e) => e.kind === "kill").map((e) => e.ghost);
    this.view.lastAssistantAction = resp.assistant_action;
    this.view.error = null;
  }

  setError(message: string): void {
    this.view.error = message;
  }

  inputEnabled(): boolean {
    return (
      this.view.snapshot !== null &&
      this.view.snapshot.status === "active" &&
      !this.view.pending &&
      this.view.error === null
    );
  }
}
