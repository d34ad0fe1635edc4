// Keyboard handling and act serialization. One accepted keypress issues
// exactly one act; presses while an act is in flight are dropped, never
// queued. Transport failures trigger a state() resync so the mirror never
// drifts from the server.

import type { HumanAction, Transport } from "./protocol.js";
import { ProtocolError } from "./protocol.js";
import type { GameStore } from "./store.js";

export const KEY_ACTIONS: Record<string, HumanAction> = {
  ArrowUp: "N",
  ArrowDown: "S",
  ArrowRight: "E",
  ArrowLeft: "W",
  ".": "STAY",
  " ": "SHOOT",
};

export class Controller {
  constructor(
    private transport: Transport,
    private store: GameStore,
    private onChange: () => void = () => {},
  ) {}

  /** Handle one keypress; resolves true iff an act request was issued. */
  async press(key: string): Promise<boolean> {
    const action = KEY_ACTIONS[key];
    if (!action) return false;
    if (!this.store.inputEnabled()) return false;
    const sessionId = this.store.view.snapshot!.session_id;
    this.store.view.pending = true;
    this.onChange();
    try {
      const resp = await this.transport.act(sessionId, action);
      this.store.applyActResponse(resp);
    } catch (err) {
      if (err instanceof ProtocolError) {
        // conflict/validation errors are non-fatal; resync and carry on
        this.store.setError(`${err.code}: ${err.message}`);
        await this.resync(sessionId);
      } else {
        this.store.setError(`connection lost: ${String(err)}`);
        await this.resync(sessionId);
      }
    } finally {
      this.store.view.pending = false;
      this.onChange();
    }
    return true;
  }

  /** Re-fetch authoritative state; clears the error banner on success. */
  async resync(sessionId: string): Promise<void> {
    try {
      const snap = await this.transport.getState(sessionId);
      this.store.applySnapshot(snap);
    } catch {
      // still offline; keep the existing error banner
    }
  }
}
