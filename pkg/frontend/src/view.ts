// Pure view model: everything the renderer draws, derived field-for-field
// from the last snapshot. Belief entries arrive over live subtasks in
// ascending ghost index; here they are spread onto per-ghost bars so dead
// ghosts show a zero bar and the live bars keep summing to full scale.

import type { ClientGameView } from "./store.js";

export interface Sprite {
  kind: "human" | "assistant" | "ghost";
  x: number;
  y: number;
  ghost?: number;
  faded?: boolean;
}

export interface BeliefBar {
  ghost: number;
  alive: boolean;
  fraction: number; // 0..1 of full scale
}

export interface ViewModel {
  ok: boolean;
  error: string | null;
  width: number;
  height: number;
  walls: boolean[][]; // walls[y][x]
  sprites: Sprite[];
  bars: BeliefBar[];
  step: number;
  status: string;
  assistantAction: string | null;
  inputEnabled: boolean;
}

export function beliefByGhost(belief: number[], alive: boolean[]): number[] {
  const out = alive.map(() => 0);
  let j = 0;
  for (let g = 0; g < alive.length; g++) {
    if (alive[g]) out[g] = belief[j++] ?? 0;
  }
  return out;
}

export function buildViewModel(view: ClientGameView): ViewModel {
  const empty: ViewModel = {
    ok: false,
    error: view.error,
    width: 0,
    height: 0,
    walls: [],
    sprites: [],
    bars: [],
    step: 0,
    status: "",
    assistantAction: view.lastAssistantAction,
    inputEnabled: false,
  };
  const snap = view.snapshot;
  if (!snap) return { ...empty, error: view.error ?? "no session" };
  if (view.error) return { ...empty, error: view.error };

  const walls: boolean[][] = [];
  for (let y = 0; y < snap.grid.height; y++) walls.push(new Array(snap.grid.width).fill(false));
  for (const [x, y] of snap.grid.walls) walls[y][x] = true;

  const sprites: Sprite[] = [
    { kind: "human", x: snap.human[0], y: snap.human[1] },
    { kind: "assistant", x: snap.assistant[0], y: snap.assistant[1] },
  ];
  snap.ghosts.forEach((g, i) => {
    sprites.push({ kind: "ghost", ghost: i, x: g.pos[0], y: g.pos[1], faded: !g.alive });
  });

  const alive = snap.ghosts.map((g) => g.alive);
  const perGhost = beliefByGhost(snap.belief, alive);
  const bars: BeliefBar[] = perGhost.map((fraction, ghost) => ({
    ghost,
    alive: alive[ghost],
    fraction,
  }));

  return {
    ok: true,
    error: null,
    width: snap.grid.width,
    height: snap.grid.height,
    walls,
    sprites,
    bars,
    step: snap.step,
    status: snap.status,
    assistantAction: view.lastAssistantAction,
    inputEnabled: snap.status === "active" && !view.pending,
  };
}
