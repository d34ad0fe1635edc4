// DOM renderer: rebuilds the board, belief bars, and status line from a
// view model. Cheap full rebuilds are fine at gridworld sizes.

import type { ViewModel } from "./view.js";

const SPRITE_GLYPHS = { human: "H", assistant: "D", ghost: "G" } as const;

export function render(model: ViewModel, root: HTMLElement): void {
  root.textContent = "";

  const banner = document.createElement("div");
  banner.className = `banner ${model.error ? "banner-error" : `banner-${model.status}`}`;
  banner.textContent = model.error
    ? `error: ${model.error}`
    : model.status === "active"
      ? `step ${model.step}${model.assistantAction ? ` — dog played ${model.assistantAction}` : ""}`
      : `${model.status} after ${model.step} steps`;
  root.appendChild(banner);

  if (!model.ok) return;

  const board = document.createElement("div");
  board.className = "board";
  board.style.gridTemplateColumns = `repeat(${model.width}, var(--cell))`;
  for (let y = 0; y < model.height; y++) {
    for (let x = 0; x < model.width; x++) {
      const cell = document.createElement("div");
      cell.className = model.walls[y][x] ? "cell wall" : "cell floor";
      cell.dataset.x = String(x);
      cell.dataset.y = String(y);
      board.appendChild(cell);
    }
  }
  for (const sprite of model.sprites) {
    const el = document.createElement("div");
    el.className = `sprite ${sprite.kind}${sprite.faded ? " faded" : ""}`;
    el.textContent = SPRITE_GLYPHS[sprite.kind];
    if (sprite.ghost !== undefined) el.dataset.ghost = String(sprite.ghost);
    const idx = sprite.y * model.width + sprite.x;
    (board.children[idx] as HTMLElement).appendChild(el);
  }
  root.appendChild(board);

  const bars = document.createElement("div");
  bars.className = "belief";
  for (const bar of model.bars) {
    const row = document.createElement("div");
    row.className = `belief-row${bar.alive ? "" : " faded"}`;
    const label = document.createElement("span");
    label.textContent = `ghost ${bar.ghost}`;
    const track = document.createElement("div");
    track.className = "belief-track";
    const fill = document.createElement("div");
    fill.className = "belief-fill";
    fill.style.width = `${(bar.fraction * 100).toFixed(1)}%`;
    fill.dataset.fraction = bar.fraction.toFixed(6);
    track.appendChild(fill);
    const pct = document.createElement("span");
    pct.className = "belief-pct";
    pct.textContent = `${(bar.fraction * 100).toFixed(0)}%`;
    row.append(label, track, pct);
    bars.appendChild(row);
  }
  root.appendChild(bars);

  const help = document.createElement("div");
  help.className = "help";
  help.textContent = model.inputEnabled
    ? "arrows move · space shoots · period waits"
    : "input disabled";
  root.appendChild(help);
}
