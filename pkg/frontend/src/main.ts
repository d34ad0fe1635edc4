// Bootstrap: pick a level, open a session, wire keyboard to the controller
// and the store to the renderer.

import { Controller, KEY_ACTIONS } from "./input.js";
import { HttpTransport } from "./protocol.js";
import { GameStore } from "./store.js";
import { render } from "./render.js";
import { buildViewModel } from "./view.js";

const transport = new HttpTransport("");
const store = new GameStore();
const root = document.getElementById("game")!;
const picker = document.getElementById("level-picker") as HTMLSelectElement;
const newGame = document.getElementById("new-game") as HTMLButtonElement;

function redraw(): void {
  render(buildViewModel(store.view), root);
}

const controller = new Controller(transport, store, redraw);

async function startSession(): Promise<void> {
  try {
    const seed = Math.floor(Math.random() * 2 ** 31);
    const snap = await transport.createSession(picker.value, seed);
    store.applySnapshot(snap);
    store.view.lastAssistantAction = null;
    store.view.lastKills = [];
  } catch (err) {
    store.setError(String(err));
  }
  redraw();
}

async function init(): Promise<void> {
  try {
    const levels = await transport.listLevels();
    picker.textContent = "";
    for (const name of levels) {
      const opt = document.createElement("option");
      opt.value = name;
      opt.textContent = name;
      picker.appendChild(opt);
    }
    await startSession();
  } catch (err) {
    store.setError(`cannot reach server: ${String(err)}`);
    redraw();
  }
}

newGame.addEventListener("click", () => void startSession());
window.addEventListener("keydown", (ev) => {
  if (ev.key in KEY_ACTIONS) {
    ev.preventDefault();
    void controller.press(ev.key);
  }
});

void init();
