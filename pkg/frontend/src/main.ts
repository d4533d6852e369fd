// Playground wiring: capture keystrokes, stream them to the service,
// project replies onto the display. Slider changes re-create the session
// (models and decoding all live server-side).

import { PlaygroundClient } from "./client.js";
import { drawKeyboard, fitTransform } from "./keyboard_view.js";
import { Layout, SessionConfig, mapPhysicalKey } from "./protocol.js";
import { ViewState, applyReply, initialViewState } from "./view_state.js";

const $ = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

let state: ViewState = initialViewState();
let layout: Layout | null = null;
let startTime = performance.now();

function currentConfig(): SessionConfig {
  return {
    decoder: {
      beam_width: Number(($("beam-width") as HTMLInputElement).value),
      uncertainty_enabled: ($("uncertainty") as HTMLInputElement).checked,
    },
    noise: {
      sigma_scale: Number(($("sigma-scale") as HTMLInputElement).value),
    },
    target: ($("target") as HTMLInputElement).value || null,
    seed: null,
  };
}

function render(): void {
  if (!layout) return;
  const canvas = $("keyboard") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  drawKeyboard(ctx, layout, fitTransform(layout, canvas.width, canvas.height), state);
  $("committed").textContent = state.committed;
  $("literal").textContent = state.literal;
  $("suggestion").textContent = state.suggestion;
  $("banner").classList.toggle("hidden", state.lastError === null);
  if (state.lastError !== null) {
    $("banner").textContent = state.lastError;
  }
}

async function refreshMetrics(client: PlaygroundClient): Promise<void> {
  const metrics = await client.fetchMetrics();
  if (!metrics) return;
  const wpm = metrics["wpm"];
  const uer = metrics["uer"];
  $("metrics").textContent =
    `wpm ${typeof wpm === "number" ? wpm.toFixed(1) : "n/a"}  ` +
    `uer ${typeof uer === "number" ? (100 * uer).toFixed(1) + "%" : "n/a"}`;
}

async function boot(): Promise<void> {
  const base = window.location.origin;
  const client = new PlaygroundClient(base, {
    onReply: (reply) => {
      state = applyReply(state, reply);
      requestAnimationFrame(render);
    },
    onDisconnect: () => {
      $("banner").textContent = "connection lost, reconnecting...";
      $("banner").classList.remove("hidden");
    },
    onReconnect: () => {
      state = initialViewState();
      $("banner").classList.add("hidden");
      render();
    },
  });

  layout = await client.fetchLayout();
  render();

  const restart = async () => {
    client.close();
    await client.deleteSession();
    state = initialViewState();
    startTime = performance.now();
    await client.connect(currentConfig());
    render();
  };
  await client.connect(currentConfig());

  for (const id of ["beam-width", "uncertainty", "sigma-scale", "target"]) {
    $(id).addEventListener("change", () => { void restart(); });
  }
  $("sigma-value").textContent = ($("sigma-scale") as HTMLInputElement).value;
  $("sigma-scale").addEventListener("input", () => {
    $("sigma-value").textContent = ($("sigma-scale") as HTMLInputElement).value;
  });

  document.addEventListener("keydown", (ev) => {
    if (ev.target instanceof HTMLInputElement) return; // sliders keep focus
    const key = mapPhysicalKey(ev.key);
    if (key === null) return;
    ev.preventDefault();
    client.sendKeydown(key, (performance.now() - startTime) / 1000);
  });

  setInterval(() => { void refreshMetrics(client); }, 1000);
}

void boot();
