// View state is a pure projection of the latest service reply: no
// decoding, no text manipulation, no correction logic lives here. A
// disconnected UI can therefore display but never update text.

import { Ellipse, ServerReply, TopKey } from "./protocol.js";

export interface ViewState {
  committed: string;
  literal: string;
  suggestion: string;
  ellipse: Ellipse | null;
  // per-key heat in [0, 1], relative within the reply's top keys
  heat: Record<string, number>;
  lastEvent: string;
  lastError: string | null;
}

export function initialViewState(): ViewState {
  return {
    committed: "",
    literal: "",
    suggestion: "",
    ellipse: null,
    heat: {},
    lastEvent: "",
    lastError: null,
  };
}

function heatFromTopKeys(topKeys: TopKey[] | undefined): Record<string, number> {
  if (!topKeys || topKeys.length === 0) return {};
  const max = Math.max(...topKeys.map((t) => t.loglik));
  const heat: Record<string, number> = {};
  for (const t of topKeys) {
    // likelihood ratio against the best key, clamped for display
    heat[t.key] = Math.max(0, Math.min(1, Math.exp(t.loglik - max)));
  }
  return heat;
}

export function applyReply(prev: ViewState, reply: ServerReply): ViewState {
  if (reply.error !== undefined) {
    return { ...prev, lastError: reply.error };
  }
  return {
    committed: reply.committed ?? prev.committed,
    literal: reply.literal ?? prev.literal,
    suggestion: reply.suggestion ?? prev.suggestion,
    ellipse: reply.ellipse ?? null,
    heat: heatFromTopKeys(reply.top_keys),
    lastEvent: reply.event ?? "",
    lastError: null,
  };
}

export function displayText(state: ViewState): string {
  return state.committed + state.literal;
}
