// Scripted keystroke playback: feeds a keystroke list through any
// message sink and folds the replies into view states. Used by the tests
// to prove the UI adds no logic (the final state must equal the last
// reply verbatim), and by the demo replay button.

import { ClientMessage, KeyName, ServerReply, keydown } from "./protocol.js";
import { ViewState, applyReply, initialViewState } from "./view_state.js";

export interface KeystrokeScript {
  keys: KeyName[];
  dt: number; // seconds between keystrokes
}

export function scriptMessages(script: KeystrokeScript, t0 = 0): ClientMessage[] {
  return script.keys.map((key, i) => keydown(key, t0 + i * script.dt));
}

export function foldReplies(replies: ServerReply[]): ViewState {
  let state = initialViewState();
  for (const reply of replies) {
    state = applyReply(state, reply);
  }
  return state;
}

export interface ReplayResult {
  sent: ClientMessage[];
  states: ViewState[];
  final: ViewState;
}

// Replays a script against paired replies (as captured from the service),
// asserting the one-message-per-keydown invariant by construction.
export function replayTranscript(script: KeystrokeScript,
                                 replies: ServerReply[]): ReplayResult {
  const sent = scriptMessages(script);
  if (sent.length !== replies.length) {
    throw new Error(
      `transcript mismatch: ${sent.length} keydowns but ${replies.length} replies`);
  }
  const states: ViewState[] = [];
  let state = initialViewState();
  for (const reply of replies) {
    state = applyReply(state, reply);
    states.push(state);
  }
  return { sent, states, final: state };
}
