// Wire protocol for the playground service (schema touchdecode-playground/1).
// The UI never decodes anything itself; these types mirror the service
// contract exactly.

export const WIRE_SCHEMA = "touchdecode-playground/1";

export type KeyName = string; // single character, "space", "backspace", "commit_literal"

export interface ClientMessage {
  type: "keydown";
  key: KeyName;
  client_time: number;
}

export interface TopKey {
  key: string;
  loglik: number;
}

export interface Ellipse {
  cx: number;
  cy: number;
  rx: number;
  ry: number;
}

export interface ObservationPayload {
  frame: number;
  finger_probs: number[];
  mean: [number, number];
  var: [number, number];
}

export interface ServerReply {
  schema: string;
  event?: string;
  committed?: string;
  literal?: string;
  suggestion?: string;
  top_keys?: TopKey[];
  ellipse?: Ellipse | null;
  observation?: ObservationPayload | null;
  error?: string;
}

export interface LayoutKey {
  id: string;
  cx: number;
  cy: number;
  w: number;
  h: number;
}

export interface Layout {
  schema: string;
  pitch: number;
  keys: LayoutKey[];
}

export interface SessionConfig {
  decoder: {
    beam_width: number;
    uncertainty_enabled: boolean;
  };
  noise: {
    sigma_scale: number;
  };
  target?: string | null;
  seed?: number | null;
}

export function keydown(key: KeyName, clientTime: number): ClientMessage {
  return { type: "keydown", key, client_time: clientTime };
}

// Maps a physical KeyboardEvent.key to a stream key, or null when the
// keystroke is not part of the interaction vocabulary. Every mapped
// keydown becomes exactly one stream message.
export function mapPhysicalKey(eventKey: string): KeyName | null {
  if (eventKey === " " || eventKey === "Spacebar") return "space";
  if (eventKey === "Backspace") return "backspace";
  if (eventKey === "Tab") return "commit_literal"; // desk stand-in for the pinch
  if (eventKey.length === 1) {
    const ch = eventKey.toLowerCase();
    if (/^[a-z0-9,.]$/.test(ch)) return ch;
  }
  return null;
}

export function parseReply(raw: string): ServerReply {
  const parsed = JSON.parse(raw) as ServerReply;
  if (parsed.schema !== WIRE_SCHEMA) {
    throw new Error(`unexpected reply schema: ${parsed.schema}`);
  }
  return parsed;
}
