// Service client: session lifecycle over HTTP, keystrokes over one
// WebSocket. On disconnect the owner gets a callback (banner) and a fresh
// session is created on reconnect.

import { ClientMessage, Layout, ServerReply, SessionConfig, keydown, parseReply } from "./protocol.js";

export interface ClientCallbacks {
  onReply(reply: ServerReply): void;
  onDisconnect(): void;
  onReconnect(sessionId: string): void;
}

export class PlaygroundClient {
  private ws: WebSocket | null = null;
  private sessionId: string | null = null;
  private closedByUs = false;
  private reconnectDelayMs = 800;

  constructor(private baseUrl: string, private callbacks: ClientCallbacks) {}

  async fetchLayout(): Promise<Layout> {
    const resp = await fetch(`${this.baseUrl}/layout`);
    if (!resp.ok) throw new Error(`layout fetch failed: ${resp.status}`);
    return (await resp.json()) as Layout;
  }

  async createSession(config: SessionConfig): Promise<string> {
    const resp = await fetch(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(config),
    });
    if (!resp.ok) {
      const body = await resp.json().catch(() => ({}));
      throw new Error(`session rejected: ${JSON.stringify(body)}`);
    }
    const body = await resp.json();
    return body.session_id as string;
  }

  async fetchMetrics(): Promise<Record<string, unknown> | null> {
    if (!this.sessionId) return null;
    const resp = await fetch(`${this.baseUrl}/sessions/${this.sessionId}/metrics`);
    if (!resp.ok) return null;
    return (await resp.json()) as Record<string, unknown>;
  }

  async deleteSession(): Promise<void> {
    if (!this.sessionId) return;
    await fetch(`${this.baseUrl}/sessions/${this.sessionId}`, { method: "DELETE" });
    this.sessionId = null;
  }

  async connect(config: SessionConfig): Promise<string> {
    this.closedByUs = false;
    this.sessionId = await this.createSession(config);
    const wsUrl = this.baseUrl.replace(/^http/, "ws")
      + `/sessions/${this.sessionId}/stream`;
    const ws = new WebSocket(wsUrl);
    ws.onmessage = (ev) => this.callbacks.onReply(parseReply(String(ev.data)));
    ws.onclose = () => {
      this.ws = null;
      if (this.closedByUs) return;
      this.callbacks.onDisconnect();
      setTimeout(() => {
        this.connect(config)
          .then((sid) => this.callbacks.onReconnect(sid))
          .catch(() => { /* next close retries */ });
      }, this.reconnectDelayMs);
    };
    await new Promise<void>((resolve, reject) => {
      ws.onopen = () => resolve();
      ws.onerror = () => reject(new Error("websocket failed"));
    });
    this.ws = ws;
    return this.sessionId;
  }

  sendKeydown(key: string, clientTime: number): boolean {
    if (!this.ws || this.ws.readyState !== WebSocket.OPEN) return false;
    const msg: ClientMessage = keydown(key, clientTime);
    this.ws.send(JSON.stringify(msg));
    return true;
  }

  close(): void {
    this.closedByUs = true;
    this.ws?.close();
    this.ws = null;
  }
}
