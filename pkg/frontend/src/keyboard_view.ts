// Canvas rendering of the keyboard surface: keys from the service's
// layout JSON (single source of truth), per-key likelihood heat, and the
// last observation's 1-sigma ellipse. Pure drawing, no interaction state.

import { Layout } from "./protocol.js";
import { ViewState } from "./view_state.js";

export interface SurfaceTransform {
  scale: number; // px per mm
  ox: number;    // canvas x of surface origin
  oy: number;    // canvas y of surface origin
}

export function fitTransform(layout: Layout, width: number, height: number,
                             margin = 16): SurfaceTransform {
  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  for (const k of layout.keys) {
    minX = Math.min(minX, k.cx - k.w / 2);
    maxX = Math.max(maxX, k.cx + k.w / 2);
    minY = Math.min(minY, k.cy - k.h / 2);
    maxY = Math.max(maxY, k.cy + k.h / 2);
  }
  const scale = Math.min((width - 2 * margin) / (maxX - minX),
                         (height - 2 * margin) / (maxY - minY));
  // y grows away from the typist on the surface, upward on screen
  return {
    scale,
    ox: margin - minX * scale,
    oy: height - margin + minY * scale,
  };
}

export function toCanvas(t: SurfaceTransform, x: number, y: number): [number, number] {
  return [t.ox + x * t.scale, t.oy - y * t.scale];
}

export function drawKeyboard(ctx: CanvasRenderingContext2D, layout: Layout,
                             t: SurfaceTransform, state: ViewState): void {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  ctx.font = `${Math.max(10, 0.45 * layout.pitch * t.scale)}px system-ui, sans-serif`;
  ctx.textAlign = "center";
  ctx.textBaseline = "middle";
  for (const k of layout.keys) {
    const [cx, cy] = toCanvas(t, k.cx, k.cy);
    const w = k.w * t.scale;
    const h = k.h * t.scale;
    const heat = state.heat[k.id] ?? 0;
    ctx.fillStyle = heat > 0
      ? `rgba(255, 140, 0, ${0.15 + 0.65 * heat})`
      : "#23272e";
    ctx.strokeStyle = "#4a5160";
    ctx.beginPath();
    ctx.roundRect(cx - w / 2, cy - h / 2, w, h, 3);
    ctx.fill();
    ctx.stroke();
    ctx.fillStyle = "#e8eaf0";
    ctx.fillText(k.id === " " ? "space" : k.id, cx, cy);
  }
  if (state.ellipse) {
    const { cx, cy, rx, ry } = state.ellipse;
    const [ex, ey] = toCanvas(t, cx, cy);
    ctx.strokeStyle = "#63d0ff";
    ctx.lineWidth = 2;
    ctx.beginPath();
    if (rx > 0 && ry > 0) {
      ctx.ellipse(ex, ey, rx * t.scale, ry * t.scale, 0, 0, 2 * Math.PI);
    } else {
      ctx.arc(ex, ey, 2, 0, 2 * Math.PI);
    }
    ctx.stroke();
    ctx.fillStyle = "#63d0ff";
    ctx.beginPath();
    ctx.arc(ex, ey, 2.5, 0, 2 * Math.PI);
    ctx.fill();
    ctx.lineWidth = 1;
  }
}
