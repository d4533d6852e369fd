// Acceptance (secondary): a scripted keystroke file replayed through the
// service and the UI produces a transcript identical to batch decoding of
// the same observation sequence, and the uncertainty toggle flips the
// prepared ambiguous case's suggestion.
//
// Fixtures are captured from the real service by scripts/gen_fixtures.py;
// each contains the keystroke script, the reply transcript, and the
// batch (offline) decode of the same observations.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { ServerReply } from "../src/protocol.js";
import { replayTranscript, scriptMessages } from "../src/playback.js";

const here = dirname(fileURLToPath(import.meta.url));

interface Fixture {
  script: { keys: string[]; dt: number };
  replies: ServerReply[];
  batch: { committed: string; literal: string; suggestion: string };
}

function load(name: string): any {
  return JSON.parse(readFileSync(join(here, "fixtures", `${name}.json`), "utf-8"));
}

describe("scripted playback", () => {
  it("sends exactly one message per keydown", () => {
    const fx = load("noiseless") as Fixture;
    const msgs = scriptMessages(fx.script);
    expect(msgs.length).toBe(fx.script.keys.length);
    expect(new Set(msgs.map((m) => m.type))).toEqual(new Set(["keydown"]));
    // client_time is strictly increasing
    for (let i = 1; i < msgs.length; i++) {
      expect(msgs[i].client_time).toBeGreaterThan(msgs[i - 1].client_time);
    }
  });

  it("noiseless script: UI transcript equals service and batch decode", () => {
    const fx = load("noiseless") as Fixture;
    const { final } = replayTranscript(fx.script, fx.replies);
    expect(final.committed).toBe("cat ");
    expect(final.committed).toBe(fx.batch.committed);
    expect(final.literal).toBe(fx.batch.literal);
    expect(final.suggestion).toBe(fx.batch.suggestion);
  });

  it("noisy script: UI transcript equals service and batch decode", () => {
    const fx = load("noisy") as Fixture;
    const { final, states } = replayTranscript(fx.script, fx.replies);
    expect(final.committed).toBe(fx.batch.committed);
    expect(final.literal).toBe(fx.batch.literal);
    expect(final.suggestion).toBe(fx.batch.suggestion);
    // every intermediate state is exactly the corresponding reply
    states.forEach((state, i) => {
      const r = fx.replies[i];
      expect(state.committed).toBe(r.committed);
      expect(state.literal).toBe(r.literal);
      expect(state.suggestion).toBe(r.suggestion);
    });
  });

  it("uncertainty toggle flips the prepared ambiguous suggestion", () => {
    const fx = load("toggle");
    const on = replayTranscript(fx.script, fx.with_uncertainty.replies);
    const off = replayTranscript(fx.script, fx.without_uncertainty.replies);
    // identical observations in both transcripts (same seed)
    fx.with_uncertainty.replies.forEach((r: ServerReply, i: number) => {
      expect(r.observation).toEqual(fx.without_uncertainty.replies[i].observation);
    });
    expect(on.final.suggestion).not.toBe(off.final.suggestion);
    expect(on.final.suggestion).toBe(fx.with_uncertainty.batch.suggestion);
    expect(off.final.suggestion).toBe(fx.without_uncertainty.batch.suggestion);
  });

  it("rejects transcripts that violate one-reply-per-keydown", () => {
    const fx = load("noiseless") as Fixture;
    expect(() => replayTranscript(fx.script, fx.replies.slice(1)))
      .toThrowError(/mismatch/);
  });
});
