"""Generate UI test fixtures from the real playground service.

Each fixture freezes a scripted keydown sequence, the service's reply
transcript, and the batch-decoded result for the same observation
sequence, so the TypeScript tests can verify the UI is a pure projection
of service output and that online and offline decoding agree.

Run from frontend/: python3 scripts/gen_fixtures.py
"""

import json
import pathlib
import sys

import numpy as np
from fastapi.testclient import TestClient

from touchdecode.bundle import build_models
from touchdecode.decoder import DecoderConfig, Session, TouchObservation
from touchdecode.gaussians import Gaussian2
from touchdecode.losses import FrameDistribution
from touchdecode.service import create_app

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"

CORPUS = ["the cat sat on the mat", "the dog ran off",
          "a cat and a dog", "the mat was flat"] * 3


def replay(client, script, config):
    sid = client.post("/sessions", json=config).json()["session_id"]
    replies = []
    with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
        for i, key in enumerate(script["keys"]):
            ws.send_text(json.dumps({"type": "keydown", "key": key,
                                     "client_time": i * script["dt"]}))
            replies.append(json.loads(ws.receive_text()))
    client.delete(f"/sessions/{sid}")
    return replies


def offline_replay(bundle, replies, cfg):
    """Feed the observations captured in the replies through an offline
    decoder session (batch path)."""
    session = Session(bundle.keys, bundle.char_lm, bundle.word_lm,
                      bundle.trie, cfg)
    for r in replies:
        if r.get("error"):
            raise RuntimeError(f"service error in transcript: {r['error']}")
        event = r.get("event")
        if event == "feed":
            o = r["observation"]
            session.feed(TouchObservation(
                frame=o["frame"],
                finger_dist=FrameDistribution(probs=np.asarray(o["finger_probs"])),
                location=Gaussian2(mean=o["mean"], cov=np.diag(o["var"]))))
        elif event == "space":
            session.commit_space()
        elif event == "backspace":
            session.backspace()
        elif event == "commit_literal":
            session.commit_literal()
        elif event == "miss":
            pass
        else:
            raise RuntimeError(f"unexpected event {event!r}")
    state = session.state()
    return {"committed": state.committed, "literal": state.literal,
            "suggestion": state.suggestion}


def gen_noiseless(client, bundle):
    script = {"keys": ["c", "a", "t", "space"], "dt": 0.3}
    config = {"seed": 11, "noise": {"sigma_scale": 0.0}}
    replies = replay(client, script, config)
    batch = offline_replay(bundle, replies, DecoderConfig())
    final = replies[-1]
    assert final["committed"] == batch["committed"] == "cat ", \
        (final["committed"], batch["committed"])
    return {"script": script, "config": config, "replies": replies,
            "batch": batch}


def gen_noisy(client, bundle):
    script = {"keys": list("the") + ["space"] + list("cat") + ["space"],
              "dt": 0.25}
    config = {"seed": 29, "noise": {"sigma_scale": 1.0}}
    replies = replay(client, script, config)
    batch = offline_replay(bundle, replies, DecoderConfig())
    final = replies[-1]
    assert final["committed"] == batch["committed"], \
        (final["committed"], batch["committed"])
    assert final["suggestion"] == batch["suggestion"]
    return {"script": script, "config": config, "replies": replies,
            "batch": batch}


def gen_toggle(client, bundle):
    """Seed search for a case where only the uncertainty flag flips the
    suggestion; observations are identical because the seed fixes them."""
    script = {"keys": list("cat"), "dt": 0.25}
    for seed in range(2000):
        variants = {}
        for unc in (True, False):
            config = {"seed": seed, "noise": {"sigma_scale": 1.6},
                      "decoder": {"uncertainty_enabled": unc}}
            variants[unc] = replay(client, script, config)
        obs_on = [r["observation"] for r in variants[True]]
        obs_off = [r["observation"] for r in variants[False]]
        if obs_on != obs_off:
            continue  # a miss made the scripts diverge; seeds must match draws
        s_on = variants[True][-1]["suggestion"]
        s_off = variants[False][-1]["suggestion"]
        if s_on and s_off and s_on != s_off:
            batch_on = offline_replay(bundle, variants[True],
                                      DecoderConfig(uncertainty_enabled=True))
            batch_off = offline_replay(bundle, variants[False],
                                       DecoderConfig(uncertainty_enabled=False))
            assert batch_on["suggestion"] == s_on
            assert batch_off["suggestion"] == s_off
            return {
                "script": script,
                "seed": seed,
                "sigma_scale": 1.6,
                "with_uncertainty": {"replies": variants[True], "batch": batch_on},
                "without_uncertainty": {"replies": variants[False], "batch": batch_off},
            }
    raise RuntimeError("no flipping seed found in range")


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    bundle = build_models(corpus_lines=CORPUS)
    app = create_app(bundle=bundle, seed=0)
    with TestClient(app) as client:
        for name, gen in [("noiseless", gen_noiseless), ("noisy", gen_noisy),
                          ("toggle", gen_toggle)]:
            fixture = gen(client, bundle)
            path = FIXTURES / f"{name}.json"
            path.write_text(json.dumps(fixture, indent=1) + "\n")
            print(f"wrote {path}")


if __name__ == "__main__":
    sys.exit(main())
