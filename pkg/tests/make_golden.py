"""Regenerate tests/fixtures/golden_session.json.

Run from the repo root when the protocol or engine intentionally changes:

    python3 tests/make_golden.py

The fixture pins byte-exact act-response bodies for a scripted session on
the fixture level. diagnostics.latency_ms is wall-clock and is stored (and
compared) zeroed; every other byte is exact.
"""

import json
import shutil
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from capir.level import parse_level
from capir.mdp import canonical_json
from capir.planner import default_cache_path, plan_level, save_cache
from capir.server import create_app
from capir.simulate import ScriptedHuman, run_episode

FIXTURES = Path(__file__).parent / "fixtures"
SEED = 123


def normalize_act_body(text: str) -> str:
    obj = json.loads(text)
    obj["diagnostics"]["latency_ms"] = 0.0
    return canonical_json(obj)


def scripted_actions(level, cache):
    """First ten greedy-human actions on the fixture level (deterministic);
    the opening SHOOT lands a kill, so the fixture covers belief shrink."""
    log = run_episode(level, cache, ScriptedHuman("greedy"), assistant="capir", seed=SEED)
    assert log.outcome == "won", "fixture script must finish the level"
    assert log.steps[0].kills, "fixture script must open with a kill"
    return [rec.human_action for rec in log.steps][:10]


def main():
    level = parse_level((FIXTURES / "fixture_level.lvl").read_text(), "fixture_level")
    cache = plan_level(level)
    actions = scripted_actions(level, cache)

    with tempfile.TemporaryDirectory() as tmp:
        level_dir = Path(tmp)
        shutil.copy(FIXTURES / "fixture_level.lvl", level_dir / "fixture_level.lvl")
        save_cache(cache, default_cache_path(level_dir / "fixture_level.lvl"))

        import os

        os.environ["CAPIR_LEVEL_DIR"] = str(level_dir)
        try:
            client = TestClient(create_app())
            create_resp = client.post("/sessions", json={"level_id": "fixture_level", "seed": SEED})
            assert create_resp.status_code == 200, create_resp.text
            session_id = json.loads(create_resp.text)["session_id"]
            bodies = []
            for action in actions:
                resp = client.post("/act", json={"session_id": session_id, "action": action})
                assert resp.status_code == 200, resp.text
                bodies.append(normalize_act_body(resp.text))
        finally:
            del os.environ["CAPIR_LEVEL_DIR"]

    golden = {
        "level": "fixture_level",
        "seed": SEED,
        "actions": actions,
        "create": create_resp.text,
        "responses": bodies,
    }
    text = json.dumps(golden, indent=1, sort_keys=True) + "\n"
    out = FIXTURES / "golden_session.json"
    out.write_text(text)
    print(f"wrote {out} ({len(actions)} steps)")
    frontend_copy = FIXTURES.parent.parent / "frontend" / "tests" / "fixtures" / "golden_session.json"
    if frontend_copy.parent.is_dir():
        frontend_copy.write_text(text)
        print(f"wrote {frontend_copy}")


if __name__ == "__main__":
    main()
