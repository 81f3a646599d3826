"""Per-environment bridge: newline-delimited JSON over stdin/stdout.

Spawned by the TypeScript bindings with a config file path (plus optional
dotted overrides); owns exactly one simulator environment.  Every request
carries an id echoed in the response; native exceptions surface as
{"ok": false, "error": {"type", "message"}}.
"""
import argparse
import json
import sys
from dataclasses import replace

from portnav.config import config_hash, config_to_dict, load_config, parse_override_value
from portnav.env import ShipEnv
from portnav.kinematics import ControlInput


def step_payload(result):
    return {
        "observation": list(result.observation.vector()),
        "reward": result.reward,
        "terminated": result.terminated,
        "truncated": result.truncated,
        "info": {
            "collision": result.info["collision"],
            "goal": result.info["goal"],
            "distance_to_goal": result.info["distance_to_goal"],
        },
    }


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--config", default=None)
    parser.add_argument("--set", dest="overrides", action="append", default=[])
    args = parser.parse_args()

    overrides = {}
    for item in args.overrides:
        key, value = item.split("=", 1)
        overrides[key] = parse_override_value(value)
    cfg = load_config(args.config, overrides)
    env = ShipEnv(cfg.env)
    cfg_dict = config_to_dict(cfg)

    out = sys.stdout
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        request = json.loads(line)
        rid = request.get("id")
        op = request.get("op")
        try:
            if op == "config":
                payload = {
                    "config": cfg_dict,
                    "config_hash": config_hash(cfg_dict),
                    "obs_dim": cfg.env.obs_dim,
                }
            elif op == "reset":
                obs = env.reset(int(request["seed"]))
                payload = {"observation": list(obs.vector())}
            elif op == "step":
                thrust, rudder = request["action"]
                payload = step_payload(env.step(ControlInput(float(thrust), float(rudder))))
            elif op == "set_vessel_params":
                env.set_vessel_params(replace(env.vessel_params, **request["params"]))
                payload = {}
            elif op == "close":
                out.write(json.dumps({"id": rid, "ok": True}) + "\n")
                out.flush()
                return 0
            else:
                raise ValueError(f"unknown op {op!r}")
            out.write(json.dumps({"id": rid, "ok": True, **payload}) + "\n")
        except Exception as e:
            out.write(
                json.dumps({"id": rid, "ok": False, "error": {"type": type(e).__name__, "message": str(e)}}) + "\n"
            )
        out.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
