"""Command line: plan | simulate | evaluate | replay | serve.

plan      solve a level's subtasks and write the policy cache next to it
simulate  run one seeded headless episode and write its step log
evaluate  run episode batches per configuration and write a CSV summary
replay    re-execute a log and verify bit-exact agreement
serve     start the session server for live play
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .level import LevelError, load_level, resolve_level_path
from .planner import CacheError, default_cache_path, load_cache, plan_level, save_cache
from .session import CacheNotConvergedError
from .simulate import (
    ScriptedHuman,
    evaluate,
    read_log,
    replay_verify,
    run_episode,
    summary_to_csv,
    tracking_accuracy,
    write_log,
)

_HUMAN_CHOICES = ("softmax", "softmax-capir", "greedy", "greedy-nearest", "random")
_ASSISTANT_CHOICES = ("capir", "random", "oracle")


def _load_level_or_die(ref):
    try:
        return load_level(ref), resolve_level_path(ref)
    except LevelError as exc:
        sys.exit(f"error: {exc}")


def _load_cache_or_die(level, level_path, cache_arg, allow_nonconverged):
    path = Path(cache_arg) if cache_arg else default_cache_path(level_path)
    if not path.is_file():
        sys.exit(f"error: no policy cache at {path}; run: capir plan --level {level_path}")
    try:
        cache = load_cache(path, level)
    except CacheError as exc:
        sys.exit(f"error: {exc}")
    if not cache.converged and not allow_nonconverged:
        sys.exit("error: cache is marked non-converged; re-plan or pass --allow-nonconverged")
    return cache


def cmd_plan(args):
    level, level_path = _load_level_or_die(args.level)
    cache = plan_level(level, epsilon=args.epsilon, max_iterations=args.max_iterations)
    out = Path(args.cache) if args.cache else default_cache_path(level_path)
    save_cache(cache, out)
    for i, rep in enumerate(cache.reports):
        tag = "converged" if rep.converged else "NOT CONVERGED"
        print(
            f"subtask {i}: {cache.qtables[i].shape[0]} states, "
            f"{rep.iterations} sweeps, residual {rep.final_residual:.3e}, "
            f"{rep.wall_time:.2f}s [{tag}]"
        )
    print(f"wrote {out}")
    if not cache.converged:
        print("warning: cache contains non-converged subtasks; serving requires --allow-nonconverged")


def cmd_simulate(args):
    level, level_path = _load_level_or_die(args.level)
    cache = _load_cache_or_die(level, level_path, args.cache, args.allow_nonconverged)
    human = ScriptedHuman(args.human, args.targeting, beta=args.beta)
    log = run_episode(
        level,
        cache,
        human,
        assistant=args.assistant,
        seed=args.seed,
        max_steps=args.max_steps,
        allow_nonconverged=args.allow_nonconverged,
    )
    out = Path(args.out) if args.out else Path(f"episode_{level.name}_seed{args.seed}.jsonl")
    write_log(log, out)
    print(f"{log.outcome} in {log.total_steps} steps; tracking accuracy {tracking_accuracy(log):.3f}")
    print(f"wrote {out}")


def cmd_evaluate(args):
    level, level_path = _load_level_or_die(args.level)
    cache = _load_cache_or_die(level, level_path, args.cache, args.allow_nonconverged)
    human_cfg = ScriptedHuman(args.human, args.targeting, beta=args.beta).config()
    configs = [
        {"name": a, "human": human_cfg, "assistant": a, "max_steps": args.max_steps}
        for a in args.assistant.split(",")
    ]
    rows = evaluate(level, cache, configs, episodes=args.episodes, base_seed=args.seed)
    out = Path(args.out) if args.out else Path(f"evaluate_{level.name}.csv")
    summary_to_csv(rows, out)
    for row in rows:
        print(
            f"{row['config']:>8}: mean {row['mean_steps']:.1f} ± {row['sem']:.1f} steps, "
            f"completion {row['completion_rate']:.0%} over {row['episodes']} episodes"
        )
    print(f"wrote {out}")


def cmd_replay(args):
    log = read_log(args.log)
    level, level_path = _load_level_or_die(args.level if args.level else log.level_name)
    cache = _load_cache_or_die(level, level_path, args.cache, args.allow_nonconverged)
    ok, divergence = replay_verify(log, level, cache)
    if ok:
        print(f"replay ok: {log.total_steps} steps reproduced bit-exactly")
        return
    sys.exit(f"replay DIVERGED at step {divergence['step']}, field {divergence['field']}: "
             f"expected {divergence['expected']!r}, got {divergence['got']!r}")


def cmd_serve(args):
    import uvicorn

    from .server import create_app

    static = args.static if args.static and Path(args.static).is_dir() else None
    app = create_app(allow_nonconverged=args.allow_nonconverged, static_dir=static)
    uvicorn.run(app, host=args.host, port=args.port)


def build_parser():
    parser = argparse.ArgumentParser(prog="capir", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, cache=True):
        p.add_argument("--level", required=True, help="level file path or bundled level name")
        if cache:
            p.add_argument("--cache", help="policy cache path (default: next to the level file)")
            p.add_argument("--allow-nonconverged", action="store_true",
                           help="serve caches whose solver hit max_iterations")

    p = sub.add_parser("plan", help="solve a level's subtasks and write the policy cache")
    common(p, cache=False)
    p.add_argument("--cache", help="output path (default: next to the level file)")
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--max-iterations", type=int, default=10_000)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="run one seeded headless episode")
    common(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--human", choices=_HUMAN_CHOICES, default="softmax")
    p.add_argument("--targeting", choices=("fixed", "switching"), default="fixed")
    p.add_argument("--assistant", choices=_ASSISTANT_CHOICES, default="capir")
    p.add_argument("--beta", type=float, default=1.0, help="softmax sharpness for the scripted human")
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--out", help="episode log path (.jsonl)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", help="run episode batches and write a CSV summary")
    common(p)
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--seed", type=int, default=0, help="base seed; episode i uses seed base+i")
    p.add_argument("--human", choices=_HUMAN_CHOICES, default="softmax")
    p.add_argument("--targeting", choices=("fixed", "switching"), default="fixed")
    p.add_argument("--assistant", default="capir,random",
                   help="comma-separated assistant policies to compare")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--out", help="summary CSV path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("replay", help="re-execute an episode log and verify it")
    p.add_argument("log", help="episode log (.jsonl) to verify")
    p.add_argument("--level", help="level path or name (default: from the log header)")
    p.add_argument("--cache", help="policy cache path (default: next to the level file)")
    p.add_argument("--allow-nonconverged", action="store_true")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="start the session server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static", help="directory with the browser client build to serve at /")
    p.add_argument("--allow-nonconverged", action="store_true")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CacheNotConvergedError as exc:
        sys.exit(f"error: {exc}")


if __name__ == "__main__":
    main()
