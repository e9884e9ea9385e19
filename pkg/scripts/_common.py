import argparse
import sys
from pathlib import Path

from relaynet.cli import run


def parser(description, trials=20_000):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--trials", type=int, default=trials)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", type=Path, default=Path("results"))
    return p


def call(args, *argv):
    argv = [*argv, "--trials", str(args.trials), "--workers", str(args.workers), "--seed", str(args.seed)]
    print("relaynet", " ".join(argv), flush=True)
    code = run(argv)
    if code:
        sys.exit(code)
