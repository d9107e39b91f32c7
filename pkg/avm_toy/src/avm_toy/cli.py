"""Command line: `avm-toy train`, `avm-toy complete`, `avm-toy finetune`.

complete reads a job directory (job.json + conditioning PNGs) and writes
out/%06d.png per the wire contract; without a checkpoint it runs a fresh
seeded model, which still honors the contract (conditioning frames are
pinned verbatim).
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from .data import load_clip_dir, make_dataset
from .jobs import ContractViolation
from .model import Denoiser
from .sampler import complete_job_dir
from .schedule import DiffusionSchedule
from .train import finetune, train


def _load_or_fresh(ckpt: str | None) -> Denoiser:
    if ckpt:
        return Denoiser.load(ckpt)
    return Denoiser(seed=0)


def cmd_train(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.data:
        clip_dirs = sorted(p for p in Path(args.data).iterdir() if p.is_dir())
        if not clip_dirs:
            print(f"avm-toy: no clip directories under {args.data}",
                  file=sys.stderr)
            return 2
        dataset = np.stack([load_clip_dir(p) for p in clip_dirs])
    else:
        dataset = make_dataset(args.synthetic_clips, rng)
    model = _load_or_fresh(args.init)
    schedule = DiffusionSchedule()
    train(model, dataset, steps=args.steps, schedule=schedule,
          batch_size=args.batch, lr=args.lr, seed=args.seed,
          log_every=args.log_every)
    model.save(args.out)
    print(f"saved checkpoint to {args.out}")
    return 0


def cmd_complete(args) -> int:
    model = _load_or_fresh(args.ckpt)
    out = complete_job_dir(args.job_dir, model, DiffusionSchedule(),
                           seed=args.seed)
    print(f"wrote {out}")
    return 0


def cmd_finetune(args) -> int:
    model = Denoiser.load(args.ckpt)
    clip = load_clip_dir(args.video, length=model.frames, size=model.size)
    tuned = finetune(model, clip, steps=args.steps,
                     schedule=DiffusionSchedule(), lr=args.lr, seed=args.seed)
    tuned.save(args.out)
    print(f"saved fine-tuned checkpoint to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="avm-toy")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="pretrain on clips (PNG dirs or synthetic)")
    p.add_argument("--data", help="directory of clip subdirectories")
    p.add_argument("--out", required=True, help="checkpoint path (.npz)")
    p.add_argument("--init", help="checkpoint to continue from")
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--batch", type=int, default=4)
    p.add_argument("--lr", type=float, default=2e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--synthetic-clips", type=int, default=64,
                   help="moving-square clips when --data is omitted")
    p.add_argument("--log-every", type=int, default=100)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("complete", help="fill in a job directory")
    p.add_argument("job_dir")
    p.add_argument("--ckpt", help="model checkpoint (fresh model if omitted)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("finetune", help="adapt a checkpoint to one clip")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--video", required=True, help="clip directory (PNGs)")
    p.add_argument("--out", required=True)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(func=cmd_finetune)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ContractViolation as exc:
        print(f"avm-toy: contract violation: {exc}", file=sys.stderr)
        return 4
    except FileNotFoundError as exc:
        print(f"avm-toy: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
