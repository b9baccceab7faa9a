"""Command-line front end for the sender, server and receiver roles and the experiments."""

from __future__ import annotations

import argparse
import secrets
import sys
from pathlib import Path

import numpy as np

from covertdomain import covert, experiments
from covertdomain.gf2 import GENERAL, PERMUTATION, HidingKey
from covertdomain.image import load_image, save_image
from covertdomain.stego import Payload, embed, extract

PROG = "covertdomain"
KEY_BYTES = 32


def _capacities(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid capacity list {text!r}") from None
    if not values or any(v < 0 for v in values):
        raise argparse.ArgumentTypeError(f"invalid capacity list {text!r}")
    return values


def _dims(text: str) -> tuple[int, int]:
    try:
        w, r = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"dimensions must look like 512x384, got {text!r}") from None
    if w < 1 or r < 1:
        raise argparse.ArgumentTypeError("dimensions must be positive")
    return w, r


def _read_key(path: str) -> HidingKey:
    return HidingKey(Path(path).read_bytes())


def _mode(case: str | None) -> str:
    return PERMUTATION if case == "inner" else GENERAL


def _capacity_for(args, size: int) -> int:
    if args.case == "inner":
        if args.capacity not in (None, size):
            raise ValueError(f"case inner embeds exactly one bit per pixel ({size})")
        return size
    if args.capacity is None:
        raise ValueError("--capacity is required")
    return args.capacity


def _write_or_print(args, data: bytes, text: str) -> None:
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        print(text)


def cmd_keygen(args) -> None:
    if args.seed is None:
        key = secrets.token_bytes(KEY_BYTES)
    else:
        key = np.random.default_rng(args.seed).bytes(KEY_BYTES)
    Path(args.out).write_bytes(key)


def cmd_embed(args) -> None:
    cover = load_image(args.input)
    k = _capacity_for(args, cover.size)
    payload = Payload.from_bytes(Path(args.bits).read_bytes(), k)
    stego = embed(cover, payload, _read_key(args.key), mode=_mode(args.case))
    save_image(stego, args.out)


def cmd_extract(args) -> None:
    stego = load_image(args.input)
    k = _capacity_for(args, stego.size)
    payload = extract(stego, _read_key(args.key), k, mode=_mode(args.case))
    _write_or_print(args, payload.to_bytes(), "".join(map(str, payload.bits.tolist())))


def cmd_compute(args) -> None:
    y1, y2 = load_image(args.input), load_image(args.in2)
    if args.case == "add":
        res = covert.covert_add(y1, y2)
    elif args.case == "outer":
        res = covert.covert_outer(y1, y2)
    else:
        semantics = covert.Semantics.INTEGER if args.semantics == "int" else covert.Semantics.GF2
        res = covert.covert_inner(y1, y2, semantics)
    Path(args.out).write_bytes(res.to_bytes())


def cmd_recover(args) -> None:
    res = covert.CovertResult.from_bytes(Path(args.input).read_bytes())
    if res.case is covert.Case.INNER:
        value = covert.recover_inner(res)
        _write_or_print(args, f"{value}\n".encode(), str(value))
        return
    if args.capacity is None:
        raise ValueError("--capacity is required to recover ADD and OUTER results")
    key = _read_key(args.key)
    if res.case is covert.Case.ADD:
        payload = covert.recover_add(res, key, args.capacity)
        _write_or_print(args, payload.to_bytes(), "".join(map(str, payload.bits.tolist())))
    else:
        bits = covert.recover_outer(res, key, args.capacity).to_bits()
        text = "\n".join("".join(map(str, row)) for row in bits.tolist())
        _write_or_print(args, Payload(bits.reshape(-1)).to_bytes(), text)


def _emit_report(args, report: experiments.ExperimentReport) -> None:
    text = report.to_text()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_exp_feasibility(args) -> None:
    k = args.capacity[0] if args.capacity else 1000
    _emit_report(args, experiments.run_feasibility(seed=args.seed, k=k, cover_dims=args.dims, trials=args.trials))


def cmd_exp_security(args) -> None:
    caps = args.capacity or experiments.DEFAULT_CAPACITIES
    _emit_report(
        args,
        experiments.run_security(seed=args.seed, trials=args.trials, capacities=caps, cover_dims=args.dims),
    )


def cmd_exp_timing(args) -> None:
    caps = args.capacity or experiments.DEFAULT_CAPACITIES
    _emit_report(
        args, experiments.run_timing(seed=args.seed, capacities=caps, runs=args.trials, cover_dims=args.dims)
    )


def cmd_exp_steganalysis(args) -> None:
    caps = args.capacity or experiments.DEFAULT_CAPACITIES
    _emit_report(
        args,
        experiments.run_steganalysis(args.corpus, capacities=caps, seed=args.seed, repetitions=args.trials),
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("keygen", help="write a random hiding key")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, help="derive the key deterministically (testing only)")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("embed", help="sender: hide a payload bit file in a cover")
    p.add_argument("--key", required=True)
    p.add_argument("--in", dest="input", required=True, help="cover image")
    p.add_argument("--bits", required=True, help="payload, packed MSB first")
    p.add_argument("--capacity", type=int, help="payload length k in bits")
    p.add_argument("--case", choices=["add", "outer", "inner"], help="inner uses a permutation matrix")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="receiver: read a payload from a stego image")
    p.add_argument("--key", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--capacity", type=int)
    p.add_argument("--case", choices=["add", "outer", "inner"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("compute", help="server: compute on two stego images")
    p.add_argument("--case", choices=["add", "outer", "inner"], required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--in2", required=True)
    p.add_argument("--semantics", choices=["gf2", "int"], default="gf2")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("recover", help="receiver: recover the result from a server container")
    p.add_argument("--key")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--capacity", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_recover)

    for name, func, dims, trials in [
        ("exp-feasibility", cmd_exp_feasibility, (512, 512), 100),
        ("exp-security", cmd_exp_security, (512, 384), 100),
        ("exp-timing", cmd_exp_timing, (512, 512), 5),
        ("exp-steganalysis", cmd_exp_steganalysis, None, 10),
    ]:
        p = sub.add_parser(name, help=f"run the {name[4:]} experiment")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--trials", type=int, default=trials)
        p.add_argument("--capacity", type=_capacities, help="comma-separated payload lengths")
        p.add_argument("--out")
        if dims is not None:
            p.add_argument("--dims", type=_dims, default=dims, help="cover size WxH")
        else:
            p.add_argument("--corpus", required=True, help="directory of grayscale images")
        p.set_defaults(func=func)
    return parser


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command in ("embed", "extract") and args.capacity is not None and args.capacity < 1:
        print(f"{PROG}: error: --capacity must be positive", file=sys.stderr)
        return 2
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(cli_main())
