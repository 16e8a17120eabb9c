"""Command-line interface: embed, eval, bench.

Exit codes: 0 ok, 1 usage, 2 I/O, 3 domain error, 4 numeric error.
Log level comes from the QREMBED_LOG environment variable (default INFO).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import diffusion, embio, evaluation, plotting, proximity
from .errors import DomainError, NumericError, QrembedError
from .graph import load_edge_list, transition_matrix
from .rangefinder import RbqrParams, StageTimer, rbqr_basis

log = logging.getLogger("qrembed")


@dataclass
class RunConfig:
    input: str
    output: str = None
    dim: int = 128
    block: int = 16
    power: int = 3
    lam: float = 1.0
    filter_kind: str = "heat"     # heat | markov | none
    K: int = 2
    theta_t: float = 0.5
    renormalize: bool = False
    unit_rows: bool = True
    truncate: bool = True
    seed: int = 0
    threads: int = 1
    fmt: str = "text"
    isolated: str = "selfloop"


def embed_pipeline(cfg: RunConfig, timer: StageTimer = None):
    """load -> transition -> context weights -> log-ratio matrix -> blocked QR -> filter.

    Returns (embedding, basis, timer).
    """
    timer = timer or StageTimer()
    with timer.stage("io_load"):
        g = load_edge_list(cfg.input, isolated=cfg.isolated)
    log.info("loaded graph: n=%d, arcs=%d", g.n, g.n_arcs)
    with timer.stage("transition"):
        t = transition_matrix(g)
    with timer.stage("proximity"):
        cw = proximity.context_weights(t)
        m = proximity.build_m(
            t, cw, proximity.ProximityConfig(lam=cfg.lam, truncate_nonpositive=cfg.truncate)
        )
    log.info("log-ratio matrix: nnz=%d", m.nnz)
    params = RbqrParams(k=cfg.dim, b=cfg.block, q=cfg.power, seed=cfg.seed)
    c, r = rbqr_basis(m, params, timer=timer)
    if cfg.filter_kind != "none":
        spec = diffusion.make_filter(cfg.filter_kind, K=cfg.K, t=cfg.theta_t)
        if cfg.renormalize:
            spec = diffusion.renormalized(spec)
        with timer.stage("filter"):
            if cfg.unit_rows:
                r = diffusion.unit_rows(r)
            r = diffusion.apply_filter(t, r, spec)
    for stage, sec in sorted(timer.seconds.items()):
        log.info("stage %-15s %8.3f s", stage, sec)
    return r, c, timer


def _limit_threads(threads: int):
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=threads)


def cmd_embed(cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    with _limit_threads(cfg.threads):
        emb, _, _ = embed_pipeline(cfg)
    embio.write(cfg.output, emb, fmt=cfg.fmt)
    log.info("wrote %dx%d embedding to %s (%.3f s total)",
             emb.shape[0], emb.shape[1], cfg.output, time.perf_counter() - t0)
    return 0


def cmd_eval(args) -> int:
    emb = embio.read(args.embedding)
    labels = evaluation.load_labels(args.labels, n=emb.shape[0])
    with _limit_threads(args.threads):
        report = evaluation.run_protocol(
            emb, labels, ratios=args.ratios, repeats=args.repeats,
            seed=args.seed, reg=args.reg, normalize=args.normalize,
        )
    print(report.table())
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(report.to_tsv())
        log.info("wrote report to %s", args.output)
        if not args.no_figure:
            fig = os.path.splitext(args.output)[0] + ".png"
            plotting.render_eval_figure(report, fig)
            log.info("wrote figure to %s", fig)
    return 0


BENCH_STAGES = ("io_load", "transition", "proximity", "rng",
                "sparse_product", "dense_product", "qr", "filter")


def cmd_bench(args) -> int:
    rows = []
    with _limit_threads(args.threads):
        for b in args.block_list:
            for q in args.power_list:
                cfg = RunConfig(
                    input=args.input, dim=args.dim, block=b, power=q,
                    lam=args.lam, filter_kind=args.filter, K=args.K,
                    theta_t=args.theta_t, seed=args.seed,
                )
                timer = StageTimer()
                embed_pipeline(cfg, timer=timer)
                row = {"b": b, "q": q, **{s: timer.seconds.get(s, 0.0) for s in BENCH_STAGES}}
                row["total"] = timer.total
                rows.append(row)

    header = ["b", "q", *BENCH_STAGES, "total"]
    print("\t".join(header))
    for row in rows:
        print("\t".join(
            str(row[h]) if h in ("b", "q") else f"{row[h]:.4f}" for h in header
        ))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write("\t".join(header) + "\n")
            for row in rows:
                fh.write("\t".join(
                    str(row[h]) if h in ("b", "q") else f"{row[h]:.6f}" for h in header
                ) + "\n")
        if not args.no_figure:
            fig = os.path.splitext(args.output)[0] + ".png"
            plotting.render_bench_figure(rows, BENCH_STAGES, fig)
            log.info("wrote figure to %s", fig)
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _int_list(text):
    return [int(x) for x in text.split(",")]


def _float_list(text):
    return [float(x) for x in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qrembed", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)

    pe = sub.add_parser("embed", help="compute node embeddings for an edge list")
    pe.add_argument("--input", required=True, help="edge-list file (may be .gz)")
    pe.add_argument("--output", required=True, help="embedding output file")
    pe.add_argument("--dim", type=int, default=128, help="embedding dimension k")
    pe.add_argument("--block", type=int, default=16, help="QR block size b")
    pe.add_argument("--power", type=int, default=3, help="power iteration count q")
    pe.add_argument("--lambda", dest="lam", type=float, default=1.0,
                    help="negative-sample ratio in the log-ratio matrix")
    pe.add_argument("--filter", choices=["heat", "markov", "none"], default="heat")
    pe.add_argument("--no-filter", action="store_true", help="alias for --filter none")
    pe.add_argument("--K", type=int, default=2, help="diffusion order")
    pe.add_argument("--theta-t", type=float, default=0.5, help="heat kernel time")
    pe.add_argument("--renormalize", action="store_true",
                    help="rescale filter coefficients to sum to 1")
    pe.add_argument("--raw-rows", action="store_true",
                    help="skip the unit-row scaling applied before the filter")
    pe.add_argument("--no-truncate", action="store_true",
                    help="keep non-positive log-ratio entries")
    pe.add_argument("--isolated", choices=["selfloop", "drop"], default="selfloop")
    pe.add_argument("--format", dest="fmt", choices=["text", "binary"], default="text")
    common(pe)

    pv = sub.add_parser("eval", help="node-classification protocol on an embedding")
    pv.add_argument("--embedding", required=True)
    pv.add_argument("--labels", required=True)
    pv.add_argument("--ratios", type=_float_list, default=[0.1, 0.3, 0.5, 0.7, 0.9])
    pv.add_argument("--repeats", type=int, default=10)
    pv.add_argument("--reg", type=float, default=1.0,
                    help="inverse L2 regularization strength")
    pv.add_argument("--normalize", action="store_true",
                    help="l2-normalize embedding rows before classification")
    pv.add_argument("--output", help="TSV report path (figure written alongside)")
    pv.add_argument("--no-figure", action="store_true")
    common(pv)

    pb = sub.add_parser("bench", help="per-stage timing sweep over (b, q)")
    pb.add_argument("--input", required=True)
    pb.add_argument("--dim", type=int, default=128)
    pb.add_argument("--block-list", type=_int_list, default=[8, 16, 32, 64])
    pb.add_argument("--power-list", type=_int_list, default=[1, 2, 3, 4])
    pb.add_argument("--lambda", dest="lam", type=float, default=1.0)
    pb.add_argument("--filter", choices=["heat", "markov", "none"], default="heat")
    pb.add_argument("--K", type=int, default=2)
    pb.add_argument("--theta-t", type=float, default=0.5)
    pb.add_argument("--output", help="TSV timing table path (figure written alongside)")
    pb.add_argument("--no-figure", action="store_true")
    common(pb)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("QREMBED_LOG", "INFO").upper(),
        format="%(levelname)s %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        if args.command == "embed":
            cfg = RunConfig(
                input=args.input, output=args.output, dim=args.dim, block=args.block,
                power=args.power, lam=args.lam,
                filter_kind="none" if args.no_filter else args.filter,
                K=args.K, theta_t=args.theta_t, renormalize=args.renormalize,
                unit_rows=not args.raw_rows,
                truncate=not args.no_truncate, seed=args.seed,
                threads=args.threads, fmt=args.fmt, isolated=args.isolated,
            )
            return cmd_embed(cfg)
        if args.command == "eval":
            return cmd_eval(args)
        if args.command == "bench":
            return cmd_bench(args)
        return 1
    except NumericError as exc:
        log.error("numeric error: %s", exc)
        return 4
    except (DomainError, QrembedError) as exc:
        log.error("%s", exc)
        return 3
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
