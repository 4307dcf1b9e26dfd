"""Command-line entry point: ``sentlu <subcommand> [flags]``.

Data goes to ``--out`` (or standard output when absent), progress to standard
error. Every JSON summary starts with the full resolved configuration, so no
default is hidden. Exit codes: 0 success, 1 invalid input, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from . import experiments as X
from .codec import (
    DEFAULT_MAX_NODES,
    EnumerationLimitError,
    GrammarError,
    TokenVocab,
    decode,
    enumerate_linearizations,
    read_sequences,
    write_sequences,
)
from .datasets import (
    DatasetError,
    DatasetSpec,
    generate as generate_dataset,
    toy_molecules,
)
from .graph import GraphError, LabeledGraph, canonical_certificate, dump_graphs, iter_records
from .metrics import (
    K_SWEEP,
    length_analysis,
    linearization_uncertainty,
    sequence_diversity,
    stability,
    vun,
)
from .model import (
    DEFAULT_BACKOFF,
    DEFAULT_ORDER,
    DEFAULT_SMOOTHING,
    NgramScorer,
    NllFormatError,
    NllRecord,
    generate,
    group_by_graph,
    ingest_nll,
    score,
    write_nll_csv,
)
from .strategies import ALL_STRATEGIES, Strategy

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2

VALIDATION_ERRORS = (GraphError, GrammarError, NllFormatError, FileNotFoundError, KeyError,
                     ValueError, json.JSONDecodeError)
RUNTIME_ERRORS = (EnumerationLimitError, DatasetError, RuntimeError, OSError)


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _config(args: argparse.Namespace) -> dict:
    # worker count never changes results, so it stays out of the output
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command_path", "workers")}


def _emit_text(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit(args: argparse.Namespace, result: dict, rows: list[dict] | None = None,
          out: str | None = None) -> None:
    """JSON summary (config header + result) or CSV of ``rows``."""
    out = args.out if out is None else out
    if getattr(args, "format", "json") == "csv" and rows is not None:
        buf = io.StringIO()
        cols = list(rows[0]) if rows else []
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _csv_value(v) for k, v in r.items()})
        _emit_text(buf.getvalue(), out)
        return
    doc = {"command": args.command_path, "config": _config(args), "result": result}
    _emit_text(json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n", out)


def _csv_value(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (dict, list)):
        return json.dumps(_clean(v), sort_keys=True)
    return v


def _summary(args: argparse.Namespace, result: dict) -> None:
    """Summary for commands whose data already went to ``--out``."""
    doc = {"command": args.command_path, "config": _config(args), "result": result}
    sys.stdout.write(json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n")


def _load(path: str) -> tuple[list[str], list[LabeledGraph], list[dict]]:
    if not Path(path).is_file():
        raise FileNotFoundError(f"no such file: {path}")
    ids, graphs, extras = [], [], []
    for gid, g, extra in iter_records(path):
        ids.append(gid)
        graphs.append(g)
        extras.append(extra)
    if not graphs:
        raise ValueError(f"{path}: no graphs")
    return ids, graphs, extras


def _check_k(k: int) -> None:
    if k < 2:
        raise ValueError(f"--k must be >= 2 for linearization uncertainty, got {k}")


def _strategy(args) -> Strategy:
    return Strategy.parse(args.strategy)


def _vocab_for(graphs: Sequence[LabeledGraph], max_nodes: int) -> TokenVocab:
    return TokenVocab.from_graphs(graphs, max_nodes=max_nodes)


def _load_model(path: str) -> NgramScorer:
    if not Path(path).is_file():
        raise FileNotFoundError(f"no such model file: {path}")
    return NgramScorer.load(path)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_gen_data(args) -> int:
    if args.kind == "toy-suite":
        mols = toy_molecules()
        dump_graphs([m.graph for m in mols], args.out,
                    [{"id": m.name, "stable": m.stable} for m in mols])
        _summary(args, {"n_graphs": len(mols), "n_stable": sum(m.stable for m in mols)})
        return EXIT_OK
    extra = {"min_heavy": args.min_nodes, "max_heavy": args.max_nodes} if args.kind == "toy-molecules" else {}
    spec = DatasetSpec(args.kind, args.n, min_nodes=args.min_nodes, max_nodes=args.max_nodes,
                       edge_prob=args.edge_prob, connected=not args.disconnected, seed=args.seed,
                       extra=extra)
    graphs = generate_dataset(spec)
    dump_graphs(graphs, args.out, [{"id": str(i)} for i in range(len(graphs))])
    _summary(args, {"n_graphs": len(graphs), "mean_nodes": float(np.mean([g.n for g in graphs])),
                    "mean_edges": float(np.mean([g.m for g in graphs]))})
    return EXIT_OK


def cmd_encode(args) -> int:
    _, graphs, _ = _load(args.inp)
    st = _strategy(args)
    seqs = [s for i, g in enumerate(graphs)
            for s in X.linearizations(g, st, args.seed, i, args.k, max_nodes=args.max_nodes)]
    if args.out:
        write_sequences(seqs, args.out)
    else:
        sys.stdout.write("".join(str(s) + "\n" for s in seqs))
    return EXIT_OK


def cmd_decode(args) -> int:
    if not Path(args.inp).is_file():
        raise FileNotFoundError(f"no such file: {args.inp}")
    seqs = read_sequences(args.inp)
    graphs = []
    for lineno, s in enumerate(seqs, 1):
        try:
            graphs.append(decode(s))
        except GrammarError as exc:
            raise GrammarError(f"{args.inp}: sequence {lineno}: {exc}") from None
    out = args.out or "/dev/stdout"
    dump_graphs(graphs, out, [{"id": str(i)} for i in range(len(graphs))])
    return EXIT_OK


def cmd_roundtrip(args) -> int:
    _, graphs, _ = _load(args.inp)
    st = _strategy(args)
    exact = 0
    total = 0
    for i, g in enumerate(graphs):
        for s in X.linearizations(g, st, args.seed, i, args.k, max_nodes=args.max_nodes):
            total += 1
            if decode(s).relabel(s.node_order) == g and len(s) == s.stats.expected_length:
                exact += 1
    print(f"{exact}/{total} exact")
    return EXIT_OK if exact == total else EXIT_RUNTIME


def cmd_enumerate(args) -> int:
    ids, graphs, _ = _load(args.inp)
    rows = []
    seqs_out = []
    for gid, g in zip(ids, graphs):
        pre = enumerate_linearizations(g, args.limit)
        rows.append({"graph_id": gid, "n": g.n, "m": g.m, "preimage_size": len(pre)})
        seqs_out.extend(pre)
    if args.sequences:
        write_sequences(seqs_out, args.sequences)
    _emit(args, {"graphs": rows}, rows)
    return EXIT_OK


def cmd_train(args) -> int:
    _, graphs, _ = _load(args.train)
    vocab_graphs = list(graphs)
    if args.test:
        vocab_graphs += _load(args.test)[1]
    vocab = _vocab_for(vocab_graphs, args.max_nodes)
    st = _strategy(args)
    _progress(f"training {st.value} n-gram on {len(graphs)} graphs x {args.epochs} epochs")
    model = X.train_strategy_model(graphs, st, vocab, args.seed, args.epochs, args.order,
                                   args.smoothing, args.backoff)
    model.save(args.out)
    _summary(args, {"vocab_size": vocab.size, "n_contexts": len(model.counts)})
    return EXIT_OK


def cmd_score(args) -> int:
    model = _load_model(args.model)
    ids, graphs, _ = _load(args.inp)
    st = _strategy(args)
    records = []
    for i, (gid, g) in enumerate(zip(ids, graphs)):
        for j, s in enumerate(X.linearizations(g, st, args.seed, i, args.k, max_nodes=model.vocab.max_nodes)):
            sc = score(model, s, masked=args.masked)
            records.append(NllRecord(gid, j, st.value, sc.total_nll, sc.n_tokens))
    write_nll_csv(records, args.out or "/dev/stdout")
    return EXIT_OK


def cmd_generate(args) -> int:
    model = _load_model(args.model)
    gens = [generate(model, args.max_len, args.temperature, (args.seed, X.STREAM_GENERATE, i))
            for i in range(args.n_gen)]
    if args.out:
        write_sequences([g.sequence for g in gens], args.out)
    else:
        sys.stdout.write("".join(str(g.sequence) + "\n" for g in gens))
    if args.graphs_out:
        dump_graphs([decode(g.sequence, model.vocab) for g in gens], args.graphs_out,
                    [{"id": str(i), "generation_nll": g.nll} for i, g in enumerate(gens)])
    if args.nll_out:
        write_nll_csv([NllRecord(str(i), 0, model.strategy or "", g.nll, g.n_tokens)
                       for i, g in enumerate(gens)], args.nll_out)
    return EXIT_OK


def _lu_rows(groups: dict[str, list[NllRecord]]) -> list[dict]:
    rows = []
    for gid, recs in groups.items():
        lu = linearization_uncertainty([r.nll for r in recs], gid)
        rows.append({"graph_id": gid, "k": lu.k, "mean_nll": lu.mean, "std_nll": lu.std, "lu": lu.lu})
    return rows


def cmd_eval_lu(args) -> int:
    if args.nll_file:
        groups = group_by_graph(ingest_nll(args.nll_file))
    else:
        if not (args.model and args.inp):
            raise ValueError("eval lu needs --nll-file, or --model with --in")
        _check_k(args.k)
        model = _load_model(args.model)
        ids, graphs, _ = _load(args.inp)
        res = X.score_graphs(model, graphs, _strategy(args), args.k, args.seed, args.workers)
        groups = {gid: [NllRecord(gid, j, args.strategy, x, n) for j, (x, n) in enumerate(zip(r.nlls, r.n_tokens))]
                  for gid, r in zip(ids, res)}
    rows = _lu_rows(groups)
    _emit(args, {"mean_lu": float(np.mean([r["lu"] for r in rows])), "graphs": rows}, rows)
    return EXIT_OK


def cmd_eval_ece(args) -> int:
    _check_k(args.k)
    model = _load_model(args.model)
    _, graphs, _ = _load(args.inp)
    cell = X.evaluate(model, graphs, _strategy(args), args.k, args.seed, args.workers)
    result = cell.summary()
    rows = [{"token_type": "all", "ece": cell.ece}] + [
        {"token_type": t, "ece": v} for t, v in sorted(cell.ece_by_type.items())]
    _emit(args, result, rows)
    return EXIT_OK


def cmd_eval_cross(args) -> int:
    _check_k(args.k)
    _, train, _ = _load(args.train)
    _, test, _ = _load(args.test)
    vocab = _vocab_for(train + test, args.max_nodes)
    models = {}
    for st in ALL_STRATEGIES:
        _progress(f"training {st.value}")
        models[st] = X.train_strategy_model(train, st, vocab, args.seed, args.epochs, args.order,
                                            args.smoothing, args.backoff)
    grid = X.cross_eval(models, test, args.k, args.seed, args.workers, progress=_progress)
    rows = [{"train_strategy": tr.value, "eval_strategy": ev.value, **cell.summary()}
            for (tr, ev), cell in grid.items()]
    result = {
        "grid": rows,
        "summary": X.summary_table(grid),
        "ece_increase_by_type": {st.value: X.ece_increase_by_type(grid, st) for st in ALL_STRATEGIES},
    }
    _emit(args, result, rows)
    return EXIT_OK


def cmd_eval_self_assess(args) -> int:
    _check_k(args.k)
    model = _load_model(args.model)
    sa = X.self_assessment(model, _strategy(args), args.n_gen, args.k, args.seed, args.max_len,
                           args.temperature, args.workers)
    rows = [dict(r.__dict__) for r in sa.rows]
    _emit(args, {"summary": sa.summary(), "rows": rows}, rows)
    return EXIT_OK


def _pool_prediction(args):
    _check_k(args.k)
    model = _load_model(args.model)
    ids, graphs, extras = _load(args.inp)
    labels = []
    for gid, g, extra in zip(ids, graphs, extras):
        if "stable" in extra:
            labels.append(bool(extra["stable"]))
        else:
            labels.append(stability(g).mol_stable)
    pool = X.StabilityPool(graphs, labels, ids)
    return X.pool_stability(model, pool, _strategy(args), args.k, args.seed,
                            Strategy.parse(args.eval_strategy), args.workers)


def cmd_eval_stability_auc(args) -> int:
    pred = _pool_prediction(args)
    rows = [{"predictor": name, "auc": pred.auc[name], "spearman": pred.spearman[name]}
            for name in pred.auc]
    _emit(args, pred.summary(), rows)
    return EXIT_OK


def cmd_eval_k_sweep(args) -> int:
    if args.k != 32:
        raise ValueError("k-sweep subsamples a shared 32-permutation run; use --k 32")
    pred = _pool_prediction(args)
    ks = tuple(int(x) for x in args.ks.split(","))
    sweep = X.k_sweep_from_matrix(pred.nll_matrix, pred.labels, ks)
    rows = [{"k": k, "auc": v} for k, v in sweep.items()]
    _emit(args, {"auc_by_k": {str(k): v for k, v in sweep.items()},
                 "full_run_lu_auc": pred.auc["lu"]}, rows)
    return EXIT_OK


def cmd_eval_length(args) -> int:
    groups = {"input": read_sequences(args.inp)}
    if args.test:
        groups["test"] = read_sequences(args.test)
    result = {name: length_analysis(seqs).summary() for name, seqs in groups.items()}
    rows = [{"group": name, "n_sequences": r["n_sequences"], "mean_length": r["mean_length"],
             "mean_chords": r["mean_chords"], "mean_segments": r["mean_segments"],
             "identity_violations": r["identity_violations"]} for name, r in result.items()]
    _emit(args, result, rows)
    return EXIT_OK


def cmd_eval_diversity(args) -> int:
    seqs = read_sequences(args.inp)
    d = sequence_diversity(seqs)
    rows = [{"n_sequences": len(seqs), "distinct": len({s.tokens for s in seqs}), "diversity": d}]
    _emit(args, rows[0], rows)
    return EXIT_OK


def cmd_eval_vun(args) -> int:
    path = Path(args.inp)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {args.inp}")
    if path.suffix in (".jsonl", ".json"):
        generated = _load(args.inp)[1]
    else:
        generated = [decode(s) for s in read_sequences(args.inp)]
    _, train, _ = _load(args.train)
    certs = {canonical_certificate(g) for g in train}
    res = vun(generated, certs, X.VALIDITY[args.validity])
    row = dict(res.__dict__)
    _emit(args, row, [row])
    return EXIT_OK


def cmd_sweep(args) -> int:
    _, pool, _ = _load(args.train)
    sizes = [int(x) for x in args.train_sizes.split(",") if x.strip()]
    vocab = _vocab_for(pool, args.max_nodes)
    rows = X.training_size_sweep(pool, sizes, vocab, ALL_STRATEGIES, args.seed, args.n_gen,
                                 args.epochs, args.order, args.smoothing, args.validity,
                                 args.max_len, args.temperature, args.workers, _progress)
    out = [r.as_dict() for r in rows]
    _emit(args, {"rows": out}, out)
    return EXIT_OK


def cmd_ingest_nll(args) -> int:
    records = ingest_nll(args.inp)
    groups = group_by_graph(records)
    rows = []
    for gid, recs in groups.items():
        row = {"graph_id": gid, "k": len(recs), "strategies": ",".join(sorted({r.strategy for r in recs})),
               "mean_nll": float(np.mean([r.nll for r in recs])),
               "nll_per_token": math.fsum(r.nll for r in recs) / max(1, sum(r.n_tokens for r in recs))}
        row["lu"] = linearization_uncertainty([r.nll for r in recs]).lu if len(recs) >= 2 else None
        rows.append(row)
    _emit(args, {"n_records": len(records), "n_graphs": len(groups), "graphs": rows}, rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, *flags: str) -> None:
    if "seed" in flags:
        p.add_argument("--seed", type=int, default=0, help="root seed for every random draw (default 0)")
    if "strategy" in flags:
        p.add_argument("--strategy", default="random", choices=[s.value for s in Strategy],
                       help="linearization strategy (default random)")
    if "k" in flags:
        p.add_argument("--k", type=int, default=32, help="linearizations per graph (default 32)")
    if "model" in flags:
        p.add_argument("--order", type=int, default=DEFAULT_ORDER,
                       help=f"n-gram order (default {DEFAULT_ORDER})")
        p.add_argument("--smoothing", type=float, default=DEFAULT_SMOOTHING,
                       help=f"add-k smoothing of the unigram level (default {DEFAULT_SMOOTHING})")
        p.add_argument("--backoff", type=float, default=DEFAULT_BACKOFF,
                       help=f"backoff prior strength (default {DEFAULT_BACKOFF})")
        p.add_argument("--epochs", type=int, default=X.DEFAULT_EPOCHS,
                       help=f"linearizations of each training graph (default {X.DEFAULT_EPOCHS})")
    if "max-nodes" in flags:
        p.add_argument("--max-nodes", type=int, default=DEFAULT_MAX_NODES,
                       help=f"node-index vocabulary size (default {DEFAULT_MAX_NODES})")
    if "format" in flags:
        p.add_argument("--format", choices=("json", "csv"), default="json",
                       help="output format (default json)")
    if "out" in flags:
        p.add_argument("--out", default=None, help="output file (default standard output)")
    if "in" in flags:
        p.add_argument("--in", dest="inp", required=True, help="input file")
    if "workers" in flags:
        p.add_argument("--workers", type=int, default=1,
                       help="worker processes; results do not depend on it (default 1)")
    if "gen" in flags:
        p.add_argument("--n-gen", type=int, default=64, help="number of generations (default 64)")
        p.add_argument("--temperature", type=float, default=1.0,
                       help="sampling temperature; <= 0 is greedy (default 1.0)")
        p.add_argument("--max-len", type=int, default=512,
                       help="maximum generated sequence length (default 512)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sentlu", description="Segmented Eulerian trail linearizations, "
                     "n-gram scoring and linearization-uncertainty evaluation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-data", help="generate a graph dataset as JSONL")
    p.add_argument("--kind", required=True,
                   choices=("erdos-renyi", "delaunay-planar", "toy-molecules", "toy-suite"))
    p.add_argument("--n", type=int, default=100, help="number of graphs (default 100)")
    p.add_argument("--min-nodes", type=int, default=12,
                   help="smallest graph (heavy atoms for toy-molecules) (default 12)")
    p.add_argument("--max-nodes", type=int, default=24,
                   help="largest graph (heavy atoms for toy-molecules) (default 24)")
    p.add_argument("--edge-prob", type=float, default=0.3, help="Erdos-Renyi edge probability (default 0.3)")
    p.add_argument("--disconnected", action="store_true",
                   help="do not condition Erdos-Renyi graphs on connectivity")
    p.add_argument("--out", required=True, help="output JSONL file")
    _common(p, "seed")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("encode", help="linearize graphs into token text")
    _common(p, "in", "out", "strategy", "seed", "max-nodes")
    p.add_argument("--k", type=int, default=1, help="linearizations per graph (default 1)")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode token text into graph JSONL")
    _common(p, "in", "out")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("roundtrip", help="check decode(encode(g)) against g")
    _common(p, "in", "strategy", "seed", "max-nodes")
    p.add_argument("--k", type=int, default=1, help="linearizations per graph (default 1)")
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("enumerate", help="enumerate every linearization of small graphs")
    _common(p, "in", "out", "format")
    p.add_argument("--limit", type=int, default=100_000, help="enumeration cap per graph (default 100000)")
    p.add_argument("--sequences", default=None, help="also write all linearizations to this file")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("train", help="train an n-gram scorer on one strategy's linearizations")
    p.add_argument("--train", required=True, help="training graphs (JSONL)")
    p.add_argument("--test", default=None, help="extra graphs whose labels join the vocabulary")
    p.add_argument("--out", required=True, help="model file")
    _common(p, "strategy", "seed", "model", "max-nodes")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("score", help="teacher-forced NLL of K linearizations per graph, as NLL CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--masked", action="store_true",
                   help="score under the grammar-masked distribution used by generation")
    _common(p, "in", "out", "strategy", "seed", "k")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("generate", help="grammar-constrained sampling")
    p.add_argument("--model", required=True)
    p.add_argument("--graphs-out", default=None, help="also write decoded graphs (JSONL)")
    p.add_argument("--nll-out", default=None, help="also write Generation NLLs (NLL CSV)")
    _common(p, "out", "seed", "gen")
    p.set_defaults(func=cmd_generate)

    ev = sub.add_parser("eval", help="metrics and experiment grids")
    esub = ev.add_subparsers(dest="metric", required=True, parser_class=_Parser)

    p = esub.add_parser("lu", help="linearization uncertainty per graph")
    p.add_argument("--nll-file", default=None, help="NLL CSV (graph_id,perm_index,strategy,nll,n_tokens)")
    p.add_argument("--model", default=None)
    p.add_argument("--in", dest="inp", default=None, help="graphs to score when no NLL file is given")
    _common(p, "out", "format", "strategy", "seed", "k", "workers")
    p.set_defaults(func=cmd_eval_lu)

    p = esub.add_parser("ece", help="calibration overall and by token type")
    p.add_argument("--model", required=True)
    _common(p, "in", "out", "format", "strategy", "seed", "k", "workers")
    p.set_defaults(func=cmd_eval_ece)

    p = esub.add_parser("cross", help="train one scorer per strategy and evaluate the 4x4 grid")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    _common(p, "out", "format", "seed", "k", "model", "max-nodes", "workers")
    p.set_defaults(func=cmd_eval_cross)

    p = esub.add_parser("self-assess", help="Generation NLL vs native re-linearization NLL and LU")
    p.add_argument("--model", required=True)
    _common(p, "out", "format", "strategy", "seed", "k", "gen", "workers")
    p.set_defaults(func=cmd_eval_self_assess)

    for name, fn, text in (("stability-auc", cmd_eval_stability_auc, "stability predictors on a molecule pool"),
                           ("k-sweep", cmd_eval_k_sweep, "LU stability AUC from the first K of 32 draws")):
        p = esub.add_parser(name, help=text)
        p.add_argument("--model", required=True)
        p.add_argument("--eval-strategy", default="random", choices=[s.value for s in Strategy],
                       help="strategy of the K re-linearizations (default random)")
        if name == "k-sweep":
            p.add_argument("--ks", default=",".join(str(k) for k in K_SWEEP),
                           help="comma-separated K values (default 2,4,8,16,32)")
        _common(p, "in", "out", "format", "strategy", "seed", "k", "workers")
        p.set_defaults(func=fn)

    p = esub.add_parser("length", help="length, chord and trail-profile statistics")
    p.add_argument("--test", default=None, help="second token file, reported as group 'test'")
    _common(p, "in", "out", "format")
    p.set_defaults(func=cmd_eval_length)

    p = esub.add_parser("diversity", help="distinct-sequence ratio")
    _common(p, "in", "out", "format")
    p.set_defaults(func=cmd_eval_diversity)

    p = esub.add_parser("vun", help="validity, uniqueness, novelty of generated graphs")
    p.add_argument("--train", required=True, help="training graphs (JSONL) for novelty")
    p.add_argument("--validity", choices=sorted(X.VALIDITY), default="planar",
                   help="validity predicate (default planar)")
    _common(p, "in", "out", "format")
    p.set_defaults(func=cmd_eval_vun)

    p = sub.add_parser("sweep", help="VUN and sequence diversity across training-set sizes")
    p.add_argument("--train", required=True, help="graph pool; the first N graphs train size N")
    p.add_argument("--train-sizes", default="32,128,512",
                   help="comma-separated training-set sizes (default 32,128,512)")
    p.add_argument("--validity", choices=sorted(X.VALIDITY), default="planar",
                   help="validity predicate (default planar)")
    _common(p, "out", "format", "seed", "model", "max-nodes", "gen", "workers")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ingest-nll", help="validate an external NLL CSV and summarize it per graph")
    _common(p, "in", "out", "format")
    p.set_defaults(func=cmd_ingest_nll)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.command_path = args.command + (f" {args.metric}" if getattr(args, "metric", None) else "")
        if getattr(args, "workers", 1) < 1:
            raise ValueError("--workers must be >= 1")
        return args.func(args)
    except UsageError as exc:
        print(f"sentlu: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except RUNTIME_ERRORS[:3] as exc:
        print(f"sentlu: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except VALIDATION_ERRORS as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"sentlu: error: {msg}", file=sys.stderr)
        return EXIT_INVALID
    except RUNTIME_ERRORS as exc:
        print(f"sentlu: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
