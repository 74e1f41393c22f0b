"""
KGTrail command line: ingest, ask, eval, priors, sweep and serve.
Exit codes: 0 success, 1 input error, 2 backend failure.
"""

import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional

from .config import ABLATIONS, PRESETS, RunConfig, build_gateway, resolve_run_config
from .engine import answer_question
from .errors import BackendError, KGTrailError
from .evaluation import (
    HITS_MODES,
    load_dataset,
    render_table,
    run_eval,
    run_sweep,
    sweep_config_path,
    sweep_grid,
    write_report,
    write_sweep_csv,
)
from .graph import extract_subgraph, graph_stats, load_graph, save_graph
from .memory import ExplorationPriors, PriorsStore, load_priors, save_priors, summary_lines
from .reasoning import write_traces

logger = logging.getLogger("kgtrail")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_BACKEND = 2


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with code 1 instead of argparse's 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_run_options(p: argparse.ArgumentParser, engine: bool = True) -> None:
    p.add_argument("--config", help="YAML or JSON config file")
    p.add_argument("--backend", choices=["live", "scripted"], help="LLM backend")
    p.add_argument("--scripted-rules", dest="scripted_rules", help="Rules file for the scripted backend")
    p.add_argument("--model", help="Model name for the live backend")
    p.add_argument("--base-url", dest="base_url", help="OpenAI-compatible base URL")
    p.add_argument("--templates-dir", dest="templates_dir", help="Directory with the five prompt templates")
    p.add_argument("--preset", choices=sorted(PRESETS), help="Dataset preset (webqsp: k=3, cwq: k=4)")
    p.add_argument("--ablation", choices=list(ABLATIONS), help="Switch off context generation and/or priors")
    if engine:
        p.add_argument("--k", dest="candidates_k", type=int, help="Candidate relations per step (default 3)")
        p.add_argument("--depth", dest="max_depth", type=int, help="Maximum path length L (default 4)")
        p.add_argument("--iters", dest="max_iterations", type=int, help="Iteration budget I (default 30)")
        p.add_argument("--threshold", type=float, help="Branch threshold zeta (default 0.5)")
        p.add_argument("--neighborhood-cap", dest="neighborhood_cap", type=int, help="Relations shown per step")


_RUN_KEYS = (
    "backend", "scripted_rules", "model", "base_url", "templates_dir", "preset", "ablation",
    "candidates_k", "max_depth", "max_iterations", "threshold", "neighborhood_cap",
    "subgraph_hops", "hits_mode", "database_url",
)


def _run_config(args: argparse.Namespace) -> RunConfig:
    flags: Dict[str, Any] = {k: getattr(args, k) for k in _RUN_KEYS if getattr(args, k, None) is not None}
    return resolve_run_config(getattr(args, "config", None), flags)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kgtrail", description="KGTrail – multi-hop question answering over knowledge graphs")
    p.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ingest = sub.add_parser("ingest", help="Cut a topic-centred subgraph out of a triple file")
    ingest.add_argument("--graph", required=True, help="Input triple file (TSV)")
    source = ingest.add_mutually_exclusive_group(required=True)
    source.add_argument("--topics", nargs="+", help="Topic entities")
    source.add_argument("--dataset", help="Dataset file; uses every example's topic entities")
    ingest.add_argument("--hops", dest="subgraph_hops", type=int, help="Hop radius (default engine.subgraph_hops, 4)")
    ingest.add_argument("--out", required=True, help="Output triple file")
    ingest.add_argument("--config", help="YAML or JSON config file")

    ask = sub.add_parser("ask", help="Answer one question")
    ask.add_argument("--graph", required=True, help="Triple file (TSV)")
    ask.add_argument("--topics", nargs="+", required=True, help="Topic entities")
    ask.add_argument("--question", required=True)
    ask.add_argument("--id", default="q", help="Question id used in traces")
    ask.add_argument("--trace", help="Write the trace log (JSON lines) here")
    ask.add_argument("--priors-in", dest="priors_in", help="Pre-load exploration priors from this file")
    ask.add_argument("--priors-out", dest="priors_out", help="Save the final exploration priors to this file")
    ask.add_argument("--priors-store", dest="priors_store", help="Load and save priors under this name in the store")
    ask.add_argument("--database-url", dest="database_url", help="Priors store URL")
    ask.add_argument("--json", action="store_true", help="Print the answer as JSON")
    _add_run_options(ask)

    ev = sub.add_parser("eval", help="Evaluate a dataset")
    ev.add_argument("--dataset", required=True)
    ev.add_argument("--graph", required=True)
    ev.add_argument("--sample", type=int, help="Evaluate a seeded random sample of N examples")
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--out", required=True, help="JSON report path")
    ev.add_argument("--text-out", dest="text_out", help="Plain-text table path")
    ev.add_argument("--trace", help="Write all trace logs (JSON lines) here")
    ev.add_argument("--parallel", type=int, default=1, help="Concurrent sessions")
    ev.add_argument("--hits-mode", dest="hits_mode", choices=list(HITS_MODES))
    _add_run_options(ev)

    priors = sub.add_parser("priors", help="Inspect and move stored exploration priors")
    priors.add_argument("--database-url", dest="database_url", help="Priors store URL")
    psub = priors.add_subparsers(dest="priors_command", required=True, parser_class=_Parser)
    show = psub.add_parser("show", help="Print stored priors (all names if --name is omitted)")
    show.add_argument("--name")
    show.add_argument("--file", help="Show a priors file instead of the store")
    export = psub.add_parser("export", help="Write stored priors to a file")
    export.add_argument("--name", required=True)
    export.add_argument("--out", required=True)
    imp = psub.add_parser("import", help="Validate a priors file and store it")
    imp.add_argument("file")
    imp.add_argument("--name", required=True)

    sweep = sub.add_parser("sweep", help="Evaluate a grid of k, L and zeta values")
    sweep.add_argument("--dataset", required=True)
    sweep.add_argument("--graph", required=True)
    sweep.add_argument("--sample", type=int)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--k", dest="sweep_k", type=_int_list, help="Candidate counts (default 2,3,4,5)")
    sweep.add_argument("--depth", dest="sweep_depth", type=_int_list, help="Depth limits (default 2,3,4,5)")
    sweep.add_argument("--zeta", dest="sweep_zeta", type=_float_list, help="Thresholds (default 0.4,0.5,0.6,0.7)")
    sweep.add_argument("--parallel", type=int, default=1)
    sweep.add_argument("--hits-mode", dest="hits_mode", choices=list(HITS_MODES))
    sweep.add_argument("--out", required=True, help="CSV path")
    _add_run_options(sweep, engine=False)

    serve = sub.add_parser("serve", help="Start the HTTP API")
    serve.add_argument("--graph", required=True)
    serve.add_argument("--host", default="0.0.0.0")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--database-url", dest="database_url", help="Priors store URL")
    _add_run_options(serve)
    return p


# ---- subcommands ----

def cmd_ingest(args: argparse.Namespace) -> int:
    hops = _run_config(args).engine.subgraph_hops
    graph = load_graph(args.graph)
    if args.dataset:
        topics = list(dict.fromkeys(t for ex in load_dataset(args.dataset) for t in ex.topic_entities))
    else:
        topics = args.topics
    sub = extract_subgraph(graph, topics, hops)
    save_graph(sub, args.out)
    stats = graph_stats(sub)
    print(f"[KGTrail] Wrote {stats['triples']} triples ({stats['entities']} entities, {hops} hops) to {args.out}")
    return EXIT_OK


def cmd_ask(args: argparse.Namespace) -> int:
    run_config = _run_config(args)
    graph = load_graph(args.graph)
    priors: Optional[ExplorationPriors] = None
    store = PriorsStore(run_config.database_url) if args.priors_store else None
    if args.priors_in:
        priors = load_priors(args.priors_in)
    elif store is not None:
        priors = store.get(args.priors_store)

    gateway = build_gateway(run_config).for_question(args.id)
    result = answer_question(
        args.question, args.topics, graph, run_config.engine, gateway,
        priors=priors, question_id=args.id, run_config=run_config.to_dict(),
    )

    if args.trace:
        write_traces([result.trace], args.trace)
    if args.priors_out:
        save_priors(result.priors, args.priors_out)
    if store is not None:
        store.put(args.priors_store, result.priors)

    if args.json:
        print(json.dumps({**result.to_dict(), "config": run_config.to_dict()}, indent=2, ensure_ascii=False))
    else:
        for entity in result.answer.entities:
            print(entity)
        answer = result.answer
        path = answer.best_path.sequence.joined() if answer.best_path else "(none)"
        print(f"[KGTrail] path: {path}  score: {answer.score:.3f}", file=sys.stderr)
        print(f"[KGTrail] {result.ledger.llm_calls} LLM calls, {result.ledger.total_tokens} tokens, "
              f"{result.iterations_used} iterations", file=sys.stderr)
        if answer.is_empty:
            print(f"[KGTrail] no answer: {answer.diagnostic}", file=sys.stderr)

    if result.all_steps_degraded and result.answer.is_empty:
        return EXIT_BACKEND
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    run_config = _run_config(args)
    graph = load_graph(args.graph)
    dataset = load_dataset(args.dataset, sample=args.sample, seed=args.seed)
    embedded = {**run_config.to_dict(), "dataset": args.dataset, "sample": args.sample, "seed": args.seed}
    print(f"[KGTrail] Evaluating {len(dataset)} questions...")
    report = run_eval(
        dataset, graph, run_config.engine, build_gateway(run_config),
        hits_mode=run_config.hits_mode, parallel=args.parallel, run_config=embedded,
    )
    write_report(report, args.out, text_path=args.text_out, trace_path=args.trace)
    print(render_table(report), end="")
    print(f"[KGTrail] Report written to {args.out}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    run_config = _run_config(args)
    graph = load_graph(args.graph)
    dataset = load_dataset(args.dataset, sample=args.sample, seed=args.seed)
    ks, depths, thresholds = sweep_grid(args.sweep_k, args.sweep_depth, args.sweep_zeta)
    embedded = {
        **run_config.to_dict(),
        "dataset": args.dataset, "sample": args.sample, "seed": args.seed,
        "grid": {"k": ks, "max_depth": depths, "threshold": thresholds},
    }
    print(f"[KGTrail] Sweeping {len(ks) * len(depths) * len(thresholds)} grid points over {len(dataset)} questions...")
    rows = run_sweep(
        dataset, graph, run_config.engine, build_gateway(run_config),
        ks=ks, depths=depths, thresholds=thresholds,
        hits_mode=run_config.hits_mode, parallel=args.parallel,
    )
    write_sweep_csv(rows, args.out, run_config=embedded)
    print(f"[KGTrail] {len(rows)} grid points written to {args.out} (config in {sweep_config_path(args.out)})")
    return EXIT_OK


def cmd_priors(args: argparse.Namespace) -> int:
    if args.priors_command == "show" and args.file:
        for line in summary_lines(load_priors(args.file)):
            print(line)
        return EXIT_OK

    store = PriorsStore(args.database_url)
    if args.priors_command == "show":
        if not args.name:
            for name in store.names():
                print(name)
            return EXIT_OK
        priors = store.get(args.name)
        if priors is None:
            print(f"[KGTrail] no priors named {args.name!r}", file=sys.stderr)
            return EXIT_INPUT
        for line in summary_lines(priors):
            print(line)
    elif args.priors_command == "export":
        priors = store.get(args.name)
        if priors is None:
            print(f"[KGTrail] no priors named {args.name!r}", file=sys.stderr)
            return EXIT_INPUT
        save_priors(priors, args.out)
        print(f"[KGTrail] Exported priors {args.name} (version {priors.version}) to {args.out}")
    elif args.priors_command == "import":
        priors = load_priors(args.file)
        store.put(args.name, priors)
        print(f"[KGTrail] Imported priors {args.name} (version {priors.version})")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import create_app

    run_config = _run_config(args)
    graph = load_graph(args.graph)
    store = PriorsStore(run_config.database_url)
    app = create_app(graph, run_config, priors_store=store)
    print(f"[KGTrail] API at http://{args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest,
    "ask": cmd_ask,
    "eval": cmd_eval,
    "priors": cmd_priors,
    "sweep": cmd_sweep,
    "serve": cmd_serve,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except BackendError as e:
        logger.error("Backend failure: %s", e)
        print(f"[KGTrail] backend error: {e}", file=sys.stderr)
        return EXIT_BACKEND
    except KGTrailError as e:
        print(f"[KGTrail] error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"[KGTrail] error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
