"""``dbnci``: check, trace and generate DBN-templates from the command line.

Exit codes: 0 holds, 1 violated, 2 unknown or undecided, 3 bad input,
4 resource limit hit.  Wall time goes to stderr so that ``--json``
output is byte-identical across runs.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from fractions import Fraction

from . import generators as gen
from .ltl import atoms, check_ltl, parse_ltl
from .model import DBN, ModelError, dump_dbn, is_restricted, load_model, parse_proposition
from .nba import check_nba, parse_nba
from .prefix import FormulaTooLarge
from .repr_ts import StateBudgetExceeded, default_budget, find_lasso, state_trace
from .stochastic import ConfigurationLimitExceeded, Outcome, bounded_check, stochastic_trace
from .unfolding import load_chain, oracle_trace

EXIT_HOLDS, EXIT_VIOLATED, EXIT_UNKNOWN, EXIT_INPUT, EXIT_LIMIT = 0, 1, 2, 3, 4

REPORT_FIELDS = ("command", "verdict", "witness", "prefix_length", "period_length",
                 "state_count", "restricted", "exit_code")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would read as "unknown"
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _report(args, verdict, exit_code, **extra):
    rep = dict.fromkeys(REPORT_FIELDS)
    rep.update(command=args.argv, verdict=verdict, exit_code=exit_code)
    rep.update(extra)
    return rep


def _template(model):
    return model.template if isinstance(model, DBN) else model


def _props(args, t, model_props, kind="structural"):
    props = [parse_proposition(text, t.variables, kind) for text in args.prop or []]
    if not props:
        props = [p.as_kind(kind) for p in model_props]
    if not props:
        raise ModelError("no propositions: pass --prop or list them in the model file")
    return props


def _letter_text(letter):
    return "{" + ", ".join(sorted(str(p) for p in letter)) + "}"


def _trace_lines(letters, start=0):
    return [f"{start + i}: {_letter_text(letter)}" for i, letter in enumerate(letters)]


def _letters_json(letters):
    return [sorted(str(p) for p in letter) for letter in letters]


# -- subcommands --------------------------------------------------------------------

def cmd_check(args):
    model, _ = load_model(args.model)
    t = _template(model)
    if args.ltl is not None:
        verdict = check_ltl(t, parse_ltl(args.ltl, t.variables), args.state_budget)
    else:
        with open(args.nba, encoding="utf-8") as fh:
            verdict = check_nba(t, parse_nba(fh.read(), t.variables), args.state_budget)
    code = EXIT_HOLDS if verdict.holds else EXIT_VIOLATED
    rep = _report(args, "holds" if verdict.holds else "violated", code,
                  witness=verdict.witness, prefix_length=verdict.prefix_length,
                  period_length=verdict.period_length, state_count=verdict.state_count,
                  restricted=verdict.restricted)
    lines = [f"verdict: {rep['verdict']}"]
    if verdict.witness is not None:
        lines.append(f"witness: t={verdict.witness}")
    lines.append(f"lasso: prefix {verdict.prefix_length}, period {verdict.period_length}, "
                 f"{verdict.state_count} states")
    if verdict.restricted:
        lines.append("restricted template: constant trace from |V|^2 on")
    return rep, lines


def _divergence(t, props, letters):
    oracle = oracle_trace(t, props, len(letters) - 1, max_horizon=None)
    for i, (a, b) in enumerate(zip(letters, oracle)):
        if a != b:
            return i, b
    return None


def cmd_trace(args):
    model, model_props = load_model(args.model)
    t = _template(model)
    props = _props(args, t, model_props)
    rep = _report(args, "ok", EXIT_HOLDS, restricted=is_restricted(t))
    if args.lasso:
        # the exact lasso, even for restricted templates, so the split is minimal
        tr = find_lasso(t, props, args.state_budget)
        letters = list(tr.letters)
        rep.update(prefix_length=len(tr.prefix), period_length=len(tr.period),
                   state_count=len(tr), prefix=_letters_json(tr.prefix),
                   period=_letters_json(tr.period))
        lines = _trace_lines(tr.prefix) + ["--period"] + _trace_lines(tr.period, len(tr.prefix))
        checked = letters + list(tr.period)     # one extra unrolling of the loop
    else:
        letters = state_trace(t, props, args.steps)
        rep.update(prefix_length=len(letters), period_length=0, state_count=len(letters),
                   trace=_letters_json(letters))
        lines = _trace_lines(letters)
        checked = letters
    if args.oracle:
        diff = _divergence(t, props, checked)
        if diff is None:
            rep["divergence"] = None
            lines.append(f"oracle: agrees on t=0..{len(checked) - 1}")
        else:
            i, expected = diff
            rep.update(verdict="diverged", exit_code=EXIT_VIOLATED, witness=i,
                       divergence={"time": i, "expected": sorted(str(p) for p in expected),
                                   "got": sorted(str(p) for p in checked[i])})
            lines.append(f"oracle: first divergence at t={i}: expected {_letter_text(expected)}")
    return rep, lines


def cmd_oracle(args):
    model, model_props = load_model(args.model)
    t = _template(model)
    props = _props(args, t, model_props)
    letters = oracle_trace(t, props, args.steps, max_horizon=None)
    rep = _report(args, "ok", EXIT_HOLDS, prefix_length=len(letters), period_length=0,
                  trace=_letters_json(letters))
    return rep, _trace_lines(letters)


def cmd_stochastic(args):
    model, model_props = load_model(args.model)
    if not isinstance(model, DBN):
        raise ModelError("stochastic checking needs a model with CPDs")
    t = model.template
    limit = args.max_configurations
    if args.ltl is not None:
        f = parse_ltl(args.ltl, t.variables, kind="stochastic")
        bv = bounded_check(model, f, args.horizon, limit)
        props = list(dict.fromkeys(atoms(f)))
    else:
        bv = None
        props = _props(args, t, model_props, "stochastic")
    letters = stochastic_trace(model, props, args.horizon, limit)
    rep = _report(args, "ok", EXIT_HOLDS, prefix_length=len(letters), period_length=0,
                  state_count=model.num_configurations, trace=_letters_json(letters))
    lines = _trace_lines(letters)
    if bv is not None:
        if bv.outcome is Outcome.VIOLATED_AT:
            code = EXIT_VIOLATED
        elif bv.outcome is Outcome.HOLDS_UP_TO and bv.decided:
            code = EXIT_HOLDS
        else:
            code = EXIT_UNKNOWN
        rep.update(verdict=bv.outcome.value, exit_code=code, decided=bv.decided,
                   witness=bv.time if bv.outcome is Outcome.VIOLATED_AT else None)
        lines.append(f"verdict: {bv}")
    return rep, lines


def _write(args, text):
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        return [f"wrote {args.out}"]
    return text.splitlines()


def cmd_generate(args):
    family = args.family
    if family == "primes":
        if args.k < 1:
            raise UsageError("--k must be at least 1")
        t, prop = gen.gen_prime_bridges(args.k)
        model, props = t, [prop]
    elif family == "dfa":
        t, prop = gen.gen_dfa_intersection(gen.load_dfas(args.dfas))
        model, props = t, [prop]
    elif family == "skolem":
        chain = load_chain(args.mc)
        inst = gen.gen_skolem_embedding(chain)
        model = inst.dbn
        props = [parse_proposition("indep(X; Y)", model.template.variables)]
    else:
        rng = random.Random(args.seed)
        t = gen.random_template(args.vars, rng, args.edge_probability, args.restricted)
        model = gen.random_dbn(t, rng) if args.cpds else t
        prop = gen.random_proposition(t, rng)
        props = [prop] if prop else []
    text = dump_dbn(model, props)
    t = _template(model)
    rep = _report(args, "ok", EXIT_HOLDS, variables=len(t.variables), out=args.out)
    if args.out or not args.json:
        lines = _write(args, text)
    else:
        lines = []
        rep["model"] = json.loads(text)
    return rep, lines


# -- argument parsing ---------------------------------------------------------------------

def _budget(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("budget must be positive")
    return value


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="print a machine-readable report")
    common.add_argument("--state-budget", type=_budget, default=argparse.SUPPRESS,
                        help="maximum representative states to explore")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="seed for random instance sampling")

    p = _Parser(prog="dbnci", parents=[common],
                description="Model checking of conditional independence in DBN-templates.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    c = sub.add_parser("check", parents=[common], help="structural LTL / NBA model checking")
    c.add_argument("--model", required=True)
    spec = c.add_mutually_exclusive_group(required=True)
    spec.add_argument("--ltl")
    spec.add_argument("--nba", help="automaton JSON file")
    c.set_defaults(func=cmd_check)

    tr = sub.add_parser("trace", parents=[common], help="print the trace of a template")
    tr.add_argument("--model", required=True)
    tr.add_argument("--prop", action="append", help="proposition (repeatable)")
    mode = tr.add_mutually_exclusive_group(required=True)
    mode.add_argument("--steps", type=int)
    mode.add_argument("--lasso", action="store_true")
    tr.add_argument("--oracle", action="store_true",
                    help="cross-check every letter against the brute-force unfolding")
    tr.set_defaults(func=cmd_trace)

    o = sub.add_parser("oracle", parents=[common], help="letters by brute-force unfolding")
    o.add_argument("--model", required=True)
    o.add_argument("--prop", action="append")
    o.add_argument("--steps", type=int, required=True)
    o.set_defaults(func=cmd_oracle)

    s = sub.add_parser("stochastic", parents=[common], help="bounded stochastic CI checking")
    s.add_argument("--model", required=True)
    s.add_argument("--prop", action="append")
    s.add_argument("--horizon", type=int, required=True)
    s.add_argument("--ltl")
    s.add_argument("--max-configurations", type=int, default=1 << 20)
    s.set_defaults(func=cmd_stochastic)

    g = sub.add_parser("generate", parents=[common], help="write instance families")
    fam = g.add_subparsers(dest="family", required=True, parser_class=_Parser)
    gp = fam.add_parser("primes", parents=[common])
    gp.add_argument("--k", type=int, required=True)
    gd = fam.add_parser("dfa", parents=[common])
    gd.add_argument("--in", dest="dfas", required=True, help="DFA document")
    gs = fam.add_parser("skolem", parents=[common])
    gs.add_argument("--mc", required=True, help="Markov chain document")
    gr = fam.add_parser("random", parents=[common])
    gr.add_argument("--vars", type=int, default=4)
    gr.add_argument("--edge-probability", type=float, default=0.3)
    gr.add_argument("--restricted", action="store_true")
    gr.add_argument("--cpds", action="store_true")
    for sp in (gp, gd, gs, gr):
        sp.add_argument("--out")
    g.set_defaults(func=cmd_generate)
    return p


def _json_default(value):
    if isinstance(value, Fraction):
        return str(value)
    raise TypeError(f"not serializable: {value!r}")


def main(argv=None, stdout=None, stderr=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    want_json = "--json" in argv
    start = time.perf_counter()
    args = argparse.Namespace(argv=argv)
    try:
        args = build_parser().parse_args(argv)
        args.argv = argv
        args.json = getattr(args, "json", False)
        args.seed = getattr(args, "seed", 0)
        args.state_budget = getattr(args, "state_budget", None) or default_budget()
        rep, lines = args.func(args)
    except UsageError as exc:
        rep, lines = _report(args, "error", EXIT_INPUT, error=str(exc)), [f"error: {exc}"]
    except (StateBudgetExceeded, ConfigurationLimitExceeded, FormulaTooLarge) as exc:
        rep, lines = _report(args, "error", EXIT_LIMIT, error=str(exc)), [f"error: {exc}"]
    except (ModelError, ValueError, OSError) as exc:
        rep, lines = _report(args, "error", EXIT_INPUT, error=str(exc)), [f"error: {exc}"]
    code = rep["exit_code"]
    if want_json:
        out.write(json.dumps(rep, sort_keys=True, default=_json_default) + "\n")
    else:
        stream = err if rep["verdict"] == "error" else out
        for line in lines:
            stream.write(line + "\n")
    err.write(f"wall time: {time.perf_counter() - start:.3f}s\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
