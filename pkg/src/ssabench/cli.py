"""Command-line front end.

Every subcommand writes one primary output (JSON, or text for ``show``) to
stdout or ``--out`` and a run manifest to stderr or ``--manifest``. Exit
codes: 0 success/derivable, 1 input error, 2 violation, 3 unknown within
the universe.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import click
import numpy as np

from . import __version__
from .corrent import decompose, purity_propagation
from .figures import Figure, SymmetryGroup, load_catalog, render
from .models import (
    ModelError,
    Topology,
    check_axioms,
    entropy_table,
    model_from_json,
)
from .prover import (
    ProverLimitError,
    SolverError,
    format_form,
    pretty_certificate,
    prove,
    prove_disjunction,
    result_json,
    scan,
)
from .search import (
    ModelFamily,
    SearchConfig,
    SoundnessError,
    faithful_constraints,
    minimize_margin,
    sweep_pairs,
)
from .universe import (
    KINDS,
    RegionUniverse,
    Target,
    UniverseError,
    chain_universe,
    generate_constraints,
    load_universe,
    nested_pairs,
    ring_universe,
    target_average_entropy,
    target_entropy_monotone,
    target_general,
    target_mean_monotone,
)

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION, EXIT_UNKNOWN = 0, 1, 2, 3
LN2 = math.log(2)

INPUT_ERRORS = (UniverseError, ModelError, ValueError, KeyError, TypeError, IndexError,
                FileNotFoundError, IsADirectoryError, json.JSONDecodeError, ProverLimitError)

NAMED_FORMS = {
    "boxes": "mean:L3<=domino",
    "lshape": "mean:L4<=L3",
    "plank": "mean:L4<=I3",
    "three": 'form:{"I3": 1, "L3": "1/3", "L4": -1}',
}


class InputError(click.ClickException):
    exit_code = EXIT_INPUT


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _read_json_arg(text: str, what: str):
    """Inline JSON, or a path to a JSON file."""
    p = Path(text)
    raw = p.read_text() if p.is_file() else text
    try:
        return json.loads(raw)
    except json.JSONDecodeError as e:
        raise InputError(f"{what}: malformed JSON ({e.msg} at line {e.lineno} column {e.colno})") from None


# --- shared resolution -----------------------------------------------------

def resolve_universe(universe: str | None, chain: int | None, ring: int | None,
                     group: str | None = None) -> tuple[RegionUniverse, dict]:
    chosen = [x is not None for x in (universe, chain, ring)]
    if sum(chosen) != 1:
        raise InputError("give exactly one of --universe, --chain, --ring")
    if chain is not None:
        return chain_universe(chain), {}
    if ring is not None:
        return ring_universe(ring), {}
    inputs = {}
    p = Path(universe)
    if p.is_file():
        inputs[universe] = _sha256(p.read_bytes())
        try:
            obj = json.loads(p.read_text())
        except json.JSONDecodeError as e:
            raise InputError(f"{universe}: malformed JSON ({e.msg} at line {e.lineno})") from None
        return load_universe(obj, group=group), inputs
    if universe.lstrip().startswith("{"):
        return load_universe(_read_json_arg(universe, "--universe"), group=group), inputs
    return load_universe(universe, group=group), inputs


def parse_target(spec: str, u: RegionUniverse) -> Target:
    """Target syntax: ``mean:X<=Y``, ``mean-step:k``, ``entropy:X<=Y``,
    ``average:FIG``, ``form:{json}``, ``@file.json`` or a named form."""
    spec = NAMED_FORMS.get(spec, spec)
    if spec.startswith("@"):
        obj = _read_json_arg(spec[1:], "target file")
        if not isinstance(obj, dict) or "coeffs" not in obj:
            raise InputError("target file needs a 'coeffs' field")
        return target_general(obj["coeffs"], u, obj.get("description", ""))
    kind, _, body = spec.partition(":")
    if not body:
        raise InputError(f"cannot parse target {spec!r}")
    if kind in ("mean", "entropy"):
        left, sep, right = body.partition("<=")
        if not sep:
            raise InputError(f"target {spec!r} must have the form {kind}:X<=Y")
        left, right = left.strip(), right.strip()
        if kind == "mean":
            # S(X)/|X| <= S(Y)/|Y| with Y inside X
            return target_mean_monotone(right, left, u)
        return target_entropy_monotone(left, right, u)
    if kind == "mean-step":
        k = int(body)
        return target_mean_monotone(f"S{k}", f"S{k + 1}", u)
    if kind == "average":
        return target_average_entropy(_figure_arg(body, u), u)
    if kind == "form":
        obj = _read_json_arg(body, "form")
        if not isinstance(obj, dict):
            raise InputError("form must be a JSON object of region: coefficient")
        return target_general(obj, u, spec)
    raise InputError(f"unknown target kind {kind!r}")


def _figure_arg(text: str, u: RegionUniverse | None = None) -> Figure:
    cat = load_catalog()
    if text in cat:
        return cat[text]
    if u is not None and text in u.names and not u.abstract:
        return u.figures[u.names[text]]
    obj = _read_json_arg(text, "figure")
    if isinstance(obj, list):
        return Figure.of(obj)
    return Figure.from_json(obj)


def _kinds(axioms: str) -> tuple[str, ...]:
    ks = tuple(a.strip().upper() for a in axioms.split(",") if a.strip())
    bad = [k for k in ks if k not in KINDS]
    if bad or not ks:
        raise InputError(f"--axioms must be a comma list from {','.join(KINDS)}; got {axioms!r}")
    return ks


def _strip_io_options(argv: Sequence[str]) -> list[str]:
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        if a in ("--manifest", "--out", "-o"):
            skip = True
            continue
        if a.startswith("--manifest=") or a.startswith("--out="):
            continue
        out.append(a)
    return out


def _result(ctx: click.Context, text: str, code: int, params: dict, inputs: dict | None = None,
            seed: int | None = None, csv_rows: list[dict] | None = None) -> None:
    ctx.obj["result"] = {"text": text, "code": code, "params": params,
                         "inputs": inputs or {}, "seed": seed, "csv": csv_rows}


# --- commands --------------------------------------------------------------

@click.group()
@click.option("--manifest", type=click.Path(dir_okay=False), default=None,
              help="Write the run manifest to this file instead of stderr.")
@click.option("--out", "-o", type=click.Path(dir_okay=False), default=None,
              help="Write the primary output to this file instead of stdout.")
@click.pass_context
def main(ctx, manifest, out):
    """Entropy-inequality workbench: exact proofs, model checks and searches."""
    ctx.ensure_object(dict)
    ctx.obj.update(manifest=manifest, out=out)


def _universe_options(f):
    f = click.option("--group", default=None, help="Override the symmetry group of a lattice universe.")(f)
    f = click.option("--ring", type=int, default=None, help="Use the arcs of an n-site ring.")(f)
    f = click.option("--chain", type=int, default=None, help="Use segments 1..N on the line.")(f)
    f = click.option("--universe", default=None, help="Universe JSON file or bundled name.")(f)
    return f


@main.command("prove")
@_universe_options
@click.option("--target", "targets", multiple=True, required=True, help="Target inequality (repeatable).")
@click.option("--axioms", default="POS,SA,SSA", show_default=True)
@click.option("--rule", type=click.Choice(["dantzig", "bland"]), default="dantzig", show_default=True)
@click.option("--pretty", is_flag=True, help="Append a readable proof to each derivable result.")
@click.pass_context
def cmd_prove(ctx, universe, chain, ring, group, targets, axioms, rule, pretty):
    """Decide derivability; exit 0 if all derivable, 3 if any is unknown."""
    u, inputs = resolve_universe(universe, chain, ring, group)
    kinds = _kinds(axioms)
    results = []
    code = EXIT_OK
    for spec in targets:
        t = parse_target(spec, u)
        r = prove(u, t, kinds, rule=rule)
        body = result_json(u, t, r)
        body["spec"] = spec
        if pretty and r.derivable:
            body["proof"] = pretty_certificate(u, t, r.certificate).splitlines()
        if not r.derivable:
            code = EXIT_UNKNOWN
        results.append(body)
    out = {"universe": u.describe(), "results": results}
    _result(ctx, dumps(out), code, {"targets": list(targets), "axioms": list(kinds), "rule": rule,
                                    "chain": chain, "ring": ring, "universe": universe, "group": group},
            inputs)


@main.command("scan")
@_universe_options
@click.option("--target", "targets", multiple=True, help="Extra targets to classify.")
@click.option("--averages/--no-averages", default=False,
              help="Also classify the average-entropy target of every class with 2+ cells.")
@click.option("--axioms", default="POS,SA,SSA", show_default=True)
@click.option("--emit-csv", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def cmd_scan(ctx, universe, chain, ring, group, targets, averages, axioms, emit_csv):
    """Classify mean-entropy monotonicity for every nested pair of classes."""
    u, inputs = resolve_universe(universe, chain, ring, group)
    kinds = _kinds(axioms)
    figs = []
    if averages and not u.abstract:
        figs = [u.figures[i] for i in range(len(u)) if u.volumes[i] >= 2]
    rep = scan(u, figures=figs, targets=[parse_target(s, u) for s in targets], kinds=kinds)
    _result(ctx, dumps(rep.to_json()), EXIT_OK,
            {"targets": list(targets), "averages": averages, "axioms": list(kinds),
             "chain": chain, "ring": ring, "universe": universe, "group": group},
            inputs, csv_rows=rep.pairs if emit_csv else None)
    ctx.obj["csv_path"] = emit_csv


def _model_from_spec(spec: str, seed: int | None):
    shorthand = {"ghz": "n", "random-ring": "n", "markov": "flip", "iid": "p"}
    kind, _, arg = spec.partition(":")
    if kind in shorthand and arg:
        if kind == "ghz":
            obj = {"kind": "ghz", "n": int(arg)}
        elif kind == "random-ring":
            obj = {"kind": "random_ring", "n": int(arg)}
        elif kind == "markov":
            f = float(arg)
            obj = {"kind": "markov", "transition": [[1 - f, f], [f, 1 - f]]}
        else:
            p = float(arg)
            obj = {"kind": "iid", "p": [1 - p, p], "topology": {"kind": "line", "shape": [8]}}
    else:
        obj = _read_json_arg(spec, "model")
        if not isinstance(obj, dict):
            raise InputError("model spec must be a JSON object")
    if obj.get("kind") in ("random_ring", "random_classical") and seed is None:
        raise InputError("random models need --seed")
    rng = np.random.default_rng(seed) if seed is not None else None
    return model_from_json(obj, rng), obj


def _default_universe(model, obj) -> RegionUniverse:
    topo = model.topology
    if topo.kind == "ring":
        return ring_universe(topo.shape[0])
    if topo.kind == "line":
        return chain_universe(min(topo.shape[0], 8))
    raise InputError("torus models need an explicit --universe")


def verify_table(u: RegionUniverse, table, tol: float, topology: str) -> dict:
    """Axioms, monotonicity split by topology, correlation entropies, purity."""
    ax = check_axioms(table, u, tol)
    pairs = nested_pairs(u)
    mean_fail, ent_fail, ent_exc = [], [], []
    mean_min = ent_min = math.inf
    for a, b in pairs:
        m = table[a] / float(u.volumes[a]) - table[b] / float(u.volumes[b])
        e = table[b] - table[a]
        names = [u.name_of(a), u.name_of(b)]
        if topology == "torus" and not (_is_box(u, a) and _is_box(u, b)):
            continue
        mean_min = min(mean_min, m)
        if m < -tol:
            mean_fail.append(names + [m])
        if e < -tol:
            # entropy monotonicity needs an infinite system
            (ent_exc if topology in ("ring", "torus") else ent_fail).append(names + [e])
        ent_min = min(ent_min, e)
    out = {
        "axioms": ax.to_json(),
        "mean_monotonicity": {"asserted": True, "min_margin": mean_min if pairs else 0.0,
                              "violations": mean_fail},
        "entropy_monotonicity": {"asserted": topology == "line",
                                 "min_margin": ent_min if pairs else 0.0,
                                 "violations": ent_fail, "finite_system_exceptions": ent_exc},
        "purity": purity_propagation(table, u, tol).to_json(),
    }
    if topology == "line" and not u.abstract and all(f.nu == 1 for f in u.figures):
        seq = _segment_sequence(u, table)
        if len(seq) >= 2:
            out["correlation"] = decompose(seq, None, tol).to_json()
    cons = generate_constraints(u)
    out["axiom_violations"] = [
        {"kind": k, "constraint": ax.worst[k], "form": format_form(u, cons[ax.worst[k]].coeffs),
         "violation": v}
        for k, v in sorted(ax.max_violation.items()) if v > tol and ax.worst[k] is not None]
    ok = ax.ok and not mean_fail and not ent_fail and out["purity"]["ok"]
    out["ok"] = ok
    return out


def _is_box(u: RegionUniverse, i: int) -> bool:
    if u.abstract:
        return False
    f = u.figures[i]
    return f.volume() == math.prod(f.extent())


def _segment_sequence(u: RegionUniverse, table) -> list[float]:
    seq = []
    for k in range(1, len(u) + 1):
        name = f"S{k}"
        if name not in u.names:
            break
        seq.append(table[u.names[name]])
    return seq


@main.command("verify-models")
@click.option("--model", "model_spec", required=True,
              help="Model JSON (file or inline) or shorthand ghz:N, markov:FLIP, iid:P, random-ring:N.")
@_universe_options
@click.option("--tol", type=float, default=1e-9, show_default=True)
@click.option("--seed", type=int, default=None, help="Seed for random models (required for them).")
@click.option("--corrupt", multiple=True, help="Fault injection NAME=DELTA: lower S(NAME) by DELTA.")
@click.option("--bits", is_flag=True, help="Report entropies in bits instead of nats.")
@click.pass_context
def cmd_verify_models(ctx, model_spec, universe, chain, ring, group, tol, seed, corrupt, bits):
    """Check a model's entropy table against the axioms and theorems."""
    model, obj = _model_from_spec(model_spec, seed)
    inputs = {}
    if any(x is not None for x in (universe, chain, ring)):
        u, inputs = resolve_universe(universe, chain, ring, group)
    else:
        u = _default_universe(model, obj)
    table = entropy_table(model, u)
    for item in corrupt:
        name, sep, delta = item.partition("=")
        if not sep:
            raise InputError("--corrupt expects NAME=DELTA")
        i = u.class_of(name)
        table.values[i] -= float(delta)
    rep = verify_table(u, table, tol, model.topology.kind)
    scale = 1 / LN2 if bits else 1.0
    rep["model"] = obj
    rep["units"] = "bits" if bits else "nats"
    rep["entropies"] = {u.name_of(i): v * scale for i, v in sorted(table.values.items())}
    rep["corrupted"] = list(corrupt)
    _result(ctx, dumps(rep), EXIT_OK if rep["ok"] else EXIT_VIOLATION,
            {"model": model_spec, "tol": tol, "corrupt": list(corrupt), "bits": bits,
             "chain": chain, "ring": ring, "universe": universe, "group": group}, inputs, seed)


@main.command("decompose")
@click.option("--seq", "seq_text", required=True, help="Entropy sequence S(1..n) as a JSON array.")
@click.option("--mean-limit", type=float, default=None,
              help="Analytic limiting mean entropy; defaults to the upper bound min S(k)/k.")
@click.option("--tol", type=float, default=1e-9, show_default=True)
@click.option("--bits", is_flag=True, help="Interpret and report values in bits.")
@click.pass_context
def cmd_decompose(ctx, seq_text, mean_limit, tol, bits):
    """Index of correlation, correlation entropies and increment margins."""
    seq = _read_json_arg(seq_text, "--seq")
    if not isinstance(seq, list) or not all(isinstance(x, (int, float)) for x in seq):
        raise InputError("--seq must be a JSON array of numbers")
    rep = decompose(seq, mean_limit, tol).to_json()
    rep["units"] = "bits" if bits else "nats"
    _result(ctx, dumps(rep), EXIT_OK, {"seq": seq, "mean_limit": mean_limit, "tol": tol, "bits": bits})


def _family(torus, ring_sites, alphabet, group, u) -> ModelFamily:
    if (torus is None) == (ring_sites is None):
        raise InputError("give exactly one of --torus M1 M2 or --ring-sites N")
    topo = Topology.torus(*torus) if torus else Topology.ring(ring_sites)
    g = SymmetryGroup.parse(group) if group else (SymmetryGroup.TRANSLATIONS if u.abstract else u.group)
    if g is SymmetryGroup.IDENTITY:
        g = SymmetryGroup.TRANSLATIONS
    return ModelFamily(alphabet, topo, g)


def _guards(u: RegionUniverse, tgt: Target, extra: Sequence[str],
            topo: Topology, allowed: list[int]) -> list[tuple[str, Target]]:
    """Mean-monotonicity targets derivable from instances valid on ``topo``, plus requested forms."""
    guards = []
    fits = {i for c in allowed for i, _ in generate_constraints(u)[c].coeffs}
    for a, b in nested_pairs(u):
        if a not in fits or b not in fits:
            continue
        t = target_mean_monotone(a, b, u)
        if t.coeffs != tgt.coeffs and prove(u, t, allowed=allowed).derivable:
            guards.append((f"mean:{u.name_of(b)}<={u.name_of(a)}", t))
    for spec in extra:
        t = parse_target(spec, u)
        if not prove(u, t, allowed=allowed).derivable:
            raise InputError(f"guard {spec!r} is not derivable from axiom instances valid on "
                             f"{topo.kind}{topo.shape}")
        guards.append((spec, t))
    return guards


@main.command("search")
@_universe_options
@click.option("--target", "target_spec", required=True)
@click.option("--seed", type=int, required=True)
@click.option("--torus", type=(int, int), default=None, help="Classical states on an M1 x M2 torus.")
@click.option("--ring-sites", type=int, default=None, help="Classical states on an N-site ring.")
@click.option("--alphabet", type=int, default=2, show_default=True)
@click.option("--state-group", default=None, help="Symmetry of the states (defaults to the universe's).")
@click.option("--iterations", type=int, default=200, show_default=True)
@click.option("--restarts", type=int, default=32, show_default=True)
@click.option("--step", type=float, default=0.25, show_default=True)
@click.option("--gradient", type=click.Choice(["auto", "fd", "analytic"]), default="auto")
@click.option("--guard", "guard_specs", multiple=True, help="Extra derivable forms to assert at every state.")
@click.option("--disjunction", default=None, help="Two comma-separated targets, e.g. lshape,plank.")
@click.option("--threads", type=int, default=1, show_default=True, help="Affects speed only.")
@click.pass_context
def cmd_search(ctx, universe, chain, ring, group, target_spec, seed, torus, ring_sites, alphabet,
               state_group, iterations, restarts, step, gradient, guard_specs, disjunction, threads):
    """Minimize a target's margin over symmetric classical states (heuristic)."""
    u, inputs = resolve_universe(universe, chain, ring, group)
    tgt = parse_target(target_spec, u)
    fam = _family(torus, ring_sites, alphabet, state_group, u)
    disj = None
    if disjunction:
        parts = disjunction.split(",")
        if len(parts) != 2:
            raise InputError("--disjunction needs exactly two targets")
        disj = (parse_target(parts[0], u), parse_target(parts[1], u))
    allowed = faithful_constraints(u, fam.topology)
    if disj and prove_disjunction(u, *disj, allowed=allowed) is None:
        raise InputError(f"--disjunction {disjunction}: no convex combination is derivable from "
                         f"axiom instances valid on {fam.topology.kind}{fam.topology.shape}")
    cfg = SearchConfig(tgt, u, fam, iterations=iterations, seed=seed, step=step, restarts=restarts,
                       guards=_guards(u, tgt, guard_specs, fam.topology, allowed), disjunction=disj,
                       gradient=gradient, threads=threads)
    try:
        res = minimize_margin(cfg)
    except SoundnessError as e:
        _result(ctx, dumps({"status": "soundness_violation", "message": str(e), "dump": e.dump}),
                EXIT_VIOLATION, {"target": target_spec}, inputs, seed)
        return
    out = res.to_json()
    out["target"] = {"spec": target_spec, "description": tgt.description}
    out["guards"] = [name for name, _ in cfg.guards]
    _result(ctx, dumps(out), EXIT_OK,
            {"target": target_spec, "torus": list(torus) if torus else None, "ring_sites": ring_sites,
             "alphabet": alphabet, "state_group": fam.group.value, "iterations": iterations,
             "restarts": restarts, "step": step, "gradient": gradient, "guards": list(guard_specs),
             "disjunction": disjunction, "chain": chain, "ring": ring, "universe": universe,
             "group": group}, inputs, seed)


@main.command("sweep")
@_universe_options
@click.option("--seed", type=int, required=True)
@click.option("--torus", type=(int, int), default=None)
@click.option("--ring-sites", type=int, default=None)
@click.option("--alphabet", type=int, default=2, show_default=True)
@click.option("--state-group", default=None)
@click.option("--budget", type=int, default=50, show_default=True, help="Number of random states.")
@click.option("--emit-csv", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def cmd_sweep(ctx, universe, chain, ring, group, seed, torus, ring_sites, alphabet, state_group,
              budget, emit_csv):
    """Worst observed mean-entropy margin for every nested pair."""
    u, inputs = resolve_universe(universe, chain, ring, group)
    fam = _family(torus, ring_sites, alphabet, state_group, u)
    rep = sweep_pairs(u, fam, budget, seed)
    _result(ctx, dumps(rep.to_json()), EXIT_OK,
            {"torus": list(torus) if torus else None, "ring_sites": ring_sites, "alphabet": alphabet,
             "state_group": fam.group.value, "budget": budget, "chain": chain, "ring": ring,
             "universe": universe, "group": group}, inputs, seed, csv_rows=rep.rows if emit_csv else None)
    ctx.obj["csv_path"] = emit_csv


@main.command("show")
@click.option("--figure", "figure_text", default=None, help="Catalog name, JSON cell list or figure file.")
@_universe_options
@click.pass_context
def cmd_show(ctx, figure_text, universe, chain, ring, group):
    """Draw a figure, or every class of a universe, in ASCII."""
    if figure_text is not None:
        text = render(_figure_arg(figure_text)) + "\n"
        _result(ctx, text, EXIT_OK, {"figure": figure_text})
        return
    u, inputs = resolve_universe(universe, chain, ring, group)
    blocks = []
    for i in range(len(u)):
        head = f"{u.name_of(i)} (volume {u.volumes[i]})"
        if u.abstract:
            blocks.append(head)
        else:
            blocks.append(head + "\n" + render(u.figures[i]))
    _result(ctx, "\n\n".join(blocks) + "\n", EXIT_OK,
            {"chain": chain, "ring": ring, "universe": universe, "group": group}, inputs)


@main.command("replay")
@click.argument("manifest_path", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def cmd_replay(ctx, manifest_path):
    """Re-run a manifest and compare the output digest; exit 2 on mismatch."""
    man = _read_json_arg(manifest_path, "manifest")
    if not isinstance(man, dict) or "argv" not in man or "output_sha256" not in man:
        raise InputError("manifest needs 'argv' and 'output_sha256'")
    res = execute(man["argv"])
    digest = _sha256(res["text"].encode())
    same = digest == man["output_sha256"]
    out = {"replayed": man["argv"], "expected_sha256": man["output_sha256"],
           "actual_sha256": digest, "identical": same, "exit_code": res["code"]}
    _result(ctx, dumps(out), EXIT_OK if same else EXIT_VIOLATION, {"manifest": manifest_path},
            {manifest_path: _sha256(Path(manifest_path).read_bytes())})


# --- driver ----------------------------------------------------------------

def execute(argv: Sequence[str]) -> dict:
    """Run a command and return its result record without writing anything."""
    obj: dict = {}
    try:
        main.main(args=list(argv), standalone_mode=False, obj=obj)
    except click.exceptions.Exit as e:
        return {"text": "", "code": e.exit_code, "error": None}
    except InputError as e:
        return {"text": "", "code": EXIT_INPUT, "error": e.format_message()}
    except click.ClickException as e:
        return {"text": "", "code": EXIT_INPUT, "error": e.format_message()}
    except click.Abort:
        return {"text": "", "code": EXIT_INPUT, "error": "aborted"}
    except INPUT_ERRORS as e:
        return {"text": "", "code": EXIT_INPUT, "error": f"{type(e).__name__}: {e}"}
    except SolverError as e:
        return {"text": "", "code": EXIT_VIOLATION, "error": f"solver failure: {e}"}
    if "result" not in obj:  # --help and similar
        return {"text": "", "code": EXIT_OK, "error": None}
    res = dict(obj["result"])
    res.update(manifest_path=obj.get("manifest"), out_path=obj.get("out"),
               csv_path=obj.get("csv_path"), error=None)
    return res


def manifest_for(argv: Sequence[str], res: dict) -> dict:
    sub = next((a for a in _strip_io_options(argv) if not a.startswith("-")), None)
    return {
        "tool": "ssabench",
        "version": __version__,
        "subcommand": sub,
        "argv": _strip_io_options(argv),
        "inputs": res.get("inputs", {}),
        "params": res.get("params", {}),
        "seed": res.get("seed"),
        "exit_code": res["code"],
        "output_sha256": _sha256(res["text"].encode()),
    }


def _write_csv(path: str, rows: list[dict]) -> None:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    Path(path).write_text(buf.getvalue())


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    res = execute(argv)
    if res.get("error"):
        click.echo(f"error: {res['error']}", err=True)
        return res["code"]
    if "params" not in res:
        return res["code"]
    if res.get("out_path"):
        Path(res["out_path"]).write_text(res["text"])
    else:
        sys.stdout.write(res["text"])
        sys.stdout.flush()
    if res.get("csv_path") and res.get("csv") is not None:
        _write_csv(res["csv_path"], res["csv"])
    man = dumps(manifest_for(argv, res))
    if res.get("manifest_path"):
        Path(res["manifest_path"]).write_text(man)
    else:
        sys.stderr.write(man)
    return res["code"]


def entry() -> None:
    sys.exit(run())


if __name__ == "__main__":
    entry()
