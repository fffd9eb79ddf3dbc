"""Command-line entry points. Every subcommand streams JSON lines in input order."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Callable, Iterable

from . import canonjson
from .errors import ChemError

EXIT_OK, EXIT_RECORD_FAILURE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- input helpers -------------------------------------------------------------


def _as_object(line: str, key: str) -> dict:
    """A JSON object line, or a bare value wrapped as ``{key: line}``."""
    text = line.strip()
    if text.startswith("{"):
        value = json.loads(text)
        if not isinstance(value, dict):
            raise ValueError("expected a JSON object")
        return value
    return {key: text}


def _mol(text: str):
    from .molgraph import mol_from_smiles

    return mol_from_smiles(text)


def _mols(value) -> list:
    if isinstance(value, str):
        value = value.split(".")
    return [_mol(s) for s in value]


def _reaction(obj: dict) -> tuple[list, list]:
    """Accepts {"reaction": "A.B>>C"} or explicit reactants/products lists."""
    if "reaction" in obj:
        left, _, right = obj["reaction"].partition(">>")
        return _mols(left), (_mols(right) if right else [])
    return _mols(obj["reactants"]), _mols(obj.get("products", []))


# -- record handlers -------------------------------------------------------------


def mol_canon(line, args):
    from .molgraph import canonical_smiles

    return {"smiles": canonical_smiles(_mol(_as_object(line, "smiles")["smiles"]))}


def mol_props(line, args):
    from .descriptors import property_vector
    from .molgraph import canonical_smiles

    mol = _mol(_as_object(line, "smiles")["smiles"])
    return {"smiles": canonical_smiles(mol), **property_vector(mol).to_dict()}


def mol_fg_count(line, args):
    from .patterns import count_functional_group, functional_group_counts

    obj = _as_object(line, "smiles")
    mol = _mol(obj["smiles"])
    group = obj.get("group") or args.group
    if group:
        return {"group": group, "count": count_functional_group(mol, group)}
    return {"counts": functional_group_counts(mol)}


def mol_scaffold(line, args):
    from .descriptors import murcko_scaffold
    from .molgraph import canonical_smiles

    return {"scaffold": canonical_smiles(murcko_scaffold(_mol(_as_object(line, "smiles")["smiles"])))}


def mol_edit(line, args):
    from .editor import EditRequest, apply_edit

    obj = json.loads(line)
    req = EditRequest.from_dict({k: v for k, v in obj.items() if k != "smiles"})
    return apply_edit(_mol(obj["smiles"]), req).to_dict()


def rxn_retrieve(line, args):
    from .rxnstore import retrieve_templates

    obj = _as_object(line, "reactants")
    return {"templates": [h.to_dict() for h in retrieve_templates(_mols(obj["reactants"]), obj.get("k", args.k or 5))]}


def rxn_apply(line, args):
    from .errors import TemplateError
    from .molgraph import canonical_smiles
    from .rxnstore import apply_template, default_store

    obj = json.loads(line)
    try:
        template = default_store().template(obj["template_id"])
    except KeyError:
        raise TemplateError(f"unknown template id {obj['template_id']!r}") from None
    outcomes = apply_template(template, _mols(obj["reactants"]))
    return {"outcomes": [[canonical_smiles(m) for m in o] for o in outcomes]}


def rxn_conditions(line, args):
    from .rxnstore import recommend_conditions

    obj = _as_object(line, "reaction")
    reactants, products = _reaction(obj)
    hits = recommend_conditions(reactants, products, obj.get("k", args.k or 3))
    return {"conditions": [h.to_dict() for h in hits]}


def rxn_check(line, args):
    from .rxnstore import check_reaction_validity

    obj = _as_object(line, "reaction")
    reactants, products = _reaction(obj)
    return check_reaction_validity(reactants, products, bool(obj.get("allow_subset", False))).to_dict()


def reward_score(line, args):
    from .reward import TaskSpec, score

    obj = json.loads(line)
    return score(TaskSpec.from_dict(obj["task"]), obj["candidate"], args.reward_config).to_dict()


def grpo_advantages(line, args):
    from .grpo import group_advantages

    obj = json.loads(line)
    return {"advantages": [float(x) for x in group_advantages(obj["rewards"], args.grpo_config)]}


def traj_validate(line, args):
    from .trajectory import Trajectory, validate

    return validate(Trajectory.from_dict(json.loads(line))).to_dict()


def traj_replay(line, args):
    from .trajectory import Trajectory, replay

    return replay(Trajectory.from_dict(json.loads(line)), args.sandbox).to_dict()


def traj_refine(line, args):
    from .trajectory import RuleBasedRewriter, Trajectory, refine

    return refine(Trajectory.from_dict(json.loads(line)), RuleBasedRewriter()).to_dict()


def traj_emit_sft(line, args):
    from .trajectory import Trajectory, emit_sft

    return emit_sft([Trajectory.from_dict(json.loads(line))], mask_observations=not args.keep_observations)[0].to_dict()


# -- driver ------------------------------------------------------------------------


def _lines(args) -> Iterable[str]:
    source = open(args.input, encoding="utf-8") if args.input and args.input != "-" else sys.stdin
    try:
        for raw in source:
            if raw.strip():
                yield raw.rstrip("\n")
    finally:
        if source is not sys.stdin:
            source.close()


def _stream(handler: Callable, args, out) -> int:
    failures = 0
    for n, line in enumerate(_lines(args), 1):
        try:
            record = handler(line, args)
        except ChemError as exc:
            failures += 1
            record = {"line": n, "error": exc.to_dict()}
        except (ValueError, KeyError, TypeError) as exc:
            failures += 1
            detail = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
            record = {"line": n, "error": {"code": "bad_record", "message": f"{type(exc).__name__}: {detail}"}}
        out.write(canonjson.dumps(record) + "\n")
    return EXIT_RECORD_FAILURE if failures and args.strict else EXIT_OK


def _toy_train(args, out) -> int:
    from .grpo import BigramPolicy, train_toy

    target = args.target_token
    curve = train_toy(
        BigramPolicy.uniform(args.vocab, args.length),
        lambda seq: 1.0 if seq[0] == target else 0.0,
        args.steps,
        args.grpo_config,
        lr=args.lr,
        seed=args.seed,
    )
    out.write(curve.to_csv())
    return EXIT_OK


def _serve(args, out) -> int:
    from .sandbox_service import SandboxService, make_server, serve_stdio

    service = SandboxService(trace_dir=args.trace_dir)
    if args.stdio:
        source = open(args.input, encoding="utf-8") if args.input and args.input != "-" else sys.stdin
        return serve_stdio(service, source, out)
    host, _, port = args.bind.rpartition(":")
    server = make_server(service, host or "127.0.0.1", int(port))
    print(f"serving on http://{server.server_address[0]}:{server.server_address[1]}", file=sys.stderr, flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def _load_json(path: str | None) -> dict:
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--in", dest="input", default=argparse.SUPPRESS, help="input file (default stdin)")
    common.add_argument("--out", dest="output", default=argparse.SUPPRESS, help="output file (default stdout)")
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON config for reward or grpo commands")
    common.add_argument("--strict", action="store_true", default=argparse.SUPPRESS, help="exit 1 if any record fails")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="chemsandbox", description="Chemical tool sandbox command line.")
    parser.add_argument("--in", dest="input", default=None)
    parser.add_argument("--out", dest="output", default=None)
    parser.add_argument("--config", default=None)
    parser.add_argument("--strict", action="store_true", default=False)
    parser.add_argument("--seed", type=int, default=0)
    groups = parser.add_subparsers(dest="group", metavar="{mol,rxn,reward,grpo,traj,serve}")

    def leaf(sub, name, handler, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(handler=handler)
        return p

    mol = groups.add_parser("mol", help="single-molecule tools").add_subparsers(dest="command", metavar="{canon,props,fg-count,scaffold,edit}")
    leaf(mol, "canon", mol_canon, "canonical SMILES")
    leaf(mol, "props", mol_props, "property vector")
    leaf(mol, "fg-count", mol_fg_count, "functional group counts").add_argument("--group")
    leaf(mol, "scaffold", mol_scaffold, "Murcko scaffold")
    leaf(mol, "edit", mol_edit, "apply an edit request")

    rxn = groups.add_parser("rxn", help="reaction store tools").add_subparsers(dest="command", metavar="{retrieve,apply,conditions,check}")
    leaf(rxn, "retrieve", rxn_retrieve, "rank applicable templates").add_argument("--k", type=int)
    leaf(rxn, "apply", rxn_apply, "apply a template")
    leaf(rxn, "conditions", rxn_conditions, "recommend conditions").add_argument("--k", type=int)
    leaf(rxn, "check", rxn_check, "check a reaction against the templates")

    reward = groups.add_parser("reward", help="reward scoring").add_subparsers(dest="command", metavar="{score}")
    leaf(reward, "score", reward_score, "score task/candidate records")

    grpo = groups.add_parser("grpo", help="GRPO math").add_subparsers(dest="command", metavar="{advantages,toy-train}")
    leaf(grpo, "advantages", grpo_advantages, "group-normalized advantages")
    toy = leaf(grpo, "toy-train", "toy-train", "train the toy bigram policy; writes a CSV learning curve")
    toy.add_argument("--steps", type=int, default=500)
    toy.add_argument("--lr", type=float, default=0.1)
    toy.add_argument("--vocab", type=int, default=16)
    toy.add_argument("--length", type=int, default=4)
    toy.add_argument("--target-token", type=int, default=7)

    traj = groups.add_parser("traj", help="trajectory pipeline").add_subparsers(dest="command", metavar="{validate,replay,refine,emit-sft}")
    leaf(traj, "validate", traj_validate, "validate trajectories")
    leaf(traj, "replay", traj_replay, "replay trajectories").add_argument("--url", help="replay against a running server")
    leaf(traj, "refine", traj_refine, "rule-based reflective refinement")
    emit = leaf(traj, "emit-sft", traj_emit_sft, "token sequences with loss masks")
    emit.add_argument("--keep-observations", action="store_true", help="count observation tokens in the loss")
    emit.add_argument("--manifest", help="write a dataset manifest here")

    serve = groups.add_parser("serve", parents=[common], help="run the sandbox service")
    serve.add_argument("--bind", default="127.0.0.1:8765", help="host:port for HTTP mode")
    serve.add_argument("--stdio", action="store_true", help="one JSON call per stdin line instead of HTTP")
    serve.add_argument("--trace-dir", help="append-only JSONL traces per session")
    serve.set_defaults(handler="serve")
    return parser


def _prepare(args) -> None:
    from .grpo import GrpoConfig
    from .reward import RewardConfig

    config = _load_json(args.config)
    if args.group == "reward":
        args.reward_config = RewardConfig.from_dict(config)
    if args.group == "grpo":
        args.grpo_config = GrpoConfig(**config)
    if args.group == "traj" and args.command == "replay":
        from .sandbox_service import SandboxService
        from .trajectory import HttpSandbox

        args.sandbox = HttpSandbox(args.url) if args.url else SandboxService()


def run(argv: list[str] | None = None, stdout=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if getattr(args, "handler", None) is None:
        parser.print_usage(sys.stderr)
        print("chemsandbox: error: a subcommand is required", file=sys.stderr)
        return EXIT_USAGE
    try:
        _prepare(args)
    except UsageError as exc:
        print(f"chemsandbox: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ChemError, TypeError) as exc:
        print(f"chemsandbox: error: bad config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.input and args.input != "-" and not Path(args.input).exists():
        print(f"chemsandbox: error: input file {args.input} does not exist", file=sys.stderr)
        return EXIT_USAGE

    to_file = args.output and args.output != "-"
    out = open(args.output, "w", encoding="utf-8") if to_file else (stdout or sys.stdout)
    try:
        if args.handler == "serve":
            return _serve(args, out)
        if args.handler == "toy-train":
            return _toy_train(args, out)
        if args.group == "traj" and args.command == "emit-sft" and args.manifest:
            return _emit_with_manifest(args, out)
        return _stream(args.handler, args, out)
    finally:
        if to_file:
            out.close()


def _emit_with_manifest(args, out) -> int:
    import io

    from .trajectory import dataset_manifest

    buf = io.StringIO()
    code = _stream(args.handler, args, buf)
    lines = buf.getvalue().splitlines()
    out.write(buf.getvalue())
    manifest = dataset_manifest(lines, {"tokenizer": "utf8-bytes", "mask_observations": not args.keep_observations})
    Path(args.manifest).write_text(canonjson.dumps(manifest) + "\n", encoding="utf-8")
    return code


def main(argv: list[str] | None = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
