"""Chemistry-aware reward: format gate plus a weighted sum of chemical checks."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from ..descriptors import morgan_fingerprint, murcko_scaffold, tanimoto, property_vector, scaffold_similarity
from ..errors import ChemError, ConfigError
from ..molgraph import Molecule, canonical_smiles, mol_from_smiles
from ..patterns import count_functional_group, get_group
from .transcript import check_format, extract_answer, segment_transcript

TASK_KINDS = ("edit", "optimize", "react")
COMPONENTS = ("str", "func", "opt", "rxn")
DEFAULT_PROFILES = {
    "edit": ("str", "func"),
    "optimize": ("str", "func", "opt"),
    "react": ("str", "rxn"),
}
PROPERTIES = ("mw", "logp", "qed", "hbd", "hba", "psa", "rotatable_bonds", "aromatic_rings")
DEFAULT_SCALES = {"logp": 2.0, "qed": 0.2}
FORMAT_SCOPES = ("transcript", "answer")


def _finite_nonneg(name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value) or value < 0:
        raise ConfigError(f"{name} must be a finite non-negative number, got {value!r}", field=name)
    return float(value)


@dataclass(frozen=True)
class RewardConfig:
    lambda_format: float = 0.5
    lambda_chem: float = 0.5
    w_str: float = 1.0
    w_func: float = 1.0
    w_opt: float = 1.0
    w_rxn: float = 1.0
    property_scales: dict = field(default_factory=lambda: dict(DEFAULT_SCALES))
    task_profile: dict = field(default_factory=lambda: {k: list(v) for k, v in DEFAULT_PROFILES.items()})
    allow_subset_products: bool = True
    format_scope: str = "transcript"  # or "answer": only the closing answer block is checked

    def __post_init__(self) -> None:
        if self.format_scope not in FORMAT_SCOPES:
            raise ConfigError(f"format_scope must be one of {FORMAT_SCOPES}", field="format_scope")
        for name in ("lambda_format", "lambda_chem", "w_str", "w_func", "w_opt", "w_rxn"):
            _finite_nonneg(name, getattr(self, name))
        if self.lambda_format + self.lambda_chem <= 0:
            raise ConfigError("lambda_format and lambda_chem cannot both be zero")
        for prop, scale in self.property_scales.items():
            if prop not in PROPERTIES:
                raise ConfigError(f"unknown property {prop!r}", field="property_scales")
            if _finite_nonneg(f"property_scales.{prop}", scale) == 0:
                raise ConfigError(f"scale for {prop} must be positive", field="property_scales")
        for kind, comps in self.task_profile.items():
            if kind not in TASK_KINDS or not comps or any(c not in COMPONENTS for c in comps):
                raise ConfigError(f"bad task profile for {kind!r}: {comps!r}", field="task_profile")
            if sum(self.raw_weight(c) for c in comps) <= 0:
                raise ConfigError(f"active weights for {kind!r} sum to zero", field="task_profile")

    def raw_weight(self, component: str) -> float:
        return getattr(self, f"w_{component}")

    def lambdas(self) -> tuple[float, float]:
        """Format and chemistry weights scaled to sum to one."""
        total = self.lambda_format + self.lambda_chem
        return self.lambda_format / total, self.lambda_chem / total

    def active(self, kind: str) -> tuple[str, ...]:
        return tuple(self.task_profile.get(kind, DEFAULT_PROFILES[kind]))

    def raw_weights(self, kind: str) -> dict[str, float]:
        return {c: self.raw_weight(c) for c in self.active(kind)}

    def weights(self, kind: str) -> dict[str, float]:
        """Active component weights for ``kind`` scaled to sum to one."""
        comps = self.active(kind)
        total = sum(self.raw_weight(c) for c in comps)
        return {c: self.raw_weight(c) / total for c in comps}

    @classmethod
    def from_dict(cls, data: dict) -> "RewardConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown reward config keys {sorted(unknown)}")
        kw = dict(data)
        if "property_scales" in kw:
            kw["property_scales"] = {**DEFAULT_SCALES, **kw["property_scales"]}
        if "task_profile" in kw:
            kw["task_profile"] = {**{k: list(v) for k, v in DEFAULT_PROFILES.items()}, **kw["task_profile"]}
        return cls(**kw)

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


@dataclass(frozen=True)
class TaskSpec:
    kind: str
    source: Molecule | None = None
    target: Molecule | None = None
    required_groups: tuple[tuple[str, int], ...] = ()
    # named like the task field it mirrors; shadows the builtin only inside this class body
    property: tuple[str, int] | None = None  # (name, +1 to increase / -1 to decrease)
    reaction: tuple[tuple[Molecule, ...], tuple[Molecule, ...]] | None = None

    def __post_init__(self) -> None:
        if self.kind not in TASK_KINDS:
            raise ConfigError(f"task kind must be one of {TASK_KINDS}, got {self.kind!r}")
        for name, n in self.required_groups:
            get_group(name)
            if n < 1:
                raise ConfigError(f"required count for {name} must be at least 1")
        if self.kind in ("edit", "optimize") and self.source is None:
            raise ConfigError(f"{self.kind} tasks need a source molecule")
        if self.kind == "edit" and self.target is None and not self.required_groups:
            raise ConfigError("edit tasks need a target or required groups")
        if self.kind == "optimize":
            if self.property is None:
                raise ConfigError("optimize tasks need a property")
            name, direction = self.property
            if name not in PROPERTIES or direction not in (1, -1):
                raise ConfigError(f"bad property objective {self.property!r}")
        if self.kind == "react":
            if self.reaction is None or not self.reaction[0]:
                raise ConfigError("react tasks need reactants")

    def reference(self) -> Molecule | None:
        """What structural similarity is measured against."""
        if self.target is not None:
            return self.target
        if self.kind == "react" and self.reaction and self.reaction[1]:
            return _join(self.reaction[1])
        return self.source

    @classmethod
    def from_dict(cls, data: dict) -> "TaskSpec":
        def mol(key):
            return mol_from_smiles(data[key]) if data.get(key) else None

        prop = data.get("property")
        rxn = data.get("reaction")
        try:
            return cls(
                kind=data["kind"],
                source=mol("source"),
                target=mol("target"),
                required_groups=tuple((g, int(n)) for g, n in data.get("required_groups", ())),
                property=(prop["name"], int(prop["direction"])) if prop else None,
                reaction=(
                    tuple(mol_from_smiles(s) for s in rxn.get("reactants", ())),
                    tuple(mol_from_smiles(s) for s in rxn.get("products", ())),
                ) if rxn else None,
            )
        except KeyError as exc:
            raise ConfigError(f"task record lacks {exc.args[0]!r}") from None

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.source is not None:
            out["source"] = canonical_smiles(self.source)
        if self.target is not None:
            out["target"] = canonical_smiles(self.target)
        if self.required_groups:
            out["required_groups"] = [[g, n] for g, n in self.required_groups]
        if self.property is not None:
            out["property"] = {"name": self.property[0], "direction": self.property[1]}
        if self.reaction is not None:
            out["reaction"] = {
                "reactants": [canonical_smiles(m) for m in self.reaction[0]],
                "products": [canonical_smiles(m) for m in self.reaction[1]],
            }
        return out


@dataclass(frozen=True)
class RewardBreakdown:
    r_format: int
    sim_scaffold: float
    fidelity_func: float
    delta_prop: float
    valid_rxn: int
    r_chem: float
    r_total: float
    active: tuple[str, ...] = ()
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "r_format": self.r_format,
            "sim_scaffold": self.sim_scaffold,
            "fidelity_func": self.fidelity_func,
            "delta_prop": self.delta_prop,
            "valid_rxn": self.valid_rxn,
            "r_chem": self.r_chem,
            "r_total": self.r_total,
            "active": list(self.active),
            "error": self.error,
        }


def _join(mols) -> Molecule:
    return mol_from_smiles(".".join(canonical_smiles(m) for m in mols))


def combine_chem(components: dict[str, float], weights: dict[str, float]) -> float:
    """Weighted mean over the active components.

    Summing raw products exactly and dividing once keeps the result inside
    the components' range; scaling the weights first could round past it.
    """
    active = [c for c in COMPONENTS if c in weights]
    total = math.fsum(weights[c] for c in active)
    return math.fsum(weights[c] * components[c] for c in active) / total


def combine_total(r_format: int, r_chem: float, cfg: RewardConfig) -> float:
    lam_format, lam_chem = cfg.lambda_format, cfg.lambda_chem
    return math.fsum((lam_format * r_format, lam_chem * r_chem)) / (lam_format + lam_chem)


def _answer_block_ok(candidate: str) -> int:
    segments, problems = segment_transcript(candidate)
    answers = [i for i, seg in enumerate(segments) if seg.kind == "answer"]
    return int(not problems and answers == [len(segments) - 1])


def _answer_text(candidate: str, scope: str) -> tuple[str | None, int]:
    """The final answer and the format indicator of the candidate text."""
    if "<" in candidate and ">" in candidate:
        ok = check_format(candidate).ok if scope == "transcript" else _answer_block_ok(candidate)
        return extract_answer(candidate), ok
    return candidate.strip(), 0


def _parse_answer(task: TaskSpec, answer: str) -> Molecule:
    if task.kind == "react" and ">>" in answer:
        answer = answer.split(">>", 1)[1]
    return mol_from_smiles(answer)


def _property(mol: Molecule, name: str) -> float:
    return float(getattr(property_vector(mol), name))


def structural_similarity(candidate: Molecule, reference: Molecule) -> float:
    """1.0 on exact canonical match, else Tanimoto of scaffold fingerprints.

    Two acyclic molecules both have an empty scaffold; they are compared by
    whole-molecule fingerprints instead so the score still discriminates.
    """
    if canonical_smiles(candidate) == canonical_smiles(reference):
        return 1.0
    if not murcko_scaffold(candidate).atoms and not murcko_scaffold(reference).atoms:
        return tanimoto(morgan_fingerprint(candidate), morgan_fingerprint(reference))
    return scaffold_similarity(candidate, reference)


def group_fidelity(mol: Molecule, required) -> float:
    if not required:
        return 1.0
    met = sum(1 for name, n in required if count_functional_group(mol, name) >= n)
    return met / len(required)


def property_shift(candidate: Molecule, source: Molecule, objective: tuple[str, int], cfg: RewardConfig) -> float:
    name, direction = objective
    scale = cfg.property_scales.get(name)
    if scale is None:
        raise ConfigError(f"no scale configured for property {name!r}", field="property_scales")
    delta = (_property(candidate, name) - _property(source, name)) * direction / scale
    return max(-1.0, min(1.0, delta))


def score(task: TaskSpec, candidate: str, cfg: RewardConfig | None = None) -> RewardBreakdown:
    cfg = cfg or RewardConfig()
    weights = cfg.weights(task.kind)
    answer, r_format = _answer_text(candidate, cfg.format_scope)
    comps = {"str": 0.0, "func": 0.0, "opt": 0.0, "rxn": 0}
    error = None
    mol = None
    if answer:
        try:
            mol = _parse_answer(task, answer)
        except ChemError as exc:
            error = f"{exc.code}: {exc.message}"
    else:
        error = "no answer"
    if mol is not None:
        ref = task.reference()
        if "str" in weights and ref is not None:
            comps["str"] = structural_similarity(mol, ref)
        if "func" in weights:
            comps["func"] = group_fidelity(mol, task.required_groups)
        if "opt" in weights and task.property is not None and task.source is not None:
            comps["opt"] = property_shift(mol, task.source, task.property, cfg)
        if "rxn" in weights and task.reaction is not None:
            from ..rxnstore import check_reaction_validity

            comps["rxn"] = int(check_reaction_validity(
                list(task.reaction[0]), [mol], allow_subset=cfg.allow_subset_products
            ).valid)
    r_chem = combine_chem(comps, cfg.raw_weights(task.kind))
    return RewardBreakdown(
        r_format=r_format,
        sim_scaffold=comps["str"],
        fidelity_func=comps["func"],
        delta_prop=comps["opt"],
        valid_rxn=comps["rxn"],
        r_chem=r_chem,
        r_total=combine_total(r_format, r_chem, cfg),
        active=tuple(weights),
        error=error,
    )


def score_batch(items, cfg: RewardConfig | None = None) -> list[RewardBreakdown]:
    """Score ``(task, candidate)`` pairs in order; failures are recorded, not raised."""
    cfg = cfg or RewardConfig()
    out = []
    for task, candidate in items:
        try:
            out.append(score(task, candidate, cfg))
        except Exception as exc:  # noqa: BLE001 - one bad item never aborts the batch
            out.append(RewardBreakdown(0, 0.0, 0.0, 0.0, 0, 0.0, 0.0, (), f"{type(exc).__name__}: {exc}"))
    return out


def load_config(path) -> RewardConfig:
    with open(path, encoding="utf-8") as fh:
        return RewardConfig.from_dict(json.load(fh))
