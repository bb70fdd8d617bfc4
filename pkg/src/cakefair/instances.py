"""Instance and result files: a JSON schema with exact "p/q" rationals.

Decimal mirrors are advisory only; every number that matters round-trips
exactly. Result files have a stable region that is byte-identical across
reruns regardless of worker count: everything except the provenance object,
which carries the config echo, timing, and instrumentation counters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import __version__
from .cake import ContiguousPartition, CutVector, EnvyReport, PiecewiseConstantValuation, \
    partition_from_cuts
from .errors import InputError
from .groups import GroupAllocation, GroupStructure, verify_group_envy
from .rationals import decimal_str, parse_rational, rational_str

@dataclass(frozen=True)
class Player:
    name: str
    valuation: PiecewiseConstantValuation


@dataclass(frozen=True)
class SolverConfig:
    mesh: Optional[int] = None
    mode: str = "auto"
    budget: Optional[int] = None
    workers: int = 1
    seed: int = 0

    def to_doc(self):
        return {"mesh": self.mesh, "mode": self.mode, "budget": self.budget,
                "workers": self.workers, "seed": self.seed}


@dataclass(frozen=True)
class Instance:
    players: tuple[Player, ...]
    sizes: tuple[int, ...]
    epsilon: Fraction
    fixed_membership: Optional[tuple[tuple[str, ...], ...]] = None
    config: SolverConfig = field(default_factory=SolverConfig)

    @property
    def names(self):
        return tuple(p.name for p in self.players)

    @property
    def valuations(self):
        return tuple(p.valuation for p in self.players)

    @property
    def groups(self) -> GroupStructure:
        return GroupStructure(self.sizes)

    def membership_indices(self):
        """fixedMembership as a per-player group index list (oracle input)."""
        if self.fixed_membership is None:
            raise InputError("instance has no fixedMembership section")
        index = {}
        for g, members in enumerate(self.fixed_membership, start=1):
            for name in members:
                index[name] = g
        return [index[name] for name in self.names]


def _require(doc, key, where, kind=None):
    if key not in doc:
        raise InputError(f"{where}: missing required field {key!r}")
    value = doc[key]
    if kind is not None and not isinstance(value, kind):
        raise InputError(f"{where}.{key}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def parse_instance(doc: dict, where: str = "instance") -> Instance:
    if not isinstance(doc, dict):
        raise InputError(f"{where}: expected a JSON object")
    players_doc = _require(doc, "players", where, list)
    if not players_doc:
        raise InputError(f"{where}.players: need at least one player")
    normalize = bool(doc.get("normalize", False))
    players = []
    for i, pd in enumerate(players_doc):
        pw = f"{where}.players[{i}]"
        if not isinstance(pd, dict):
            raise InputError(f"{pw}: expected an object")
        name = _require(pd, "name", pw, str)
        if not name:
            raise InputError(f"{pw}.name: must be nonempty")
        bps = [parse_rational(b, f"{pw}.breakpoints[{k}]")
               for k, b in enumerate(_require(pd, "breakpoints", pw, list))]
        dens = [parse_rational(d, f"{pw}.densities[{k}]")
                for k, d in enumerate(_require(pd, "densities", pw, list))]
        try:
            if normalize:
                valuation = PiecewiseConstantValuation.normalized(bps, dens)
            else:
                valuation = PiecewiseConstantValuation(bps, dens)
        except InputError as exc:
            raise InputError(f"{pw}: {exc}") from exc
        players.append(Player(name=name, valuation=valuation))
    names = [p.name for p in players]
    if len(set(names)) != len(names):
        raise InputError(f"{where}.players: names must be unique, got {names}")

    n = len(players)
    sizes = doc.get("groups", [1] * n)
    if not isinstance(sizes, list) or not all(isinstance(k, int) for k in sizes):
        raise InputError(f"{where}.groups: expected a list of integers")
    if sum(sizes) != n:
        raise InputError(f"{where}.groups: sizes {sizes} sum to {sum(sizes)}, expected {n}")
    GroupStructure(tuple(sizes))

    epsilon = parse_rational(_require(doc, "epsilon", where), f"{where}.epsilon")
    if epsilon < 0:
        raise InputError(f"{where}.epsilon: must be nonnegative, got {epsilon}")

    fixed = None
    if doc.get("fixedMembership") is not None:
        fm = doc["fixedMembership"]
        if not isinstance(fm, list) or not all(isinstance(g, list) for g in fm):
            raise InputError(f"{where}.fixedMembership: expected a list of name lists")
        flat = [name for group in fm for name in group]
        if sorted(flat) != sorted(names):
            raise InputError(
                f"{where}.fixedMembership: must partition the player names exactly")
        fixed = tuple(tuple(group) for group in fm)

    cfg_doc = doc.get("config", {})
    if not isinstance(cfg_doc, dict):
        raise InputError(f"{where}.config: expected an object")
    known = {"mesh", "mode", "budget", "workers", "seed"}
    unknown = set(cfg_doc) - known
    if unknown:
        raise InputError(f"{where}.config: unknown keys {sorted(unknown)}")
    mode = cfg_doc.get("mode", "auto")
    if mode not in ("auto", "scan", "walk"):
        raise InputError(f"{where}.config.mode: expected scan|walk|auto, got {mode!r}")
    config = SolverConfig(
        mesh=cfg_doc.get("mesh"), mode=mode, budget=cfg_doc.get("budget"),
        workers=int(cfg_doc.get("workers", 1)), seed=int(cfg_doc.get("seed", 0)))

    return Instance(players=tuple(players), sizes=tuple(sizes), epsilon=epsilon,
                    fixed_membership=fixed, config=config)


def emit_instance(instance: Instance) -> dict:
    doc = {
        "players": [{
            "name": p.name,
            "breakpoints": [rational_str(b) for b in p.valuation.breakpoints],
            "densities": [rational_str(d) for d in p.valuation.densities],
        } for p in instance.players],
        "groups": list(instance.sizes),
        "epsilon": rational_str(instance.epsilon),
    }
    if instance.fixed_membership is not None:
        doc["fixedMembership"] = [list(g) for g in instance.fixed_membership]
    doc["config"] = instance.config.to_doc()
    return doc


def load_instance(path) -> Instance:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read instance {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON: {exc}") from exc
    return parse_instance(doc, where=str(path))


def dump_json(doc: dict, path=None) -> str:
    text = json.dumps(doc, indent=2) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


# ---------------------------------------------------------------------------
# Result documents

def _rational_pair(x):
    return rational_str(x), decimal_str(x)


def _envy_doc(report: EnvyReport, names, membership):
    per_player = []
    for entry in report.entries:
        envy_r, envy_d = _rational_pair(entry.envy)
        per_player.append({
            "player": names[entry.player - 1],
            "group": membership[entry.player],
            "envy": envy_r,
            "envyDecimal": envy_d,
        })
    max_r, max_d = _rational_pair(report.max_envy)
    return {
        "perPlayer": per_player,
        "maxEnvy": max_r,
        "maxEnvyDecimal": max_d,
        "epsilon": rational_str(report.epsilon),
        "pass": report.passed,
    }


def result_document(instance: Instance, alloc: GroupAllocation, *,
                    timing_seconds: Optional[float] = None,
                    created: Optional[str] = None,
                    budget_exceeded: bool = False) -> dict:
    """Full result of a solve: allocation, exact envy report, certificate, and
    provenance. The epsilon-envy and mesh-distance semantics are tool-level
    approximation notions layered on top of exact preference queries."""
    names = instance.names
    report = verify_group_envy(instance.valuations, alloc, instance.epsilon)
    cuts = []
    acc = Fraction(0)
    for length in alloc.partition.lengths[:-1]:
        acc += length
        cuts.append(acc)
    pieces = []
    bounds = [Fraction(0)] + cuts + [Fraction(1)]
    for j in range(alloc.groups.m):
        start_r, start_d = _rational_pair(bounds[j])
        end_r, end_d = _rational_pair(bounds[j + 1])
        pieces.append({"group": j + 1, "start": start_r, "end": end_r,
                       "startDecimal": start_d, "endDecimal": end_d,
                       "members": [names[p - 1] for p in alloc.members(j + 1)]})

    certificate = None
    cells_visited = None
    ind = alloc.individual
    if ind is not None and ind.certificate is not None:
        cert = ind.certificate
        cells_visited = cert.cells_visited
        certificate = {
            "meshK": cert.mesh_k,
            "cellBase": list(cert.cell.cell.base.z),
            "permutation": list(cert.cell.cell.perm),
            "owners": list(cert.cell.owners),
            "labels": list(cert.cell.labels),
            "delta": rational_str(cert.delta),
            "mode": cert.mode,
            "semantics": "each owner demanded their labeled piece at a cell vertex "
                         "within cut-space distance delta of the output cuts",
        }

    doc = {
        "players": list(names),
        "groups": list(instance.sizes),
        "epsilon": rational_str(instance.epsilon),
        "semantics": "epsilon-envy",
        "budgetExceeded": budget_exceeded,
        "allocation": {
            "cuts": [rational_str(c) for c in cuts],
            "cutsDecimal": [decimal_str(c) for c in cuts],
            "pieces": pieces,
            "membership": {names[p - 1]: g for p, g in sorted(alloc.membership.items())},
            "groupPieces": {str(j + 1): j + 1 for j in range(alloc.groups.m)},
        },
        "envy": _envy_doc(report, names, alloc.membership),
        "certificate": certificate,
        "provenance": {
            "tool": "cakefair",
            "version": __version__,
            "config": instance.config.to_doc(),
        },
    }
    if cells_visited is not None:
        doc["provenance"]["cellsVisited"] = cells_visited
    if created is not None:
        doc["provenance"]["created"] = created
    if timing_seconds is not None:
        doc["provenance"]["timingSeconds"] = round(timing_seconds, 6)
    return doc


def stable_region(doc: dict) -> dict:
    """The result document minus provenance (config echo, timestamps, timing,
    instrumentation); reruns with identical inputs agree byte-for-byte on this
    region for any worker count."""
    out = json.loads(json.dumps(doc))
    out.pop("provenance", None)
    return out


def load_result(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read result {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON: {exc}") from exc


def allocation_from_result(instance: Instance, result: dict) -> GroupAllocation:
    """Rebuild the allocation named by a result file, validating it against
    the instance (player set, group sizes, cut shape)."""
    names = instance.names
    got = result.get("players")
    if got != list(names):
        raise InputError(f"result players {got} do not match instance players {list(names)}")
    alloc_doc = result.get("allocation")
    if not isinstance(alloc_doc, dict):
        raise InputError("result is missing its allocation section")
    cuts = [parse_rational(c, f"allocation.cuts[{i}]")
            for i, c in enumerate(alloc_doc.get("cuts", []))]
    groups = instance.groups
    if len(cuts) != groups.m - 1:
        raise InputError(f"expected {groups.m - 1} cuts for {groups.m} groups, got {len(cuts)}")
    partition = partition_from_cuts(CutVector(tuple(cuts)))
    membership_doc = alloc_doc.get("membership")
    if not isinstance(membership_doc, dict) or sorted(membership_doc) != sorted(names):
        raise InputError("allocation.membership must map every player name")
    membership = {}
    for i, name in enumerate(names, start=1):
        g = membership_doc[name]
        if not isinstance(g, int) or not 1 <= g <= groups.m:
            raise InputError(f"allocation.membership[{name!r}]: bad group {g!r}")
        membership[i] = g
    for j in range(1, groups.m + 1):
        count = sum(1 for g in membership.values() if g == j)
        if count != groups.sizes[j - 1]:
            raise InputError(
                f"group {j} has {count} members, instance prescribes {groups.sizes[j - 1]}")
    return GroupAllocation(partition=partition, membership=membership, groups=groups)


def verification_document(instance: Instance, alloc: GroupAllocation, epsilon) -> dict:
    """Envy recomputed from scratch for a stored allocation."""
    report = verify_group_envy(instance.valuations, alloc, epsilon)
    names = instance.names
    doc = _envy_doc(report, names, alloc.membership)
    doc["enviers"] = [names[p - 1] for p in report.enviers()]
    return {"players": list(names), "verification": doc}
