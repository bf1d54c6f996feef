"""Scenario files: a single JSON document describing a market and its types.

Fields: ``schools`` (count m), ``capacities`` (list of m positive ints),
``outside_option`` (school id or null), ``students`` (list of ids),
``type_distribution`` (either ``{"joint_support": [...]}`` or
``{"independent": {...}, "score_law": {...}}``), ``seed``, and optional
``strategy_mode`` ("truthful" or "cpe") plus ``replications``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .model import (
    UNIFORM01,
    IndependentTypes,
    Instance,
    JointSupport,
    StudentType,
    TabulatedCdf,
    validate_instance,
)


class ScenarioError(ValueError):
    """Schema violation with the JSON path of the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class Scenario:
    instance: Instance
    types: object
    seed: int = 0
    replications: int = 1000
    strategy_mode: str = "truthful"
    raw: dict = field(default_factory=dict)


def _number(x, path):
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError:
            raise ScenarioError(path, f"not a number: {x!r}") from None
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ScenarioError(path, f"not a number: {x!r}")
    return x


def _require(doc, key, path):
    if key not in doc:
        raise ScenarioError(f"{path}.{key}", "missing required field")
    return doc[key]


def load_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from None
    if not isinstance(doc, dict):
        raise ScenarioError("$", "scenario must be a JSON object")

    m = _require(doc, "schools", "$")
    if not isinstance(m, int) or m < 1:
        raise ScenarioError("$.schools", "must be a positive school count")
    caps = _require(doc, "capacities", "$")
    if not isinstance(caps, list) or len(caps) != m:
        raise ScenarioError("$.capacities", f"must list exactly {m} capacities")
    for k, q in enumerate(caps):
        if not isinstance(q, int) or q < 1:
            raise ScenarioError(f"$.capacities[{k}]", "capacity must be a positive integer")
    outside = doc.get("outside_option")
    if outside is not None and (not isinstance(outside, int) or not 1 <= outside <= m):
        raise ScenarioError("$.outside_option", f"must be a school id in 1..{m} or null")
    students = _require(doc, "students", "$")
    if not isinstance(students, list) or not students:
        raise ScenarioError("$.students", "must be a nonempty list of identifiers")
    instance = Instance(tuple(caps), tuple(students), outside)

    dist_doc = _require(doc, "type_distribution", "$")
    types = _parse_types(dist_doc, instance)
    problems = validate_instance(instance, types)
    if problems:
        raise ScenarioError("$", "; ".join(problems))

    seed = doc.get("seed", 0)
    if not isinstance(seed, int):
        raise ScenarioError("$.seed", "must be an integer")
    reps = doc.get("replications", 1000)
    if not isinstance(reps, int) or reps < 0:
        raise ScenarioError("$.replications", "must be a nonnegative integer")
    mode = doc.get("strategy_mode", "truthful")
    if mode not in ("truthful", "cpe"):
        raise ScenarioError("$.strategy_mode", "must be 'truthful' or 'cpe'")
    return Scenario(instance, types, seed, reps, mode, doc)


def _parse_types(doc, instance: Instance):
    path = "$.type_distribution"
    if not isinstance(doc, dict):
        raise ScenarioError(path, "must be an object")
    if "joint_support" in doc:
        cases = []
        for k, case in enumerate(doc["joint_support"]):
            cpath = f"{path}.joint_support[{k}]"
            prob = _number(_require(case, "prob", cpath), f"{cpath}.prob")
            profile = {}
            type_docs = _require(case, "types", cpath)
            for i in instance.students:
                key = str(i)
                if key not in type_docs:
                    raise ScenarioError(f"{cpath}.types", f"missing student {i}")
                profile[i] = _parse_student_type(type_docs[key], f"{cpath}.types.{key}", instance)
            cases.append((prob, profile))
        return JointSupport(tuple(cases))
    if "independent" in doc:
        law = _parse_score_law(doc.get("score_law", {"kind": "uniform01"}), f"{path}.score_law")
        supports = {}
        fixed = {}
        for i in instance.students:
            key = str(i)
            if key not in doc["independent"]:
                raise ScenarioError(f"{path}.independent", f"missing student {i}")
            entry = doc["independent"][key]
            spath = f"{path}.independent.{key}"
            rows = []
            for k, row in enumerate(_require(entry, "support", spath)):
                rpath = f"{spath}.support[{k}]"
                prob = _number(_require(row, "prob", rpath), f"{rpath}.prob")
                values = tuple(
                    _number(v, f"{rpath}.values[{j}]") for j, v in enumerate(_require(row, "values", rpath))
                )
                if len(values) != instance.m:
                    raise ScenarioError(f"{rpath}.values", f"must list {instance.m} values")
                lam_dom = _number(_require(row, "loss_dominance", rpath), f"{rpath}.loss_dominance")
                rows.append((prob, values, lam_dom))
            supports[i] = tuple(rows)
            if "score" in entry:
                fixed[i] = _number(entry["score"], f"{spath}.score")
        return IndependentTypes(supports, law, fixed)
    raise ScenarioError(path, "needs either 'joint_support' or 'independent'")


def _parse_student_type(doc, path, instance: Instance) -> StudentType:
    values = tuple(_number(v, f"{path}.values[{j}]") for j, v in enumerate(_require(doc, "values", path)))
    if len(values) != instance.m:
        raise ScenarioError(f"{path}.values", f"must list {instance.m} values")
    lam_dom = _number(_require(doc, "loss_dominance", path), f"{path}.loss_dominance")
    if "priorities" in doc:
        prios = tuple(_number(v, f"{path}.priorities[{j}]") for j, v in enumerate(doc["priorities"]))
        if len(prios) != instance.m:
            raise ScenarioError(f"{path}.priorities", f"must list {instance.m} priorities")
        return StudentType.from_loss_dominance(values, lam_dom, priorities=prios)
    if "score" in doc:
        return StudentType.from_loss_dominance(values, lam_dom, score=_number(doc["score"], f"{path}.score"))
    raise ScenarioError(path, "needs 'priorities' or 'score'")


def _parse_score_law(doc, path):
    kind = doc.get("kind", "uniform01")
    if kind == "uniform01":
        return UNIFORM01
    if kind == "tabulated":
        xs = [_number(v, f"{path}.x[{k}]") for k, v in enumerate(_require(doc, "x", path))]
        ps = [_number(v, f"{path}.p[{k}]") for k, v in enumerate(_require(doc, "p", path))]
        try:
            return TabulatedCdf(xs, ps)
        except ValueError as exc:
            raise ScenarioError(path, str(exc)) from None
    raise ScenarioError(f"{path}.kind", f"unknown score law {kind!r}")
