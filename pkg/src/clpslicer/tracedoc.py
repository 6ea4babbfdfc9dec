"""The versioned trace document: serialization, hashing, trace storage.

Documents carry both printed forms (for display) and full ASTs (so a
trace loaded from disk can be sliced again: stores are rebuilt by
re-adding atoms in cid order, which is cheap and deterministic).
"""

from __future__ import annotations

import hashlib
from dataclasses import replace
import json
import os
from pathlib import Path
from typing import Optional, Union

from . import syntax as syn
from .assertions import Marking
from .constraints import (
    AllDifferentC,
    AndC,
    Atom,
    Constraint,
    EqC,
    ExistsC,
    FALSE,
    FalseC,
    InDomainC,
    InExprC,
    LinRelC,
    ListDomainC,
    TRUE,
    TokenC,
    TrueC,
    print_constraint,
)
from .engine import Configuration, Trace, TransitionLabel, print_agent
from .slicer import (
    ConfigView,
    DOT,
    FDot,
    FKeep,
    FLocal,
    FSum,
    FTell,
    Frag,
    SlicedTrace,
    render_frag,
)
from .store import SolverConfig, Store
from .terms import Int, Struct, Term, Var

SCHEMA_VERSION = 1


class DocumentError(ValueError):
    pass


# --- AST <-> JSON -----------------------------------------------------------


def term_to_json(t: Term):
    if isinstance(t, Var):
        return {"v": t.name}
    if isinstance(t, Int):
        return {"i": t.value}
    if isinstance(t, Struct):
        return {"s": t.functor, "a": [term_to_json(a) for a in t.args]}
    raise TypeError(f"not a term: {t!r}")


def term_from_json(d) -> Term:
    if "v" in d:
        return Var(d["v"])
    if "i" in d:
        return Int(d["i"])
    if "s" in d:
        return Struct(d["s"], tuple(term_from_json(a) for a in d["a"]))
    raise DocumentError(f"bad term encoding: {d!r}")


def constraint_to_json(c: Constraint):
    if isinstance(c, EqC):
        return {"k": "eq", "l": term_to_json(c.lhs), "r": term_to_json(c.rhs)}
    if isinstance(c, InDomainC):
        return {"k": "dom", "x": c.var, "lo": c.lo, "hi": c.hi}
    if isinstance(c, LinRelC):
        return {"k": "rel", "op": c.op, "l": term_to_json(c.lhs), "r": term_to_json(c.rhs)}
    if isinstance(c, TokenC):
        return {"k": "tok", "f": c.functor, "a": [term_to_json(a) for a in c.args]}
    if isinstance(c, TrueC):
        return {"k": "t"}
    if isinstance(c, FalseC):
        return {"k": "f"}
    if isinstance(c, AndC):
        return {"k": "and", "p": [constraint_to_json(p) for p in c.parts]}
    if isinstance(c, ExistsC):
        return {"k": "ex", "x": c.var, "b": constraint_to_json(c.body)}
    if isinstance(c, InExprC):
        return {
            "k": "in",
            "x": term_to_json(c.var),
            "lo": term_to_json(c.lo),
            "hi": term_to_json(c.hi),
        }
    if isinstance(c, AllDifferentC):
        return {"k": "alldiff", "a": term_to_json(c.arg)}
    if isinstance(c, ListDomainC):
        return {
            "k": "fddom",
            "a": term_to_json(c.arg),
            "lo": term_to_json(c.lo),
            "hi": term_to_json(c.hi),
        }
    raise TypeError(f"not a constraint: {c!r}")


def constraint_from_json(d) -> Constraint:
    k = d["k"]
    if k == "eq":
        return EqC(term_from_json(d["l"]), term_from_json(d["r"]))
    if k == "dom":
        return InDomainC(d["x"], d["lo"], d["hi"])
    if k == "rel":
        return LinRelC(d["op"], term_from_json(d["l"]), term_from_json(d["r"]))
    if k == "tok":
        return TokenC(d["f"], tuple(term_from_json(a) for a in d["a"]))
    if k == "t":
        return TRUE
    if k == "f":
        return FALSE
    if k == "and":
        return AndC(tuple(constraint_from_json(p) for p in d["p"]))
    if k == "ex":
        return ExistsC(d["x"], constraint_from_json(d["b"]))
    if k == "in":
        return InExprC(
            term_from_json(d["x"]), term_from_json(d["lo"]), term_from_json(d["hi"])
        )
    if k == "alldiff":
        return AllDifferentC(term_from_json(d["a"]))
    if k == "fddom":
        return ListDomainC(
            term_from_json(d["a"]), term_from_json(d["lo"]), term_from_json(d["hi"])
        )
    raise DocumentError(f"bad constraint encoding: {d!r}")


def assertion_to_json(f):
    if isinstance(f, syn.Pos):
        return {"k": "pos", "c": constraint_to_json(f.c)}
    if isinstance(f, syn.Neg):
        return {"k": "neg", "c": constraint_to_json(f.c)}
    if isinstance(f, syn.Cons):
        return {"k": "cons", "c": constraint_to_json(f.c)}
    if isinstance(f, syn.Icons):
        return {"k": "icons", "c": constraint_to_json(f.c)}
    if isinstance(f, syn.AndA):
        return {"k": "and", "l": assertion_to_json(f.lhs), "r": assertion_to_json(f.rhs)}
    if isinstance(f, syn.OrA):
        return {"k": "or", "l": assertion_to_json(f.lhs), "r": assertion_to_json(f.rhs)}
    if isinstance(f, syn.ImpliesA):
        return {"k": "implies", "l": assertion_to_json(f.lhs), "r": assertion_to_json(f.rhs)}
    if isinstance(f, (syn.ForAllCalls, syn.ExistsCall)):
        return {
            "k": "forall" if isinstance(f, syn.ForAllCalls) else "existscall",
            "pred": f.pred,
            "params": list(f.params),
            "b": assertion_to_json(f.body),
        }
    raise TypeError(f"not an assertion: {f!r}")


def assertion_from_json(d):
    k = d["k"]
    if k in ("pos", "neg", "cons", "icons"):
        cls = {"pos": syn.Pos, "neg": syn.Neg, "cons": syn.Cons, "icons": syn.Icons}[k]
        return cls(constraint_from_json(d["c"]))
    if k in ("and", "or", "implies"):
        cls = {"and": syn.AndA, "or": syn.OrA, "implies": syn.ImpliesA}[k]
        return cls(assertion_from_json(d["l"]), assertion_from_json(d["r"]))
    if k in ("forall", "existscall"):
        cls = syn.ForAllCalls if k == "forall" else syn.ExistsCall
        return cls(d["pred"], tuple(d["params"]), assertion_from_json(d["b"]))
    raise DocumentError(f"bad assertion encoding: {d!r}")


def process_to_json(p):
    if isinstance(p, syn.Skip):
        return {"k": "skip"}
    if isinstance(p, syn.Tell):
        return {"k": "tell", "c": constraint_to_json(p.c)}
    if isinstance(p, syn.Sum):
        return {
            "k": "sum",
            "b": [
                {"g": constraint_to_json(g), "p": process_to_json(b)}
                for g, b in p.branches
            ],
        }
    if isinstance(p, syn.Par):
        return {"k": "par", "p": [process_to_json(q) for q in p.parts]}
    if isinstance(p, syn.Local):
        return {"k": "local", "x": p.var, "p": process_to_json(p.body)}
    if isinstance(p, syn.Call):
        return {"k": "call", "f": p.name, "a": [term_to_json(a) for a in p.args]}
    if isinstance(p, syn.ConstraintLit):
        return {"k": "clit", "c": constraint_to_json(p.c)}
    if isinstance(p, syn.CallLit):
        return {"k": "alit", "f": p.name, "a": [term_to_json(a) for a in p.args]}
    if isinstance(p, syn.AssertProbe):
        return {"k": "probe", "kind": p.kind, "f": assertion_to_json(p.formula)}
    raise TypeError(f"not serializable as an agent: {p!r}")


def process_from_json(d):
    k = d["k"]
    if k == "skip":
        return syn.SKIP
    if k == "tell":
        return syn.Tell(constraint_from_json(d["c"]))
    if k == "sum":
        return syn.Sum(
            tuple(
                (constraint_from_json(b["g"]), process_from_json(b["p"]))
                for b in d["b"]
            )
        )
    if k == "par":
        return syn.Par(tuple(process_from_json(q) for q in d["p"]))
    if k == "local":
        return syn.Local(d["x"], process_from_json(d["p"]))
    if k == "call":
        return syn.Call(d["f"], tuple(term_from_json(a) for a in d["a"]))
    if k == "clit":
        return syn.ConstraintLit(constraint_from_json(d["c"]))
    if k == "alit":
        return syn.CallLit(d["f"], tuple(term_from_json(a) for a in d["a"]))
    if k == "probe":
        return syn.AssertProbe(d["kind"], assertion_from_json(d["f"]))
    raise DocumentError(f"bad agent encoding: {d!r}")


def frag_to_json(frag: Frag):
    if isinstance(frag, FKeep):
        return {"k": "keep", "p": process_to_json(frag.agent)}
    if isinstance(frag, FDot):
        return {"k": "dot"}
    if isinstance(frag, FTell):
        return {
            "k": "stell",
            "items": [
                None if item is None else {"cid": item[0], "c": constraint_to_json(item[1])}
                for item in frag.items
            ],
            "ex": list(frag.ex_vars),
        }
    if isinstance(frag, FSum):
        return {
            "k": "ssum",
            "n": frag.n_branches,
            "chosen": frag.k,
            "g": constraint_to_json(frag.guard),
            "body": [{"pid": pid, "f": frag_to_json(f)} for pid, f in frag.body],
        }
    if isinstance(frag, FLocal):
        return {
            "k": "slocal",
            "x": frag.var,
            "body": [{"pid": pid, "f": frag_to_json(f)} for pid, f in frag.body],
        }
    raise TypeError(f"not a fragment: {frag!r}")


def frag_from_json(d) -> Frag:
    k = d["k"]
    if k == "keep":
        return FKeep(process_from_json(d["p"]))
    if k == "dot":
        return DOT
    if k == "stell":
        return FTell(
            tuple(
                None
                if item is None
                else (item["cid"], constraint_from_json(item["c"]))
                for item in d["items"]
            ),
            tuple(d["ex"]),
        )
    if k == "ssum":
        return FSum(
            d["n"],
            d["chosen"],
            constraint_from_json(d["g"]),
            tuple((b["pid"], frag_from_json(b["f"])) for b in d["body"]),
        )
    if k == "slocal":
        return FLocal(
            d["x"], tuple((b["pid"], frag_from_json(b["f"])) for b in d["body"])
        )
    raise DocumentError(f"bad fragment encoding: {d!r}")


# --- trace documents ---------------------------------------------------------


def _label_json(label: TransitionLabel, index: int):
    return {
        "from": index,
        "to": index + 1,
        "pid": label.pid,
        "branch": label.branch,
        "children": list(label.children),
        "addedCids": list(label.added_cids),
        "newHidden": list(label.new_hidden),
    }


def _label_from_json(d) -> TransitionLabel:
    return TransitionLabel(
        d["pid"],
        d["branch"],
        tuple(d["children"]),
        tuple(d["addedCids"]),
        tuple(d["newHidden"]),
    )


def _agent_kind(agent) -> str:
    if isinstance(agent, syn.Tell):
        return "tell"
    if isinstance(agent, syn.Sum):
        return "ask"
    if isinstance(agent, syn.Local):
        return "local"
    if isinstance(agent, syn.Call):
        return "call"
    if isinstance(agent, syn.ConstraintLit):
        return "constraint"
    if isinstance(agent, syn.CallLit):
        return "atom"
    return "skip"


def trace_to_doc(trace: Trace, meta: Optional[dict] = None) -> dict:
    children_of: dict[int, list[int]] = {}
    for label in trace.labels:
        children_of[label.pid] = list(label.children)
    # along a trace a pid denotes one agent and a cid one atom, and stores
    # only grow, so entries are built once and shared across configurations
    agent_entry: dict[int, dict] = {}
    atom_entry: dict[int, dict] = {}
    configs = []
    for idx, config in enumerate(trace.configs):
        agents = []
        for pid, agent in config.agents:
            entry = agent_entry.get(pid)
            if entry is None:
                entry = agent_entry[pid] = {
                    "pid": pid,
                    "kind": _agent_kind(agent),
                    "printedForm": print_agent(agent),
                    "childPids": children_of.get(pid, []),
                    "ast": process_to_json(agent),
                }
            agents.append(entry)
        store = []
        for cid, atom in config.store.atoms:
            entry = atom_entry.get(cid)
            if entry is None:
                entry = atom_entry[cid] = {
                    "cid": cid,
                    "printedForm": print_constraint(atom),
                    "ast": constraint_to_json(atom),
                }
            store.append(entry)
        configs.append(
            {
                "id": idx,
                "hiddenVars": sorted(config.hidden),
                "agents": agents,
                "store": store,
                "storeStatus": config.store.status,
            }
        )
    doc = {
        "version": SCHEMA_VERSION,
        "kind": "trace",
        "mode": trace.mode,
        "meta": dict(meta or trace.meta),
        "configs": configs,
        "labels": [_label_json(l, i) for i, l in enumerate(trace.labels)],
        "verdict": trace.verdict,
        "answer": _answer_json(trace.answer),
    }
    if trace.violation is not None:
        from .syntax import print_assertion

        doc["violation"] = {
            "index": trace.violation.index,
            "kind": trace.violation.kind,
            "assertion": print_assertion(trace.violation.formula),
        }
    return doc


def _answer_json(answer: Optional[Store]):
    if answer is None:
        return None
    from .terms import deep_walk, print_term

    bindings = {}
    for name in sorted(answer.free_vars()):
        value = deep_walk(Var(name), answer.subst)
        bindings[name] = print_term(value)
    return {"printedForm": answer.print_atoms(), "bindings": bindings}


def sliced_to_doc(sliced: SlicedTrace, meta: Optional[dict] = None) -> dict:
    configs = []
    for idx, view in enumerate(sliced.views):
        agents = []
        for pid, frag in view.agents:
            entry = {
                "pid": pid,
                "kind": "sliced" if not isinstance(frag, FKeep) else _agent_kind(frag.agent),
                "printedForm": render_frag(frag),
                "dot": isinstance(frag, FDot),
                "origin": pid,
                "ast": frag_to_json(frag),
            }
            agents.append(entry)
        store = [
            {
                "cid": cid,
                "printedForm": print_constraint(atom),
                "origin": cid,
                "ast": constraint_to_json(atom),
            }
            for cid, atom in view.atoms
        ]
        configs.append(
            {
                "id": idx,
                "hiddenVars": sorted(view.hidden),
                "agents": agents,
                "store": store,
                "storeStatus": view.store_status,
            }
        )
    return {
        "version": SCHEMA_VERSION,
        "kind": "trace",
        "sliced": True,
        "mode": sliced.mode,
        "meta": dict(meta or sliced.meta),
        "configs": configs,
        "labels": [_label_json(l, i) for i, l in enumerate(sliced.labels)],
        "verdict": sliced.verdict,
        "answer": None,
        "marking": {
            "cids": sorted(sliced.marking.cids),
            "pids": sorted(sliced.marking.pids),
        },
        "overApproximated": sliced.over_approximated,
    }


def trace_from_doc(doc: dict, solver: Optional[SolverConfig] = None) -> Trace:
    """Rebuild a runnable/sliceable trace from a stored document.

    Stores are reconstructed incrementally: along a trace the atom set
    only grows, so each configuration's store extends the previous one.
    """
    _check_version(doc)
    if doc.get("sliced"):
        raise DocumentError("cannot rebuild an engine trace from a sliced document")
    solver = solver or SolverConfig()
    configs: list[Configuration] = []
    store = Store.empty(solver)
    seen: dict[int, Atom] = {}
    for cdoc in doc["configs"]:
        hidden = frozenset(cdoc["hiddenVars"])
        for entry in cdoc["store"]:
            cid = entry["cid"]
            if cid not in seen:
                atom = constraint_from_json(entry["ast"])
                seen[cid] = atom
                store = store.add(atom, cid)
        store = replace(store, hidden=hidden)
        agents = tuple(
            (a["pid"], process_from_json(a["ast"])) for a in cdoc["agents"]
        )
        configs.append(Configuration(agents, store))
    labels = [_label_from_json(l) for l in doc["labels"]]
    trace = Trace(
        doc["mode"], configs, labels, verdict=doc["verdict"], meta=dict(doc.get("meta", {}))
    )
    return trace


def sliced_from_doc(doc: dict) -> SlicedTrace:
    _check_version(doc)
    if not doc.get("sliced"):
        raise DocumentError("not a sliced trace document")
    views = []
    for cdoc in doc["configs"]:
        views.append(
            ConfigView(
                hidden=frozenset(cdoc["hiddenVars"]),
                agents=tuple(
                    (a["pid"], frag_from_json(a["ast"])) for a in cdoc["agents"]
                ),
                atoms=tuple(
                    (e["cid"], constraint_from_json(e["ast"])) for e in cdoc["store"]
                ),
                store_status=cdoc["storeStatus"],
            )
        )
    marking = Marking(
        frozenset(doc["marking"]["cids"]), frozenset(doc["marking"]["pids"])
    )
    return SlicedTrace(
        mode=doc["mode"],
        views=views,
        labels=[_label_from_json(l) for l in doc["labels"]],
        marking=marking,
        verdict=doc["verdict"],
        over_approximated=doc.get("overApproximated", False),
        meta=dict(doc.get("meta", {})),
    )


def _check_version(doc: dict) -> None:
    got = doc.get("version")
    if got != SCHEMA_VERSION:
        raise DocumentError(
            f"unsupported trace document version {got!r} (expected {SCHEMA_VERSION})"
        )


# --- content-addressed trace directory ----------------------------------------


def canonical_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def doc_id(doc: dict) -> str:
    return hashlib.sha256(canonical_json(doc).encode()).hexdigest()[:16]


TRACE_DIR_ENV = "CLPSLICER_TRACE_DIR"


class TraceDir:
    """Content-hash indexed store of trace documents on disk."""

    def __init__(self, path: Union[str, Path, None] = None):
        base = path or os.environ.get(TRACE_DIR_ENV) or "traces"
        self.path = Path(base)

    def save(self, doc: dict) -> str:
        self.path.mkdir(parents=True, exist_ok=True)
        ident = doc_id(doc)
        target = self.path / f"{ident}.json"
        if not target.exists():
            target.write_text(canonical_json(doc))
        return ident

    def load(self, ident: str) -> dict:
        target = self.path / f"{ident}.json"
        if not target.exists():
            raise KeyError(ident)
        return json.loads(target.read_text())

    def ids(self) -> list[str]:
        if not self.path.is_dir():
            return []
        return sorted(p.stem for p in self.path.glob("*.json"))
