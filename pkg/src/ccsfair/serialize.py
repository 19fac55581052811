"""JSON, DOT and text renderings of graphs, paths and verdicts.

Markings are written as sorted lists of grape strings; every list that
could come out in different orders is sorted, so equal inputs give
byte-identical output.
"""
from __future__ import annotations

import json
from typing import Any

from .lts import LtsGraph
from .net import Marking, NetTransition, fire, net_of, reachable_markings
from .paths import AnyPath, Lasso, LtsLasso, LtsPath, NetPath, replay
from .syntax import Spec, pretty
from .verdict import Verdict

DOT_LABEL_MAX = 60


class ReplayError(ValueError):
    pass


def marking_json(m: Marking) -> list[str]:
    return m.strings()


def transition_json(u: NetTransition) -> dict:
    return {"label": str(u.label), "pre": u.pre.strings(), "post": u.post.strings()}


def transition_text(u: NetTransition) -> str:
    return f"{str(u.label)}:{{{', '.join(u.pre.strings())}}}→{{{', '.join(u.post.strings())}}}"


def _clip(s: str, n: int = DOT_LABEL_MAX) -> str:
    return s if len(s) <= n else s[: n - 3] + "..."


def _dot_str(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


# --------------------------------------------------------------------------
# paths


def path_json(path: AnyPath) -> dict:
    if isinstance(path, Lasso):
        return {
            "kind": "lasso",
            "start": marking_json(path.start),
            "prefix": [transition_json(u) for u in path.prefix.transitions],
            "cycle": [transition_json(u) for u in path.cycle],
        }
    return {
        "kind": "finite",
        "start": marking_json(path.start),
        "prefix": [transition_json(u) for u in path.transitions],
        "cycle": [],
    }


def lts_path_json(path: LtsPath | LtsLasso) -> dict:
    def steps(ss):
        return [{"label": str(a), "target": pretty(q)} for a, q in ss]

    if isinstance(path, LtsLasso):
        return {"kind": "lasso", "start": pretty(path.prefix.start),
                "prefix": steps(path.prefix.steps), "cycle": steps(path.cycle)}
    return {"kind": "finite", "start": pretty(path.start), "prefix": steps(path.steps), "cycle": []}


def path_text(path: AnyPath) -> str:
    if isinstance(path, Lasso):
        pre = " ".join(str(a) for a in path.prefix_labels)
        cyc = " ".join(str(a) for a in path.cycle_labels)
        return f"{pre} ({cyc})^omega".strip()
    return " ".join(str(a) for a in path.labels) or "(empty path)"


def _match(spec: Spec, m: Marking, item: dict) -> NetTransition:
    for u in net_of(spec).enabled(m):
        if transition_json(u) == {"label": item["label"], "pre": sorted(item["pre"]), "post": sorted(item["post"])}:
            return u
    raise ReplayError(f"no enabled transition matches {item['label']}:{item['pre']}->{item['post']}")


def path_from_json(spec: Spec, data: dict) -> AnyPath:
    """Rebuild a path by matching each serialized step against the derived transitions."""
    net = net_of(spec)
    if sorted(data.get("start", [])) != net.initial.strings():
        raise ReplayError("path does not start at dec(main)")
    m = net.initial
    seq = []
    for item in list(data.get("prefix", [])) + list(data.get("cycle", [])):
        u = _match(spec, m, item)
        seq.append(u)
        m = fire(m, u)
    p = len(data.get("prefix", []))
    if data.get("kind") == "lasso":
        if not data.get("cycle"):
            raise ReplayError("a lasso needs a nonempty cycle")
        try:
            return Lasso(NetPath(net, net.initial, tuple(seq[:p])), tuple(seq[p:]))
        except ValueError as exc:
            raise ReplayError(str(exc)) from None
    return NetPath(net, net.initial, tuple(seq))


def checked_path_json(path: AnyPath) -> dict:
    """Serialize a witness after replaying it, and check the JSON round trip."""
    if not replay(path):
        raise ReplayError("witness does not replay")
    data = path_json(path)
    spec = path.net.spec
    if path_json(path_from_json(spec, data)) != data:
        raise ReplayError("witness does not survive a JSON round trip")
    return data


# --------------------------------------------------------------------------
# LTS and net


def lts_json(g: LtsGraph) -> dict:
    return {
        "initial": pretty(g.initial),
        "states": [pretty(s) for s in g.states],
        "transitions": [{"source": pretty(t.source), "label": str(t.label), "target": pretty(t.target)}
                        for t in g.transitions],
        "truncated": g.truncated,
    }


def lts_dot(g: LtsGraph) -> str:
    index = {s: i for i, s in enumerate(g.states)}
    lines = ["digraph lts {", "  rankdir=LR;", "  node [shape=ellipse];"]
    for s, i in index.items():
        shape = ", peripheries=2" if s == g.initial else ""
        lines.append(f"  s{i} [label={_dot_str(_clip(pretty(s)))}{shape}];")
    for t in g.transitions:
        lines.append(f"  s{index[t.source]} -> s{index[t.target]} [label={_dot_str(str(t.label))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def lts_text(g: LtsGraph) -> str:
    lines = [f"{len(g.states)} states, {len(g.transitions)} transitions"
             + (" (truncated)" if g.truncated else "")]
    lines += [f"{pretty(t.source)} --{t.label}--> {pretty(t.target)}" for t in g.transitions]
    return "\n".join(lines) + "\n"


def net_graph(spec: Spec, bound: int) -> dict:
    """Reachable markings and the derived transitions between them."""
    net = net_of(spec)
    order, _, truncated = reachable_markings(spec, bound)
    index = {m: i for i, m in enumerate(order)}
    trans: dict[tuple, NetTransition] = {}
    edges = []
    for m in order:
        for u in net.enabled(m):
            trans.setdefault(u.key, u)
            m2 = fire(m, u)
            if m2 in index:
                edges.append((index[m], u.key, index[m2]))
    keys = sorted(trans)
    tindex = {k: i for i, k in enumerate(keys)}
    return {
        "markings": order,
        "transitions": [trans[k] for k in keys],
        "edges": [(a, tindex[k], b) for a, k, b in edges],
        "truncated": truncated,
    }


def net_json(spec: Spec, bound: int) -> dict:
    g = net_graph(spec, bound)
    return {
        "initial": marking_json(g["markings"][0]),
        "markings": [marking_json(m) for m in g["markings"]],
        "transitions": [transition_json(u) for u in g["transitions"]],
        "firings": [{"from": a, "transition": t, "to": b} for a, t, b in g["edges"]],
        "truncated": g["truncated"],
    }


def net_dot(spec: Spec, bound: int) -> str:
    """Reachability graph of the net; edges carry ``label:pre→post``, clipped."""
    g = net_graph(spec, bound)
    lines = ["digraph net {", "  rankdir=LR;", "  node [shape=box];"]
    for i, m in enumerate(g["markings"]):
        shape = ", peripheries=2" if i == 0 else ""
        lines.append(f"  m{i} [label={_dot_str(_clip(repr(m)))}{shape}];")
    for a, t, b in g["edges"]:
        lines.append(f"  m{a} -> m{b} [label={_dot_str(_clip(transition_text(g['transitions'][t])))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def net_text(spec: Spec, bound: int) -> str:
    g = net_graph(spec, bound)
    lines = [f"{len(g['markings'])} markings, {len(g['transitions'])} transitions"
             + (" (truncated)" if g["truncated"] else "")]
    lines += [f"M{i} = {m!r}" for i, m in enumerate(g["markings"])]
    lines += [f"M{a} --{transition_text(g['transitions'][t])}--> M{b}" for a, t, b in g["edges"]]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# verdicts


def verdict_json(v: Verdict) -> dict:
    out: dict[str, Any] = {"status": v.status, "ok": v.ok, "explored": v.explored, "truncated": v.truncated}
    if v.detail:
        out["detail"] = v.detail
    if isinstance(v.witness, (NetPath, Lasso)):
        out["witness"] = checked_path_json(v.witness)
        out["witness_labels"] = path_text(v.witness)
    elif v.witness is not None:
        out["witness"] = str(v.witness)
    return out


def dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


__all__ = [
    "ReplayError", "checked_path_json", "dumps", "lts_dot", "lts_json", "lts_path_json", "lts_text",
    "marking_json", "net_dot", "net_graph", "net_json", "net_text", "path_from_json", "path_json",
    "path_text", "transition_json", "transition_text", "verdict_json",
]
