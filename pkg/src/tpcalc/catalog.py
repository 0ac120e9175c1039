"""Curated group catalog, the builder-expression grammar, batch scanning with
theorem checks, and the line-delimited results cache.

Builder expressions are a tiny prefix grammar, one entry per catalog line as
`id <tab> expression`. Examples:

    dihedral 7
    sdp (cyclic 3) (cyclic 4) invert
    dp (dihedral 3) (cyclic 5)
    perm 8 gens.txt

Scans process entries concurrently up to a --jobs limit and reduce to a report
ordered by entry id, so two runs on the same catalog are byte-identical apart
from the millis fields.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from . import __version__, presets
from .errors import FormatError, ParameterError, SizeLimitError, TpcalcError
from .group_core import (
    GroupTable,
    all_subgroups,
    subgroup_conjugacy_classes,
    cp_rtimes_c2n,
    cyclic,
    dihedral,
    direct_product,
    elementary_abelian,
    field_frobenius,
    from_permutation_generators,
    generalized_quaternion,
    read_cayley_table,
    read_permutation_generators,
    semidirect_product,
    action_by_inversion,
    action_by_generator_power,
)
from .transversal import bounds_report
from .tp_engine import (
    TheoremVerdict,
    TpResult,
    classify_special_values,
    direct_extension_check,
    explore_cyclic_witness,
    explore_tp_vs_commuting,
    semidirect_extension_check,
    tp,
    verify_graph_invariants,
    verify_monotonicity,
    verify_structure_theorems,
)

DEFAULT_ORDER_CAP = 256


# ---------------------------------------------------------------------------
# Builder expressions
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def _tokenize(expr: str) -> list[str]:
    return _TOKEN.findall(expr)


class _Parser:
    def __init__(self, tokens: list[str], base_dir: Path):
        self.tokens = tokens
        self.pos = 0
        self.base_dir = base_dir

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise FormatError("unexpected end of builder expression")
        self.pos += 1
        return tok

    def take_int(self) -> int:
        tok = self.take()
        try:
            return int(tok)
        except ValueError as exc:
            raise FormatError(f"expected an integer, got {tok!r}") from exc

    def group_arg(self) -> GroupTable:
        tok = self.take()
        if tok != "(":
            raise FormatError(f"expected '(', got {tok!r}")
        G = self.expression()
        closing = self.take()
        if closing != ")":
            raise FormatError(f"expected ')', got {closing!r}")
        return G

    def expression(self) -> GroupTable:
        name = self.take()
        if name == "cyclic":
            return cyclic(self.take_int())
        if name == "dihedral":
            return dihedral(self.take_int())
        if name == "quaternion":
            return generalized_quaternion(self.take_int())
        if name == "cpc2":
            return cp_rtimes_c2n(self.take_int(), self.take_int())
        if name == "frobfield":
            return field_frobenius(self.take_int())
        if name == "elemab":
            return elementary_abelian(self.take_int(), self.take_int())
        if name == "dp":
            return direct_product(self.group_arg(), self.group_arg())
        if name == "sdp":
            G = self.group_arg()
            K = self.group_arg()
            return semidirect_product(G, K, self.action_arg(G, K))
        if name == "perm":
            degree = self.take_int()
            path = self.base_dir / self.take()
            file_degree, gens = read_permutation_generators(path.read_text())
            if file_degree != degree:
                raise FormatError(f"declared degree {degree} != file degree {file_degree}")
            return from_permutation_generators(degree, gens)
        if name == "table":
            path = self.base_dir / self.take()
            return read_cayley_table(path.read_text())
        if name in _NAMED:
            return _NAMED[name]()
        raise FormatError(f"unknown builder {name!r}")

    def action_arg(self, G: GroupTable, K: GroupTable):
        name = self.take()
        if name == "invert":
            return action_by_inversion(G, K)
        if name == "pow":
            return action_by_generator_power(G, K, self.take_int())
        if name == "swap":
            return presets.plane_swap_action(_plane_prime(G), K)
        if name == "qturn":
            return presets.plane_quarter_turn_action(_plane_prime(G), K)
        raise FormatError(f"unknown action {name!r}")


_NAMED: dict[str, Callable[[], GroupTable]] = {
    "a4": presets.alternating_4,
    "a5": presets.alternating_5,
    "s4": presets.symmetric_4,
    "sl2_3": presets.sl2_3,
    "psl3_2": presets.psl3_2,
    "c4_circ_d4": presets.c4_circ_d4,
}


def _plane_prime(G: GroupTable) -> int:
    p = round(G.order ** 0.5)
    if p * p != G.order:
        raise FormatError("plane actions need a rank-2 elementary abelian base")
    return p


def build_group(expr: str, base_dir: Path | str = ".") -> GroupTable:
    parser = _Parser(_tokenize(expr), Path(base_dir))
    G = parser.expression()
    if parser.peek() is not None:
        raise FormatError(f"trailing tokens in builder expression: {parser.tokens[parser.pos:]}")
    return G


# ---------------------------------------------------------------------------
# Catalog entries
# ---------------------------------------------------------------------------

@dataclass
class CatalogEntry:
    id: str
    builder: str
    expected: dict = field(default_factory=dict)
    base_dir: Path = Path(".")
    _group: GroupTable | None = field(default=None, repr=False)

    def group(self) -> GroupTable:
        """Build on first use; the expected order is validated immediately."""
        if self._group is None:
            try:
                G = build_group(self.builder, self.base_dir)
            except TpcalcError as exc:
                raise FormatError(f"entry {self.id!r}: builder failed: {exc}") from exc
            want = self.expected.get("order")
            if want is not None and G.order != want:
                raise FormatError(
                    f"entry {self.id!r}: built order {G.order}, expected {want}")
            self._group = G
        return self._group


def _dihedral_expected(n: int) -> str:
    exp = (n - 1) // 2 if n % 2 else (n - 2) // 2
    return str(Fraction(1, 2**exp))


def builtin_catalog() -> list[CatalogEntry]:
    """Every group named by the verification targets plus small abelian stock."""
    rows: list[tuple[str, str, dict]] = []
    known = "known-values"
    for name, order in (("c1", 1), ("c2", 2), ("c3", 3), ("c4", 4), ("c6", 6),
                        ("c8", 8), ("c12", 12)):
        rows.append((name, f"cyclic {order}", {"order": order, "tp": "1", "tag": "abelian"}))
    rows += [
        ("c2sq", "elemab 2 2", {"order": 4, "tp": "1", "tag": "abelian"}),
        ("c2cube", "elemab 2 3", {"order": 8, "tp": "1", "tag": "abelian"}),
        ("c3sq", "elemab 3 2", {"order": 9, "tp": "1", "tag": "abelian"}),
        ("c2_x_c4", "dp (cyclic 2) (cyclic 4)", {"order": 8, "tp": "1", "tag": "abelian"}),
        ("q8", "quaternion 8", {"order": 8, "tp": "1", "tag": "dedekind"}),
        ("q16", "quaternion 16", {"order": 16, "tp": "1/2", "tag": known}),
        ("c4_sdp_c4", "sdp (cyclic 4) (cyclic 4) invert",
         {"order": 16, "tp": "1/2", "tag": known}),
    ]
    for p, exp_val in ((3, "1/2"), (5, "1/4"), (7, "1/8")):
        for k in (1, 2, 3):
            rows.append((f"c{p}_c{2**k}", f"cpc2 {p} {k}",
                         {"order": p * 2**k, "tp": exp_val, "tag": known}))
    for n in range(3, 13):
        rows.append((f"d{n}", f"dihedral {n}",
                     {"order": 2 * n, "tp": _dihedral_expected(n), "tag": known}))
    rows += [
        ("a4", "a4", {"order": 12, "tp": "2/9", "tag": known}),
        ("a5", "a5", {"order": 60, "tp": str(Fraction(1, 2**14)), "tag": known}),
        ("psl3_2", "psl3_2", {"order": 168, "tp": str(Fraction(1, 2**40)), "tag": known}),
        ("sl2_3", "sl2_3", {"order": 24, "tp": "4/81", "tag": known}),
        ("c2cube_c7", "frobfield 8", {"order": 56, "tp": str(Fraction(1, 2**12)), "tag": known}),
        ("c3sq_c4", "sdp (elemab 3 2) (cyclic 4) qturn",
         {"order": 36, "tp": str(Fraction(1, 2**8)), "tag": known}),
        ("c7_c3", "sdp (cyclic 7) (cyclic 3) pow 2",
         {"order": 21, "tp": "4/81", "tag": "nilpotency-sharp"}),
        ("s3_x_c5", "dp (dihedral 3) (cyclic 5)",
         {"order": 30, "tp": "1/32", "tag": "extension-sharp"}),
        ("s4", "s4", {"order": 24}),
        ("frob12", "frobfield 4", {"order": 12, "tp": "2/9", "tag": "frobenius"}),
        ("frob20", "frobfield 5", {"order": 20}),
        ("frob42", "frobfield 7", {"order": 42}),
        ("frob72", "frobfield 9", {"order": 72}),
        ("m4_2", "sdp (cyclic 8) (cyclic 2) pow 5",
         {"order": 16, "tp": "1/4", "tag": "quarter-family"}),
        ("c4_circ_d4", "c4_circ_d4", {"order": 16, "tp": "1/4", "tag": "quarter-family"}),
        ("c2_x_d4", "dp (cyclic 2) (dihedral 4)",
         {"order": 16, "tp": "1/4", "tag": "quarter-family"}),
        ("c2sq_c4", "sdp (elemab 2 2) (cyclic 4) swap",
         {"order": 16, "tp": "1/4", "tag": "quarter-family"}),
        # nontrivial cyclic cores: the quotient by the centre of the 2-part
        # lands on the order-12 reference group
        ("c6_c4", "sdp (cyclic 6) (cyclic 4) invert",
         {"order": 24, "tp": "1/4", "tag": "quarter-family"}),
        ("c6_c8", "sdp (cyclic 6) (cyclic 8) invert",
         {"order": 48, "tp": "1/4", "tag": "quarter-family"}),
    ]
    entries = [CatalogEntry(id=i, builder=b, expected=e) for i, b, e in rows]
    _ensure_unique_ids(entries, source="builtin")
    return entries


def _ensure_unique_ids(entries: Sequence[CatalogEntry], source: str) -> None:
    seen = {}
    for k, e in enumerate(entries, start=1):
        if e.id in seen:
            raise FormatError(f"{source}: duplicate id {e.id!r} (lines {seen[e.id]} and {k})")
        seen[e.id] = k


def parse_catalog_file(path: Path | str) -> list[CatalogEntry]:
    path = Path(path)
    entries = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.rstrip()
        if not line or line.lstrip().startswith("#"):
            continue
        if "\t" not in line:
            raise FormatError(f"{path}:{lineno}: expected 'id<TAB>builder-expression'")
        ident, builder = line.split("\t", 1)
        ident, builder = ident.strip(), builder.strip()
        if not ident or not builder:
            raise FormatError(f"{path}:{lineno}: empty id or builder")
        entries.append(CatalogEntry(id=ident, builder=builder, base_dir=path.parent))
    seen: dict[str, int] = {}
    for lineno, e in enumerate(entries, start=1):
        if e.id in seen:
            raise FormatError(f"{path}: duplicate id {e.id!r}")
        seen[e.id] = lineno
    return entries


def catalog_build(source: str | Path | None = None) -> list[CatalogEntry]:
    if source in (None, "builtin"):
        return builtin_catalog()
    return parse_catalog_file(source)


def catalog_hash(entries: Sequence[CatalogEntry]) -> str:
    payload = json.dumps(
        [[e.id, e.builder, e.expected] for e in
         sorted(entries, key=lambda e: e.id)],
        sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()


# ---------------------------------------------------------------------------
# Checks registry
# ---------------------------------------------------------------------------

def _structure_check(which: str):
    def run(entry: CatalogEntry, G: GroupTable) -> list[TheoremVerdict]:
        return [v for v in verify_structure_theorems(G, entry.id) if v.theorem == which]
    return run


def _classification_check(which: str):
    def run(entry: CatalogEntry, G: GroupTable) -> list[TheoremVerdict]:
        return [v for v in classify_special_values(G, entry.id) if v.theorem == which]
    return run


def _expected_values_check(entry: CatalogEntry, G: GroupTable) -> list[TheoremVerdict]:
    want = entry.expected.get("tp")
    result = tp(G, entry.id)
    if want is None:
        return [TheoremVerdict("expected-values", entry.id, False, True,
                               details={"tp": str(result.tp)})]
    ok = result.tp == Fraction(want)
    return [TheoremVerdict("expected-values", entry.id, True, ok,
                           details={"tp": str(result.tp), "expected": want,
                                    "tag": entry.expected.get("tag")})]


def _monotonicity_check(entry: CatalogEntry, G: GroupTable) -> list[TheoremVerdict]:
    return verify_monotonicity(G, entry.id)


def _graph_check(entry: CatalogEntry, G: GroupTable) -> list[TheoremVerdict]:
    return [verify_graph_invariants(G, entry.id)]


def _bounds_check(entry: CatalogEntry, G: GroupTable) -> list[TheoremVerdict]:
    ok = True
    rows = []
    for cls in subgroup_conjugacy_classes(G, all_subgroups(G)):
        rep = cls[0]
        if len(cls) == 1:
            continue  # normal: the sharp-window clauses are out of scope
        rpt = bounds_report(G, rep)
        rows.append((rep.order, str(rpt.p_exact), rpt.all_hold))
        ok = ok and rpt.all_hold
    return [TheoremVerdict("bounds-suite", entry.id, True, ok,
                           details={"subgroups": rows})]


def _extension_check(entry: CatalogEntry, G: GroupTable) -> list[TheoremVerdict]:
    tokens = _tokenize(entry.builder)
    if tokens and tokens[0] == "cpc2":
        # the dihedral-like family is itself a split extension
        p, k = int(tokens[1]), int(tokens[2])
        base, top = cyclic(p), cyclic(2**k)
        verdict = semidirect_extension_check(
            base, top, action_by_inversion(base, top), entry.id)
        return [TheoremVerdict("extension-bound", entry.id, True,
                               verdict.conclusion_holds, details=verdict.details)]
    if not tokens or tokens[0] not in ("dp", "sdp"):
        return [TheoremVerdict("extension-bound", entry.id, False, True,
                               details={"note": "not a product builder"})]
    parser = _Parser(tokens, entry.base_dir)
    head = parser.take()
    if head == "dp":
        A = parser.group_arg()
        B = parser.group_arg()
        verdict = direct_extension_check([A, B], entry.id)
    else:
        A = parser.group_arg()
        K = parser.group_arg()
        action = parser.action_arg(A, K)
        verdict = semidirect_extension_check(A, K, action, entry.id)
    return [TheoremVerdict("extension-bound", entry.id, verdict.hypothesis_holds,
                           verdict.conclusion_holds, details=verdict.details)]


CHECKS: dict[str, Callable[[CatalogEntry, GroupTable], list[TheoremVerdict]]] = {
    "expected-values": _expected_values_check,
    "monotonicity": _monotonicity_check,
    "solubility-criterion": _structure_check("solubility-criterion"),
    "supersolubility": _structure_check("supersolubility"),
    "nilpotency": _structure_check("nilpotency"),
    "derived-length": _structure_check("derived-length"),
    "non-abelian-odd": _structure_check("non-abelian-odd"),
    "tp-half-classification": _classification_check("tp-half-classification"),
    "tp-quarter-classification": _classification_check("tp-quarter-classification"),
    "pq-exclusion": _classification_check("pq-exclusion"),
    "prime-ratio-placement": _classification_check("prime-ratio-placement"),
    "prime-pair-tvector": _classification_check("prime-pair-tvector"),
    "graph-invariants": _graph_check,
    "bounds-suite": _bounds_check,
    "extension-bound": _extension_check,
    # exploratory, excluded from "all": conjecture scans
    "tp-vs-cp": lambda e, G: [explore_tp_vs_commuting(G, e.id)],
    "cyclic-witness": lambda e, G: [explore_cyclic_witness(G, e.id)],
}

EXPLORATORY_CHECKS = ("tp-vs-cp", "cyclic-witness")

DEFAULT_CHECKS = tuple(c for c in CHECKS if c not in EXPLORATORY_CHECKS)


def resolve_checks(names: Sequence[str] | None) -> list[str]:
    if not names or list(names) == ["all"]:
        return list(DEFAULT_CHECKS)
    out = []
    for name in names:
        if name == "all":
            out += [c for c in DEFAULT_CHECKS if c not in out]
            continue
        if name not in CHECKS:
            raise ParameterError(f"unknown check {name!r}; known: {', '.join(CHECKS)}")
        if name not in out:
            out.append(name)
    return out


# ---------------------------------------------------------------------------
# Results cache
# ---------------------------------------------------------------------------

@dataclass
class ResultsCache:
    """Append-friendly line-delimited JSON cache of computed tp results,
    keyed by (catalog hash, group id). Stale or corrupt lines are skipped."""

    path: Path
    entries: dict[tuple[str, str], dict] = field(default_factory=dict)
    corrupt_lines: int = 0

    @classmethod
    def load(cls, path: Path | str) -> "ResultsCache":
        path = Path(path)
        cache = cls(path=path)
        if not path.exists():
            return cache
        for line in path.read_text().splitlines():
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                key = (row["catalog_hash"], row["group"])
                Fraction(int(row["tp"]["num"]), int(row["tp"]["den"]))
                cache.entries[key] = row
            except (KeyError, ValueError, TypeError, ZeroDivisionError):
                cache.corrupt_lines += 1
        return cache

    def get(self, cat_hash: str, group_id: str) -> TpResult | None:
        row = self.entries.get((cat_hash, group_id))
        if row is None:
            return None
        return TpResult(
            group_id=group_id,
            tp=Fraction(int(row["tp"]["num"]), int(row["tp"]["den"])),
            witnesses=tuple(tuple(int(x) for x in w) for w in row["witnesses"]),
            subgroup_count=int(row["subgroup_count"]),
        )

    def put(self, cat_hash: str, result: TpResult) -> None:
        row = {
            "catalog_hash": cat_hash,
            "group": result.group_id,
            "tp": {"num": str(result.tp.numerator), "den": str(result.tp.denominator)},
            "witnesses": [list(w) for w in result.witnesses],
            "subgroup_count": result.subgroup_count,
        }
        self.entries[(cat_hash, result.group_id)] = row

    def save(self) -> None:
        lines = [json.dumps(self.entries[k], sort_keys=True)
                 for k in sorted(self.entries)]
        self.path.write_text("\n".join(lines) + ("\n" if lines else ""))


# ---------------------------------------------------------------------------
# Scan driver
# ---------------------------------------------------------------------------

def rational_json(x: Fraction) -> dict:
    return {"num": str(x.numerator), "den": str(x.denominator)}


def _verdict_json(v: TheoremVerdict) -> dict:
    return {
        "theorem": v.theorem,
        "hypothesis_holds": v.hypothesis_holds,
        "conclusion_holds": v.conclusion_holds,
        "consistent": v.consistent,
        "details": _plain(v.details),
    }


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


def scan_entry(entry: CatalogEntry, checks: Sequence[str], cap_order: int,
               cache: ResultsCache | None, cat_hash: str) -> dict:
    started = time.perf_counter()
    row: dict = {"group": entry.id}
    try:
        G = entry.group()
    except TpcalcError as exc:
        row.update(error=str(exc), millis=_millis(started))
        return row
    row["order"] = G.order
    if G.order > cap_order:
        row.update(skipped=f"order {G.order} exceeds cap {cap_order}",
                   millis=_millis(started))
        return row
    cached = cache.get(cat_hash, entry.id) if cache is not None else None
    if cached is not None and G._tp_cache is None:
        G._tp_cache = dataclasses.replace(cached, group_id="")
    try:
        result = tp(G, entry.id)
        row["tp"] = rational_json(result.tp)
        row["witnesses"] = [list(w) for w in result.witnesses]
        row["subgroup_count"] = result.subgroup_count
        row["cache_hit"] = cached is not None
        verdicts: list[TheoremVerdict] = []
        for name in checks:
            verdicts += CHECKS[name](entry, G)
        row["verdicts"] = [_verdict_json(v) for v in verdicts]
        row["consistent"] = all(v.consistent for v in verdicts)
        if cache is not None and cached is None:
            cache.put(cat_hash, result)
    except SizeLimitError as exc:
        row.update(skipped=f"size limit: {exc}", millis=_millis(started))
        return row
    except TpcalcError as exc:
        # a failed internal cross-check is a reported failure, not a crash
        row.update(error=str(exc), millis=_millis(started))
        return row
    row["millis"] = _millis(started)
    return row


def _millis(started: float) -> int:
    return int((time.perf_counter() - started) * 1000)


def scan_and_report(entries: Sequence[CatalogEntry], checks: Sequence[str] | None = None,
                    out: Path | str | None = None, cap_order: int = DEFAULT_ORDER_CAP,
                    jobs: int = 1, cache: ResultsCache | None = None,
                    fmt: str = "json") -> tuple[dict, bool]:
    """Run the requested checks over the catalog; returns (report, ok)."""
    check_names = resolve_checks(checks)
    cat_hash = catalog_hash(entries)
    ordered = sorted(entries, key=lambda e: e.id)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(
                lambda e: scan_entry(e, check_names, cap_order, cache, cat_hash),
                ordered))
    else:
        rows = [scan_entry(e, check_names, cap_order, cache, cat_hash) for e in ordered]
    ok = all(r.get("consistent", True) and "error" not in r for r in rows)
    report = {
        "toolchain": {"python": sys.version.split()[0], "tpcalc": __version__},
        "catalog_hash": cat_hash,
        "checks": list(check_names),
        "entries": rows,
        "ok": ok,
    }
    if cache is not None:
        cache.save()
    if out is not None:
        out = Path(out)
        if fmt == "json":
            out.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        elif fmt == "csv":
            out.write_text(report_to_csv(report))
        else:
            raise ParameterError(f"unknown report format {fmt!r}")
    return report, ok


def report_to_csv(report: dict) -> str:
    lines = ["group,order,tp,subgroups,consistent,skipped,millis"]
    for row in report["entries"]:
        tp_str = ""
        if "tp" in row:
            tp_str = f"{row['tp']['num']}/{row['tp']['den']}"
        lines.append(",".join(str(x) for x in (
            row.get("group", ""), row.get("order", ""), tp_str,
            row.get("subgroup_count", ""), row.get("consistent", ""),
            (row.get("skipped") or row.get("error") or "").replace(",", ";"),
            row.get("millis", ""))))
    return "\n".join(lines) + "\n"
