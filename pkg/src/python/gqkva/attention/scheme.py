"""Grouping schemes: which query group and which key/value group each head uses.

A ``GroupingScheme`` fixes the number of distinct query projections (``g_q``),
the number of distinct key/value projection pairs (``g_kv``) and an explicit
pairing schedule mapping each of the ``h`` heads to a ``(q_index, kv_index)``.
Block-shared variants (GQA, GKVA) and the Cartesian family (GQKVA) are all
expressed through that one schedule.

Canonical scheme strings (case-insensitive)::

    mha | mqa | mkva | gqa-<g> | gkva-<g> | gqkva-<g_q>.<g_kv>
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Optional, Sequence

from ..errors import ConfigurationError, SchemeSyntaxError

SCHEME_GRAMMAR = "mha | mqa | mkva | gqa-<g> | gkva-<g> | gqkva-<g_q>.<g_kv>"

_SCHEME_RE = re.compile(
    r"^(?:(?P<simple>mha|mqa|mkva)"
    r"|(?P<grouped>gqa|gkva)-(?P<g>\d+)"
    r"|gqkva-(?P<g_q>\d+)\.(?P<g_kv>\d+))$"
)

# Row order of the published ViT-small comparison.
TABLE1_SCHEMES = (
    "mha",
    "gkva-3",
    "gkva-2",
    "mkva",
    "gqa-3",
    "gqa-2",
    "mqa",
    "gqkva-2.3",
    "gqkva-3.2",
)
BUNDLES = ("table1", "all")


class SchemeKind(str, Enum):
    MHA = "mha"
    MQA = "mqa"
    GQA = "gqa"
    MKVA = "mkva"
    GKVA = "gkva"
    GQKVA = "gqkva"


@dataclass(frozen=True)
class GroupingScheme:
    """A grouped-attention variant with its head pairing schedule.

    Construct through ``make_scheme`` or ``parse_scheme``; direct construction
    performs no checks so that malformed schemes can be fed to ``validate_scheme``.
    """

    kind: SchemeKind
    d: int
    h: int
    head_dim: int
    g_q: int
    g_kv: int
    pairing: tuple[tuple[int, int], ...]
    label: str

    @property
    def canonical(self) -> str:
        """Scheme string in the canonical lowercase grammar."""
        return self.label.lower()

    @property
    def qkv_width(self) -> int:
        """Output width of the qkv layer: ``(g_q + 2*g_kv) * head_dim``."""
        return (self.g_q + 2 * self.g_kv) * self.head_dim

    def __str__(self) -> str:
        return self.label


def _label(kind: SchemeKind, g_q: int, g_kv: int) -> str:
    if kind is SchemeKind.GQA:
        return f"GQA-{g_kv}"
    if kind is SchemeKind.GKVA:
        return f"GKVA-{g_q}"
    if kind is SchemeKind.GQKVA:
        return f"GQKVA-{g_q}.{g_kv}"
    return kind.value.upper()


def make_scheme(
    kind: SchemeKind | str,
    d: int,
    h: int,
    g_q: Optional[int] = None,
    g_kv: Optional[int] = None,
    g: Optional[int] = None,
) -> GroupingScheme:
    """Build a scheme and its pairing schedule.

    ``g`` is accepted as the group count for ``gqa`` (meaning ``g_kv``) and
    ``gkva`` (meaning ``g_q``).

    Raises:
        ConfigurationError: an unknown kind, or a divisibility or group-count
            constraint does not hold.
    """
    if not isinstance(kind, SchemeKind):
        try:
            kind = SchemeKind(str(kind).strip().lower())
        except ValueError as e:
            choices = ", ".join(k.value for k in SchemeKind)
            raise ConfigurationError(
                f"unknown scheme kind {kind!r}; expected one of {choices}"
            ) from e
    if d < 1 or h < 1:
        raise ConfigurationError(f"d and h must be positive, got d={d}, h={h}")
    if d % h:
        raise ConfigurationError(f"d mod h must be 0, got d={d}, h={h}")

    if kind is SchemeKind.MHA:
        g_q, g_kv = h, h
        pairing = [(i, i) for i in range(h)]
    elif kind is SchemeKind.MQA:
        g_q, g_kv = h, 1
        pairing = [(i, 0) for i in range(h)]
    elif kind is SchemeKind.MKVA:
        g_q, g_kv = 1, h
        pairing = [(0, j) for j in range(h)]
    elif kind is SchemeKind.GQA:
        groups = _group_count(kind, g if g is not None else g_kv, h)
        g_q, g_kv = h, groups
        pairing = [(i, i * groups // h) for i in range(h)]
    elif kind is SchemeKind.GKVA:
        groups = _group_count(kind, g if g is not None else g_q, h)
        g_q, g_kv = groups, h
        pairing = [(j * groups // h, j) for j in range(h)]
    else:
        if g_q is None or g_kv is None:
            raise ConfigurationError("gqkva needs both g_q and g_kv")
        if g_q < 1 or g_kv < 1:
            raise ConfigurationError(f"g_q and g_kv must be positive, got {g_q}, {g_kv}")
        if g_q * g_kv != h:
            raise ConfigurationError(f"gqkva requires g_q * g_kv == h, got {g_q}*{g_kv} != {h}")
        pairing = [(i, j) for i in range(g_q) for j in range(g_kv)]

    return GroupingScheme(
        kind=kind,
        d=d,
        h=h,
        head_dim=d // h,
        g_q=g_q,
        g_kv=g_kv,
        pairing=tuple(pairing),
        label=_label(kind, g_q, g_kv),
    )


def _group_count(kind: SchemeKind, groups: Optional[int], h: int) -> int:
    if groups is None:
        raise ConfigurationError(f"{kind.value} needs a group count g")
    if not 1 <= groups <= h:
        raise ConfigurationError(f"{kind.value} group count must be in [1, h={h}], got {groups}")
    if h % groups:
        raise ConfigurationError(f"{kind.value} requires h mod g == 0, got h={h}, g={groups}")
    return groups


def parse_scheme(text: str, d: int, h: int) -> GroupingScheme:
    """Parse a canonical scheme string for embedding size ``d`` and ``h`` heads.

    Raises:
        SchemeSyntaxError: the string does not match the grammar.
        ConfigurationError: it parses but violates a constraint for ``h``.
    """
    match = _SCHEME_RE.match(text.strip().lower())
    if match is None:
        raise SchemeSyntaxError(f"Unrecognised scheme {text!r}; expected {SCHEME_GRAMMAR}")
    if match.group("simple"):
        return make_scheme(match.group("simple"), d, h)
    if match.group("grouped"):
        return make_scheme(match.group("grouped"), d, h, g=int(match.group("g")))
    return make_scheme(
        SchemeKind.GQKVA, d, h, g_q=int(match.group("g_q")), g_kv=int(match.group("g_kv"))
    )


def validate_scheme(s: GroupingScheme) -> list[str]:
    """Every violated scheme invariant, as messages. An empty list means valid."""
    violations: list[str] = []
    if s.d < 1 or s.h < 1:
        violations.append(f"d and h must be positive (d={s.d}, h={s.h})")
        return violations
    if s.d % s.h:
        violations.append(f"d mod h != 0 (d={s.d}, h={s.h})")
    if s.head_dim * s.h != s.d:
        violations.append(f"head_dim {s.head_dim} != d / h = {s.d / s.h:g}")
    if not 1 <= s.g_q <= s.h:
        violations.append(f"g_q {s.g_q} outside [1, {s.h}]")
    if not 1 <= s.g_kv <= s.h:
        violations.append(f"g_kv {s.g_kv} outside [1, {s.h}]")
    if len(s.pairing) != s.h:
        violations.append(f"pairing has {len(s.pairing)} entries, expected h={s.h}")

    seen: set[tuple[int, int]] = set()
    for pair in s.pairing:
        if pair in seen:
            violations.append(f"duplicate pair {pair}")
        seen.add(pair)
    for i, j in s.pairing:
        if not 0 <= i < s.g_q:
            violations.append(f"q_index {i} outside [0, {s.g_q})")
        if not 0 <= j < s.g_kv:
            violations.append(f"kv_index {j} outside [0, {s.g_kv})")

    used_q = {i for i, _ in s.pairing}
    used_kv = {j for _, j in s.pairing}
    for i in range(max(s.g_q, 0)):
        if i not in used_q:
            violations.append(f"unused projection group: q_index {i}")
    for j in range(max(s.g_kv, 0)):
        if j not in used_kv:
            violations.append(f"unused projection group: kv_index {j}")
    return violations


def effective_heads(s: GroupingScheme) -> int:
    """Number of distinct (Q, KV) dot-product attentions the scheme computes."""
    return len(set(s.pairing))


def permute_pairing(s: GroupingScheme, perm: Sequence[int]) -> GroupingScheme:
    """Scheme whose head ``t`` is head ``perm[t]`` of ``s``."""
    if sorted(perm) != list(range(s.h)):
        raise ConfigurationError(f"{list(perm)} is not a permutation of range({s.h})")
    return replace(s, pairing=tuple(s.pairing[p] for p in perm))


def _divisors(n: int) -> list[int]:
    return [g for g in range(1, n + 1) if n % g == 0]


def all_schemes_for(h: int) -> list[str]:
    """Every distinct valid scheme string for ``h`` heads.

    Group counts that collapse onto another kind (``gqa-1`` is MQA, ``gqa-h`` is
    MHA, ``gqkva-h.1`` is MQA, ...) are listed only under the simpler name.
    """
    names = ["mha"]
    if h > 1:
        names += ["mqa", "mkva"]
    inner = [g for g in _divisors(h) if 1 < g < h]
    names += [f"gqa-{g}" for g in inner]
    names += [f"gkva-{g}" for g in inner]
    names += [f"gqkva-{g}.{h // g}" for g in inner]
    return names


def expand_schemes(names: Iterable[str], h: int) -> list[str]:
    """Expand the ``table1`` and ``all`` bundles; keep first occurrences only."""
    out: list[str] = []
    for name in names:
        key = name.strip().lower()
        if key == "table1":
            batch: Sequence[str] = TABLE1_SCHEMES
        elif key == "all":
            batch = all_schemes_for(h)
        else:
            batch = [key]
        for item in batch:
            if item not in out:
                out.append(item)
    return out
