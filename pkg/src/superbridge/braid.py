"""Plat presentations of knots and links as braid words.

A plat on 2n strings closes an open braid by capping adjacent endpoint
pairs (1,2), (3,4), ..., (2n-1,2n) at the top and again at the bottom.
Letters are signed generator indices: letter +j crosses the strings at
positions j and j+1 with the string entering from position j passing over;
-j is the mirror crossing.  Positions and strand ids are 1-based throughout,
matching the generator indices.

The two rewriting moves used to free the leftmost strand are sound plat
isotopies: free cancellation of an adjacent inverse pair, and removal of an
empty bigon that the leftmost strand bounds with one other strand.  The
bigon pair consists of two opposite-handed crossings at the same adjacency,
consecutive along both of its strands; every letter between the pair leaves
both strands untouched, hence commutes past, and the pair cancels.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import PlatParseError, StepLimitExceeded

__all__ = [
    "BraidWord",
    "PlatDiagram",
    "StrandPath",
    "permutation_of",
    "strand_path",
    "route_leftmost_home",
    "free_leftmost_strand",
    "plat_components",
    "parse_plat",
    "format_plat",
]


@dataclass(frozen=True)
class BraidWord:
    """A word in the braid group on `width` strings."""

    width: int
    letters: tuple[int, ...] = ()

    def __post_init__(self):
        if self.width < 2:
            raise ValueError("braid width must be at least 2")
        object.__setattr__(self, "letters", tuple(int(g) for g in self.letters))
        for k, g in enumerate(self.letters):
            if g == 0 or not 1 <= abs(g) <= self.width - 1:
                raise ValueError(
                    f"letter {k + 1}: generator {g} out of range "
                    f"[1, {self.width - 1}]")

    def __len__(self):
        return len(self.letters)

    def extended(self, extra) -> "BraidWord":
        return BraidWord(self.width, self.letters + tuple(extra))


@dataclass(frozen=True)
class PlatDiagram:
    """An n-plat: a braid word on 2n strings together with its bridge count."""

    word: BraidWord
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("bridge count must be positive")
        if self.word.width != 2 * self.n:
            raise ValueError(
                f"plat with n={self.n} needs width {2 * self.n}, "
                f"got {self.word.width}")

    @classmethod
    def from_letters(cls, n: int, letters) -> "PlatDiagram":
        return cls(BraidWord(2 * n, tuple(letters)), n)

    @property
    def letters(self) -> tuple[int, ...]:
        return self.word.letters


@dataclass(frozen=True)
class StrandPath:
    """Trace of one string through the braid: ordered crossing events
    (other_strand, letter_sign, word_index)."""

    strand_id: int
    crossing_events: tuple[tuple[int, int, int], ...] = field(default_factory=tuple)


def permutation_of(word: BraidWord) -> tuple[int, ...]:
    """Where each top position ends at the bottom.

    Entry i (0-based) is the 1-based bottom position of the string that
    starts at top position i+1; the word composes its adjacent
    transpositions in letter order.
    """
    pos = list(range(word.width + 1))  # pos[s] = current position of strand s
    at = list(range(word.width + 1))   # at[p] = strand currently at position p
    for g in word.letters:
        j = abs(g)
        a, b = at[j], at[j + 1]
        at[j], at[j + 1] = b, a
        pos[a], pos[b] = j + 1, j
    return tuple(pos[1:])


def _events_of(word: BraidWord, strand: int):
    """Crossing events of one strand: (word_index, other, letter_sign, was_left)."""
    at = list(range(word.width + 1))
    pos = list(range(word.width + 1))
    events = []
    for k, g in enumerate(word.letters):
        j = abs(g)
        a, b = at[j], at[j + 1]
        if strand in (a, b):
            other = b if strand == a else a
            events.append((k, other, 1 if g > 0 else -1, strand == a))
        at[j], at[j + 1] = b, a
        pos[a], pos[b] = j + 1, j
    return events


def strand_path(word: BraidWord, strand_id: int) -> StrandPath:
    if not 1 <= strand_id <= word.width:
        raise ValueError(f"strand {strand_id} outside [1, {word.width}]")
    events = _events_of(word, strand_id)
    return StrandPath(strand_id, tuple((o, s, k) for k, o, s, _ in events))


def route_leftmost_home(plat: PlatDiagram) -> PlatDiagram:
    """Append crossings so the string starting at top position 1 also ends
    at bottom position 1.

    The appended letters walk the string left one position at a time; the
    word grows by exactly i-1 letters, i its former bottom position.  All
    appended letters are positive (either handedness preserves the link
    since the moved string crosses coherently; positive is fixed for
    determinism).
    """
    i = permutation_of(plat.word)[0]
    extra = tuple(range(i - 1, 0, -1))
    routed = PlatDiagram(plat.word.extended(extra), plat.n)
    assert permutation_of(routed.word)[0] == 1
    return routed


def _crossing_parity_ok(word: BraidWord) -> bool:
    # a routed leftmost strand must cross every other string an even number
    # of times (it returns to the leftmost position, so no order swaps)
    counts: dict[int, int] = {}
    for _, other, _, _ in _events_of(word, 1):
        counts[other] = counts.get(other, 0) + 1
    return all(c % 2 == 0 for c in counts.values())


def free_leftmost_strand(plat: PlatDiagram, max_steps: int | None = None) -> PlatDiagram:
    """Rewrite the plat until strand 1 participates in no crossing.

    Requires a routed plat (permutation fixing position 1).  Each step
    removes two letters, either an adjacent inverse pair anywhere in the
    word, or an empty strand-1 bigon: two opposite-handed crossings with the
    same partner strand, consecutive along strand 1 *and* along the partner.
    Scanning is left-to-right, first applicable rule, restart; every step
    shortens the word, so the procedure terminates, and StepLimitExceeded
    reports inputs the two moves cannot free (same-handed clasps).
    """
    word = plat.word
    if permutation_of(word)[0] != 1:
        raise ValueError("strand 1 must end at position 1; route it home first")
    assert _crossing_parity_ok(word), "routed strand has odd crossing parity"
    if max_steps is None:
        max_steps = max(100, 10 * len(word) ** 2)

    steps = 0
    while True:
        events = _events_of(word, 1)
        if not events:
            return PlatDiagram(word, plat.n)
        if steps >= max_steps:
            raise StepLimitExceeded(
                f"strand 1 still crosses after {steps} rewrites")

        letters = word.letters
        target: tuple[int, int] | None = None
        for k in range(len(letters) - 1):
            if letters[k] == -letters[k + 1]:
                target = (k, k + 1)
                break
        if target is None:
            for (k1, other1, sign1, _), (k2, other2, sign2, _) in zip(
                    events, events[1:]):
                if other1 != other2 or sign1 != -sign2:
                    # a same-handed pair is a clasp, not a removable bigon
                    continue
                if _partner_touched_between(word, k1, k2, other1):
                    continue
                target = (k1, k2)
                break
        if target is None:
            raise StepLimitExceeded(
                "no applicable rewrite; the two moves cannot free strand 1 "
                "on this word")
        k1, k2 = target
        word = BraidWord(
            word.width,
            letters[:k1] + letters[k1 + 1:k2] + letters[k2 + 1:])
        steps += 1


def _partner_touched_between(word: BraidWord, k1: int, k2: int, partner: int) -> bool:
    """Does any letter strictly between k1 and k2 move the partner strand?

    If not, the region between the two strand-1 crossings is an empty bigon
    and removing both crossings is a sound isotopy.
    """
    at = list(range(word.width + 1))
    pos = list(range(word.width + 1))
    for k, g in enumerate(word.letters):
        j = abs(g)
        if k1 < k < k2 and partner in (at[j], at[j + 1]):
            return True
        if k >= k2:
            return False
        a, b = at[j], at[j + 1]
        at[j], at[j + 1] = b, a
        pos[a], pos[b] = j + 1, j
    return False


def plat_components(plat: PlatDiagram) -> int:
    """Number of link components of the plat closure."""
    width = plat.word.width
    perm = permutation_of(plat.word)
    top_to_bottom = {i + 1: perm[i] for i in range(width)}
    bottom_to_top = {v: k for k, v in top_to_bottom.items()}

    def cap_partner(p: int) -> int:
        return p + 1 if p % 2 == 1 else p - 1

    seen_tops: set[int] = set()
    components = 0
    for start in range(1, width + 1):
        if start in seen_tops:
            continue
        components += 1
        t = start
        while t not in seen_tops:
            seen_tops.add(t)
            b = top_to_bottom[t]
            t_next = bottom_to_top[cap_partner(b)]
            seen_tops.add(t_next)
            t = cap_partner(t_next)
    return components


_PLAT_RE = re.compile(r"^\s*n\s*=\s*(\d+)\s*;\s*word\s*=\s*(.*?)\s*$")


def parse_plat(line: str) -> PlatDiagram:
    """Parse the one-line plat format `n=<int>; word=<comma-separated ints>`."""
    m = _PLAT_RE.match(line)
    if not m:
        raise PlatParseError(
            "expected 'n=<int>; word=<comma-separated signed ints>'")
    n = int(m.group(1))
    if n < 1:
        raise PlatParseError("n must be a positive integer")
    body = m.group(2)
    letters: list[int] = []
    if body:
        for k, tok in enumerate(body.split(",")):
            tok = tok.strip()
            try:
                g = int(tok)
            except ValueError:
                raise PlatParseError(f"letter {k + 1}: {tok!r} is not an integer")
            if g == 0 or not 1 <= abs(g) <= 2 * n - 1:
                raise PlatParseError(
                    f"letter {k + 1}: generator {g} out of range [1, {2 * n - 1}]")
            letters.append(g)
    return PlatDiagram.from_letters(n, letters)


def format_plat(plat: PlatDiagram) -> str:
    return f"n={plat.n}; word={','.join(str(g) for g in plat.letters)}"
