"""Words in a free group and self-maps of the rose.

A letter is a nonzero int: ``i`` is the oriented edge E_i, ``-i`` its
reverse.  The same int also names a direction (the germ at the start of
that oriented edge).  In text, ``a`` is 1, ``A`` is -1, ``b`` is 2, and so on.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

MAX_RANK = 26

Word = tuple  # tuple[int, ...], always freely reduced


class ParseError(ValueError):
    """Malformed automorphism text; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


def letter_char(x: int) -> str:
    if x > 0:
        return chr(ord("a") + x - 1)
    return chr(ord("A") - x - 1)


def char_letter(ch: str) -> int:
    if "a" <= ch <= "z":
        return ord(ch) - ord("a") + 1
    if "A" <= ch <= "Z":
        return -(ord(ch) - ord("A") + 1)
    raise ValueError(f"not a letter: {ch!r}")


def word_str(w: Iterable[int]) -> str:
    return "".join(letter_char(x) for x in w)


def parse_word(text: str) -> Word:
    """Parse letters like ``"abCb"``; whitespace is ignored.  Not reduced."""
    return tuple(char_letter(ch) for ch in text if not ch.isspace())


def tighten(letters: Iterable[int], rank: int | None = None) -> Word:
    out: list[int] = []
    for x in letters:
        if x == 0 or (rank is not None and abs(x) > rank):
            raise ValueError(f"invalid edge index {x} for rank {rank}")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def is_reduced(w: Sequence[int]) -> bool:
    return all(w[i] != -w[i + 1] for i in range(len(w) - 1))


def invert(w: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(w))


def concat(*words: Sequence[int]) -> Word:
    """Concatenate and tighten."""
    out: list[int] = []
    for w in words:
        for x in w:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
    return tuple(out)


def common_prefix_len(u: Sequence[int], v: Sequence[int]) -> int:
    n = min(len(u), len(v))
    i = 0
    while i < n and u[i] == v[i]:
        i += 1
    return i


def directions(rank: int) -> list[int]:
    """All 2r directions in a fixed order: a, A, b, B, ..."""
    out = []
    for i in range(1, rank + 1):
        out.extend((i, -i))
    return out


def _int_det(rows: list[list[int]]) -> int:
    m = [[Fraction(x) for x in row] for row in rows]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if m[r][c] != 0), None)
        if p is None:
            return 0
        if p != c:
            m[c], m[p] = m[p], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            if f:
                for k in range(c, n):
                    m[r][k] -= f * m[c][k]
    return int(det)


@dataclass(frozen=True)
class RoseMap:
    """A tight self-map of the rank-r rose: one image word per positive edge."""

    images: tuple

    def __post_init__(self):
        imgs = tuple(tuple(w) for w in self.images)
        object.__setattr__(self, "images", imgs)
        r = len(imgs)
        if not 1 <= r <= MAX_RANK:
            raise ValueError(f"rank must be in 1..{MAX_RANK}, got {r}")
        for i, w in enumerate(imgs):
            if not w:
                raise ValueError(f"image of {letter_char(i + 1)} is empty")
            if any(x == 0 or abs(x) > r for x in w):
                raise ValueError(f"image of {letter_char(i + 1)} uses a letter outside rank {r}")
            if not is_reduced(w):
                raise ValueError(f"image of {letter_char(i + 1)} is not reduced")

    @property
    def rank(self) -> int:
        return len(self.images)

    def image(self, x: int) -> Word:
        """Image of a signed letter."""
        w = self.images[abs(x) - 1]
        return w if x > 0 else invert(w)

    def __call__(self, w: Sequence[int]) -> Word:
        return apply(self, w)

    def abelianization(self) -> list[list[int]]:
        """Signed count matrix: column j is the abelianized image of E_j."""
        r = self.rank
        cols = []
        for w in self.images:
            col = [0] * r
            for x in w:
                col[abs(x) - 1] += 1 if x > 0 else -1
            cols.append(col)
        return [[cols[j][i] for j in range(r)] for i in range(r)]

    def determinant(self) -> int:
        return _int_det(self.abelianization())

    def __str__(self) -> str:
        return format_rosemap(self)


def identity(rank: int) -> RoseMap:
    return RoseMap(tuple((i,) for i in range(1, rank + 1)))


def apply(f: RoseMap, w: Sequence[int]) -> Word:
    out: list[int] = []
    for x in w:
        if x == 0 or abs(x) > f.rank:
            raise ValueError(f"letter {x} outside rank {f.rank}")
        for y in f.image(x):
            if out and out[-1] == -y:
                out.pop()
            else:
                out.append(y)
    return tuple(out)


def compose(outer: RoseMap, inner: RoseMap) -> RoseMap:
    """outer after inner."""
    if outer.rank != inner.rank:
        raise ValueError("rank mismatch")
    return RoseMap(tuple(apply(outer, w) for w in inner.images))


def compose_all(maps: Sequence[RoseMap]) -> RoseMap:
    """Compose maps applied in list order: ``maps[-1] o ... o maps[0]``."""
    if not maps:
        raise ValueError("empty composition")
    out = maps[0]
    for f in maps[1:]:
        out = compose(f, out)
    return out


def power(f: RoseMap, p: int) -> RoseMap:
    if p < 1:
        raise ValueError("power must be positive")
    out = f
    for _ in range(p - 1):
        out = compose(f, out)
    return out


@dataclass(frozen=True, order=True)
class NielsenGen:
    """The generator sending the oriented edge ``folded`` to ``prefix . folded``.

    With ``folded = -c`` and ``prefix = p`` this is ``C -> pC``, i.e. ``c -> cP``.
    """

    folded: int
    prefix: int

    def __post_init__(self):
        if self.folded == 0 or self.prefix == 0:
            raise ValueError("zero letter")
        if abs(self.prefix) == abs(self.folded):
            raise ValueError("prefix must differ from the folded edge and its inverse")

    def to_rosemap(self, rank: int) -> RoseMap:
        return gen_to_rosemap(self, rank)

    def __str__(self) -> str:
        u, a = self.folded, self.prefix
        if u > 0:
            return f"{letter_char(u)} -> {letter_char(a)}{letter_char(u)}"
        return f"{letter_char(-u)} -> {letter_char(-u)}{letter_char(-a)}"


def gen_to_rosemap(g: NielsenGen, rank: int) -> RoseMap:
    if max(abs(g.folded), abs(g.prefix)) > rank:
        raise ValueError("generator outside rank")
    imgs = [(i,) for i in range(1, rank + 1)]
    u, a = g.folded, g.prefix
    imgs[abs(u) - 1] = (a, u) if u > 0 else (-u, -a)
    return RoseMap(tuple(imgs))


# -- text format -----------------------------------------------------------

_LINE = re.compile(r"^\s*([A-Za-z])\s*->\s*(.*?)\s*$")


def parse_rosemap(text: str) -> RoseMap:
    entries: dict[int, tuple[Word, int]] = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _LINE.match(line)
        if not m:
            raise ParseError(f"expected '<letter> -> <letters>', got {raw.strip()!r}", n)
        head, body = m.group(1), m.group(2)
        if not head.islower():
            raise ParseError(f"left side must be a lowercase edge, got {head!r}", n)
        bad = [ch for ch in body if not (ch.isspace() or ch.isalpha())]
        if bad or any(not ch.isascii() for ch in body):
            raise ParseError(f"unknown letter {(bad or [body])[0]!r}", n)
        img = parse_word(body)
        if not img:
            raise ParseError(f"empty image for {head}", n)
        if not is_reduced(img):
            raise ParseError(f"image of {head} is not freely reduced", n)
        e = char_letter(head)
        if e in entries:
            raise ParseError(f"edge {head} defined twice", n)
        entries[e] = (img, n)
    if not entries:
        raise ParseError("no edges defined")
    rank = max(entries)
    if sorted(entries) != list(range(1, rank + 1)):
        missing = [letter_char(i) for i in range(1, rank + 1) if i not in entries]
        raise ParseError(f"rank inconsistency: missing edges {', '.join(missing)}")
    for e, (img, n) in entries.items():
        for x in img:
            if abs(x) > rank:
                raise ParseError(f"letter {letter_char(x)!r} outside rank {rank}", n)
    f = RoseMap(tuple(entries[i][0] for i in range(1, rank + 1)))
    if abs(f.determinant()) != 1:
        raise ParseError(f"abelianized determinant is {f.determinant()}, not +-1")
    return f


def parse_generator(text: str) -> NielsenGen:
    """``"c -> Bc"`` (prefix form) or ``"b -> bC"`` (suffix form, i.e. ``B -> cB``)."""
    m = _LINE.match(text)
    body = "".join(m.group(2).split()) if m else ""
    if not m or len(body) != 2:
        raise ParseError(f"expected '<letter> -> <two letters>', got {text.strip()!r}")
    try:
        x = char_letter(m.group(1))
        first, second = char_letter(body[0]), char_letter(body[1])
        if x < 0:
            raise ValueError("left side must be a lowercase edge")
        if second == x:
            return NielsenGen(x, first)
        if first == x:
            return NielsenGen(-x, -second)
    except ValueError as e:
        raise ParseError(str(e)) from None
    raise ParseError(f"{text.strip()!r} is not a Nielsen generator")


def parse_decomposition(text: str) -> list[NielsenGen]:
    """One generator per line in application order; ``#`` starts a comment."""
    out = []
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        try:
            out.append(parse_generator(line))
        except ParseError as e:
            raise ParseError(e.args[0], n) from None
    if not out:
        raise ParseError("no generators")
    return out


def format_rosemap(f: RoseMap) -> str:
    return "".join(f"{letter_char(i + 1)} -> {word_str(w)}\n" for i, w in enumerate(f.images))
