"""Words over H * <t>: alternating H-segments and signed t-letters.

A TWord with n t-letters stores n+1 H-segments, so every prefix is
well defined letter by letter even when segments are trivial.  The word
grammar accepted by parse_word:

    token   = name | name@copy | t | t^-1 | '(' word ')' '^' int
    word    = token*            (whitespace separated)

Element names come from the ambient group table; t is reserved.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .freeprod import FPWord, FreeProduct


class WordParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class TWord:
    """h_0 t^{e_1} h_1 ... t^{e_n} h_n with segments h_i in H."""
    ambient: FreeProduct
    segments: tuple[FPWord, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        if len(self.segments) != len(self.signs) + 1:
            raise ValueError("segment/sign length mismatch")
        if any(e not in (1, -1) for e in self.signs):
            raise ValueError("t exponents must be +-1")

    # -- basics --------------------------------------------------------

    @property
    def t_count(self) -> int:
        return len(self.signs)

    def exponent_sum(self) -> int:
        return sum(self.signs)

    def is_h_word(self) -> bool:
        return self.t_count == 0

    def h_value(self) -> FPWord:
        if not self.is_h_word():
            raise ValueError("word contains t-letters")
        return self.segments[0]

    def __mul__(self, other: "TWord") -> "TWord":
        if self.ambient != other.ambient:
            raise ValueError("ambient mismatch")
        seam = self.segments[-1] * other.segments[0]
        return TWord(self.ambient,
                     self.segments[:-1] + (seam,) + other.segments[1:],
                     self.signs + other.signs)

    def inv(self) -> "TWord":
        return TWord(self.ambient,
                     tuple(h.inv() for h in reversed(self.segments)),
                     tuple(-e for e in reversed(self.signs)))

    def pow(self, n: int) -> "TWord":
        if n < 0:
            return self.inv().pow(-n)
        out = h_word(self.ambient.one())
        for _ in range(n):
            out = out * self
        return out

    def free_reduce(self) -> "TWord":
        """Cancel adjacent t, t^-1 pairs separated by an identity segment."""
        segs = list(self.segments)
        signs = list(self.signs)
        changed = True
        while changed:
            changed = False
            for i in range(len(signs) - 1):
                if signs[i] == -signs[i + 1] and segs[i + 1].is_identity():
                    merged = segs[i] * segs[i + 2]
                    segs[i:i + 3] = [merged]
                    del signs[i:i + 2]
                    changed = True
                    break
        return TWord(self.ambient, tuple(segs), tuple(signs))

    def is_freely_reduced(self) -> bool:
        return all(not (self.signs[i] == -self.signs[i + 1] and self.segments[i + 1].is_identity())
                   for i in range(self.t_count - 1))

    def cyclic_free_reduce(self) -> "TWord | FPWord":
        """Reduce all t-cancellations in the cyclic word.

        Returns an FPWord (the cyclically reduced H-core) when every
        t-letter cancels, otherwise a TWord with an empty trailing segment
        whose cyclic form admits no further cancellation.
        """
        w = self.free_reduce()
        if w.t_count == 0:
            core, _ = w.segments[0].cyclic_reduce()
            return core
        # cyclic data: sign[i] is followed by seg_after[i]; seg_after[n-1]
        # is the seam merging the trailing and leading linear segments.
        signs = list(w.signs)
        seg_after = list(w.segments[1:-1]) + [w.segments[-1] * w.segments[0]]
        while signs:
            n = len(signs)
            hit = next((i for i in range(n)
                        if signs[i] == -signs[(i + 1) % n] and seg_after[i].is_identity()), None)
            if hit is None:
                break
            i, j = hit, (hit + 1) % len(signs)
            if len(signs) == 2:
                rest = seg_after[j]
                core, _ = rest.cyclic_reduce()
                return core
            seg_after[(i - 1) % n] = seg_after[(i - 1) % n] * seg_after[j]
            for k in sorted((i, j), reverse=True):
                del signs[k]
                del seg_after[k]
        # linearize starting after the last sign: leading segment is the seam
        return TWord(self.ambient,
                     (seg_after[-1],) + tuple(seg_after[:-1]) + (self.ambient.one(),),
                     tuple(signs))


def h_word(h: FPWord) -> TWord:
    return TWord(h.ambient, (h,), ())


def t_letter(ambient: FreeProduct, sign: int = 1) -> TWord:
    return TWord(ambient, (ambient.one(), ambient.one()), (sign,))


def from_items(ambient: FreeProduct, items) -> TWord:
    """Build a TWord from a list of FPWord segments and +-1 t-signs."""
    out = h_word(ambient.one())
    for item in items:
        if isinstance(item, FPWord):
            out = out * h_word(item)
        elif item in (1, -1):
            out = out * t_letter(ambient, item)
        else:
            raise TypeError(f"bad item {item!r}")
    return out


def is_unimodular(w: TWord) -> bool:
    """True iff the t-exponent sum is exactly one after free reduction."""
    return w.free_reduce().exponent_sum() == 1


def t_exponent_residue(w: TWord, k: int) -> int:
    """Exponent sum mod k.

    A nonzero residue certifies the word is not a product of conjugates
    of k-th powers of any fixed word: every such product has t-exponent
    divisible by k.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    return w.exponent_sum() % k


def is_cyclically_reduced(w: TWord) -> bool:
    w = w.free_reduce()
    if w.t_count == 0:
        return True
    seam = w.segments[-1] * w.segments[0]
    return not (w.signs[-1] == -w.signs[0] and seam.is_identity())


def cyclic_rotations(w: TWord) -> list[TWord]:
    """All rotations of the cyclic word at t-letter boundaries.

    Each rotation starts with an (possibly trivial) H-segment and ends
    with a t-letter; the seam segment merges trailing and leading parts.
    """
    w = w.free_reduce()
    if w.t_count == 0:
        return [w]
    seam = w.segments[-1] * w.segments[0]
    segs = [seam] + list(w.segments[1:-1])
    signs = list(w.signs)
    n = len(signs)
    out = []
    for r in range(n):
        rs = [segs[(r + i) % n] for i in range(n)]
        re_ = [signs[(r + i) % n] for i in range(n)]
        out.append(TWord(w.ambient, tuple(rs) + (w.ambient.one(),), tuple(re_)))
    return out


def cyclic_equal(a: TWord, b: TWord) -> bool:
    """Equality of cyclic words: cyclically reduce, then compare rotations."""
    ar = a.cyclic_free_reduce()
    br = b.cyclic_free_reduce()
    if isinstance(ar, FPWord) != isinstance(br, FPWord):
        return False
    if isinstance(ar, FPWord):
        from .freeprod import conjugate_in_free_product
        return conjugate_in_free_product(ar, br)
    if ar.t_count != br.t_count:
        return False
    target = _cyclic_key(br)
    return any(_cyclic_key(r) == target for r in cyclic_rotations(ar))


def _cyclic_key(w: TWord):
    seam = w.segments[-1] * w.segments[0]
    return (tuple(w.signs), (seam.letters,) + tuple(h.letters for h in w.segments[1:-1]))


# -- parsing -----------------------------------------------------------

_TOKEN_RE = re.compile(r"\(|\)(\^-?\d+)?|[^\s()]+")


def tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    for m in _TOKEN_RE.finditer(text):
        if m.start() > pos and text[pos:m.start()].strip():
            raise WordParseError(f"unreadable input {text[pos:m.start()]!r}", pos)
        tokens.append((m.group(0), m.start()))
        pos = m.end()
    if text[pos:].strip():
        raise WordParseError(f"unreadable input {text[pos:]!r}", pos)
    return tokens


def parse_word(text: str, ambient: FreeProduct) -> TWord:
    """Parse the word grammar over the ambient group's element names."""
    tokens = tokenize(text)
    word, rest = _parse_seq(tokens, ambient, depth=0)
    if rest:
        tok, p = rest[0]
        raise WordParseError(f"unexpected token {tok!r}", p)
    return word


def _parse_seq(tokens, ambient: FreeProduct, depth: int):
    out = h_word(ambient.one())
    i = 0
    while i < len(tokens):
        tok, pos = tokens[i]
        if tok == "(":
            inner, rest = _parse_seq(tokens[i + 1:], ambient, depth + 1)
            if not rest or not rest[0][0].startswith(")"):
                raise WordParseError("unclosed parenthesis", pos)
            closer, cpos = rest[0]
            power = 1
            if len(closer) > 1:
                power = int(closer[2:])
            elif len(closer) == 1:
                raise WordParseError("parenthesized group needs an explicit ^n", cpos)
            out = out * inner.pow(power)
            consumed = len(tokens) - len(rest) + 1
            tokens = tokens[consumed:]
            i = 0
            continue
        if tok.startswith(")"):
            if depth == 0:
                raise WordParseError("unmatched closing parenthesis", pos)
            return out, tokens[i:]
        if tok == "t":
            out = out * t_letter(ambient, 1)
        elif tok == "t^-1":
            out = out * t_letter(ambient, -1)
        else:
            name, copy_index = tok, 0
            if "@" in tok:
                name, _, suffix = tok.partition("@")
                if not suffix.isdigit():
                    raise WordParseError(f"bad copy suffix in {tok!r}", pos)
                copy_index = int(suffix)
            if copy_index > ambient.s:
                raise WordParseError(f"copy index {copy_index} outside ambient", pos)
            try:
                elem = ambient.group.index_of(name)
            except Exception:
                raise WordParseError(f"unknown element token {name!r}", pos) from None
            out = out * h_word(ambient.letter(copy_index, elem))
        i += 1
    if depth > 0:
        raise WordParseError("unclosed parenthesis", 0)
    return out, []


def parse_h_word(text: str, ambient: FreeProduct) -> FPWord:
    w = parse_word(text, ambient)
    if not w.is_h_word():
        raise WordParseError("expected a t-free word", 0)
    return w.h_value()


def word_str(w: TWord) -> str:
    parts: list[str] = []
    for i, seg in enumerate(w.segments):
        if not seg.is_identity():
            parts.extend(seg.tokens())
        if i < len(w.signs):
            parts.append("t" if w.signs[i] == 1 else "t^-1")
    return " ".join(parts) if parts else "1"
