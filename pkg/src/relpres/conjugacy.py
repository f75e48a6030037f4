"""Conjugator normalization and malnormality/center certificates.

Over the standard presentation, conjugating a bottom-slice element by t
shifts it one copy up; walking a conjugator letter by letter therefore
keeps the conjugate inside H exactly when every t-crossing happens on the
correct slice.  The reducer cancels matched t^-1 ... t fragments whose
content sits in the right slice, shrinking the conjugator's t-length by
two per step; a slice violation is a first-class "stuck" outcome, not an
error.
"""

from __future__ import annotations

from dataclasses import dataclass

from .freeprod import FPWord
from .groups import GroupTable
from .presentation import RelPresentation
from .words import TWord, h_word


class StuckSignal(ValueError):
    def __init__(self, message: str, required: str):
        super().__init__(message)
        self.required = required


def digon_step(h: FPWord, direction: int) -> FPWord:
    """Conjugation by one t-letter: t^-1 h t for direction +1 (needs h in
    the bottom slice), t h t^-1 for direction -1 (top slice)."""
    if direction == 1:
        if not h.in_bottom():
            raise StuckSignal(f"{h} is not in the bottom slice", "bottom")
        return h.shift(1)
    if direction == -1:
        if not h.in_top():
            raise StuckSignal(f"{h} is not in the top slice", "top")
        return h.shift(-1)
    raise ValueError("direction must be +-1")


@dataclass(frozen=True)
class ReductionOutcome:
    status: str                      # reduced-to-H | reduced-to-G0 | stuck
    final_conjugator: TWord | None
    conjugate_trace: tuple[FPWord, ...]
    stuck_at: tuple[int, str] | None = None
    residual_t_power: int = 0
    final_conjugate: FPWord | None = None
    substitutions: tuple[tuple[int, str, str], ...] = ()
    steps: int = 0

    @property
    def succeeded(self) -> bool:
        return self.status != "stuck"


def _letters_of(u: TWord):
    """Flatten to single letters: FPWord segments and +-1 t-signs."""
    out = []
    for i, seg in enumerate(u.segments):
        if not seg.is_identity():
            out.append(seg)
        if i < len(u.signs):
            out.append(u.signs[i])
    return out


def prefix_trace(u: TWord, h: FPWord) -> ReductionOutcome:
    """Conjugate h through u one letter at a time.

    Every prefix must keep the conjugate in H: group letters conjugate
    inside H, t-letters shift between the slices.  Returns the trace of
    conjugates per prefix, or the stuck position with the slice that was
    required there.
    """
    if h.is_identity():
        raise ValueError("trace a nontrivial element")
    current = h
    trace: list[FPWord] = []
    letters = _letters_of(u.free_reduce())
    for pos, letter in enumerate(letters):
        if isinstance(letter, FPWord):
            current = current.conj(letter)
        else:
            try:
                current = digon_step(current, letter)
            except StuckSignal as sig:
                return ReductionOutcome(
                    status="stuck", final_conjugator=u, conjugate_trace=tuple(trace),
                    stuck_at=(pos, sig.required))
        trace.append(current)
    status = "reduced-to-G0" if current.in_subproduct({0}) else "reduced-to-H"
    return ReductionOutcome(status=status, final_conjugator=u,
                            conjugate_trace=tuple(trace),
                            residual_t_power=u.free_reduce().exponent_sum(),
                            final_conjugate=current)


def reduce_conjugator(u: TWord, h: FPWord) -> ReductionOutcome:
    """Cancel slice-compatible t^-1 a t / t b t^-1 fragments of u.

    Each substitution replaces the fragment by the shifted group element,
    an identity of the presented group, and shortens the t-length by
    exactly two.  The scan is leftmost-innermost, so runs are
    reproducible.  After the fragment phase the conjugate of h is traced
    through whatever conjugator remains.
    """
    if h.is_identity():
        raise ValueError("reduce against a nontrivial element")
    amb = u.ambient
    current = u.free_reduce()
    substitutions: list[tuple[int, str, str]] = []
    while True:
        signs = current.signs
        hit = None
        for i in range(len(signs) - 1):
            seg = current.segments[i + 1]
            if signs[i] == -1 and signs[i + 1] == 1 and seg.in_bottom():
                hit = (i, seg, seg.shift(1))
                break
            if signs[i] == 1 and signs[i + 1] == -1 and seg.in_top():
                hit = (i, seg, seg.shift(-1))
                break
        if hit is None:
            break
        i, seg, shifted = hit
        segs = list(current.segments)
        new_seg = segs[i] * shifted * segs[i + 2]
        segs[i:i + 3] = [new_seg]
        new_signs = signs[:i] + signs[i + 2:]
        substitutions.append((i, str(seg), str(shifted)))
        current = TWord(amb, tuple(segs), tuple(new_signs)).free_reduce()
    traced = prefix_trace(current, h) if not current.is_h_word() else None
    if current.is_h_word():
        value = current.h_value()
        conjugate = h.conj(value)
        status = "reduced-to-G0" if value.in_subproduct({0}) else "reduced-to-H"
        return ReductionOutcome(
            status=status, final_conjugator=current,
            conjugate_trace=(conjugate,), final_conjugate=conjugate,
            substitutions=tuple(substitutions), steps=len(substitutions))
    return ReductionOutcome(
        status=traced.status, final_conjugator=current,
        conjugate_trace=traced.conjugate_trace, stuck_at=traced.stuck_at,
        residual_t_power=current.exponent_sum(),
        final_conjugate=traced.final_conjugate,
        substitutions=tuple(substitutions), steps=len(substitutions))


# -- the single-t-letter model: G * Z_k ------------------------------------


@dataclass(frozen=True)
class FreeProductModel:
    """Normal forms in G * <x | x^k> for relators built from one group
    letter and one stable letter: t maps to g^-1 x."""
    group: GroupTable
    g: int
    k: int

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")

    def one(self) -> tuple:
        return ()

    def normalize(self, letters) -> tuple:
        out: list[tuple[str, int]] = []
        for kind, val in letters:
            if kind == "G":
                if val == self.group.identity:
                    continue
            else:
                val %= self.k
                if val == 0:
                    continue
            out.append((kind, val))
            while len(out) >= 2 and out[-1][0] == out[-2][0]:
                k2, v2 = out.pop()
                k1, v1 = out.pop()
                merged = (self.group.mul(v1, v2) if k2 == "G" else (v1 + v2) % self.k)
                if not ((k2 == "G" and merged == self.group.identity)
                        or (k2 == "x" and merged == 0)):
                    out.append((k2, merged))
        return tuple(out)

    def mul(self, a: tuple, b: tuple) -> tuple:
        return self.normalize(list(a) + list(b))

    def inv(self, a: tuple) -> tuple:
        out = []
        for kind, val in reversed(a):
            out.append((kind, self.group.inv(val) if kind == "G" else (-val) % self.k))
        return tuple(out)

    def map_word(self, w: TWord) -> tuple:
        """Image of a word over G * <t>: group letters go to themselves,
        t to g^-1 x, t^-1 to x^-1 g."""
        if w.ambient.s != 0:
            raise ValueError("model words live over the base group")
        letters: list[tuple[str, int]] = []
        g_inv = self.group.inv(self.g)
        for i, seg in enumerate(w.segments):
            for l in seg.letters:
                letters.append(("G", l.element))
            if i < len(w.signs):
                if w.signs[i] == 1:
                    letters.extend([("G", g_inv), ("x", 1)])
                else:
                    letters.extend([("x", self.k - 1), ("G", self.g)])
        return self.normalize(letters)

    def in_base_group(self, a: tuple) -> bool:
        return len(a) == 0 or (len(a) == 1 and a[0][0] == "G")

    def words_up_to(self, syllables: int) -> list[tuple]:
        out = [()]
        layer: list[tuple] = [()]
        g_letters = [("G", v) for v in self.group.nontrivial()]
        x_letters = [("x", j) for j in range(1, self.k)]
        for _ in range(syllables):
            nxt = []
            for w in layer:
                last = w[-1][0] if w else None
                for letter in (g_letters if last != "G" else []) + \
                              (x_letters if last != "x" else []):
                    nxt.append(w + (letter,))
            out.extend(nxt)
            layer = nxt
        return out


def single_letter_model(group: GroupTable, g: int, k: int) -> FreeProductModel:
    return FreeProductModel(group, g, k)


@dataclass(frozen=True)
class MalnormalityReport:
    holds: bool
    counterexample: tuple | None
    checked: int


def malnormality_oracle(group: GroupTable, g: int, k: int, max_syllables: int,
                        workers: int = 1) -> MalnormalityReport:
    """Exhaustive check that the base group meets its conjugates trivially
    in G * Z_k, over all conjugators of bounded syllable length."""
    model = single_letter_model(group, g, k)
    words = [u for u in model.words_up_to(max_syllables)
             if not model.in_base_group(u)]
    if workers > 1:
        import multiprocessing as mp
        chunk = (len(words) + workers - 1) // workers
        jobs = [(model, words[i:i + chunk]) for i in range(0, len(words), chunk)]
        with mp.Pool(workers) as pool:
            results = pool.map(_oracle_chunk, jobs)
        checked = sum(r[0] for r in results)
        for _count, bad in results:
            if bad is not None:
                return MalnormalityReport(False, bad, checked)
        return MalnormalityReport(True, None, checked)
    count, bad = _oracle_chunk((model, words))
    return MalnormalityReport(bad is None, bad, count)


def _oracle_chunk(job) -> tuple[int, tuple | None]:
    model, words = job
    checked = 0
    for u in words:
        u_inv = model.inv(u)
        for h in model.group.nontrivial():
            value = model.mul(model.mul(u_inv, (("G", h),)), u)
            checked += 1
            if model.in_base_group(value):
                return checked, (u, h, value)
    return checked, None


@dataclass(frozen=True)
class CenterReport:
    trivial_center_certified: bool
    group_nontrivial: bool
    t_outside_base: tuple[int, int] | None      # (residue, k)
    element_checks: tuple[tuple[str, str, int], ...]
    notes: str = ""


def center_certificate(pres: RelPresentation) -> CenterReport:
    """Certify the presented group has trivial center.

    The t-exponent residue of a would-be equality g t = 1 shows t lies
    outside the base group; conjugating each nontrivial base element by t
    lands in the next copy, so nothing in the base group is central.
    Both facts together pin the center (contained in the base group by
    malnormality) to the identity.
    """
    group = pres.group
    if group.order == 1:
        return CenterReport(False, False, None, (),
                            notes="base group is trivial; the hypothesis fails")
    residue = 1 % pres.k
    t_cert = (residue, pres.k) if residue != 0 else None
    checks = []
    ok = True
    if pres.s >= 1:
        amb = pres.ambient
        t = TWord(amb, (amb.one(), amb.one()), (1,))
        for g in group.nontrivial():
            h = amb.letter(0, g)
            outcome = reduce_conjugator(t, h)
            conj = outcome.final_conjugate
            distinct = conj is not None and conj != h
            copy_index = conj.letters[0].copy_index if conj and conj.letters else -1
            checks.append((str(h), str(conj), copy_index))
            ok = ok and distinct and copy_index == 1
    else:
        # single-letter relators: check in the free-product model
        inner = pres.inner_word()
        model = None
        if pres.m == -1 and len(pres.c.letters) == 1:
            model = single_letter_model(group, pres.c.letters[0].element, pres.k)
        if model is None:
            return CenterReport(False, True, t_cert, (),
                                notes="no copy spread and no single-letter form; "
                                      "use the free-product oracle directly")
        for g in group.nontrivial():
            img = model.map_word(h_word(pres.ambient.letter(0, g)))
            x = (("x", 1),)
            left = model.mul(img, x)
            right = model.mul(x, img)
            checks.append((group.names[g], "commutes" if left == right else "moved", -1))
            ok = ok and left != right
    return CenterReport(ok and t_cert is not None, True, t_cert, tuple(checks))
