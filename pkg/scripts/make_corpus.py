#!/usr/bin/env python3
"""Generate the frozen corpus of cyclically reduced unimodular test words.

Words are over Z/3 = {e, x, y} with 2..5 t-letters.  The output file is
committed (tests/data/rewrite_corpus.json) so the test suite never depends
on generator drift; rerun only to regenerate deliberately.
"""

import json
import os
import random
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from relpres.freeprod import FreeProduct
from relpres.groups import cyclic_group
from relpres.words import is_cyclically_reduced, is_unimodular, parse_word, word_str

SEED = 0xC0FFEE
TARGET = 50


def main() -> None:
    z3 = cyclic_group(3, ["e", "x", "y"])
    base = FreeProduct(z3, 0)
    rng = random.Random(SEED)
    corpus = ["x t y t^-1 x t"]  # fixed first fixture
    seen = set(corpus)
    names = ["e", "x", "y"]
    while len(corpus) < TARGET:
        # an exponent sum of one forces an odd t-letter count
        n = rng.choice((3, 3, 5, 5, 5))
        while True:
            eps = [rng.choice((1, -1)) for _ in range(n)]
            if sum(eps) == 1:
                break
        tokens = []
        for i in range(n):
            g = rng.choice(names)
            if g != "e":
                tokens.append(g)
            tokens.append("t" if eps[i] == 1 else "t^-1")
        text = " ".join(tokens)
        try:
            w = parse_word(text, base).free_reduce()
        except Exception:
            continue
        if not (is_unimodular(w) and is_cyclically_reduced(w)):
            continue
        if w.t_count < 3:
            continue
        canon = word_str(w)
        if canon in seen:
            continue
        seen.add(canon)
        corpus.append(canon)
    out = os.path.join(os.path.dirname(__file__), "..", "tests", "data",
                       "rewrite_corpus.json")
    with open(out, "w", encoding="utf-8") as fh:
        json.dump({"group": "z3", "names": names, "words": corpus}, fh, indent=1)
        fh.write("\n")
    print(f"wrote {len(corpus)} words to {out}")


if __name__ == "__main__":
    main()
