"""Shared helpers: a naive letter-level reduction oracle and random builders."""

from __future__ import annotations

import random
from typing import List, Tuple

from ergolab import AlgebraElement, Alphabet, L2Vector, State, Word


def letters_of(word: Word) -> List[Tuple[str, int, int]]:
    """Expand a word's runs into unit letters with exponent +-1."""
    out = []
    for fam, idx, exp in word.runs:
        step = 1 if exp > 0 else -1
        out.extend([(fam, idx, step)] * abs(exp))
    return out


def naive_reduce(letters: List[Tuple[str, int, int]]) -> List[Tuple[str, int, int]]:
    """Repeatedly delete the first adjacent inverse pair until none remains."""
    out = list(letters)
    changed = True
    while changed:
        changed = False
        for i in range(len(out) - 1):
            f1, i1, e1 = out[i]
            f2, i2, e2 = out[i + 1]
            if f1 == f2 and i1 == i2 and e1 == -e2:
                del out[i : i + 2]
                changed = True
                break
    return out


def word_from_letters(alphabet: Alphabet, letters) -> Word:
    w = alphabet.identity()
    for fam, idx, exp in letters:
        w = w * alphabet.letter(fam, idx, exp)
    return w


def random_word(rng: random.Random, alphabet: Alphabet, max_letters: int = 6,
                idx_span: int = 3) -> Word:
    w = alphabet.identity()
    fams = list(alphabet.lengths.items())
    for _ in range(rng.randint(0, max_letters)):
        fam, length = rng.choice(fams)
        idx = rng.randint(0, length - 1) if length else rng.randint(-idx_span, idx_span)
        w = w * alphabet.letter(fam, idx, rng.choice([-1, 1]))
    return w


def random_element(rng: random.Random, alphabet: Alphabet, terms: int = 2,
                   max_letters: int = 4) -> AlgebraElement:
    el = AlgebraElement.zero(alphabet)
    for _ in range(terms):
        coeff = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        el = el + AlgebraElement.unitary(random_word(rng, alphabet, max_letters), coeff)
    return el


def random_vector_state(rng: random.Random, alphabet: Alphabet, support: int = 2,
                        max_letters: int = 2, idx_span: int = 2) -> State:
    vec = None
    seen = set()
    for _ in range(support):
        w = random_word(rng, alphabet, max_letters, idx_span)
        if w.runs in seen:
            continue
        seen.add(w.runs)
        amp = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        term = amp * L2Vector.basis(w)
        vec = term if vec is None else vec + term
    if vec is None or vec.norm() == 0.0:
        vec = L2Vector.basis(alphabet.identity())
    return State.vector_state(vec.normalized())
