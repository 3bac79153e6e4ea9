#!/usr/bin/env python3
"""Build the desk-scale training and lexicon fixtures under data/ from the
wordfreq package data (CC-BY-SA 4.0, https://github.com/rspeer/wordfreq).

Usage: prepare_wordfreq.py WORDFREQ_DATA_DIR OUT_DATA_DIR

Word lists are written as `word<TAB>count` where count is the word's
frequency scaled to a one-million-token corpus (minimum 1). Forms containing
digits are dropped, and so are Swedish and English forms with a tripled letter. The Swedish
lexicon is the large Swedish list restricted to 2..11 letters of the Swedish
alphabet.
"""
import gzip
import pathlib
import re
import sys

import msgpack

TOKENS = 1_000_000
SWEDISH = re.compile(r"^[a-zåäö]{2,11}$")
# Neither Swedish nor English spelling has a letter three times in a row;
# such forms in web text are elongated interjections (såååå, mmm) or junk (xxx).
TRIPLED = re.compile(r"(.)\1\1")


def load(path):
    with gzip.open(path) as f:
        data = msgpack.load(f, raw=False)
    header, buckets = data[0], data[1:]
    assert header.get("format") == "cB"
    for centibels, words in enumerate(buckets):
        freq = 10.0 ** (-centibels / 100.0)
        for w in words:
            yield w, freq


def write_wordlist(src, dst, keep=lambda w: True):
    rows = []
    for w, freq in load(src):
        if not keep(w):
            continue
        rows.append((w, max(1, round(freq * TOKENS))))
    with open(dst, "w", encoding="utf-8") as out:
        for w, n in rows:
            out.write(f"{w}\t{n}\n")
    return len(rows), sum(n for _, n in rows)


def main():
    src = pathlib.Path(sys.argv[1])
    out = pathlib.Path(sys.argv[2])
    (out / "wordlists").mkdir(parents=True, exist_ok=True)
    (out / "lexicon").mkdir(parents=True, exist_ok=True)
    for lang in ("sv", "de", "en", "ar"):
        def keep(w, lang=lang):
            if any(c.isdigit() for c in w):
                return False
            return lang not in ("sv", "en") or not TRIPLED.search(w)
        n, tokens = write_wordlist(src / f"small_{lang}.msgpack.gz",
                                   out / "wordlists" / f"{lang}.tsv", keep=keep)
        print(f"{lang}: {n} types, {tokens} tokens")
    seen = set()
    with open(out / "lexicon" / "sv_words.txt", "w", encoding="utf-8") as lex:
        for w, _ in load(src / "large_sv.msgpack.gz"):
            if SWEDISH.match(w) and w not in seen:
                seen.add(w)
                lex.write(w + "\n")
    print(f"lexicon: {len(seen)} forms")


if __name__ == "__main__":
    main()
