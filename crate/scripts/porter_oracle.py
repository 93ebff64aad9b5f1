#!/usr/bin/env python3
"""Regenerate the Porter stemmer expected outputs used by the core test suite.

Usage: python3 scripts/porter_oracle.py [crates/core/tests/data]
"""
import sys
from pathlib import Path

from nltk.stem.porter import PorterStemmer


def main() -> None:
    data = Path(sys.argv[1] if len(sys.argv) > 1 else "crates/core/tests/data")
    stemmer = PorterStemmer(mode=PorterStemmer.MARTIN_EXTENSIONS)
    words = (data / "porter_voc.txt").read_text().split()
    out = "\n".join(stemmer.stem(w, to_lowercase=False) for w in words) + "\n"
    (data / "porter_output.txt").write_text(out)
    print(f"{len(words)} words")


if __name__ == "__main__":
    main()
