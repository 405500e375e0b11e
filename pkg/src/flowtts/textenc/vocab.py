"""Character vocabulary: union of per-language charsets plus specials."""

from __future__ import annotations

from ..errors import DataError

PAD = "<pad>"
BLANK = "<blank>"


class Vocabulary:
    def __init__(self, symbols: list[str]):
        if len(set(symbols)) != len(symbols):
            raise ValueError("duplicate symbols in vocabulary")
        self.symbols = list(symbols)
        self.index = {s: i for i, s in enumerate(self.symbols)}

    def __len__(self) -> int:
        return len(self.symbols)

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.symbols == other.symbols

    def encode(self, text: str) -> list[int]:
        """Lowercase, then map each character; unknown characters are an error."""
        ids = []
        for ch in text.lower():
            if ch not in self.index:
                raise DataError(f"character {ch!r} is not in the vocabulary")
            ids.append(self.index[ch])
        if not ids:
            raise DataError("cannot encode an empty text")
        return ids

    def save(self, path: str) -> None:
        with open(path, "w") as f:
            for s in self.symbols:
                f.write(s + "\n")

    @classmethod
    def load(cls, path: str) -> "Vocabulary":
        try:
            with open(path) as f:
                symbols = [line.rstrip("\n") for line in f if line.rstrip("\n")]
        except FileNotFoundError as e:
            raise DataError(f"vocabulary file not found: {path}") from e
        return cls(symbols)


def char_vocab(charsets) -> Vocabulary:
    """Build a vocabulary from per-language character sets.

    Accepts an iterable of charsets or a {language_id: charset} mapping.
    Ordering is stable: specials first, then the sorted character union.
    """
    if hasattr(charsets, "values"):
        charsets = list(charsets.values())
    union = set()
    for cs in charsets:
        union.update(cs.lower())
    return Vocabulary([PAD, BLANK] + sorted(union))
