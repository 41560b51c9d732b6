"""Character-level text standardization: Turkish case folding, punctuation and accent removal."""

import unicodedata

# Python's str.lower() maps 'İ' to 'i' + U+0307 and leaves 'I' -> 'i', both wrong
# for Turkish. Handle the dotted/dotless pair explicitly before the generic fold.
_TURKISH_LOWER = {ord("I"): "ı", ord("İ"): "i"}

_ACCENT_MAP = {
    "ç": "c", "ğ": "g", "ı": "i", "ö": "o", "ş": "s", "ü": "u",
    "â": "a", "î": "i", "û": "u",
    "Ç": "C", "Ğ": "G", "İ": "I", "Ö": "O", "Ş": "S", "Ü": "U",
    "Â": "A", "Î": "I", "Û": "U",
}


def lower_case(text: str) -> str:
    """Lowercase with Turkish dotted/dotless i handling ('I' -> 'ı', 'İ' -> 'i')."""
    return text.translate(_TURKISH_LOWER).lower()


def remove_punctuation(text: str) -> str:
    """Drop every Unicode punctuation character (category P*), keep everything else."""
    return "".join(ch for ch in text if not unicodedata.category(ch).startswith("P"))


def remove_accent_marks(text: str) -> str:
    """Map Turkish accented letters to their ASCII counterparts; other characters pass through."""
    return "".join(_ACCENT_MAP.get(ch, ch) for ch in text)
