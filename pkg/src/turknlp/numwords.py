"""Turkish cardinal readings of decimal numerals."""

from .errors import InputError, ParseError

_ONES = ["", "bir", "iki", "üç", "dört", "beş", "altı", "yedi", "sekiz", "dokuz"]
_TENS = ["", "on", "yirmi", "otuz", "kırk", "elli", "altmış", "yetmiş", "seksen", "doksan"]
# Scale words by power-of-1000 group, lowest first.
_SCALES = ["", "bin", "milyon", "milyar", "trilyon"]

_MAX_ABS = 10**15


def _three_digits(n: int) -> list[str]:
    # 0 <= n < 1000; "bir yüz" is never said, plain "yüz" is.
    words = []
    h, rest = divmod(n, 100)
    if h == 1:
        words.append("yüz")
    elif h > 1:
        words.append(_ONES[h])
        words.append("yüz")
    t, o = divmod(rest, 10)
    if t:
        words.append(_TENS[t])
    if o:
        words.append(_ONES[o])
    return words


def _integer_words(n: int) -> list[str]:
    if n == 0:
        return ["sıfır"]
    groups = []
    while n > 0:
        n, g = divmod(n, 1000)
        groups.append(g)
    words = []
    for idx in range(len(groups) - 1, -1, -1):
        g = groups[idx]
        if g == 0:
            continue
        # "bin" absorbs a leading "bir"; "milyon" and above keep it.
        if g == 1 and idx == 1:
            words.append("bin")
            continue
        words.extend(_three_digits(g))
        if idx > 0:
            words.append(_SCALES[idx])
    return words


def number_to_words(number: str) -> str:
    """Read a decimal numeral string as Turkish cardinal words.

    Accepts an optional sign, an integer part, and an optional fractional part
    separated by '.' or ','. The fraction is read after "virgül": leading zeros
    digit by digit, the remainder as a grouped number. |value| must be < 10^15.
    """
    s = number.strip()
    if not s:
        raise ParseError("empty numeral")
    sign = ""
    if s[0] in "+-":
        sign, s = s[0], s[1:]
    for sep in (",", "."):
        if sep in s:
            int_part, _, frac_part = s.partition(sep)
            break
    else:
        int_part, frac_part = s, ""
    if not int_part.isdigit() or (frac_part != "" and not frac_part.isdigit()):
        raise ParseError(f"not a decimal numeral: {number!r}")
    value = int(int_part)
    if value >= _MAX_ABS:
        raise InputError(f"numeral out of range (|n| must be < 10^15): {number!r}")

    words = []
    if sign == "-":
        words.append("eksi")
    words.extend(_integer_words(value))
    if frac_part:
        words.append("virgül")
        stripped = frac_part.lstrip("0")
        words.extend(["sıfır"] * (len(frac_part) - len(stripped)))
        if stripped:
            if int(stripped) >= _MAX_ABS:
                raise InputError(f"fractional part out of range: {number!r}")
            words.extend(_integer_words(int(stripped)))
    return " ".join(words)
