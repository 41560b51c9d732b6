import numpy as np
import pytest

from turknlp.errors import InputError, ParseError
from turknlp.numwords import number_to_words

_ONES = {"bir": 1, "iki": 2, "üç": 3, "dört": 4, "beş": 5, "altı": 6,
         "yedi": 7, "sekiz": 8, "dokuz": 9}
_TENS = {"on": 10, "yirmi": 20, "otuz": 30, "kırk": 40, "elli": 50,
         "altmış": 60, "yetmiş": 70, "seksen": 80, "doksan": 90}
_SCALES = {"bin": 10**3, "milyon": 10**6, "milyar": 10**9, "trilyon": 10**12}


def words_to_int(words):
    """Independent reading of a Turkish cardinal, accumulator style."""
    total, group = 0, 0
    for w in words:
        if w == "sıfır":
            pass
        elif w in _ONES:
            group += _ONES[w]
        elif w in _TENS:
            group += _TENS[w]
        elif w == "yüz":
            group = max(group, 1) * 100
        elif w in _SCALES:
            total += max(group, 1) * _SCALES[w]
            group = 0
        else:
            raise AssertionError(f"unexpected word {w!r}")
    return total + group


class TestGolden:
    CASES = [
        ("0", "sıfır"),
        ("7", "yedi"),
        ("10", "on"),
        ("25", "yirmi beş"),
        ("100", "yüz"),
        ("111", "yüz on bir"),
        ("200", "iki yüz"),
        ("1000", "bin"),
        ("1001", "bin bir"),
        ("2000", "iki bin"),
        ("41000", "kırk bir bin"),
        ("1000000", "bir milyon"),
        ("2345678", "iki milyon üç yüz kırk beş bin altı yüz yetmiş sekiz"),
        ("1000000000", "bir milyar"),
        ("-3", "eksi üç"),
        ("+12", "on iki"),
        ("3,14", "üç virgül on dört"),
        ("3.14", "üç virgül on dört"),
        ("0,05", "sıfır virgül sıfır beş"),
        ("12,300", "on iki virgül üç yüz"),
    ]

    def test_cases(self):
        for numeral, expect in self.CASES:
            assert number_to_words(numeral) == expect, numeral


class TestRoundTrip:
    def test_random_integers(self):
        rng = np.random.default_rng(5)
        for _ in range(400):
            digits = int(rng.integers(1, 15))
            n = int(rng.integers(0, 10**digits))
            assert words_to_int(number_to_words(str(n)).split()) == n

    def test_random_negatives(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            n = int(rng.integers(1, 10**9))
            words = number_to_words(f"-{n}").split()
            assert words[0] == "eksi"
            assert words_to_int(words[1:]) == n

    def test_random_decimals(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            whole = int(rng.integers(0, 10**6))
            frac = "".join(str(d) for d in rng.integers(0, 10, size=int(rng.integers(1, 7))))
            words = number_to_words(f"{whole},{frac}").split()
            cut = words.index("virgül")
            assert words_to_int(words[:cut]) == whole
            tail = words[cut + 1:]
            zeros = 0
            while zeros < len(tail) and tail[zeros] == "sıfır":
                zeros += 1
            if zeros == len(tail):
                # fraction was all zeros; one "sıfır" word per digit
                assert frac == "0" * zeros
            else:
                rest = words_to_int(tail[zeros:])
                assert frac == "0" * zeros + str(rest)


class TestErrors:
    def test_empty(self):
        with pytest.raises(ParseError):
            number_to_words("")

    def test_not_a_numeral(self):
        for bad in ("12a", "one", "1.2.3", "--4", "1,2,3"):
            with pytest.raises(ParseError):
                number_to_words(bad)

    def test_out_of_range(self):
        with pytest.raises(InputError):
            number_to_words(str(10**15))
        with pytest.raises(InputError):
            number_to_words("1," + "9" * 16)

    def test_boundary_in_range(self):
        assert number_to_words(str(10**15 - 1)).split()[-1] == "dokuz"
