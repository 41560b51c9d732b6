import unicodedata

from turknlp.normalization import lower_case, remove_accent_marks, remove_punctuation


class TestLowerCase:
    def test_dotless_capital_i(self):
        # str.lower alone would give "i" here
        assert lower_case("I") == "ı"
        assert lower_case("ILIK") == "ılık"

    def test_dotted_capital_i(self):
        assert lower_case("İstanbul") == "istanbul"
        # no combining dot may survive the fold
        assert "̇" not in lower_case("İİİ")

    def test_ascii_and_other_letters(self):
        assert lower_case("ABC xyz ÇĞÖŞÜ") == "abc xyz çğöşü"

    def test_idempotent(self):
        text = "Iğdır'DAN İzmİr'e 42 KM"
        assert lower_case(lower_case(text)) == lower_case(text)


class TestRemovePunctuation:
    def test_common_marks(self):
        assert remove_punctuation("bir, iki. üç!") == "bir iki üç"

    def test_keeps_symbols_and_digits(self):
        # '+' and '=' are category Sm, not punctuation
        assert remove_punctuation("2+2=4") == "2+2=4"

    def test_matches_category_scan(self):
        text = "«Dr. Ayşe'nin %50'si — (gerçekten mi?)»"
        expect = "".join(c for c in text
                         if not unicodedata.category(c).startswith("P"))
        assert remove_punctuation(text) == expect


class TestRemoveAccentMarks:
    def test_turkish_letters(self):
        assert remove_accent_marks("çağrı şöför üzüm") == "cagri sofor uzum"

    def test_circumflex(self):
        assert remove_accent_marks("kâğıt âlem") == "kagit alem"

    def test_uppercase(self):
        assert remove_accent_marks("ÇĞİÖŞÜ ÂÎÛ") == "CGIOSU AIU"

    def test_passthrough(self):
        assert remove_accent_marks("plain text 123") == "plain text 123"
