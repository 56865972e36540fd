import pytest

from textkit.wrap import indent_lines, pad_center, truncate, wrap


def test_wrap():
    assert wrap("the quick brown fox jumps", 10) == ["the quick", "brown fox", "jumps"]
    assert wrap("a b c", 5) == ["a b c"]
    assert wrap("a b c", 3) == ["a b", "c"]
    assert wrap("", 4) == []
    with pytest.raises(ValueError):
        wrap("x", 0)


def test_truncate():
    assert truncate("hello world", 8) == "hello..."
    assert truncate("short", 5) == "short"
    assert truncate("abcdef", 3) == "..."
    with pytest.raises(ValueError):
        truncate("abcdef", 2)


def test_pad_center():
    assert pad_center("ab", 6) == "  ab  "
    assert pad_center("ab", 5, "*") == "*ab**"
    assert pad_center("abcdef", 3) == "abcdef"


def test_indent_lines():
    assert indent_lines("a\n\nb", "> ") == "> a\n\n> b"
    assert indent_lines("x", "  ") == "  x"
