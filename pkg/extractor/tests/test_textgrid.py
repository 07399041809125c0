"""Long-format TextGrid parser tests."""

from __future__ import annotations

import pytest

from phonemdd_extractor import TextGridParseError, find_tier, parse_textgrid

from conftest import render_textgrid


def test_parses_intervals_in_order(tmp_path):
    path = tmp_path / "a.TextGrid"
    path.write_text(render_textgrid([(0.0, 0.5, "sil"), (0.5, 1.0, "AH1")]))
    tiers = parse_textgrid(path)
    assert len(tiers) == 1
    tier = find_tier(tiers, "phones")
    assert [(i.xmin, i.xmax, i.text) for i in tier.intervals] == [
        (0.0, 0.5, "sil"),
        (0.5, 1.0, "AH1"),
    ]


def test_multiple_tiers_and_lookup(tmp_path):
    words = render_textgrid([(0.0, 1.0, "hello")], tier_name="words")
    phones = render_textgrid([(0.0, 1.0, "HH")], tier_name="phones")
    # merge the two item blocks into one file
    merged = words + phones.split("item []: \n", 1)[1].replace("item [1]:", "item [2]:")
    path = tmp_path / "two.TextGrid"
    path.write_text(merged)
    tiers = parse_textgrid(path)
    assert [t.name for t in tiers] == ["words", "phones"]
    assert find_tier(tiers, "phones").intervals[0].text == "HH"


def test_missing_tier_reports_available(tmp_path):
    path = tmp_path / "a.TextGrid"
    path.write_text(render_textgrid([(0.0, 1.0, "AH")], tier_name="words"))
    with pytest.raises(TextGridParseError, match="available: words"):
        find_tier(parse_textgrid(path), "phones")


def test_empty_text_and_escaped_quotes(tmp_path):
    path = tmp_path / "a.TextGrid"
    path.write_text(render_textgrid([(0.0, 0.4, ""), (0.4, 1.0, 'say ""hi""')]))
    tier = parse_textgrid(path)[0]
    assert tier.intervals[0].text == ""
    assert tier.intervals[1].text == 'say "hi"'


def test_not_a_textgrid(tmp_path):
    path = tmp_path / "bogus.TextGrid"
    path.write_text("just some text\n")
    with pytest.raises(TextGridParseError, match="ooTextFile"):
        parse_textgrid(path)


def test_missing_file(tmp_path):
    with pytest.raises(TextGridParseError):
        parse_textgrid(tmp_path / "absent.TextGrid")


def test_no_interval_tiers(tmp_path):
    path = tmp_path / "points.TextGrid"
    path.write_text(
        'File type = "ooTextFile"\n'
        'Object class = "TextGrid"\n\n'
        "xmin = 0 \nxmax = 1 \ntiers? <exists> \nsize = 1 \n"
        "item []: \n    item [1]:\n"
        '        class = "TextTier" \n        name = "events" \n'
        "        xmin = 0 \n        xmax = 1 \n        points: size = 0 \n"
    )
    with pytest.raises(TextGridParseError, match="no interval tiers"):
        parse_textgrid(path)
