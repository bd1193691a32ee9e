import numpy as np

from speccont.tables import config_hash, file_hash, fmt, write_matrix, write_spectrum, write_table


def test_fmt_full_precision():
    x = 1.0 / 3.0
    assert float(fmt(x)) == x
    assert fmt(None) == ""
    assert fmt("abc") == "abc"


def test_config_hash_stable_and_order_independent():
    h1 = config_hash({"b": 2, "a": 1})
    h2 = config_hash({"a": 1, "b": 2})
    assert h1 == h2
    assert h1 != config_hash({"a": 1, "b": 3})
    assert len(h1) == 16


def test_write_table_round_trip(tmp_path):
    path = tmp_path / "t.csv"
    rows = [{"x": 1, "y": 0.5}, {"x": 2, "y": None}]
    write_table(path, rows, {"seed": 7})
    text = path.read_text().splitlines()
    assert text[0] == "# seed = 7"
    assert text[1] == "x,y"
    assert text[2] == "1,0.5"
    assert text[3] == "2,"


def test_write_matrix_and_spectrum(tmp_path):
    m_path = tmp_path / "m.csv"
    write_matrix(m_path, np.array([[1.0, 2.0], [3.0, 4.0]]), {"tag": "w"})
    lines = m_path.read_text().splitlines()
    assert lines[0].startswith("#") and lines[1] == "1,2"
    s_path = tmp_path / "s.csv"
    write_spectrum(s_path, np.array([0.0, 1.0]), np.array([0.25, 0.75]))
    assert "omega,a" in s_path.read_text()


def test_file_hash_changes_with_content(tmp_path):
    p = tmp_path / "f"
    p.write_text("one")
    h1 = file_hash(p)
    p.write_text("two")
    assert file_hash(p) != h1
