import pytest

from risk_corners.plotting import read_template, write_plot_script


def test_line_script(tmp_path):
    csv_path = tmp_path / "sweep.csv"
    script = write_plot_script(csv_path, "B", "argmax").read_text()
    assert 'frame["B"], frame["argmax"]' in script
    assert '"sweep.csv"' in script
    assert "argmax vs B" in script
    assert "$" not in script


def test_grouped_script(tmp_path):
    path = write_plot_script(
        tmp_path / "curves.csv", "mean_B", "optimal_p", "Curves", group="sigma"
    )
    assert path == tmp_path / "curves.plot.py"
    assert "sigma" in path.read_text()


def test_unknown_template():
    with pytest.raises(ValueError):
        read_template("pie")
