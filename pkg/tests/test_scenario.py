import numpy as np
import pytest

from ricci_dynamo.geometry import DiagonalCustom, EinsteinScaled, RoundSphere
from ricci_dynamo.kinematics import GridSampled, LinearGradient
from ricci_dynamo.scenario import ConfigError, compile_expression, load_scenario, parse_scenario


def test_full_scenario_round_trip():
    sc = parse_scenario("""
[metric]
family = "EinsteinScaled"
scale = 2.0
[metric.base]
family = "RoundSphere"
radius = 2.0

[velocity]
family = "LinearGradient"
matrix = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]

[field]
vector = [1.0, 0.0, 0.0]

[frame]
mode = "explicit"
omega = [[0, 1, 0], [-1, 0, 0], [0, 0, 0]]

[region]
lower = [0.5, 0.5, 0.0]
upper = [1.0, 1.0, 1.0]
counts = 3

[time]
stop = 0.5
dt = 0.01

[options]
probe = [1.0, 1.0, 0.5]
include_vorticity = true
""")
    assert isinstance(sc.metric, EinsteinScaled) and isinstance(sc.metric.base, RoundSphere)
    assert sc.metric.einstein_constant == pytest.approx(0.5)
    assert isinstance(sc.velocity, LinearGradient)
    assert sc.frame.shape == (3, 3) and sc.frame[0, 1] == 1.0
    assert sc.region.counts == (3, 3, 3)
    assert (sc.t0, sc.t1, sc.dt) == (0.0, 0.5, 0.01)
    assert sc.include_vorticity
    np.testing.assert_array_equal(sc.probe, [1.0, 1.0, 0.5])


def test_expressions_build_custom_fields():
    sc = parse_scenario("""
[metric]
family = "DiagonalCustom"
g11 = "1 + 0.3*sin(x2)"
g33 = "exp(x1)"
[velocity]
family = "GridSampled"
v1 = "x2**2"
""")
    assert isinstance(sc.metric, DiagonalCustom) and isinstance(sc.velocity, GridSampled)
    p = np.array([0.5, np.pi / 2, 0.0])
    np.testing.assert_allclose(np.diag(sc.metric.g(p)), [1.3, 1.0, np.exp(0.5)])
    assert sc.velocity.velocity(p)[0] == pytest.approx(np.pi ** 2 / 4)


@pytest.mark.parametrize("expr", ["__import__('os')", "x1.real", "open('f')", "x4 + 1", "lambda: 1",
                                  "[x1]", "1 +"])
def test_expression_whitelist(expr):
    with pytest.raises(ConfigError):
        compile_expression(expr)


@pytest.mark.parametrize("text,field", [
    ("", "config"),
    ("[metric]\nfamily = \"Spheroid\"\n", "metric.family"),
    ("[metric]\nfamily = \"RoundSphere\"\nradius = -1\n", "metric.radius"),
    ("[velocity]\nfamily = \"LinearGradient\"\nmatrix = [1, 2]\n", "velocity.matrix"),
    ("[time]\ndt = 0\n", "time.dt"),
    ("[time]\nstart = 1\nstop = 0.5\n", "time.stop"),
    ("[region]\nlower = [0, 0, 0]\nupper = [1, 0, 1]\n", "region"),
    ("[frame]\nmode = \"explicit\"\nomega = [[1,0,0],[0,0,0],[0,0,0]]\n", "frame.omega"),
    ("[metric\n", "config"),
])
def test_config_errors_name_the_field(text, field):
    with pytest.raises(ConfigError) as err:
        parse_scenario(text)
    assert err.value.field == field


def test_config_error_carries_line_number():
    with pytest.raises(ConfigError) as err:
        parse_scenario("# header\n[metric]\nfamily = \"Spheroid\"\n")
    assert err.value.line == 3
    assert "line 3" in str(err.value)


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_scenario(tmp_path / "absent.toml")
