import pytest

from gradsync.clocks import DriftKind
from gradsync.config import ConfigError, parse_scenario_config, without_rbs
from gradsync.simengine import DelayKind
from gradsync.topology import TopologyKind


def test_path5_defaults():
    sc = parse_scenario_config("topology.kind = path\ntopology.n = 5\n")
    assert sc.topology.kind is TopologyKind.PATH and sc.topology.n == 5
    assert sc.params.rho == 1e-4
    assert sc.params.mu == pytest.approx(1e-2)
    assert sc.params.lam == 4.0
    assert (sc.topology.beta_min, sc.topology.beta_max) == (0.0, 1.0)
    assert sc.drift is DriftKind.CONSTANT
    assert sc.delay is DelayKind.SEEDED_UNIFORM


def test_full_file_with_comments():
    text = """
    # ring under adversarial drift
    topology.kind = ring   # trailing comment
    topology.n = 12
    params.rho = 1e-3
    params.mu = 0.05
    params.rbs_enabled = false
    adversary.drift = alternating_extremes
    adversary.delay = fixed_max
    sim.duration = 250
    sim.seed = 9
    """
    sc = parse_scenario_config(text)
    assert sc.topology.n == 12
    assert sc.params.mu == 0.05
    assert not sc.params.rbs_enabled
    assert sc.delay is DelayKind.FIXED_MAX
    assert (sc.duration, sc.seed) == (250.0, 9)


def test_random_geometric_default_radius():
    sc = parse_scenario_config("topology.kind = random_geometric\ntopology.n = 20")
    assert sc.topology.radius == 0.3


def test_rho_out_of_range():
    with pytest.raises(ConfigError, match="rho out of range"):
        parse_scenario_config("params.rho = 1.5")


def test_unknown_key_is_named():
    with pytest.raises(ConfigError, match="bogus.key"):
        parse_scenario_config("bogus.key = 1")


@pytest.mark.parametrize(
    "text",
    ["topology.n = five", "topology.kind = torus", "params.rbs_enabled = maybe", "no equals sign"],
)
def test_unparsable(text):
    with pytest.raises(ConfigError):
        parse_scenario_config(text)


def test_invariant_violations():
    with pytest.raises(ConfigError):
        parse_scenario_config("params.beta_min = 2\nparams.beta_max = 1")
    with pytest.raises(ConfigError):
        parse_scenario_config("sim.duration = -1")


def test_without_rbs():
    sc = parse_scenario_config("topology.n = 4")
    assert not without_rbs(sc).params.rbs_enabled
    assert sc.params.rbs_enabled
