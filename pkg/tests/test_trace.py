import pytest

from fsdv.core import Classification
from fsdv.metrics import report_to_json
from fsdv.sim import ScenarioConfig, run
from fsdv.trace import TraceImportError, import_trace

FCD_3V_2T = """<?xml version="1.0" encoding="UTF-8"?>
<fcd-export>
  <timestep time="0.00">
    <vehicle id="veh0" x="10.0" y="0.0" angle="90" speed="20.0"/>
    <vehicle id="veh1" x="40.0" y="0.0" angle="90" speed="21.0"/>
    <vehicle id="veh2" x="70.0" y="3.7" angle="90" speed="19.5"/>
  </timestep>
  <timestep time="0.10">
    <vehicle id="veh0" x="12.0" y="0.0" angle="90" speed="20.0"/>
    <vehicle id="veh1" x="42.1" y="0.0" angle="90" speed="21.0"/>
    <vehicle id="veh2" x="71.9" y="3.7" angle="90" speed="19.5"/>
  </timestep>
</fcd-export>
"""


def write_trace(tmp_path, text, name="trace.xml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def config(**overrides):
    base = dict(n_vehicles=3, rogue_fraction=0.0, duration=1.0, seed=2)
    base.update(overrides)
    return ScenarioConfig(**base)


class TestImportTrace:
    def test_structure_mapping(self, tmp_path):
        playback = import_trace(write_trace(tmp_path, FCD_3V_2T), config())
        assert len(playback.frames) == 2
        assert playback.n_vehicles == 3
        assert playback.id_map == {"veh0": 0, "veh1": 1, "veh2": 2}

    def test_too_few_vehicles(self, tmp_path):
        text = FCD_3V_2T.replace(
            '<vehicle id="veh1" x="40.0" y="0.0" angle="90" speed="21.0"/>', ""
        ).replace(
            '<vehicle id="veh2" x="70.0" y="3.7" angle="90" speed="19.5"/>', ""
        ).replace(
            '<vehicle id="veh1" x="42.1" y="0.0" angle="90" speed="21.0"/>', ""
        ).replace(
            '<vehicle id="veh2" x="71.9" y="3.7" angle="90" speed="19.5"/>', ""
        )
        with pytest.raises(TraceImportError, match="at least 2"):
            import_trace(write_trace(tmp_path, text), config())

    def test_missing_speed_names_element(self, tmp_path):
        text = FCD_3V_2T.replace(
            '<vehicle id="veh1" x="42.1" y="0.0" angle="90" speed="21.0"/>',
            '<vehicle id="veh1" x="42.1" y="0.0" angle="90"/>',
        )
        with pytest.raises(TraceImportError, match=r"timestep\[1\]/vehicle\[1\].*speed"):
            import_trace(write_trace(tmp_path, text), config())

    def test_malformed_xml(self, tmp_path):
        with pytest.raises(TraceImportError, match="malformed"):
            import_trace(write_trace(tmp_path, "<fcd-export><timestep>"), config())

    def test_non_numeric_attribute(self, tmp_path):
        text = FCD_3V_2T.replace('x="40.0"', 'x="fast"')
        with pytest.raises(TraceImportError, match="not a number"):
            import_trace(write_trace(tmp_path, text), config())

    def test_rogue_marking_from_config(self, tmp_path):
        cfg = config(rogue_fraction=0.4, sybil_ids_per_rogue=2)
        playback = import_trace(write_trace(tmp_path, FCD_3V_2T), cfg)
        assert len(playback.rogue_ids) == 1  # floor(0.4 * 3)
        (rogue,) = playback.rogue_ids
        assert len(playback.fabricated[rogue]) == 2


class TestTracePlayback:
    def test_rounds_follow_timesteps(self, tmp_path):
        cfg = config()
        playback = import_trace(write_trace(tmp_path, FCD_3V_2T), cfg)
        report = run(cfg, trace=playback)
        assert report.rounds == 2

    def test_deterministic(self, tmp_path):
        path = write_trace(tmp_path, FCD_3V_2T)
        a = run(config(), trace=import_trace(path, config()))
        b = run(config(), trace=import_trace(path, config()))
        assert report_to_json(a) == report_to_json(b)

    def test_rogues_detected_in_playback(self, tmp_path):
        # lossless channel; the marked rogue misreports under all its ids.
        # flow-model calibration is matched to the trace's ~20 m/s traffic so
        # honest reports sit near the model speed.
        from fsdv.traffic import GreenshieldParams

        cfg = config(
            rogue_fraction=0.34, base_loss=0.0, density_loss_coeff=0.0,
            sybil_ids_per_rogue=3,
            greenshield=GreenshieldParams(s_max=21.0, rho_max=2000.0),
        )
        playback = import_trace(write_trace(tmp_path, FCD_3V_2T), cfg)
        report = run(cfg, trace=playback)
        rogue_identities = [
            i for i, (t, _) in report.per_identity.items() if t is Classification.ROGUE
        ]
        assert len(rogue_identities) == 4
        assert report.tpr == 1.0
        assert report.fpr == 0.0
