import os
from pathlib import Path

import pytest

import gridground as gg

ROOT = Path(os.environ.get("GRIDGROUND_SOURCE_DIR", Path(__file__).resolve().parents[2]))


@pytest.fixture(scope="module")
def desk():
    return gg.Config.load(str(ROOT / "configs" / "desk.json"))


def test_parse_reference_sentences(desk):
    assert (
        gg.parse("pick up the apple to the right of the black mug", desk)
        == "detect:apple detect:black detect:mug and:1,2 shift:right-of:3 and:0,4 locate:5"
    )
    assert gg.parse("drop it in front of the mug", desk) == "held detect:mug position:in-front-of:0,1"
    assert gg.expression("detect:mug locate:0") == "locate(detect(mug))"


def test_parse_error_is_raised(desk):
    with pytest.raises(gg.GridgroundError, match="UnknownWord"):
        gg.parse("pick up the spaceship", desk)


def test_generate_is_seeded(desk):
    a = gg.generate(desk, 5, 3, 42)
    b = gg.generate(desk, 5, 3, 42)
    assert a == b
    assert len(a) == 3
    assert all(s["scenario"] == 5 for s in a)
    assert gg.parse(a[0]["instruction"], desk) == a[0]["graph"]


def test_indicator_weights_solve_scenario_one(desk):
    params = gg.Params.indicator(desk)
    assert gg.evaluate(params, desk, 1, 50, 3) == 0.0


def test_short_training_and_weight_file(desk, tmp_path):
    params = gg.Params.initialized(desk, 11)
    report = gg.train(desk, params, scenarios=[1], max_samples=1000, seed=2)
    assert report["stages"][0]["samples"] <= 1000
    assert params.steps == report["stages"][0]["samples"]
    path = tmp_path / "w.ggw"
    params.save(str(path))
    back = gg.Params.load(str(path), desk)
    assert back.values == params.values


def test_showcase_session(desk):
    s = gg.Session(desk, gg.Params.indicator(desk))
    first = s.submit("pick up the ball in front of the can")
    assert first["action"] == {"kind": "pickup", "anchor": "ball-1"}
    assert s.held == "ball-1"
    second = s.submit("drop it in front of the mug")
    assert second["action"]["kind"] == "place"
    assert second["action"]["cell"] == [5, 3, 0]
    pot = next(a for a in s.state()["anchors"] if a["id"] == "pot-1")
    assert pot["top"] == "mug"
    assert s.replay_matches()
