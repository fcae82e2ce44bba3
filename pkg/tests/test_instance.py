"""Instance model: JSON round-trips, schema rejection, generation, checking."""

import json
import math

import pytest

from mtvrp import instance as im
from mtvrp.geometry import LinearArc


def small_instance():
    return im.Instance(
        n_agents=2, v_max=1.0, capacity=2.0, depot=(0.0, 0.0),
        targets=(
            im.Target(1, 1.0, (LinearArc(10, 20, 5, 0, 0.1, 0.0),
                               LinearArc(30, 40, -5, 2, 0.0, 0.2))),
            im.Target(2, 1.0, (LinearArc(15, 25, 0, 8, -0.2, 0.0),)),
        ))


class TestRoundTrip:
    def test_dict_round_trip_is_fixpoint(self):
        inst = small_instance()
        d1 = im.to_dict(inst)
        d2 = im.to_dict(im.from_dict(d1))
        assert d1 == d2

    def test_file_round_trip(self, tmp_path):
        inst = small_instance()
        path = tmp_path / "inst.json"
        im.save(inst, path)
        again = im.load(path)
        assert im.to_dict(again) == im.to_dict(inst)
        # Byte-identical on a second save.
        path2 = tmp_path / "inst2.json"
        im.save(again, path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_solution_round_trip(self, tmp_path):
        sol = im.Solution(cost=12.5, tours=(
            im.SolutionTour(sequence=(
                im.TourStop(0, 0, 0.0, (0.0, 0.0)),
                im.TourStop(1, 1, 11.0, (5.1, 0.0)),
                im.TourStop(0, 0, 25.0, (0.0, 0.0))), load=1.0),))
        path = tmp_path / "sol.json"
        im.save_solution(sol, path)
        assert im.load_solution(path) == sol


class TestSchemaRejection:
    def base(self):
        return im.to_dict(small_instance())

    def test_missing_vmax(self):
        d = self.base()
        del d["v_max"]
        with pytest.raises(im.InstanceError, match=r"\$\.v_max"):
            im.from_dict(d)

    def test_bad_target_id_order(self):
        d = self.base()
        d["targets"][0]["id"] = 7
        with pytest.raises(im.InstanceError, match=r"targets\[0\]\.id"):
            im.from_dict(d)

    def test_reversed_window(self):
        d = self.base()
        d["targets"][0]["windows"][0]["t1"] = 1.0
        with pytest.raises(im.InstanceError, match=r"windows\[0\]"):
            im.from_dict(d)

    def test_overlapping_windows(self):
        d = self.base()
        d["targets"][0]["windows"][1]["t0"] = 12.0
        with pytest.raises(im.InstanceError, match="disjoint"):
            im.from_dict(d)

    def test_target_faster_than_vmax(self):
        d = self.base()
        d["targets"][0]["windows"][0]["vel"] = [2.0, 0.0]
        with pytest.raises(im.InstanceError, match="exceeds v_max"):
            im.from_dict(d)

    def test_demand_exceeds_capacity(self):
        d = self.base()
        d["targets"][1]["demand"] = 99.0
        with pytest.raises(im.InstanceError, match="exceeds capacity"):
            im.from_dict(d)

    def test_non_numeric_position(self):
        d = self.base()
        d["depot"] = ["a", 0]
        with pytest.raises(im.InstanceError, match=r"\$\.depot"):
            im.from_dict(d)

    def test_invalid_json_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(im.InstanceError, match="invalid JSON"):
            im.load(path)


class TestGenerate:
    def test_deterministic(self):
        a = im.generate(seed=42, n_tar=4, n_agt=2)
        b = im.generate(seed=42, n_tar=4, n_agt=2)
        assert im.to_dict(a) == im.to_dict(b)
        c = im.generate(seed=43, n_tar=4, n_agt=2)
        assert im.to_dict(a) != im.to_dict(c)

    def test_default_capacity_is_ceil_ratio(self):
        inst = im.generate(seed=1, n_tar=5, n_agt=2)
        assert inst.capacity == 3.0
        inst = im.generate(seed=1, n_tar=4, n_agt=2)
        assert inst.capacity == 2.0

    def test_shape_and_validity(self):
        inst = im.generate(seed=7, n_tar=3, n_agt=2, windows_per_target=2,
                           total_window_len=20.0)
        assert inst.n_targets == 3
        for tar in inst.targets:
            assert len(tar.windows) == 2
            span = sum(a.end_time - a.start_time for a in tar.windows)
            assert span == pytest.approx(20.0)
        im._validate(inst)  # raises on any invariant break

    def test_bad_args(self):
        with pytest.raises(ValueError):
            im.generate(seed=0, n_tar=0, n_agt=1)
        with pytest.raises(ValueError):
            im.generate(seed=0, n_tar=1, n_agt=1, total_window_len=-1.0)


class TestVerify:
    def good_pair(self):
        inst = im.Instance(
            n_agents=1, v_max=1.0, capacity=1.0, depot=(0.0, 0.0),
            targets=(im.Target(1, 1.0, (LinearArc(5, 20, 5, 0, 0, 0),)),))
        sol = im.Solution(cost=10.0, tours=(
            im.SolutionTour(sequence=(
                im.TourStop(0, 0, 0.0, (0.0, 0.0)),
                im.TourStop(1, 1, 5.0, (5.0, 0.0)),
                im.TourStop(0, 0, 10.0, (0.0, 0.0))), load=1.0),))
        return inst, sol

    def test_valid_solution_passes(self):
        inst, sol = self.good_pair()
        rep = im.verify(inst, sol)
        assert rep.ok and not rep.violations
        assert rep.recomputed_cost == pytest.approx(10.0)

    def test_uncovered_target(self):
        inst, sol = self.good_pair()
        empty = im.Solution(cost=0.0, tours=())
        rep = im.verify(inst, empty)
        assert not rep.ok
        assert any("not covered" in v for v in rep.violations)

    def test_speed_violation(self):
        inst, sol = self.good_pair()
        bad = im.Solution(cost=10.0, tours=(
            im.SolutionTour(sequence=(
                im.TourStop(0, 0, 0.0, (0.0, 0.0)),
                im.TourStop(1, 1, 4.0, (5.0, 0.0)),
                im.TourStop(0, 0, 10.0, (0.0, 0.0))), load=1.0),))
        rep = im.verify(inst, bad)
        assert not rep.ok
        assert any("speed" in v or "window" in v for v in rep.violations)

    def test_time_outside_window(self):
        inst, _ = self.good_pair()
        bad = im.Solution(cost=60.0, tours=(
            im.SolutionTour(sequence=(
                im.TourStop(0, 0, 0.0, (0.0, 0.0)),
                im.TourStop(1, 1, 30.0, (5.0, 0.0)),
                im.TourStop(0, 0, 60.0, (0.0, 0.0))), load=1.0),))
        rep = im.verify(inst, bad)
        assert not rep.ok
        assert any("outside window" in v for v in rep.violations)

    def test_wrong_cost(self):
        inst, sol = self.good_pair()
        bad = im.Solution(cost=3.0, tours=sol.tours)
        rep = im.verify(inst, bad)
        assert not rep.ok
        assert any("cost" in v for v in rep.violations)

    def test_too_many_tours(self):
        inst, sol = self.good_pair()
        double = im.Solution(cost=20.0, tours=sol.tours + sol.tours)
        rep = im.verify(inst, double)
        assert not rep.ok
        assert any("exceed" in v for v in rep.violations)

    def test_position_off_trajectory(self):
        inst, _ = self.good_pair()
        bad = im.Solution(cost=10.0, tours=(
            im.SolutionTour(sequence=(
                im.TourStop(0, 0, 0.0, (0.0, 0.0)),
                im.TourStop(1, 1, 6.0, (4.0, 0.0)),
                im.TourStop(0, 0, 10.0, (0.0, 0.0))), load=1.0),))
        rep = im.verify(inst, bad)
        assert not rep.ok
        assert any("trajectory" in v for v in rep.violations)


def test_horizon_covers_all_windows():
    inst = small_instance()
    h = inst.horizon()
    for tar in inst.targets:
        for arc in tar.windows:
            assert h > arc.end_time
