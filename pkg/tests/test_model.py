import pytest

from mabprune import (FactoredBelief, InstanceSampler, InvalidAction, actions,
                      internal_transition, observation_likelihood, sample_case1, sample_case2)
from mabprune.model import (RATE_RANGES, dumps, instance_key, loads, mean_action_count,
                            parse_key_values, splitmix64, uniform_model)


class TestActions:
    def test_corner(self, grid6):
        assert actions(0, grid6) == {0, 1, 6}

    def test_interior(self, grid6):
        assert actions(7, grid6) == {7, 1, 6, 8, 13}

    def test_single_cell(self):
        assert actions(0, uniform_model(1, 1)) == {0}

    def test_sizes(self, grid6):
        sizes = sorted(len(actions(x, grid6)) for x in range(36))
        assert sizes.count(3) == 4 and sizes.count(4) == 16 and sizes.count(5) == 16
        assert mean_action_count(grid6) == pytest.approx(156 / 36)

    @pytest.mark.parametrize("w,h", [(1, 1), (1, 5), (2, 3), (6, 6), (4, 7)])
    def test_symmetric(self, w, h):
        model = uniform_model(w, h)
        for x in range(model.num_cells):
            for y in range(model.num_cells):
                assert (y in actions(x, model)) == (x in actions(y, model))

    def test_invalid_cell(self, grid6):
        with pytest.raises(InvalidAction):
            actions(36, grid6)
        with pytest.raises(InvalidAction):
            actions(-1, grid6)


class TestTransition:
    def test_stay_and_move(self, grid6):
        assert internal_transition(0, 0, grid6) == 0
        assert internal_transition(0, 1, grid6) == 1

    def test_non_adjacent(self, grid6):
        with pytest.raises(InvalidAction, match="not applicable"):
            internal_transition(0, 35, grid6)


class TestObservationLikelihood:
    def test_true_negative(self, grid6):
        assert observation_likelihood(0, 0, grid6) == 0.95

    def test_true_positive(self, grid6):
        assert observation_likelihood(1, 1, grid6) == pytest.approx(0.95)

    def test_noiseless_identity(self):
        model = uniform_model(1, 1, q_minus=0.0, q_plus=0.0)
        for z in (0, 1):
            for y in (0, 1):
                assert observation_likelihood(z, y, model) == float(z == y)

    def test_sums_to_one(self):
        model = uniform_model(1, 1, q_minus=0.13, q_plus=0.31)
        for y in (0, 1):
            assert sum(observation_likelihood(z, y, model) for z in (0, 1)) == pytest.approx(1.0)


class TestModelValidation:
    def test_sensor_rates(self):
        with pytest.raises(ValueError):
            uniform_model(2, 2, q_minus=0.5)

    def test_gamma(self):
        with pytest.raises(ValueError):
            uniform_model(2, 2, gamma=1.5)

    def test_chain_count(self, grid6):
        with pytest.raises(ValueError, match="chains"):
            grid6.replace(chains_sensed=grid6.chains_sensed[:3])

    def test_property2_flag(self, case1):
        assert case1.sample(0)[0].satisfies_property2()


class TestSampling:
    def test_case1_deterministic(self, case1):
        assert case1.sample(17) == case1.sample(17)
        assert sample_case1(case1, 17) == case1.sample(17)

    def test_distinct_indices_differ(self, case1):
        assert case1.sample(1)[1] != case1.sample(2)[1]

    def test_order_independent(self):
        s = InstanceSampler(3)
        forward = [s.sample(i) for i in range(5)]
        backward = [s.sample(i) for i in reversed(range(5))][::-1]
        assert forward == backward

    def test_case1_ranges(self, case1):
        for i in range(1000):
            model, b = case1.sample(i)
            assert model.satisfies_property2()
            assert model.width == model.height == 6
            assert (model.q_minus, model.q_plus, model.gamma) == (0.05, 0.05, 0.95)
            assert all(0.0 <= c.p01 <= 0.2 and 0.8 <= c.p11 <= 1.0 for c in model.chains_sensed)
            assert 0 <= b.location < 36 and len(b.marginals) == 36

    @pytest.mark.parametrize("rate", ["slow", "medium", "fast"])
    def test_case2_ranges(self, rate):
        s = InstanceSampler(8, case=f"case2-{rate}")
        (lo01, hi01), (lo11, hi11) = RATE_RANGES[rate]
        for i in range(300):
            model, _ = s.sample(i)
            assert not model.satisfies_property2()
            assert model.chains_sensed == model.chains_unsensed
            assert all(lo01 <= c.p01 <= hi01 and lo11 <= c.p11 <= hi11
                       for c in model.chains_sensed)
        assert sample_case2(s, 4, rate) == s.sample(4)

    def test_fast_ranges_literal(self):
        s = InstanceSampler(2, case="case2-fast")
        model, _ = s.sample(0)
        assert all(0.4 <= c.p01 <= 0.6 and 0.4 <= c.p11 <= 0.6 for c in model.chains_sensed)

    def test_unknown_case_and_rate(self):
        with pytest.raises(ValueError):
            InstanceSampler(0, case="case3")
        with pytest.raises(ValueError):
            sample_case2(InstanceSampler(0), 0, "glacial")

    def test_splitmix_reference_values(self):
        # first outputs of the reference SplitMix64 generator seeded with 0
        assert splitmix64(0) == 0xE220A8397B1DCDAF
        assert instance_key(1, 2) != instance_key(2, 1)


class TestTextFormat:
    def test_round_trip(self, case1):
        model, b = case1.sample(5)
        m2, b2 = loads(dumps(model, b))
        assert m2 == model and b2 == b

    def test_round_trip_without_belief(self, grid6):
        m2, b2 = loads(dumps(grid6))
        assert m2 == grid6 and b2 is None

    def test_comments_and_blank_lines(self):
        kv = parse_key_values("# header\n\nwidth = 2  # trailing\n")
        assert kv == {"width": "2"}

    def test_duplicate_key(self):
        with pytest.raises(ValueError, match="line 2: duplicate"):
            parse_key_values("a = 1\na = 2\n")

    def test_missing_equals(self):
        with pytest.raises(ValueError, match="line 1"):
            parse_key_values("width 2\n")

    def test_unknown_key(self, grid6):
        with pytest.raises(ValueError, match="unknown keys"):
            loads(dumps(grid6) + "colour = blue\n")

    def test_missing_key(self, grid6):
        text = "\n".join(l for l in dumps(grid6).splitlines() if not l.startswith("gamma"))
        with pytest.raises(ValueError, match="missing keys"):
            loads(text)

    def test_partial_belief(self, grid6):
        with pytest.raises(ValueError, match="together"):
            loads(dumps(grid6) + "location = 3\n")

    def test_belief_checked_against_model(self, grid6):
        text = dumps(grid6, FactoredBelief(0, (0.5,) * 36)).replace("location = 0", "location = 40")
        with pytest.raises(InvalidAction):
            loads(text)
