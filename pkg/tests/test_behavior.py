import itertools

import pytest

from pfsim.behavior import (
    Blackboard,
    BehaviorNode,
    CommandSlotError,
    TickStatus,
    UnknownLeafError,
    action,
    build_following_tree,
    condition,
    count_kinds,
    fallback,
    inverter,
    parallel,
    sequence,
    succeeder,
    tick,
)

R, S, F = TickStatus.RUNNING, TickStatus.SUCCESS, TickStatus.FAILURE


def scripted(statuses):
    """Handlers named s0..sN returning fixed statuses, with call counters."""
    calls = {}

    def make(name, status):
        def handler(bb):
            calls[name] = calls.get(name, 0) + 1
            return status
        return handler

    handlers = {f"s{i}": make(f"s{i}", st) for i, st in enumerate(statuses)}
    return handlers, calls


def leaves(n):
    return [action(f"s{i}") for i in range(n)]


def fallback_truth(statuses):
    for s in statuses:
        if s is not F:
            return s
    return F


def sequence_truth(statuses):
    for s in statuses:
        if s is not S:
            return s
    return S


def parallel_truth(statuses, m):
    wins = sum(1 for s in statuses if s is S)
    losses = sum(1 for s in statuses if s is F)
    if wins >= m:
        return S
    if losses > len(statuses) - m:
        return F
    return R


class TestTickSemantics:
    @pytest.mark.parametrize("length", [1, 2, 3])
    def test_fallback_exhaustive(self, length):
        for statuses in itertools.product([R, S, F], repeat=length):
            handlers, calls = scripted(statuses)
            node = fallback(*leaves(length))
            assert tick(node, Blackboard(), handlers) is fallback_truth(statuses)
            # short-circuit: nothing after the first non-failure runs
            first = next((i for i, s in enumerate(statuses) if s is not F), length - 1)
            for i in range(length):
                assert calls.get(f"s{i}", 0) == (1 if i <= first else 0)

    @pytest.mark.parametrize("length", [1, 2, 3])
    def test_sequence_exhaustive(self, length):
        for statuses in itertools.product([R, S, F], repeat=length):
            handlers, calls = scripted(statuses)
            node = sequence(*leaves(length))
            assert tick(node, Blackboard(), handlers) is sequence_truth(statuses)
            first = next((i for i, s in enumerate(statuses) if s is not S), length - 1)
            for i in range(length):
                assert calls.get(f"s{i}", 0) == (1 if i <= first else 0)

    def test_parallel_two_of_three_exhaustive(self):
        for statuses in itertools.product([R, S, F], repeat=3):
            handlers, calls = scripted(statuses)
            node = parallel(2, *leaves(3))
            assert tick(node, Blackboard(), handlers) is parallel_truth(statuses, 2)
            # parallel always ticks every child exactly once
            assert all(calls[f"s{i}"] == 1 for i in range(3))

    def test_decorators(self):
        handlers, _ = scripted([S, F, R])
        assert tick(inverter(action("s0")), Blackboard(), handlers) is F
        assert tick(inverter(action("s1")), Blackboard(), handlers) is S
        assert tick(inverter(action("s2")), Blackboard(), handlers) is R
        assert tick(succeeder(action("s1")), Blackboard(), handlers) is S
        assert tick(succeeder(action("s2")), Blackboard(), handlers) is R

    def test_condition_bool_coercion(self):
        handlers = {"yes": lambda bb: True, "no": lambda bb: False}
        assert tick(condition("yes"), Blackboard(), handlers) is S
        assert tick(condition("no"), Blackboard(), handlers) is F

    def test_unknown_leaf(self):
        with pytest.raises(UnknownLeafError):
            tick(action("nope"), Blackboard(), {})

    def test_condition_tick_idempotent(self):
        handlers = {"a": lambda bb: True, "b": lambda bb: False}
        tree = fallback(sequence(condition("a"), condition("b")), condition("a"))
        bb = Blackboard()
        assert tick(tree, bb, handlers) is tick(tree, bb, handlers)


class TestNodeValidation:
    def test_leaves_take_no_children(self):
        with pytest.raises(ValueError):
            BehaviorNode("action", name="x", children=[action("y")])

    def test_decorator_arity(self):
        with pytest.raises(ValueError):
            BehaviorNode("decorator", transform="inverter", children=[])

    def test_parallel_threshold_range(self):
        with pytest.raises(ValueError):
            parallel(4, *leaves(3))

    def test_composites_need_children(self):
        with pytest.raises(ValueError):
            BehaviorNode("fallback")


class TestFollowingTree:
    def test_node_census(self):
        counts = count_kinds(build_following_tree())
        assert counts["fallback"] == 2
        assert counts["sequence"] == 2
        assert counts["action"] == 4
        assert counts["condition"] == 2

    def handlers(self, identified, prediction_valid, gaze):
        calls = []

        def act(name, status=R):
            def h(bb):
                calls.append(name)
                return status
            return h

        handlers = {
            "target_identified": lambda bb: identified,
            "prediction_valid": lambda bb: prediction_valid,
            "follow_target": act("follow_target"),
            "navigate_to_prediction": act("navigate_to_prediction"),
            "gaze_search": act("gaze_search", gaze),
            "waypoint_search": act("waypoint_search"),
        }
        return handlers, calls

    def test_identified_short_circuits_to_follow(self):
        handlers, calls = self.handlers(True, True, R)
        assert tick(build_following_tree(), Blackboard(), handlers) is R
        assert calls == ["follow_target"]

    def test_lost_with_fresh_prediction_navigates(self):
        handlers, calls = self.handlers(False, True, R)
        tick(build_following_tree(), Blackboard(), handlers)
        assert calls == ["navigate_to_prediction"]

    def test_gaze_failure_falls_to_waypoint_search(self):
        handlers, calls = self.handlers(False, False, F)
        tick(build_following_tree(), Blackboard(), handlers)
        assert calls == ["gaze_search", "waypoint_search"]

    def test_each_action_invoked_at_most_once(self):
        for identified in (True, False):
            for predv in (True, False):
                for gaze in (R, S, F):
                    handlers, calls = self.handlers(identified, predv, gaze)
                    tick(build_following_tree(), Blackboard(), handlers)
                    assert all(calls.count(name) <= 1 for name in set(calls))

    def test_serializable(self):
        d = build_following_tree().to_dict()
        assert d["kind"] == "fallback"
        assert len(d["children"]) == 3


class TestBlackboard:
    def test_command_slots_single_write(self):
        bb = Blackboard()
        bb.begin_tick(0.1, 0.1)
        bb.set_nav("cmd")
        with pytest.raises(CommandSlotError):
            bb.set_nav("cmd2")
        bb.begin_tick(0.2, 0.1)
        bb.set_nav("cmd3")  # fresh tick, fresh slot
        assert bb.nav_command == "cmd3"
