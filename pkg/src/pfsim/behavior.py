"""Behavior-tree engine and the person-following executive tree.

Memory-less semantics: every tick restarts evaluation at the root, so
handlers that need continuity keep their own episode state on the
blackboard scratch space. A tick invokes each action handler at most
once by construction (each leaf appears once in the tree).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Mapping


class UnknownLeafError(KeyError):
    """Leaf name without a registered handler."""


class CommandSlotError(RuntimeError):
    """A blackboard command slot was written twice in one tick."""


class TickStatus(str, Enum):
    RUNNING = "running"
    SUCCESS = "success"
    FAILURE = "failure"


@dataclass
class BehaviorNode:
    kind: str          # fallback | sequence | parallel | decorator | action | condition
    name: str = ""
    children: list["BehaviorNode"] = field(default_factory=list)
    threshold: int = 0      # parallel: successes required (M of N)
    transform: str = ""     # decorator: inverter | succeeder

    def __post_init__(self):
        if self.kind in ("action", "condition"):
            if self.children:
                raise ValueError(f"{self.kind} nodes take no children")
            if not self.name:
                raise ValueError(f"{self.kind} nodes need a handler name")
        elif self.kind == "decorator":
            if len(self.children) != 1:
                raise ValueError("decorator takes exactly one child")
            if self.transform not in ("inverter", "succeeder"):
                raise ValueError(f"unknown decorator transform {self.transform!r}")
        elif self.kind in ("fallback", "sequence", "parallel"):
            if not self.children:
                raise ValueError(f"{self.kind} needs at least one child")
            if self.kind == "parallel" and not (1 <= self.threshold <= len(self.children)):
                raise ValueError("parallel threshold must be in 1..N")
        else:
            raise ValueError(f"unknown node kind {self.kind!r}")

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"kind": self.kind}
        if self.name:
            d["name"] = self.name
        if self.kind == "parallel":
            d["threshold"] = self.threshold
        if self.kind == "decorator":
            d["transform"] = self.transform
        if self.children:
            d["children"] = [c.to_dict() for c in self.children]
        return d


def fallback(*children: BehaviorNode) -> BehaviorNode:
    return BehaviorNode("fallback", children=list(children))


def sequence(*children: BehaviorNode) -> BehaviorNode:
    return BehaviorNode("sequence", children=list(children))


def parallel(threshold: int, *children: BehaviorNode) -> BehaviorNode:
    return BehaviorNode("parallel", children=list(children), threshold=threshold)


def inverter(child: BehaviorNode) -> BehaviorNode:
    return BehaviorNode("decorator", children=[child], transform="inverter")


def succeeder(child: BehaviorNode) -> BehaviorNode:
    return BehaviorNode("decorator", children=[child], transform="succeeder")


def action(name: str) -> BehaviorNode:
    return BehaviorNode("action", name=name)


def condition(name: str) -> BehaviorNode:
    return BehaviorNode("condition", name=name)


@dataclass
class Blackboard:
    """Shared world-state snapshot the tree reads and writes.

    Command slots accept at most one write per tick; begin_tick() resets
    them together with the per-tick bookkeeping.
    """

    time: float = 0.0
    dt: float = 0.1
    robot_pose: Any = None
    target_visible: bool = False
    target_identified: bool = False
    target_estimate: Any = None    # (position, velocity) when pinned
    prediction: Any = None
    waypoint: Any = None
    belief: Any = None
    grid: Any = None
    tracks: Any = None
    scratch: dict = field(default_factory=dict)
    nav_command: Any = None
    gaze_command: Any = None
    last_action: str = ""

    def begin_tick(self, time: float, dt: float) -> None:
        self.time = time
        self.dt = dt
        self.nav_command = None
        self.gaze_command = None
        self._nav_written = False
        self._gaze_written = False
        self.last_action = ""

    def set_nav(self, cmd) -> None:
        if getattr(self, "_nav_written", False):
            raise CommandSlotError("nav command already written this tick")
        self._nav_written = True
        self.nav_command = cmd

    def set_gaze(self, cmd) -> None:
        if getattr(self, "_gaze_written", False):
            raise CommandSlotError("gaze command already written this tick")
        self._gaze_written = True
        self.gaze_command = cmd


Handler = Callable[[Blackboard], Any]


def tick(node: BehaviorNode, bb: Blackboard,
         handlers: Mapping[str, Handler]) -> TickStatus:
    """One root-to-leaf evaluation pass.

    Fallback returns the first non-failure child status (children after it
    are not ticked); sequence the first non-success; parallel ticks all
    children and applies its M-of-N policy; decorators transform the child
    status; leaves dispatch to their registered handler. Condition
    handlers may return a bool, action handlers a TickStatus.
    """
    if node.kind == "fallback":
        for child in node.children:
            status = tick(child, bb, handlers)
            if status is not TickStatus.FAILURE:
                return status
        return TickStatus.FAILURE
    if node.kind == "sequence":
        for child in node.children:
            status = tick(child, bb, handlers)
            if status is not TickStatus.SUCCESS:
                return status
        return TickStatus.SUCCESS
    if node.kind == "parallel":
        statuses = [tick(child, bb, handlers) for child in node.children]
        wins = sum(1 for s in statuses if s is TickStatus.SUCCESS)
        losses = sum(1 for s in statuses if s is TickStatus.FAILURE)
        if wins >= node.threshold:
            return TickStatus.SUCCESS
        if losses > len(node.children) - node.threshold:
            return TickStatus.FAILURE
        return TickStatus.RUNNING
    if node.kind == "decorator":
        status = tick(node.children[0], bb, handlers)
        if node.transform == "inverter":
            if status is TickStatus.SUCCESS:
                return TickStatus.FAILURE
            if status is TickStatus.FAILURE:
                return TickStatus.SUCCESS
            return status
        # succeeder: any finished child counts as success
        return TickStatus.RUNNING if status is TickStatus.RUNNING else TickStatus.SUCCESS
    if node.kind in ("action", "condition"):
        try:
            handler = handlers[node.name]
        except KeyError:
            raise UnknownLeafError(node.name) from None
        result = handler(bb)
        if node.kind == "condition":
            if isinstance(result, TickStatus):
                return result
            return TickStatus.SUCCESS if result else TickStatus.FAILURE
        if node.kind == "action":
            bb.last_action = node.name
        if not isinstance(result, TickStatus):
            raise TypeError(
                f"action handler {node.name!r} returned {result!r}, expected TickStatus"
            )
        return result
    raise ValueError(f"unknown node kind {node.kind!r}")


FOLLOW_TARGET = "follow_target"
NAVIGATE_TO_PREDICTION = "navigate_to_prediction"
GAZE_SEARCH = "gaze_search"
WAYPOINT_SEARCH = "waypoint_search"
TARGET_IDENTIFIED = "target_identified"
PREDICTION_VALID = "prediction_valid"


def build_following_tree() -> BehaviorNode:
    """The person-following executive: two fallbacks, two sequences.

    Root fallback tries, in order: follow the identified target, navigate
    to a fresh trajectory prediction, and otherwise search (gaze first,
    way-point search when gazing fails).
    """
    return fallback(
        sequence(condition(TARGET_IDENTIFIED), action(FOLLOW_TARGET)),
        sequence(condition(PREDICTION_VALID), action(NAVIGATE_TO_PREDICTION)),
        fallback(action(GAZE_SEARCH), action(WAYPOINT_SEARCH)),
    )


def count_kinds(node: BehaviorNode) -> dict[str, int]:
    counts: dict[str, int] = {}

    def walk(n: BehaviorNode):
        counts[n.kind] = counts.get(n.kind, 0) + 1
        for c in n.children:
            walk(c)

    walk(node)
    return counts
