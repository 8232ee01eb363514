"""Closed-loop grasp episodes driven by scripted agents.

An episode reproduces the teleoperated grasping task: the pipette sits in
a holder at a fixed tilt, the agent steers the virtual tool orientation
from feedback frames alone, and eventually commands a grasp.  The grasp
succeeds when the relative line orientation is within 15 degrees (half
the minimum class spacing).  All traffic passes through the wire codec,
exactly as it would between deployed nodes.

Three agent archetypes:

* ``oracle``  reads the predicted class carried by Electrode messages and
  cancels it -- perfect perception, only usable where a prediction exists.
* ``blind``   never adjusts; it grasps after a fixed delay.  Its success
  rate is the chance that the holder tilt already sits inside tolerance.
* ``noisy``   models a human: it reads electrode intensities through a
  noisy perceptual channel, matches them against the known stimulation
  patterns, and steers by the decoded angle.  Its accuracy therefore
  tracks how decodable each feedback mode is.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import wire
from .core import ALL_TILTS, TILT_DEGREES, FeedbackMode, TiltClass
from .nodes import LocalNode, RemoteConfig, RemoteNode, TICK_HZ
from .render import bank

MAX_TICKS = 600  # 10 s at 60 Hz
_TICK_US = 16_667


@dataclass(frozen=True)
class EpisodeResult:
    success: bool
    ticks_used: int
    final_relative_deg: float
    grasped: bool


class _SteeringAgent:
    """Shared steer/settle/grasp state machine; subclasses supply estimates."""

    #: ticks of percepts gathered per estimate
    observe_ticks = 6
    #: settle margin after a slew completes
    settle_margin = 8

    def __init__(self, mode: FeedbackMode, rng: np.random.Generator, max_rounds: int = 4):
        self.mode = mode
        self.rng = rng
        self.max_rounds = max_rounds
        self.commanded = 0.0
        self.ready_at = 0
        self.rounds = 0
        self.seq = 0
        self._observed: list[wire.Electrode] = []

    def _command(self, target_deg: float, grasp: bool = False) -> wire.Command:
        self.seq += 1
        return wire.Command(
            seq=self.seq,
            t_us=0,
            target_tilt_deg=int(round(target_deg)),
            gripper_pos=15,
            mode=int(self.mode),
            flags=wire.FLAG_GRASP if grasp else 0,
        )

    def _steer_by(self, estimate_deg: float, tick: int) -> wire.Command:
        """Rotate to cancel the estimated relative angle.

        Targets outside the +/-90 mechanical range are brought back by
        half a turn: as line orientations they are the same alignment.
        """
        desired = self.commanded + estimate_deg
        if desired > 90.0:
            desired -= 180.0
        elif desired < -90.0:
            desired += 180.0
        travel = abs(desired - self.commanded)
        self.commanded = desired
        slew_ticks = int(np.ceil(travel / 90.0 * TICK_HZ))
        self.ready_at = tick + slew_ticks + self.settle_margin
        self.rounds += 1
        return self._command(desired)

    def estimate(self, frames: list[wire.Electrode]) -> Optional[int]:
        raise NotImplementedError

    def act(self, electrode: wire.Electrode, tick: int) -> Optional[wire.Command]:
        if tick < self.ready_at:
            return None
        self._observed.append(electrode)
        if len(self._observed) < self.observe_ticks:
            return None
        frames, self._observed = self._observed, []
        est = self.estimate(frames)
        if est is None or self.rounds >= self.max_rounds:
            return self._command(self.commanded, grasp=True)
        if est == 0:
            return self._command(self.commanded, grasp=True)
        return self._steer_by(est, tick)


class OracleAgent(_SteeringAgent):
    """Perfect perception: trusts the predicted class on the message."""

    def estimate(self, frames):
        predictions = [f.predicted for f in frames if f.predicted != wire.NO_PREDICTION]
        if not predictions:
            return None  # nothing to steer by: grasp where we stand
        return TILT_DEGREES[predictions[-1]]


class BlindAgent:
    """No feedback use at all; grasps after half a second, unadjusted."""

    def __init__(self, mode: FeedbackMode, rng: np.random.Generator, grasp_tick: int = 30):
        self.mode = mode
        self.grasp_tick = grasp_tick
        self.seq = 0

    def act(self, electrode: wire.Electrode, tick: int) -> Optional[wire.Command]:
        if tick < self.grasp_tick:
            return None
        self.seq += 1
        return wire.Command(seq=self.seq, t_us=0, target_tilt_deg=0, gripper_pos=15,
                            mode=int(self.mode), flags=wire.FLAG_GRASP)


class NoisyAgent(_SteeringAgent):
    """Human-like perception: noisy intensity reading + pattern matching.

    Each electrode byte is perceived on a 0..1 scale corrupted by Gaussian
    noise; averaged percepts are scored against every class's stimulation
    pattern (thumb side for the left grid, index side for the right) and
    the best-matching class is taken as the felt tilt.  Crisp patterns
    survive the noise; blurred downsized frames often do not -- which is
    the point.
    """

    def __init__(self, mode: FeedbackMode, rng: np.random.Generator,
                 perception_sigma: float = 0.30, max_rounds: int = 4):
        super().__init__(mode, rng, max_rounds)
        self.perception_sigma = perception_sigma
        entries = [bank()[cls] for cls in ALL_TILTS]
        self._templates = [
            (e.thumb.cells / e.thumb.cells.sum(), e.index_finger.cells / e.index_finger.cells.sum())
            for e in entries
        ]

    def _perceive(self, raw: bytes) -> np.ndarray:
        grid = np.frombuffer(raw, dtype=np.uint8).reshape(5, 4) / 255.0
        return grid + self.rng.normal(0.0, self.perception_sigma, size=grid.shape)

    def estimate(self, frames):
        left = np.mean([self._perceive(f.left) for f in frames], axis=0)
        right = np.mean([self._perceive(f.right) for f in frames], axis=0)
        scores = [float((left * thumb).sum() + (right * index).sum())
                  for thumb, index in self._templates]
        return TILT_DEGREES[int(np.argmax(scores))]


AGENTS = {"oracle": OracleAgent, "blind": BlindAgent, "noisy": NoisyAgent}


def make_agent(name: str, mode: FeedbackMode, seed: int, **kwargs):
    if name not in AGENTS:
        raise ValueError(f"unknown agent {name!r}; pick one of {sorted(AGENTS)}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xA6E57]))
    return AGENTS[name](mode, rng, **kwargs)


def run_episode(agent, holder_tilt: TiltClass, mode: FeedbackMode, model=None,
                sim_seed: int = 0, max_ticks: int = MAX_TICKS) -> EpisodeResult:
    """One grasp trial; deterministic given (agent state, sim seed, holder)."""
    remote = RemoteNode(RemoteConfig(holder_tilt_deg=holder_tilt.degrees, seed=sim_seed))
    local = LocalNode(mode, model)
    pending: Optional[wire.Command] = None
    for tick in range(max_ticks):
        t_us = tick * _TICK_US
        pair = wire.decode_msg(wire.encode_msg(remote.tick(pending, t_us)))
        pending = None
        electrode = wire.decode_msg(wire.encode_msg(local.tick(pair, t_us)))
        cmd = agent.act(electrode, tick)
        if cmd is None:
            continue
        cmd = wire.decode_msg(wire.encode_msg(cmd))
        if cmd.grasp:
            ack = remote.judge_grasp(cmd, t_us)
            return EpisodeResult(ack.success, tick + 1, ack.relative_centideg / 100.0, True)
        pending = cmd
    return EpisodeResult(False, max_ticks, remote.relative_deg, False)


def run_trials(agent_name: str, mode: FeedbackMode, trials: int, model=None,
               seed: int = 0, **agent_kwargs) -> list[EpisodeResult]:
    """A batch of episodes with holder tilts cycling through all classes."""
    results = []
    for trial in range(trials):
        holder = ALL_TILTS[trial % len(ALL_TILTS)]
        agent = make_agent(agent_name, mode, seed=seed * 1_000_003 + trial, **agent_kwargs)
        sim_seed = int(np.random.SeedSequence([seed, trial, 0x51E]).generate_state(1)[0])
        results.append(run_episode(agent, holder, mode, model, sim_seed=sim_seed))
    return results


def success_rate(results: list[EpisodeResult]) -> float:
    return sum(r.success for r in results) / len(results) if results else float("nan")
