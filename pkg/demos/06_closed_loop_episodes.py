"""Closed-loop grasping: how much does each feedback mode help?

A scripted agent steers the virtual tool from electrode feedback alone
and grasps when it believes the pipette is aligned (within 15 degrees).
The "noisy" agent perceives intensities through a noisy channel, so its
success tracks how decodable each feedback mode is: crisp class patterns
beat blurry downsized forces beat nothing.
"""

from tiltxter import ContactParams, FeedbackMode, gen_dataset, run_trials, split_dataset, success_rate
from tiltxter.nodes import TICK_BUDGET_MS, bench_local_tick
from tiltxter.tiltnet import TiltNet, TrainConfig, train

# A quick model (thinned corpus) is plenty for the demo; the command-line
# tool trains the full 50-epoch one.
records = [r for r in gen_dataset(ContactParams(rng_seed=9), reps_per_cell=4)
           if r.gripper_pos % 3 == 0]
train_set, val_set, _ = split_dataset(records, seed=9)
model, _ = train(TiltNet(seed=9), train_set, val_set,
                 TrainConfig(epochs=12, batch_size=32, seed=9))

print("mode        agent   success over 27 episodes")
for mode in (FeedbackMode.NONE, FeedbackMode.DOWNSIZED, FeedbackMode.CNN_PATTERN):
    rate = success_rate(run_trials("noisy", mode, trials=27, model=model, seed=1))
    print(f"{mode.name:<12}noisy   {rate:.3f}")

# Reference points: an oracle that reads the prediction directly, and a
# blind agent that grasps wherever it starts (it succeeds only when the
# holder already sits at 0 degrees -> exactly 1/9 of a full angle cycle).
print(f"{'CNN_PATTERN':<12}oracle  "
      f"{success_rate(run_trials('oracle', FeedbackMode.CNN_PATTERN, 27, model=model, seed=1)):.3f}")
print(f"{'NONE':<12}blind   "
      f"{success_rate(run_trials('blind', FeedbackMode.NONE, 27, seed=1)):.3f}")

# The whole local pipeline -- decode, downsize, classify, mask, encode --
# must fit in one 60 Hz tick.  It does, with two orders of magnitude of
# headroom.
stats = bench_local_tick(ticks=300, mode=FeedbackMode.CNN_PATTERN, model=model)
print(f"\nlocal tick p99: {stats.percentile('total', 99):.3f} ms "
      f"(budget {TICK_BUDGET_MS:.2f} ms)")
