# %% [markdown]
# # Greedy and threshold greedy on coverage functions
#
# g(S) is the total weight of universe items covered by the chosen sets.
# Greedy scans all remaining elements for every pick; threshold greedy
# takes anything whose gain clears a threshold that shrinks geometrically.

# %%
import math

from restartopt.submodular import (
    brute_force_submax,
    greedy,
    random_coverage,
    threshold_eval_bound,
    threshold_greedy,
)

# %% [markdown]
# Small instances, where the optimum is known by enumeration.

# %%
for seed in range(5):
    inst = random_coverage(12, 30, seed)
    best = brute_force_submax(inst.oracle(), 3).value
    g = greedy(inst.oracle(), 3)
    t = threshold_greedy(inst.oracle(), 3, 0.1)
    print(f"seed {seed}: greedy {g.value / best:.3f} ({g.evals_used} evals), "
          f"threshold {t.value / best:.3f} ({t.evals_used} evals)")
print("guarantees:", round(1 - 1 / math.e, 3), round(1 - 1 / math.e - 0.1, 3))

# %% [markdown]
# With k = 3 greedy is cheap.  For larger k, greedy pays about k n
# evaluations while threshold greedy pays roughly n per pass.

# %%
inst = random_coverage(100, 200, 0, density=0.02)
print(f"{'k':>4} {'greedy':>7} {'eps=.25':>8} {'eps=.1':>7}")
for k in (10, 20, 50, 100):
    g = greedy(inst.oracle(), k).evals_used
    t1 = threshold_greedy(inst.oracle(), k, 0.25).evals_used
    t2 = threshold_greedy(inst.oracle(), k, 0.1).evals_used
    print(f"{k:>4} {g:>7} {t1:>8} {t2:>7}")
print("ceilings:", threshold_eval_bound(100, 0.25), threshold_eval_bound(100, 0.1))

# %% [markdown]
# The saving depends on the instance.  With dense sets the gains drop
# quickly after a few picks, threshold greedy needs many passes to reach
# them, and greedy wins for small k.

# %%
dense = random_coverage(100, 200, 0, density=0.2)
for k in (10, 50):
    print(k, greedy(dense.oracle(), k).evals_used, threshold_greedy(dense.oracle(), k, 0.1).evals_used)
