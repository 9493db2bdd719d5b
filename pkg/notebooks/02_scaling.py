# %% [markdown]
# # Scaling for augmentation
#
# Maximize c x over an explicit set of 0/1 points, using only an oracle
# that returns some strictly better point.  On the cube with c = (1, 2, 4,
# ..., 2^(n-1)) a careless oracle climbs through every point.

# %%
import numpy as np

from restartopt.augmentation import (
    ImprovingOracle,
    augment,
    bit_scaling,
    bit_scaling_bound,
    geometric_scaling,
    make_cube_powers,
    make_random_01_polytope,
)

cube = make_cube_powers(10)
x0 = np.zeros(10, dtype=int)
for policy in ("max_improvement", "min_improvement", "lexicographic"):
    _, steps = augment(cube, ImprovingOracle(cube, policy), x0, cube.c)
    print(f"{policy:16s} {steps:5d} steps")

# %% [markdown]
# Bit scaling first solves with the top bit of every c_i, then adds one
# bit at a time.  Each phase starts within n of optimal, so the worst
# oracle now costs at most n steps per bit.

# %%
history = []
x, steps, _ = bit_scaling(cube, x0, policy="min_improvement", history=history)
print(steps, "steps, bound", bit_scaling_bound(cube))
print([(h.mu, h.steps) for h in history])

# %% [markdown]
# Geometric scaling instead penalizes moving far from the current point by
# mu |x - x~|_1 and halves mu after every phase.

# %%
history = []
x, steps, _ = geometric_scaling(cube, x0, policy="min_improvement", history=history)
print(steps, "steps over", len(history), "phases")
print([h.steps for h in history])

# %% [markdown]
# A random instance: 50 of the 256 points of {0,1}^8.

# %%
inst = make_random_01_polytope(8, 50, seed=1)
best = max(inst.value(p) for p in inst.points)
for run in (bit_scaling, geometric_scaling):
    x, steps, trace = run(inst, inst.points[0], policy="min_improvement")
    print(run.__name__, steps, "steps, value", inst.value(x), "of", best)
