"""
Simulated cascades and seeding strategy
=======================================

Independent-cascade memes on a planted network. Seeding in several
communities at once reaches more blogs than seeding inside one.
"""
import numpy as np

from memepredict.sim import CascadeSpec, NetworkSpec, SeedStrategy, generate_network, simulate_cascade

g = generate_network(NetworkSpec(n_communities=10, community_size=60, p_intra=0.12, p_inter=0.001,
                                 core_size=12, p_core=0.02, seed=2))

traj = simulate_cascade(g, CascadeSpec(0.1, n_seeds=3, rng_seed=0), meme_id="example")
print(f"meme {traj.meme_id}: {len(traj.times)} posts over {traj.times[-1]:.1f} hours")
print("first events:", [(round(float(t), 2), s) for t, s in zip(traj.times[:5], traj.sources[:5])])

for strategy in SeedStrategy:
    sizes = [len(simulate_cascade(g, CascadeSpec(0.1, 4, strategy, rng_seed=r)).times) for r in range(200)]
    print(f"{strategy.value:>24}: mean size {np.mean(sizes):6.1f}, median {np.median(sizes):5.0f}")
