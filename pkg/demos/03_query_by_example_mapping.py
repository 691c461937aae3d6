#!/usr/bin/env python3
"""Phone mapping against a target-speaker pool.

Each source frame is replaced by a softmax-weighted blend of its nearest pool
vectors, so the output speaks the target's "phone inventory" while following
the source's frame sequence.
"""

import numpy as np

import voicemorph as vm

rng = np.random.default_rng(21)

# A toy pool: 3 clusters standing in for three phone classes of one speaker.
centers = rng.normal(size=(3, 16)) * 3.0
pool_vectors = np.concatenate([
    center + rng.normal(scale=0.3, size=(40, 16)) for center in centers
]).astype(np.float32)
pool = vm.PhonePool(pool_vectors, source_id="demo-target")
print(f"pool: {pool.size} vectors of dim {pool.dim} from '{pool.source_id}'")

# A query near cluster 1 maps into cluster 1's neighborhood.
query = centers[1] + rng.normal(scale=0.3, size=16)
mapped = vm.map_query(query, pool, vm.MapperConfig(n_candidates=4))
dist_to = [float(np.linalg.norm(mapped - c)) for c in centers]
print(f"query near cluster 1 -> mapped distances to centers: "
      f"{np.round(dist_to, 2)} (smallest should be index 1)")

# The softmax over inverse distances is deliberately winner-take-most: with a
# clearly nearest candidate, raising M barely moves the output (outliers among
# the candidates get negligible weight).
for m in (1, 4, 16):
    out = vm.map_query(query, pool, vm.MapperConfig(n_candidates=m))
    print(f"  M={m:2d}: |mapped - query| = {np.linalg.norm(out - query):.3f}")

# Between equally distant candidates it blends instead of snapping.
two = vm.PhonePool(np.array([[1.0, 0.4], [1.0, -0.4]], dtype=np.float32), "pair")
blend = vm.map_query(np.array([1.0, 0.0]), two, vm.MapperConfig(n_candidates=2))
print(f"equidistant pair blends to {np.round(blend, 3)} (their mean)")

# Frame-wise mapping of a whole "utterance" swinging between clusters.
path = np.array([centers[int(i)] for i in np.linspace(0, 2, 50).round()])
utterance = vm.FeatureSequence(
    (path + rng.normal(scale=0.3, size=path.shape)).astype(np.float32), 320)
mapped_seq = vm.map_sequence(utterance, pool)
print(f"mapped sequence: {mapped_seq.n_frames} frames, hop preserved = "
      f"{mapped_seq.hop_samples}")

# Pools are built by concatenating per-utterance features; zero frames drop.
feats = [vm.FeatureSequence(rng.normal(size=(30, 16)).astype(np.float32), 320)
         for _ in range(4)]
feats[0].frames[5] = 0.0
built, dropped = vm.build_pool(feats, "another-speaker")
print(f"build_pool: {built.size} vectors kept, {dropped} zero-norm frame dropped")
