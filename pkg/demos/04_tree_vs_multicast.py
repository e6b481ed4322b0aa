"""
Binomial tree against one multicast stream
==========================================

The tree finishes one round later every time the world size passes a power
of two. The multicast sender emits the same bytes however many receivers
listen.
"""

from layercast.bcast import CostModel, multicast_cost, run_comparison, unicast_cost
from layercast.bench import synthetic_matrix_text
from layercast.compressor import CompressionConfig
from layercast.sender import SessionConfig

payload = synthetic_matrix_text(512 * 1024, seed=1)
cfg = SessionConfig(channel_count=5, compression=CompressionConfig(True, 9))

print(" N  tree_ms  rounds  tree_bytes   mc_ms  mc_bytes   preferred")
for n in (2, 3, 4, 8, 9, 16, 32, 42):
    tree, mc = run_comparison("demo", payload, n, cfg, delay_us=100).rows
    print(f"{n:2d} {tree['max_completion_us'] / 1e3:8.1f} {tree['tree_rounds']:6d} "
          f"{tree['network_bytes']:11d} {mc['max_completion_us'] / 1e3:7.1f} "
          f"{mc['sender_bytes']:9d}   {mc['preferred']}")

m = len(payload)
u = unicast_cost(CostModel(32, m))
c = multicast_cost(CostModel(32, m, C=5, ratio=mc["ratio"]), mc["compressed_len"])
print(f"N*m = {u.literal}, tree edges (N-1)*m = {u.exact}")
print(f"m + 2mC = {c.literal:.0f}, predicted carousel bytes = {c.predicted}")
