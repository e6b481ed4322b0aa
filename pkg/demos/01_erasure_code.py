"""
Recovering a block from any k of its n symbols
==============================================

A 5000-byte message is cut into 1 KiB source symbols and encoded with
expansion 2.0, so each block of k symbols grows to n = 3k. Any k of the n
symbols are enough to rebuild the block.
"""

import random

from layercast import fec

message = random.Random(0).randbytes(5000)
blocks = fec.partition(message, symbol_size=1024, max_k=64)
block = blocks[0]
encoded = fec.encode(block, expansion=2.0)
print(f"k={encoded.k} source symbols, n={encoded.n} encoded symbols")

# Throw away every source symbol and keep only parity.
parity_only = [s for s in encoded.symbols if s[0] >= encoded.k][: encoded.k]
recovered = fec.decode(encoded.k, encoded.n, parity_only, pad_len=block.pad_len)
print("parity-only decode ok:", fec.reassemble([recovered]) == message)

# A random k-subset works just as well.
subset = random.Random(1).sample(encoded.symbols, encoded.k)
print("ids used:", sorted(sid for sid, _ in subset))
print("random subset decode ok:",
      fec.decode(encoded.k, encoded.n, subset).symbols == block.symbols)

# One symbol short is an error, not a guess.
try:
    fec.decode(encoded.k, encoded.n, subset[:-1])
except fec.NotEnoughSymbols as exc:
    print("short by one:", exc)
