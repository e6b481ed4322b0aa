"""
How much does level-9 DEFLATE save on Matrix Market text?
=========================================================

The bundled fixtures are ASCII matrices. Numbers printed with fixed-width
mantissas waste most of their bytes, which is why the ratios are high.
"""

from layercast.compressor import CompressionConfig, compress, decompress
from layercast.mmio import fixture_paths, read_matrix_market

cfg = CompressionConfig(enabled=True, level=9)
ratios = []
for path in fixture_paths():
    info = read_matrix_market(path)
    out, stats = compress(info.payload, cfg)
    assert decompress(out, len(info.payload)) == info.payload
    ratios.append(stats.ratio)
    print(f"{path.stem:28s} {info.format:10s} {info.field:8s} "
          f"{stats.original_len:8d} -> {stats.compressed_len:7d}  ratio {stats.ratio:.3f}")

print(f"mean ratio {sum(ratios) / len(ratios):.3f}")

# 50 MiB of zeros collapses to a few tens of KiB.
out, stats = compress(bytes(50 << 20), cfg)
print(f"50 MiB of zeros -> {stats.compressed_len} bytes")
