#!/usr/bin/env python3
"""Builds data/mnist-subset-2500-images-idx3-ubyte.gz.

The source is the 5000-image MNIST subset shipped inside the mlxtend wheel
(mlxtend/data/data/mnist_5k.csv.gz, 784 pixel columns + 1 label column,
500 images per digit, sorted by label). The first 250 images of each digit
are interleaved round-robin (0, 1, ..., 9, 0, 1, ...) so that any prefix is
class-balanced, and written as a gzipped IDX3 image file.

    pip download mlxtend --no-deps -d /tmp/mlx
    python3 tools/make_mnist_fixture.py /tmp/mlx/mlxtend-*.whl
"""
import gzip
import struct
import sys
import zipfile
from pathlib import Path

COUNT = 2500
ROWS = COLS = 28


def main() -> None:
    wheel = Path(sys.argv[1])
    out = Path(__file__).resolve().parent.parent / "data" / "mnist-subset-2500-images-idx3-ubyte.gz"
    with zipfile.ZipFile(wheel) as zf:
        text = gzip.decompress(zf.read("mlxtend/data/data/mnist_5k.csv.gz")).decode()
    by_label: dict[str, list[str]] = {}
    for line in text.splitlines():
        by_label.setdefault(line.rsplit(",", 1)[1], []).append(line)
    labels = sorted(by_label)
    per_label = COUNT // len(labels)
    rows = [by_label[lab][i] for i in range(per_label) for lab in labels]
    payload = bytearray(struct.pack(">IIII", 0x00000803, COUNT, ROWS, COLS))
    for line in rows:
        pixels = [int(float(v)) for v in line.split(",")[: ROWS * COLS]]
        payload.extend(bytes(pixels))
    out.parent.mkdir(parents=True, exist_ok=True)
    # mtime=0 keeps the archive byte-stable across regenerations
    with open(out, "wb") as fh:
        with gzip.GzipFile(fileobj=fh, mode="wb", mtime=0, compresslevel=9, filename="") as gz:
            gz.write(bytes(payload))
    print(f"wrote {out} ({COUNT} images)")


if __name__ == "__main__":
    main()
