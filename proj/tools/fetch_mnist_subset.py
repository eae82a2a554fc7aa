#!/usr/bin/env python3
"""Build a 10k-digit MNIST subset in standard gzipped IDX format.

The digits come from the `mnist` npm package (10,000 samples taken from the
original MNIST set, pixels stored as floats in [0, 1]). They are quantized back
to bytes, shuffled with a fixed seed and split 8000/2000 into the usual
train / t10k file names so `idx:dir=...` can read them.

Usage: tools/fetch_mnist_subset.py [--out data/mnist10k] [--package-dir DIR]
"""
import argparse
import gzip
import json
import pathlib
import struct
import subprocess
import tarfile
import tempfile

import numpy as np

PACKAGE = "mnist@1.1.0"
SPLIT_SEED = 20240607
TRAIN_COUNT = 8000


def fetch_package(workdir: pathlib.Path) -> pathlib.Path:
    subprocess.run(["npm", "pack", PACKAGE], cwd=workdir, check=True,
                   stdout=subprocess.DEVNULL)
    tgz = next(workdir.glob("mnist-*.tgz"))
    with tarfile.open(tgz) as tar:
        tar.extractall(workdir)
    return workdir / "package"


def load_digits(package_dir: pathlib.Path):
    images, labels = [], []
    for digit in range(10):
        with open(package_dir / "src" / "digits" / f"{digit}.json") as f:
            data = np.asarray(json.load(f)["data"], dtype=np.float64)
        rows = data.reshape(-1, 784)
        images.append(np.clip(np.rint(rows * 255.0), 0, 255).astype(np.uint8))
        labels.append(np.full(rows.shape[0], digit, dtype=np.uint8))
    return np.concatenate(images), np.concatenate(labels)


def write_idx(path: pathlib.Path, array: np.ndarray, magic: int):
    header = struct.pack(">I", magic) + b"".join(
        struct.pack(">I", d) for d in array.shape)
    # mtime=0 keeps the archives byte-stable across regenerations.
    with open(path, "wb") as raw:
        with gzip.GzipFile(fileobj=raw, mode="wb", mtime=0) as f:
            f.write(header + array.tobytes())


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="data/mnist10k")
    parser.add_argument("--package-dir", default=None,
                        help="already-extracted npm package (skips npm pack)")
    args = parser.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        package_dir = (pathlib.Path(args.package_dir) if args.package_dir
                       else fetch_package(pathlib.Path(tmp)))
        images, labels = load_digits(package_dir)

    order = np.random.default_rng(SPLIT_SEED).permutation(len(labels))
    images, labels = images[order], labels[order]
    splits = {
        "train": slice(0, TRAIN_COUNT),
        "t10k": slice(TRAIN_COUNT, len(labels)),
    }
    for name, sl in splits.items():
        imgs = images[sl].reshape(-1, 28, 28)
        write_idx(out / f"{name}-images-idx3-ubyte.gz", imgs, 0x00000803)
        write_idx(out / f"{name}-labels-idx1-ubyte.gz", labels[sl], 0x00000801)
        print(f"{name}: {imgs.shape[0]} images")


if __name__ == "__main__":
    main()
