#!/usr/bin/env python3
# Copyright 2026 The toporeform Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Build a desk-scale MNIST split (8000 train / 2000 test) in IDX format.

The 10,000 digits bundled with the `mnist` npm package are used as the
source so that no dataset download host is required; only the npm registry.
Pixels in that package are normalized floats; they are mapped back to bytes
with round(v * 255).
"""

import argparse
import json
import pathlib
import random
import struct
import subprocess
import tarfile
import tempfile

PACKAGE = "mnist@1.1.0"
SIDE = 28


def write_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), SIDE, SIDE))
        for img in images:
            f.write(bytes(img))


def write_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def load_package(package_dir):
    samples = []
    for digit in range(10):
        raw = json.loads((package_dir / "src" / "digits" / f"{digit}.json").read_text())["data"]
        count = len(raw) // (SIDE * SIDE)
        for k in range(count):
            chunk = raw[k * SIDE * SIDE:(k + 1) * SIDE * SIDE]
            samples.append(([max(0, min(255, round(v * 255))) for v in chunk], digit))
    return samples


def fetch_package(workdir):
    subprocess.run(["npm", "pack", PACKAGE, "--silent"], cwd=workdir, check=True,
                   stdout=subprocess.DEVNULL)
    tgz = next(pathlib.Path(workdir).glob("mnist-*.tgz"))
    with tarfile.open(tgz) as tar:
        tar.extractall(workdir)
    return pathlib.Path(workdir) / "package"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/mnist-desk", help="output directory")
    parser.add_argument("--package-dir", help="already extracted npm package directory")
    parser.add_argument("--train", type=int, default=8000)
    parser.add_argument("--seed", type=int, default=20251019)
    args = parser.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        package_dir = pathlib.Path(args.package_dir) if args.package_dir else fetch_package(tmp)
        samples = load_package(package_dir)

    random.Random(args.seed).shuffle(samples)
    train, test = samples[:args.train], samples[args.train:]
    write_images(out / "train-images-idx3-ubyte", [s[0] for s in train])
    write_labels(out / "train-labels-idx1-ubyte", [s[1] for s in train])
    write_images(out / "t10k-images-idx3-ubyte", [s[0] for s in test])
    write_labels(out / "t10k-labels-idx1-ubyte", [s[1] for s in test])
    print(f"wrote {len(train)} train / {len(test)} test images to {out}")


if __name__ == "__main__":
    main()
