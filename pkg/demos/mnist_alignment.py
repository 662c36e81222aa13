"""Rotational alignment accuracy on rotated and shifted MNIST digits.

Aligns every digit-"2" test image (randomly rotated, then shifted by a
(+-k, +-k) pixel offset) back to a fixed reference and reports the
cumulative percentage aligned within +-15 degrees.  Requires the MNIST
t10k IDX files; pass their directory as the first argument.

Usage: python mnist_alignment.py /path/to/mnist [digit]
"""

import sys
from pathlib import Path

from swalign.experiments import ExperimentConfig, run_alignment_experiment


def main():
    if len(sys.argv) < 2:
        sys.exit("usage: mnist_alignment.py MNIST_DIR [digit]")
    root = Path(sys.argv[1])
    digit = int(sys.argv[2]) if len(sys.argv) > 2 else 2
    cfg = ExperimentConfig(digit=digit, shifts_px=(0, 2, 4, 6), seed=0, threads=4)
    report = run_alignment_experiment(
        cfg,
        images_path=root / "t10k-images-idx3-ubyte",
        labels_path=root / "t10k-labels-idx1-ubyte",
    )
    print(f"digit {digit}: percent aligned within +-15 degrees")
    print(f"{'shift':>6} {'euclidean':>10} {'sw2':>8} {'rfsw2':>8}")
    for shift in cfg.shifts_px:
        vals = [report.percent_within(m, 15, shift_px=shift) for m in cfg.metrics]
        print(f"{shift:>4}px " + " ".join(f"{v:9.1f}" for v in vals))

    out = Path(f"mnist_digit{digit}_curves.csv")
    out.write_text(report.curves_csv())
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
