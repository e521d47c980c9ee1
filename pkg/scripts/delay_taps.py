"""Write the outputs of a 5-stage delay chain driven by a 2 kHz tone as CSV."""

import argparse
import csv
from pathlib import Path

from memfir.fixtures import tone_spec
from memfir.simulation import delay_chain, generate_tones, sample_hold


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="delay_chain.csv")
    p.add_argument("--fs", type=float, default=100e3)
    p.add_argument("--duration", type=float, default=1e-3)
    p.add_argument("--stages", type=int, default=5)
    args = p.parse_args()

    x = sample_hold(generate_tones(tone_spec("tone_2k"), 10 * args.fs, args.duration), args.fs)
    taps = delay_chain(x, args.stages)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_seconds"] + [f"tap{k}" for k in range(len(taps))])
        for n, t in enumerate(x.times):
            w.writerow([repr(float(t))] + [repr(float(tap[n])) for tap in taps])
    print(f"wrote {len(x)} samples x {len(taps)} taps to {out}")


if __name__ == "__main__":
    main()
