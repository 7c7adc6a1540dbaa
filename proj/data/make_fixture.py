"""Regenerates wen_rat_fixture.tsv: a synthetic stand-in with the layout of the
rat spinal cord time course (112 genes x 9 time points plus a family column)."""

import numpy as np

SAMPLES = ["E11", "E13", "E15", "E18", "E21", "P0", "P7", "P14", "A"]
FAMILIES = ["peptide_signaling", "neurotransmitter_receptor", "neuroglial_marker",
            "neurotransmitter_metabolism", "diverse"]

WAVES = {
    "early": [1.0, 0.8, 0.4, 0.0, -0.3, -0.4, -0.5, -0.5, -0.5],
    "rising": [-0.9, -0.7, -0.3, 0.2, 0.4, 0.4, 0.3, 0.3, 0.3],
    "late": [-0.5, -0.5, -0.4, -0.2, 0.0, 0.2, 0.4, 0.5, 0.5],
    "transient": [-0.3, -0.1, 0.4, 0.6, 0.3, 0.0, -0.2, -0.3, -0.4],
    "constant": [0.0] * 9,
}
SIZES = {"early": 22, "rising": 24, "late": 20, "transient": 16, "constant": 30}
FAMILY_BIAS = {
    "early": [0.4, 0.1, 0.1, 0.1, 0.3],
    "rising": [0.2, 0.4, 0.1, 0.2, 0.1],
    "late": [0.1, 0.2, 0.4, 0.2, 0.1],
    "transient": [0.2, 0.2, 0.1, 0.4, 0.1],
    "constant": [0.2, 0.2, 0.2, 0.2, 0.2],
}


def main():
    rng = np.random.default_rng(19980203)
    rows = []
    for wave, size in SIZES.items():
        base = np.array(WAVES[wave])
        for _ in range(size):
            noise = 0.04 if wave == "constant" else 0.12
            profile = base * rng.uniform(0.8, 1.2) + rng.normal(0.0, noise, len(SAMPLES))
            family = rng.choice(FAMILIES, p=FAMILY_BIAS[wave])
            rows.append((profile, family))
    order = rng.permutation(len(rows))
    with open("wen_rat_fixture.tsv", "w") as out:
        out.write("gene\t" + "\t".join(SAMPLES) + "\tfamily\n")
        for k, idx in enumerate(order):
            profile, family = rows[idx]
            cells = "\t".join(f"{v:.4f}" for v in profile)
            out.write(f"g{k + 1:03d}\t{cells}\t{family}\n")


if __name__ == "__main__":
    main()
