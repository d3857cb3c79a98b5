"""Run the whole attack battery against one marked mesh, by hand.

Embeds the default payload into the rippled torus, applies every attack
family at a few strengths, and prints the blind-extraction correlation for
each. The same numbers come out of `meshmark bench`; this script shows the
three calls behind each table cell: attack, extract, correlate.
"""

from meshmark import corpus
from meshmark.attacks import apply_attack, parse_attack_spec
from meshmark.watermark import WatermarkKey, correlation, embed, extract, generate_watermark

KEY = WatermarkKey()

SPECS = [
    "noise:0.05", "noise:0.3", "noise:0.5",
    "smooth:0.1,10", "smooth:0.1,50",
    "quant:9", "quant:7",
    "sim:7",
    "subdiv:midpoint,1", "subdiv:loop,1", "subdiv:sqrt3,1",
    "reorder:3",
    "crop:10", "crop:30",
]


def main():
    mesh = corpus.torus()
    marked, _ = embed(mesh, KEY)
    want = generate_watermark(KEY.key1, KEY.payload)

    clean, _ = extract(marked, KEY)
    print(f"torus, {mesh.n_vertices} vertices, payload {KEY.payload} bits")
    print(f"{'attack':<20} {'corr':>6}")
    print(f"{'(none)':<20} {correlation(clean, want):>+6.2f}")

    for text in SPECS:
        spec = parse_attack_spec(text, default_seed=1)
        attacked = apply_attack(marked, spec)
        bits, _ = extract(attacked, KEY)
        print(f"{text:<20} {correlation(bits, want):>+6.2f}")

    print("\nCorrelation +1.00 means every payload bit survived. The two attacks")
    print("that break through do it by destroying geometry the mark lives in:")
    print("long smoothing erodes the norm field, cropping deletes carriers.")


if __name__ == "__main__":
    main()
